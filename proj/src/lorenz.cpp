#include "mvf/lorenz.hpp"

#include <cmath>

#include <fmt/format.h>

#include "mvf/error.hpp"

namespace mvf {

void LorenzParams::validate() const {
    require(dt > 0 && std::isfinite(dt), "lorenz: dt must be positive");
    require(n_record >= 1, "lorenz: n_record must be >= 1");
    require(subsample >= 1, "lorenz: subsample must be >= 1");
    for (double v : x0) {
        require(std::isfinite(v), "lorenz: x0 must be finite");
    }
}

State3 lorenz_rhs(const State3& s, const LorenzParams& p) {
    return {p.sigma * (s[1] - s[0]), s[0] * (p.rho - s[2]) - s[1], s[0] * s[1] - p.beta * s[2]};
}

State3 rk4_step(const State3& state, double dt, const LorenzParams& params) {
    auto axpy = [](const State3& x, double a, const State3& k) {
        return State3{x[0] + a * k[0], x[1] + a * k[1], x[2] + a * k[2]};
    };
    const State3 k1 = lorenz_rhs(state, params);
    const State3 k2 = lorenz_rhs(axpy(state, dt / 2, k1), params);
    const State3 k3 = lorenz_rhs(axpy(state, dt / 2, k2), params);
    const State3 k4 = lorenz_rhs(axpy(state, dt, k3), params);
    State3 out;
    for (int i = 0; i < 3; ++i) {
        out[i] = state[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!std::isfinite(out[i])) {
            throw Error("numeric", fmt::format("lorenz integration blew up (dt={})", dt));
        }
    }
    return out;
}

SeriesFrame lorenz_trajectory(const LorenzParams& params) {
    params.validate();
    State3 s = params.x0;
    for (std::size_t i = 0; i < params.transient_skip * params.subsample; ++i) {
        s = rk4_step(s, params.dt, params);
    }
    std::vector<Timestamp> times(params.n_record);
    std::vector<double> x(params.n_record), y(params.n_record), z(params.n_record);
    for (std::size_t r = 0; r < params.n_record; ++r) {
        if (r > 0) {
            for (std::size_t i = 0; i < params.subsample; ++i) {
                s = rk4_step(s, params.dt, params);
            }
        }
        times[r] = static_cast<Timestamp>(r);
        x[r] = s[0];
        y[r] = s[1];
        z[r] = s[2];
    }
    return SeriesFrame(std::move(times), {{"x", std::move(x)}, {"y", std::move(y)}, {"z", std::move(z)}});
}

} // namespace mvf
