#pragma once

#include <array>
#include <cstddef>

#include "mvf/timeseries.hpp"

namespace mvf {

using State3 = std::array<double, 3>;

struct LorenzParams {
    double sigma = 10.0;
    double rho = 28.0;
    double beta = 8.0 / 3.0;
    double dt = 0.01;
    std::size_t subsample = 5;      // integration steps per recorded step
    std::size_t n_record = 5000;
    State3 x0{1.0, 1.0, 1.0};
    std::size_t transient_skip = 1000; // recorded-step equivalents discarded

    void validate() const;
};

State3 lorenz_rhs(const State3& s, const LorenzParams& params);

/// One classical RK4 step. Throws on a non-finite result.
State3 rk4_step(const State3& state, double dt, const LorenzParams& params);

/// Columns x, y, z; timestamps 0..n_record-1.
SeriesFrame lorenz_trajectory(const LorenzParams& params);

} // namespace mvf
