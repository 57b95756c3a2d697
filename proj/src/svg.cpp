#include "mvf/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>

namespace mvf::svg {

namespace {

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

struct Bounds {
    double xmin = std::numeric_limits<double>::infinity();
    double xmax = -std::numeric_limits<double>::infinity();
    double ymin = std::numeric_limits<double>::infinity();
    double ymax = -std::numeric_limits<double>::infinity();

    void pad() {
        if (!std::isfinite(xmin)) {
            xmin = 0, xmax = 1, ymin = 0, ymax = 1;
        }
        if (xmax <= xmin) {
            xmin -= 0.5, xmax += 0.5;
        }
        if (ymax <= ymin) {
            ymin -= 0.5, ymax += 0.5;
        }
        const double dx = 0.04 * (xmax - xmin);
        const double dy = 0.04 * (ymax - ymin);
        xmin -= dx, xmax += dx, ymin -= dy, ymax += dy;
    }
};

std::string tick(double v) { return fmt::format("{:.3g}", v); }

} // namespace

std::string render(const std::vector<Panel>& panels, int panel_width, int panel_height) {
    const int n = std::max<int>(1, static_cast<int>(panels.size()));
    const int width = panel_width * n;
    std::string out = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" "
        "font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n",
        width, panel_height, width, panel_height);

    const double left = 52, right = 12, top = 28, bottom = 40;
    for (std::size_t pi = 0; pi < panels.size(); ++pi) {
        const Panel& panel = panels[pi];
        const double ox = static_cast<double>(pi) * panel_width;
        const double pw = panel_width - left - right;
        const double ph = panel_height - top - bottom;

        Bounds b;
        for (const auto& s : panel.series) {
            for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
                if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
                    b.xmin = std::min(b.xmin, s.x[i]);
                    b.xmax = std::max(b.xmax, s.x[i]);
                    b.ymin = std::min(b.ymin, s.y[i]);
                    b.ymax = std::max(b.ymax, s.y[i]);
                }
            }
        }
        b.pad();
        auto sx = [&](double x) { return ox + left + (x - b.xmin) / (b.xmax - b.xmin) * pw; };
        auto sy = [&](double y) { return top + ph - (y - b.ymin) / (b.ymax - b.ymin) * ph; };

        out += fmt::format("<g>\n<text x=\"{:.1f}\" y=\"18\" text-anchor=\"middle\" font-size=\"13\">{}</text>\n",
                           ox + left + pw / 2, escape(panel.title));
        out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" "
                           "stroke=\"#444\"/>\n",
                           ox + left, top, pw, ph);
        for (int t = 0; t <= 4; ++t) {
            const double xv = b.xmin + (b.xmax - b.xmin) * t / 4.0;
            const double yv = b.ymin + (b.ymax - b.ymin) * t / 4.0;
            out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", sx(xv),
                               top + ph + 14, tick(xv));
            out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{}</text>\n", ox + left - 4,
                               sy(yv) + 4, tick(yv));
        }
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{}</text>\n", ox + left + pw / 2,
                           static_cast<double>(panel_height) - 6, escape(panel.x_label));
        out += fmt::format("<text transform=\"translate({:.1f},{:.1f}) rotate(-90)\" text-anchor=\"middle\">{}</text>\n",
                           ox + 12, top + ph / 2, escape(panel.y_label));
        if (panel.diagonal) {
            const double lo = std::max(b.xmin, b.ymin);
            const double hi = std::min(b.xmax, b.ymax);
            if (hi > lo) {
                out += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#999\" "
                                   "stroke-dasharray=\"4 3\"/>\n",
                                   sx(lo), sy(lo), sx(hi), sy(hi));
            }
        }
        double legend_y = top + 12;
        for (const auto& s : panel.series) {
            const std::size_t m = std::min(s.x.size(), s.y.size());
            if (s.line) {
                std::string pts;
                for (std::size_t i = 0; i < m; ++i) {
                    if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
                        pts += fmt::format("{:.1f},{:.1f} ", sx(s.x[i]), sy(s.y[i]));
                    }
                }
                out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\" points=\"{}\"/>\n",
                                   s.color, pts);
            } else {
                out += fmt::format("<g fill=\"{}\" fill-opacity=\"0.6\">\n", s.color);
                for (std::size_t i = 0; i < m; ++i) {
                    if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
                        out += fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"{:.1f}\"/>\n", sx(s.x[i]),
                                           sy(s.y[i]), s.radius);
                    }
                }
                out += "</g>\n";
            }
            if (!s.label.empty()) {
                out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" fill=\"{}\">{}</text>\n", ox + left + 6, legend_y,
                                   s.color, escape(s.label));
                legend_y += 13;
            }
        }
        out += "</g>\n";
    }
    out += "</svg>\n";
    return out;
}

} // namespace mvf::svg
