#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>

#include "engine.hpp"
#include "heptagrid.hpp"

// SVG snapshots in the Poincare disc. Coordinates are disc units (y up);
// the viewBox maps the unit disc onto `size` pixels.

namespace hca {

struct RenderSpec {
    int radius = 3;
    // indexed by rank W Y B R M V
    std::array<std::string, 6> palette{"#ffffff", "#f2d21b", "#2f5fd0", "#d22f2f", "#b05fc0", "#6a1b9a"};
    double stroke = 0.002;
    int size = 1024;
    bool sector_rays = false;
};

namespace detail {
inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9f", v);
    return buf;
}
}  // namespace detail

inline std::string render_window(const Configuration& c, const RenderSpec& spec) {
    if (spec.radius < 0 || spec.radius > c.window().radius())
        throw std::invalid_argument("render radius " + std::to_string(spec.radius) + " outside the configuration window " +
                                    std::to_string(c.window().radius()));
    if (spec.size <= 0) throw std::invalid_argument("size must be positive");
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.size << "\" height=\"" << spec.size
       << "\" viewBox=\"-1.02 -1.02 2.04 2.04\">\n"
       << "<circle cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" stroke=\"#888\" stroke-width=\"" << detail::fmt(spec.stroke)
       << "\"/>\n"
       << "<g stroke=\"#444\" stroke-width=\"" << detail::fmt(spec.stroke) << "\" stroke-linejoin=\"round\">\n";
    for (int r = 0; r <= spec.radius; ++r)
        for (int slot : c.window().ring(r)) {
            const WindowTile& t = c.window().tile(slot);
            os << "<polygon data-tile=\"" << to_string(t.address) << "\" fill=\"" << spec.palette[rank(c.at(slot))]
               << "\" points=\"";
            for (int k = 0; k < 7; ++k) {
                auto p = to_poincare(t.vertices[k]);
                os << (k ? " " : "") << detail::fmt(p[0]) << "," << detail::fmt(-p[1]);
            }
            os << "\"/>\n";
        }
    os << "</g>\n";
    if (spec.sector_rays) {
        // rays through the mid-points of the center's sides, one per sector boundary
        const WindowTile& ctr = c.window().tile(0);
        os << "<g stroke=\"#999\" stroke-dasharray=\"0.01 0.01\" stroke-width=\"" << detail::fmt(spec.stroke) << "\">\n";
        for (int k = 0; k < 7; ++k) {
            auto p = to_poincare(ctr.vertices[k]);
            double n = std::hypot(p[0], p[1]);
            os << "<line x1=\"0\" y1=\"0\" x2=\"" << detail::fmt(p[0] / n) << "\" y2=\"" << detail::fmt(-p[1] / n) << "\"/>\n";
        }
        os << "</g>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace hca
