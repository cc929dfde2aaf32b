#pragma once

// Deterministic SVG rendering of a 2-D decomposition snapshot: cells colored
// by status, obstacles, stored samples, and an optional path.

#include <cstdio>
#include <stdexcept>
#include <string>
#include <variant>

#include "pcd/collision.hpp"
#include "pcd/decomposition.hpp"
#include "pcd/geometry.hpp"

namespace pcd {

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v * 1000.0);
    return buf;
}

// SVG y grows downward; the configuration space is drawn with y up.
inline std::string svg_rect(const Box& b, const std::string& style) {
    return "<rect x=\"" + svg_num(b.lower[0]) + "\" y=\"" + svg_num(1.0 - b.upper[1]) +
           "\" width=\"" + svg_num(b.width(0)) + "\" height=\"" + svg_num(b.width(1)) + "\" " +
           style + "/>\n";
}

inline void svg_obstacle(std::string& out, const Obstacle& o) {
    static const std::string style =
        "fill=\"#4a6fa5\" fill-opacity=\"0.55\" stroke=\"#2c4a75\" stroke-width=\"1\"";
    if (const auto* b = std::get_if<BoxObstacle>(&o.shape)) {
        out += svg_rect(b->box, style);
        return;
    }
    if (const auto* u = std::get_if<UnionObstacle>(&o.shape)) {
        for (const auto& m : u->members) svg_obstacle(out, m);
        return;
    }
    // rasterize non-box shapes on a fixed grid, merging runs per row
    constexpr int kGrid = 128;
    const double step = 1.0 / kGrid;
    for (int row = 0; row < kGrid; ++row) {
        int run_start = -1;
        for (int col = 0; col <= kGrid; ++col) {
            bool hit = false;
            if (col < kGrid) {
                const Configuration c{(col + 0.5) * step, (row + 0.5) * step};
                hit = detail::obstacle_contains(o, c);
            }
            if (hit && run_start < 0) run_start = col;
            if (!hit && run_start >= 0) {
                Box cellbox({run_start * step, row * step}, {col * step, (row + 1) * step});
                out += svg_rect(cellbox, style);
                run_start = -1;
            }
        }
    }
}

}  // namespace detail

inline std::string render_svg(const SplitTree& tree, const Scene& scene,
                              const Polyline* path = nullptr) {
    if (scene.dimension != 2)
        throw std::invalid_argument("render supports 2-D scenes only");
    std::string out;
    out +=
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"1000\" height=\"1000\" "
        "viewBox=\"0 0 1000 1000\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"1000\" height=\"1000\" fill=\"#ffffff\"/>\n";

    for (int id : tree.leaves()) {
        const Cell& c = tree.cell(id);
        std::string fill = "#f4f4f4";  // sample-less cell (fresh fuzz trees)
        if (c.free_count + c.colliding_count > 0) {
            switch (c.status()) {
                case CellStatus::PossiblyFree: fill = "#e3f2e1"; break;
                case CellStatus::PossiblyOccupied: fill = "#f6dddd"; break;
                case CellStatus::Mixed: fill = "#f7f0d8"; break;
            }
        }
        out += detail::svg_rect(c.box, "fill=\"" + fill +
                                           "\" stroke=\"#9a9a9a\" stroke-width=\"0.6\"");
    }

    for (const auto& o : scene.obstacles) detail::svg_obstacle(out, o);

    for (int id : tree.leaves()) {
        for (const auto& s : tree.cell(id).samples) {
            out += "<circle cx=\"" + detail::svg_num(s.q[0]) + "\" cy=\"" +
                   detail::svg_num(1.0 - s.q[1]) + "\" r=\"3\" fill=\"" +
                   (s.colliding ? "#b03030" : "#2f7d32") + "\"/>\n";
        }
    }

    if (path && !path->waypoints.empty()) {
        out += "<polyline points=\"";
        for (std::size_t i = 0; i < path->waypoints.size(); ++i) {
            if (i) out += ' ';
            out += detail::svg_num(path->waypoints[i][0]) + "," +
                   detail::svg_num(1.0 - path->waypoints[i][1]);
        }
        out += "\" fill=\"none\" stroke=\"#1a1a1a\" stroke-width=\"2.5\"/>\n";
    }

    out += "</svg>\n";
    return out;
}

}  // namespace pcd
