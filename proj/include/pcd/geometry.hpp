#pragma once

// Metric-space primitives over the unit cube [0,1]^n: configurations,
// axis-aligned boxes, polylines, Chebyshev geometry and face adjacency.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

namespace pcd {

// A point in [0,1]^n.
using Configuration = std::vector<double>;

// Absolute tolerance for face-coordinate equality. Split coordinates are
// stored once and shared by both children, so exact equality holds for
// boxes coming out of a split tree; the tolerance only guards boxes that
// were reconstructed from text.
inline constexpr double kAdjacencyTol = 1e-12;

inline void require_same_dim(const Configuration& a, const Configuration& b) {
    if (a.size() != b.size())
        throw std::invalid_argument("configuration dimension mismatch");
}

// max_i |a_i - b_i|
inline double chebyshev_distance(const Configuration& a, const Configuration& b) {
    require_same_dim(a, b);
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

// |a_i - b_i| for a single axis i.
inline double axis_distance(const Configuration& a, const Configuration& b, std::size_t axis) {
    require_same_dim(a, b);
    if (axis >= a.size())
        throw std::invalid_argument("axis index out of range");
    return std::abs(a[axis] - b[axis]);
}

inline double euclidean_distance(const Configuration& a, const Configuration& b) {
    require_same_dim(a, b);
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return std::sqrt(s);
}

// Axis-aligned rectangloid given by its lower and upper defining vertices.
struct Box {
    Configuration lower;
    Configuration upper;

    Box() = default;
    Box(Configuration lo, Configuration hi) : lower(std::move(lo)), upper(std::move(hi)) {
        if (lower.size() != upper.size())
            throw std::invalid_argument("box corner dimension mismatch");
        for (std::size_t i = 0; i < lower.size(); ++i)
            if (lower[i] > upper[i])
                throw std::invalid_argument("box has lower > upper");
    }

    static Box unit(std::size_t n) {
        return Box(Configuration(n, 0.0), Configuration(n, 1.0));
    }

    std::size_t dim() const { return lower.size(); }

    double width(std::size_t i) const { return upper[i] - lower[i]; }

    Configuration center() const {
        Configuration c(dim());
        for (std::size_t i = 0; i < dim(); ++i)
            c[i] = 0.5 * (lower[i] + upper[i]);
        return c;
    }

    // Euclidean diagonal length.
    double diameter() const { return euclidean_distance(lower, upper); }

    // Closed-box membership.
    bool contains(const Configuration& q) const {
        if (q.size() != dim()) return false;
        for (std::size_t i = 0; i < dim(); ++i)
            if (q[i] < lower[i] || q[i] > upper[i]) return false;
        return true;
    }

    bool operator==(const Box& o) const { return lower == o.lower && upper == o.upper; }
};

inline double box_measure(const Box& b) {
    double m = 1.0;
    for (std::size_t i = 0; i < b.dim(); ++i)
        m *= b.width(i);
    return m;
}

// L-inf distance from a point to a closed box (0 inside).
inline double box_distance_linf(const Configuration& q, const Box& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < b.dim(); ++i) {
        const double gap = std::max({0.0, b.lower[i] - q[i], q[i] - b.upper[i]});
        d = std::max(d, gap);
    }
    return d;
}

// The open Chebyshev ball {q' : |q-q'|_inf < eps} clipped to [0,1]^n.
// Openness is semantic only; membership tests against the unclipped ball
// use in_eps_ball below.
inline Box eps_ball(const Configuration& q, double eps) {
    if (!(eps > 0.0))
        throw std::invalid_argument("eps_ball requires eps > 0");
    Configuration lo(q.size()), hi(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
        lo[i] = std::max(0.0, q[i] - eps);
        hi[i] = std::min(1.0, q[i] + eps);
    }
    return Box(std::move(lo), std::move(hi));
}

inline bool in_eps_ball(const Configuration& q, const Configuration& center, double eps) {
    return chebyshev_distance(q, center) < eps;
}

struct SharedFace {
    std::size_t axis;  // the touching axis
    Box face;          // degenerate in `axis`, spanning the overlap elsewhere
};

// Two boxes share a face when they touch on exactly one axis and their
// projections onto every other axis overlap with positive width (nonzero
// (n-1)-measure). Corner or edge contact does not count.
inline std::optional<SharedFace> shared_face(const Box& a, const Box& b) {
    if (a.dim() != b.dim())
        throw std::invalid_argument("shared_face dimension mismatch");
    const std::size_t n = a.dim();
    std::size_t touch_axis = n;
    double touch_coord = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const bool ab = std::abs(a.upper[i] - b.lower[i]) <= kAdjacencyTol;
        const bool ba = std::abs(b.upper[i] - a.lower[i]) <= kAdjacencyTol;
        if (ab || ba) {
            // overlapping ranges can also "touch" at a shared endpoint;
            // only count axes where the interiors do not overlap
            const double lo = std::max(a.lower[i], b.lower[i]);
            const double hi = std::min(a.upper[i], b.upper[i]);
            if (hi - lo > kAdjacencyTol) continue;
            if (touch_axis != n) return std::nullopt;  // touches on two axes
            touch_axis = i;
            touch_coord = ab ? a.upper[i] : b.upper[i];
        }
    }
    if (touch_axis == n) return std::nullopt;
    Configuration lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (i == touch_axis) {
            lo[i] = hi[i] = touch_coord;
            continue;
        }
        lo[i] = std::max(a.lower[i], b.lower[i]);
        hi[i] = std::min(a.upper[i], b.upper[i]);
        if (!(hi[i] - lo[i] > 0.0)) return std::nullopt;  // zero (n-1)-measure
    }
    return SharedFace{touch_axis, Box(std::move(lo), std::move(hi))};
}

// Piecewise-linear path; arc length is the sum of Euclidean segment lengths.
struct Polyline {
    std::vector<Configuration> waypoints;

    Polyline() = default;
    explicit Polyline(std::vector<Configuration> wp) : waypoints(std::move(wp)) {}

    std::size_t dim() const { return waypoints.empty() ? 0 : waypoints.front().size(); }

    double length() const {
        double len = 0.0;
        for (std::size_t i = 0; i + 1 < waypoints.size(); ++i)
            len += euclidean_distance(waypoints[i], waypoints[i + 1]);
        return len;
    }

    // consecutive waypoints must be distinct under the Chebyshev metric
    void validate() const {
        if (waypoints.size() < 2)
            throw std::invalid_argument("polyline needs at least 2 waypoints");
        for (std::size_t i = 0; i + 1 < waypoints.size(); ++i) {
            require_same_dim(waypoints[i], waypoints[i + 1]);
            if (chebyshev_distance(waypoints[i], waypoints[i + 1]) == 0.0)
                throw std::invalid_argument("polyline has coincident consecutive waypoints");
        }
    }
};

inline Configuration lerp(const Configuration& a, const Configuration& b, double t) {
    Configuration q(a.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        q[i] = a[i] + t * (b[i] - a[i]);
    return q;
}

// Probe points of one segment at resolution delta: t = min(1, k*delta/len)
// for k = 0..ceil(len/delta). Both endpoints are always included.
inline std::vector<Configuration> discretize_segment(const Configuration& a,
                                                     const Configuration& b,
                                                     double delta) {
    if (!(delta > 0.0))
        throw std::invalid_argument("resolution must be positive");
    std::vector<Configuration> probes;
    const double len = euclidean_distance(a, b);
    if (len == 0.0) {
        probes.push_back(a);
        return probes;
    }
    const auto steps = static_cast<std::size_t>(std::ceil(len / delta));
    probes.reserve(steps + 1);
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = std::min(1.0, static_cast<double>(k) * delta / len);
        probes.push_back(lerp(a, b, t));
    }
    return probes;
}

// Probe points along a whole polyline; joint waypoints appear once.
inline std::vector<Configuration> discretize(const Polyline& path, double delta) {
    std::vector<Configuration> probes;
    for (std::size_t s = 0; s + 1 < path.waypoints.size(); ++s) {
        auto seg = discretize_segment(path.waypoints[s], path.waypoints[s + 1], delta);
        const std::size_t skip = (s == 0) ? 0 : 1;
        probes.insert(probes.end(), seg.begin() + static_cast<std::ptrdiff_t>(skip), seg.end());
    }
    if (probes.empty() && !path.waypoints.empty())
        probes.push_back(path.waypoints.front());
    return probes;
}

}  // namespace pcd
