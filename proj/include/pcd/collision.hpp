#pragma once

// Scene description and the boolean collision oracle. The obstacle region
// is closed: box obstacles include their boundary and polynomial
// constraints are evaluated with the relations as given.

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "pcd/geometry.hpp"

namespace pcd {

inline constexpr double kDefaultResolution = 0.005;      // path-check spacing
inline constexpr double kDefaultClearanceStep = 0.005;   // clearance probing grid

// One polynomial inequality/equation over the n coordinates:
// sum_k coeff_k * prod_i x_i^{e_ki}  <relation>  0
struct PolynomialConstraint {
    enum class Relation { LessEqual, Less, Equal, GreaterEqual, Greater };

    struct Term {
        double coeff = 0.0;
        std::vector<unsigned> exponents;  // one entry per dimension
    };

    std::vector<Term> terms;
    Relation relation = Relation::LessEqual;

    double evaluate(const Configuration& q) const {
        double v = 0.0;
        for (const auto& t : terms) {
            double m = t.coeff;
            for (std::size_t i = 0; i < t.exponents.size(); ++i) {
                double p = 1.0;
                for (unsigned e = 0; e < t.exponents[i]; ++e) p *= q[i];
                m *= p;
            }
            v += m;
        }
        return v;
    }

    bool satisfied(const Configuration& q) const {
        const double v = evaluate(q);
        switch (relation) {
            case Relation::LessEqual: return v <= 0.0;
            case Relation::Less: return v < 0.0;
            case Relation::Equal: return v == 0.0;
            case Relation::GreaterEqual: return v >= 0.0;
            case Relation::Greater: return v > 0.0;
        }
        return false;
    }

    void validate(std::size_t n) const {
        if (terms.empty())
            throw std::invalid_argument("polynomial constraint needs at least one term");
        for (const auto& t : terms)
            if (t.exponents.size() != n)
                throw std::invalid_argument("polynomial exponent list length != dimension");
    }
};

struct Obstacle;

// Box: closed rectangloid. SemiAlgebraic: conjunction of polynomial
// constraints. Union: any member colliding collides.
struct BoxObstacle {
    Box box;
};
struct SemiAlgebraicObstacle {
    std::vector<PolynomialConstraint> constraints;
};
struct UnionObstacle {
    std::vector<Obstacle> members;
};

struct Obstacle {
    std::variant<BoxObstacle, SemiAlgebraicObstacle, UnionObstacle> shape;
};

struct Scene {
    std::size_t dimension = 0;
    std::vector<Obstacle> obstacles;
    std::string name;

    // optional endpoints bundled with the scene file
    std::optional<Configuration> start;
    std::optional<Configuration> goal;

    bool boxes_only() const {
        for (const auto& o : obstacles)
            if (!obstacle_boxes_only(o)) return false;
        return true;
    }

  private:
    static bool obstacle_boxes_only(const Obstacle& o) {
        if (std::holds_alternative<BoxObstacle>(o.shape)) return true;
        if (const auto* u = std::get_if<UnionObstacle>(&o.shape)) {
            for (const auto& m : u->members)
                if (!obstacle_boxes_only(m)) return false;
            return true;
        }
        return false;
    }
};

namespace detail {

inline bool obstacle_contains(const Obstacle& o, const Configuration& q) {
    if (const auto* b = std::get_if<BoxObstacle>(&o.shape))
        return b->box.contains(q);
    if (const auto* s = std::get_if<SemiAlgebraicObstacle>(&o.shape)) {
        for (const auto& c : s->constraints)
            if (!c.satisfied(q)) return false;
        return true;
    }
    const auto& u = std::get<UnionObstacle>(o.shape);
    for (const auto& m : u.members)
        if (obstacle_contains(m, q)) return true;
    return false;
}

inline void collect_boxes(const Obstacle& o, std::vector<const Box*>& out) {
    if (const auto* b = std::get_if<BoxObstacle>(&o.shape)) {
        out.push_back(&b->box);
        return;
    }
    if (const auto* u = std::get_if<UnionObstacle>(&o.shape))
        for (const auto& m : u->members) collect_boxes(m, out);
}

}  // namespace detail

// The boolean collision oracle: true iff q is in the obstacle region.
inline bool is_colliding(const Scene& scene, const Configuration& q) {
    if (q.size() != scene.dimension)
        throw std::invalid_argument("configuration dimension does not match scene");
    for (const auto& o : scene.obstacles)
        if (detail::obstacle_contains(o, q)) return true;
    return false;
}

// Probe sequence of one segment: both endpoints first, then the interior
// at increasing t = k*delta/len. "First colliding probe" is defined by this
// order.
inline std::vector<Configuration> segment_probe_order(const Configuration& a,
                                                      const Configuration& b, double delta) {
    if (!(delta > 0.0))
        throw std::invalid_argument("resolution must be positive");
    std::vector<Configuration> probes;
    probes.push_back(a);
    const double len = euclidean_distance(a, b);
    if (len == 0.0) return probes;
    probes.push_back(b);
    const auto steps = static_cast<std::size_t>(std::ceil(len / delta));
    for (std::size_t k = 1; k < steps; ++k) {
        const double t = static_cast<double>(k) * delta / len;
        if (t >= 1.0) break;
        probes.push_back(lerp(a, b, t));
    }
    return probes;
}

// Returns the first colliding probe of the segment, if any.
inline std::optional<Configuration> check_segment(const Scene& scene,
                                                  const Configuration& a,
                                                  const Configuration& b,
                                                  double delta,
                                                  std::uint64_t* probe_counter = nullptr) {
    for (auto& q : segment_probe_order(a, b, delta)) {
        if (probe_counter) ++*probe_counter;
        if (is_colliding(scene, q)) return q;
    }
    return std::nullopt;
}

// Lower bound on the L-inf distance from a free configuration to the
// obstacle region, capped at 1.0. Exact for scenes built from boxes;
// a conservative expanding-shell probe estimate otherwise.
inline double clearance_at(const Scene& scene, const Configuration& q,
                           double clearance_step = kDefaultClearanceStep) {
    if (is_colliding(scene, q))
        throw std::invalid_argument("clearance_at called on a colliding configuration");
    if (scene.obstacles.empty()) return 1.0;

    if (scene.boxes_only()) {
        std::vector<const Box*> boxes;
        for (const auto& o : scene.obstacles) detail::collect_boxes(o, boxes);
        double best = 1.0;
        for (const Box* b : boxes)
            best = std::min(best, box_distance_linf(q, *b));
        return best;
    }

    // Expanding Chebyshev shells at the probing resolution. The estimate is
    // the largest radius whose full grid stayed collision-free, minus one step.
    const std::size_t n = q.size();
    const auto max_steps = static_cast<long>(std::ceil(1.0 / clearance_step));
    for (long r = 1; r <= max_steps; ++r) {
        // enumerate grid offsets with max |offset| == r
        std::vector<long> off(n, -r);
        while (true) {
            bool on_shell = false;
            for (std::size_t i = 0; i < n; ++i)
                if (off[i] == -r || off[i] == r) { on_shell = true; break; }
            if (on_shell) {
                Configuration p(n);
                bool inside_domain = true;
                for (std::size_t i = 0; i < n; ++i) {
                    p[i] = q[i] + static_cast<double>(off[i]) * clearance_step;
                    if (p[i] < 0.0 || p[i] > 1.0) { inside_domain = false; break; }
                }
                if (inside_domain && is_colliding(scene, p))
                    return std::max(0.0, static_cast<double>(r - 1) * clearance_step - clearance_step);
            }
            std::size_t i = 0;
            for (; i < n; ++i) {
                if (off[i] < r) { ++off[i]; break; }
                off[i] = -r;
            }
            if (i == n) break;
        }
    }
    return 1.0;
}

}  // namespace pcd
