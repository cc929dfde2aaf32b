#pragma once

// The planning loop: alternate between checking continuous paths through
// channels of possibly free cells and sampling the possibly occupied ones,
// splitting mixed cells as evidence accumulates, until a checked path is
// collision-free or the iteration budget runs out.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "pcd/collision.hpp"
#include "pcd/decomposition.hpp"
#include "pcd/geometry.hpp"
#include "pcd/graph.hpp"
#include "pcd/rng.hpp"
#include "pcd/trace.hpp"

namespace pcd {

struct PlannerConfig {
    double delta = kDefaultResolution;  // path-check resolution
    int k_max = 10000;                  // outer iteration budget
    std::uint64_t seed = 0;
    // When true, collision-free probes seen while checking paths are stored
    // in their cells. Off by default: stored free samples then stay one per
    // possibly free cell, which the split-bound and cleared-region audits
    // rely on.
    bool store_checkpath_samples = false;

    void validate() const {
        if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
        if (k_max < 1) throw std::invalid_argument("k_max must be at least 1");
    }
};

struct PlanResult {
    enum class Status { Solved, Exhausted };

    Status status = Status::Exhausted;
    Polyline path;        // collision-free at the configured resolution when solved
    int iterations = 0;   // outer iterations consumed
    std::uint64_t splits = 0;
    std::uint64_t samples = 0;
    std::uint64_t probes = 0;
    PlanTrace trace;

    bool solved() const { return status == Status::Solved; }
};

// Raw channel waypoints: the start, the centers of the shared faces between
// consecutive cells, the goal. Segment j lies inside cells[j] (boxes are
// convex and both face centers belong to the closed cell).
inline std::vector<Configuration> channel_waypoints(const SplitTree& tree, const CellPath& path,
                                                    const Configuration& q_start,
                                                    const Configuration& q_goal) {
    if (path.empty()) throw std::invalid_argument("empty cell path");
    std::vector<Configuration> wp;
    wp.reserve(path.size() + 1);
    wp.push_back(q_start);
    for (std::size_t i = 1; i < path.size(); ++i) {
        const auto face = shared_face(tree.cell(path[i - 1]).box, tree.cell(path[i]).box);
        if (!face)
            throw std::invalid_argument("cell path has non-adjacent consecutive cells");
        wp.push_back(face->face.center());
    }
    wp.push_back(q_goal);
    return wp;
}

// The continuous local path through a channel, with coincident consecutive
// waypoints collapsed.
inline Polyline derive_local_path(const SplitTree& tree, const CellPath& path,
                                  const Configuration& q_start, const Configuration& q_goal) {
    auto wp = channel_waypoints(tree, path, q_start, q_goal);
    std::vector<Configuration> out;
    out.push_back(wp.front());
    for (std::size_t i = 1; i < wp.size(); ++i)
        if (chebyshev_distance(wp[i], out.back()) > 0.0) out.push_back(wp[i]);
    if (out.size() < 2) out.push_back(out.front());  // start == goal channel
    return Polyline(std::move(out));
}

class Planner {
  public:
    Planner(const Scene& scene, Configuration q_start, Configuration q_goal, PlannerConfig cfg)
        : scene_(scene),
          cfg_(cfg),
          tree_(scene.dimension),
          graph_(tree_),
          rng_(cfg.seed),
          q_start_(std::move(q_start)),
          q_goal_(std::move(q_goal)) {
        cfg_.validate();
        validate_endpoint(q_start_, "start");
        validate_endpoint(q_goal_, "goal");

        trace_.scene_name = detail::sanitize_name(scene.name.empty() ? "scene" : scene.name);
        trace_.dimension = scene.dimension;
        trace_.start = q_start_;
        trace_.goal = q_goal_;
        trace_.seed = cfg.seed;
        trace_.k_max = cfg.k_max;
        trace_.delta = cfg.delta;
        trace_.store_checkpath_samples = cfg.store_checkpath_samples;

        degenerate_ = chebyshev_distance(q_start_, q_goal_) == 0.0;
        tree_.add_sample(0, q_start_, false);
        if (!degenerate_) tree_.add_sample(0, q_goal_, false);
    }

    PlanResult run() {
        if (degenerate_) {
            Polyline p;
            p.waypoints.push_back(q_start_);
            return finish(PlanResult::Status::Solved, std::move(p), 0);
        }
        for (int k = 1;; ++k) {
            int ka = 0;
            while (true) {
                ++ka;
                push_iter(k, ka, 'a');
                const auto channel = find_channel();
                if (!channel) break;
                auto outcome = check_path(*channel);
                if (outcome.path_free)
                    return finish(PlanResult::Status::Solved, std::move(outcome.local), k);
                resolve_mixed();
            }
            push_iter(k, ka, 'b');
            if (sample_occupied() > 0) resolve_mixed();
            if (k == cfg_.k_max) return finish(PlanResult::Status::Exhausted, Polyline{}, k);
        }
    }

    // Cell path between the cells currently containing the endpoints.
    std::optional<CellPath> find_channel() {
        const int s = tree_.locate(q_start_);
        const int g = tree_.locate(q_goal_);
        return find_cell_path(tree_, graph_, s, g, q_goal_);
    }

    struct CheckOutcome {
        bool path_free = false;
        Polyline local;       // the checked local path
        int cell = -1;        // cell that received the collider
        Configuration collider;
    };

    // Probe the continuous local path through the channel segment by
    // segment; the first colliding probe is stored in the possibly free
    // cell it lies in, which makes that cell mixed.
    CheckOutcome check_path(const CellPath& channel) {
        const auto wp = channel_waypoints(tree_, channel, q_start_, q_goal_);
        CheckOutcome out;
        for (std::size_t seg = 0; seg + 1 < wp.size(); ++seg) {
            std::optional<Configuration> hit;
            if (cfg_.store_checkpath_samples) {
                for (auto& q : segment_probe_order(wp[seg], wp[seg + 1], cfg_.delta)) {
                    ++probes_;
                    if (is_colliding(scene_, q)) {
                        hit = std::move(q);
                        break;
                    }
                    store_free_probe(q);
                }
            } else {
                hit = check_segment(scene_, wp[seg], wp[seg + 1], cfg_.delta, &probes_);
            }
            if (hit) {
                const int cell = attribute_collider(*hit, channel[seg]);
                tree_.add_sample(cell, *hit, true);
                TraceEvent e;
                e.kind = TraceEvent::Kind::PathChecked;
                e.cells = channel;
                e.path_free = false;
                e.cell = cell;
                e.q = *hit;
                trace_.events.push_back(std::move(e));
                out.path_free = false;
                out.cell = cell;
                out.collider = *hit;
                return out;
            }
        }
        TraceEvent e;
        e.kind = TraceEvent::Kind::PathChecked;
        e.cells = channel;
        e.path_free = true;
        trace_.events.push_back(std::move(e));
        out.path_free = true;
        out.local = derive_local_path(tree_, channel, q_start_, q_goal_);
        return out;
    }

    // Draw one uniform configuration in every possibly occupied leaf, in
    // ascending id order, and record the verdicts. Returns the number of
    // collision-free draws.
    std::size_t sample_occupied() {
        std::size_t free_found = 0;
        for (int id : tree_.leaves_with_status(CellStatus::PossiblyOccupied)) {
            const Box& box = tree_.cell(id).box;
            Configuration q(box.dim());
            for (std::size_t i = 0; i < box.dim(); ++i)
                q[i] = rng_.uniform_in(box.lower[i], box.upper[i]);
            ++samples_;
            ++probes_;
            const bool colliding = is_colliding(scene_, q);
            // A free draw that admits no representable split carries no
            // spatial information: the cell is already resolved down to
            // machine precision. Drop it and keep the cell as it is.
            if (!colliding && !choose_valid_split(tree_.cell(id), q, false)) continue;
            if (!colliding) ++free_found;
            tree_.add_sample(id, q, colliding);
            TraceEvent e;
            e.kind = TraceEvent::Kind::Sample;
            e.cell = id;
            e.q = std::move(q);
            e.colliding = colliding;
            e.source = 'b';
            trace_.events.push_back(std::move(e));
        }
        return free_found;
    }

    // Split every mixed leaf and keep graph and trace in step.
    void resolve_mixed() {
        tree_.split_mixed_cells(
            [&](int parent, const SplitChoice& choice, const Configuration& trigger,
                const SplitTree::SplitResult& r) {
                graph_.update_on_split(tree_, parent, r.lo, r.hi);
                ++splits_;
                TraceEvent e;
                e.kind = TraceEvent::Kind::Split;
                e.cell = parent;
                e.axis = choice.axis;
                e.coord = choice.coordinate;
                e.trigger = trigger;
                e.lo = r.lo;
                e.hi = r.hi;
                trace_.events.push_back(std::move(e));
            },
            [&](int cell_id) {
                TraceEvent e;
                e.kind = TraceEvent::Kind::Drop;
                e.cell = cell_id;
                trace_.events.push_back(std::move(e));
            });
    }

    const SplitTree& tree() const { return tree_; }
    const ConnectivityGraph& graph() const { return graph_; }
    const PlanTrace& trace() const { return trace_; }
    const Configuration& start() const { return q_start_; }
    const Configuration& goal() const { return q_goal_; }

  private:
    void validate_endpoint(const Configuration& q, const char* which) {
        if (q.size() != scene_.dimension)
            throw std::invalid_argument(std::string(which) + " dimension does not match scene");
        for (double c : q)
            if (c < 0.0 || c > 1.0)
                throw std::invalid_argument(std::string(which) +
                                            " configuration outside the unit cube");
        ++probes_;
        if (is_colliding(scene_, q))
            throw std::invalid_argument(std::string(which) + " configuration is colliding");
    }

    // A probe interior to its segment lies only in the owning channel cell;
    // a probe on a shared face may locate into a neighbor, which can be
    // possibly occupied. Appending there would not create a mixed cell, so
    // fall back to a possibly free cell containing the probe. The chosen
    // cell must admit a representable split, or the loop would re-find the
    // same collider forever.
    int attribute_collider(const Configuration& q, int owner) {
        auto fits = [&](int id) {
            return tree_.cell(id).status() == CellStatus::PossiblyFree &&
                   tree_.cell(id).box.contains(q) &&
                   choose_valid_split(tree_.cell(id), q, true).has_value();
        };
        const int located = tree_.locate(q);
        if (fits(located)) return located;
        if (fits(owner)) return owner;
        for (int nb : graph_.neighbors(owner))
            if (fits(nb)) return nb;
        throw std::runtime_error(
            "colliding probe cannot be attributed at floating-point resolution");
    }

    void store_free_probe(const Configuration& q) {
        const int cell = tree_.locate(q);
        tree_.add_sample(cell, q, false);
        TraceEvent e;
        e.kind = TraceEvent::Kind::Sample;
        e.cell = cell;
        e.q = q;
        e.colliding = false;
        e.source = 'c';
        trace_.events.push_back(std::move(e));
    }

    void push_iter(int k, int ka, char phase) {
        TraceEvent e;
        e.kind = TraceEvent::Kind::Iteration;
        e.k = k;
        e.ka = ka;
        e.phase = phase;
        trace_.events.push_back(e);
    }

    PlanResult finish(PlanResult::Status status, Polyline path, int k) {
        TraceEvent e;
        e.kind = TraceEvent::Kind::Result;
        e.solved = status == PlanResult::Status::Solved;
        e.k = k;
        e.splits = splits_;
        e.samples = samples_;
        e.probes = probes_;
        trace_.events.push_back(e);
        PlanResult r;
        r.status = status;
        r.path = std::move(path);
        r.iterations = k;
        r.splits = splits_;
        r.samples = samples_;
        r.probes = probes_;
        r.trace = std::move(trace_);
        return r;
    }

    const Scene& scene_;
    PlannerConfig cfg_;
    SplitTree tree_;
    ConnectivityGraph graph_;
    Rng rng_;
    Configuration q_start_;
    Configuration q_goal_;
    PlanTrace trace_;
    bool degenerate_ = false;
    std::uint64_t splits_ = 0;
    std::uint64_t samples_ = 0;
    std::uint64_t probes_ = 0;
};

// Identical inputs give identical results and traces.
inline PlanResult plan(const Scene& scene, const Configuration& q_start,
                       const Configuration& q_goal, const PlannerConfig& cfg) {
    Planner p(scene, q_start, q_goal, cfg);
    return p.run();
}

}  // namespace pcd
