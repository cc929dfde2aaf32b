#pragma once

// Executable counterparts of the planner's correctness arguments: staircase
// path conversion inside a clearance tunnel, finite ball coverings, sampling
// lower bounds with a statistical check, replay audits over traces, and the
// empirical success-probability experiment.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "pcd/collision.hpp"
#include "pcd/decomposition.hpp"
#include "pcd/geometry.hpp"
#include "pcd/planner.hpp"
#include "pcd/rng.hpp"
#include "pcd/trace.hpp"

namespace pcd {

// Minimum over the path probes of the distance-to-obstacle lower bound. Any
// radius strictly below this value gives a tunnel of free probed balls.
inline double tunnel_clearance(const Scene& scene, const Polyline& path, double delta) {
    double best = 1.0;
    for (const auto& q : discretize(path, delta)) {
        if (is_colliding(scene, q))
            throw std::invalid_argument("tunnel_clearance: path has a colliding probe");
        best = std::min(best, clearance_at(scene, q));
    }
    return best;
}

// Radius below which a free sample near the path clears the whole
// intersection of its ball with the sampled cell.
inline double clearing_radius(const Scene& scene, const Polyline& path, double delta) {
    return tunnel_clearance(scene, path, delta) / 5.0;
}

// Axis-parallel path produced by chaining radius-eps balls along a source
// path and connecting consecutive ball centers by staircases.
struct ManhattanPath {
    Polyline path;
    std::size_t corner_count = 0;              // interior waypoints
    std::vector<Configuration> ball_centers;   // the chained centers
};

namespace detail {

// Append the axis-ordered staircase from a to b (a itself excluded).
inline void append_staircase(std::vector<Configuration>& out, const Configuration& a,
                             const Configuration& b) {
    Configuration cur = a;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (cur[i] == b[i]) continue;
        cur[i] = b[i];
        out.push_back(cur);
    }
}

// Collapse consecutive segments that continue along the same axis in the
// same direction.
inline Polyline merge_collinear(const std::vector<Configuration>& wp) {
    std::vector<Configuration> out;
    for (const auto& q : wp) {
        while (out.size() >= 2) {
            const Configuration& a = out[out.size() - 2];
            const Configuration& b = out.back();
            std::size_t axis_ab = 0, diff_ab = 0, axis_bq = 0, diff_bq = 0;
            for (std::size_t i = 0; i < q.size(); ++i) {
                if (a[i] != b[i]) { axis_ab = i; ++diff_ab; }
                if (b[i] != q[i]) { axis_bq = i; ++diff_bq; }
            }
            if (diff_ab == 1 && diff_bq == 1 && axis_ab == axis_bq &&
                (q[axis_ab] - b[axis_ab]) * (b[axis_ab] - a[axis_ab]) > 0.0) {
                out.pop_back();
                continue;
            }
            break;
        }
        if (out.empty() || out.back() != q) out.push_back(q);
    }
    return Polyline(std::move(out));
}

// Parameter interval of segment a->b lying strictly inside the open ball
// around c; empty when t_lo >= t_hi.
inline std::pair<double, double> segment_in_ball(const Configuration& a, const Configuration& b,
                                                 const Configuration& c, double eps) {
    double t_lo = 0.0, t_hi = 1.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = b[i] - a[i];
        const double off = a[i] - c[i];
        if (d == 0.0) {
            if (std::abs(off) >= eps) return {1.0, 0.0};
            continue;
        }
        double lo = (-eps - off) / d;
        double hi = (eps - off) / d;
        if (lo > hi) std::swap(lo, hi);
        t_lo = std::max(t_lo, lo);
        t_hi = std::min(t_hi, hi);
        if (t_lo >= t_hi) return {1.0, 0.0};
    }
    return {t_lo, t_hi};
}

}  // namespace detail

// Convert a collision-free path into an axis-parallel one. Balls are chained
// along the path: the next center sits where the path leaves the current
// ball for the last time, computed exactly on the polyline segments, so the
// arc between consecutive centers is at least eps and the number of centers
// is at most ceil(L/eps) + 1.
inline ManhattanPath manhattanize(const Scene& scene, const Polyline& path, double eps,
                                  double delta) {
    path.validate();
    if (!(delta > 0.0) || !(eps > 0.0))
        throw std::invalid_argument("manhattanize requires positive eps and delta");
    if (!(eps < tunnel_clearance(scene, path, delta)))
        throw std::invalid_argument("manhattanize requires eps below the tunnel clearance");

    const auto& wp = path.waypoints;
    const std::size_t nseg = wp.size() - 1;
    std::vector<Configuration> centers;
    centers.push_back(wp.front());
    std::size_t cur_seg = 0;
    double cur_t = 0.0;
    while (true) {
        const Configuration& c = centers.back();
        if (in_eps_ball(wp.back(), c, eps)) {
            if (chebyshev_distance(wp.back(), c) > 0.0) centers.push_back(wp.back());
            break;
        }
        bool found = false;
        std::size_t exit_seg = 0;
        double exit_t = 0.0;
        for (std::size_t s = cur_seg; s < nseg; ++s) {
            auto [t0, t1] = detail::segment_in_ball(wp[s], wp[s + 1], c, eps);
            if (s == cur_seg) t0 = std::max(t0, cur_t);
            if (t0 >= t1) continue;
            found = true;
            exit_seg = s;
            exit_t = t1;
        }
        if (!found)
            throw std::runtime_error("manhattanize: lost the path while chaining balls");
        const Configuration next = lerp(wp[exit_seg], wp[exit_seg + 1], std::min(1.0, exit_t));
        if (chebyshev_distance(next, c) == 0.0)
            throw std::runtime_error("manhattanize: ball chaining made no progress");
        centers.push_back(next);
        cur_seg = exit_seg;
        cur_t = std::min(1.0, exit_t);
    }

    std::vector<Configuration> stairs;
    stairs.push_back(centers.front());
    for (std::size_t i = 0; i + 1 < centers.size(); ++i)
        detail::append_staircase(stairs, centers[i], centers[i + 1]);

    ManhattanPath out;
    out.path = detail::merge_collinear(stairs);
    out.ball_centers = std::move(centers);
    out.corner_count = out.path.waypoints.size() >= 2 ? out.path.waypoints.size() - 2 : 0;

    for (const auto& q : discretize(out.path, delta))
        if (is_colliding(scene, q))
            throw std::runtime_error("manhattanize: converted path failed re-verification");
    return out;
}

// Finite set of radius-eps ball centers covering the eps-tunnel of an
// axis-parallel path: both endpoints, every corner, and interior points at
// spacing eps along segments longer than eps.
struct Covering {
    double eps = 0.0;
    std::vector<Configuration> centers;
    std::size_t count() const { return centers.size(); }
};

inline Covering finite_covering(const Polyline& manhattan, double eps) {
    if (!(eps > 0.0)) throw std::invalid_argument("finite_covering requires eps > 0");
    manhattan.validate();
    for (std::size_t s = 0; s + 1 < manhattan.waypoints.size(); ++s) {
        std::size_t varying = 0;
        for (std::size_t i = 0; i < manhattan.dim(); ++i)
            if (manhattan.waypoints[s][i] != manhattan.waypoints[s + 1][i]) ++varying;
        if (varying != 1)
            throw std::invalid_argument("finite_covering requires an axis-parallel path");
    }
    Covering cov;
    cov.eps = eps;
    cov.centers.push_back(manhattan.waypoints.front());
    for (std::size_t s = 0; s + 1 < manhattan.waypoints.size(); ++s) {
        const auto& a = manhattan.waypoints[s];
        const auto& b = manhattan.waypoints[s + 1];
        const double len = euclidean_distance(a, b);
        const auto interior =
            static_cast<std::size_t>(std::max(0.0, std::ceil(len / eps - 1e-12) - 1.0));
        for (std::size_t k = 1; k <= interior; ++k)
            cov.centers.push_back(lerp(a, b, static_cast<double>(k) * eps / len));
        cov.centers.push_back(b);  // corner or final endpoint
    }
    return cov;
}

// eps^(n - k_wid): the chance that a uniform draw from a cell lands within
// eps of a path crossing it, where k_wid axes of the cell are thinner than
// eps.
inline double sampling_lower_bound(std::size_t n, double eps, std::size_t k_wid) {
    if (!(eps > 0.0 && eps <= 1.0))
        throw std::invalid_argument("sampling_lower_bound requires eps in (0,1]");
    if (k_wid > n) throw std::invalid_argument("sampling_lower_bound requires k_wid <= n");
    return std::pow(eps, static_cast<double>(n - k_wid));
}

struct SamplingBoundResult {
    double empirical_rate = 0.0;
    double bound = 0.0;
    bool pass = false;
};

// Monte-Carlo check of the sampling lower bound: draw uniform samples in the
// box and count hits within eps of the discretized path. Passes when the
// empirical rate is no more than three standard errors below the bound.
inline SamplingBoundResult verify_sampling_bound(const Box& box, const Polyline& path,
                                                 double eps, std::uint64_t trials,
                                                 std::uint64_t seed,
                                                 double delta = kDefaultResolution) {
    const std::size_t n = box.dim();
    const auto probes = discretize(path, delta);
    bool intersects = false;
    for (const auto& p : probes)
        if (box.contains(p)) { intersects = true; break; }
    if (!intersects)
        throw std::invalid_argument("verify_sampling_bound: box does not contain a path probe");

    std::size_t k_wid = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (box.width(i) < eps) ++k_wid;

    // bucket probes on an eps-grid so membership only scans nearby buckets
    std::map<std::vector<long>, std::vector<std::size_t>> buckets;
    auto key_of = [&](const Configuration& q) {
        std::vector<long> key(n);
        for (std::size_t i = 0; i < n; ++i)
            key[i] = static_cast<long>(std::floor(q[i] / eps));
        return key;
    };
    for (std::size_t idx = 0; idx < probes.size(); ++idx)
        buckets[key_of(probes[idx])].push_back(idx);

    auto in_tunnel = [&](const Configuration& q) {
        const auto base = key_of(q);
        std::vector<long> key(n);
        std::vector<int> off(n, -1);
        while (true) {
            for (std::size_t i = 0; i < n; ++i) key[i] = base[i] + off[i];
            if (auto it = buckets.find(key); it != buckets.end())
                for (std::size_t idx : it->second)
                    if (in_eps_ball(q, probes[idx], eps)) return true;
            std::size_t i = 0;
            for (; i < n; ++i) {
                if (off[i] < 1) { ++off[i]; break; }
                off[i] = -1;
            }
            if (i == n) return false;
        }
    };

    Rng rng(seed);
    std::uint64_t hits = 0;
    Configuration q(n);
    for (std::uint64_t t = 0; t < trials; ++t) {
        for (std::size_t i = 0; i < n; ++i)
            q[i] = rng.uniform_in(box.lower[i], box.upper[i]);
        if (in_tunnel(q)) ++hits;
    }

    SamplingBoundResult r;
    r.empirical_rate = static_cast<double>(hits) / static_cast<double>(trials);
    r.bound = sampling_lower_bound(n, eps, k_wid);
    const double se =
        std::sqrt(r.empirical_rate * (1.0 - r.empirical_rate) / static_cast<double>(trials));
    r.pass = r.empirical_rate >= r.bound - 3.0 * se;
    return r;
}

// ---------------------------------------------------------------------------
// Trace audits

struct AuditCheck {
    std::string name;
    bool pass = true;
    std::vector<std::string> violations;
};

struct AuditReport {
    std::vector<AuditCheck> checks;

    bool all_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {

inline bool boxes_interior_overlap(const Box& a, const Box& b) {
    for (std::size_t i = 0; i < a.dim(); ++i)
        if (!(std::min(a.upper[i], b.upper[i]) - std::max(a.lower[i], b.lower[i]) > 0.0))
            return false;
    return true;
}

inline bool segment_intersects_box(const Configuration& a, const Configuration& b,
                                   const Box& box) {
    double t0 = 0.0, t1 = 1.0;
    for (std::size_t i = 0; i < box.dim(); ++i) {
        const double d = b[i] - a[i];
        if (d == 0.0) {
            if (a[i] < box.lower[i] || a[i] > box.upper[i]) return false;
            continue;
        }
        double lo = (box.lower[i] - a[i]) / d;
        double hi = (box.upper[i] - a[i]) / d;
        if (lo > hi) std::swap(lo, hi);
        t0 = std::max(t0, lo);
        t1 = std::min(t1, hi);
        if (t0 > t1) return false;
    }
    return true;
}

inline bool polyline_intersects_box(const Polyline& path, const Box& box) {
    if (path.waypoints.size() == 1) return box.contains(path.waypoints.front());
    for (std::size_t s = 0; s + 1 < path.waypoints.size(); ++s)
        if (segment_intersects_box(path.waypoints[s], path.waypoints[s + 1], box)) return true;
    return false;
}

}  // namespace detail

// Replay a trace against its scene and check, event by event:
//   split_bound      per channel-checking phase, the lineage of each free
//                    sample is split at most max_splits_bound times
//   loop_bound       the inner loop iterates at most the summed split
//                    bounds plus the possibly-free cell count
//   cleared_regions  the cleared box around each single free sample never
//                    overlaps a later possibly occupied leaf
//   path_coverage    whenever sampling starts, some possibly occupied leaf
//                    touches the supplied feasible reference path
inline AuditReport audit_trace(const PlanTrace& trace, const Scene& scene,
                               const std::optional<Polyline>& reference_path = std::nullopt) {
    if (trace.dimension != scene.dimension)
        throw std::invalid_argument("audit_trace: trace and scene dimensions differ");
    if (!scene.name.empty() && !trace.scene_name.empty() &&
        detail::sanitize_name(scene.name) != trace.scene_name)
        throw std::invalid_argument("audit_trace: trace was recorded for scene '" +
                                    trace.scene_name + "', not '" + scene.name + "'");
    if (trace.store_checkpath_samples)
        throw std::invalid_argument(
            "audit_trace: the checks need the one-free-sample-per-cell rule; this trace "
            "stored path-check samples");

    AuditCheck split_bound{"split_bound", true, {}};
    AuditCheck loop_bound{"loop_bound", true, {}};
    AuditCheck cleared{"cleared_regions", true, {}};
    AuditCheck coverage{"path_coverage", true, {}};

    SplitTree tree = replay_init(trace);

    struct Lineage {
        Configuration q_f;
        int bound = 0;
        int count = 0;
    };
    std::vector<Lineage> lineages;
    std::map<int, std::vector<std::size_t>> lineage_at;  // cell id -> lineage indices
    std::vector<Box> cleared_regions;

    char phase = ' ';
    int cur_k = 0;
    double ka_bound = 0.0;

    auto lineage_bound = [&](const Box& box, const Configuration& q_f) {
        return max_splits_bound(box, q_f, clearance_at(scene, q_f));
    };

    auto start_lineages = [&]() {
        lineages.clear();
        lineage_at.clear();
        ka_bound = 0.0;
        std::size_t pfree = 0;
        for (int id : tree.leaves()) {
            const Cell& c = tree.cell(id);
            if (c.status() != CellStatus::PossiblyFree) continue;
            ++pfree;
            for (const auto& s : c.samples) {
                if (s.colliding) continue;
                ka_bound += lineage_bound(c.box, s.q);
            }
            if (const Configuration* q_f = c.single_free_sample()) {
                lineage_at[id].push_back(lineages.size());
                lineages.push_back(Lineage{*q_f, lineage_bound(c.box, *q_f), 0});
            }
        }
        ka_bound += static_cast<double>(pfree);
    };

    auto track_new_leaf = [&](int id, std::size_t event_idx) {
        const Cell& c = tree.cell(id);
        // new possibly occupied leaves must avoid every cleared region
        if (c.status() == CellStatus::PossiblyOccupied) {
            for (std::size_t r = 0; r < cleared_regions.size(); ++r) {
                if (detail::boxes_interior_overlap(cleared_regions[r], c.box)) {
                    cleared.pass = false;
                    cleared.violations.push_back(
                        "event " + std::to_string(event_idx) + ": possibly occupied cell " +
                        std::to_string(id) + " overlaps cleared region " + std::to_string(r));
                }
            }
        }
        if (const Configuration* q_f = c.single_free_sample()) {
            if (c.status() == CellStatus::PossiblyFree)
                cleared_regions.push_back(cleared_region(c.box, *q_f, scene));
            // free samples not yet tracked start a fresh lineage mid-phase
            if (phase == 'a' && !lineage_at.count(id)) {
                lineage_at[id].push_back(lineages.size());
                lineages.push_back(Lineage{*q_f, lineage_bound(c.box, *q_f), 0});
            }
        }
    };

    for (std::size_t idx = 0; idx < trace.events.size(); ++idx) {
        const TraceEvent& e = trace.events[idx];
        switch (e.kind) {
            case TraceEvent::Kind::Iteration:
                if (e.phase == 'a') {
                    if (e.k != cur_k) {
                        cur_k = e.k;
                        start_lineages();
                    }
                    if (e.ka > ka_bound) {
                        loop_bound.pass = false;
                        loop_bound.violations.push_back(
                            "event " + std::to_string(idx) + ": k=" + std::to_string(e.k) +
                            " ka=" + std::to_string(e.ka) + " exceeds bound " +
                            std::to_string(ka_bound));
                    }
                    phase = 'a';
                } else {
                    phase = 'b';
                    if (reference_path) {
                        bool touched = false;
                        for (int id : tree.leaves()) {
                            const Cell& c = tree.cell(id);
                            if (c.status() == CellStatus::PossiblyOccupied &&
                                detail::polyline_intersects_box(*reference_path, c.box)) {
                                touched = true;
                                break;
                            }
                        }
                        if (!touched) {
                            coverage.pass = false;
                            coverage.violations.push_back(
                                "event " + std::to_string(idx) + ": k=" + std::to_string(e.k) +
                                " sampling with no possibly occupied cell on the reference path");
                        }
                    }
                }
                break;
            case TraceEvent::Kind::Split: {
                std::vector<std::size_t> carried;
                if (auto it = lineage_at.find(e.cell); it != lineage_at.end()) {
                    carried = std::move(it->second);
                    lineage_at.erase(it);
                }
                if (phase == 'a') {
                    for (std::size_t li : carried) {
                        Lineage& l = lineages[li];
                        ++l.count;
                        if (l.count > l.bound) {
                            split_bound.pass = false;
                            split_bound.violations.push_back(
                                "event " + std::to_string(idx) + ": lineage of cell " +
                                std::to_string(e.cell) + " split " + std::to_string(l.count) +
                                " times, bound " + std::to_string(l.bound));
                        }
                    }
                }
                replay_apply(tree, e);
                for (std::size_t li : carried) {
                    const int child = lineages[li].q_f[e.axis] <= e.coord ? e.lo : e.hi;
                    lineage_at[child].push_back(li);
                }
                track_new_leaf(e.lo, idx);
                track_new_leaf(e.hi, idx);
                break;
            }
            case TraceEvent::Kind::Drop: {
                replay_apply(tree, e);
                // a dropped free sample may retire its lineage
                if (auto it = lineage_at.find(e.cell); it != lineage_at.end()) {
                    auto& ids = it->second;
                    ids.erase(std::remove_if(ids.begin(), ids.end(),
                                             [&](std::size_t li) {
                                                 const Cell& c = tree.cell(e.cell);
                                                 for (const auto& s : c.samples)
                                                     if (!s.colliding &&
                                                         s.q == lineages[li].q_f)
                                                         return false;
                                                 return true;
                                             }),
                              ids.end());
                    if (ids.empty()) lineage_at.erase(it);
                }
                track_new_leaf(e.cell, idx);
                break;
            }
            default:
                replay_apply(tree, e);
                break;
        }
    }

    AuditReport report;
    report.checks = {split_bound, loop_bound, cleared, coverage};
    if (!reference_path) report.checks.pop_back();
    return report;
}

// ---------------------------------------------------------------------------
// Success-probability experiment

struct SuccessCurve {
    std::string scene;
    std::vector<int> budgets;
    std::vector<double> rates;  // solved fraction within each budget
    int trials = 0;
    std::uint64_t base_seed = 0;
};

// Runs `trials` independent planner instances per scene with consecutive
// seeds and bins the solve iterations against each budget. A run solved by
// budget B is solved by every larger budget, so rates are non-decreasing.
// `on_result` (optional) is invoked once per finished run, possibly from
// several worker threads at once.
inline std::vector<SuccessCurve> run_success_experiment(
    const std::vector<const Scene*>& scenes, const std::vector<int>& budgets, int trials,
    std::uint64_t base_seed, const PlannerConfig& base_cfg = PlannerConfig{},
    unsigned threads = std::thread::hardware_concurrency(),
    const std::function<void(const Scene&, std::uint64_t, const PlanResult&)>& on_result =
        nullptr) {
    if (budgets.empty()) throw std::invalid_argument("run_success_experiment: no budgets");
    if (trials < 1) throw std::invalid_argument("run_success_experiment: trials must be >= 1");
    const int k_max = *std::max_element(budgets.begin(), budgets.end());

    struct Task {
        const Scene* scene;
        std::size_t scene_idx;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (std::size_t s = 0; s < scenes.size(); ++s) {
        if (!scenes[s]->start || !scenes[s]->goal)
            throw std::invalid_argument("run_success_experiment: scene '" + scenes[s]->name +
                                        "' has no endpoints");
        if (is_colliding(*scenes[s], *scenes[s]->start) ||
            is_colliding(*scenes[s], *scenes[s]->goal))
            throw std::invalid_argument("run_success_experiment: scene '" + scenes[s]->name +
                                        "' has colliding endpoints");
        for (int t = 0; t < trials; ++t)
            tasks.push_back(Task{scenes[s], s, base_seed + static_cast<std::uint64_t>(t)});
    }

    std::vector<int> solve_iteration(tasks.size(), std::numeric_limits<int>::max());
    std::atomic<std::size_t> next{0};
    std::mutex cb_mutex;
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= tasks.size()) return;
            const Task& task = tasks[i];
            PlannerConfig cfg = base_cfg;
            cfg.seed = task.seed;
            cfg.k_max = k_max;
            const PlanResult r = plan(*task.scene, *task.scene->start, *task.scene->goal, cfg);
            if (r.solved()) solve_iteration[i] = r.iterations;
            if (on_result) {
                std::lock_guard<std::mutex> lock(cb_mutex);
                on_result(*task.scene, task.seed, r);
            }
        }
    };
    std::vector<std::thread> pool;
    const unsigned nthreads = std::max(1u, threads);
    for (unsigned t = 0; t + 1 < nthreads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::vector<SuccessCurve> curves(scenes.size());
    for (std::size_t s = 0; s < scenes.size(); ++s) {
        curves[s].scene = scenes[s]->name;
        curves[s].budgets = budgets;
        curves[s].trials = trials;
        curves[s].base_seed = base_seed;
        curves[s].rates.assign(budgets.size(), 0.0);
    }
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        for (std::size_t b = 0; b < budgets.size(); ++b)
            if (solve_iteration[i] <= budgets[b])
                curves[tasks[i].scene_idx].rates[b] += 1.0;
    }
    for (auto& c : curves)
        for (auto& r : c.rates) r /= static_cast<double>(trials);
    return curves;
}

}  // namespace pcd
