// Acceptance suite: one line per criterion, nonzero exit when any fails.
// Usage: pcd_acceptance <scenes-dir>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pcd/analysis.hpp"
#include "pcd/planner.hpp"
#include "pcd/scene_io.hpp"
#include "pcd/svg.hpp"

using namespace pcd;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& text) {
    std::printf("[%s] criterion %2d: %s\n", pass ? "PASS" : "FAIL", criterion, text.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double ms_since(const std::chrono::steady_clock::time_point& t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
        .count();
}

struct Corpus {
    std::map<std::string, Scene> scenes;
    std::map<std::string, Polyline> refpaths;

    const Scene& scene(const std::string& name) const { return scenes.at(name); }
};

Corpus load_corpus(const std::string& dir) {
    Corpus c;
    for (const char* name : {"empty", "wall_gap", "narrow_passage", "u_trap", "box_maze",
                             "blocked_wall", "disk"}) {
        Scene s = load_scene_file(dir + "/" + std::string(name) + ".json");
        // the serialized form must round-trip to itself
        const std::string text = save_scene(s);
        if (save_scene(load_scene(text)) != text)
            throw std::runtime_error(std::string("scene ") + name + " does not round-trip");
        c.scenes[name] = std::move(s);
    }
    for (const char* name : {"empty", "wall_gap", "narrow_passage", "u_trap", "box_maze"})
        c.refpaths[name] = load_polyline_file(dir + "/refpaths/" + std::string(name) + ".json");
    return c;
}

const std::vector<std::string> kFeasible = {"empty", "wall_gap", "narrow_passage", "u_trap",
                                            "box_maze"};

struct AuditTally {
    std::atomic<long> split_bound_violations{0};
    std::atomic<long> loop_bound_violations{0};
    std::atomic<long> cleared_violations{0};
    std::atomic<long> coverage_violations{0};
    std::atomic<long> audited{0};

    void add(const AuditReport& rep) {
        ++audited;
        for (const auto& chk : rep.checks) {
            const long v = static_cast<long>(chk.violations.size());
            if (chk.name == "split_bound") split_bound_violations += v;
            if (chk.name == "loop_bound") loop_bound_violations += v;
            if (chk.name == "cleared_regions") cleared_violations += v;
            if (chk.name == "path_coverage") coverage_violations += v;
        }
    }
};

}  // namespace

int main(int argc, char** argv) {
    const std::string dir = argc > 1 ? argv[1] : "scenes";
    Corpus corpus;
    try {
        corpus = load_corpus(dir);
    } catch (const std::exception& e) {
        std::cerr << "cannot load the scene corpus from '" << dir << "': " << e.what() << "\n";
        return 1;
    }

    AuditTally tally;

    // 1. trivial solve
    try {
        const Scene& empty = corpus.scene("empty");
        const auto t0 = std::chrono::steady_clock::now();
        PlannerConfig cfg;
        cfg.seed = 1;
        const PlanResult r = plan(empty, *empty.start, *empty.goal, cfg);
        const double ms = ms_since(t0);
        const bool pass = r.solved() && r.iterations == 1 && r.splits == 0 &&
                          r.path.waypoints ==
                              std::vector<Configuration>{*empty.start, *empty.goal} &&
                          ms < 10.0;
        tally.add(audit_trace(r.trace, empty, corpus.refpaths.at("empty")));
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "empty scene solves at k=1 with no splits in %.2f ms (< 10 ms)", ms);
        report(1, pass, buf);
    } catch (const std::exception& e) {
        report(1, false, std::string("exception: ") + e.what());
    }

    // 2. feasible corpus: 100% solved, non-decreasing success curves
    //    (runs are audited on the fly for criteria 4-6)
    try {
        const auto t0 = std::chrono::steady_clock::now();
        const std::vector<int> budgets = {10, 100, 1000, 10000};
        std::vector<const Scene*> scenes;
        for (const auto& name : kFeasible) scenes.push_back(&corpus.scene(name));
        std::atomic<int> audit_errors{0};
        const auto curves = run_success_experiment(
            scenes, budgets, 50, 1, PlannerConfig{},
            std::thread::hardware_concurrency(),
            [&](const Scene& scene, std::uint64_t, const PlanResult& r) {
                try {
                    tally.add(audit_trace(r.trace, scene, corpus.refpaths.at(scene.name)));
                } catch (const std::exception&) {
                    ++audit_errors;
                }
            });
        bool all_solved = true, monotone = true;
        for (const auto& c : curves) {
            if (c.rates.back() != 1.0) all_solved = false;
            for (std::size_t i = 1; i < c.rates.size(); ++i)
                if (c.rates[i] < c.rates[i - 1]) monotone = false;
        }
        const double ms = ms_since(t0);
        const bool pass = all_solved && monotone && ms < 300000.0 && audit_errors == 0;
        char buf[200];
        std::snprintf(buf, sizeof(buf),
                      "5 scenes x 50 seeds at budget 10000: %s solved, curves %s, %.1f s "
                      "(< 300 s)",
                      all_solved ? "100%" : "NOT all", monotone ? "non-decreasing" : "DECREASE",
                      ms / 1000.0);
        report(2, pass, buf);
    } catch (const std::exception& e) {
        report(2, false, std::string("exception: ") + e.what());
    }

    // 3. infeasible control: never solved at any tested budget
    try {
        const Scene& blocked = corpus.scene("blocked_wall");
        const std::vector<int> budgets = {10, 100, 500};
        const auto curves =
            run_success_experiment({&blocked}, budgets, 3, 1, PlannerConfig{},
                                   std::thread::hardware_concurrency(),
                                   [&](const Scene& scene, std::uint64_t, const PlanResult& r) {
                                       tally.add(audit_trace(r.trace, scene, std::nullopt));
                                   });
        bool never = true;
        for (double rate : curves[0].rates)
            if (rate != 0.0) never = false;
        report(3, never, "blocked wall is 0% solved at budgets 10, 100 and 500");
    } catch (const std::exception& e) {
        report(3, false, std::string("exception: ") + e.what());
    }

    // 4-6. audits aggregated over every run above (all on box scenes)
    {
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "lineage split counts within bounds on %ld audited runs (%ld violations)",
                      tally.audited.load(), tally.split_bound_violations.load());
        report(4, tally.split_bound_violations == 0 && tally.audited >= 250, buf);
        std::snprintf(buf, sizeof(buf),
                      "cleared regions never meet a later possibly occupied leaf "
                      "(%ld violations)",
                      tally.cleared_violations.load());
        report(5, tally.cleared_violations == 0 && tally.audited >= 250, buf);
        std::snprintf(buf, sizeof(buf),
                      "every sampling phase touches the reference path "
                      "(%ld violations; loop bound: %ld)",
                      tally.coverage_violations.load(), tally.loop_bound_violations.load());
        report(6, tally.coverage_violations == 0 && tally.loop_bound_violations == 0, buf);
    }

    // 7. statistical sampling bound on randomized instances
    try {
        const auto t0 = std::chrono::steady_clock::now();
        Rng rng(2024);
        int passed = 0;
        const int instances = 100;
        for (int i = 0; i < instances; ++i) {
            const std::size_t n = (i % 2 == 0) ? 2 : 3;
            Configuration lo(n), hi(n);
            for (std::size_t d = 0; d < n; ++d) {
                const double w = 0.2 + 0.4 * rng.uniform_unit();
                lo[d] = rng.uniform_in(0.0, 1.0 - w);
                hi[d] = lo[d] + w;
            }
            // every third instance gets one axis thinner than eps
            const double eps = 0.05 + 0.1 * rng.uniform_unit();
            if (i % 3 == 0) {
                const auto thin = static_cast<std::size_t>(rng.uniform_unit() * n);
                hi[thin] = lo[thin] + 0.5 * eps;
            }
            const Box box(lo, hi);
            // straight path through the box center
            const Configuration center = box.center();
            Configuration dirv(n);
            double norm = 0.0;
            for (std::size_t d = 0; d < n; ++d) {
                dirv[d] = rng.uniform_unit() - 0.5;
                norm += dirv[d] * dirv[d];
            }
            norm = std::sqrt(std::max(norm, 1e-9));
            Configuration a(n), b(n);
            for (std::size_t d = 0; d < n; ++d) {
                a[d] = std::min(1.0, std::max(0.0, center[d] - 0.8 * dirv[d] / norm));
                b[d] = std::min(1.0, std::max(0.0, center[d] + 0.8 * dirv[d] / norm));
            }
            if (chebyshev_distance(a, b) == 0.0) {
                b = center;
                a[0] = std::max(0.0, a[0] - 0.2);
            }
            const auto res =
                verify_sampling_bound(box, Polyline({a, center, b}), eps, 100000, 9000 + i);
            if (res.pass) ++passed;
        }
        const double ms = ms_since(t0);
        char buf[160];
        std::snprintf(buf, sizeof(buf),
                      "sampling lower bound held on %d/100 instances (1e5 trials each) in "
                      "%.1f s (< 120 s)",
                      passed, ms / 1000.0);
        report(7, passed == instances && ms < 120000.0, buf);
    } catch (const std::exception& e) {
        report(7, false, std::string("exception: ") + e.what());
    }

    // 8. partition fuzz
    try {
        Rng rng(31337);
        bool ok = true;
        for (int trial = 0; trial < 1000 && ok; ++trial) {
            const std::size_t n = (trial % 2 == 0) ? 2 : 3;
            SplitTree tree(n);
            std::vector<Configuration> points;
            for (int s = 0; s < 30; ++s) {
                const auto& leaves = tree.leaves();
                auto it = leaves.begin();
                std::advance(it, static_cast<long>(rng.uniform_unit() * leaves.size()));
                const Box& box = tree.cell(*it).box;
                const auto axis = static_cast<std::size_t>(rng.uniform_unit() * n);
                const double c = rng.uniform_in(box.lower[axis], box.upper[axis]);
                if (c <= box.lower[axis] || c >= box.upper[axis]) continue;
                tree.apply_split(*it, axis, c);
            }
            if (std::abs(tree.leaf_measure_sum() - 1.0) > 1e-9) ok = false;
            std::vector<int> leaves(tree.leaves().begin(), tree.leaves().end());
            for (std::size_t i = 0; i < leaves.size() && ok; ++i)
                for (std::size_t j = i + 1; j < leaves.size() && ok; ++j) {
                    const Box& a = tree.cell(leaves[i]).box;
                    const Box& b = tree.cell(leaves[j]).box;
                    bool overlap = true;
                    for (std::size_t d = 0; d < n; ++d)
                        if (!(std::min(a.upper[d], b.upper[d]) -
                                  std::max(a.lower[d], b.lower[d]) >
                              0.0))
                            overlap = false;
                    if (overlap) ok = false;
                }
            for (int probe = 0; probe < 50 && ok; ++probe) {
                Configuration q(n);
                for (auto& v : q) v = rng.uniform_unit();
                if (!tree.cell(tree.locate(q)).box.contains(q)) ok = false;
            }
        }
        report(8, ok, "1000 random split sequences: measures sum to 1, interiors disjoint, "
                      "locate contains");
    } catch (const std::exception& e) {
        report(8, false, std::string("exception: ") + e.what());
    }

    // 9. incremental graph equals rebuild; search agrees with reachability
    try {
        Rng rng(777);
        bool ok = true;
        for (int run = 0; run < 200 && ok; ++run) {
            SplitTree tree(2);
            ConnectivityGraph graph(tree);
            tree.add_sample(0, {rng.uniform_unit(), rng.uniform_unit()}, false);
            for (int s = 0; s < 20 && ok; ++s) {
                const auto& leaves = tree.leaves();
                auto it = leaves.begin();
                std::advance(it, static_cast<long>(rng.uniform_unit() * leaves.size()));
                const int id = *it;
                const Box& box = tree.cell(id).box;
                const auto axis = static_cast<std::size_t>(rng.uniform_unit() * 2);
                const double c = rng.uniform_in(box.lower[axis], box.upper[axis]);
                if (c <= box.lower[axis] || c >= box.upper[axis]) continue;
                const auto r = tree.apply_split(id, axis, c);
                graph.update_on_split(tree, id, r.lo, r.hi);
                for (int child : {r.lo, r.hi})
                    if (tree.cell(child).samples.empty())
                        tree.add_sample(child, tree.cell(child).box.center(),
                                        rng.uniform_unit() < 0.35);
                // compare against an all-pairs rebuild after every split
                std::vector<int> pf;
                for (int lid : tree.leaves())
                    if (tree.cell(lid).status() == CellStatus::PossiblyFree) pf.push_back(lid);
                std::set<std::pair<int, int>> oracle_edges;
                for (std::size_t i = 0; i < pf.size(); ++i)
                    for (std::size_t j = i + 1; j < pf.size(); ++j)
                        if (shared_face(tree.cell(pf[i]).box, tree.cell(pf[j]).box))
                            oracle_edges.insert({pf[i], pf[j]});
                std::set<int> oracle_nodes(pf.begin(), pf.end());
                std::set<int> got_nodes;
                for (int v : graph.nodes(tree)) got_nodes.insert(v);
                std::set<std::pair<int, int>> got_edges;
                for (auto e : graph.edges(tree)) got_edges.insert(e);
                if (got_nodes != oracle_nodes || got_edges != oracle_edges) ok = false;
            }
        }
        bool search_ok = true;
        int agree = 0;
        for (int trial = 0; trial < 1000; ++trial) {
            SplitTree tree(2);
            ConnectivityGraph graph(tree);
            tree.add_sample(0, {rng.uniform_unit(), rng.uniform_unit()}, false);
            for (int s = 0; s < 15; ++s) {
                const auto& leaves = tree.leaves();
                auto it = leaves.begin();
                std::advance(it, static_cast<long>(rng.uniform_unit() * leaves.size()));
                const int id = *it;
                const Box& box = tree.cell(id).box;
                const auto axis = static_cast<std::size_t>(rng.uniform_unit() * 2);
                const double c = rng.uniform_in(box.lower[axis], box.upper[axis]);
                if (c <= box.lower[axis] || c >= box.upper[axis]) continue;
                const auto r = tree.apply_split(id, axis, c);
                graph.update_on_split(tree, id, r.lo, r.hi);
                for (int child : {r.lo, r.hi})
                    if (tree.cell(child).samples.empty())
                        tree.add_sample(child, tree.cell(child).box.center(),
                                        rng.uniform_unit() < 0.4);
            }
            std::vector<int> pf;
            for (int lid : tree.leaves())
                if (tree.cell(lid).status() == CellStatus::PossiblyFree) pf.push_back(lid);
            if (pf.size() < 2) continue;
            const int a = pf[static_cast<std::size_t>(rng.uniform_unit() * pf.size())];
            const int b = pf[static_cast<std::size_t>(rng.uniform_unit() * pf.size())];
            // BFS oracle
            std::set<int> seen{a};
            std::vector<int> stack{a};
            while (!stack.empty()) {
                const int cur = stack.back();
                stack.pop_back();
                for (int nb : graph.neighbors(cur))
                    if (tree.cell(nb).status() == CellStatus::PossiblyFree &&
                        seen.insert(nb).second)
                        stack.push_back(nb);
            }
            const bool reachable = seen.count(b) != 0;
            const auto path = find_cell_path(tree, graph, a, b, tree.cell(b).box.center());
            if (path.has_value() != reachable) search_ok = false;
            ++agree;
        }
        report(9, ok && search_ok && agree > 900,
               "incremental graph matches rebuild in 200 runs; search matches reachability "
               "in 1000 graphs");
    } catch (const std::exception& e) {
        report(9, false, std::string("exception: ") + e.what());
    }

    // 10. staircase conversion and covering on randomized paths
    try {
        Rng rng(4242);
        bool ok = true;
        const Scene& wall = corpus.scene("wall_gap");
        Scene empty;
        empty.dimension = 2;
        for (int trial = 0; trial < 50 && ok; ++trial) {
            const bool obstructed = trial % 2 == 1;
            const Scene& scene = obstructed ? wall : empty;
            Polyline path;
            if (obstructed) {
                // random detours over the wall, staying collision-free
                const double y = 0.92 + 0.06 * rng.uniform_unit();
                path = Polyline({{0.05 + 0.2 * rng.uniform_unit(), 0.2 + 0.5 * rng.uniform_unit()},
                                 {0.1 + 0.1 * rng.uniform_unit(), y},
                                 {0.7 + 0.2 * rng.uniform_unit(), y},
                                 {0.8 + 0.1 * rng.uniform_unit(), 0.2 + 0.5 * rng.uniform_unit()}});
            } else {
                std::vector<Configuration> wp;
                wp.push_back({0.1 + 0.8 * rng.uniform_unit(), 0.1 + 0.8 * rng.uniform_unit()});
                for (int s = 0; s < 3; ++s) {
                    Configuration next{0.1 + 0.8 * rng.uniform_unit(),
                                       0.1 + 0.8 * rng.uniform_unit()};
                    if (chebyshev_distance(next, wp.back()) > 0.0) wp.push_back(next);
                }
                if (wp.size() < 2) continue;
                path = Polyline(wp);
            }
            const double delta = 0.002;
            const double clearance = tunnel_clearance(scene, path, delta);
            if (clearance <= 3.0 * delta) continue;
            const double eps =
                std::min(0.9 * clearance, 0.02 + 0.1 * rng.uniform_unit());
            if (eps <= 2.0 * delta) continue;

            const ManhattanPath mp = manhattanize(scene, path, eps, delta);
            for (std::size_t s = 0; s + 1 < mp.path.waypoints.size(); ++s) {
                std::size_t varying = 0;
                for (std::size_t d = 0; d < 2; ++d)
                    if (mp.path.waypoints[s][d] != mp.path.waypoints[s + 1][d]) ++varying;
                if (varying != 1) ok = false;
            }
            if (mp.path.waypoints.front() != path.waypoints.front()) ok = false;
            if (mp.path.waypoints.back() != path.waypoints.back()) ok = false;
            for (const auto& q : discretize(mp.path, delta))
                if (is_colliding(scene, q)) ok = false;
            if (static_cast<double>(mp.ball_centers.size()) >
                std::ceil(path.length() / eps - 1e-9) + 1.0)
                ok = false;

            const Covering cov = finite_covering(mp.path, eps);
            const double bound = 2.0 + static_cast<double>(mp.corner_count) +
                                 mp.path.length() / eps;
            if (static_cast<double>(cov.count()) >= bound) ok = false;
            for (const auto& q : discretize(mp.path, 1.0 / 2000.0)) {
                bool covered = false;
                for (const auto& c : cov.centers)
                    if (chebyshev_distance(q, c) < eps) { covered = true; break; }
                if (!covered) ok = false;
            }
        }
        report(10, ok, "staircase conversion and coverings hold on 50 randomized paths");
    } catch (const std::exception& e) {
        report(10, false, std::string("exception: ") + e.what());
    }

    // 11. byte-identical traces and renders across repeated runs
    try {
        const Scene& s = corpus.scene("wall_gap");
        PlannerConfig cfg;
        cfg.seed = 99;
        const PlanResult r1 = plan(s, *s.start, *s.goal, cfg);
        const PlanResult r2 = plan(s, *s.start, *s.goal, cfg);
        const std::string t1 = r1.trace.serialize();
        const std::string t2 = r2.trace.serialize();
        const SplitTree tree1 = replay_tree(r1.trace);
        const SplitTree tree2 = replay_tree(r2.trace);
        const std::string svg1 = render_svg(tree1, s, r1.solved() ? &r1.path : nullptr);
        const std::string svg2 = render_svg(tree2, s, r2.solved() ? &r2.path : nullptr);
        report(11, t1 == t2 && svg1 == svg2 && r1.solved(),
               "repeated runs give byte-identical traces and SVG");
    } catch (const std::exception& e) {
        report(11, false, std::string("exception: ") + e.what());
    }

    std::printf("%d criteria failed\n", g_failures);
    return g_failures == 0 ? 0 : 1;
}
