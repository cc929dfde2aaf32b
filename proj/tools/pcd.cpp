// Command-line front end: plan single queries, benchmark the scene corpus,
// audit recorded traces, run the path-analysis constructions, and render
// 2-D snapshots to SVG.
//
// Exit codes: 0 solved / audit passed, 2 exhausted / audit failed, 1 error.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "pcd/analysis.hpp"
#include "pcd/planner.hpp"
#include "pcd/scene_io.hpp"
#include "pcd/svg.hpp"
#include "pcd/trace.hpp"

namespace {

pcd::Configuration parse_coords(const std::string& s) {
    pcd::Configuration q;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) q.push_back(std::stod(item));
    if (q.empty()) throw CLI::ValidationError("expected comma-separated coordinates");
    return q;
}

std::vector<int> parse_budgets(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stoi(item));
    if (out.empty()) throw CLI::ValidationError("expected comma-separated budgets");
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct PlanArgs {
    std::string scene_file;
    std::string start, goal;
    std::uint64_t seed = 0;
    int budget = 10000;
    double resolution = pcd::kDefaultResolution;
    bool store_checkpath = false;
    std::string trace_out, svg_out;
};

int cmd_plan(const PlanArgs& a) {
    const pcd::Scene scene = pcd::load_scene_file(a.scene_file);
    pcd::Configuration start = a.start.empty()
                                   ? scene.start.value_or(pcd::Configuration{})
                                   : parse_coords(a.start);
    pcd::Configuration goal =
        a.goal.empty() ? scene.goal.value_or(pcd::Configuration{}) : parse_coords(a.goal);
    if (start.empty() || goal.empty())
        throw std::runtime_error("scene file has no endpoints; pass --start/--goal");

    pcd::PlannerConfig cfg;
    cfg.seed = a.seed;
    cfg.k_max = a.budget;
    cfg.delta = a.resolution;
    cfg.store_checkpath_samples = a.store_checkpath;

    const auto t0 = std::chrono::steady_clock::now();
    pcd::Planner planner(scene, start, goal, cfg);
    const pcd::PlanResult r = planner.run();
    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    pcd::Json j;
    j["version"] = 1;
    j["scene"] = scene.name;
    j["seed"] = a.seed;
    j["budget"] = a.budget;
    j["resolution"] = a.resolution;
    j["status"] = r.solved() ? "solved" : "exhausted";
    j["iterations"] = r.iterations;
    j["splits"] = r.splits;
    j["samples"] = r.samples;
    j["probes"] = r.probes;
    j["wall_ms"] = wall_ms;
    if (r.solved()) {
        j["path"] = pcd::Json::array();
        for (const auto& w : r.path.waypoints) j["path"].push_back(w);
    }
    std::cout << j.dump(2) << "\n";

    if (!a.trace_out.empty()) write_file(a.trace_out, r.trace.serialize());
    if (!a.svg_out.empty()) {
        const pcd::SplitTree tree = pcd::replay_tree(r.trace);
        write_file(a.svg_out,
                   pcd::render_svg(tree, scene, r.solved() ? &r.path : nullptr));
    }
    return r.solved() ? 0 : 2;
}

struct BenchArgs {
    std::string corpus;
    std::string budgets = "10,100,1000,10000";
    int trials = 10;
    std::uint64_t seed = 0;
    std::string out;
    double resolution = pcd::kDefaultResolution;
    unsigned threads = std::thread::hardware_concurrency();
};

int cmd_bench(const BenchArgs& a) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    if (fs::is_directory(a.corpus)) {
        for (const auto& e : fs::directory_iterator(a.corpus))
            if (e.path().extension() == ".json") files.push_back(e.path().string());
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(a.corpus);
    }
    if (files.empty()) throw std::runtime_error("no scene files in " + a.corpus);

    if (a.trials < 1) throw std::runtime_error("bench needs at least one trial");
    std::vector<pcd::Scene> scenes;
    for (const auto& f : files) {
        pcd::Scene s = pcd::load_scene_file(f);
        if (!s.start || !s.goal)
            throw std::runtime_error("scene " + f + " has no endpoints");
        if (pcd::is_colliding(s, *s.start) || pcd::is_colliding(s, *s.goal))
            throw std::runtime_error("scene " + f + " has colliding endpoints");
        scenes.push_back(std::move(s));
    }
    const std::vector<int> budgets = parse_budgets(a.budgets);
    const int k_max = *std::max_element(budgets.begin(), budgets.end());

    struct RunStats {
        int iterations = -1;  // -1 when exhausted
        std::uint64_t splits = 0, samples = 0, probes = 0;
        double wall_ms = 0.0;
    };
    std::vector<RunStats> runs(scenes.size() * static_cast<std::size_t>(a.trials));
    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= runs.size()) return;
            const std::size_t si = i / static_cast<std::size_t>(a.trials);
            const std::uint64_t seed = a.seed + i % static_cast<std::size_t>(a.trials);
            pcd::PlannerConfig cfg;
            cfg.seed = seed;
            cfg.k_max = k_max;
            cfg.delta = a.resolution;
            const auto t0 = std::chrono::steady_clock::now();
            const pcd::PlanResult r =
                pcd::plan(scenes[si], *scenes[si].start, *scenes[si].goal, cfg);
            RunStats& run = runs[i];
            run.iterations = r.solved() ? r.iterations : -1;
            run.splits = r.splits;
            run.samples = r.samples;
            run.probes = r.probes;
            run.wall_ms = std::chrono::duration<double, std::milli>(
                              std::chrono::steady_clock::now() - t0)
                              .count();
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 0; t + 1 < std::max(1u, a.threads); ++t) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    std::ostringstream csv;
    csv << pcd::bench_csv_header();
    for (std::size_t i = 0; i < runs.size(); ++i) {
        const std::size_t si = i / static_cast<std::size_t>(a.trials);
        for (int b : budgets) {
            pcd::BenchRow row;
            row.scene = scenes[si].name;
            row.seed = a.seed + i % static_cast<std::size_t>(a.trials);
            row.budget = b;
            row.solved = runs[i].iterations >= 0 && runs[i].iterations <= b;
            row.k_solve = runs[i].iterations;
            row.splits = runs[i].splits;
            row.samples = runs[i].samples;
            row.probes = runs[i].probes;
            row.wall_ms = runs[i].wall_ms;
            csv << pcd::bench_csv_row(row);
        }
    }
    if (a.out.empty())
        std::cout << csv.str();
    else
        write_file(a.out, csv.str());
    return 0;
}

int cmd_audit(const std::string& trace_file, const std::string& scene_file,
              const std::string& refpath_file) {
    const pcd::PlanTrace trace = pcd::PlanTrace::parse(read_file(trace_file));
    const pcd::Scene scene = pcd::load_scene_file(scene_file);
    std::optional<pcd::Polyline> ref;
    if (!refpath_file.empty()) ref = pcd::load_polyline_file(refpath_file);
    const pcd::AuditReport report = pcd::audit_trace(trace, scene, ref);
    pcd::Json j;
    j["version"] = 1;
    j["checks"] = pcd::Json::array();
    for (const auto& c : report.checks) {
        pcd::Json cj;
        cj["name"] = c.name;
        cj["pass"] = c.pass;
        cj["violations"] = c.violations;
        j["checks"].push_back(std::move(cj));
        std::cerr << (c.pass ? "[pass] " : "[FAIL] ") << c.name;
        if (!c.violations.empty()) std::cerr << " (" << c.violations.size() << " violations)";
        std::cerr << "\n";
    }
    std::cout << j.dump(2) << "\n";
    return report.all_pass() ? 0 : 2;
}

int cmd_render(const std::string& trace_file, const std::string& scene_file,
               const std::string& out) {
    const pcd::PlanTrace trace = pcd::PlanTrace::parse(read_file(trace_file));
    const pcd::Scene scene = pcd::load_scene_file(scene_file);
    const pcd::SplitTree tree = pcd::replay_tree(trace);
    write_file(out, pcd::render_svg(tree, scene));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"probabilistic cell decomposition path planner"};
    app.require_subcommand(1);

    PlanArgs plan_args;
    auto* plan_cmd = app.add_subcommand("plan", "solve one path query");
    plan_cmd->add_option("scene", plan_args.scene_file, "scene file")->required();
    plan_cmd->add_option("--start", plan_args.start, "start coordinates x,y,...");
    plan_cmd->add_option("--goal", plan_args.goal, "goal coordinates x,y,...");
    plan_cmd->add_option("--seed", plan_args.seed, "random seed");
    plan_cmd->add_option("--budget", plan_args.budget, "iteration budget");
    plan_cmd->add_option("--resolution", plan_args.resolution, "path-check resolution");
    plan_cmd->add_flag("--store-checkpath-samples", plan_args.store_checkpath,
                       "store collision-free probes found while checking paths");
    plan_cmd->add_option("--trace", plan_args.trace_out, "write the run trace here");
    plan_cmd->add_option("--svg", plan_args.svg_out, "render the final decomposition here");

    BenchArgs bench_args;
    auto* bench_cmd = app.add_subcommand("bench", "run a batch over a scene corpus");
    bench_cmd->add_option("corpus", bench_args.corpus, "scene file or directory")->required();
    bench_cmd->add_option("--budgets", bench_args.budgets, "comma-separated budgets");
    bench_cmd->add_option("--trials", bench_args.trials, "trials per scene");
    bench_cmd->add_option("--seed", bench_args.seed, "base seed");
    bench_cmd->add_option("--resolution", bench_args.resolution, "path-check resolution");
    bench_cmd->add_option("--threads", bench_args.threads, "worker threads");
    bench_cmd->add_option("--out", bench_args.out, "output CSV file (stdout otherwise)");

    std::string audit_trace_file, audit_scene_file, audit_ref;
    auto* audit_cmd = app.add_subcommand("audit", "replay a trace and run its checks");
    audit_cmd->add_option("trace", audit_trace_file, "trace file")->required();
    audit_cmd->add_option("scene", audit_scene_file, "scene file")->required();
    audit_cmd->add_option("--reference-path", audit_ref, "feasible reference polyline");

    auto* analyze_cmd = app.add_subcommand("analyze", "path constructions");
    analyze_cmd->require_subcommand(1);

    std::string man_scene, man_path, man_out;
    double man_eps = 0.1, man_delta = pcd::kDefaultResolution;
    auto* man_cmd = analyze_cmd->add_subcommand("manhattanize", "convert to an axis-parallel path");
    man_cmd->add_option("scene", man_scene)->required();
    man_cmd->add_option("--path", man_path, "polyline file")->required();
    man_cmd->add_option("--eps", man_eps, "ball radius")->required();
    man_cmd->add_option("--resolution", man_delta);
    man_cmd->add_option("--out", man_out, "write the converted polyline here");

    std::string cov_path;
    double cov_eps = 0.1;
    auto* cov_cmd = analyze_cmd->add_subcommand("covering", "cover an axis-parallel path by balls");
    cov_cmd->add_option("--path", cov_path, "polyline file")->required();
    cov_cmd->add_option("--eps", cov_eps, "ball radius")->required();

    std::string clr_scene, clr_path;
    double clr_delta = pcd::kDefaultResolution;
    auto* clr_cmd = analyze_cmd->add_subcommand("clearance", "minimum clearance along a path");
    clr_cmd->add_option("scene", clr_scene)->required();
    clr_cmd->add_option("--path", clr_path, "polyline file")->required();
    clr_cmd->add_option("--resolution", clr_delta);

    std::string render_trace_file, render_scene_file, render_out;
    auto* render_cmd = app.add_subcommand("render", "render a trace snapshot to SVG");
    render_cmd->add_option("trace", render_trace_file)->required();
    render_cmd->add_option("scene", render_scene_file)->required();
    render_cmd->add_option("--out", render_out, "output SVG file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*plan_cmd) return cmd_plan(plan_args);
        if (*bench_cmd) return cmd_bench(bench_args);
        if (*audit_cmd) return cmd_audit(audit_trace_file, audit_scene_file, audit_ref);
        if (*render_cmd) return cmd_render(render_trace_file, render_scene_file, render_out);
        if (*man_cmd) {
            const pcd::Scene scene = pcd::load_scene_file(man_scene);
            const pcd::Polyline path = pcd::load_polyline_file(man_path);
            const pcd::ManhattanPath mp = pcd::manhattanize(scene, path, man_eps, man_delta);
            pcd::Json j;
            j["version"] = 1;
            j["eps"] = man_eps;
            j["resolution"] = man_delta;
            j["ball_centers"] = mp.ball_centers.size();
            j["corners"] = mp.corner_count;
            j["length"] = mp.path.length();
            j["waypoints"] = pcd::Json::array();
            for (const auto& w : mp.path.waypoints) j["waypoints"].push_back(w);
            std::cout << j.dump(2) << "\n";
            if (!man_out.empty()) write_file(man_out, pcd::save_polyline(mp.path));
            return 0;
        }
        if (*cov_cmd) {
            const pcd::Polyline path = pcd::load_polyline_file(cov_path);
            const pcd::Covering cov = pcd::finite_covering(path, cov_eps);
            pcd::Json j;
            j["version"] = 1;
            j["eps"] = cov_eps;
            j["count"] = cov.count();
            j["centers"] = pcd::Json::array();
            for (const auto& c : cov.centers) j["centers"].push_back(c);
            std::cout << j.dump(2) << "\n";
            return 0;
        }
        if (*clr_cmd) {
            const pcd::Scene scene = pcd::load_scene_file(clr_scene);
            const pcd::Polyline path = pcd::load_polyline_file(clr_path);
            pcd::Json j;
            j["version"] = 1;
            j["resolution"] = clr_delta;
            j["clearance"] = pcd::tunnel_clearance(scene, path, clr_delta);
            std::cout << j.dump(2) << "\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
