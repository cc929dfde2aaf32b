#include <doctest.h>

#include <cmath>

#include "pcd/planner.hpp"
#include "pcd/rng.hpp"

using namespace pcd;

namespace {

Scene box_scene(std::vector<Box> boxes, std::string name = "test") {
    Scene s;
    s.dimension = 2;
    s.name = std::move(name);
    for (auto& b : boxes) s.obstacles.push_back(Obstacle{BoxObstacle{std::move(b)}});
    return s;
}

Scene empty_scene() {
    Scene s;
    s.dimension = 2;
    s.name = "empty";
    return s;
}

PlannerConfig config(std::uint64_t seed, int k_max = 10000) {
    PlannerConfig cfg;
    cfg.seed = seed;
    cfg.k_max = k_max;
    return cfg;
}

}  // namespace

TEST_CASE("local paths connect shared-face centers") {
    SplitTree tree(2);
    const Configuration start{0.1, 0.2}, goal{0.9, 0.8};

    auto single = derive_local_path(tree, {0}, start, goal);
    CHECK(single.waypoints == std::vector<Configuration>{start, goal});

    const auto r = tree.apply_split(0, 0, 0.5);
    auto two = derive_local_path(tree, {r.lo, r.hi}, start, goal);
    CHECK(two.waypoints ==
          std::vector<Configuration>{{0.1, 0.2}, {0.5, 0.5}, {0.9, 0.8}});

    CHECK_THROWS_AS(derive_local_path(tree, {r.lo, r.lo}, start, goal), std::invalid_argument);
}

TEST_CASE("three-cell corridor routes through both face centers") {
    SplitTree tree(2);
    const auto r1 = tree.apply_split(0, 0, 1.0 / 3.0);
    const auto r2 = tree.apply_split(r1.hi, 0, 2.0 / 3.0);
    auto p = derive_local_path(tree, {r1.lo, r2.lo, r2.hi}, {0.1, 0.5}, {0.9, 0.5});
    REQUIRE(p.waypoints.size() == 4);
    CHECK(p.waypoints[1] == Configuration{1.0 / 3.0, 0.5});
    CHECK(p.waypoints[2] == Configuration{2.0 / 3.0, 0.5});
}

TEST_CASE("checking a channel in an empty scene is free") {
    const Scene s = empty_scene();
    Planner p(s, {0.1, 0.5}, {0.9, 0.5}, config(1));
    auto channel = p.find_channel();
    REQUIRE(channel.has_value());
    const auto outcome = p.check_path(*channel);
    CHECK(outcome.path_free);
    CHECK(outcome.local.waypoints.front() == Configuration{0.1, 0.5});
    CHECK(outcome.local.waypoints.back() == Configuration{0.9, 0.5});
}

TEST_CASE("a collision makes exactly one leaf mixed") {
    const Scene s = box_scene({Box({0.4, 0.4}, {0.6, 0.6})});
    Planner p(s, {0.1, 0.5}, {0.9, 0.5}, config(1));
    auto channel = p.find_channel();
    REQUIRE(channel.has_value());
    const auto outcome = p.check_path(*channel);
    CHECK(!outcome.path_free);
    CHECK(is_colliding(s, outcome.collider));
    CHECK(p.tree().cell(outcome.cell).status() == CellStatus::Mixed);
    CHECK(p.tree().mixed_leaves().size() == 1);
}

TEST_CASE("sampling draws once per possibly occupied cell") {
    const Scene s = empty_scene();
    Planner p(s, {0.1, 0.5}, {0.9, 0.5}, config(1));
    CHECK(p.sample_occupied() == 0);  // no possibly occupied cells yet
    CHECK(p.tree().leaves().size() == 1);
}

TEST_CASE("a cell inside an obstacle stays possibly occupied when sampled") {
    const Scene s = box_scene({Box({0.0, 0.4}, {1.0, 0.6})});
    Planner p(s, {0.5, 0.1}, {0.5, 0.9}, config(3, 1));
    // carve cells until some possibly occupied leaf sits fully inside the band
    auto inside_pocc = [&]() -> int {
        for (int id : p.tree().leaves_with_status(CellStatus::PossiblyOccupied)) {
            const Box& b = p.tree().cell(id).box;
            if (b.lower[1] >= 0.4 && b.upper[1] <= 0.6) return id;
        }
        return -1;
    };
    while (auto channel = p.find_channel()) {
        if (p.check_path(*channel).path_free) break;
        p.resolve_mixed();
    }
    int target = inside_pocc();
    for (int round = 0; round < 50 && target < 0; ++round) {
        if (p.sample_occupied() > 0) p.resolve_mixed();
        target = inside_pocc();
    }
    REQUIRE(target >= 0);
    const std::size_t before = p.tree().cell(target).samples.size();
    p.sample_occupied();
    const Cell& c = p.tree().cell(target);
    CHECK(c.status() == CellStatus::PossiblyOccupied);
    CHECK(c.samples.size() == before + 1);
    CHECK(c.samples.back().colliding);
}

TEST_CASE("free-draw rate matches the free volume of the sampled cell") {
    // deterministic first collision carves a fixed possibly occupied cell;
    // fresh seeds then draw one sample each from the same box
    const Scene s = box_scene({Box({0.0, 0.4}, {0.5, 0.6})});
    const Configuration start{0.25, 0.1}, goal{0.25, 0.9};

    Box pocc_box;
    double free_fraction = 0.0;
    int hits = 0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) {
        Planner p(s, start, goal, config(1000 + static_cast<std::uint64_t>(t), 1));
        while (true) {
            auto channel = p.find_channel();
            if (!channel) break;
            auto outcome = p.check_path(*channel);
            REQUIRE(!outcome.path_free);
            p.resolve_mixed();
        }
        if (t == 0) {
            const auto pocc = p.tree().leaves_with_status(CellStatus::PossiblyOccupied);
            REQUIRE(pocc.size() == 1);
            pocc_box = p.tree().cell(pocc.front()).box;
            // oracle: free share of the cell from box geometry
            const double ox = std::min(pocc_box.upper[0], 0.5) - std::max(pocc_box.lower[0], 0.0);
            const double oy = std::min(pocc_box.upper[1], 0.6) - std::max(pocc_box.lower[1], 0.4);
            free_fraction = 1.0 - (ox * oy) / box_measure(pocc_box);
        }
        hits += static_cast<int>(p.sample_occupied());
    }
    const double rate = static_cast<double>(hits) / trials;
    CHECK(free_fraction > 0.05);
    CHECK(free_fraction < 0.95);
    CHECK(rate == doctest::Approx(free_fraction).epsilon(0.05));
}

TEST_CASE("empty scene solves immediately with the straight path") {
    const auto r = plan(empty_scene(), {0.1, 0.5}, {0.9, 0.5}, config(1));
    CHECK(r.solved());
    CHECK(r.iterations == 1);
    CHECK(r.splits == 0);
    CHECK(r.path.waypoints == std::vector<Configuration>{{0.1, 0.5}, {0.9, 0.5}});
}

TEST_CASE("wall with a gap is solved and the path re-verifies at half resolution") {
    const Scene s = box_scene({Box({0.45, 0.0}, {0.55, 0.9})}, "gap");
    PlannerConfig cfg = config(1);
    const auto r = plan(s, {0.1, 0.5}, {0.9, 0.5}, cfg);
    REQUIRE(r.solved());
    CHECK(r.iterations >= 1);
    CHECK(r.path.waypoints.front() == Configuration{0.1, 0.5});
    CHECK(r.path.waypoints.back() == Configuration{0.9, 0.5});
    for (std::size_t i = 0; i + 1 < r.path.waypoints.size(); ++i)
        CHECK(!check_segment(s, r.path.waypoints[i], r.path.waypoints[i + 1], cfg.delta / 2.0));
}

TEST_CASE("endpoint preconditions") {
    const Scene s = box_scene({Box({0.4, 0.4}, {0.6, 0.6})});
    CHECK_THROWS_AS(plan(s, {0.1, 0.5}, {0.5, 0.5}, config(1)), std::invalid_argument);
    CHECK_THROWS_AS(plan(s, {0.5, 0.5}, {0.9, 0.5}, config(1)), std::invalid_argument);
    CHECK_THROWS_AS(plan(s, {0.1, 0.5}, {1.1, 0.5}, config(1)), std::invalid_argument);
    CHECK_THROWS_AS(plan(s, {0.1}, {0.9, 0.5}, config(1)), std::invalid_argument);
    Scene three = s;
    three.dimension = 3;
    CHECK_THROWS_AS(plan(three, {0.1, 0.5}, {0.9, 0.5}, config(1)), std::invalid_argument);
}

TEST_CASE("coincident endpoints solve without iterating") {
    const auto r = plan(empty_scene(), {0.3, 0.3}, {0.3, 0.3}, config(1));
    CHECK(r.solved());
    CHECK(r.iterations == 0);
    CHECK(r.path.waypoints == std::vector<Configuration>{{0.3, 0.3}});
}

TEST_CASE("progress: every inner iteration splits, solves, or breaks") {
    const Scene s = box_scene({Box({0.45, 0.0}, {0.55, 0.9})});
    Planner p(s, {0.1, 0.5}, {0.9, 0.5}, config(2));
    std::size_t leaves = p.tree().leaves().size();
    for (int guard = 0; guard < 10000; ++guard) {
        auto channel = p.find_channel();
        if (!channel) break;
        const auto outcome = p.check_path(*channel);
        if (outcome.path_free) break;
        p.resolve_mixed();
        CHECK(p.tree().leaves().size() > leaves);
        leaves = p.tree().leaves().size();
    }
}

TEST_CASE("identical inputs give byte-identical traces") {
    const Scene s = box_scene({Box({0.45, 0.0}, {0.55, 0.9})}, "determinism");
    const auto r1 = plan(s, {0.1, 0.5}, {0.9, 0.5}, config(7));
    const auto r2 = plan(s, {0.1, 0.5}, {0.9, 0.5}, config(7));
    CHECK(r1.trace.serialize() == r2.trace.serialize());
    const auto r3 = plan(s, {0.1, 0.5}, {0.9, 0.5}, config(8));
    CHECK(r1.trace.serialize() != r3.trace.serialize());
}

TEST_CASE("stored-probe variant keeps multiple free samples per cell") {
    const Scene s = box_scene({Box({0.45, 0.0}, {0.55, 0.9})});
    PlannerConfig cfg = config(5);
    cfg.store_checkpath_samples = true;
    const auto r = plan(s, {0.1, 0.5}, {0.9, 0.5}, cfg);
    CHECK(r.solved());
    bool multi_free = false;
    const SplitTree tree = replay_tree(r.trace);
    for (int id : tree.leaves())
        if (tree.cell(id).free_count > 1) multi_free = true;
    CHECK(multi_free);
    // the default keeps one free sample per possibly free cell
    const auto rd = plan(s, {0.1, 0.5}, {0.9, 0.5}, config(5));
    const SplitTree td = replay_tree(rd.trace);
    for (int id : td.leaves()) {
        const Cell& c = td.cell(id);
        if (c.status() == CellStatus::PossiblyFree && id != 0) CHECK(c.free_count == 1);
    }
}

TEST_CASE("planning works in three dimensions") {
    Scene s;
    s.dimension = 3;
    s.name = "wall3d";
    s.obstacles.push_back(
        Obstacle{BoxObstacle{Box({0.45, 0.0, 0.0}, {0.55, 1.0, 0.9})}});
    for (std::uint64_t seed : {1, 2, 3}) {
        PlannerConfig cfg = config(seed);
        const auto r = plan(s, {0.1, 0.5, 0.5}, {0.9, 0.5, 0.5}, cfg);
        REQUIRE(r.solved());
        for (std::size_t i = 0; i + 1 < r.path.waypoints.size(); ++i)
            CHECK(!check_segment(s, r.path.waypoints[i], r.path.waypoints[i + 1],
                                 cfg.delta / 2.0));
    }
}

TEST_CASE("replaying a trace reproduces the final tree bit-exactly") {
    const Scene s = box_scene({Box({0.45, 0.0}, {0.55, 0.9})}, "replay");
    Planner p(s, {0.1, 0.5}, {0.9, 0.5}, config(11));
    const auto r = p.run();
    REQUIRE(r.solved());
    const PlanTrace reparsed = PlanTrace::parse(r.trace.serialize());
    const SplitTree replayed = replay_tree(reparsed);
    REQUIRE(replayed.leaves() == p.tree().leaves());
    for (int id : p.tree().leaves()) {
        const Cell& a = p.tree().cell(id);
        const Cell& b = replayed.cell(id);
        CHECK(a.box.lower == b.box.lower);
        CHECK(a.box.upper == b.box.upper);
        REQUIRE(a.samples.size() == b.samples.size());
        for (std::size_t i = 0; i < a.samples.size(); ++i) {
            CHECK(a.samples[i].q == b.samples[i].q);
            CHECK(a.samples[i].colliding == b.samples[i].colliding);
        }
        // stored samples live in their cell's box and locate maps them back
        for (const auto& smp : a.samples) {
            CHECK(a.box.contains(smp.q));
            CHECK(p.tree().locate(smp.q) == id);
        }
    }
}
