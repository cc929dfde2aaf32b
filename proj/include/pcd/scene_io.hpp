#pragma once

// Versioned JSON formats for scenes and polylines.
//
// Scene:    {"version":1, "name":..., "dimension":n, "obstacles":[...],
//            "start":[..], "goal":[..]}
// Obstacle: {"kind":"box", "lower":[..], "upper":[..]}
//         | {"kind":"polynomial", "constraints":[{"terms":[[coeff,[e..]],..],
//            "relation":"<=0"}, ..]}
//         | {"kind":"union", "members":[..]}
// Polyline: {"version":1, "waypoints":[[..],..]}

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "pcd/collision.hpp"
#include "pcd/geometry.hpp"

namespace pcd {

using Json = nlohmann::ordered_json;

namespace detail {

inline Configuration parse_point(const Json& j, std::size_t n, const std::string& where) {
    if (!j.is_array() || j.size() != n)
        throw std::invalid_argument(where + ": expected an array of " + std::to_string(n) +
                                    " numbers");
    Configuration q;
    for (const auto& v : j) q.push_back(v.get<double>());
    return q;
}

inline PolynomialConstraint::Relation parse_relation(const std::string& s,
                                                     const std::string& where) {
    using R = PolynomialConstraint::Relation;
    if (s == "<=0") return R::LessEqual;
    if (s == "<0") return R::Less;
    if (s == "=0") return R::Equal;
    if (s == ">=0") return R::GreaterEqual;
    if (s == ">0") return R::Greater;
    throw std::invalid_argument(where + ": unknown relation '" + s + "'");
}

inline std::string relation_name(PolynomialConstraint::Relation r) {
    using R = PolynomialConstraint::Relation;
    switch (r) {
        case R::LessEqual: return "<=0";
        case R::Less: return "<0";
        case R::Equal: return "=0";
        case R::GreaterEqual: return ">=0";
        case R::Greater: return ">0";
    }
    return "<=0";
}

inline Obstacle parse_obstacle(const Json& j, std::size_t n, const std::string& where) {
    if (!j.is_object() || !j.contains("kind"))
        throw std::invalid_argument(where + ": obstacle needs a 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "box") {
        Box b(parse_point(j.at("lower"), n, where + ".lower"),
              parse_point(j.at("upper"), n, where + ".upper"));
        return Obstacle{BoxObstacle{std::move(b)}};
    }
    if (kind == "polynomial") {
        SemiAlgebraicObstacle s;
        const auto& cs = j.at("constraints");
        for (std::size_t ci = 0; ci < cs.size(); ++ci) {
            const std::string cwhere = where + ".constraints[" + std::to_string(ci) + "]";
            PolynomialConstraint pc;
            pc.relation = parse_relation(cs[ci].at("relation").get<std::string>(), cwhere);
            const auto& terms = cs[ci].at("terms");
            for (std::size_t ti = 0; ti < terms.size(); ++ti) {
                const auto& t = terms[ti];
                const std::string twhere = cwhere + ".terms[" + std::to_string(ti) + "]";
                if (!t.is_array() || t.size() != 2)
                    throw std::invalid_argument(twhere + ": expected [coeff, [exponents..]]");
                PolynomialConstraint::Term term;
                term.coeff = t[0].get<double>();
                if (!t[1].is_array() || t[1].size() != n)
                    throw std::invalid_argument(twhere + ": exponent list length " +
                                                std::to_string(t[1].size()) +
                                                " != dimension " + std::to_string(n));
                for (const auto& e : t[1]) term.exponents.push_back(e.get<unsigned>());
                pc.terms.push_back(std::move(term));
            }
            pc.validate(n);
            s.constraints.push_back(std::move(pc));
        }
        return Obstacle{std::move(s)};
    }
    if (kind == "union") {
        UnionObstacle u;
        const auto& ms = j.at("members");
        for (std::size_t mi = 0; mi < ms.size(); ++mi)
            u.members.push_back(
                parse_obstacle(ms[mi], n, where + ".members[" + std::to_string(mi) + "]"));
        return Obstacle{std::move(u)};
    }
    throw std::invalid_argument(where + ": unknown obstacle kind '" + kind + "'");
}

inline Json obstacle_to_json(const Obstacle& o) {
    Json j;
    if (const auto* b = std::get_if<BoxObstacle>(&o.shape)) {
        j["kind"] = "box";
        j["lower"] = b->box.lower;
        j["upper"] = b->box.upper;
        return j;
    }
    if (const auto* s = std::get_if<SemiAlgebraicObstacle>(&o.shape)) {
        j["kind"] = "polynomial";
        j["constraints"] = Json::array();
        for (const auto& c : s->constraints) {
            Json cj;
            cj["terms"] = Json::array();
            for (const auto& t : c.terms) cj["terms"].push_back(Json::array({t.coeff, t.exponents}));
            cj["relation"] = relation_name(c.relation);
            j["constraints"].push_back(std::move(cj));
        }
        return j;
    }
    const auto& u = std::get<UnionObstacle>(o.shape);
    j["kind"] = "union";
    j["members"] = Json::array();
    for (const auto& m : u.members) j["members"].push_back(obstacle_to_json(m));
    return j;
}

}  // namespace detail

inline Scene load_scene(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("scene parse error: ") + e.what());
    }
    if (!j.contains("version") || j.at("version").get<int>() != 1)
        throw std::invalid_argument("scene: unsupported or missing version (expected 1)");
    Scene scene;
    scene.name = j.value("name", std::string{});
    if (!j.contains("dimension"))
        throw std::invalid_argument("scene: missing 'dimension'");
    const long dim = j.at("dimension").get<long>();
    if (dim < 1) throw std::invalid_argument("scene: dimension must be >= 1");
    scene.dimension = static_cast<std::size_t>(dim);
    if (j.contains("obstacles")) {
        const auto& obs = j.at("obstacles");
        for (std::size_t i = 0; i < obs.size(); ++i)
            scene.obstacles.push_back(detail::parse_obstacle(
                obs[i], scene.dimension, "obstacles[" + std::to_string(i) + "]"));
    }
    if (j.contains("start"))
        scene.start = detail::parse_point(j.at("start"), scene.dimension, "start");
    if (j.contains("goal"))
        scene.goal = detail::parse_point(j.at("goal"), scene.dimension, "goal");
    return scene;
}

inline std::string save_scene(const Scene& scene) {
    Json j;
    j["version"] = 1;
    j["name"] = scene.name;
    j["dimension"] = scene.dimension;
    j["obstacles"] = Json::array();
    for (const auto& o : scene.obstacles) j["obstacles"].push_back(detail::obstacle_to_json(o));
    if (scene.start) j["start"] = *scene.start;
    if (scene.goal) j["goal"] = *scene.goal;
    return j.dump(2) + "\n";
}

inline Scene load_scene_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open scene file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_scene(ss.str());
}

inline Polyline load_polyline(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("polyline parse error: ") + e.what());
    }
    if (!j.contains("version") || j.at("version").get<int>() != 1)
        throw std::invalid_argument("polyline: unsupported or missing version (expected 1)");
    Polyline p;
    for (const auto& w : j.at("waypoints")) {
        Configuration q;
        for (const auto& v : w) q.push_back(v.get<double>());
        p.waypoints.push_back(std::move(q));
    }
    return p;
}

inline std::string save_polyline(const Polyline& p) {
    Json j;
    j["version"] = 1;
    j["waypoints"] = Json::array();
    for (const auto& w : p.waypoints) j["waypoints"].push_back(w);
    return j.dump(2) + "\n";
}

inline Polyline load_polyline_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open polyline file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return load_polyline(ss.str());
}

// Batch-result CSV. The header line is fixed; k_solve is -1 for runs that
// did not solve within the row's budget.
struct BenchRow {
    std::string scene;
    std::uint64_t seed = 0;
    int budget = 0;
    bool solved = false;
    int k_solve = -1;
    std::uint64_t splits = 0;
    std::uint64_t samples = 0;
    std::uint64_t probes = 0;
    double wall_ms = 0.0;
};

inline std::string bench_csv_header() {
    return "# pcd-bench-csv v1\nscene,seed,budget,solved,k_solve,splits,samples,probes,wall_ms\n";
}

inline std::string bench_csv_row(const BenchRow& r) {
    char wall[32];
    std::snprintf(wall, sizeof(wall), "%.3f", r.wall_ms);
    return r.scene + ',' + std::to_string(r.seed) + ',' + std::to_string(r.budget) + ',' +
           (r.solved ? "1" : "0") + ',' + std::to_string(r.solved ? r.k_solve : -1) + ',' +
           std::to_string(r.splits) + ',' + std::to_string(r.samples) + ',' +
           std::to_string(r.probes) + ',' + wall + "\n";
}

}  // namespace pcd
