#pragma once

// Append-only event log of a planner run. One event per line, fields in
// fixed order, so external tools can audit runs and replaying a trace
// against the same scene rebuilds the final tree bit-exactly.
//
//   pcdtrace 1
//   scene name=<token> dim=<n>
//   config start=<x,y> goal=<x,y> seed=<u64> kmax=<int> delta=<g> store_checkpath=<0|1>
//   iter k=<k> ka=<ka> phase=<a|b>
//   sample cell=<id> q=<x,y> colliding=<0|1> src=<b|chk>
//   path cells=<id:id:..> verdict=<free|collision> [cell=<id> q=<x,y>]
//   split cell=<id> axis=<i> coord=<g> trigger=<x,y> lo=<id> hi=<id>
//   drop cell=<id>
//   result status=<solved|exhausted> k=<k> splits=<u> samples=<u> probes=<u>
//
// A drop line marks a mixed cell that had shrunk to a few ulps and could
// not be split by any representable plane; its most recent sample was
// discarded.

#include <cstdint>
#include <cstdio>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcd/decomposition.hpp"
#include "pcd/geometry.hpp"

namespace pcd {

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string format_config(const Configuration& q) {
    std::string s;
    for (std::size_t i = 0; i < q.size(); ++i) {
        if (i) s += ',';
        s += format_double(q[i]);
    }
    return s;
}

inline Configuration parse_config(const std::string& s) {
    Configuration q;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) q.push_back(std::stod(item));
    return q;
}

// trace fields are space-delimited
inline std::string sanitize_name(std::string name) {
    for (char& c : name)
        if (c == ' ' || c == '\t' || c == '\n') c = '_';
    return name;
}

}  // namespace detail

struct TraceEvent {
    enum class Kind { Iteration, Sample, PathChecked, Split, Drop, Result };

    Kind kind = Kind::Iteration;

    // Iteration
    int k = 0;
    int ka = 0;
    char phase = 'a';

    // Sample
    int cell = -1;
    Configuration q;
    bool colliding = false;
    char source = 'b';  // 'b' sampling step, 'c' path checking

    // PathChecked
    std::vector<int> cells;
    bool path_free = false;

    // Split
    std::size_t axis = 0;
    double coord = 0.0;
    Configuration trigger;
    int lo = -1;
    int hi = -1;

    // Result
    bool solved = false;
    std::uint64_t splits = 0;
    std::uint64_t samples = 0;
    std::uint64_t probes = 0;
};

struct PlanTrace {
    static constexpr int kVersion = 1;

    std::string scene_name;
    std::size_t dimension = 0;
    Configuration start;
    Configuration goal;
    std::uint64_t seed = 0;
    int k_max = 0;
    double delta = 0.0;
    bool store_checkpath_samples = false;

    std::vector<TraceEvent> events;

    std::string serialize() const;
    static PlanTrace parse(const std::string& text);
};

inline std::string PlanTrace::serialize() const {
    using detail::format_config;
    using detail::format_double;
    std::string out;
    out += "pcdtrace 1\n";
    out += "scene name=" + detail::sanitize_name(scene_name) +
           " dim=" + std::to_string(dimension) + "\n";
    out += "config start=" + format_config(start) + " goal=" + format_config(goal) +
           " seed=" + std::to_string(seed) + " kmax=" + std::to_string(k_max) +
           " delta=" + format_double(delta) +
           " store_checkpath=" + (store_checkpath_samples ? "1" : "0") + "\n";
    for (const auto& e : events) {
        switch (e.kind) {
            case TraceEvent::Kind::Iteration:
                out += "iter k=" + std::to_string(e.k) + " ka=" + std::to_string(e.ka) +
                       " phase=" + std::string(1, e.phase) + "\n";
                break;
            case TraceEvent::Kind::Sample:
                out += "sample cell=" + std::to_string(e.cell) + " q=" + format_config(e.q) +
                       " colliding=" + (e.colliding ? "1" : "0") +
                       " src=" + (e.source == 'b' ? "b" : "chk") + "\n";
                break;
            case TraceEvent::Kind::PathChecked: {
                out += "path cells=";
                for (std::size_t i = 0; i < e.cells.size(); ++i) {
                    if (i) out += ':';
                    out += std::to_string(e.cells[i]);
                }
                out += " verdict=";
                if (e.path_free) {
                    out += "free\n";
                } else {
                    out += "collision cell=" + std::to_string(e.cell) +
                           " q=" + format_config(e.q) + "\n";
                }
                break;
            }
            case TraceEvent::Kind::Split:
                out += "split cell=" + std::to_string(e.cell) +
                       " axis=" + std::to_string(e.axis) + " coord=" + format_double(e.coord) +
                       " trigger=" + format_config(e.trigger) + " lo=" + std::to_string(e.lo) +
                       " hi=" + std::to_string(e.hi) + "\n";
                break;
            case TraceEvent::Kind::Drop:
                out += "drop cell=" + std::to_string(e.cell) + "\n";
                break;
            case TraceEvent::Kind::Result:
                out += "result status=" + std::string(e.solved ? "solved" : "exhausted") +
                       " k=" + std::to_string(e.k) + " splits=" + std::to_string(e.splits) +
                       " samples=" + std::to_string(e.samples) +
                       " probes=" + std::to_string(e.probes) + "\n";
                break;
        }
    }
    return out;
}

namespace detail {

inline std::string field(const std::string& line, const std::string& key) {
    const std::string needle = key + "=";
    auto pos = line.find(needle);
    if (pos == std::string::npos)
        throw std::invalid_argument("trace line missing field '" + key + "': " + line);
    pos += needle.size();
    const auto end = line.find(' ', pos);
    return line.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
}

inline bool has_field(const std::string& line, const std::string& key) {
    return line.find(key + "=") != std::string::npos;
}

}  // namespace detail

inline PlanTrace PlanTrace::parse(const std::string& text) {
    using detail::field;
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "pcdtrace 1")
        throw std::invalid_argument("not a pcdtrace v1 document");
    PlanTrace t;
    if (!std::getline(in, line)) throw std::invalid_argument("truncated trace header");
    t.scene_name = field(line, "name");
    t.dimension = std::stoul(field(line, "dim"));
    if (!std::getline(in, line)) throw std::invalid_argument("truncated trace header");
    t.start = detail::parse_config(field(line, "start"));
    t.goal = detail::parse_config(field(line, "goal"));
    t.seed = std::stoull(field(line, "seed"));
    t.k_max = std::stoi(field(line, "kmax"));
    t.delta = std::stod(field(line, "delta"));
    t.store_checkpath_samples = field(line, "store_checkpath") == "1";

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        TraceEvent e;
        const auto sp = line.find(' ');
        const std::string kind = line.substr(0, sp);
        if (kind == "iter") {
            e.kind = TraceEvent::Kind::Iteration;
            e.k = std::stoi(field(line, "k"));
            e.ka = std::stoi(field(line, "ka"));
            e.phase = field(line, "phase")[0];
        } else if (kind == "sample") {
            e.kind = TraceEvent::Kind::Sample;
            e.cell = std::stoi(field(line, "cell"));
            e.q = detail::parse_config(field(line, "q"));
            e.colliding = field(line, "colliding") == "1";
            e.source = field(line, "src") == "b" ? 'b' : 'c';
        } else if (kind == "path") {
            e.kind = TraceEvent::Kind::PathChecked;
            std::stringstream cs(field(line, "cells"));
            std::string item;
            while (std::getline(cs, item, ':')) e.cells.push_back(std::stoi(item));
            e.path_free = field(line, "verdict") == "free";
            if (!e.path_free) {
                e.cell = std::stoi(field(line, "cell"));
                e.q = detail::parse_config(field(line, "q"));
            }
        } else if (kind == "split") {
            e.kind = TraceEvent::Kind::Split;
            e.cell = std::stoi(field(line, "cell"));
            e.axis = std::stoul(field(line, "axis"));
            e.coord = std::stod(field(line, "coord"));
            e.trigger = detail::parse_config(field(line, "trigger"));
            e.lo = std::stoi(field(line, "lo"));
            e.hi = std::stoi(field(line, "hi"));
        } else if (kind == "drop") {
            e.kind = TraceEvent::Kind::Drop;
            e.cell = std::stoi(field(line, "cell"));
        } else if (kind == "result") {
            e.kind = TraceEvent::Kind::Result;
            e.solved = field(line, "status") == "solved";
            e.k = std::stoi(field(line, "k"));
            e.splits = std::stoull(field(line, "splits"));
            e.samples = std::stoull(field(line, "samples"));
            e.probes = std::stoull(field(line, "probes"));
        } else {
            throw std::invalid_argument("unknown trace event kind: " + kind);
        }
        t.events.push_back(std::move(e));
    }
    return t;
}

// Seed a fresh tree the way the planner does before its first iteration.
inline SplitTree replay_init(const PlanTrace& trace) {
    SplitTree tree(trace.dimension);
    tree.add_sample(0, trace.start, false);
    if (chebyshev_distance(trace.start, trace.goal) > 0.0)
        tree.add_sample(0, trace.goal, false);
    return tree;
}

// Apply one event's tree mutation. Iteration and result events do not
// mutate; split events are checked against the recorded child ids.
inline void replay_apply(SplitTree& tree, const TraceEvent& e) {
    switch (e.kind) {
        case TraceEvent::Kind::Sample:
            tree.add_sample(e.cell, e.q, e.colliding);
            break;
        case TraceEvent::Kind::PathChecked:
            if (!e.path_free) tree.add_sample(e.cell, e.q, true);
            break;
        case TraceEvent::Kind::Split: {
            const auto r = tree.apply_split(e.cell, e.axis, e.coord);
            if (r.lo != e.lo || r.hi != e.hi)
                throw std::runtime_error("trace replay: child ids diverge from record");
            break;
        }
        case TraceEvent::Kind::Drop:
            tree.cell(e.cell).pop_sample();
            break;
        default:
            break;
    }
}

// Rebuild the final tree of a completed run.
inline SplitTree replay_tree(const PlanTrace& trace) {
    SplitTree tree = replay_init(trace);
    for (const auto& e : trace.events) replay_apply(tree, e);
    return tree;
}

}  // namespace pcd
