#pragma once

// Connectivity graph over possibly free cells. Geometric face adjacency is
// maintained incrementally for every leaf under splits; the graph the
// search sees is its restriction to possibly free leaves.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "pcd/decomposition.hpp"
#include "pcd/geometry.hpp"

namespace pcd {

// Channel of cell ids from the start cell to the goal cell.
using CellPath = std::vector<int>;

class ConnectivityGraph {
  public:
    explicit ConnectivityGraph(const SplitTree& tree) {
        adjacency_[0] = {};
        (void)tree;
    }

    const std::vector<int>& neighbors(int id) const {
        static const std::vector<int> empty;
        auto it = adjacency_.find(id);
        return it == adjacency_.end() ? empty : it->second;
    }

    bool has_leaf(int id) const { return adjacency_.count(id) != 0; }

    // Replace the parent leaf by its two children. Candidate neighbors of a
    // child are its sibling and the parent's former neighbors, kept when a
    // shared face exists. Removing the parent drops all incident edges.
    void update_on_split(const SplitTree& tree, int parent_id, int lo_id, int hi_id) {
        auto it = adjacency_.find(parent_id);
        if (it == adjacency_.end())
            throw std::invalid_argument("update_on_split: unknown parent leaf");
        const std::vector<int> former = std::move(it->second);
        adjacency_.erase(it);
        for (int nb : former) {
            auto& list = adjacency_.at(nb);
            list.erase(std::remove(list.begin(), list.end(), parent_id), list.end());
        }

        const Box& lo_box = tree.cell(lo_id).box;
        const Box& hi_box = tree.cell(hi_id).box;
        std::vector<int>& lo_adj = adjacency_[lo_id];
        std::vector<int>& hi_adj = adjacency_[hi_id];
        for (int nb : former) {
            const Box& nb_box = tree.cell(nb).box;
            auto& nb_adj = adjacency_.at(nb);
            if (shared_face(lo_box, nb_box)) {
                lo_adj.push_back(nb);
                nb_adj.insert(std::upper_bound(nb_adj.begin(), nb_adj.end(), lo_id), lo_id);
            }
            if (shared_face(hi_box, nb_box)) {
                hi_adj.push_back(nb);
                nb_adj.insert(std::upper_bound(nb_adj.begin(), nb_adj.end(), hi_id), hi_id);
            }
        }
        // children always tile the parent, so they share the split plane
        lo_adj.push_back(hi_id);
        hi_adj.push_back(lo_id);
        std::sort(lo_adj.begin(), lo_adj.end());
        std::sort(hi_adj.begin(), hi_adj.end());
    }

    // Node and edge sets of the possibly free restriction, for tests.
    std::vector<int> nodes(const SplitTree& tree) const {
        std::vector<int> out;
        for (const auto& [id, adj] : adjacency_)
            if (tree.cell(id).status() == CellStatus::PossiblyFree) out.push_back(id);
        return out;
    }

    std::vector<std::pair<int, int>> edges(const SplitTree& tree) const {
        std::vector<std::pair<int, int>> out;
        for (const auto& [id, adj] : adjacency_) {
            if (tree.cell(id).status() != CellStatus::PossiblyFree) continue;
            for (int nb : adj)
                if (nb > id && tree.cell(nb).status() == CellStatus::PossiblyFree)
                    out.emplace_back(id, nb);
        }
        return out;
    }

  private:
    std::map<int, std::vector<int>> adjacency_;  // every leaf, any status
};

namespace detail {

// Admissible heuristic: any path through a cell passes within half of the
// cell's diameter of its center.
inline double cell_heuristic(const Box& box, const Configuration& goal) {
    return std::max(0.0, euclidean_distance(box.center(), goal) - 0.5 * box.diameter());
}

}  // namespace detail

// A* over the possibly free cells; edge cost is the distance between box
// centers. Lower ids are expanded first on ties. Returns no value when the
// labels sit in different components.
inline std::optional<CellPath> find_cell_path(const SplitTree& tree,
                                              const ConnectivityGraph& graph,
                                              int start_cell, int goal_cell,
                                              const Configuration& q_goal) {
    if (!graph.has_leaf(start_cell) || !graph.has_leaf(goal_cell)) return std::nullopt;
    if (tree.cell(start_cell).status() != CellStatus::PossiblyFree ||
        tree.cell(goal_cell).status() != CellStatus::PossiblyFree)
        return std::nullopt;
    if (start_cell == goal_cell) return CellPath{start_cell};

    struct Entry {
        double f;
        int id;
        bool operator>(const Entry& o) const { return f != o.f ? f > o.f : id > o.id; }
    };
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> open;
    std::map<int, double> g;
    std::map<int, int> parent;
    std::map<int, bool> closed;

    g[start_cell] = 0.0;
    open.push({detail::cell_heuristic(tree.cell(start_cell).box, q_goal), start_cell});
    while (!open.empty()) {
        const Entry cur = open.top();
        open.pop();
        if (closed[cur.id]) continue;
        closed[cur.id] = true;
        if (cur.id == goal_cell) {
            CellPath path;
            for (int id = goal_cell;; id = parent.at(id)) {
                path.push_back(id);
                if (id == start_cell) break;
            }
            std::reverse(path.begin(), path.end());
            return path;
        }
        const Configuration c = tree.cell(cur.id).box.center();
        for (int nb : graph.neighbors(cur.id)) {
            if (tree.cell(nb).status() != CellStatus::PossiblyFree) continue;
            if (closed[nb]) continue;
            const double cand = g[cur.id] + euclidean_distance(c, tree.cell(nb).box.center());
            auto it = g.find(nb);
            if (it == g.end() || cand < it->second) {
                g[nb] = cand;
                parent[nb] = cur.id;
                open.push({cand + detail::cell_heuristic(tree.cell(nb).box, q_goal), nb});
            }
        }
    }
    return std::nullopt;
}

}  // namespace pcd
