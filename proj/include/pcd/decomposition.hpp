#pragma once

// Rectangloid cells with a sample-derived status, the binary split tree,
// the midpoint/largest-distance split rule, point location, and the
// split-count bound and cleared-region constructions used by the audits.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <vector>

#include "pcd/collision.hpp"
#include "pcd/geometry.hpp"

namespace pcd {

enum class CellStatus { PossiblyFree, PossiblyOccupied, Mixed };

// Status is derived from the samples seen so far and nothing else.
inline CellStatus classify(std::size_t free_count, std::size_t colliding_count) {
    if (free_count == 0 && colliding_count == 0)
        throw std::invalid_argument("cell without samples has no status");
    if (free_count > 0 && colliding_count > 0) return CellStatus::Mixed;
    return free_count > 0 ? CellStatus::PossiblyFree : CellStatus::PossiblyOccupied;
}

struct Sample {
    Configuration q;
    bool colliding = false;
};

// A leaf of the split tree. Samples are kept in arrival order; the last
// entry is the one that triggers the next split of a mixed cell.
struct Cell {
    int id = -1;
    Box box;
    std::vector<Sample> samples;
    std::size_t free_count = 0;
    std::size_t colliding_count = 0;

    CellStatus status() const { return classify(free_count, colliding_count); }

    void add_sample(Configuration q, bool colliding) {
        if (colliding) ++colliding_count; else ++free_count;
        samples.push_back(Sample{std::move(q), colliding});
    }

    Sample pop_sample() {
        if (samples.empty()) throw std::invalid_argument("pop_sample: cell has no samples");
        Sample s = std::move(samples.back());
        samples.pop_back();
        if (s.colliding) --colliding_count; else --free_count;
        return s;
    }

    // The single free sample of a possibly free cell (nullptr when the cell
    // holds none or more than one, e.g. the initial root).
    const Configuration* single_free_sample() const {
        if (free_count != 1) return nullptr;
        for (const auto& s : samples)
            if (!s.colliding) return &s.q;
        return nullptr;
    }
};

// q2 in S^{i+-}(q): the axis-i distance dominates every other axis and the
// sign matches. Boundary configurations belong to several sectors.
inline bool in_split_sector(const Configuration& q, const Configuration& q2,
                            std::size_t axis, bool positive) {
    const double di = axis_distance(q, q2, axis);
    for (std::size_t j = 0; j < q.size(); ++j)
        if (j != axis && axis_distance(q, q2, j) > di) return false;
    return positive ? q2[axis] >= q[axis] : q2[axis] <= q[axis];
}

struct SplitChoice {
    std::size_t axis = 0;
    double coordinate = 0.0;
    Configuration opposing;  // the nearest stored sample of the opposing type
};

// Split in the middle between the new sample and the nearest stored sample
// of opposing type, perpendicular to the axis of largest distance between
// the two. Ties pick the lowest axis index.
inline SplitChoice choose_split(const Cell& cell, const Configuration& new_sample,
                                bool new_is_colliding) {
    const Configuration* nearest = nullptr;
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : cell.samples) {
        if (s.colliding == new_is_colliding) continue;
        const double d = chebyshev_distance(s.q, new_sample);
        if (d < best) {
            best = d;
            nearest = &s.q;
        }
    }
    if (!nearest)
        throw std::invalid_argument("choose_split: no sample of opposing type");
    if (best == 0.0)
        throw std::runtime_error(
            "choose_split: free and colliding samples coincide (inconsistent oracle)");
    std::size_t axis = 0;
    double dmax = -1.0;
    for (std::size_t i = 0; i < new_sample.size(); ++i) {
        const double d = axis_distance(*nearest, new_sample, i);
        if (d > dmax) {
            dmax = d;
            axis = i;
        }
    }
    return SplitChoice{axis, 0.5 * ((*nearest)[axis] + new_sample[axis]), *nearest};
}

// A split is usable only when its plane is representable strictly inside the
// cell and actually separates the pair. Near obstacle faces cells can shrink
// to a few ulps, where the midpoint of two adjacent doubles rounds onto a
// sample or a cell face; fall back to the other axes in order of decreasing
// pair distance before giving up.
inline std::optional<SplitChoice> choose_valid_split(const Cell& cell,
                                                     const Configuration& new_sample,
                                                     bool new_is_colliding) {
    const SplitChoice primary = choose_split(cell, new_sample, new_is_colliding);
    const Configuration& other = primary.opposing;

    auto usable = [&](std::size_t axis) -> std::optional<SplitChoice> {
        const double a = other[axis];
        const double b = new_sample[axis];
        const double mid = 0.5 * (a + b);
        if (!(mid > cell.box.lower[axis] && mid < cell.box.upper[axis])) return std::nullopt;
        if (!(mid >= std::min(a, b) && mid < std::max(a, b))) return std::nullopt;
        return SplitChoice{axis, mid, other};
    };

    if (auto c = usable(primary.axis)) return c;
    std::vector<std::size_t> axes;
    for (std::size_t i = 0; i < new_sample.size(); ++i)
        if (i != primary.axis) axes.push_back(i);
    std::stable_sort(axes.begin(), axes.end(), [&](std::size_t x, std::size_t y) {
        return axis_distance(other, new_sample, x) > axis_distance(other, new_sample, y);
    });
    for (std::size_t axis : axes)
        if (auto c = usable(axis)) return c;
    return std::nullopt;
}

// Bound on how many times the lineage of a free sample can be split within
// one channel-checking phase: sum over axes and sides of
// max(0, ceil(log2(D / eps))) where D is the distance from the sample to
// the cell face and eps a radius of a free ball around the sample. Each
// split toward the sample at least halves that side, and no split can come
// closer than the free ball.
inline int max_splits_bound(const Box& box, const Configuration& q_f, double eps) {
    if (!(eps > 0.0))
        throw std::invalid_argument("max_splits_bound requires eps > 0");
    if (!box.contains(q_f))
        throw std::invalid_argument("max_splits_bound: sample outside box");
    auto side = [&](double dist) -> int {
        if (dist <= eps) return 0;
        const double x = (std::log(dist) - std::log(eps)) / std::log(2.0);
        return std::max(0, static_cast<int>(std::ceil(x - 1e-12)));
    };
    int m = 0;
    for (std::size_t i = 0; i < box.dim(); ++i) {
        m += side(box.upper[i] - q_f[i]);
        m += side(q_f[i] - box.lower[i]);
    }
    return m;
}

// Binary tree of splits. Node ids are creation-ordered; leaves carry the
// samples. Points exactly on a split plane belong to the lower child, both
// for locate and for sample routing.
class SplitTree {
  public:
    explicit SplitTree(std::size_t dimension) : dim_(dimension) {
        Node root;
        root.cell.id = 0;
        root.cell.box = Box::unit(dimension);
        nodes_.push_back(std::move(root));
        leaves_.insert(0);
    }

    std::size_t dim() const { return dim_; }

    const Cell& cell(int id) const { return nodes_.at(static_cast<std::size_t>(id)).cell; }
    Cell& cell(int id) { return nodes_.at(static_cast<std::size_t>(id)).cell; }

    bool is_leaf(int id) const { return nodes_.at(static_cast<std::size_t>(id)).lo < 0; }

    const std::set<int>& leaves() const { return leaves_; }

    std::vector<int> leaves_with_status(CellStatus st) const {
        std::vector<int> out;
        for (int id : leaves_)
            if (cell(id).status() == st) out.push_back(id);
        return out;
    }

    std::vector<int> mixed_leaves() const { return leaves_with_status(CellStatus::Mixed); }

    void add_sample(int id, Configuration q, bool colliding) {
        if (!is_leaf(id))
            throw std::invalid_argument("add_sample: not a leaf");
        if (!cell(id).box.contains(q))
            throw std::invalid_argument("add_sample: sample outside cell box");
        cell(id).add_sample(std::move(q), colliding);
    }

    // Descend comparing q[axis] <= coordinate; returns the leaf id whose
    // closed box contains q.
    int locate(const Configuration& q) const {
        int id = 0;
        while (!is_leaf(id)) {
            const Node& nd = nodes_[static_cast<std::size_t>(id)];
            id = (q[nd.axis] <= nd.coord) ? nd.lo : nd.hi;
        }
        return id;
    }

    struct SplitResult {
        int lo = -1;
        int hi = -1;
    };

    // Turn a leaf into an internal node; the two children tile its box and
    // inherit its samples by containment (split plane -> lower child).
    SplitResult apply_split(int id, std::size_t axis, double coordinate) {
        if (!is_leaf(id))
            throw std::invalid_argument("apply_split: not a leaf");
        Node& parent = nodes_[static_cast<std::size_t>(id)];
        const Box& pb = parent.cell.box;
        if (!(coordinate > pb.lower[axis] && coordinate < pb.upper[axis]))
            throw std::invalid_argument("apply_split: coordinate not strictly inside cell");

        Box lo_box = pb, hi_box = pb;
        lo_box.upper[axis] = coordinate;
        hi_box.lower[axis] = coordinate;

        Node lo_node, hi_node;
        lo_node.cell.box = std::move(lo_box);
        hi_node.cell.box = std::move(hi_box);
        lo_node.parent = hi_node.parent = id;

        for (auto& s : parent.cell.samples) {
            Cell& dst = (s.q[axis] <= coordinate) ? lo_node.cell : hi_node.cell;
            dst.add_sample(std::move(s.q), s.colliding);
        }
        parent.cell.samples.clear();
        parent.cell.free_count = parent.cell.colliding_count = 0;

        const int lo_id = static_cast<int>(nodes_.size());
        const int hi_id = lo_id + 1;
        lo_node.cell.id = lo_id;
        hi_node.cell.id = hi_id;
        parent.axis = static_cast<int>(axis);
        parent.coord = coordinate;
        parent.lo = lo_id;
        parent.hi = hi_id;
        nodes_.push_back(std::move(lo_node));
        nodes_.push_back(std::move(hi_node));
        leaves_.erase(id);
        leaves_.insert(lo_id);
        leaves_.insert(hi_id);
        return SplitResult{lo_id, hi_id};
    }

    // Resolve every mixed leaf, smallest id first, splitting on its most
    // recently added sample. Children that are still mixed re-enter the
    // queue. A mixed cell that admits no representable split plane is a
    // few-ulp sliver; its last sample is dropped instead (reported through
    // on_drop so traces stay replayable). Returns the ids of all cells
    // created.
    std::vector<int> split_mixed_cells(
        const std::function<void(int parent, const SplitChoice&, const Configuration& trigger,
                                 const SplitResult&)>& on_split = nullptr,
        const std::function<void(int cell_id)>& on_drop = nullptr) {
        std::vector<int> created;
        std::set<int> queue;
        for (int id : mixed_leaves()) queue.insert(id);
        while (!queue.empty()) {
            const int id = *queue.begin();
            queue.erase(queue.begin());
            const Cell& c = cell(id);
            const Sample trigger = c.samples.back();
            const auto valid = choose_valid_split(c, trigger.q, trigger.colliding);
            if (!valid) {
                cell(id).pop_sample();
                if (on_drop) on_drop(id);
                if (cell(id).status() == CellStatus::Mixed) queue.insert(id);
                continue;
            }
            const SplitChoice& choice = *valid;
            const SplitResult r = apply_split(id, choice.axis, choice.coordinate);
            if (on_split) on_split(id, choice, trigger.q, r);
            created.push_back(r.lo);
            created.push_back(r.hi);
            if (cell(r.lo).status() == CellStatus::Mixed) queue.insert(r.lo);
            if (cell(r.hi).status() == CellStatus::Mixed) queue.insert(r.hi);
        }
        return created;
    }

    double leaf_measure_sum() const {
        double s = 0.0;
        for (int id : leaves_) s += box_measure(cell(id).box);
        return s;
    }

  private:
    struct Node {
        Cell cell;
        int parent = -1;
        int axis = -1;  // <0 for leaves
        double coord = 0.0;
        int lo = -1;
        int hi = -1;
    };

    std::size_t dim_;
    std::vector<Node> nodes_;
    std::set<int> leaves_;
};

// The box around q_f that no future split of its lineage can cut: on each
// side the extent is half the distance to the nearest colliding
// configuration in that one-sided sector, or the cell face if the sector
// is free of obstacles. Exact for box scenes; conservatively shrunk by the
// probing step otherwise.
inline Box cleared_region(const Box& cell_box, const Configuration& q_f, const Scene& scene,
                          double clearance_step = kDefaultClearanceStep) {
    if (is_colliding(scene, q_f))
        throw std::invalid_argument("cleared_region: sample is colliding");
    const std::size_t n = cell_box.dim();
    // per-axis region bounds; cell faces are kept exactly when unlimited
    Configuration lo = cell_box.lower;
    Configuration hi = cell_box.upper;
    auto limit_side = [&](std::size_t axis, int side, double t) {
        if (side == 1)
            hi[axis] = std::min(hi[axis], q_f[axis] + t);
        else
            lo[axis] = std::max(lo[axis], q_f[axis] - t);
    };

    if (scene.boxes_only()) {
        std::vector<const Box*> boxes;
        for (const auto& o : scene.obstacles) detail::collect_boxes(o, boxes);
        for (const Box* ob : boxes) {
            // clip the obstacle to the cell; only colliders inside the cell
            // can ever trigger a split of this lineage
            Box clipped;
            clipped.lower.resize(n);
            clipped.upper.resize(n);
            bool empty = false;
            for (std::size_t i = 0; i < n; ++i) {
                clipped.lower[i] = std::max(ob->lower[i], cell_box.lower[i]);
                clipped.upper[i] = std::min(ob->upper[i], cell_box.upper[i]);
                if (clipped.lower[i] > clipped.upper[i]) { empty = true; break; }
            }
            if (empty) continue;
            for (std::size_t i = 0; i < n; ++i) {
                for (int side = 0; side < 2; ++side) {
                    // smallest t with a point of the clipped box in the
                    // one-sided sector at axis-i distance t from q_f
                    const double lo_i = side == 1 ? clipped.lower[i] - q_f[i]
                                                  : q_f[i] - clipped.upper[i];
                    const double hi_i = side == 1 ? clipped.upper[i] - q_f[i]
                                                  : q_f[i] - clipped.lower[i];
                    if (hi_i < 0.0) continue;  // box entirely on the other side
                    double t = std::max(0.0, lo_i);
                    for (std::size_t j = 0; j < n; ++j) {
                        if (j == i) continue;
                        const double gap = std::max({0.0, clipped.lower[j] - q_f[j],
                                                     q_f[j] - clipped.upper[j]});
                        t = std::max(t, gap);
                    }
                    // shrink by a few ulps: split planes are rounded
                    // midpoints and must never appear inside the region
                    if (t <= hi_i) limit_side(i, side, 0.5 * t * (1.0 - 4e-16));
                }
            }
        }
    } else {
        // probe the cell grid once and bin colliding probes per sector
        const auto steps = [&](std::size_t i) {
            return static_cast<long>(std::ceil(cell_box.width(i) / clearance_step));
        };
        std::vector<long> counts(n);
        long total = 1;
        for (std::size_t i = 0; i < n; ++i) {
            counts[i] = std::max(1L, steps(i));
            total *= counts[i] + 1;
        }
        std::vector<long> idx(n, 0);
        Configuration p(n);
        for (long it = 0; it < total; ++it) {
            for (std::size_t i = 0; i < n; ++i)
                p[i] = cell_box.lower[i] +
                       cell_box.width(i) * static_cast<double>(idx[i]) /
                           static_cast<double>(counts[i]);
            if (is_colliding(scene, p)) {
                double dmax = 0.0;
                for (std::size_t i = 0; i < n; ++i)
                    dmax = std::max(dmax, std::abs(p[i] - q_f[i]));
                for (std::size_t i = 0; i < n; ++i) {
                    if (std::abs(p[i] - q_f[i]) == dmax) {
                        const int side = p[i] >= q_f[i] ? 1 : 0;
                        limit_side(i, side, 0.5 * std::max(0.0, dmax - clearance_step));
                    }
                }
            }
            std::size_t i = 0;
            for (; i < n; ++i) {
                if (idx[i] < counts[i]) { ++idx[i]; break; }
                idx[i] = 0;
            }
            if (i == n) break;
        }
    }

    return Box(std::move(lo), std::move(hi));
}

}  // namespace pcd
