// Exact 3-D nearest-neighbor search over a static point set.
#pragma once

#include "axiscan/core.hpp"

#include <algorithm>
#include <numeric>
#include <span>
#include <vector>

namespace axiscan {

/// Static kd-tree. Built once, read-only afterwards; queries are exact.
/// Distance ties are resolved in favor of the lowest point index so that
/// results match a straightforward exhaustive scan.
class KdTree {
public:
    explicit KdTree(std::vector<Vec3> points) : points_(std::move(points)) {
        if (points_.empty()) throw Error("kdtree: empty reference set");
        order_.resize(points_.size());
        std::iota(order_.begin(), order_.end(), 0);
        nodes_.reserve(points_.size() / kLeafSize * 2 + 2);
        root_ = build(0, static_cast<int>(order_.size()));
    }

    std::size_t size() const { return points_.size(); }

    /// Index of the nearest reference point to q.
    int nearest(const Vec3& q) const {
        Best best;
        search(root_, q, best);
        return best.index;
    }

    int nearest(const Vec3& q, double& dist_sq_out) const {
        Best best;
        search(root_, q, best);
        dist_sq_out = best.dist_sq;
        return best.index;
    }

private:
    static constexpr int kLeafSize = 16;

    struct Node {
        double split = 0.0;
        int axis = -1;       // -1 marks a leaf
        int left = -1, right = -1;
        int begin = 0, end = 0;  // leaf range into order_
        Aabb box;
    };

    struct Best {
        double dist_sq = std::numeric_limits<double>::infinity();
        int index = -1;
    };

    int build(int begin, int end) {
        Node node;
        node.box = bounds_of(begin, end);
        const int id = static_cast<int>(nodes_.size());
        nodes_.push_back(node);

        if (end - begin <= kLeafSize) {
            nodes_[id].begin = begin;
            nodes_[id].end = end;
            return id;
        }

        const Vec3 ext = nodes_[id].box.extent();
        int axis = 0;
        if (ext[1] > ext[axis]) axis = 1;
        if (ext[2] > ext[axis]) axis = 2;

        const int mid = begin + (end - begin) / 2;
        std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                         [&](int a, int b) {
                             if (points_[a][axis] != points_[b][axis])
                                 return points_[a][axis] < points_[b][axis];
                             return a < b;
                         });

        nodes_[id].axis = axis;
        nodes_[id].split = points_[order_[mid]][axis];
        nodes_[id].left = build(begin, mid);
        nodes_[id].right = build(mid, end);
        return id;
    }

    Aabb bounds_of(int begin, int end) const {
        Aabb box{points_[order_[begin]], points_[order_[begin]]};
        for (int i = begin; i < end; ++i) {
            const Vec3& p = points_[order_[i]];
            box.min = box.min.cwiseMin(p);
            box.max = box.max.cwiseMax(p);
        }
        return box;
    }

    static double box_dist_sq(const Aabb& box, const Vec3& q) {
        double d = 0.0;
        for (int a = 0; a < 3; ++a) {
            double v = 0.0;
            if (q[a] < box.min[a]) v = box.min[a] - q[a];
            else if (q[a] > box.max[a]) v = q[a] - box.max[a];
            d += v * v;
        }
        return d;
    }

    void search(int id, const Vec3& q, Best& best) const {
        const Node& node = nodes_[id];
        // > (not >=) so equal-distance candidates are still visited and the
        // lowest-index tie rule stays exact.
        if (box_dist_sq(node.box, q) > best.dist_sq) return;

        if (node.axis < 0) {
            for (int i = node.begin; i < node.end; ++i) {
                const int idx = order_[i];
                const double d = (points_[idx] - q).squaredNorm();
                if (d < best.dist_sq || (d == best.dist_sq && idx < best.index)) {
                    best.dist_sq = d;
                    best.index = idx;
                }
            }
            return;
        }

        const bool left_first = q[node.axis] <= node.split;
        search(left_first ? node.left : node.right, q, best);
        search(left_first ? node.right : node.left, q, best);
    }

    std::vector<Vec3> points_;
    std::vector<int> order_;
    std::vector<Node> nodes_;
    int root_ = 0;
};

/// Assigns to every query point the value of its Euclidean-nearest reference
/// point (ties -> lowest reference index).
inline std::vector<double> nearest_neighbor_map(const PointCloud& query,
                                                const std::vector<Vec3>& reference,
                                                std::span<const double> values) {
    if (reference.empty()) throw Error("nearest_neighbor_map: empty reference set");
    if (values.size() != reference.size())
        throw Error("nearest_neighbor_map: value count does not match reference count");
    KdTree tree(reference);
    std::vector<double> out(query.size());
    for (std::size_t i = 0; i < query.size(); ++i)
        out[i] = values[tree.nearest(query.points[i])];
    return out;
}

}  // namespace axiscan
