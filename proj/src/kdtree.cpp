#include "colonmap/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace colonmap {

KdTree3::KdTree3(std::vector<Eigen::Vector3d> points) : points_(std::move(points)) {
    if (points_.empty())
        throw EmptySupportError("KdTree3: empty point set");
    order_.resize(points_.size());
    for (std::size_t i = 0; i < order_.size(); ++i)
        order_[i] = i;
    nodes_.reserve(points_.size());
    root_ = build(0, points_.size(), 0);
}

int KdTree3::build(std::size_t begin, std::size_t end, int depth) {
    if (begin >= end)
        return -1;
    const int axis = depth % 3;
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::size_t a, std::size_t b) {
                         return points_[a](axis) < points_[b](axis);
                     });
    Node node;
    node.axis = axis;
    node.point = order_[mid];
    const int self = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    nodes_[self].left = build(begin, mid, depth + 1);
    nodes_[self].right = build(mid + 1, end, depth + 1);
    return self;
}

void KdTree3::search(int node_idx, const Eigen::Vector3d &query, Result &best) const {
    if (node_idx < 0)
        return;
    const Node &node = nodes_[node_idx];
    const Eigen::Vector3d &p = points_[node.point];
    const double d = (p - query).norm();
    if (d < best.distance) {
        best.distance = d;
        best.index = node.point;
    }
    const double plane_gap = query(node.axis) - p(node.axis);
    const int near = plane_gap < 0.0 ? node.left : node.right;
    const int far = plane_gap < 0.0 ? node.right : node.left;
    search(near, query, best);
    if (std::abs(plane_gap) < best.distance)
        search(far, query, best);
}

KdTree3::Result KdTree3::nearest(const Eigen::Vector3d &query) const {
    Result best;
    best.distance = std::numeric_limits<double>::infinity();
    search(root_, query, best);
    return best;
}

} // namespace colonmap
