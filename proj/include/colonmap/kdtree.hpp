#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "colonmap/error.hpp"

namespace colonmap {

// Exact nearest-neighbor search over a fixed 3D point set. Median-split
// balanced tree, immutable after construction, safe for concurrent queries.
class KdTree3 {
  public:
    explicit KdTree3(std::vector<Eigen::Vector3d> points);

    struct Result {
        std::size_t index = 0;
        double distance = 0.0;
    };

    Result nearest(const Eigen::Vector3d &query) const;

    std::size_t size() const { return points_.size(); }
    const std::vector<Eigen::Vector3d> &points() const { return points_; }

  private:
    struct Node {
        int axis = 0;
        std::size_t point = 0;
        int left = -1;
        int right = -1;
    };

    int build(std::size_t begin, std::size_t end, int depth);
    void search(int node, const Eigen::Vector3d &query, Result &best) const;

    std::vector<Eigen::Vector3d> points_;
    std::vector<std::size_t> order_;
    std::vector<Node> nodes_;
    int root_ = -1;
};

} // namespace colonmap
