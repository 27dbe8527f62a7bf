#pragma once

#include <vector>

#include "colonmap/pointmap.hpp"
#include "colonmap/pose.hpp"

namespace colonmap {

// Transforms every point: x' = R x + t. The result's coordinate-frame label
// is set to `new_coord_frame` (the frame T maps into).
PointMap apply_pose(const PoseSE3 &pose, const PointMap &points,
                    int new_coord_frame = kUnknownFrame);

// Least-squares similarity (or rigid) alignment of two corresponding point
// sets: minimizes sum_i w_i * ||target_i - (s R source_i + t)||^2 over
// s > 0, R in SO(3), t. The rotation is always proper (det R = +1); on
// reflective inputs the smallest singular direction is sign-flipped.
//
// Requires >= 3 correspondences whose cross-covariance has rank >= 2;
// collinear or coincident sets throw DegenerateError.
Sim3Transform umeyama_align(const std::vector<Eigen::Vector3d> &source,
                            const std::vector<Eigen::Vector3d> &target, bool with_scale);

// Same estimator with per-correspondence weights (normalized internally).
// Non-positive total weight or fewer than 3 usable points throw.
Sim3Transform umeyama_align_weighted(const std::vector<Eigen::Vector3d> &source,
                                     const std::vector<Eigen::Vector3d> &target,
                                     const std::vector<double> &weights, bool with_scale);

// Rigid pose relating two expressions of the same physical points:
// points_b and points_a are pixel-aligned maps of identical scene points in
// two coordinate frames. Returns T with points_a ~= T(points_b), i.e. the
// transform from points_b's frame into points_a's frame. Pixels with
// confidence below min_conf are excluded; the rest enter a
// confidence-weighted rigid Umeyama fit.
PoseSE3 recover_pose_from_pointmaps(const PointMap &points_a, const PointMap &points_b,
                                    const ConfidenceMap &confidence, double min_conf);

} // namespace colonmap
