#pragma once

#include "colonmap/camera.hpp"
#include "colonmap/pointmap.hpp"
#include "colonmap/pose.hpp"

namespace colonmap {

struct WarpedImage {
    Grid image;
    WeightMask valid; // positive-depth AND in-bounds
};

struct WarpedPointMap {
    PointMap points;
    WeightMask valid; // sampler in-bounds
};

// View synthesis of the target frame from a source image: each target pixel's
// 3D point (self point map `points_self`) is moved into the source frame by
// `target_to_source`, projected with `k`, and the source image is bilinearly
// sampled there. Invalid pixels (behind the camera or landing out of bounds)
// get value 0 and mask 0.
WarpedImage reconstruct_image(const Intrinsics &k, const PoseSE3 &target_to_source,
                              const PointMap &points_self, const Grid &source_image);

// Resamples a point map along an optical flow: out(p) = points sampled at
// p + flow(p). The output lives on flow.to_frame's pixel grid and keeps the
// input's coordinate frame, i.e. warping the self map of frame b by a flow
// a<-b estimates frame a's points expressed in frame b coordinates.
WarpedPointMap warp_pointmap_by_flow(const PointMap &points, const FlowField &flow);

} // namespace colonmap
