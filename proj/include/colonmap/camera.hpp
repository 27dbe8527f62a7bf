#pragma once

#include <vector>

#include "colonmap/pointmap.hpp"

namespace colonmap {

// Depth below which a point counts as behind/on the camera plane and is
// masked out of projections.
inline constexpr double kMinProjectionDepth = 1e-6;

// Pinhole model with square pixels and a single focal length, in pixels.
struct Intrinsics {
    double focal = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;

    Intrinsics() = default;

    Intrinsics(double f, double cx_, double cy_, int w, int h)
        : focal(f), cx(cx_), cy(cy_), width(w), height(h) {
        if (!(f > 0.0))
            throw DegenerateError("Intrinsics: focal must be positive");
        if (w <= 0 || h <= 0)
            throw ShapeError("Intrinsics: image dims must be positive");
    }

    // Principal point at the grid center, matching the centered-principal-
    // point assumption: cx = (W-1)/2, cy = (H-1)/2 with pixel centers at
    // integer coordinates.
    static Intrinsics centered(double focal, int width, int height) {
        return Intrinsics(focal, (width - 1) / 2.0, (height - 1) / 2.0, width, height);
    }
};

struct ProjectionResult {
    Grid pixels;     // 2 channels: (x, y) image position
    WeightMask valid; // 1 where depth > kMinProjectionDepth
};

// Pinhole projection of every point: u = f*x/z + cx, v = f*y/z + cy.
// Non-positive depth is masked, not an error.
ProjectionResult project(const Intrinsics &k, const PointMap &points);

// Back-projection of a 1-channel depth grid into a self point map:
// X(u, v) = depth(u, v) * ((u-cx)/f, (v-cy)/f, 1).
PointMap unproject(const Intrinsics &k, const Grid &depth, int frame = kUnknownFrame);

struct FocalEstimate {
    double focal = 0.0;           // robust (L1) estimate
    int iterations = 0;           // reweighting iterations performed
    double focal_least_squares = 0.0; // closed-form L2 initializer, for diagnostics
    std::vector<double> objective_history; // L1 objective after init and each iteration
};

// Focal length from a single self point map, assuming square pixels and a
// centered principal point. Minimizes sum_i w_i ||u_i - f q_i|| over f by
// iteratively reweighted least squares (Weiszfeld), where u_i is the pixel
// position relative to the image center and q_i = (x/z, y/z) the normalized
// direction from the point map. Starts from the closed-form least-squares
// solution f0 = sum<u,q> / sum||q||^2 and stops when the update falls below
// tol relative or max_iters is reached.
//
// confidence may be null (unweighted). Throws DegenerateError when no pixel
// offers a usable direction or the estimate is non-positive.
FocalEstimate estimate_focal_weiszfeld(const PointMap &points,
                                       const ConfidenceMap *confidence = nullptr,
                                       int max_iters = 50, double tol = 1e-9);

} // namespace colonmap
