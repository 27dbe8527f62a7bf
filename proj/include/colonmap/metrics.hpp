#pragma once

#include <optional>
#include <utility>

#include "colonmap/pointmap.hpp"
#include "colonmap/pose.hpp"

namespace colonmap {

struct DepthEvalResult {
    double abs_rel = 0.0;
    double sq_rel = 0.0;
    double rmse = 0.0;
    double rmse_log = 0.0;
    double delta = 0.0;      // fraction with max(d/d*, d*/d) < 1.25
    double scale_used = 1.0; // median-scaling factor applied to pred
};

struct PointMapEvalResult {
    double accuracy = 0.0;     // mean NN distance, predicted -> ground truth
    double completeness = 0.0; // mean NN distance, ground truth -> predicted
    double sq_rel = 0.0;       // mean ||pred - gt||^2 / ||gt|| over corresponding pixels
    double rmse_log = 0.0;     // sqrt(mean (log||pred|| - log||gt||)^2)
    double scale_used = 1.0;
};

// median(gt)/median(pred) over mask-valid pixels. Even-length medians take
// the lower of the two middle elements.
double median_scale(const Grid &pred, const Grid &gt, const WeightMask &mask);

// Standard monocular-depth error suite over valid pixels. When requested,
// pred is first multiplied by median_scale and/or clamped to [clamp.first,
// clamp.second]. gt must be positive on the mask.
DepthEvalResult depth_metrics(const Grid &pred, const Grid &gt, const WeightMask &mask,
                              bool apply_median_scaling,
                              std::optional<std::pair<double, double>> clamp = std::nullopt);

enum class Alignment { kNone, kSE3, kSim3 };

// RMSE of translation residuals after aligning pred onto gt with the
// requested transform family. Trajectories must have matching timestamps.
double ate(const Trajectory &pred, const Trajectory &gt, Alignment alignment);

struct RpeResult {
    double rpe_trans = 0.0;
    double rpe_rot_deg = 0.0;
};

// Relative pose error over all index pairs (i, i+delta):
// E_i = (gt_i^-1 gt_{i+d})^-1 (pred_i^-1 pred_{i+d}); RMSE of ||trans(E_i)||
// and of the rotation angle in degrees.
RpeResult rpe(const Trajectory &pred, const Trajectory &gt, int delta = 1);

// Mean ATE over every consecutive window of snippet_len poses, each window
// anchored at its first pose and aligned with a single least-squares scale
// on the translations.
double snippet_ate(const Trajectory &pred, const Trajectory &gt, int snippet_len = 5);

// Point-map error suite on pixel-aligned maps. pred is median-scaled on the
// z channel over valid pixels; with align_sim3 an additional Sim(3) Umeyama
// alignment onto gt is applied. accuracy/completeness use exact
// nearest-neighbor search between the valid point sets; sq_rel and rmse_log
// are per-pixel correspondence errors as documented on PointMapEvalResult.
PointMapEvalResult pointmap_metrics(const PointMap &pred, const PointMap &gt,
                                    const WeightMask &mask, bool align_sim3);

} // namespace colonmap
