#pragma once

#include <cstdint>
#include <map>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "colonmap/pointmap.hpp"
#include "colonmap/pose.hpp"

namespace colonmap {

// Scalar hyperparameters of the training objective. Defaults: alpha from the
// standard SSIM/L1 balance (0.85), SSIM constants 0.01^2 / 0.03^2 on [0,1]
// images with a 3x3 uniform window, all lambda weights neutral at 1.
struct LossConfig {
    double alpha = 0.85;
    double beta = 0.2;
    double lambda_conf = 1.0;
    double lambda_photo = 1.0;
    double lambda_flow = 1.0;
    double lambda_pose = 1.0;
    double ssim_c1 = 1e-4;
    double ssim_c2 = 9e-4;
    int ssim_window = 3;
    double conf_floor = 1.0;
    // Pose-consistency variant that transforms the t-1-in-t map for both
    // summands instead of the symmetric pair. Comparison only.
    bool pose_term_literal = false;

    void validate() const;
};

struct LossReport {
    double total = 0.0;
    std::map<std::string, double> terms;
    std::map<std::string, std::int64_t> valid_counts;
    std::map<std::string, Grid> per_pixel;

    nlohmann::json to_json(const LossConfig &config) const;
};

// Windowed SSIM between same-shaped grids, per pixel and channel, clipped to
// [-1, 1]. Window statistics are count-normalized means over the in-bounds
// part of each window, so constant images score identically at borders.
Grid ssim_map(const Grid &a, const Grid &b, const LossConfig &cfg);

// Same, but window statistics are weighted by a validity mask, so values
// under the mask can never leak into valid pixels' scores. Pixels whose
// whole window is masked get 0.
Grid ssim_map(const Grid &a, const Grid &b, const WeightMask &mask, const LossConfig &cfg);

// Per-pixel alpha*(1-SSIM)/2 + (1-alpha)*L1 between a calibrated target image
// and its reconstruction, reduced to a mask-weighted mean. The L1 part is the
// mean absolute difference over channels. Report: total; terms "ssim", "l1";
// per_pixel "photometric" (unmasked); valid_counts "valid".
LossReport photometric_loss(const Grid &target, const Grid &reconstruction,
                            const WeightMask &mask, const LossConfig &cfg);

// Combines the confidence-aware loss of frame t with the plain photometric
// loss of frame t-1:
//   lambda_conf * (1/N_t) sum_i [C_i * l_i - beta * log(C_i)]
// + lambda_photo * (1/N_tm1) sum_i l'_i
// over each frame's valid pixels. Inputs are per-pixel photometric maps as
// produced by photometric_loss. Terms "confidence_aware", "photometric_tm1".
LossReport confidence_weighted_loss(const Grid &photo_t, const ConfidenceMap &conf_t,
                                    const Grid &photo_tm1, const WeightMask &mask_t,
                                    const WeightMask &mask_tm1, const LossConfig &cfg);

// Four point maps of a frame pair (t-1, t), the flows/occlusion masks between
// them, and the relative poses in both directions. x_a_b is frame a's points
// in frame b coordinates; flow_a_from_b lives on a's grid and points into b.
struct GeometryLossInputs {
    PointMap x_t_t;
    PointMap x_tm1_tm1;
    PointMap x_tm1_t;
    PointMap x_t_tm1;
    FlowField flow_t_from_tm1;
    FlowField flow_tm1_from_t;
    WeightMask occ_t_from_tm1;
    WeightMask occ_tm1_from_t;
    PoseSE3 pose_t_to_tm1;
    PoseSE3 pose_tm1_to_t;
};

// Geometry consistency loss:
//   flow part  — cross-frame point maps vs. their flow-warped counterparts,
//                occlusion- and sampler-masked weighted means of the
//                per-pixel 3-vector 1-norm;
//   pose part  — self point maps vs. pose-transformed cross-frame maps,
//                plain means.
// total = lambda_flow * (flow terms) + lambda_pose * (pose terms).
// Terms "flow", "flow_tm1_grid", "flow_t_grid", "pose", "pose_tm1", "pose_t".
LossReport geometry_consistency_loss(const GeometryLossInputs &in, const LossConfig &cfg);

// --- scalar building blocks (shared with tests and gradients) ---

// sum_p w_p * ||ref_p - est_p||_1 / sum_p w_p  (vector 1-norm over channels)
double weighted_pointmap_l1(const PointMap &ref, const PointMap &est, const WeightMask &weight);

// mean_p ||ref_p - est_p||_1
double mean_pointmap_l1(const PointMap &ref, const PointMap &est);

// --- analytic (sub)gradients of the L1-based terms; the SSIM part is
// --- deliberately not differentiated here. Subgradient at zero residual is 0.

// d/d(reconstruction) of the (1-alpha)-weighted L1 part of photometric_loss.
Grid photometric_l1_gradient(const Grid &target, const Grid &reconstruction,
                             const WeightMask &mask, const LossConfig &cfg);

// d/d(ref) of weighted_pointmap_l1(ref, est, weight).
Grid flow_term_gradient(const PointMap &ref, const PointMap &est, const WeightMask &weight);

// Gradients of mean_pointmap_l1(ref, pose(src)) with x' = R x + t.
Grid pose_term_gradient_wrt_ref(const PointMap &ref, const PointMap &src, const PoseSE3 &pose);
Grid pose_term_gradient_wrt_src(const PointMap &ref, const PointMap &src, const PoseSE3 &pose);
Eigen::Vector3d pose_term_gradient_wrt_translation(const PointMap &ref, const PointMap &src,
                                                   const PoseSE3 &pose);

} // namespace colonmap
