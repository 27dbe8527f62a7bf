#include "colonmap/losses.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "colonmap/geometry.hpp"
#include "colonmap/warp.hpp"

namespace colonmap {

namespace {

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

void require_same_shape(const Grid &a, const Grid &b, const char *what) {
    if (!a.same_shape(b))
        throw ShapeError(std::string(what) + ": grid shapes differ");
}

void require_same_spatial(const Grid &a, const Grid &b, const char *what) {
    if (a.height() != b.height() || a.width() != b.width())
        throw ShapeError(std::string(what) + ": spatial dims differ");
}

} // namespace

void LossConfig::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw Error("LossConfig: alpha must be in (0, 1)");
    if (!(beta >= 0.0))
        throw Error("LossConfig: beta must be non-negative");
    if (lambda_conf < 0.0 || lambda_photo < 0.0 || lambda_flow < 0.0 || lambda_pose < 0.0)
        throw Error("LossConfig: lambda weights must be non-negative");
    if (!(ssim_c1 > 0.0) || !(ssim_c2 > 0.0))
        throw Error("LossConfig: SSIM constants must be positive");
    if (ssim_window <= 0 || ssim_window % 2 == 0)
        throw Error("LossConfig: ssim_window must be a positive odd integer");
    if (!(conf_floor > 0.0))
        throw Error("LossConfig: conf_floor must be positive");
}

nlohmann::json LossReport::to_json(const LossConfig &cfg) const {
    nlohmann::json j;
    j["total"] = total;
    j["terms"] = terms;
    j["valid_counts"] = valid_counts;
    j["config"] = {{"alpha", cfg.alpha},
                   {"beta", cfg.beta},
                   {"lambda_conf", cfg.lambda_conf},
                   {"lambda_photo", cfg.lambda_photo},
                   {"lambda_flow", cfg.lambda_flow},
                   {"lambda_pose", cfg.lambda_pose},
                   {"ssim_c1", cfg.ssim_c1},
                   {"ssim_c2", cfg.ssim_c2},
                   {"ssim_window", cfg.ssim_window},
                   {"conf_floor", cfg.conf_floor},
                   {"pose_term_literal", cfg.pose_term_literal}};
    return j;
}

namespace {

Grid ssim_map_impl(const Grid &a, const Grid &b, const WeightMask *mask, const LossConfig &cfg) {
    cfg.validate();
    require_same_shape(a, b, "ssim_map");
    if (mask)
        require_same_spatial(a, mask->grid, "ssim_map mask");

    const int radius = cfg.ssim_window / 2;
    Grid out(a.height(), a.width(), a.channels());
    for (int y = 0; y < a.height(); ++y) {
        for (int x = 0; x < a.width(); ++x) {
            const int y0 = std::max(0, y - radius), y1 = std::min(a.height() - 1, y + radius);
            const int x0 = std::max(0, x - radius), x1 = std::min(a.width() - 1, x + radius);
            for (int c = 0; c < a.channels(); ++c) {
                double n = 0, sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
                for (int yy = y0; yy <= y1; ++yy) {
                    for (int xx = x0; xx <= x1; ++xx) {
                        const double w = mask ? mask->at(yy, xx) : 1.0;
                        if (w <= 0.0)
                            continue;
                        const double va = a.at(yy, xx, c);
                        const double vb = b.at(yy, xx, c);
                        n += w;
                        sa += w * va;
                        sb += w * vb;
                        saa += w * va * va;
                        sbb += w * vb * vb;
                        sab += w * va * vb;
                    }
                }
                if (n <= 0.0)
                    continue; // fully masked window; value stays 0
                const double mu_a = sa / n;
                const double mu_b = sb / n;
                const double var_a = std::max(0.0, saa / n - mu_a * mu_a);
                const double var_b = std::max(0.0, sbb / n - mu_b * mu_b);
                const double cov = sab / n - mu_a * mu_b;
                const double ssim = ((2.0 * mu_a * mu_b + cfg.ssim_c1) * (2.0 * cov + cfg.ssim_c2)) /
                                    ((mu_a * mu_a + mu_b * mu_b + cfg.ssim_c1) *
                                     (var_a + var_b + cfg.ssim_c2));
                out.at(y, x, c) = static_cast<float>(std::clamp(ssim, -1.0, 1.0));
            }
        }
    }
    return out;
}

} // namespace

Grid ssim_map(const Grid &a, const Grid &b, const LossConfig &cfg) {
    return ssim_map_impl(a, b, nullptr, cfg);
}

Grid ssim_map(const Grid &a, const Grid &b, const WeightMask &mask, const LossConfig &cfg) {
    return ssim_map_impl(a, b, &mask, cfg);
}

LossReport photometric_loss(const Grid &target, const Grid &reconstruction,
                            const WeightMask &mask, const LossConfig &cfg) {
    cfg.validate();
    require_same_shape(target, reconstruction, "photometric_loss");
    require_same_spatial(target, mask.grid, "photometric_loss mask");

    const Grid ssim = ssim_map(target, reconstruction, mask, cfg);
    const int ch = target.channels();

    Grid per_pixel(target.height(), target.width(), 1);
    double sum_ssim_term = 0.0, sum_l1_term = 0.0, weight_sum = 0.0;
    std::int64_t count = 0;
    for (int y = 0; y < target.height(); ++y) {
        for (int x = 0; x < target.width(); ++x) {
            double ssim_px = 0.0, l1_px = 0.0;
            for (int c = 0; c < ch; ++c) {
                ssim_px += ssim.at(y, x, c);
                l1_px += std::abs(static_cast<double>(target.at(y, x, c)) -
                                  reconstruction.at(y, x, c));
            }
            ssim_px /= ch;
            l1_px /= ch;
            const double ssim_term = cfg.alpha * (1.0 - ssim_px) / 2.0;
            const double l1_term = (1.0 - cfg.alpha) * l1_px;
            per_pixel.at(y, x, 0) = static_cast<float>(ssim_term + l1_term);

            const double m = mask.at(y, x);
            if (m > 0.0f) {
                sum_ssim_term += m * ssim_term;
                sum_l1_term += m * l1_term;
                weight_sum += m;
                ++count;
            }
        }
    }
    if (weight_sum <= 0.0)
        throw EmptySupportError("photometric_loss: no valid pixels");

    LossReport report;
    report.terms["ssim"] = sum_ssim_term / weight_sum;
    report.terms["l1"] = sum_l1_term / weight_sum;
    report.total = report.terms["ssim"] + report.terms["l1"];
    report.valid_counts["valid"] = count;
    report.per_pixel["photometric"] = std::move(per_pixel);
    return report;
}

LossReport confidence_weighted_loss(const Grid &photo_t, const ConfidenceMap &conf_t,
                                    const Grid &photo_tm1, const WeightMask &mask_t,
                                    const WeightMask &mask_tm1, const LossConfig &cfg) {
    cfg.validate();
    photo_t.require_channels(1, "confidence_weighted_loss photo_t");
    photo_tm1.require_channels(1, "confidence_weighted_loss photo_tm1");
    require_same_spatial(photo_t, conf_t.grid, "confidence_weighted_loss confidence");
    require_same_spatial(photo_t, mask_t.grid, "confidence_weighted_loss mask_t");
    require_same_spatial(photo_tm1, mask_tm1.grid, "confidence_weighted_loss mask_tm1");

    double conf_sum = 0.0, wt = 0.0;
    std::int64_t count_t = 0;
    for (int y = 0; y < photo_t.height(); ++y) {
        for (int x = 0; x < photo_t.width(); ++x) {
            const double c = conf_t.at(y, x);
            if (c < cfg.conf_floor)
                throw Error("confidence_weighted_loss: confidence below floor");
            const double m = mask_t.at(y, x);
            if (m <= 0.0)
                continue;
            conf_sum += m * (c * photo_t.at(y, x, 0) - cfg.beta * std::log(c));
            wt += m;
            ++count_t;
        }
    }
    double photo_sum = 0.0, wtm1 = 0.0;
    std::int64_t count_tm1 = 0;
    for (int y = 0; y < photo_tm1.height(); ++y) {
        for (int x = 0; x < photo_tm1.width(); ++x) {
            const double m = mask_tm1.at(y, x);
            if (m <= 0.0)
                continue;
            photo_sum += m * photo_tm1.at(y, x, 0);
            wtm1 += m;
            ++count_tm1;
        }
    }
    if (wt <= 0.0 || wtm1 <= 0.0)
        throw EmptySupportError("confidence_weighted_loss: no valid pixels");

    LossReport report;
    report.terms["confidence_aware"] = conf_sum / wt;
    report.terms["photometric_tm1"] = photo_sum / wtm1;
    report.total = cfg.lambda_conf * report.terms["confidence_aware"] +
                   cfg.lambda_photo * report.terms["photometric_tm1"];
    report.valid_counts["t"] = count_t;
    report.valid_counts["tm1"] = count_tm1;
    return report;
}

double weighted_pointmap_l1(const PointMap &ref, const PointMap &est, const WeightMask &weight) {
    require_same_shape(ref.grid, est.grid, "weighted_pointmap_l1");
    require_same_spatial(ref.grid, weight.grid, "weighted_pointmap_l1 weight");
    double acc = 0.0, wsum = 0.0;
    for (int y = 0; y < ref.height(); ++y) {
        for (int x = 0; x < ref.width(); ++x) {
            const double w = weight.at(y, x);
            if (w <= 0.0)
                continue;
            double l1 = 0.0;
            for (int c = 0; c < 3; ++c)
                l1 += std::abs(static_cast<double>(ref.grid.at(y, x, c)) - est.grid.at(y, x, c));
            acc += w * l1;
            wsum += w;
        }
    }
    if (wsum <= 0.0)
        throw EmptySupportError("weighted_pointmap_l1: total weight is zero");
    return acc / wsum;
}

double mean_pointmap_l1(const PointMap &ref, const PointMap &est) {
    require_same_shape(ref.grid, est.grid, "mean_pointmap_l1");
    double acc = 0.0;
    for (int y = 0; y < ref.height(); ++y) {
        for (int x = 0; x < ref.width(); ++x) {
            for (int c = 0; c < 3; ++c)
                acc += std::abs(static_cast<double>(ref.grid.at(y, x, c)) - est.grid.at(y, x, c));
        }
    }
    return acc / (static_cast<double>(ref.height()) * ref.width());
}

namespace {

WeightMask combine_masks(const WeightMask &a, const WeightMask &b) {
    require_same_spatial(a.grid, b.grid, "combine_masks");
    Grid out(a.height(), a.width(), 1);
    for (int y = 0; y < a.height(); ++y)
        for (int x = 0; x < a.width(); ++x)
            out.at(y, x, 0) = a.at(y, x) * b.at(y, x);
    return WeightMask(std::move(out));
}

std::int64_t positive_count(const WeightMask &m) {
    std::int64_t n = 0;
    for (float v : m.grid.data())
        if (v > 0.0f)
            ++n;
    return n;
}

Grid pointmap_l1_residual_map(const PointMap &ref, const PointMap &est) {
    Grid out(ref.height(), ref.width(), 1);
    for (int y = 0; y < ref.height(); ++y) {
        for (int x = 0; x < ref.width(); ++x) {
            double l1 = 0.0;
            for (int c = 0; c < 3; ++c)
                l1 += std::abs(static_cast<double>(ref.grid.at(y, x, c)) - est.grid.at(y, x, c));
            out.at(y, x, 0) = static_cast<float>(l1);
        }
    }
    return out;
}

} // namespace

LossReport geometry_consistency_loss(const GeometryLossInputs &in, const LossConfig &cfg) {
    cfg.validate();
    require_same_shape(in.x_t_t.grid, in.x_tm1_tm1.grid, "geometry_consistency_loss");
    require_same_shape(in.x_t_t.grid, in.x_tm1_t.grid, "geometry_consistency_loss");
    require_same_shape(in.x_t_t.grid, in.x_t_tm1.grid, "geometry_consistency_loss");

    const int t = in.x_t_t.source_frame;
    const int tm1 = in.x_tm1_tm1.source_frame;
    if (t != kUnknownFrame && tm1 != kUnknownFrame) {
        const bool labels_ok = in.x_t_t.coord_frame == t && in.x_tm1_tm1.coord_frame == tm1 &&
                               in.x_tm1_t.source_frame == tm1 && in.x_tm1_t.coord_frame == t &&
                               in.x_t_tm1.source_frame == t && in.x_t_tm1.coord_frame == tm1 &&
                               in.flow_t_from_tm1.to_frame == t &&
                               in.flow_t_from_tm1.from_frame == tm1 &&
                               in.flow_tm1_from_t.to_frame == tm1 &&
                               in.flow_tm1_from_t.from_frame == t;
        if (!labels_ok)
            throw Error("geometry_consistency_loss: frame labels inconsistent");
    }

    // Flow part. The warped estimate on t-1's grid samples the self map of t
    // along flow t-1<-t (and vice versa); each residual is weighted by the
    // loss definition's occlusion mask times the sampler validity.
    const WarpedPointMap est_tm1_t = warp_pointmap_by_flow(in.x_t_t, in.flow_tm1_from_t);
    const WarpedPointMap est_t_tm1 = warp_pointmap_by_flow(in.x_tm1_tm1, in.flow_t_from_tm1);

    const WeightMask w_tm1 = combine_masks(in.occ_t_from_tm1, est_tm1_t.valid);
    const WeightMask w_t = combine_masks(in.occ_tm1_from_t, est_t_tm1.valid);

    LossReport report;
    report.terms["flow_tm1_grid"] = weighted_pointmap_l1(in.x_tm1_t, est_tm1_t.points, w_tm1);
    report.terms["flow_t_grid"] = weighted_pointmap_l1(in.x_t_tm1, est_t_tm1.points, w_t);
    report.terms["flow"] = report.terms["flow_tm1_grid"] + report.terms["flow_t_grid"];

    // Pose part: plain means over all pixels.
    const PointMap est_tm1_tm1 = apply_pose(in.pose_t_to_tm1, in.x_tm1_t, tm1);
    const PointMap est_t_t = cfg.pose_term_literal
                                 ? apply_pose(in.pose_tm1_to_t, in.x_tm1_t, t)
                                 : apply_pose(in.pose_tm1_to_t, in.x_t_tm1, t);
    report.terms["pose_tm1"] = mean_pointmap_l1(in.x_tm1_tm1, est_tm1_tm1);
    report.terms["pose_t"] = mean_pointmap_l1(in.x_t_t, est_t_t);
    report.terms["pose"] = report.terms["pose_tm1"] + report.terms["pose_t"];

    report.total = cfg.lambda_flow * report.terms["flow"] + cfg.lambda_pose * report.terms["pose"];
    report.valid_counts["flow_tm1_grid"] = positive_count(w_tm1);
    report.valid_counts["flow_t_grid"] = positive_count(w_t);
    report.per_pixel["flow_tm1_grid"] = pointmap_l1_residual_map(in.x_tm1_t, est_tm1_t.points);
    report.per_pixel["flow_t_grid"] = pointmap_l1_residual_map(in.x_t_tm1, est_t_tm1.points);
    report.per_pixel["pose_tm1"] = pointmap_l1_residual_map(in.x_tm1_tm1, est_tm1_tm1);
    report.per_pixel["pose_t"] = pointmap_l1_residual_map(in.x_t_t, est_t_t);
    return report;
}

Grid photometric_l1_gradient(const Grid &target, const Grid &reconstruction,
                             const WeightMask &mask, const LossConfig &cfg) {
    cfg.validate();
    require_same_shape(target, reconstruction, "photometric_l1_gradient");
    require_same_spatial(target, mask.grid, "photometric_l1_gradient mask");

    double weight_sum = 0.0;
    for (float v : mask.grid.data())
        if (v > 0.0f)
            weight_sum += v;
    if (weight_sum <= 0.0)
        throw EmptySupportError("photometric_l1_gradient: no valid pixels");

    const double scale = (1.0 - cfg.alpha) / (target.channels() * weight_sum);
    Grid grad(target.height(), target.width(), target.channels());
    for (int y = 0; y < target.height(); ++y) {
        for (int x = 0; x < target.width(); ++x) {
            const double m = mask.at(y, x);
            if (m <= 0.0)
                continue;
            for (int c = 0; c < target.channels(); ++c) {
                const double r = static_cast<double>(reconstruction.at(y, x, c)) - target.at(y, x, c);
                grad.at(y, x, c) = static_cast<float>(m * scale * sgn(r));
            }
        }
    }
    return grad;
}

Grid flow_term_gradient(const PointMap &ref, const PointMap &est, const WeightMask &weight) {
    require_same_shape(ref.grid, est.grid, "flow_term_gradient");
    require_same_spatial(ref.grid, weight.grid, "flow_term_gradient weight");
    double wsum = 0.0;
    for (float v : weight.grid.data())
        if (v > 0.0f)
            wsum += v;
    if (wsum <= 0.0)
        throw EmptySupportError("flow_term_gradient: total weight is zero");

    Grid grad(ref.height(), ref.width(), 3);
    for (int y = 0; y < ref.height(); ++y) {
        for (int x = 0; x < ref.width(); ++x) {
            const double w = weight.at(y, x);
            if (w <= 0.0)
                continue;
            for (int c = 0; c < 3; ++c) {
                const double r =
                    static_cast<double>(ref.grid.at(y, x, c)) - est.grid.at(y, x, c);
                grad.at(y, x, c) = static_cast<float>(w * sgn(r) / wsum);
            }
        }
    }
    return grad;
}

namespace {

// Residual field ref - (R src + t) evaluated in double.
Eigen::Vector3d pose_residual(const PointMap &ref, const PointMap &src, const Eigen::Matrix3d &r,
                              const Eigen::Vector3d &t, int y, int x) {
    const Eigen::Vector3d p(src.grid.at(y, x, 0), src.grid.at(y, x, 1), src.grid.at(y, x, 2));
    const Eigen::Vector3d q = r * p + t;
    return Eigen::Vector3d(ref.grid.at(y, x, 0) - q.x(), ref.grid.at(y, x, 1) - q.y(),
                           ref.grid.at(y, x, 2) - q.z());
}

} // namespace

Grid pose_term_gradient_wrt_ref(const PointMap &ref, const PointMap &src, const PoseSE3 &pose) {
    require_same_shape(ref.grid, src.grid, "pose_term_gradient_wrt_ref");
    const Eigen::Matrix3d r = pose.rotation_matrix();
    const double inv_n = 1.0 / (static_cast<double>(ref.height()) * ref.width());
    Grid grad(ref.height(), ref.width(), 3);
    for (int y = 0; y < ref.height(); ++y) {
        for (int x = 0; x < ref.width(); ++x) {
            const Eigen::Vector3d res = pose_residual(ref, src, r, pose.translation, y, x);
            for (int c = 0; c < 3; ++c)
                grad.at(y, x, c) = static_cast<float>(inv_n * sgn(res(c)));
        }
    }
    return grad;
}

Grid pose_term_gradient_wrt_src(const PointMap &ref, const PointMap &src, const PoseSE3 &pose) {
    require_same_shape(ref.grid, src.grid, "pose_term_gradient_wrt_src");
    const Eigen::Matrix3d r = pose.rotation_matrix();
    const double inv_n = 1.0 / (static_cast<double>(ref.height()) * ref.width());
    Grid grad(ref.height(), ref.width(), 3);
    for (int y = 0; y < ref.height(); ++y) {
        for (int x = 0; x < ref.width(); ++x) {
            const Eigen::Vector3d res = pose_residual(ref, src, r, pose.translation, y, x);
            const Eigen::Vector3d s(sgn(res(0)), sgn(res(1)), sgn(res(2)));
            const Eigen::Vector3d g = -r.transpose() * s * inv_n;
            for (int c = 0; c < 3; ++c)
                grad.at(y, x, c) = static_cast<float>(g(c));
        }
    }
    return grad;
}

Eigen::Vector3d pose_term_gradient_wrt_translation(const PointMap &ref, const PointMap &src,
                                                   const PoseSE3 &pose) {
    require_same_shape(ref.grid, src.grid, "pose_term_gradient_wrt_translation");
    const Eigen::Matrix3d r = pose.rotation_matrix();
    const double inv_n = 1.0 / (static_cast<double>(ref.height()) * ref.width());
    Eigen::Vector3d grad = Eigen::Vector3d::Zero();
    for (int y = 0; y < ref.height(); ++y) {
        for (int x = 0; x < ref.width(); ++x) {
            const Eigen::Vector3d res = pose_residual(ref, src, r, pose.translation, y, x);
            grad -= Eigen::Vector3d(sgn(res(0)), sgn(res(1)), sgn(res(2))) * inv_n;
        }
    }
    return grad;
}

} // namespace colonmap
