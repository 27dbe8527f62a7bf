#include "colonmap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "colonmap/geometry.hpp"
#include "colonmap/kdtree.hpp"

namespace colonmap {

namespace {

double lower_median(std::vector<double> values) {
    if (values.empty())
        throw EmptySupportError("median: empty sample");
    const std::size_t k = (values.size() - 1) / 2;
    std::nth_element(values.begin(), values.begin() + k, values.end());
    return values[k];
}

void require_matched(const Trajectory &pred, const Trajectory &gt, const char *what) {
    if (pred.size() != gt.size())
        throw ShapeError(std::string(what) + ": trajectory lengths differ (" +
                         std::to_string(pred.size()) + " vs " + std::to_string(gt.size()) + ")");
    for (std::size_t i = 0; i < pred.size(); ++i)
        if (std::abs(pred[i].timestamp - gt[i].timestamp) > 1e-9)
            throw Error(std::string(what) + ": timestamps differ at index " + std::to_string(i));
}

} // namespace

double median_scale(const Grid &pred, const Grid &gt, const WeightMask &mask) {
    pred.require_channels(1, "median_scale pred");
    gt.require_channels(1, "median_scale gt");
    if (pred.height() != gt.height() || pred.width() != gt.width() ||
        pred.height() != mask.height() || pred.width() != mask.width())
        throw ShapeError("median_scale: shapes differ");

    std::vector<double> p, g;
    for (int y = 0; y < pred.height(); ++y) {
        for (int x = 0; x < pred.width(); ++x) {
            if (mask.at(y, x) > 0.0f) {
                p.push_back(pred.at(y, x, 0));
                g.push_back(gt.at(y, x, 0));
            }
        }
    }
    if (p.empty())
        throw EmptySupportError("median_scale: no valid pixels");
    const double mp = lower_median(std::move(p));
    if (!(mp > 0.0))
        throw DegenerateError("median_scale: non-positive prediction median");
    return lower_median(std::move(g)) / mp;
}

DepthEvalResult depth_metrics(const Grid &pred, const Grid &gt, const WeightMask &mask,
                              bool apply_median_scaling,
                              std::optional<std::pair<double, double>> clamp) {
    pred.require_channels(1, "depth_metrics pred");
    gt.require_channels(1, "depth_metrics gt");

    DepthEvalResult r;
    r.scale_used = apply_median_scaling ? median_scale(pred, gt, mask) : 1.0;

    double abs_rel = 0, sq_rel = 0, sq = 0, sq_log = 0;
    std::int64_t n = 0, delta_hits = 0;
    for (int y = 0; y < pred.height(); ++y) {
        for (int x = 0; x < pred.width(); ++x) {
            if (!(mask.at(y, x) > 0.0f))
                continue;
            double d = pred.at(y, x, 0) * r.scale_used;
            if (clamp)
                d = std::clamp(d, clamp->first, clamp->second);
            const double g = gt.at(y, x, 0);
            if (!(g > 0.0))
                throw DegenerateError("depth_metrics: non-positive ground truth on mask");
            if (!(d > 0.0))
                throw DegenerateError("depth_metrics: non-positive prediction after scaling");
            const double e = d - g;
            abs_rel += std::abs(e) / g;
            sq_rel += e * e / g;
            sq += e * e;
            const double le = std::log(d) - std::log(g);
            sq_log += le * le;
            if (std::max(d / g, g / d) < 1.25)
                ++delta_hits;
            ++n;
        }
    }
    if (n == 0)
        throw EmptySupportError("depth_metrics: no valid pixels");
    r.abs_rel = abs_rel / n;
    r.sq_rel = sq_rel / n;
    r.rmse = std::sqrt(sq / n);
    r.rmse_log = std::sqrt(sq_log / n);
    r.delta = static_cast<double>(delta_hits) / n;
    return r;
}

double ate(const Trajectory &pred, const Trajectory &gt, Alignment alignment) {
    require_matched(pred, gt, "ate");
    const std::size_t n = pred.size();
    if (n == 0)
        throw EmptySupportError("ate: empty trajectories");

    std::vector<Eigen::Vector3d> p(n), g(n);
    for (std::size_t i = 0; i < n; ++i) {
        p[i] = pred[i].pose.translation;
        g[i] = gt[i].pose.translation;
    }

    Sim3Transform align; // identity
    if (alignment != Alignment::kNone)
        align = umeyama_align(p, g, alignment == Alignment::kSim3);

    double sq = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        sq += (g[i] - align.apply(p[i])).squaredNorm();
    return std::sqrt(sq / n);
}

RpeResult rpe(const Trajectory &pred, const Trajectory &gt, int delta) {
    require_matched(pred, gt, "rpe");
    if (delta <= 0)
        throw Error("rpe: delta must be positive");
    if (pred.size() < static_cast<std::size_t>(delta) + 1)
        throw EmptySupportError("rpe: trajectory shorter than delta + 1");

    double sq_trans = 0.0, sq_rot = 0.0;
    const std::size_t pairs = pred.size() - delta;
    for (std::size_t i = 0; i < pairs; ++i) {
        const PoseSE3 gt_rel = gt[i].pose.inverse() * gt[i + delta].pose;
        const PoseSE3 pred_rel = pred[i].pose.inverse() * pred[i + delta].pose;
        const PoseSE3 err = gt_rel.inverse() * pred_rel;
        sq_trans += err.translation.squaredNorm();
        const double ang = err.rotation_angle();
        sq_rot += ang * ang;
    }
    RpeResult r;
    r.rpe_trans = std::sqrt(sq_trans / pairs);
    r.rpe_rot_deg = std::sqrt(sq_rot / pairs) * 180.0 / M_PI;
    return r;
}

double snippet_ate(const Trajectory &pred, const Trajectory &gt, int snippet_len) {
    require_matched(pred, gt, "snippet_ate");
    if (snippet_len < 2)
        throw Error("snippet_ate: snippet_len must be at least 2");
    if (pred.size() < static_cast<std::size_t>(snippet_len))
        throw EmptySupportError("snippet_ate: trajectory shorter than snippet");

    const std::size_t windows = pred.size() - snippet_len + 1;
    double total = 0.0;
    for (std::size_t w = 0; w < windows; ++w) {
        // Translations relative to the window's first pose.
        std::vector<Eigen::Vector3d> p(snippet_len), g(snippet_len);
        const PoseSE3 p0 = pred[w].pose.inverse();
        const PoseSE3 g0 = gt[w].pose.inverse();
        for (int i = 0; i < snippet_len; ++i) {
            p[i] = (p0 * pred[w + i].pose).translation;
            g[i] = (g0 * gt[w + i].pose).translation;
        }
        // Single least-squares scale on the anchored translations.
        double num = 0.0, den = 0.0;
        for (int i = 0; i < snippet_len; ++i) {
            num += g[i].dot(p[i]);
            den += p[i].squaredNorm();
        }
        const double s = den > 1e-300 ? num / den : 1.0;
        double sq = 0.0;
        for (int i = 0; i < snippet_len; ++i)
            sq += (g[i] - s * p[i]).squaredNorm();
        total += std::sqrt(sq / snippet_len);
    }
    return total / windows;
}

PointMapEvalResult pointmap_metrics(const PointMap &pred, const PointMap &gt,
                                    const WeightMask &mask, bool align_sim3) {
    if (pred.height() != gt.height() || pred.width() != gt.width())
        throw ShapeError("pointmap_metrics: point maps not pixel-aligned");
    if (mask.height() != pred.height() || mask.width() != pred.width())
        throw ShapeError("pointmap_metrics: mask not pixel-aligned");

    // Scale normalization on the depth (z) channel, as in depth evaluation.
    std::vector<double> pz, gz;
    for (int y = 0; y < pred.height(); ++y) {
        for (int x = 0; x < pred.width(); ++x) {
            if (mask.at(y, x) > 0.0f) {
                pz.push_back(pred.grid.at(y, x, 2));
                gz.push_back(gt.grid.at(y, x, 2));
            }
        }
    }
    if (pz.empty())
        throw EmptySupportError("pointmap_metrics: no valid pixels");
    const double mp = lower_median(std::move(pz));
    if (!(mp > 0.0))
        throw DegenerateError("pointmap_metrics: non-positive prediction depth median");
    const double scale = lower_median(std::move(gz)) / mp;

    std::vector<Eigen::Vector3d> p, g;
    for (int y = 0; y < pred.height(); ++y) {
        for (int x = 0; x < pred.width(); ++x) {
            if (!(mask.at(y, x) > 0.0f))
                continue;
            p.emplace_back(scale * pred.grid.at(y, x, 0), scale * pred.grid.at(y, x, 1),
                           scale * pred.grid.at(y, x, 2));
            g.emplace_back(gt.grid.at(y, x, 0), gt.grid.at(y, x, 1), gt.grid.at(y, x, 2));
        }
    }

    if (align_sim3) {
        const Sim3Transform t = umeyama_align(p, g, /*with_scale=*/true);
        for (auto &q : p)
            q = t.apply(q);
    }

    PointMapEvalResult r;
    r.scale_used = scale;

    const KdTree3 gt_tree(g);
    const KdTree3 pred_tree(p);
    double acc = 0.0, comp = 0.0, sq_rel = 0.0, sq_log = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        acc += gt_tree.nearest(p[i]).distance;
        comp += pred_tree.nearest(g[i]).distance;
        const double gn = g[i].norm();
        const double pn = p[i].norm();
        if (!(gn > 0.0) || !(pn > 0.0))
            throw DegenerateError("pointmap_metrics: point at the origin breaks relative errors");
        sq_rel += (p[i] - g[i]).squaredNorm() / gn;
        const double le = std::log(pn) - std::log(gn);
        sq_log += le * le;
    }
    const double n = static_cast<double>(p.size());
    r.accuracy = acc / n;
    r.completeness = comp / n;
    r.sq_rel = sq_rel / n;
    r.rmse_log = std::sqrt(sq_log / n);
    return r;
}

} // namespace colonmap
