#include "colonmap/geometry.hpp"

#include <Eigen/SVD>

#include <string>

namespace colonmap {

PointMap apply_pose(const PoseSE3 &pose, const PointMap &points, int new_coord_frame) {
    const Eigen::Matrix3d r = pose.rotation_matrix();
    const Eigen::Vector3d t = pose.translation;

    Grid out(points.height(), points.width(), 3);
    for (int y = 0; y < points.height(); ++y) {
        for (int x = 0; x < points.width(); ++x) {
            const Eigen::Vector3d p(points.grid.at(y, x, 0), points.grid.at(y, x, 1),
                                    points.grid.at(y, x, 2));
            const Eigen::Vector3d q = r * p + t;
            out.at(y, x, 0) = static_cast<float>(q.x());
            out.at(y, x, 1) = static_cast<float>(q.y());
            out.at(y, x, 2) = static_cast<float>(q.z());
        }
    }
    return PointMap(std::move(out), points.source_frame, new_coord_frame);
}

namespace {

Sim3Transform umeyama_impl(const std::vector<Eigen::Vector3d> &source,
                           const std::vector<Eigen::Vector3d> &target,
                           const std::vector<double> *weights, bool with_scale) {
    const std::size_t n = source.size();
    if (n != target.size())
        throw ShapeError("umeyama_align: point counts differ");
    if (n < 3)
        throw DegenerateError("umeyama_align: need at least 3 correspondences, got " +
                              std::to_string(n));

    double w_sum = 0.0;
    std::vector<double> w(n, 1.0);
    if (weights) {
        if (weights->size() != n)
            throw ShapeError("umeyama_align: weight count does not match points");
        w = *weights;
    }
    for (double wi : w) {
        if (wi < 0.0)
            throw DegenerateError("umeyama_align: negative weight");
        w_sum += wi;
    }
    if (!(w_sum > 0.0))
        throw DegenerateError("umeyama_align: total weight is zero");

    Eigen::Vector3d mu_src = Eigen::Vector3d::Zero();
    Eigen::Vector3d mu_tgt = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
        mu_src += w[i] * source[i];
        mu_tgt += w[i] * target[i];
    }
    mu_src /= w_sum;
    mu_tgt /= w_sum;

    // Weighted cross-covariance sigma = sum w (y - my)(x - mx)^T / sum w and
    // source variance, both in the normalized-weight sense.
    Eigen::Matrix3d sigma = Eigen::Matrix3d::Zero();
    double var_src = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Eigen::Vector3d dx = source[i] - mu_src;
        const Eigen::Vector3d dy = target[i] - mu_tgt;
        sigma += w[i] * dy * dx.transpose();
        var_src += w[i] * dx.squaredNorm();
    }
    sigma /= w_sum;
    var_src /= w_sum;

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(sigma, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Vector3d d = svd.singularValues();

    // Rank < 2 means the correspondences are collinear (or a single point):
    // the rotation is not determined.
    if (!(d(1) > 1e-12 * std::max(d(0), 1e-300)) || !(var_src > 0.0))
        throw DegenerateError("umeyama_align: degenerate configuration (rank-deficient covariance)");

    Eigen::Vector3d s_diag = Eigen::Vector3d::Ones();
    if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0)
        s_diag(2) = -1.0;

    const Eigen::Matrix3d rot =
        svd.matrixU() * s_diag.asDiagonal() * svd.matrixV().transpose();

    double scale = 1.0;
    if (with_scale) {
        scale = d.dot(s_diag) / var_src;
        if (!(scale > 0.0))
            throw DegenerateError("umeyama_align: non-positive scale estimate");
    }

    const Eigen::Vector3d t = mu_tgt - scale * (rot * mu_src);
    return Sim3Transform(scale, PoseSE3::from_matrix(rot, t));
}

} // namespace

Sim3Transform umeyama_align(const std::vector<Eigen::Vector3d> &source,
                            const std::vector<Eigen::Vector3d> &target, bool with_scale) {
    return umeyama_impl(source, target, nullptr, with_scale);
}

Sim3Transform umeyama_align_weighted(const std::vector<Eigen::Vector3d> &source,
                                     const std::vector<Eigen::Vector3d> &target,
                                     const std::vector<double> &weights, bool with_scale) {
    return umeyama_impl(source, target, &weights, with_scale);
}

PoseSE3 recover_pose_from_pointmaps(const PointMap &points_a, const PointMap &points_b,
                                    const ConfidenceMap &confidence, double min_conf) {
    if (points_a.height() != points_b.height() || points_a.width() != points_b.width())
        throw ShapeError("recover_pose_from_pointmaps: point maps not pixel-aligned");
    if (confidence.height() != points_a.height() || confidence.width() != points_a.width())
        throw ShapeError("recover_pose_from_pointmaps: confidence not pixel-aligned");

    std::vector<Eigen::Vector3d> src, tgt;
    std::vector<double> w;
    for (int y = 0; y < points_a.height(); ++y) {
        for (int x = 0; x < points_a.width(); ++x) {
            const double c = confidence.at(y, x);
            if (c < min_conf)
                continue;
            src.emplace_back(points_b.grid.at(y, x, 0), points_b.grid.at(y, x, 1),
                             points_b.grid.at(y, x, 2));
            tgt.emplace_back(points_a.grid.at(y, x, 0), points_a.grid.at(y, x, 1),
                             points_a.grid.at(y, x, 2));
            w.push_back(c);
        }
    }
    if (src.size() < 3)
        throw EmptySupportError("recover_pose_from_pointmaps: fewer than 3 pixels at or above "
                                "confidence " +
                                std::to_string(min_conf));
    return umeyama_align_weighted(src, tgt, w, /*with_scale=*/false).pose;
}

} // namespace colonmap
