#include "colonmap/camera.hpp"

#include <cmath>

namespace colonmap {

ProjectionResult project(const Intrinsics &k, const PointMap &points) {
    Grid pixels(points.height(), points.width(), 2);
    Grid mask(points.height(), points.width(), 1);
    for (int y = 0; y < points.height(); ++y) {
        for (int x = 0; x < points.width(); ++x) {
            const double px = points.grid.at(y, x, 0);
            const double py = points.grid.at(y, x, 1);
            const double pz = points.grid.at(y, x, 2);
            if (pz > kMinProjectionDepth) {
                pixels.at(y, x, 0) = static_cast<float>(k.focal * px / pz + k.cx);
                pixels.at(y, x, 1) = static_cast<float>(k.focal * py / pz + k.cy);
                mask.at(y, x, 0) = 1.0f;
            }
        }
    }
    return {std::move(pixels), WeightMask(std::move(mask))};
}

PointMap unproject(const Intrinsics &k, const Grid &depth, int frame) {
    depth.require_channels(1, "unproject depth");
    Grid out(depth.height(), depth.width(), 3);
    for (int y = 0; y < depth.height(); ++y) {
        for (int x = 0; x < depth.width(); ++x) {
            const double d = depth.at(y, x, 0);
            out.at(y, x, 0) = static_cast<float>(d * (x - k.cx) / k.focal);
            out.at(y, x, 1) = static_cast<float>(d * (y - k.cy) / k.focal);
            out.at(y, x, 2) = static_cast<float>(d);
        }
    }
    return PointMap(std::move(out), frame, frame);
}

namespace {

struct FocalSample {
    double ux, uy; // pixel offset from image center
    double qx, qy; // ray direction (x/z, y/z)
    double weight;
};

double l1_objective(const std::vector<FocalSample> &samples, double f) {
    double obj = 0.0;
    for (const FocalSample &s : samples)
        obj += s.weight * std::hypot(s.ux - f * s.qx, s.uy - f * s.qy);
    return obj;
}

} // namespace

FocalEstimate estimate_focal_weiszfeld(const PointMap &points, const ConfidenceMap *confidence,
                                       int max_iters, double tol) {
    if (confidence && (confidence->height() != points.height() ||
                       confidence->width() != points.width()))
        throw ShapeError("estimate_focal_weiszfeld: confidence not pixel-aligned");

    const double cx = (points.width() - 1) / 2.0;
    const double cy = (points.height() - 1) / 2.0;

    std::vector<FocalSample> samples;
    samples.reserve(static_cast<std::size_t>(points.height()) * points.width());
    for (int y = 0; y < points.height(); ++y) {
        for (int x = 0; x < points.width(); ++x) {
            const double pz = points.grid.at(y, x, 2);
            if (!(pz > kMinProjectionDepth))
                continue;
            FocalSample s;
            s.qx = points.grid.at(y, x, 0) / pz;
            s.qy = points.grid.at(y, x, 1) / pz;
            s.ux = x - cx;
            s.uy = y - cy;
            s.weight = confidence ? confidence->at(y, x) : 1.0;
            if (s.qx * s.qx + s.qy * s.qy < 1e-24)
                continue; // principal-axis pixel carries no focal information
            samples.push_back(s);
        }
    }
    if (samples.size() < 2)
        throw DegenerateError("estimate_focal_weiszfeld: not enough off-axis directions");

    // Closed-form least-squares initializer.
    double num = 0.0, den = 0.0;
    for (const FocalSample &s : samples) {
        num += s.weight * (s.ux * s.qx + s.uy * s.qy);
        den += s.weight * (s.qx * s.qx + s.qy * s.qy);
    }
    if (!(den > 0.0))
        throw DegenerateError("estimate_focal_weiszfeld: zero direction energy");
    const double f_ls = num / den;
    if (!(f_ls > 0.0))
        throw DegenerateError("estimate_focal_weiszfeld: non-positive focal estimate");

    FocalEstimate result;
    result.focal_least_squares = f_ls;
    result.objective_history.push_back(l1_objective(samples, f_ls));

    // IRLS: each pass solves the weighted least-squares problem with weights
    // w / max(residual, 1e-9); the residual clamp is the usual Weiszfeld
    // guard at zero residual.
    double f = f_ls;
    int iter = 0;
    while (iter < max_iters) {
        double rnum = 0.0, rden = 0.0;
        for (const FocalSample &s : samples) {
            const double r = std::max(std::hypot(s.ux - f * s.qx, s.uy - f * s.qy), 1e-9);
            const double rw = s.weight / r;
            rnum += rw * (s.ux * s.qx + s.uy * s.qy);
            rden += rw * (s.qx * s.qx + s.qy * s.qy);
        }
        const double f_next = rnum / rden;
        ++iter;
        if (!(f_next > 0.0))
            throw DegenerateError("estimate_focal_weiszfeld: non-positive focal estimate");
        result.objective_history.push_back(l1_objective(samples, f_next));
        const bool converged = std::abs(f_next - f) < tol * std::abs(f);
        f = f_next;
        if (converged)
            break;
    }

    result.focal = f;
    result.iterations = iter;
    return result;
}

} // namespace colonmap
