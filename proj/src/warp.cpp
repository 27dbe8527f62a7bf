#include "colonmap/warp.hpp"

#include "colonmap/arrayops.hpp"

namespace colonmap {

WarpedImage reconstruct_image(const Intrinsics &k, const PoseSE3 &target_to_source,
                              const PointMap &points_self, const Grid &source_image) {
    const Eigen::Matrix3d r = target_to_source.rotation_matrix();
    const Eigen::Vector3d t = target_to_source.translation;

    Grid image(points_self.height(), points_self.width(), source_image.channels());
    Grid mask(points_self.height(), points_self.width(), 1);
    std::vector<float> px(source_image.channels());
    for (int y = 0; y < points_self.height(); ++y) {
        for (int x = 0; x < points_self.width(); ++x) {
            const Eigen::Vector3d p(points_self.grid.at(y, x, 0), points_self.grid.at(y, x, 1),
                                    points_self.grid.at(y, x, 2));
            const Eigen::Vector3d q = r * p + t;
            if (!(q.z() > kMinProjectionDepth))
                continue; // mask stays 0, pixel stays 0
            const double u = k.focal * q.x() / q.z() + k.cx;
            const double v = k.focal * q.y() / q.z() + k.cy;
            if (!bilinear_at(source_image, u, v, px.data()))
                continue;
            mask.at(y, x, 0) = 1.0f;
            for (int c = 0; c < source_image.channels(); ++c)
                image.at(y, x, c) = px[c];
        }
    }
    return {std::move(image), WeightMask(std::move(mask))};
}

WarpedPointMap warp_pointmap_by_flow(const PointMap &points, const FlowField &flow) {
    Grid out(flow.height(), flow.width(), 3);
    Grid mask(flow.height(), flow.width(), 1);
    float px[3];
    for (int y = 0; y < flow.height(); ++y) {
        for (int x = 0; x < flow.width(); ++x) {
            const double sx = x + static_cast<double>(flow.grid.at(y, x, 0));
            const double sy = y + static_cast<double>(flow.grid.at(y, x, 1));
            const bool ok = bilinear_at(points.grid, sx, sy, px);
            mask.at(y, x, 0) = ok ? 1.0f : 0.0f;
            out.at(y, x, 0) = px[0];
            out.at(y, x, 1) = px[1];
            out.at(y, x, 2) = px[2];
        }
    }
    return {PointMap(std::move(out), flow.to_frame, points.coord_frame),
            WeightMask(std::move(mask))};
}

} // namespace colonmap
