#pragma once

#include <cmath>

#include "colonmap/grid.hpp"
#include "colonmap/pose.hpp"
#include "colonmap/rng.hpp"

namespace colonmap::test {

inline Grid random_grid(int h, int w, int c, Rng &rng, float lo = -1.0f, float hi = 1.0f) {
    Grid g(h, w, c);
    for (float &v : g.data())
        v = static_cast<float>(rng.uniform(lo, hi));
    return g;
}

inline PoseSE3 random_pose(Rng &rng, double max_angle = 1.0, double max_trans = 1.0) {
    const Eigen::Vector3d axis =
        Eigen::Vector3d(rng.gaussian(), rng.gaussian(), rng.gaussian()).normalized();
    const double angle = rng.uniform(-max_angle, max_angle);
    const Eigen::Vector3d t(rng.uniform(-max_trans, max_trans), rng.uniform(-max_trans, max_trans),
                            rng.uniform(-max_trans, max_trans));
    return PoseSE3(Eigen::Quaterniond(Eigen::AngleAxisd(angle, axis)), t);
}

inline bool bitwise_equal(const Grid &a, const Grid &b) {
    if (!a.same_shape(b))
        return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a.data()[i] != b.data()[i])
            return false;
    return true;
}

inline double max_abs_diff(const Grid &a, const Grid &b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(static_cast<double>(a.data()[i]) - b.data()[i]));
    return m;
}

} // namespace colonmap::test
