#pragma once

#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "colonmap/error.hpp"

namespace colonmap {

// Rigid transform: x' = R x + t. The quaternion is kept unit-norm by every
// constructor and composition.
//
// Frame convention used throughout: a pose labelled "a_to_b" maps points
// expressed in frame a's coordinates into frame b's coordinates.
struct PoseSE3 {
    Eigen::Quaterniond rotation{1.0, 0.0, 0.0, 0.0};
    Eigen::Vector3d translation{0.0, 0.0, 0.0};

    PoseSE3() = default;

    PoseSE3(const Eigen::Quaterniond &q, const Eigen::Vector3d &t)
        : rotation(q.normalized()), translation(t) {}

    static PoseSE3 identity() { return PoseSE3(); }

    static PoseSE3 from_matrix(const Eigen::Matrix3d &r, const Eigen::Vector3d &t) {
        return PoseSE3(Eigen::Quaterniond(r), t);
    }

    Eigen::Matrix3d rotation_matrix() const { return rotation.toRotationMatrix(); }

    Eigen::Vector3d apply(const Eigen::Vector3d &p) const { return rotation * p + translation; }

    PoseSE3 inverse() const {
        const Eigen::Quaterniond qi = rotation.conjugate();
        return PoseSE3(qi, -(qi * translation));
    }

    // (a.compose(b)).apply(x) == a.apply(b.apply(x))
    PoseSE3 compose(const PoseSE3 &b) const {
        return PoseSE3(rotation * b.rotation, rotation * b.translation + translation);
    }

    PoseSE3 operator*(const PoseSE3 &b) const { return compose(b); }

    // Rotation angle in radians, in [0, pi].
    double rotation_angle() const {
        const double v = rotation.vec().norm();
        const double w = std::abs(rotation.w());
        return 2.0 * std::atan2(v, w);
    }
};

// Similarity transform: x' = s R x + t, s > 0.
struct Sim3Transform {
    double scale = 1.0;
    PoseSE3 pose;

    Sim3Transform() = default;

    Sim3Transform(double s, const PoseSE3 &p) : scale(s), pose(p) {
        if (!(s > 0.0))
            throw DegenerateError("Sim3Transform: scale must be positive");
    }

    Eigen::Vector3d apply(const Eigen::Vector3d &p) const {
        return pose.rotation * (scale * p) + pose.translation;
    }
};

struct TimedPose {
    double timestamp = 0.0;
    PoseSE3 pose;
};

// Time-ordered pose sequence; timestamps are strictly increasing.
class Trajectory {
  public:
    Trajectory() = default;

    explicit Trajectory(std::vector<TimedPose> entries) : entries_(std::move(entries)) {
        for (std::size_t i = 1; i < entries_.size(); ++i)
            if (!(entries_[i].timestamp > entries_[i - 1].timestamp))
                throw Error("Trajectory: timestamps must be strictly increasing");
    }

    void append(double timestamp, const PoseSE3 &pose) {
        if (!entries_.empty() && !(timestamp > entries_.back().timestamp))
            throw Error("Trajectory: timestamps must be strictly increasing");
        entries_.push_back({timestamp, pose});
    }

    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    const TimedPose &operator[](std::size_t i) const { return entries_[i]; }
    const std::vector<TimedPose> &entries() const { return entries_; }

  private:
    std::vector<TimedPose> entries_;
};

} // namespace colonmap
