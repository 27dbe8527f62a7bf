#include "colonmap/synth.hpp"

#include <cmath>
#include <memory>
#include <string>

#include "colonmap/parallel.hpp"
#include "colonmap/rng.hpp"

namespace colonmap {

namespace {

constexpr double kRayEpsilon = 1e-9; // bisection width on the ray parameter

struct TexturePhases {
    // Three sinusoid terms, three channels each.
    double phase[3][3];

    explicit TexturePhases(std::uint64_t seed) {
        Rng rng(seed);
        for (auto &term : phase)
            for (double &p : term)
                p = rng.uniform(0.0, 2.0 * M_PI);
    }
};

double texture_value(const TextureParams &tex, const TexturePhases &ph, double a_coord,
                     double b_coord, int channel) {
    const double a1 = tex.amplitude * 0.45;
    const double a2 = tex.amplitude * 0.30;
    const double a3 = tex.amplitude * 0.25;
    return 0.5 + a1 * std::sin(tex.angular_cycles * a_coord + ph.phase[0][channel]) +
           a2 * std::sin(tex.axial_cycles * b_coord + ph.phase[1][channel]) +
           a3 * std::sin(tex.mixed_angular_cycles * a_coord + tex.mixed_axial_cycles * b_coord +
                         ph.phase[2][channel]);
}

class Surface {
  public:
    virtual ~Surface() = default;

    // Signed distance-like field, negative strictly inside the viewing
    // region. Only the sign and a Lipschitz bound along rays are used.
    virtual double field(const Eigen::Vector3d &p) const = 0;

    // First intersection parameter tau > 0 of p = origin + tau * dir with
    // the surface, or a negative value when the ray misses.
    virtual double cast(const Eigen::Vector3d &origin, const Eigen::Vector3d &dir) const = 0;

    virtual void texture_rgb(const Eigen::Vector3d &surface_point, float rgb[3]) const = 0;
};

class TubeSurface : public Surface {
  public:
    TubeSurface(const TubeParams &tube, const TextureParams &tex, std::uint64_t seed)
        : tube_(tube), tex_(tex), phases_(seed) {}

    Eigen::Vector2d centerline(double z) const {
        const double u = 2.0 * M_PI * z / tube_.period;
        return {tube_.amplitude * std::sin(u), tube_.amplitude * tube_.ellipticity * std::cos(u)};
    }

    double field(const Eigen::Vector3d &p) const override {
        const Eigen::Vector2d c = centerline(p.z());
        return std::hypot(p.x() - c.x(), p.y() - c.y()) - tube_.radius;
    }

    double cast(const Eigen::Vector3d &origin, const Eigen::Vector3d &dir) const override {
        // March with a step bounded by the field's Lipschitz constant along
        // the ray, then bisect the first sign change.
        const double centerline_slope = 2.0 * M_PI * tube_.amplitude / tube_.period *
                                        std::max(1.0, std::abs(tube_.ellipticity));
        const double lipschitz =
            std::hypot(dir.x(), dir.y()) + centerline_slope * std::abs(dir.z()) + 1e-12;
        const double step = 0.2 * tube_.radius / lipschitz;
        const double tau_max = 10.0 * tube_.period / std::max(std::abs(dir.z()), 0.1);

        double t0 = 0.0;
        if (field(origin) >= 0.0)
            return -1.0;
        while (t0 < tau_max) {
            const double t1 = t0 + step;
            if (field(origin + t1 * dir) >= 0.0) {
                double lo = t0, hi = t1;
                while (hi - lo > kRayEpsilon) {
                    const double mid = 0.5 * (lo + hi);
                    if (field(origin + mid * dir) >= 0.0)
                        hi = mid;
                    else
                        lo = mid;
                }
                return 0.5 * (lo + hi);
            }
            t0 = t1;
        }
        return -1.0;
    }

    void texture_rgb(const Eigen::Vector3d &p, float rgb[3]) const override {
        const Eigen::Vector2d c = centerline(p.z());
        const double theta = std::atan2(p.y() - c.y(), p.x() - c.x());
        const double axial = 2.0 * M_PI * p.z() / tube_.period;
        for (int ch = 0; ch < 3; ++ch)
            rgb[ch] = static_cast<float>(texture_value(tex_, phases_, theta, axial, ch));
    }

  private:
    TubeParams tube_;
    TextureParams tex_;
    TexturePhases phases_;
};

class PlaneSurface : public Surface {
  public:
    PlaneSurface(const PlaneParams &plane, const TextureParams &tex, std::uint64_t seed)
        : plane_(plane), tex_(tex), phases_(seed) {}

    double field(const Eigen::Vector3d &p) const override { return p.z() - plane_.depth; }

    double cast(const Eigen::Vector3d &origin, const Eigen::Vector3d &dir) const override {
        if (dir.z() <= 1e-12)
            return -1.0;
        const double tau = (plane_.depth - origin.z()) / dir.z();
        return tau > 0.0 ? tau : -1.0;
    }

    void texture_rgb(const Eigen::Vector3d &p, float rgb[3]) const override {
        const double ax = 2.0 * M_PI * p.x();
        const double by = 2.0 * M_PI * p.y();
        for (int ch = 0; ch < 3; ++ch)
            rgb[ch] = static_cast<float>(texture_value(tex_, phases_, ax, by, ch));
    }

  private:
    PlaneParams plane_;
    TextureParams tex_;
    TexturePhases phases_;
};

std::unique_ptr<Surface> make_surface(const SceneSpec &spec) {
    if (spec.kind == SceneKind::kTube)
        return std::make_unique<TubeSurface>(spec.tube, spec.texture, spec.seed);
    return std::make_unique<PlaneSurface>(spec.plane, spec.texture, spec.seed);
}

} // namespace

void SceneSpec::validate() const {
    if (kind == SceneKind::kTube) {
        if (!(tube.radius > 0.0) || !(tube.amplitude > 0.0) || !(tube.period > 0.0) ||
            !(tube.ellipticity > 0.0))
            throw InvalidSpecError("SceneSpec: tube parameters must be positive");
    } else {
        if (!(plane.depth > 0.0))
            throw InvalidSpecError("SceneSpec: plane depth must be positive");
    }
    if (!(texture.amplitude > 0.0) || texture.amplitude > 0.4)
        throw InvalidSpecError("SceneSpec: texture amplitude must be in (0, 0.4]");
    if (texture.angular_cycles < 0 || texture.axial_cycles < 0 ||
        texture.mixed_angular_cycles < 0 || texture.mixed_axial_cycles < 0)
        throw InvalidSpecError("SceneSpec: texture cycle counts must be non-negative");
    if (!(occlusion_tol > 0.0))
        throw InvalidSpecError("SceneSpec: occlusion_tol must be positive");
    if (intrinsics.width <= 0 || intrinsics.height <= 0 || !(intrinsics.focal > 0.0))
        throw InvalidSpecError("SceneSpec: invalid intrinsics");
}

std::vector<FramePacket> render_sequence(const SceneSpec &spec) {
    spec.validate();
    if (spec.trajectory.size() < 2)
        throw InvalidSpecError("render_sequence: trajectory needs at least 2 poses");

    const auto surface = make_surface(spec);
    const Intrinsics &k = spec.intrinsics;
    const int w = k.width, h = k.height;
    const int n = static_cast<int>(spec.trajectory.size());

    // Interior check with a small safety margin so grazing starts cannot
    // round onto the surface.
    const double margin =
        spec.kind == SceneKind::kTube ? 0.02 * spec.tube.radius : 1e-3;
    for (int t = 0; t < n; ++t) {
        const Eigen::Vector3d c = spec.trajectory[t].pose.translation;
        if (surface->field(c) > -margin)
            throw InvalidSpecError("render_sequence: camera of frame " + std::to_string(t) +
                                   " is outside (or too close to) the surface");
    }

    struct FrameGeometry {
        std::vector<Eigen::Vector3d> world; // per pixel surface point
        std::vector<double> depth;          // camera-frame z
    };
    std::vector<FrameGeometry> geo(n);
    std::vector<FramePacket> packets(n);

    // Pass 1: per-frame ray casting (depth, image, self point map).
    for (int t = 0; t < n; ++t) {
        const PoseSE3 &cam_to_world = spec.trajectory[t].pose;
        const Eigen::Matrix3d rot = cam_to_world.rotation_matrix();
        const Eigen::Vector3d origin = cam_to_world.translation;

        geo[t].world.resize(static_cast<std::size_t>(w) * h);
        geo[t].depth.resize(static_cast<std::size_t>(w) * h);
        Grid depth(h, w, 1);
        Grid image(h, w, 3);
        Grid pm(h, w, 3);

        parallel_for(h, [&](int y) {
            float rgb[3];
            for (int x = 0; x < w; ++x) {
                const Eigen::Vector3d dir_cam((x - k.cx) / k.focal, (y - k.cy) / k.focal, 1.0);
                const Eigen::Vector3d dir_world = rot * dir_cam;
                const double tau = surface->cast(origin, dir_world);
                if (tau <= 0.0) {
                    // flag and bail out after the parallel section
                    geo[t].depth[static_cast<std::size_t>(y) * w + x] = -1.0;
                    continue;
                }
                const Eigen::Vector3d world = origin + tau * dir_world;
                const Eigen::Vector3d cam = tau * dir_cam; // camera z == tau
                geo[t].world[static_cast<std::size_t>(y) * w + x] = world;
                geo[t].depth[static_cast<std::size_t>(y) * w + x] = tau;
                depth.at(y, x, 0) = static_cast<float>(tau);
                pm.at(y, x, 0) = static_cast<float>(cam.x());
                pm.at(y, x, 1) = static_cast<float>(cam.y());
                pm.at(y, x, 2) = static_cast<float>(cam.z());
                surface->texture_rgb(world, rgb);
                image.at(y, x, 0) = rgb[0];
                image.at(y, x, 1) = rgb[1];
                image.at(y, x, 2) = rgb[2];
            }
        });
        for (double d : geo[t].depth)
            if (d <= 0.0)
                throw InvalidSpecError("render_sequence: a ray of frame " + std::to_string(t) +
                                       " missed the surface; widen the tube or recenter the camera");

        FramePacket &p = packets[t];
        p.frame_index = t;
        p.timestamp = spec.trajectory[t].timestamp;
        p.pose = cam_to_world;
        p.depth = std::move(depth);
        p.image = std::move(image);
        p.pm_self = PointMap(std::move(pm), t, t);
        p.confidence = ConfidenceMap::uniform(h, w, 1.0f);
    }

    // Pass 2: cross-frame point maps, flows, occlusion.
    for (int t = 0; t < n; ++t) {
        FramePacket &p = packets[t];
        for (int dir = -1; dir <= 1; dir += 2) {
            const int r = t + dir;
            const bool is_prev = dir < 0;
            if (r < 0 || r >= n) {
                // boundary placeholder: the frame referenced as itself
                PointMap pm_copy(p.pm_self.grid, t, t);
                FlowField zero_flow(Grid(h, w, 2), t, t);
                if (is_prev) {
                    p.pm_in_prev = std::move(pm_copy);
                    p.flow_prev = std::move(zero_flow);
                    p.occ_prev = WeightMask::ones(h, w);
                } else {
                    p.pm_in_next = std::move(pm_copy);
                    p.flow_next = std::move(zero_flow);
                    p.occ_next = WeightMask::ones(h, w);
                }
                continue;
            }

            const PoseSE3 world_to_r = spec.trajectory[r].pose.inverse();
            const Eigen::Matrix3d rot_r = spec.trajectory[r].pose.rotation_matrix();
            const Eigen::Vector3d origin_r = spec.trajectory[r].pose.translation;

            Grid pm_r(h, w, 3);
            Grid flow(h, w, 2);
            Grid occ(h, w, 1);
            parallel_for(h, [&](int y) {
                for (int x = 0; x < w; ++x) {
                    const Eigen::Vector3d &world = geo[t].world[static_cast<std::size_t>(y) * w + x];
                    const Eigen::Vector3d in_r = world_to_r.apply(world);
                    pm_r.at(y, x, 0) = static_cast<float>(in_r.x());
                    pm_r.at(y, x, 1) = static_cast<float>(in_r.y());
                    pm_r.at(y, x, 2) = static_cast<float>(in_r.z());
                    if (!(in_r.z() > kMinProjectionDepth))
                        continue; // flow 0, occluded
                    const double u = k.focal * in_r.x() / in_r.z() + k.cx;
                    const double v = k.focal * in_r.y() / in_r.z() + k.cy;
                    flow.at(y, x, 0) = static_cast<float>(u - x);
                    flow.at(y, x, 1) = static_cast<float>(v - y);
                    if (u < 0.0 || u > w - 1 || v < 0.0 || v > h - 1)
                        continue;
                    // Visible in frame r iff a fresh cast through (u, v)
                    // lands at the same depth.
                    const Eigen::Vector3d dir_cam_r((u - k.cx) / k.focal, (v - k.cy) / k.focal, 1.0);
                    const double tau_r = surface->cast(origin_r, rot_r * dir_cam_r);
                    if (tau_r > 0.0 && std::abs(tau_r - in_r.z()) <= spec.occlusion_tol)
                        occ.at(y, x, 0) = 1.0f;
                }
            });
            if (is_prev) {
                p.pm_in_prev = PointMap(std::move(pm_r), t, r);
                p.flow_prev = FlowField(std::move(flow), t, r);
                p.occ_prev = WeightMask(std::move(occ));
            } else {
                p.pm_in_next = PointMap(std::move(pm_r), t, r);
                p.flow_next = FlowField(std::move(flow), t, r);
                p.occ_next = WeightMask(std::move(occ));
            }
        }
    }
    return packets;
}

namespace {

void add_gaussian(Grid &g, double sigma, Rng &rng) {
    if (sigma <= 0.0)
        return;
    for (float &v : g.data())
        v = static_cast<float>(v + sigma * rng.gaussian());
}

Eigen::Vector3d random_unit(Rng &rng) {
    Eigen::Vector3d v;
    do {
        v = {rng.gaussian(), rng.gaussian(), rng.gaussian()};
    } while (v.norm() < 1e-12);
    return v.normalized();
}

} // namespace

FramePacket perturb(const FramePacket &packet, const PerturbNoise &noise, std::uint64_t seed) {
    if (noise.pointmap_sigma < 0.0 || noise.flow_sigma < 0.0 || noise.pose_rot_rad < 0.0 ||
        noise.pose_trans < 0.0)
        throw Error("perturb: noise magnitudes must be non-negative");

    FramePacket out = packet;
    Rng rng(seed);
    // Draw order is fixed; identical seeds give identical packets.
    add_gaussian(out.pm_self.grid, noise.pointmap_sigma, rng);
    add_gaussian(out.pm_in_prev.grid, noise.pointmap_sigma, rng);
    add_gaussian(out.pm_in_next.grid, noise.pointmap_sigma, rng);
    add_gaussian(out.flow_prev.grid, noise.flow_sigma, rng);
    add_gaussian(out.flow_next.grid, noise.flow_sigma, rng);
    if (noise.pose_rot_rad > 0.0) {
        const Eigen::AngleAxisd tweak(noise.pose_rot_rad, random_unit(rng));
        out.pose = PoseSE3(Eigen::Quaterniond(tweak) * packet.pose.rotation,
                           out.pose.translation);
    }
    if (noise.pose_trans > 0.0)
        out.pose.translation += noise.pose_trans * random_unit(rng);

    const bool touched = noise.pointmap_sigma > 0.0 || noise.flow_sigma > 0.0 ||
                         noise.pose_rot_rad > 0.0 || noise.pose_trans > 0.0;
    out.self_consistent = packet.self_consistent && !touched;
    return out;
}

GeometryLossInputs geometry_inputs_from_packets(const FramePacket &prev, const FramePacket &cur) {
    if (cur.frame_index != prev.frame_index + 1)
        throw Error("geometry_inputs_from_packets: packets are not consecutive frames");
    GeometryLossInputs in;
    in.x_t_t = cur.pm_self;
    in.x_tm1_tm1 = prev.pm_self;
    in.x_tm1_t = prev.pm_in_next;
    in.x_t_tm1 = cur.pm_in_prev;
    in.flow_t_from_tm1 = cur.flow_prev;
    in.flow_tm1_from_t = prev.flow_next;
    in.occ_t_from_tm1 = cur.occ_prev;
    in.occ_tm1_from_t = prev.occ_next;
    in.pose_t_to_tm1 = prev.pose.inverse() * cur.pose;
    in.pose_tm1_to_t = cur.pose.inverse() * prev.pose;
    return in;
}

Trajectory tube_trajectory(const TubeParams &tube, int frames, double start_s, double step_s,
                           double lateral_offset, double roll_step_rad, double pitch_rad) {
    Trajectory traj;
    for (int i = 0; i < frames; ++i) {
        const double s = start_s + i * step_s;
        const double u = 2.0 * M_PI * s / tube.period;
        const Eigen::Vector3d pos(tube.amplitude * std::sin(u) + lateral_offset,
                                  tube.amplitude * tube.ellipticity * std::cos(u), s);
        const Eigen::Vector3d tangent =
            Eigen::Vector3d(tube.amplitude * 2.0 * M_PI / tube.period * std::cos(u),
                            -tube.amplitude * tube.ellipticity * 2.0 * M_PI / tube.period *
                                std::sin(u),
                            1.0)
                .normalized();
        const Eigen::Vector3d up_hint(0.0, 1.0, 0.0);
        const Eigen::Vector3d right = up_hint.cross(tangent).normalized();
        const Eigen::Vector3d down = tangent.cross(right);
        Eigen::Matrix3d rot;
        rot.col(0) = right;
        rot.col(1) = down;
        rot.col(2) = tangent;
        const Eigen::Matrix3d tilted =
            rot * Eigen::AngleAxisd(pitch_rad, Eigen::Vector3d::UnitX()).toRotationMatrix() *
            Eigen::AngleAxisd(roll_step_rad * i, Eigen::Vector3d::UnitZ()).toRotationMatrix();
        traj.append(0.1 * i, PoseSE3::from_matrix(tilted, pos));
    }
    return traj;
}

Trajectory plane_trajectory(int frames, const Eigen::Vector3d &step, double yaw_step_rad) {
    Trajectory traj;
    for (int i = 0; i < frames; ++i) {
        const Eigen::Matrix3d rot =
            Eigen::AngleAxisd(yaw_step_rad * i, Eigen::Vector3d::UnitY()).toRotationMatrix();
        traj.append(0.1 * i, PoseSE3::from_matrix(rot, static_cast<double>(i) * step));
    }
    return traj;
}

} // namespace colonmap
