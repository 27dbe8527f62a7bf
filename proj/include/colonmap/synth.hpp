#pragma once

#include <cstdint>
#include <vector>

#include "colonmap/camera.hpp"
#include "colonmap/losses.hpp"
#include "colonmap/pointmap.hpp"
#include "colonmap/pose.hpp"

namespace colonmap {

enum class SceneKind { kTube, kPlane };

// Tube around the centerline c(s) = (A sin(2 pi s / P), A e cos(2 pi s / P), s)
// with a circular cross-section of radius R in each z-plane. Colon-like when
// the camera travels down the interior.
struct TubeParams {
    double radius = 0.5;
    double amplitude = 0.6;
    double period = 6.0;
    double ellipticity = 0.7;
};

// Fronto-parallel wall at world z = depth.
struct PlaneParams {
    double depth = 2.0;
};

// Band-limited procedural texture over the surface parameters: a base of 0.5
// plus three sinusoids whose amplitudes sum to `amplitude` (<= 0.4, keeping
// values inside [0, 1]). Angular/axial frequencies are integer cycle counts,
// so the texture is continuous around the tube and scale-free along it.
// Phases are derived from the scene seed, per channel.
struct TextureParams {
    double amplitude = 0.35;
    int angular_cycles = 3;
    int axial_cycles = 2;
    int mixed_angular_cycles = 5;
    int mixed_axial_cycles = 1;
};

struct SceneSpec {
    SceneKind kind = SceneKind::kTube;
    TubeParams tube;
    PlaneParams plane;
    TextureParams texture;
    Intrinsics intrinsics;
    Trajectory trajectory; // camera-to-world poses
    std::uint64_t seed = 0;
    double occlusion_tol = 1e-3;

    void validate() const;
};

// Everything the losses consume for one frame, rendered analytically.
// Cross-frame fields reference the adjacent frames; on the first (last)
// frame the prev (next) fields are identity placeholders: zero flow, all-one
// occlusion, pm_in_prev == pm_self.
struct FramePacket {
    int frame_index = 0;
    double timestamp = 0.0;
    PoseSE3 pose; // camera-to-world
    Grid image;   // 3 channels in [0, 1]
    Grid depth;   // 1 channel, camera-frame z
    PointMap pm_self;    // frame t points in frame t coordinates
    PointMap pm_in_prev; // frame t points in frame t-1 coordinates
    PointMap pm_in_next; // frame t points in frame t+1 coordinates
    FlowField flow_prev; // on t's grid, pointing into frame t-1
    FlowField flow_next; // on t's grid, pointing into frame t+1
    WeightMask occ_prev;
    WeightMask occ_next;
    ConfidenceMap confidence; // identically 1
    bool self_consistent = true;
};

// Ray-casts the whole sequence. Depth is the exact surface intersection
// (bisection to 1e-9 along each ray), flow the exact reprojection of the
// surface point, occlusion a depth-consistency test at occlusion_tol.
// Throws InvalidSpecError when a camera leaves the surface interior or a
// ray misses the surface.
std::vector<FramePacket> render_sequence(const SceneSpec &spec);

struct PerturbNoise {
    double pointmap_sigma = 0.0;
    double flow_sigma = 0.0;
    double pose_rot_rad = 0.0; // rotation by exactly this angle, random axis
    double pose_trans = 0.0;   // translation by exactly this length, random direction
};

// Seeded Gaussian perturbation of point maps and flows plus a fixed-magnitude
// random pose offset. Output no longer satisfies the packet invariants and is
// marked self_consistent = false.
FramePacket perturb(const FramePacket &packet, const PerturbNoise &noise, std::uint64_t seed);

// Assembles the geometry-consistency inputs for the frame pair
// (prev = t-1, cur = t). Poses come from the packets' ground-truth
// trajectory entries.
GeometryLossInputs geometry_inputs_from_packets(const FramePacket &prev, const FramePacket &cur);

// Trajectory helpers used by tests and the CLI synth command. The tube
// trajectory follows the centerline (optionally laterally offset, with a
// gentle per-frame roll); pitch_rad tilts the view from the tangent toward
// the wall, which keeps every ray at moderate incidence instead of staring
// down the vanishing axis. The plane trajectory translates a camera that
// looks straight at the wall.
Trajectory tube_trajectory(const TubeParams &tube, int frames, double start_s, double step_s,
                           double lateral_offset = 0.0, double roll_step_rad = 0.0,
                           double pitch_rad = 0.0);
Trajectory plane_trajectory(int frames, const Eigen::Vector3d &step,
                            double yaw_step_rad = 0.0);

} // namespace colonmap
