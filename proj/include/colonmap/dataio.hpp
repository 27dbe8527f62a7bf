#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "colonmap/camera.hpp"
#include "colonmap/drm.hpp"
#include "colonmap/losses.hpp"
#include "colonmap/pointmap.hpp"
#include "colonmap/pose.hpp"
#include "colonmap/synth.hpp"

namespace colonmap {

// FMAP: 24-byte header (magic "FMAP", u32 version=1, height, width, channels,
// dtype=0 for float32, all little-endian) followed by the row-major,
// channel-interleaved float32 payload. Round trips are bit-exact.
inline constexpr std::uint32_t kFmapVersion = 1;
inline constexpr std::size_t kDefaultMaxFmapBytes = std::size_t{1} << 30;

Grid read_fmap(const std::filesystem::path &path,
               std::size_t max_payload_bytes = kDefaultMaxFmapBytes);
void write_fmap(const std::filesystem::path &path, const Grid &grid);

struct FmapHeader {
    std::uint32_t height = 0, width = 0, channels = 0;
};
FmapHeader peek_fmap_header(const std::filesystem::path &path);

// Binary PPM (P6, maxval 255). Writing clamps [0,1] and rounds half up;
// reading maps sample/255 back to [0,1]. Grids must have 3 channels.
Grid read_ppm(const std::filesystem::path &path);
void write_ppm(const std::filesystem::path &path, const Grid &grid);

// TUM-compatible trajectory text: "timestamp tx ty tz qx qy qz qw" per line,
// '#' lines ignored.
Trajectory read_trajectory(const std::filesystem::path &path);
void write_trajectory(const std::filesystem::path &path, const Trajectory &trajectory);

Intrinsics read_intrinsics_json(const std::filesystem::path &path);
void write_intrinsics_json(const std::filesystem::path &path, const Intrinsics &intrinsics);

// Scene description for the synth command. Either an explicit "trajectory"
// (rows of [timestamp tx ty tz qx qy qz qw]) or a "motion" generator block.
// Unknown keys are rejected.
SceneSpec scene_spec_from_json(const nlohmann::json &j);
SceneSpec read_scene_spec(const std::filesystem::path &path);

// Applies the keys of a JSON object onto a LossConfig (strict: unknown keys
// are rejected).
void apply_loss_config_json(LossConfig &cfg, const nlohmann::json &j);

// Fusion-adapter container: a flat stream of FMAP chunks, 7 per adapter
// (meta [level, pool_window, vit_ch, cnn_ch], then weights+bias of the
// channel, spatial, and zero convolutions; kernel chunks are
// out x in grids with kh*kw channels).
std::vector<FusionAdapterParams> read_adapters(const std::filesystem::path &path);
void write_adapters(const std::filesystem::path &path,
                    const std::vector<FusionAdapterParams> &adapters);

// Dataset directory layout:
//   intrinsics.json
//   trajectory.txt
//   frames/NNNNNN.{image.ppm, depth.fmap, pm_self.fmap, pm_in_prev.fmap,
//                  flow_prev.fmap, occ_prev.fmap, conf.fmap}
// Frame indices are contiguous from 0 and match the trajectory length.
// Frame 0's prev-referencing files hold identity placeholders.
void write_dataset(const std::filesystem::path &dir, const Intrinsics &intrinsics,
                   const std::vector<FramePacket> &packets);

struct DatasetFrame {
    int index = 0;
    Grid image;
    Grid depth;
    PointMap pm_self;
    PointMap pm_in_prev;
    FlowField flow_prev;
    WeightMask occ_prev;
    ConfidenceMap conf;
};

// Validated handle with lazy per-frame reads. load() checks the whole layout
// up front (existence and header dims of every file) and reports all
// violations in one LayoutError.
class Dataset {
  public:
    static Dataset load(const std::filesystem::path &dir);

    int frame_count() const { return static_cast<int>(trajectory_.size()); }
    const Trajectory &trajectory() const { return trajectory_; }
    const Intrinsics &intrinsics() const { return intrinsics_; }
    DatasetFrame frame(int index) const;

  private:
    std::filesystem::path dir_;
    Intrinsics intrinsics_;
    Trajectory trajectory_;
};

} // namespace colonmap
