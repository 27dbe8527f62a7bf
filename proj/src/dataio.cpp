#include "colonmap/dataio.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace colonmap {

namespace fs = std::filesystem;

namespace {

void put_u32(std::ostream &out, std::uint32_t v) {
    const unsigned char bytes[4] = {static_cast<unsigned char>(v & 0xff),
                                    static_cast<unsigned char>((v >> 8) & 0xff),
                                    static_cast<unsigned char>((v >> 16) & 0xff),
                                    static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char *>(bytes), 4);
}

std::uint32_t get_u32(std::istream &in, const std::string &path, const char *what) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char *>(bytes), 4);
    if (in.gcount() != 4)
        throw FormatError(path + ": truncated while reading " + what + " (got " +
                          std::to_string(in.gcount()) + " of 4 header bytes)");
    return static_cast<std::uint32_t>(bytes[0]) | (static_cast<std::uint32_t>(bytes[1]) << 8) |
           (static_cast<std::uint32_t>(bytes[2]) << 16) |
           (static_cast<std::uint32_t>(bytes[3]) << 24);
}

struct FmapChunkHeader {
    std::uint32_t height, width, channels;
};

// Reads and validates one chunk header; returns false on clean EOF.
bool read_fmap_chunk_header(std::istream &in, const std::string &path, FmapChunkHeader &hdr,
                            std::size_t max_payload_bytes) {
    char magic[4];
    in.read(magic, 4);
    if (in.gcount() == 0 && in.eof())
        return false;
    if (in.gcount() != 4 || magic[0] != 'F' || magic[1] != 'M' || magic[2] != 'A' ||
        magic[3] != 'P')
        throw FormatError(path + ": bad magic (expected \"FMAP\")");
    const std::uint32_t version = get_u32(in, path, "version");
    if (version != kFmapVersion)
        throw FormatError(path + ": unsupported version " + std::to_string(version));
    hdr.height = get_u32(in, path, "height");
    hdr.width = get_u32(in, path, "width");
    hdr.channels = get_u32(in, path, "channels");
    const std::uint32_t dtype = get_u32(in, path, "dtype");
    if (dtype != 0)
        throw FormatError(path + ": unsupported dtype " + std::to_string(dtype));
    if (hdr.height == 0 || hdr.width == 0 || hdr.channels == 0)
        throw FormatError(path + ": zero dimension in header");
    const std::size_t payload = static_cast<std::size_t>(hdr.height) * hdr.width * hdr.channels * 4;
    if (payload > max_payload_bytes)
        throw FormatError(path + ": header claims " + std::to_string(payload) +
                          " payload bytes, above the " + std::to_string(max_payload_bytes) +
                          "-byte limit");
    return true;
}

Grid read_fmap_payload(std::istream &in, const std::string &path, const FmapChunkHeader &hdr) {
    const std::size_t count = static_cast<std::size_t>(hdr.height) * hdr.width * hdr.channels;
    std::vector<float> data(count);
    in.read(reinterpret_cast<char *>(data.data()), static_cast<std::streamsize>(count * 4));
    const auto got = static_cast<std::size_t>(in.gcount());
    if (got != count * 4)
        throw FormatError(path + ": truncated payload, expected " + std::to_string(count * 4) +
                          " bytes, found " + std::to_string(got));
    if constexpr (std::endian::native != std::endian::little) {
        for (float &f : data) {
            auto u = std::bit_cast<std::uint32_t>(f);
            u = ((u & 0xff) << 24) | ((u & 0xff00) << 8) | ((u >> 8) & 0xff00) | (u >> 24);
            f = std::bit_cast<float>(u);
        }
    }
    return Grid(static_cast<int>(hdr.height), static_cast<int>(hdr.width),
                static_cast<int>(hdr.channels), std::move(data));
}

void write_fmap_chunk(std::ostream &out, const Grid &grid) {
    grid.check_finite("write_fmap");
    out.write("FMAP", 4);
    put_u32(out, kFmapVersion);
    put_u32(out, static_cast<std::uint32_t>(grid.height()));
    put_u32(out, static_cast<std::uint32_t>(grid.width()));
    put_u32(out, static_cast<std::uint32_t>(grid.channels()));
    put_u32(out, 0); // float32
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char *>(grid.data().data()),
                  static_cast<std::streamsize>(grid.size() * 4));
    } else {
        for (float f : grid.data())
            put_u32(out, std::bit_cast<std::uint32_t>(f));
    }
}

std::ifstream open_binary(const fs::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw FormatError(path.string() + ": cannot open for reading");
    return in;
}

std::ofstream create_binary(const fs::path &path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw FormatError(path.string() + ": cannot open for writing");
    return out;
}

} // namespace

Grid read_fmap(const fs::path &path, std::size_t max_payload_bytes) {
    std::ifstream in = open_binary(path);
    FmapChunkHeader hdr;
    if (!read_fmap_chunk_header(in, path.string(), hdr, max_payload_bytes))
        throw FormatError(path.string() + ": empty file");
    return read_fmap_payload(in, path.string(), hdr);
}

void write_fmap(const fs::path &path, const Grid &grid) {
    std::ofstream out = create_binary(path);
    write_fmap_chunk(out, grid);
    if (!out)
        throw FormatError(path.string() + ": write failed");
}

FmapHeader peek_fmap_header(const fs::path &path) {
    std::ifstream in = open_binary(path);
    FmapChunkHeader hdr;
    if (!read_fmap_chunk_header(in, path.string(), hdr, kDefaultMaxFmapBytes))
        throw FormatError(path.string() + ": empty file");
    return {hdr.height, hdr.width, hdr.channels};
}

namespace {

// PPM header token reader: skips whitespace and '#' comment lines.
std::string ppm_token(std::istream &in, const std::string &path) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c))
            continue;
        tok.push_back(static_cast<char>(c));
        while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#')
            tok.push_back(static_cast<char>(in.get()));
        return tok;
    }
    throw FormatError(path + ": truncated PPM header");
}

} // namespace

Grid read_ppm(const fs::path &path) {
    std::ifstream in = open_binary(path);
    const std::string p = path.string();
    if (ppm_token(in, p) != "P6")
        throw FormatError(p + ": not a binary PPM (P6) file");
    int w, h, maxval;
    try {
        w = std::stoi(ppm_token(in, p));
        h = std::stoi(ppm_token(in, p));
        maxval = std::stoi(ppm_token(in, p));
    } catch (const std::exception &) {
        throw FormatError(p + ": malformed PPM header");
    }
    if (w <= 0 || h <= 0)
        throw FormatError(p + ": non-positive PPM dimensions");
    if (maxval != 255)
        throw FormatError(p + ": unsupported maxval " + std::to_string(maxval) +
                          " (only 255 is supported)");
    in.get(); // single whitespace after maxval

    const std::size_t count = static_cast<std::size_t>(w) * h * 3;
    std::vector<unsigned char> bytes(count);
    in.read(reinterpret_cast<char *>(bytes.data()), static_cast<std::streamsize>(count));
    if (static_cast<std::size_t>(in.gcount()) != count)
        throw FormatError(p + ": truncated pixel data, expected " + std::to_string(count) +
                          " bytes, found " + std::to_string(in.gcount()));

    Grid g(h, w, 3);
    for (std::size_t i = 0; i < count; ++i)
        g.data()[i] = static_cast<float>(bytes[i]) / 255.0f;
    return g;
}

void write_ppm(const fs::path &path, const Grid &grid) {
    grid.require_channels(3, "write_ppm");
    grid.check_finite("write_ppm");
    std::ofstream out = create_binary(path);
    out << "P6\n" << grid.width() << " " << grid.height() << "\n255\n";
    std::vector<unsigned char> bytes(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = std::clamp(static_cast<double>(grid.data()[i]), 0.0, 1.0);
        bytes[i] = static_cast<unsigned char>(std::floor(v * 255.0 + 0.5));
    }
    out.write(reinterpret_cast<const char *>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw FormatError(path.string() + ": write failed");
}

Trajectory read_trajectory(const fs::path &path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError(path.string() + ": cannot open for reading");
    Trajectory traj;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ss(line);
        double ts, tx, ty, tz, qx, qy, qz, qw;
        if (!(ss >> ts >> tx >> ty >> tz >> qx >> qy >> qz >> qw))
            throw FormatError(path.string() + ":" + std::to_string(line_no) +
                              ": expected 8 fields (timestamp tx ty tz qx qy qz qw)");
        traj.append(ts, PoseSE3(Eigen::Quaterniond(qw, qx, qy, qz), {tx, ty, tz}));
    }
    return traj;
}

void write_trajectory(const fs::path &path, const Trajectory &trajectory) {
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw FormatError(path.string() + ": cannot open for writing");
    out << "# timestamp tx ty tz qx qy qz qw\n";
    char buf[512];
    for (const TimedPose &e : trajectory.entries()) {
        const Eigen::Quaterniond &q = e.pose.rotation;
        const Eigen::Vector3d &t = e.pose.translation;
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n",
                      e.timestamp, t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w());
        out << buf;
    }
    if (!out)
        throw FormatError(path.string() + ": write failed");
}

Intrinsics read_intrinsics_json(const fs::path &path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError(path.string() + ": cannot open for reading");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    for (const char *key : {"focal", "cx", "cy", "width", "height"})
        if (!j.contains(key))
            throw FormatError(path.string() + ": missing key \"" + key + "\"");
    return Intrinsics(j["focal"].get<double>(), j["cx"].get<double>(), j["cy"].get<double>(),
                      j["width"].get<int>(), j["height"].get<int>());
}

void write_intrinsics_json(const fs::path &path, const Intrinsics &k) {
    nlohmann::json j{{"focal", k.focal},
                     {"cx", k.cx},
                     {"cy", k.cy},
                     {"width", k.width},
                     {"height", k.height}};
    std::ofstream out(path, std::ios::trunc);
    if (!out)
        throw FormatError(path.string() + ": cannot open for writing");
    out << j.dump(2) << "\n";
}

namespace {

Grid kernel_to_grid(const ConvKernel &k) {
    Grid g(k.out_channels, k.in_channels, k.kh * k.kw);
    for (int o = 0; o < k.out_channels; ++o)
        for (int i = 0; i < k.in_channels; ++i)
            for (int ky = 0; ky < k.kh; ++ky)
                for (int kx = 0; kx < k.kw; ++kx)
                    g.at(o, i, ky * k.kw + kx) = k.w(o, i, ky, kx);
    return g;
}

ConvKernel grid_to_kernel(const Grid &g, int kh, int kw, const std::string &path) {
    if (g.channels() != kh * kw)
        throw FormatError(path + ": kernel chunk has " + std::to_string(g.channels()) +
                          " taps, expected " + std::to_string(kh * kw));
    ConvKernel k(g.height(), g.width(), kh, kw);
    for (int o = 0; o < k.out_channels; ++o)
        for (int i = 0; i < k.in_channels; ++i)
            for (int ky = 0; ky < kh; ++ky)
                for (int kx = 0; kx < kw; ++kx)
                    k.w(o, i, ky, kx) = g.at(o, i, ky * kw + kx);
    return k;
}

Grid bias_to_grid(const std::vector<float> &bias) {
    Grid g(1, 1, static_cast<int>(bias.size()));
    g.data() = bias;
    return g;
}

} // namespace

void write_adapters(const fs::path &path, const std::vector<FusionAdapterParams> &adapters) {
    std::ofstream out = create_binary(path);
    for (const FusionAdapterParams &a : adapters) {
        a.validate();
        Grid meta(1, 1, 4);
        meta.at(0, 0, 0) = static_cast<float>(a.level);
        meta.at(0, 0, 1) = static_cast<float>(a.pool_window);
        meta.at(0, 0, 2) = static_cast<float>(a.zero_conv.out_channels);
        meta.at(0, 0, 3) = static_cast<float>(a.channel_proj.in_channels);
        write_fmap_chunk(out, meta);
        write_fmap_chunk(out, kernel_to_grid(a.channel_proj));
        write_fmap_chunk(out, bias_to_grid(a.channel_proj.bias));
        write_fmap_chunk(out, kernel_to_grid(a.spatial_proj));
        write_fmap_chunk(out, bias_to_grid(a.spatial_proj.bias));
        write_fmap_chunk(out, kernel_to_grid(a.zero_conv));
        write_fmap_chunk(out, bias_to_grid(a.zero_conv.bias));
    }
    if (!out)
        throw FormatError(path.string() + ": write failed");
}

std::vector<FusionAdapterParams> read_adapters(const fs::path &path) {
    std::ifstream in = open_binary(path);
    const std::string p = path.string();
    std::vector<FusionAdapterParams> adapters;
    FmapChunkHeader hdr;
    while (read_fmap_chunk_header(in, p, hdr, kDefaultMaxFmapBytes)) {
        const Grid meta = read_fmap_payload(in, p, hdr);
        if (meta.height() != 1 || meta.width() != 1 || meta.channels() != 4)
            throw FormatError(p + ": expected 1x1x4 adapter meta chunk");
        FusionAdapterParams a;
        a.level = static_cast<int>(meta.at(0, 0, 0));
        a.pool_window = static_cast<int>(meta.at(0, 0, 1));

        auto next_grid = [&]() {
            FmapChunkHeader h;
            if (!read_fmap_chunk_header(in, p, h, kDefaultMaxFmapBytes))
                throw FormatError(p + ": truncated adapter record");
            return read_fmap_payload(in, p, h);
        };
        auto read_bias = [&](ConvKernel &k) {
            const Grid b = next_grid();
            if (b.height() != 1 || b.width() != 1 || b.channels() != k.out_channels)
                throw FormatError(p + ": bias chunk does not match kernel");
            k.bias = b.data();
        };

        a.channel_proj = grid_to_kernel(next_grid(), 1, 1, p);
        read_bias(a.channel_proj);
        a.spatial_proj = grid_to_kernel(next_grid(), 3, 3, p);
        read_bias(a.spatial_proj);
        a.zero_conv = grid_to_kernel(next_grid(), 1, 1, p);
        read_bias(a.zero_conv);
        a.validate();
        adapters.push_back(std::move(a));
    }
    return adapters;
}

namespace {

std::string frame_stem(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06d", index);
    return buf;
}

const char *const kFrameSuffixes[] = {"image.ppm",     "depth.fmap",    "pm_self.fmap",
                                      "pm_in_prev.fmap", "flow_prev.fmap", "occ_prev.fmap",
                                      "conf.fmap"};

} // namespace

void write_dataset(const fs::path &dir, const Intrinsics &intrinsics,
                   const std::vector<FramePacket> &packets) {
    fs::create_directories(dir / "frames");
    write_intrinsics_json(dir / "intrinsics.json", intrinsics);

    Trajectory traj;
    for (const FramePacket &p : packets)
        traj.append(p.timestamp, p.pose);
    write_trajectory(dir / "trajectory.txt", traj);

    for (const FramePacket &p : packets) {
        const fs::path base = dir / "frames" / frame_stem(p.frame_index);
        auto with = [&](const char *suffix) {
            return fs::path(base.string() + "." + suffix);
        };
        write_ppm(with("image.ppm"), p.image);
        write_fmap(with("depth.fmap"), p.depth);
        write_fmap(with("pm_self.fmap"), p.pm_self.grid);
        write_fmap(with("pm_in_prev.fmap"), p.pm_in_prev.grid);
        write_fmap(with("flow_prev.fmap"), p.flow_prev.grid);
        write_fmap(with("occ_prev.fmap"), p.occ_prev.grid);
        write_fmap(with("conf.fmap"), p.confidence.grid);
    }
}

Dataset Dataset::load(const fs::path &dir) {
    std::vector<std::string> problems;
    Dataset ds;
    ds.dir_ = dir;

    if (!fs::is_directory(dir))
        throw LayoutError(dir.string() + ": not a directory");

    bool have_meta = true;
    try {
        ds.intrinsics_ = read_intrinsics_json(dir / "intrinsics.json");
    } catch (const Error &e) {
        problems.push_back(e.what());
        have_meta = false;
    }
    try {
        ds.trajectory_ = read_trajectory(dir / "trajectory.txt");
        if (ds.trajectory_.empty())
            problems.push_back((dir / "trajectory.txt").string() + ": empty trajectory");
    } catch (const Error &e) {
        problems.push_back(e.what());
        have_meta = false;
    }

    if (have_meta) {
        const int n = static_cast<int>(ds.trajectory_.size());
        for (int i = 0; i < n; ++i) {
            const fs::path base = dir / "frames" / frame_stem(i);
            for (const char *suffix : kFrameSuffixes) {
                const fs::path file(base.string() + "." + std::string(suffix));
                if (!fs::exists(file)) {
                    problems.push_back(file.string() + ": missing");
                    continue;
                }
                if (file.extension() == ".fmap") {
                    try {
                        const FmapHeader h = peek_fmap_header(file);
                        if (static_cast<int>(h.height) != ds.intrinsics_.height ||
                            static_cast<int>(h.width) != ds.intrinsics_.width)
                            problems.push_back(file.string() + ": dims " +
                                               std::to_string(h.height) + "x" +
                                               std::to_string(h.width) +
                                               " do not match intrinsics");
                    } catch (const Error &e) {
                        problems.push_back(e.what());
                    }
                }
            }
        }
        // A stray extra frame would make indices non-contiguous with the
        // trajectory; flag it.
        const fs::path extra = dir / "frames" / (frame_stem(n) + ".image.ppm");
        if (fs::exists(extra))
            problems.push_back(extra.string() + ": frame index beyond trajectory length");
    }

    if (!problems.empty()) {
        std::string msg = dir.string() + ": invalid dataset layout:";
        for (const std::string &p : problems)
            msg += "\n  - " + p;
        throw LayoutError(msg);
    }
    return ds;
}

namespace {

void reject_unknown_keys(const nlohmann::json &j, std::initializer_list<const char *> known,
                         const std::string &where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char *k : known)
            if (it.key() == k)
                ok = true;
        if (!ok)
            throw FormatError(where + ": unknown key \"" + it.key() + "\"");
    }
}

} // namespace

SceneSpec scene_spec_from_json(const nlohmann::json &j) {
    reject_unknown_keys(j,
                        {"kind", "width", "height", "focal", "frames", "seed", "tube", "plane",
                         "texture", "motion", "trajectory", "occlusion_tol"},
                        "scene spec");
    SceneSpec spec;
    const std::string kind = j.value("kind", "tube");
    if (kind == "tube")
        spec.kind = SceneKind::kTube;
    else if (kind == "plane")
        spec.kind = SceneKind::kPlane;
    else
        throw FormatError("scene spec: kind must be \"tube\" or \"plane\"");

    if (!j.contains("width") || !j.contains("height") || !j.contains("focal"))
        throw FormatError("scene spec: width, height and focal are required");
    spec.intrinsics = Intrinsics::centered(j["focal"].get<double>(), j["width"].get<int>(),
                                           j["height"].get<int>());
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.occlusion_tol = j.value("occlusion_tol", 1e-3);

    if (j.contains("tube")) {
        const auto &t = j["tube"];
        reject_unknown_keys(t, {"radius", "amplitude", "period", "ellipticity"}, "scene spec tube");
        spec.tube.radius = t.value("radius", spec.tube.radius);
        spec.tube.amplitude = t.value("amplitude", spec.tube.amplitude);
        spec.tube.period = t.value("period", spec.tube.period);
        spec.tube.ellipticity = t.value("ellipticity", spec.tube.ellipticity);
    }
    if (j.contains("plane")) {
        reject_unknown_keys(j["plane"], {"depth"}, "scene spec plane");
        spec.plane.depth = j["plane"].value("depth", spec.plane.depth);
    }
    if (j.contains("texture")) {
        const auto &t = j["texture"];
        reject_unknown_keys(
            t, {"amplitude", "angular_cycles", "axial_cycles", "mixed_angular_cycles",
                "mixed_axial_cycles"},
            "scene spec texture");
        spec.texture.amplitude = t.value("amplitude", spec.texture.amplitude);
        spec.texture.angular_cycles = t.value("angular_cycles", spec.texture.angular_cycles);
        spec.texture.axial_cycles = t.value("axial_cycles", spec.texture.axial_cycles);
        spec.texture.mixed_angular_cycles =
            t.value("mixed_angular_cycles", spec.texture.mixed_angular_cycles);
        spec.texture.mixed_axial_cycles =
            t.value("mixed_axial_cycles", spec.texture.mixed_axial_cycles);
    }

    if (j.contains("trajectory") == j.contains("motion"))
        throw FormatError("scene spec: exactly one of \"trajectory\" or \"motion\" is required");

    if (j.contains("trajectory")) {
        Trajectory traj;
        for (const auto &row : j["trajectory"]) {
            if (!row.is_array() || row.size() != 8)
                throw FormatError("scene spec: trajectory rows must be "
                                  "[timestamp tx ty tz qx qy qz qw]");
            traj.append(row[0].get<double>(),
                        PoseSE3(Eigen::Quaterniond(row[7].get<double>(), row[4].get<double>(),
                                                   row[5].get<double>(), row[6].get<double>()),
                                {row[1].get<double>(), row[2].get<double>(), row[3].get<double>()}));
        }
        spec.trajectory = std::move(traj);
    } else {
        const auto &m = j["motion"];
        const int frames = j.value("frames", 2);
        if (spec.kind == SceneKind::kTube) {
            reject_unknown_keys(m, {"start", "step", "lateral_offset", "roll_step", "pitch"},
                                "scene spec motion");
            spec.trajectory =
                tube_trajectory(spec.tube, frames, m.value("start", 0.0), m.value("step", 0.05),
                                m.value("lateral_offset", 0.0), m.value("roll_step", 0.0),
                                m.value("pitch", 0.0));
        } else {
            reject_unknown_keys(m, {"step", "yaw_step"}, "scene spec motion");
            Eigen::Vector3d step(0.0, 0.0, 0.0);
            if (m.contains("step")) {
                const auto &s = m["step"];
                if (!s.is_array() || s.size() != 3)
                    throw FormatError("scene spec: plane motion step must be [dx, dy, dz]");
                step = {s[0].get<double>(), s[1].get<double>(), s[2].get<double>()};
            }
            spec.trajectory = plane_trajectory(frames, step, m.value("yaw_step", 0.0));
        }
    }
    return spec;
}

SceneSpec read_scene_spec(const fs::path &path) {
    std::ifstream in(path);
    if (!in)
        throw FormatError(path.string() + ": cannot open for reading");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception &e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return scene_spec_from_json(j);
}

void apply_loss_config_json(LossConfig &cfg, const nlohmann::json &j) {
    reject_unknown_keys(j,
                        {"alpha", "beta", "lambda_conf", "lambda_photo", "lambda_flow",
                         "lambda_pose", "ssim_c1", "ssim_c2", "ssim_window", "conf_floor",
                         "pose_term_literal"},
                        "loss config");
    cfg.alpha = j.value("alpha", cfg.alpha);
    cfg.beta = j.value("beta", cfg.beta);
    cfg.lambda_conf = j.value("lambda_conf", cfg.lambda_conf);
    cfg.lambda_photo = j.value("lambda_photo", cfg.lambda_photo);
    cfg.lambda_flow = j.value("lambda_flow", cfg.lambda_flow);
    cfg.lambda_pose = j.value("lambda_pose", cfg.lambda_pose);
    cfg.ssim_c1 = j.value("ssim_c1", cfg.ssim_c1);
    cfg.ssim_c2 = j.value("ssim_c2", cfg.ssim_c2);
    cfg.ssim_window = j.value("ssim_window", cfg.ssim_window);
    cfg.conf_floor = j.value("conf_floor", cfg.conf_floor);
    cfg.pose_term_literal = j.value("pose_term_literal", cfg.pose_term_literal);
    cfg.validate();
}

DatasetFrame Dataset::frame(int index) const {
    if (index < 0 || index >= frame_count())
        throw Error("Dataset::frame: index " + std::to_string(index) + " out of range");
    const fs::path base = dir_ / "frames" / frame_stem(index);
    auto with = [&](const char *suffix) {
        return fs::path(base.string() + "." + std::string(suffix));
    };
    DatasetFrame f;
    f.index = index;
    f.image = read_ppm(with("image.ppm"));
    f.depth = read_fmap(with("depth.fmap"));
    const int prev = index > 0 ? index - 1 : 0;
    f.pm_self = PointMap(read_fmap(with("pm_self.fmap")), index, index);
    f.pm_in_prev = PointMap(read_fmap(with("pm_in_prev.fmap")), index, prev);
    f.flow_prev = FlowField(read_fmap(with("flow_prev.fmap")), index, prev);
    f.occ_prev = WeightMask(read_fmap(with("occ_prev.fmap")));
    f.conf = ConfidenceMap(read_fmap(with("conf.fmap")));
    return f;
}

} // namespace colonmap
