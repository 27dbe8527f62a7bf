// colonmap: scene generation, calibration, loss computation and evaluation
// for point-map geometry pipelines. JSON on stdout, diagnostics on stderr.
// Exit codes: 0 success, 1 self-check failure, 2 input/spec error,
// 3 numerically degenerate input.

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "colonmap/dataio.hpp"
#include "colonmap/geometry.hpp"
#include "colonmap/losses.hpp"
#include "colonmap/metrics.hpp"
#include "colonmap/rng.hpp"
#include "colonmap/version.hpp"
#include "colonmap/warp.hpp"
#include "selfcheck.hpp"

namespace {

using colonmap::Alignment;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitSelfCheckFailed = 1;
constexpr int kExitBadInput = 2;
constexpr int kExitDegenerate = 3;

void emit(const json &j) { std::cout << j.dump(2) << "\n"; }

json loss_config_json(const colonmap::LossConfig &cfg) {
    return colonmap::LossReport{}.to_json(cfg)["config"];
}

Alignment parse_alignment(const std::string &name) {
    if (name == "sim3")
        return Alignment::kSim3;
    if (name == "se3")
        return Alignment::kSE3;
    if (name == "none")
        return Alignment::kNone;
    throw colonmap::Error("unknown alignment \"" + name + "\" (expected sim3, se3 or none)");
}

// --- synth ---------------------------------------------------------------

int cmd_synth(const std::string &spec_path, const std::string &out_dir) {
    const colonmap::SceneSpec spec = colonmap::read_scene_spec(spec_path);
    const auto packets = colonmap::render_sequence(spec);
    colonmap::write_dataset(out_dir, spec.intrinsics, packets);

    json j;
    j["version"] = colonmap::kVersion;
    j["config"] = {{"spec", spec_path}, {"out", out_dir}, {"seed", spec.seed}};
    j["frames"] = packets.size();
    j["out"] = out_dir;
    emit(j);
    return kExitOk;
}

// --- intrinsics ----------------------------------------------------------

int cmd_intrinsics(const std::string &pm_path, const std::string &conf_path, int max_iters,
                   double tol) {
    const colonmap::PointMap pm(colonmap::read_fmap(pm_path), 0, 0);
    std::optional<colonmap::ConfidenceMap> conf;
    if (!conf_path.empty())
        conf.emplace(colonmap::read_fmap(conf_path));

    const colonmap::FocalEstimate est =
        colonmap::estimate_focal_weiszfeld(pm, conf ? &*conf : nullptr, max_iters, tol);

    json j;
    j["version"] = colonmap::kVersion;
    j["config"] = {{"pointmap", pm_path},
                   {"conf", conf_path},
                   {"max_iters", max_iters},
                   {"tol", tol}};
    j["focal"] = est.focal;
    j["iterations"] = est.iterations;
    j["focal_least_squares"] = est.focal_least_squares;
    emit(j);
    return kExitOk;
}

// --- losses --------------------------------------------------------------

Eigen::Vector3d parse_perturb(const std::string &arg) {
    // "pose_trans=dx[,dy[,dz]]"
    const auto eq = arg.find('=');
    if (eq == std::string::npos || arg.substr(0, eq) != "pose_trans")
        throw colonmap::Error("--perturb expects pose_trans=dx[,dy[,dz]]");
    Eigen::Vector3d delta(0, 0, 0);
    std::string rest = arg.substr(eq + 1);
    for (int i = 0; i < 3 && !rest.empty(); ++i) {
        const auto comma = rest.find(',');
        delta(i) = std::stod(rest.substr(0, comma));
        rest = comma == std::string::npos ? "" : rest.substr(comma + 1);
    }
    return delta;
}

// Reverse-direction flow and occlusion for the frame pair, derived from the
// stored geometry: project frame t-1's points into frame t and compare the
// projected depth with frame t's stored depth map.
void derive_reverse_flow(const colonmap::Intrinsics &k, const colonmap::PointMap &pm_tm1_in_t,
                         const colonmap::Grid &depth_t, double tol, int tm1, int t,
                         colonmap::FlowField &flow_out, colonmap::WeightMask &occ_out) {
    const int h = pm_tm1_in_t.height(), w = pm_tm1_in_t.width();
    colonmap::Grid flow(h, w, 2);
    colonmap::Grid occ(h, w, 1);
    float sampled;
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const double z = pm_tm1_in_t.grid.at(y, x, 2);
            if (!(z > colonmap::kMinProjectionDepth))
                continue;
            const double u = k.focal * pm_tm1_in_t.grid.at(y, x, 0) / z + k.cx;
            const double v = k.focal * pm_tm1_in_t.grid.at(y, x, 1) / z + k.cy;
            flow.at(y, x, 0) = static_cast<float>(u - x);
            flow.at(y, x, 1) = static_cast<float>(v - y);
            if (!colonmap::bilinear_at(depth_t, u, v, &sampled))
                continue;
            if (std::abs(sampled - z) <= tol)
                occ.at(y, x, 0) = 1.0f;
        }
    }
    flow_out = colonmap::FlowField(std::move(flow), tm1, t);
    occ_out = colonmap::WeightMask(std::move(occ));
}

int cmd_losses(const std::string &dataset_dir, int t, const std::string &config_path,
               const std::string &perturb_arg, double derived_occ_tol) {
    colonmap::LossConfig cfg;
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in)
            throw colonmap::Error(config_path + ": cannot open for reading");
        json jc;
        try {
            in >> jc;
        } catch (const json::exception &e) {
            throw colonmap::FormatError(config_path + ": " + std::string(e.what()));
        }
        colonmap::apply_loss_config_json(cfg, jc);
    }

    const colonmap::Dataset ds = colonmap::Dataset::load(dataset_dir);
    if (t < 1 || t >= ds.frame_count())
        throw colonmap::Error("losses: --t must be in [1, " + std::to_string(ds.frame_count()) +
                              ")");
    const colonmap::DatasetFrame cur = ds.frame(t);
    const colonmap::DatasetFrame prev = ds.frame(t - 1);
    const colonmap::Intrinsics &k = ds.intrinsics();

    colonmap::PoseSE3 pose_t_to_tm1 =
        ds.trajectory()[t - 1].pose.inverse() * ds.trajectory()[t].pose;
    const colonmap::PoseSE3 pose_tm1_to_t = pose_t_to_tm1.inverse();

    Eigen::Vector3d delta(0, 0, 0);
    if (!perturb_arg.empty()) {
        delta = parse_perturb(perturb_arg);
        pose_t_to_tm1.translation += delta;
        // pose_tm1_to_t intentionally stays at ground truth, so only the
        // first pose summand reflects the perturbation.
    }

    // Cross-frame map of t-1 in t's coordinates, derived from stored data.
    const colonmap::PointMap pm_tm1_in_t = colonmap::apply_pose(pose_tm1_to_t, prev.pm_self, t);
    colonmap::FlowField flow_tm1_from_t;
    colonmap::WeightMask occ_tm1_from_t;
    derive_reverse_flow(k, pm_tm1_in_t, cur.depth, derived_occ_tol, t - 1, t, flow_tm1_from_t,
                        occ_tm1_from_t);

    // Photometric losses, both directions.
    const colonmap::WarpedImage recon_t =
        colonmap::reconstruct_image(k, pose_t_to_tm1, cur.pm_self, prev.image);
    const colonmap::WarpedImage recon_tm1 =
        colonmap::reconstruct_image(k, pose_tm1_to_t, prev.pm_self, cur.image);
    const colonmap::LossReport photo_t =
        colonmap::photometric_loss(cur.image, recon_t.image, recon_t.valid, cfg);
    const colonmap::LossReport photo_tm1 =
        colonmap::photometric_loss(prev.image, recon_tm1.image, recon_tm1.valid, cfg);

    const colonmap::LossReport conf_weighted = colonmap::confidence_weighted_loss(
        photo_t.per_pixel.at("photometric"), cur.conf, photo_tm1.per_pixel.at("photometric"),
        recon_t.valid, recon_tm1.valid, cfg);

    colonmap::GeometryLossInputs gin;
    gin.x_t_t = cur.pm_self;
    gin.x_tm1_tm1 = prev.pm_self;
    gin.x_tm1_t = pm_tm1_in_t;
    gin.x_t_tm1 = cur.pm_in_prev;
    gin.flow_t_from_tm1 = cur.flow_prev;
    gin.flow_tm1_from_t = flow_tm1_from_t;
    gin.occ_t_from_tm1 = cur.occ_prev;
    gin.occ_tm1_from_t = occ_tm1_from_t;
    gin.pose_t_to_tm1 = pose_t_to_tm1;
    gin.pose_tm1_to_t = pose_tm1_to_t;
    const colonmap::LossReport geo = colonmap::geometry_consistency_loss(gin, cfg);

    json j;
    j["version"] = colonmap::kVersion;
    j["config"] = loss_config_json(cfg);
    j["config"]["dataset"] = dataset_dir;
    j["config"]["t"] = t;
    j["config"]["derived_occlusion_tol"] = derived_occ_tol;
    j["config"]["perturb_pose_trans"] = {delta.x(), delta.y(), delta.z()};
    auto strip = [](colonmap::LossReport r, const colonmap::LossConfig &c) {
        json out = r.to_json(c);
        out.erase("config"); // echoed once at top level
        return out;
    };
    j["photometric_t"] = strip(photo_t, cfg);
    j["photometric_tm1"] = strip(photo_tm1, cfg);
    j["confidence_weighted"] = strip(conf_weighted, cfg);
    j["geometry"] = strip(geo, cfg);
    j["total"] = conf_weighted.total + geo.total;
    emit(j);
    return kExitOk;
}

// --- eval ----------------------------------------------------------------

colonmap::WeightMask positive_mask(const colonmap::Grid &gt, int channel) {
    colonmap::Grid m(gt.height(), gt.width(), 1);
    for (int y = 0; y < gt.height(); ++y)
        for (int x = 0; x < gt.width(); ++x)
            m.at(y, x, 0) = gt.at(y, x, channel) > 0.0f ? 1.0f : 0.0f;
    return colonmap::WeightMask(std::move(m));
}

colonmap::Trajectory subset(const colonmap::Trajectory &traj, const std::vector<int> &indices) {
    colonmap::Trajectory out;
    for (int i : indices) {
        if (i < 0 || i >= static_cast<int>(traj.size()))
            throw colonmap::Error("eval: frame index " + std::to_string(i) + " out of range");
        out.append(traj[i].timestamp, traj[i].pose);
    }
    return out;
}

std::vector<int> sample_indices(int count, int total, std::uint64_t seed) {
    if (count > total)
        throw colonmap::Error("eval: --sample larger than trajectory");
    std::vector<int> all(total);
    for (int i = 0; i < total; ++i)
        all[i] = i;
    colonmap::Rng rng(seed);
    for (int i = 0; i < count; ++i) {
        const int j = i + static_cast<int>(rng.below(total - i));
        std::swap(all[i], all[j]);
    }
    std::vector<int> picked(all.begin(), all.begin() + count);
    std::sort(picked.begin(), picked.end());
    return picked;
}

int cmd_eval(const std::string &mode, const std::string &pred_path, const std::string &gt_path,
             const std::string &align_name, const std::string &mask_path, bool median_scaling,
             const std::string &clamp_arg, int delta, int snippet_len,
             const std::vector<int> &frames, int sample_n, std::uint64_t sample_seed) {
    json config{{"mode", mode},           {"pred", pred_path},   {"gt", gt_path},
                {"align", align_name},    {"delta", delta},      {"snippet_len", snippet_len},
                {"median_scaling", median_scaling}};
    std::vector<json> results;
    auto push = [&](const char *name, double value) {
        results.push_back(json{{"metric", name}, {"value", value}, {"config", config}});
    };

    if (mode == "depth") {
        const colonmap::Grid pred = colonmap::read_fmap(pred_path);
        const colonmap::Grid gt = colonmap::read_fmap(gt_path);
        colonmap::WeightMask mask =
            mask_path.empty() ? positive_mask(gt, 0) : colonmap::WeightMask(colonmap::read_fmap(mask_path));
        std::optional<std::pair<double, double>> clamp;
        if (!clamp_arg.empty()) {
            const auto comma = clamp_arg.find(',');
            if (comma == std::string::npos)
                throw colonmap::Error("eval: --clamp expects min,max");
            clamp = {std::stod(clamp_arg.substr(0, comma)), std::stod(clamp_arg.substr(comma + 1))};
            config["clamp"] = {clamp->first, clamp->second};
        }
        const colonmap::DepthEvalResult r =
            colonmap::depth_metrics(pred, gt, mask, median_scaling, clamp);
        config["scale_used"] = r.scale_used;
        push("abs_rel", r.abs_rel);
        push("sq_rel", r.sq_rel);
        push("rmse", r.rmse);
        push("rmse_log", r.rmse_log);
        push("delta", r.delta);
    } else if (mode == "traj" || mode == "traj-snippet") {
        colonmap::Trajectory pred = colonmap::read_trajectory(pred_path);
        colonmap::Trajectory gt = colonmap::read_trajectory(gt_path);
        if (!frames.empty() && sample_n > 0)
            throw colonmap::Error("eval: --frames and --sample are mutually exclusive");
        if (!frames.empty()) {
            config["frames"] = frames;
            pred = subset(pred, frames);
            gt = subset(gt, frames);
        } else if (sample_n > 0) {
            const auto picked = sample_indices(sample_n, static_cast<int>(gt.size()), sample_seed);
            config["frames"] = picked;
            config["sample"] = sample_n;
            config["seed"] = sample_seed;
            pred = subset(pred, picked);
            gt = subset(gt, picked);
        }
        if (mode == "traj") {
            push("ate", colonmap::ate(pred, gt, parse_alignment(align_name)));
            const colonmap::RpeResult r = colonmap::rpe(pred, gt, delta);
            push("rpe_trans", r.rpe_trans);
            push("rpe_rot_deg", r.rpe_rot_deg);
        } else {
            push("snippet_ate", colonmap::snippet_ate(pred, gt, snippet_len));
        }
    } else if (mode == "pointmap") {
        const colonmap::PointMap pred(colonmap::read_fmap(pred_path), 0, 0);
        const colonmap::PointMap gt(colonmap::read_fmap(gt_path), 0, 0);
        colonmap::WeightMask mask = mask_path.empty()
                                        ? positive_mask(gt.grid, 2)
                                        : colonmap::WeightMask(colonmap::read_fmap(mask_path));
        if (align_name == "se3")
            throw colonmap::Error("eval: pointmap mode supports --align sim3 or none");
        const colonmap::PointMapEvalResult r =
            colonmap::pointmap_metrics(pred, gt, mask, align_name == "sim3");
        config["scale_used"] = r.scale_used;
        push("accuracy", r.accuracy);
        push("completeness", r.completeness);
        push("sq_rel", r.sq_rel);
        push("rmse_log", r.rmse_log);
    } else {
        throw colonmap::Error("eval: unknown mode \"" + mode + "\"");
    }

    json j;
    j["version"] = colonmap::kVersion;
    j["config"] = config;
    j["results"] = results;
    emit(j);
    return kExitOk;
}

// --- selfcheck -----------------------------------------------------------

int cmd_selfcheck() {
    const auto checks = colonmap::cli::run_selfcheck();
    bool all = true;
    json rows = json::array();
    for (const auto &c : checks) {
        all = all && c.passed;
        std::cerr << (c.passed ? "[PASS] " : "[FAIL] ") << c.name << " (" << c.detail << ")\n";
        rows.push_back(json{{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    }
    json j;
    j["version"] = colonmap::kVersion;
    j["config"] = json::object();
    j["checks"] = rows;
    j["passed"] = all;
    emit(j);
    return all ? kExitOk : kExitSelfCheckFailed;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"point-map geometry toolkit: synthetic scenes, calibration, losses, evaluation"};
    app.require_subcommand(1);

    auto *synth = app.add_subcommand("synth", "render a synthetic dataset directory");
    std::string spec_path, out_dir;
    synth->add_option("--spec", spec_path, "scene spec JSON")->required();
    synth->add_option("--out", out_dir, "output dataset directory")->required();

    auto *intr = app.add_subcommand("intrinsics", "estimate focal length from a point map");
    std::string pm_path, conf_path;
    int max_iters = 50;
    double tol = 1e-9;
    intr->add_option("--pointmap", pm_path, "self point map (.fmap, 3 channels)")->required();
    intr->add_option("--conf", conf_path, "optional confidence map (.fmap)");
    intr->add_option("--max-iters", max_iters, "iteration cap");
    intr->add_option("--tol", tol, "relative convergence tolerance");

    auto *losses = app.add_subcommand("losses", "loss suite for a dataset frame pair (t-1, t)");
    std::string dataset_dir, config_path, perturb_arg;
    int frame_t = 1;
    double derived_occ_tol = 1e-2;
    losses->add_option("--dataset", dataset_dir, "dataset directory")->required();
    losses->add_option("--t", frame_t, "target frame index (pairs with t-1)")->required();
    losses->add_option("--config", config_path, "loss config JSON file");
    losses->add_option("--perturb", perturb_arg, "pose_trans=dx[,dy[,dz]] perturbation of the "
                                                 "t->t-1 translation");
    losses->add_option("--derived-occ-tol", derived_occ_tol,
                       "depth tolerance for the derived reverse occlusion mask");

    auto *eval = app.add_subcommand("eval", "evaluation metrics");
    std::string mode, pred_path, gt_path, mask_path, clamp_arg;
    std::string align_name = "sim3";
    bool median_scaling = true;
    int delta = 1, snippet_len = 5, sample_n = 0;
    std::uint64_t sample_seed = 0;
    std::vector<int> frame_list;
    eval->add_option("--mode", mode, "depth | traj | traj-snippet | pointmap")->required();
    eval->add_option("--pred", pred_path, "prediction file")->required();
    eval->add_option("--gt", gt_path, "ground-truth file")->required();
    eval->add_option("--align", align_name, "sim3 | se3 | none (default sim3)");
    eval->add_option("--mask", mask_path, "validity mask (.fmap); default: gt > 0");
    eval->add_flag("--median-scaling,!--no-median-scaling", median_scaling,
                   "median-scale predictions (depth mode, default on)");
    eval->add_option("--clamp", clamp_arg, "min,max depth clamp after scaling");
    eval->add_option("--delta", delta, "RPE frame step (default 1)");
    eval->add_option("--snippet-len", snippet_len, "snippet length (default 5)");
    eval->add_option("--frames", frame_list, "explicit frame subset")->delimiter(',');
    eval->add_option("--sample", sample_n, "evaluate on N randomly sampled frames");
    eval->add_option("--seed", sample_seed, "seed for --sample");

    auto *selfcheck = app.add_subcommand("selfcheck", "run the embedded oracle suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        if (e.get_exit_code() == 0)
            return app.exit(e); // --help
        app.exit(e);
        return kExitBadInput;
    }

    try {
        if (synth->parsed())
            return cmd_synth(spec_path, out_dir);
        if (intr->parsed())
            return cmd_intrinsics(pm_path, conf_path, max_iters, tol);
        if (losses->parsed())
            return cmd_losses(dataset_dir, frame_t, config_path, perturb_arg, derived_occ_tol);
        if (eval->parsed())
            return cmd_eval(mode, pred_path, gt_path, align_name, mask_path, median_scaling,
                            clamp_arg, delta, snippet_len, frame_list, sample_n, sample_seed);
        if (selfcheck->parsed())
            return cmd_selfcheck();
    } catch (const colonmap::DegenerateError &e) {
        std::cerr << "error (degenerate input): " << e.what() << "\n";
        return kExitDegenerate;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitBadInput;
    }
    return kExitBadInput;
}
