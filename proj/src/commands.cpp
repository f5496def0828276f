#include "depthlift/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "depthlift/dataset_io.hpp"

namespace depthlift {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                const std::string& ctx) {
  if (!j.is_object()) throw ConfigError(ctx + " config must be a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (auto a : allowed) {
      if (item.key() == a) {
        known = true;
        break;
      }
    }
    if (!known) throw ConfigError("unknown key '" + item.key() + "' in " + ctx + " config");
  }
}

json parse_json(const std::string& text, const std::string& ctx) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(ctx + " config is not valid JSON: " + e.what());
  }
}

void write_text_atomic(const fs::path& path, const std::string& text) {
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + tmp);
    os << text;
    if (!os) throw IoError("write failed: " + tmp);
  }
  fs::rename(tmp, path);
}

void write_manifest(const fs::path& out_dir, const std::string& command, const json& config,
                    std::uint64_t seed, const std::vector<std::string>& inputs,
                    const std::vector<std::string>& outputs, double wall_seconds) {
  json m;
  m["command"] = command;
  m["config"] = config;
  m["seed"] = seed;
  m["inputs"] = inputs;
  m["outputs"] = outputs;
  m["toolkit_version"] = std::string(kToolkitVersion);
  m["wall_clock_seconds"] = wall_seconds;
  write_text_atomic(out_dir / "run_manifest.json", m.dump(2) + "\n");
}

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string num6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

std::string numg(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

DepthModelConfig depth_config_of(const SynthCommandConfig& c) {
  DepthModelConfig d;
  d.target_spearman = c.depth_target_spearman;
  d.gamma = c.depth_gamma;
  d.occlusion_prob = c.occlusion_prob;
  d.occlusion_depth_factor = c.occlusion_depth_factor;
  d.seed = c.seed;
  return d;
}

}  // namespace

void SynthCommandConfig::validate() const {
  if (subjects < 1) throw ConfigError("subjects must be >= 1");
  if (frames_per_action < 1) throw ConfigError("frames_per_action must be >= 1");
  if (rig.n_cameras < 1 || rig.n_cameras > kNumCameras) {
    throw ConfigError("cameras must lie in [1, 4]");
  }
  if (with_depth) depth_config_of(*this).validate();
}

void TrainCommandConfig::validate() const {
  net.validate();
  train.validate();
}

void AblateCommandConfig::validate() const {
  if (targets.empty()) throw ConfigError("ablate needs at least one target correlation");
  for (double t : targets) {
    if (!(t >= -1.0 && t <= 1.0)) throw ConfigError("target correlations must lie in [-1, 1]");
  }
  train.validate();
  if (!train.net.use_depth) {
    throw ConfigError("the ablate sweep trains depth-input models; use include_2d_baseline for "
                      "the 2D-only run");
  }
}

// ---- config JSON ----------------------------------------------------------------

namespace {

json synth_to_json(const SynthCommandConfig& c) {
  return json{{"subjects", c.subjects},
              {"frames_per_action", c.frames_per_action},
              {"seed", c.seed},
              {"cameras", c.rig.n_cameras},
              {"rig",
               {{"radius_min_mm", c.rig.radius_min_mm},
                {"radius_max_mm", c.rig.radius_max_mm},
                {"height_min_mm", c.rig.height_min_mm},
                {"height_max_mm", c.rig.height_max_mm},
                {"focal_min_px", c.rig.focal_min_px},
                {"focal_max_px", c.rig.focal_max_px},
                {"image_size_px", c.rig.image_size_px}}},
              {"depth",
               {{"enabled", c.with_depth},
                {"target_spearman", c.depth_target_spearman},
                {"gamma", c.depth_gamma},
                {"occlusion_prob", c.occlusion_prob},
                {"occlusion_depth_factor", c.occlusion_depth_factor}}}};
}

json train_to_json(const TrainCommandConfig& c) {
  return json{{"protocol", std::string(to_string(c.protocol))},
              {"net",
               {{"use_depth", c.net.use_depth},
                {"hidden_width", c.net.hidden_width},
                {"n_blocks", c.net.n_blocks},
                {"dropout_rate", c.net.dropout_rate},
                {"bn_epsilon", c.net.bn_epsilon},
                {"bn_momentum", c.net.bn_momentum},
                {"activation", c.net.activation}}},
              {"train",
               {{"epochs", c.train.epochs},
                {"batch_size", c.train.batch_size},
                {"learning_rate", c.train.learning_rate},
                {"beta1", c.train.beta1},
                {"beta2", c.train.beta2},
                {"adam_epsilon", c.train.adam_epsilon},
                {"seed", c.train.seed}}}};
}

TrainCommandConfig train_from_json(const json& j) {
  TrainCommandConfig c;
  check_keys(j, {"protocol", "net", "train"}, "train");
  if (j.contains("protocol")) c.protocol = protocol_from_string(j["protocol"].get<std::string>());
  if (j.contains("net")) {
    const auto& n = j["net"];
    check_keys(n, {"use_depth", "hidden_width", "n_blocks", "dropout_rate", "bn_epsilon",
                   "bn_momentum", "activation"},
               "train.net");
    c.net.use_depth = n.value("use_depth", c.net.use_depth);
    c.net.hidden_width = n.value("hidden_width", c.net.hidden_width);
    c.net.n_blocks = n.value("n_blocks", c.net.n_blocks);
    c.net.dropout_rate = n.value("dropout_rate", c.net.dropout_rate);
    c.net.bn_epsilon = n.value("bn_epsilon", c.net.bn_epsilon);
    c.net.bn_momentum = n.value("bn_momentum", c.net.bn_momentum);
    c.net.activation = n.value("activation", c.net.activation);
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    check_keys(t, {"epochs", "batch_size", "learning_rate", "beta1", "beta2", "adam_epsilon",
                   "seed"},
               "train.train");
    c.train.epochs = t.value("epochs", c.train.epochs);
    c.train.batch_size = t.value("batch_size", c.train.batch_size);
    c.train.learning_rate = t.value("learning_rate", c.train.learning_rate);
    c.train.beta1 = t.value("beta1", c.train.beta1);
    c.train.beta2 = t.value("beta2", c.train.beta2);
    c.train.adam_epsilon = t.value("adam_epsilon", c.train.adam_epsilon);
    c.train.seed = t.value("seed", c.train.seed);
  }
  return c;
}

}  // namespace

std::string dump_synth_config(const SynthCommandConfig& c) { return synth_to_json(c).dump(2) + "\n"; }
std::string dump_train_config(const TrainCommandConfig& c) { return train_to_json(c).dump(2) + "\n"; }

std::string dump_eval_config(const EvalCommandConfig& c) {
  const char* alignment = c.alignment == AlignmentChoice::both ? "both"
                          : c.alignment == AlignmentChoice::aligned_only ? "aligned"
                                                                         : "unaligned";
  return json{{"protocol", std::string(to_string(c.protocol))}, {"alignment", alignment}}.dump(2) +
         "\n";
}

std::string dump_stats_config(const StatsCommandConfig& c) {
  return json{{"seed", c.seed}}.dump(2) + "\n";
}

std::string dump_ablate_config(const AblateCommandConfig& c) {
  json j;
  j["targets"] = c.targets;
  j["include_2d_baseline"] = c.include_2d_baseline;
  j["depth"] = {{"seed", c.depth_seed},
                {"gamma", c.depth_gamma},
                {"occlusion_prob", c.occlusion_prob},
                {"occlusion_depth_factor", c.occlusion_depth_factor}};
  j["train"] = train_to_json(c.train);
  return j.dump(2) + "\n";
}

SynthCommandConfig parse_synth_config(const std::string& text) {
  const json j = parse_json(text, "synth");
  check_keys(j, {"subjects", "frames_per_action", "seed", "cameras", "rig", "depth"}, "synth");
  SynthCommandConfig c;
  c.subjects = j.value("subjects", c.subjects);
  c.frames_per_action = j.value("frames_per_action", c.frames_per_action);
  c.seed = j.value("seed", c.seed);
  c.rig.n_cameras = j.value("cameras", c.rig.n_cameras);
  if (j.contains("rig")) {
    const auto& r = j["rig"];
    check_keys(r, {"radius_min_mm", "radius_max_mm", "height_min_mm", "height_max_mm",
                   "focal_min_px", "focal_max_px", "image_size_px"},
               "synth.rig");
    c.rig.radius_min_mm = r.value("radius_min_mm", c.rig.radius_min_mm);
    c.rig.radius_max_mm = r.value("radius_max_mm", c.rig.radius_max_mm);
    c.rig.height_min_mm = r.value("height_min_mm", c.rig.height_min_mm);
    c.rig.height_max_mm = r.value("height_max_mm", c.rig.height_max_mm);
    c.rig.focal_min_px = r.value("focal_min_px", c.rig.focal_min_px);
    c.rig.focal_max_px = r.value("focal_max_px", c.rig.focal_max_px);
    c.rig.image_size_px = r.value("image_size_px", c.rig.image_size_px);
  }
  if (j.contains("depth")) {
    const auto& d = j["depth"];
    check_keys(d, {"enabled", "target_spearman", "gamma", "occlusion_prob",
                   "occlusion_depth_factor"},
               "synth.depth");
    c.with_depth = d.value("enabled", c.with_depth);
    c.depth_target_spearman = d.value("target_spearman", c.depth_target_spearman);
    c.depth_gamma = d.value("gamma", c.depth_gamma);
    c.occlusion_prob = d.value("occlusion_prob", c.occlusion_prob);
    c.occlusion_depth_factor = d.value("occlusion_depth_factor", c.occlusion_depth_factor);
  }
  return c;
}

TrainCommandConfig parse_train_config(const std::string& text) {
  return train_from_json(parse_json(text, "train"));
}

EvalCommandConfig parse_eval_config(const std::string& text) {
  const json j = parse_json(text, "eval");
  check_keys(j, {"protocol", "alignment"}, "eval");
  EvalCommandConfig c;
  if (j.contains("protocol")) c.protocol = protocol_from_string(j["protocol"].get<std::string>());
  const std::string a = j.value("alignment", std::string("both"));
  if (a == "both") {
    c.alignment = AlignmentChoice::both;
  } else if (a == "aligned") {
    c.alignment = AlignmentChoice::aligned_only;
  } else if (a == "unaligned") {
    c.alignment = AlignmentChoice::unaligned_only;
  } else {
    throw ConfigError("eval.alignment must be one of both/aligned/unaligned");
  }
  return c;
}

StatsCommandConfig parse_stats_config(const std::string& text) {
  const json j = parse_json(text, "stats");
  check_keys(j, {"seed"}, "stats");
  StatsCommandConfig c;
  c.seed = j.value("seed", c.seed);
  return c;
}

AblateCommandConfig parse_ablate_config(const std::string& text) {
  const json j = parse_json(text, "ablate");
  check_keys(j, {"targets", "include_2d_baseline", "depth", "train"}, "ablate");
  AblateCommandConfig c;
  if (j.contains("targets")) c.targets = j["targets"].get<std::vector<double>>();
  c.include_2d_baseline = j.value("include_2d_baseline", c.include_2d_baseline);
  if (j.contains("depth")) {
    const auto& d = j["depth"];
    check_keys(d, {"seed", "gamma", "occlusion_prob", "occlusion_depth_factor"}, "ablate.depth");
    c.depth_seed = d.value("seed", c.depth_seed);
    c.depth_gamma = d.value("gamma", c.depth_gamma);
    c.occlusion_prob = d.value("occlusion_prob", c.occlusion_prob);
    c.occlusion_depth_factor = d.value("occlusion_depth_factor", c.occlusion_depth_factor);
  }
  if (j.contains("train")) c.train = train_from_json(j["train"]);
  return c;
}

// ---- synth ------------------------------------------------------------------------

SynthResult run_synth(const SynthCommandConfig& cfg, const fs::path& out_dir) {
  cfg.validate();
  Stopwatch watch;
  fs::create_directories(out_dir);

  Dataset base = synth_generate(default_skeleton(), cfg.subjects, cfg.frames_per_action, cfg.seed);
  const CameraRig rig = make_synthetic_rig(cfg.rig, cfg.seed);

  // One record per (pose sample, camera) with projected pixel coordinates.
  Dataset d;
  d.skeleton = base.skeleton;
  d.provenance = base.provenance + " | " + std::to_string(rig.size()) + " cameras";
  d.frames.reserve(base.frames.size() * rig.size());
  for (const auto& f : base.frames) {
    for (const auto& cam : rig) {
      FrameRecord rec = f;
      rec.camera_id = cam.id;
      const Pose3D pose_cam = world_to_camera_pose(rec.pose_world, cam.extrinsics);
      rec.pixels = project_pose(pose_cam, cam.intrinsics);
      d.frames.push_back(std::move(rec));
    }
  }

  SynthResult result;
  if (cfg.with_depth) {
    result.depth_info = simulate_dataset_depths(d, rig, depth_config_of(cfg));
  }

  result.cameras_dir = out_dir / "cameras";
  result.dataset_path = out_dir / "dataset.jsonl";
  result.n_records = static_cast<long>(d.frames.size());
  save_rig(rig, result.cameras_dir);
  save_dataset(d, result.dataset_path);

  std::vector<std::string> outputs = {result.dataset_path.string()};
  for (const auto& cam : rig) {
    outputs.push_back((result.cameras_dir / ("cam" + std::to_string(cam.id) + ".json")).string());
  }
  write_manifest(out_dir, "synth", synth_to_json(cfg), cfg.seed, {}, outputs, watch.seconds());
  return result;
}

// ---- train ------------------------------------------------------------------------

TrainResult run_train(const TrainCommandConfig& cfg, const fs::path& dataset_path,
                      const fs::path& cameras_dir, const fs::path& out_dir) {
  cfg.validate();
  Stopwatch watch;
  fs::create_directories(out_dir);

  const Dataset d = load_dataset(dataset_path);
  const CameraRig rig = load_rig(cameras_dir);
  auto [train_split, test_split] = split_protocol(d, cfg.protocol);
  (void)test_split;

  const FitResult fitted = fit(train_split, rig, cfg.net, cfg.train, [](int epoch, double loss) {
    std::fprintf(stderr, "epoch %3d  loss %.6f\n", epoch, loss);
  });

  TrainResult result;
  result.model_path = out_dir / "model.json";
  result.loss_path = out_dir / "loss_history.csv";
  result.loss_history = fitted.loss_history;
  save_model(fitted.params, fitted.stats, result.model_path);

  std::string csv = "epoch,mean_loss\n";
  for (std::size_t e = 0; e < fitted.loss_history.size(); ++e) {
    csv += std::to_string(e + 1) + "," + numg(fitted.loss_history[e]) + "\n";
  }
  write_text_atomic(result.loss_path, csv);

  write_manifest(out_dir, "train", train_to_json(cfg), cfg.train.seed,
                 {dataset_path.string(), cameras_dir.string()},
                 {result.model_path.string(), result.loss_path.string()}, watch.seconds());
  return result;
}

// ---- eval -------------------------------------------------------------------------

EvalResult run_eval(const EvalCommandConfig& cfg, const fs::path& model_path,
                    const fs::path& dataset_path, const fs::path& cameras_dir,
                    const fs::path& out_dir) {
  Stopwatch watch;
  fs::create_directories(out_dir);

  auto [params, stats] = load_model(model_path);
  const Dataset d = load_dataset(dataset_path);
  const CameraRig rig = load_rig(cameras_dir);
  auto [train_split, test_split] = split_protocol(d, cfg.protocol);
  (void)train_split;

  EvalResult result;
  const auto emit = [&](const EvalReport& rep, const std::string& tag) {
    const auto csv = out_dir / ("report_" + tag + ".csv");
    const auto js = out_dir / ("report_" + tag + ".json");
    emit_report_csv(rep, csv);
    emit_report_json(rep, js);
    result.report_paths.push_back(csv);
    result.report_paths.push_back(js);
  };

  if (cfg.alignment != AlignmentChoice::aligned_only) {
    result.unaligned = evaluate_protocol(params, stats, test_split, rig, cfg.protocol, false);
    emit(*result.unaligned, "unaligned");
  }
  if (cfg.alignment != AlignmentChoice::unaligned_only) {
    result.aligned = evaluate_protocol(params, stats, test_split, rig, cfg.protocol, true);
    emit(*result.aligned, "aligned");
  }

  std::vector<std::string> outputs;
  for (const auto& p : result.report_paths) outputs.push_back(p.string());
  json cfg_json{{"protocol", std::string(to_string(cfg.protocol))}};
  write_manifest(out_dir, "eval", cfg_json, 0,
                 {model_path.string(), dataset_path.string(), cameras_dir.string()}, outputs,
                 watch.seconds());
  return result;
}

// ---- stats ------------------------------------------------------------------------

StatsResult run_stats(const StatsCommandConfig& cfg, const fs::path& dataset_path,
                      const fs::path& cameras_dir, const fs::path& out_dir) {
  Stopwatch watch;
  fs::create_directories(out_dir);

  const Dataset d = load_dataset(dataset_path);
  const CameraRig rig = load_rig(cameras_dir);
  if (std::none_of(d.frames.begin(), d.frames.end(),
                   [](const FrameRecord& f) { return f.depths.has_value(); })) {
    throw DataError("stats: dataset has no depth fields (synthesize with depth enabled)");
  }

  // Camera-frame z per joint, recomputed from the stored world poses.
  std::vector<std::array<double, kNumJoints>> zs(d.frames.size());
  for (std::size_t i = 0; i < d.frames.size(); ++i) {
    const auto& cam = rig_camera(rig, d.frames[i].camera_id);
    const Pose3D pose_cam = world_to_camera_pose(d.frames[i].pose_world, cam.extrinsics);
    for (int j = 0; j < kNumJoints; ++j) zs[i][j] = pose_cam.joints[j].z();
  }

  std::string csv =
      "camera,action,joint,n,spearman,spearman_p,kendall,kendall_p,sw_W,sw_p,ad_A2,"
      "dagostino_K2,dagostino_p\n";
  std::vector<CorrelationReport> reports;
  StatsResult result;

  for (const auto& cam : rig) {
    for (int action = 1; action <= kNumActions; ++action) {
      for (int joint = 0; joint < kNumJoints; ++joint) {
        const std::string cell_name = "cam" + std::to_string(cam.id) + "/action" +
                                      std::to_string(action) + "/" +
                                      std::string(joint_names()[joint]);
        std::vector<double> depths, z_vals;
        try {
          std::tie(depths, z_vals) =
              subsample(d, zs, cam.id, action, static_cast<JointId>(joint));
        } catch (const DataError&) {
          result.skipped_cells.push_back(cell_name);
          continue;
        }
        const auto n = static_cast<long>(depths.size());
        csv += std::to_string(cam.id) + "," + std::to_string(action) + "," +
               std::string(joint_names()[joint]) + "," + std::to_string(n);

        CorrelationReport rep;
        rep.n = n;
        bool have_corr = false;
        try {
          if (n >= 3) {
            rep.spearman = spearman(depths, z_vals);
            rep.kendall = kendall_tau(depths, z_vals);
            have_corr = true;
          }
        } catch (const NumericError&) {
          have_corr = false;
        }
        if (have_corr) {
          reports.push_back(rep);
          csv += "," + numg(rep.spearman.coefficient) + "," + numg(rep.spearman.p_value) + "," +
                 numg(rep.kendall.coefficient) + "," + numg(rep.kendall.p_value);
        } else {
          csv += ",,,,";
        }

        const NormalityReport nb = normality_battery(depths, cfg.seed);
        csv += nb.shapiro ? "," + numg(nb.shapiro->statistic) + "," + numg(nb.shapiro->p_value)
                          : ",,";
        csv += nb.anderson ? "," + numg(nb.anderson->a2_star) : ",";
        csv += nb.dagostino
                   ? "," + numg(nb.dagostino->statistic) + "," + numg(nb.dagostino->p_value)
                   : ",,";
        csv += "\n";
        result.n_cells += 1;
      }
    }
  }

  if (reports.empty()) throw DataError("stats: no cell had enough data for correlation");
  result.summary = significance_summary(reports);

  result.cells_path = out_dir / "correlation_cells.csv";
  result.summary_path = out_dir / "summary.json";
  write_text_atomic(result.cells_path, csv);

  json summary;
  summary["n_cells"] = result.summary.n_cells;
  summary["frac_significant_at_0.001"] = result.summary.frac_significant_001;
  summary["frac_significant_at_0.01"] = result.summary.frac_significant_01;
  summary["frac_significant_at_0.05"] = result.summary.frac_significant_05;
  summary["frac_negative"] = result.summary.frac_negative;
  summary["frac_moderate"] = result.summary.frac_moderate;
  summary["moderate_threshold"] = kModerateCorrelation;
  summary["anderson_critical_value_0.05"] = kAndersonCritical05;
  summary["skipped_cells"] = result.skipped_cells;
  write_text_atomic(result.summary_path, summary.dump(2) + "\n");

  write_manifest(out_dir, "stats", json{{"seed", cfg.seed}}, cfg.seed,
                 {dataset_path.string(), cameras_dir.string()},
                 {result.cells_path.string(), result.summary_path.string()}, watch.seconds());
  return result;
}

// ---- ablate -----------------------------------------------------------------------

namespace {

std::string ablation_table(const std::vector<AblationRow>& rows) {
  std::string csv = "level,target_spearman,measured_spearman,mpjpe_mm,mpjpe_aligned_mm\n";
  for (const auto& r : rows) {
    csv += r.level + ",";
    if (r.target_spearman) csv += numg(*r.target_spearman);
    csv += ",";
    if (r.measured_spearman) csv += numg(*r.measured_spearman);
    csv += "," + num6(r.mpjpe_mm) + "," + num6(r.mpjpe_aligned_mm) + "\n";
  }
  return csv;
}

}  // namespace

AblateResult run_ablate(const AblateCommandConfig& cfg, const fs::path& dataset_path,
                        const fs::path& cameras_dir, const fs::path& out_dir) {
  cfg.validate();
  Stopwatch watch;
  fs::create_directories(out_dir);

  const Dataset base = load_dataset(dataset_path);
  const CameraRig rig = load_rig(cameras_dir);

  AblateResult result;
  result.table_path = out_dir / "ablation.csv";

  const auto evaluate_fitted = [&](const FitResult& fitted, const Dataset& test_split,
                                   AblationRow& row) {
    const EvalReport unaligned =
        evaluate_protocol(fitted.params, fitted.stats, test_split, rig, cfg.train.protocol, false);
    const EvalReport aligned =
        evaluate_protocol(fitted.params, fitted.stats, test_split, rig, cfg.train.protocol, true);
    row.mpjpe_mm = unaligned.avg_mpjpe;
    row.mpjpe_aligned_mm = aligned.avg_mpjpe;
  };

  for (double target : cfg.targets) {
    Dataset level_data = base;
    DepthModelConfig dm;
    dm.target_spearman = target;
    dm.gamma = cfg.depth_gamma;
    dm.occlusion_prob = cfg.occlusion_prob;
    dm.occlusion_depth_factor = cfg.occlusion_depth_factor;
    dm.seed = cfg.depth_seed;
    const DepthSimInfo info = simulate_dataset_depths(level_data, rig, dm);

    auto [train_split, test_split] = split_protocol(level_data, cfg.train.protocol);
    std::fprintf(stderr, "ablate: target rho %.2f (measured %.4f), training...\n", target,
                 info.measured_spearman);
    const FitResult fitted = fit(train_split, rig, cfg.train.net, cfg.train.train);

    AblationRow row;
    char label[32];
    std::snprintf(label, sizeof label, "rho_%.2f", target);
    row.level = label;
    row.target_spearman = target;
    row.measured_spearman = info.measured_spearman;
    evaluate_fitted(fitted, test_split, row);
    result.rows.push_back(row);
    write_text_atomic(result.table_path, ablation_table(result.rows));  // keep partial results
  }

  if (cfg.include_2d_baseline) {
    auto [train_split, test_split] = split_protocol(base, cfg.train.protocol);
    NetConfig net2d = cfg.train.net;
    net2d.use_depth = false;
    std::fprintf(stderr, "ablate: 2D-only baseline, training...\n");
    const FitResult fitted = fit(train_split, rig, net2d, cfg.train.train);

    AblationRow row;
    row.level = "baseline_2d";
    evaluate_fitted(fitted, test_split, row);
    result.rows.push_back(row);
    write_text_atomic(result.table_path, ablation_table(result.rows));
  }

  // Trend of reconstruction error against the measured correlation.
  std::vector<double> xs, ys;
  for (const auto& r : result.rows) {
    if (r.measured_spearman) {
      xs.push_back(*r.measured_spearman);
      ys.push_back(r.mpjpe_mm);
    }
  }
  json trend_json;
  if (xs.size() >= 3) {
    result.trend = trend_fit(xs, ys);
    trend_json = {{"slope", result.trend->slope},
                  {"intercept", result.trend->intercept},
                  {"pearson_r", result.trend->pearson_r}};
  } else {
    trend_json = nullptr;
  }
  json points = json::array();
  for (std::size_t i = 0; i < xs.size(); ++i) points.push_back({xs[i], ys[i]});
  json trend_file{{"trend", trend_json}, {"points_measured_rho_vs_mpjpe", points}};
  const auto trend_path = out_dir / "trend.json";
  write_text_atomic(trend_path, trend_file.dump(2) + "\n");

  write_manifest(out_dir, "ablate", parse_json(dump_ablate_config(cfg), "ablate"),
                 cfg.train.train.seed, {dataset_path.string(), cameras_dir.string()},
                 {result.table_path.string(), trend_path.string()}, watch.seconds());
  return result;
}

}  // namespace depthlift
