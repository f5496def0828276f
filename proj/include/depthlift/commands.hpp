#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "depthlift/depth_sim.hpp"
#include "depthlift/eval.hpp"
#include "depthlift/net.hpp"
#include "depthlift/stats.hpp"
#include "depthlift/synth.hpp"

namespace depthlift {

inline constexpr std::string_view kToolkitVersion = "0.1.0";

// Every command writes a run_manifest.json next to its outputs: command
// name, config snapshot, seed, input/output paths, toolkit version and
// wall-clock duration. All data artifacts are deterministic given
// (inputs, config, seed); the manifest's wall_clock_seconds field is the
// one exception.

struct SynthCommandConfig {
  int subjects = 7;
  int frames_per_action = 90;
  std::uint64_t seed = 1;
  RigConfig rig;
  bool with_depth = true;
  double depth_target_spearman = 0.6;
  double depth_gamma = 1.0;
  double occlusion_prob = 0.0;
  double occlusion_depth_factor = 0.5;

  void validate() const;
};

struct TrainCommandConfig {
  Protocol protocol = Protocol::P1;
  NetConfig net;      // defaults: desk scale, depth input
  TrainConfig train;  // defaults: 70 epochs, batch 1024, lr 0.01

  void validate() const;
};

enum class AlignmentChoice { both, aligned_only, unaligned_only };

struct EvalCommandConfig {
  Protocol protocol = Protocol::P1;
  AlignmentChoice alignment = AlignmentChoice::both;
};

struct StatsCommandConfig {
  std::uint64_t seed = 0;  // only used to subsample oversized Shapiro-Wilk cells
};

struct AblateCommandConfig {
  std::vector<double> targets = {0.0, 0.3, 0.6, 0.9, 1.0};
  bool include_2d_baseline = true;
  std::uint64_t depth_seed = 1;
  double depth_gamma = 1.0;
  double occlusion_prob = 0.0;
  double occlusion_depth_factor = 0.5;
  TrainCommandConfig train;

  void validate() const;
};

// JSON round trips for config files (--config / --dump-config). Parsers
// reject unknown keys so typos cannot silently fall back to defaults.
std::string dump_synth_config(const SynthCommandConfig& c);
std::string dump_train_config(const TrainCommandConfig& c);
std::string dump_eval_config(const EvalCommandConfig& c);
std::string dump_stats_config(const StatsCommandConfig& c);
std::string dump_ablate_config(const AblateCommandConfig& c);

SynthCommandConfig parse_synth_config(const std::string& text);
TrainCommandConfig parse_train_config(const std::string& text);
EvalCommandConfig parse_eval_config(const std::string& text);
StatsCommandConfig parse_stats_config(const std::string& text);
AblateCommandConfig parse_ablate_config(const std::string& text);

struct SynthResult {
  std::filesystem::path dataset_path;
  std::filesystem::path cameras_dir;
  DepthSimInfo depth_info;
  long n_records = 0;
};

// Generates poses, replicates them across the rig's cameras with projected
// pixel coordinates, simulates depths, writes dataset.jsonl + cameras/.
SynthResult run_synth(const SynthCommandConfig& cfg, const std::filesystem::path& out_dir);

struct TrainResult {
  std::filesystem::path model_path;
  std::filesystem::path loss_path;
  std::vector<double> loss_history;
};

TrainResult run_train(const TrainCommandConfig& cfg, const std::filesystem::path& dataset_path,
                      const std::filesystem::path& cameras_dir,
                      const std::filesystem::path& out_dir);

struct EvalResult {
  std::optional<EvalReport> unaligned;
  std::optional<EvalReport> aligned;
  std::vector<std::filesystem::path> report_paths;
};

EvalResult run_eval(const EvalCommandConfig& cfg, const std::filesystem::path& model_path,
                    const std::filesystem::path& dataset_path,
                    const std::filesystem::path& cameras_dir,
                    const std::filesystem::path& out_dir);

struct StatsResult {
  std::filesystem::path cells_path;
  std::filesystem::path summary_path;
  SignificanceSummary summary;
  long n_cells = 0;
  std::vector<std::string> skipped_cells;
};

StatsResult run_stats(const StatsCommandConfig& cfg, const std::filesystem::path& dataset_path,
                      const std::filesystem::path& cameras_dir,
                      const std::filesystem::path& out_dir);

struct AblationRow {
  std::string level;  // "rho_0.30" or "baseline_2d"
  std::optional<double> target_spearman;
  std::optional<double> measured_spearman;
  double mpjpe_mm = 0.0;
  double mpjpe_aligned_mm = 0.0;
};

struct AblateResult {
  std::vector<AblationRow> rows;
  std::optional<TrendFit> trend;  // MPJPE vs measured correlation over the sweep
  std::filesystem::path table_path;
};

// Re-simulates depths at each target level on the same poses, trains one
// model per level with the shared seed, evaluates on the protocol test
// split. Partial results stay on disk if a level fails.
AblateResult run_ablate(const AblateCommandConfig& cfg, const std::filesystem::path& dataset_path,
                        const std::filesystem::path& cameras_dir,
                        const std::filesystem::path& out_dir);

}  // namespace depthlift
