#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "depthlift/commands.hpp"

namespace {

using namespace depthlift;

std::string read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("missing required option: " + what);
}

struct Cli {
  std::string config_path;
  std::string out_dir;
  std::string dataset;
  std::string cameras;
  std::string model;
  std::string protocol;
  bool no_depth = false;
  bool dump_config = false;
  bool seed_given = false;
  std::uint64_t seed = 0;
};

void add_common(CLI::App* cmd, Cli& c) {
  cmd->add_option("--config", c.config_path, "JSON config file (defaults apply when omitted)");
  cmd->add_option("--out", c.out_dir, "output directory");
  cmd->add_flag("--dump-config", c.dump_config,
                "print the effective config (all defaults filled in) and exit");
  cmd->add_option("--seed", c.seed, "override the config seed")->each([&c](const std::string&) {
    c.seed_given = true;
  });
}

int dispatch(const std::string& command, Cli& c) {
  if (command == "synth") {
    SynthCommandConfig cfg;
    if (!c.config_path.empty()) cfg = parse_synth_config(read_file(c.config_path));
    if (c.seed_given) cfg.seed = c.seed;
    if (c.dump_config) {
      std::fputs(dump_synth_config(cfg).c_str(), stdout);
      return 0;
    }
    require(!c.out_dir.empty(), "--out");
    const auto res = run_synth(cfg, c.out_dir);
    std::printf("wrote %ld records to %s", res.n_records, res.dataset_path.c_str());
    if (cfg.with_depth) {
      std::printf(" (measured depth spearman %.4f)", res.depth_info.measured_spearman);
    }
    std::printf("\n");
    return 0;
  }

  if (command == "train") {
    TrainCommandConfig cfg;
    if (!c.config_path.empty()) cfg = parse_train_config(read_file(c.config_path));
    if (c.seed_given) cfg.train.seed = c.seed;
    if (c.no_depth) cfg.net.use_depth = false;
    if (!c.protocol.empty()) cfg.protocol = protocol_from_string(c.protocol);
    if (c.dump_config) {
      std::fputs(dump_train_config(cfg).c_str(), stdout);
      return 0;
    }
    require(!c.dataset.empty(), "--dataset");
    require(!c.cameras.empty(), "--cameras");
    require(!c.out_dir.empty(), "--out");
    const auto res = run_train(cfg, c.dataset, c.cameras, c.out_dir);
    std::printf("model written to %s (final loss %.6f)\n", res.model_path.c_str(),
                res.loss_history.back());
    return 0;
  }

  if (command == "eval") {
    EvalCommandConfig cfg;
    if (!c.config_path.empty()) cfg = parse_eval_config(read_file(c.config_path));
    if (!c.protocol.empty()) cfg.protocol = protocol_from_string(c.protocol);
    if (c.dump_config) {
      std::fputs(dump_eval_config(cfg).c_str(), stdout);
      return 0;
    }
    require(!c.model.empty(), "--model");
    require(!c.dataset.empty(), "--dataset");
    require(!c.cameras.empty(), "--cameras");
    require(!c.out_dir.empty(), "--out");
    const auto res = run_eval(cfg, c.model, c.dataset, c.cameras, c.out_dir);
    if (res.unaligned) std::printf("unaligned avg mpjpe: %.3f mm\n", res.unaligned->avg_mpjpe);
    if (res.aligned) std::printf("aligned avg mpjpe:   %.3f mm\n", res.aligned->avg_mpjpe);
    return 0;
  }

  if (command == "stats") {
    StatsCommandConfig cfg;
    if (!c.config_path.empty()) cfg = parse_stats_config(read_file(c.config_path));
    if (c.seed_given) cfg.seed = c.seed;
    if (c.dump_config) {
      std::fputs(dump_stats_config(cfg).c_str(), stdout);
      return 0;
    }
    require(!c.dataset.empty(), "--dataset");
    require(!c.cameras.empty(), "--cameras");
    require(!c.out_dir.empty(), "--out");
    const auto res = run_stats(cfg, c.dataset, c.cameras, c.out_dir);
    std::printf("%ld cells analyzed (%zu skipped)\n", res.n_cells, res.skipped_cells.size());
    std::printf("significant at 0.05/0.01/0.001: %.3f / %.3f / %.3f; negative: %.3f\n",
                res.summary.frac_significant_05, res.summary.frac_significant_01,
                res.summary.frac_significant_001, res.summary.frac_negative);
    return 0;
  }

  if (command == "ablate") {
    AblateCommandConfig cfg;
    if (!c.config_path.empty()) cfg = parse_ablate_config(read_file(c.config_path));
    if (c.seed_given) {
      cfg.train.train.seed = c.seed;
      cfg.depth_seed = c.seed;
    }
    if (c.dump_config) {
      std::fputs(dump_ablate_config(cfg).c_str(), stdout);
      return 0;
    }
    require(!c.dataset.empty(), "--dataset");
    require(!c.cameras.empty(), "--cameras");
    require(!c.out_dir.empty(), "--out");
    const auto res = run_ablate(cfg, c.dataset, c.cameras, c.out_dir);
    for (const auto& row : res.rows) {
      std::printf("%-12s mpjpe %8.3f mm (aligned %8.3f)\n", row.level.c_str(), row.mpjpe_mm,
                  row.mpjpe_aligned_mm);
    }
    if (res.trend) {
      std::printf("trend: slope %.4f, intercept %.4f, pearson r %.4f\n", res.trend->slope,
                  res.trend->intercept, res.trend->pearson_r);
    }
    return 0;
  }

  throw ConfigError("unknown command: " + command);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"depthlift: depth-augmented 2D->3D human pose lifting toolkit"};
  app.require_subcommand(1);

  Cli c;
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset with cameras and depths");
  add_common(synth, c);

  auto* train = app.add_subcommand("train", "train the lifting network on a protocol split");
  add_common(train, c);
  train->add_option("--dataset", c.dataset, "dataset JSONL file");
  train->add_option("--cameras", c.cameras, "camera rig directory");
  train->add_option("--protocol", c.protocol, "P1 or P2");
  train->add_flag("--no-depth", c.no_depth, "train the 2D-only ablation (input 2J)");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on the protocol test split");
  add_common(eval_cmd, c);
  eval_cmd->add_option("--model", c.model, "model JSON file");
  eval_cmd->add_option("--dataset", c.dataset, "dataset JSONL file");
  eval_cmd->add_option("--cameras", c.cameras, "camera rig directory");
  eval_cmd->add_option("--protocol", c.protocol, "P1 or P2");

  auto* stats = app.add_subcommand("stats", "per-(camera,action,joint) correlation and normality");
  add_common(stats, c);
  stats->add_option("--dataset", c.dataset, "dataset JSONL file");
  stats->add_option("--cameras", c.cameras, "camera rig directory");

  auto* ablate = app.add_subcommand("ablate", "depth-correlation sweep: train/eval per level");
  add_common(ablate, c);
  ablate->add_option("--dataset", c.dataset, "dataset JSONL file");
  ablate->add_option("--cameras", c.cameras, "camera rig directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    return dispatch(app.get_subcommands().front()->get_name(), c);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
}
