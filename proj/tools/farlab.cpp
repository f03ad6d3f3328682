// farlab: command-line runner for the curiosity experiments.
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "farlab/harness/config.hpp"
#include "farlab/harness/csv.hpp"
#include "farlab/harness/errors.hpp"
#include "farlab/harness/experiments.hpp"
#include "farlab/harness/report.hpp"
#include "farlab/harness/state_io.hpp"

namespace fh = farlab::harness;
using nlohmann::json;

namespace {

struct CommonOpts {
  std::string config;
  std::string kind;
  std::optional<std::uint64_t> seed;
  std::optional<std::int64_t> steps;
  std::string out;
  std::vector<std::string> overrides;
  bool normalize = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--config", o.config, "TOML or JSON config file");
  cmd->add_option("--kind", o.kind, "experiment kind (overrides the config)");
  cmd->add_option("--seed", o.seed, "run this single seed");
  cmd->add_option("--steps", o.steps, "total environment steps");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--set", o.overrides, "field override, e.g. far.rho=15")->take_all();
  cmd->add_flag("--normalize-by-running-mean", o.normalize, "divide toy-grid probes by the running mean reward");
}

fh::ExperimentConfig resolve(const CommonOpts& o) {
  json doc = o.config.empty() ? json::object() : fh::load_config_document(o.config);
  if (!o.kind.empty()) doc["kind"] = o.kind;
  if (o.seed) doc["seeds"] = json::array({*o.seed});
  if (o.steps) doc["steps"] = *o.steps;
  if (!o.out.empty()) doc["out_dir"] = o.out;
  if (o.normalize) doc["normalize_by_running_mean"] = true;
  for (const auto& a : o.overrides) fh::apply_override(doc, a);
  if (!doc.contains("kind")) throw fh::ConfigError("no experiment kind given (use --kind or the config file)");
  return fh::config_from_json(doc);
}

void print_files(const fh::RunOutcome& r) {
  for (const auto& f : r.files) std::cout << f.string() << "\n";
  std::cout << "wall time " << r.wall_seconds << " s\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"farlab: forgetting-aware curiosity experiments"};
  app.require_subcommand(1);

  CommonOpts run_opts, sweep_opts, save_opts;
  auto* run = app.add_subcommand("run", "run an experiment and write CSVs plus a manifest");
  add_common(run, run_opts);
  auto* sweep = app.add_subcommand("sweep", "rho/psi sensitivity sweep of a FARCuriosity experiment");
  add_common(sweep, sweep_opts);

  std::string report_dir;
  auto* report = app.add_subcommand("report", "summarize a run directory");
  report->add_option("run_dir", report_dir, "run directory")->required();

  std::string state_path;
  auto* save = app.add_subcommand("save", "train for --steps and save the learner state");
  add_common(save, save_opts);
  save->add_option("--state", state_path, "state file")->required();

  std::string probe_state;
  std::uint64_t probe_seed = 0;
  std::size_t probe_count = 1000;
  std::string probe_out;
  auto* probe = app.add_subcommand("probe", "score a deterministic probe sequence with a saved state");
  probe->add_option("--state", probe_state, "state file")->required();
  probe->add_option("--seed", probe_seed, "probe sequence seed");
  probe->add_option("--count", probe_count, "number of probe observations");
  probe->add_option("--out", probe_out, "CSV output (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*run) {
      print_files(fh::run_experiment(resolve(run_opts)));
    } else if (*sweep) {
      print_files(fh::run_sweep(resolve(sweep_opts)));
    } else if (*report) {
      const auto r = fh::write_report(report_dir);
      std::cout << r.markdown;
    } else if (*save) {
      const auto cfg = resolve(save_opts);
      const auto state = fh::build_state(cfg, cfg.seeds.front(), save_opts.steps.value_or(cfg.steps));
      fh::save_state(state_path, state);
      std::cout << "saved " << state_path << " after " << state.steps << " steps\n";
    } else if (*probe) {
      auto state = fh::load_state(probe_state);
      const auto seq = fh::probe_sequence(state.config, probe_seed, probe_count);
      const auto rewards = fh::run_probe(state, seq);
      fh::CsvTable t;
      t.columns = {"index", "intrinsic"};
      for (std::size_t i = 0; i < rewards.size(); ++i)
        t.add_row({std::to_string(i), fh::format_number(rewards[i])});
      if (probe_out.empty()) {
        std::cout << fh::kCsvSchemaLine << "\nindex,intrinsic\n";
        for (const auto& row : t.rows) std::cout << row[0] << "," << row[1] << "\n";
      } else {
        fh::write_csv(probe_out, t);
      }
    }
  } catch (const fh::MissingFilesError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const fh::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const fh::IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
