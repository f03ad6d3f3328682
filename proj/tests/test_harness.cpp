#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "farlab/harness/config.hpp"
#include "farlab/harness/csv.hpp"
#include "farlab/harness/errors.hpp"
#include "farlab/harness/experiments.hpp"
#include "farlab/harness/metrics.hpp"
#include "farlab/harness/report.hpp"
#include "farlab/harness/state_io.hpp"
#include "farlab/harness/toml_lite.hpp"
#include "farlab/rng.hpp"

using namespace farlab;
using namespace farlab::harness;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("farlab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

ExperimentConfig small(ExperimentKind kind, const fs::path& out, std::int64_t steps) {
  auto cfg = defaults_for(kind);
  cfg.steps = steps;
  cfg.seeds = {0, 1};
  cfg.out_dir = out.string();
  return cfg;
}

}  // namespace

TEST(Metrics, RelativeImprovementSpotChecks) {
  EXPECT_NEAR(relative_improvement(13073.0, 2946.2), 3.4372, 1e-4);
  EXPECT_NEAR(relative_improvement(-8.0, -5.1), -0.5686, 1e-4);
  EXPECT_EQ(relative_improvement(2.5, 2.5), 0.0);
  EXPECT_THROW(relative_improvement(1.0, 0.0), std::domain_error);
}

TEST(Metrics, IqmSmallCasesAndOracle) {
  EXPECT_DOUBLE_EQ(iqm(std::vector<double>{1, 2, 3, 4}), 2.5);
  EXPECT_DOUBLE_EQ(iqm(std::vector<double>(7, 3.25)), 3.25);
  EXPECT_THROW(iqm(std::vector<double>{}), std::invalid_argument);
  Rng rng(1);
  std::vector<double> xs(1000);
  for (auto& x : xs) x = rng.uniform(-10, 10);
  auto sorted = xs;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t cut = xs.size() / 4;
  double s = 0;
  for (std::size_t i = cut; i < xs.size() - cut; ++i) s += sorted[i];
  EXPECT_NEAR(iqm(xs), s / static_cast<double>(xs.size() - 2 * cut), 1e-12);
}

TEST(Metrics, BwtExamplesAndOracle) {
  EXPECT_NEAR(bwt({{0.8, 0.0}, {0.5, 0.9}}), -0.3, 1e-15);
  EXPECT_EQ(bwt({{1, 0, 0}, {0, 2, 0}, {1, 2, 3}}), 0.0);
  EXPECT_THROW(bwt({{1.0}}), std::invalid_argument);
  Rng rng(2);
  std::vector<std::vector<double>> xi(4, std::vector<double>(4));
  for (auto& row : xi)
    for (auto& v : row) v = rng.uniform();
  double s = 0;
  for (int i = 0; i < 3; ++i) s += xi[3][i] - xi[i][i];
  EXPECT_NEAR(bwt(xi), s / 3.0, 1e-15);
}

TEST(Metrics, StderrAndSlope) {
  const std::vector<double> xs{1, 2, 3, 4, 6};
  const double m = 3.2;
  double ss = 0;
  for (double x : xs) ss += (x - m) * (x - m);
  EXPECT_NEAR(stderr_of_mean(xs), std::sqrt(ss / 4) / std::sqrt(5.0), 1e-15);
  EXPECT_EQ(stderr_of_mean(std::vector<double>{2.0}), 0.0);
  EXPECT_NEAR(slope(std::vector<double>{0, 1, 2}, std::vector<double>{1, 3, 5}), 2.0, 1e-15);
}

TEST(TomlLite, ParsesTheConfigSubset) {
  const auto doc = parse_toml(R"(# comment
kind = "toygrid-far"
steps = 1_000
seeds = [1, 2, 3]
[far]
rho = 15.0
recall_enabled = false
rnd.lr = 1e-3
)");
  EXPECT_EQ(doc["kind"], "toygrid-far");
  EXPECT_EQ(doc["steps"], 1000);
  EXPECT_EQ(doc["seeds"], nlohmann::json({1, 2, 3}));
  EXPECT_EQ(doc["far"]["rho"], 15.0);
  EXPECT_EQ(doc["far"]["recall_enabled"], false);
  EXPECT_EQ(doc["far"]["rnd"]["lr"], 1e-3);
  EXPECT_THROW(parse_toml("x = {inline = 1}"), ConfigError);
}

TEST(Config, DefaultsRoundTripAndValidate) {
  for (const char* name : {"toygrid-resetfree", "toygrid-fixed", "toygrid-increasing", "toygrid-far", "two-region",
                           "multiroom-decay", "multiroom-far"}) {
    const auto cfg = defaults_for(experiment_kind_from_string(name));
    EXPECT_NO_THROW(cfg.validate()) << name;
    const auto back = config_from_json(to_json(cfg));
    EXPECT_EQ(to_json(back), to_json(cfg)) << name;
    EXPECT_EQ(config_hash(back), config_hash(cfg));
  }
  const auto decay = defaults_for(ExperimentKind::multiroom_decay);
  EXPECT_EQ(decay.gamma_decays, (std::vector<double>{0.999, 0.9995, 1.0}));
  EXPECT_EQ(decay.seeds.size(), 3u);
  EXPECT_EQ(defaults_for(ExperimentKind::toygrid_resetfree).probe_interval, 200);
}

TEST(Config, InvalidDocumentsRaiseConfigError) {
  EXPECT_THROW(config_from_json({{"kind", "toygrid-fixed"}, {"steps", 0}}), ConfigError);
  EXPECT_THROW(config_from_json({{"kind", "toygrid-fixed"}, {"seeds", nlohmann::json::array()}}), ConfigError);
  EXPECT_THROW(config_from_json({{"kind", "bogus"}}), ConfigError);
  EXPECT_THROW(config_from_json({{"kind", "toygrid-fixed"}, {"sttps", 3}}), ConfigError);
  EXPECT_THROW(config_from_json({{"kind", "toygrid-fixed"}, {"steps", "many"}}), ConfigError);
}

TEST(Config, OverridesAndFiles) {
  nlohmann::json doc{{"kind", "toygrid-far"}};
  apply_override(doc, "far.rho=15");
  apply_override(doc, "out_dir=runs/x");
  apply_override(doc, "far.recall_enabled=false");
  const auto cfg = config_from_json(doc);
  EXPECT_EQ(cfg.far.rho, 15.0);
  EXPECT_EQ(cfg.out_dir, "runs/x");
  EXPECT_FALSE(cfg.far.recall_enabled);
  EXPECT_THROW(apply_override(doc, "novalue"), ConfigError);

  const auto dir = scratch("cfgfile");
  std::ofstream(dir / "c.toml") << "kind = \"toygrid-fixed\"\nsteps = 400\n";
  EXPECT_EQ(config_from_json(load_config_document(dir / "c.toml")).steps, 400);
  std::ofstream(dir / "c.json") << R"({"kind": "toygrid-fixed", "steps": 500})";
  EXPECT_EQ(config_from_json(load_config_document(dir / "c.json")).steps, 500);
  EXPECT_THROW(load_config_document(dir / "missing.toml"), IoError);
}

TEST(Csv, RoundTripAndSchemaLine) {
  const auto dir = scratch("csv");
  CsvTable t;
  t.columns = {"step", "value", "event"};
  t.add_row({"0", format_number(0.1), "none"});
  t.add_row({"200", format_number(1.0 / 3.0), "fragmented+recalled"});
  write_csv(dir / "t.csv", t);
  EXPECT_EQ(slurp(dir / "t.csv").rfind(kCsvSchemaLine, 0), 0u);
  const auto back = read_csv(dir / "t.csv");
  EXPECT_EQ(back.columns, t.columns);
  EXPECT_EQ(back.rows, t.rows);
  EXPECT_EQ(back.numbers("value")[1], 1.0 / 3.0);
  EXPECT_THROW(read_csv(dir / "nope.csv"), IoError);
}

TEST(Experiments, ToyGridSchemasAndAggregateStderr) {
  const auto dir = scratch("toy");
  auto cfg = small(ExperimentKind::toygrid_resetfree, dir, 2000);
  run_experiment(cfg);
  const auto agg = read_csv(dir / "aggregate.csv");
  EXPECT_EQ(agg.columns, (std::vector<std::string>{"step", "start_obs_intrinsic_mean", "start_obs_intrinsic_stderr"}));
  EXPECT_EQ(agg.rows.size(), 10u);
  const auto s0 = read_csv(dir / "seed_0.csv").numbers("start_obs_intrinsic");
  const auto s1 = read_csv(dir / "seed_1.csv").numbers("start_obs_intrinsic");
  const auto se = agg.numbers("start_obs_intrinsic_stderr");
  for (std::size_t i = 0; i < s0.size(); ++i) {
    const double m = 0.5 * (s0[i] + s1[i]);
    const double sd = std::sqrt((s0[i] - m) * (s0[i] - m) + (s1[i] - m) * (s1[i] - m));
    EXPECT_NEAR(se[i], sd / std::sqrt(2.0), 1e-12);
  }
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["code_version"], kCodeVersion);
  EXPECT_EQ(manifest["config_hash"], config_hash(cfg));
  EXPECT_TRUE(manifest.contains("wall_seconds"));
}

TEST(Experiments, FixedRegimeProbesAtEpisodeStarts) {
  auto cfg = defaults_for(ExperimentKind::toygrid_fixed);
  cfg.steps = 1000;
  const auto s = run_toygrid(cfg, 0);
  EXPECT_EQ(s.steps, (std::vector<std::int64_t>{0, 200, 400, 600, 800}));
}

TEST(Experiments, FarRunAddsFragmentColumns) {
  const auto dir = scratch("far");
  run_experiment(small(ExperimentKind::toygrid_far, dir, 1000));
  const auto agg = read_csv(dir / "aggregate.csv");
  EXPECT_TRUE(agg.has_column("n_fragments"));
  EXPECT_TRUE(agg.has_column("event"));
  EXPECT_EQ(agg.columns.front(), "step");
}

TEST(Experiments, MultiRoomSchema) {
  const auto dir = scratch("mr");
  auto cfg = small(ExperimentKind::multiroom_decay, dir, 1024);
  cfg.seeds = {0};
  cfg.gamma_decays = {1.0, 0.999};
  run_experiment(cfg);
  const auto agg = read_csv(dir / "aggregate.csv");
  EXPECT_EQ(agg.columns, (std::vector<std::string>{"step", "mean_return", "stderr", "gamma_decay"}));
  EXPECT_EQ(agg.rows.size(), 2u);
  const auto rep = build_report(dir);
  EXPECT_FALSE(rep.markdown.empty());
}

TEST(Experiments, TwoRegionStreamUsesDisjointSupports) {
  const auto cfg = defaults_for(ExperimentKind::two_region);
  const auto obs = two_region_observations(cfg, 3);
  ASSERT_EQ(obs.size(), 32u);
  for (std::size_t k = 0; k < 16; ++k)
    for (int i = 16; i < 32; ++i) {
      EXPECT_EQ(obs[k][i], 0.0);
      EXPECT_EQ(obs[16 + k][i - 16], 0.0);
    }
}

TEST(Experiments, RunsAreByteIdenticalAcrossRepeats) {
  const auto a = scratch("det_a"), b = scratch("det_b");
  for (auto kind : {ExperimentKind::toygrid_increasing, ExperimentKind::toygrid_far}) {
    run_experiment(small(kind, a, 1500));
    run_experiment(small(kind, b, 1500));
    for (const char* f : {"seed_0.csv", "seed_1.csv", "aggregate.csv"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
}

TEST(Report, ListsMissingFiles) {
  const auto dir = scratch("report_missing");
  try {
    build_report(dir);
    FAIL() << "expected MissingFilesError";
  } catch (const MissingFilesError& e) {
    EXPECT_EQ(e.missing.size(), 2u);
  }
}

TEST(Report, ToyRunSummary) {
  const auto dir = scratch("report_toy");
  run_experiment(small(ExperimentKind::toygrid_far, dir, 1200));
  const auto r = write_report(dir);
  EXPECT_TRUE(fs::exists(dir / "report.csv"));
  EXPECT_TRUE(fs::exists(dir / "report.md"));
  EXPECT_NE(r.markdown.find("trend slope"), std::string::npos);
}

TEST(StateIo, RoundTripGivesIdenticalProbeRewards) {
  const auto dir = scratch("state");
  for (auto kind : {ExperimentKind::toygrid_far, ExperimentKind::toygrid_resetfree}) {
    auto cfg = defaults_for(kind);
    auto live = build_state(cfg, 4, 800);
    save_state(dir / "s.json", live);
    auto loaded = load_state(dir / "s.json");
    const auto seq = probe_sequence(cfg, 99, 300);
    EXPECT_EQ(run_probe(live, seq), run_probe(loaded, seq));
  }
}

TEST(StateIo, CounterAndAgentRoundTrip) {
  const auto dir = scratch("state_mr");
  auto cfg = defaults_for(ExperimentKind::multiroom_decay);
  cfg.gamma_decays = {0.999};
  auto live = build_state(cfg, 1, 1024);
  ASSERT_TRUE(live.counter && live.agent);
  save_state(dir / "s.json", live);
  auto loaded = load_state(dir / "s.json");
  EXPECT_TRUE(loaded.agent->same_state(*live.agent));
  const auto seq = probe_sequence(cfg, 5, 200);
  EXPECT_EQ(run_probe(live, seq), run_probe(loaded, seq));
}

TEST(StateIo, VersionMismatchAndTruncation) {
  const auto dir = scratch("state_bad");
  auto live = build_state(defaults_for(ExperimentKind::toygrid_far), 0, 100);
  auto doc = state_to_json(live);
  doc["version"] = kStateVersion + 1;
  try {
    state_from_json(doc);
    FAIL() << "expected VersionMismatchError";
  } catch (const VersionMismatchError& e) {
    EXPECT_EQ(e.expected_version, kStateVersion);
    EXPECT_EQ(e.found_version, kStateVersion + 1);
  }
  save_state(dir / "s.json", live);
  const auto text = slurp(dir / "s.json");
  std::ofstream(dir / "t.json") << text.substr(0, text.size() / 2);
  EXPECT_THROW(load_state(dir / "t.json"), ConfigError);
}
