#include "farlab/harness/experiments.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <deque>
#include <exception>
#include <fstream>
#include <set>

#include "farlab/curiosity/rnd_module.hpp"
#include "farlab/envs/toy_grid.hpp"
#include "farlab/harness/errors.hpp"
#include "farlab/harness/metrics.hpp"
#include "farlab/nnkit/kernels.hpp"
#include "farlab/rng.hpp"

namespace farlab::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Stream tags for derive_seed.
constexpr std::uint64_t kEnvTag = 10;
constexpr std::uint64_t kWalkTag = 11;
constexpr std::uint64_t kCuriosityTag = 12;
constexpr std::uint64_t kPickTag = 13;
constexpr std::uint64_t kAgentTag = 20;
constexpr std::uint64_t kPolicyTag = 21;
constexpr std::uint64_t kEpisodeTag = 22;

// Accumulates the structural event kinds seen between two probes.
struct EventWindow {
  bool fragmented = false;
  bool recalled = false;

  void add(memory::EventKind k) {
    fragmented |= k == memory::EventKind::fragmented;
    recalled |= k == memory::EventKind::recalled;
  }
  void add(const std::string& label) {
    fragmented |= label.find("fragmented") != std::string::npos;
    recalled |= label.find("recalled") != std::string::npos;
  }
  std::string label() const {
    if (fragmented && recalled) return "fragmented+recalled";
    if (fragmented) return "fragmented";
    if (recalled) return "recalled";
    return "none";
  }
};

double nan_mean(const std::vector<double>& xs) {
  std::vector<double> ok;
  for (double x : xs)
    if (!std::isnan(x)) ok.push_back(x);
  return ok.empty() ? std::nan("") : mean(ok);
}

double nan_stderr(const std::vector<double>& xs) {
  std::vector<double> ok;
  for (double x : xs)
    if (!std::isnan(x)) ok.push_back(x);
  return stderr_of_mean(ok);
}

std::string fmt_int(std::int64_t v) { return std::to_string(v); }

// Runs fn(i) for i in [0, n) across up to seed_threads() threads and
// rethrows the first failure.
template <class Fn>
void parallel_jobs(std::size_t n, Fn fn) {
  std::vector<std::exception_ptr> errors(n);
  const int threads = std::max(1, std::min<int>(seed_threads(), static_cast<int>(n)));
#pragma omp parallel for num_threads(threads) schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

int seed_threads() {
  if (const char* env = std::getenv("FARLAB_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1, omp_get_num_procs());
}

// ---------------------------------------------------------------- toy grid

ToySeries run_toygrid(const ExperimentConfig& cfg, std::uint64_t seed) {
  envs::ToyGrid env(cfg.grid, derive_seed(seed, kEnvTag));
  Rng walk(derive_seed(seed, kWalkTag));
  const bool use_far = cfg.curiosity == CuriosityKind::far;
  if (cfg.curiosity == CuriosityKind::count) throw ConfigError("toy grid runs use rnd or far curiosity");

  std::optional<curiosity::RndModule> rnd;
  std::optional<memory::FarCuriosity> far;
  if (use_far)
    far.emplace(cfg.far, derive_seed(seed, kCuriosityTag));
  else
    rnd = curiosity::RndModule::create(cfg.far.rnd, derive_seed(seed, kCuriosityTag));

  const bool periodic = cfg.grid.regime == envs::EpisodeRegime::reset_free;
  const auto start = env.probe_start();
  curiosity::RunningStat stream_stats;

  ToySeries out;
  EventWindow window;
  std::span<const double> obs = env.current_obs();
  bool episode_start = true;
  for (std::int64_t s = 0; s < cfg.steps; ++s) {
    const bool probe_now = periodic ? s % cfg.probe_interval == 0 : episode_start;
    if (probe_now) {
      double p = use_far ? far->probe_reward(start) : rnd->reward(start);
      if (cfg.normalize_by_running_mean) {
        const double m = stream_stats.mean();
        p = stream_stats.count() == 0 ? 1.0 : (m < 1e-12 ? p : p / m);
      }
      out.steps.push_back(s);
      out.probe.push_back(p);
      if (use_far) {
        out.n_fragments.push_back(far->n_fragments());
        out.events.push_back(window.label());
        window = {};
      }
    }

    if (use_far) {
      const auto r = far->process_observation(obs);
      window.add(r.event);
      if (cfg.normalize_by_running_mean) stream_stats.push(r.intrinsic_reward);
    } else {
      if (cfg.normalize_by_running_mean) stream_stats.push(rnd->reward(obs));
      rnd->train(obs);
    }

    const auto st = env.step(walk);
    obs = st.obs;
    episode_start = st.episode_ended;
  }
  return out;
}

CsvTable toy_seed_table(const ToySeries& s, bool far) {
  CsvTable t;
  t.columns = {"step", "start_obs_intrinsic"};
  if (far) {
    t.columns.push_back("n_fragments");
    t.columns.push_back("event");
  }
  for (std::size_t i = 0; i < s.steps.size(); ++i) {
    std::vector<std::string> row{fmt_int(s.steps[i]), format_number(s.probe[i])};
    if (far) {
      row.push_back(fmt_int(static_cast<std::int64_t>(s.n_fragments[i])));
      row.push_back(s.events[i]);
    }
    t.add_row(std::move(row));
  }
  return t;
}

CsvTable toy_aggregate_table(const std::vector<ToySeries>& runs, bool far) {
  CsvTable t;
  t.columns = {"step", "start_obs_intrinsic_mean", "start_obs_intrinsic_stderr"};
  if (far) {
    t.columns.push_back("n_fragments");
    t.columns.push_back("event");
  }
  std::size_t rows = runs.empty() ? 0 : runs.front().steps.size();
  for (const auto& r : runs) rows = std::min(rows, r.steps.size());
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> vals, frags;
    EventWindow w;
    for (const auto& r : runs) {
      vals.push_back(r.probe[i]);
      if (far) {
        frags.push_back(static_cast<double>(r.n_fragments[i]));
        w.add(r.events[i]);
      }
    }
    std::vector<std::string> row{fmt_int(runs.front().steps[i]), format_number(mean(vals)),
                                 format_number(stderr_of_mean(vals))};
    if (far) {
      row.push_back(format_number(mean(frags)));
      row.push_back(w.label());
    }
    t.add_row(std::move(row));
  }
  return t;
}

// -------------------------------------------------------------- two region

std::vector<std::vector<double>> two_region_observations(const ExperimentConfig& cfg, std::uint64_t seed) {
  const int d = cfg.grid.obs_dim;
  const int half = d / 2;
  Rng rng(derive_seed(seed, kEnvTag));
  std::vector<std::vector<double>> obs;
  for (int region = 0; region < 2; ++region) {
    const int lo = region == 0 ? 0 : half;
    const int hi = region == 0 ? half : d;
    std::vector<double> center(d, 0.0);
    for (int i = lo; i < hi; ++i) center[i] = rng.uniform();
    for (int k = 0; k < cfg.two_region.region_size; ++k) {
      std::vector<double> o = center;
      for (int i = lo; i < hi; ++i)
        o[i] = std::max(0.0, center[i] + rng.uniform(-cfg.two_region.noise, cfg.two_region.noise));
      obs.push_back(std::move(o));
    }
  }
  return obs;
}

TwoRegionSeries run_two_region(const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto obs = two_region_observations(cfg, seed);
  const std::size_t K = static_cast<std::size_t>(cfg.two_region.region_size);
  const int blocks = cfg.two_region.blocks;

  TwoRegionSeries out;
  out.block_length = std::max<std::int64_t>(1, cfg.steps / blocks);

  auto rnd = curiosity::RndModule::create(cfg.far.rnd, derive_seed(seed, kCuriosityTag));
  memory::FarCuriosity far(cfg.far, derive_seed(seed, kCuriosityTag));
  Rng pick(derive_seed(seed, kPickTag));
  const auto& probe = obs.front();

  EventWindow window;
  auto record = [&](std::int64_t s, int region) {
    out.steps.push_back(s);
    out.region.push_back(region == 0 ? 'A' : 'B');
    out.rnd_probe.push_back(rnd.reward(probe));
    out.far_probe.push_back(far.probe_reward(probe));
    out.n_fragments.push_back(far.n_fragments());
    out.events.push_back(window.label());
    window = {};
  };

  int region = 0;
  for (std::int64_t s = 0; s < cfg.steps; ++s) {
    const std::int64_t block = std::min<std::int64_t>(s / out.block_length, blocks - 1);
    region = static_cast<int>(block % 2);
    if (s % cfg.probe_interval == 0) record(s, region);
    const auto& o = obs[static_cast<std::size_t>(region) * K + pick.below(K)];
    rnd.train(o);
    const auto r = far.process_observation(o);
    window.add(r.event);
    if (r.event == memory::EventKind::fragmented) ++out.fragmentations;
    if (r.event == memory::EventKind::recalled) ++out.recalls;
  }
  record(cfg.steps, region);
  return out;
}

CsvTable two_region_seed_table(const TwoRegionSeries& s) {
  CsvTable t;
  t.columns = {"step", "region", "rnd_probe", "far_probe", "n_fragments", "event"};
  for (std::size_t i = 0; i < s.steps.size(); ++i)
    t.add_row({fmt_int(s.steps[i]), std::string(1, s.region[i]), format_number(s.rnd_probe[i]),
               format_number(s.far_probe[i]), fmt_int(static_cast<std::int64_t>(s.n_fragments[i])), s.events[i]});
  return t;
}

CsvTable two_region_aggregate_table(const std::vector<TwoRegionSeries>& runs) {
  CsvTable t;
  t.columns = {"step", "region", "rnd_probe_mean", "rnd_probe_stderr", "far_probe_mean",
               "far_probe_stderr", "n_fragments", "event"};
  std::size_t rows = runs.empty() ? 0 : runs.front().steps.size();
  for (const auto& r : runs) rows = std::min(rows, r.steps.size());
  for (std::size_t i = 0; i < rows; ++i) {
    std::vector<double> rv, fv, nf;
    EventWindow w;
    for (const auto& r : runs) {
      rv.push_back(r.rnd_probe[i]);
      fv.push_back(r.far_probe[i]);
      nf.push_back(static_cast<double>(r.n_fragments[i]));
      w.add(r.events[i]);
    }
    t.add_row({fmt_int(runs.front().steps[i]), std::string(1, runs.front().region[i]), format_number(mean(rv)),
               format_number(stderr_of_mean(rv)), format_number(mean(fv)), format_number(stderr_of_mean(fv)),
               format_number(mean(nf)), w.label()});
  }
  return t;
}

// -------------------------------------------------------------- multi room

MultiRoomTrainer::MultiRoomTrainer(const ExperimentConfig& cfg, std::uint64_t seed, double gamma_decay)
    : cfg_(cfg),
      agent_(envs::kOneHotDim, envs::kNumActions, cfg.ppo, derive_seed(seed, kAgentTag)),
      buffer_(cfg.ppo.n_envs, cfg.ppo.rollout_len),
      policy_rng_(derive_seed(seed, kPolicyTag)),
      episode_rng_(derive_seed(seed, kEpisodeTag)) {
  if (cfg.curiosity == CuriosityKind::count)
    counter_.emplace(gamma_decay);
  else if (cfg.curiosity == CuriosityKind::far)
    far_.emplace(cfg.far, derive_seed(seed, kCuriosityTag));
  else
    throw ConfigError("multiroom runs use count or far curiosity");

  const std::size_t n = static_cast<std::size_t>(cfg.ppo.n_envs);
  envs_.assign(n, envs::MultiRoom(cfg.room));
  obs_.resize(n);
  encoded_.resize(n);
  episode_return_.assign(n, 0.0);
  for (std::size_t e = 0; e < n; ++e) start_episode(e);
  first_obs_.clear();
}

void MultiRoomTrainer::start_episode(std::size_t e) {
  obs_[e] = envs_[e].reset(episode_rng_.next_u64());
  encoded_[e] = envs::one_hot(obs_[e]);
  episode_return_[e] = 0.0;
  first_obs_.push_back(peek_intrinsic(obs_[e], encoded_[e]));
}

double MultiRoomTrainer::intrinsic(const envs::MultiRoomObs& obs, const std::vector<double>& encoded) {
  if (counter_) return counter_->reward(curiosity::key_of(std::span<const std::uint8_t>(obs)));
  return far_->process_observation(encoded).intrinsic_reward;
}

double MultiRoomTrainer::peek_intrinsic(const envs::MultiRoomObs& obs, const std::vector<double>& encoded) const {
  if (counter_) return counter_->peek_reward(curiosity::key_of(std::span<const std::uint8_t>(obs)));
  return far_->probe_reward(encoded);
}

void MultiRoomTrainer::iterate() {
  finished_.clear();
  first_obs_.clear();
  const std::size_t n = envs_.size();
  for (int t = 0; t < cfg_.ppo.rollout_len; ++t) {
    const auto acts = agent_.act_batch(encoded_, policy_rng_);
    for (std::size_t e = 0; e < n; ++e) {
      auto step = envs_[e].step(acts[e].action);
      auto next_encoded = envs::one_hot(step.obs);
      const double raw = intrinsic(step.obs, next_encoded);
      const double scaled = cfg_.normalize_intrinsic ? curiosity::normalize_intrinsic(intrinsic_stats_, raw) : raw;
      const double reward = agent::combine_rewards(step.reward, scaled, cfg_.c_int);
      buffer_.add(static_cast<int>(e), std::move(encoded_[e]), acts[e].action, acts[e].log_prob, acts[e].value,
                  step.reward, raw, reward, step.done);
      episode_return_[e] += step.reward;
      ++total_steps_;
      if (step.done) {
        finished_.push_back(episode_return_[e]);
        start_episode(e);
      } else {
        obs_[e] = std::move(step.obs);
        encoded_[e] = std::move(next_encoded);
      }
    }
  }
  const auto boot = nnkit::kernels::forward_batch_parallel(agent_.value_net(), encoded_);
  std::vector<double> bootstrap(n);
  for (std::size_t e = 0; e < n; ++e) bootstrap[e] = boot[e][0];
  buffer_.compute_advantages(bootstrap, cfg_.ppo.gamma, cfg_.ppo.lambda);
  agent_.update(buffer_);
  buffer_.clear();
}

MultiRoomSeries run_multiroom(const ExperimentConfig& cfg, std::uint64_t seed, double gamma_decay) {
  MultiRoomTrainer trainer(cfg, seed, gamma_decay);
  MultiRoomSeries out;
  out.gamma_decay = gamma_decay;
  std::deque<double> recent;
  std::vector<double> final_window;
  const double final_from = 0.9 * static_cast<double>(cfg.steps);
  while (trainer.total_steps() < cfg.steps) {
    trainer.iterate();
    for (double r : trainer.finished_returns()) {
      recent.push_back(r);
      if (recent.size() > 100) recent.pop_front();
      ++out.episodes;
    }
    if (static_cast<double>(trainer.total_steps()) > final_from)
      final_window.insert(final_window.end(), trainer.finished_returns().begin(), trainer.finished_returns().end());
    out.steps.push_back(trainer.total_steps());
    out.mean_return.push_back(recent.empty() ? std::nan("")
                                             : mean(std::vector<double>(recent.begin(), recent.end())));
    out.first_obs_intrinsic.push_back(trainer.first_obs_intrinsic().empty() ? std::nan("")
                                                                             : mean(trainer.first_obs_intrinsic()));
    out.n_fragments.push_back(trainer.far() ? trainer.far()->n_fragments() : 0);
  }
  out.final_return = final_window.empty() ? 0.0 : mean(final_window);
  return out;
}

CsvTable multiroom_seed_table(const std::vector<MultiRoomSeries>& per_gamma, bool far) {
  CsvTable t;
  t.columns = {"gamma_decay", "step", "mean_return", "first_obs_intrinsic"};
  if (far) t.columns.push_back("n_fragments");
  for (const auto& s : per_gamma)
    for (std::size_t i = 0; i < s.steps.size(); ++i) {
      std::vector<std::string> row{format_number(s.gamma_decay), fmt_int(s.steps[i]), format_number(s.mean_return[i]),
                                   format_number(s.first_obs_intrinsic[i])};
      if (far) row.push_back(fmt_int(static_cast<std::int64_t>(s.n_fragments[i])));
      t.add_row(std::move(row));
    }
  return t;
}

CsvTable multiroom_aggregate_table(const std::vector<std::vector<MultiRoomSeries>>& per_seed, bool far) {
  CsvTable t;
  t.columns = {"step", "mean_return", "stderr", "gamma_decay"};
  if (far) t.columns.push_back("n_fragments");
  if (per_seed.empty()) return t;
  for (std::size_t g = 0; g < per_seed.front().size(); ++g) {
    std::size_t rows = per_seed.front()[g].steps.size();
    for (const auto& seed_runs : per_seed) rows = std::min(rows, seed_runs[g].steps.size());
    for (std::size_t i = 0; i < rows; ++i) {
      std::vector<double> vals, frags;
      for (const auto& seed_runs : per_seed) {
        vals.push_back(seed_runs[g].mean_return[i]);
        frags.push_back(static_cast<double>(seed_runs[g].n_fragments[i]));
      }
      std::vector<std::string> row{fmt_int(per_seed.front()[g].steps[i]), format_number(nan_mean(vals)),
                                   format_number(nan_stderr(vals)), format_number(per_seed.front()[g].gamma_decay)};
      if (far) row.push_back(format_number(mean(frags)));
      t.add_row(std::move(row));
    }
  }
  return t;
}

// ------------------------------------------------------------ orchestration

namespace {

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

std::string utc_now() {
  const std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_manifest(const ExperimentConfig& cfg, const RunOutcome& outcome, const json& extra) {
  json files = json::array();
  for (const auto& f : outcome.files) files.push_back(f.filename().string());
  json manifest{{"schema", "farcuriosity-lab v1"},
                {"code_version", kCodeVersion},
                {"kind", to_string(cfg.kind)},
                {"config", to_json(cfg)},
                {"config_hash", config_hash(cfg)},
                {"seeds", cfg.seeds},
                {"files", files},
                {"wall_seconds", outcome.wall_seconds},
                {"created_utc", utc_now()}};
  manifest.update(extra);
  const fs::path path = fs::path(cfg.out_dir) / "manifest.json";
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << manifest.dump(2) << "\n";
  if (!out) throw IoError("write failed for " + path.string());
}

std::string seed_file(std::uint64_t seed) { return "seed_" + std::to_string(seed) + ".csv"; }

}  // namespace

RunOutcome run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir(cfg.out_dir);
  ensure_dir(dir);
  RunOutcome outcome;
  json extra = json::object();
  const std::size_t n_seeds = cfg.seeds.size();

  if (is_toygrid(cfg.kind)) {
    const bool far = cfg.curiosity == CuriosityKind::far;
    std::vector<ToySeries> runs(n_seeds);
    parallel_jobs(n_seeds, [&](std::size_t i) { runs[i] = run_toygrid(cfg, cfg.seeds[i]); });
    for (std::size_t i = 0; i < n_seeds; ++i) {
      outcome.files.push_back(dir / seed_file(cfg.seeds[i]));
      write_csv(outcome.files.back(), toy_seed_table(runs[i], far));
    }
    outcome.files.push_back(dir / "aggregate.csv");
    write_csv(outcome.files.back(), toy_aggregate_table(runs, far));
  } else if (cfg.kind == ExperimentKind::two_region) {
    std::vector<TwoRegionSeries> runs(n_seeds);
    parallel_jobs(n_seeds, [&](std::size_t i) { runs[i] = run_two_region(cfg, cfg.seeds[i]); });
    json events = json::array();
    for (std::size_t i = 0; i < n_seeds; ++i) {
      outcome.files.push_back(dir / seed_file(cfg.seeds[i]));
      write_csv(outcome.files.back(), two_region_seed_table(runs[i]));
      events.push_back({{"seed", cfg.seeds[i]},
                        {"fragmentations", runs[i].fragmentations},
                        {"recalls", runs[i].recalls},
                        {"block_length", runs[i].block_length}});
    }
    outcome.files.push_back(dir / "aggregate.csv");
    write_csv(outcome.files.back(), two_region_aggregate_table(runs));
    extra["structural_events"] = events;
  } else {
    const bool far = cfg.curiosity == CuriosityKind::far;
    const std::vector<double> gammas = far ? std::vector<double>{1.0} : cfg.gamma_decays;
    const std::size_t jobs = n_seeds * gammas.size();
    std::vector<std::vector<MultiRoomSeries>> runs(n_seeds, std::vector<MultiRoomSeries>(gammas.size()));
    parallel_jobs(jobs, [&](std::size_t j) {
      const std::size_t s = j / gammas.size(), g = j % gammas.size();
      runs[s][g] = run_multiroom(cfg, cfg.seeds[s], gammas[g]);
    });
    CsvTable finals;
    finals.columns = {"gamma_decay", "seed", "final_return", "episodes"};
    for (std::size_t s = 0; s < n_seeds; ++s) {
      outcome.files.push_back(dir / seed_file(cfg.seeds[s]));
      write_csv(outcome.files.back(), multiroom_seed_table(runs[s], far));
      for (const auto& r : runs[s])
        finals.add_row({format_number(r.gamma_decay), std::to_string(cfg.seeds[s]), format_number(r.final_return),
                        std::to_string(r.episodes)});
    }
    outcome.files.push_back(dir / "aggregate.csv");
    write_csv(outcome.files.back(), multiroom_aggregate_table(runs, far));
    outcome.files.push_back(dir / "finals.csv");
    write_csv(outcome.files.back(), finals);
  }

  outcome.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  write_manifest(cfg, outcome, extra);
  outcome.files.push_back(dir / "manifest.json");
  return outcome;
}

RunOutcome run_sweep(const ExperimentConfig& base) {
  if (base.curiosity != CuriosityKind::far)
    throw ConfigError("sweep needs a FARCuriosity experiment (toygrid-far, two-region or multiroom-far)");
  const auto t0 = std::chrono::steady_clock::now();
  const fs::path dir(base.out_dir);
  ensure_dir(dir);

  struct Setting {
    std::string name;
    double rho;
    double psi;
  };
  std::vector<Setting> settings;
  for (double rho : {5.0, 10.0, 15.0}) settings.push_back({"rho_" + format_number(rho), rho, base.far.psi});
  for (double psi : {0.95, 0.975, 0.99}) settings.push_back({"psi_" + format_number(psi), base.far.rho, psi});

  RunOutcome outcome;
  CsvTable summary;
  summary.columns = {"setting", "rho", "psi", "aggregate"};
  for (const auto& s : settings) {
    ExperimentConfig cfg = base;
    cfg.far.rho = s.rho;
    cfg.far.psi = s.psi;
    cfg.out_dir = (dir / s.name).string();
    run_experiment(cfg);
    summary.add_row({s.name, format_number(s.rho), format_number(s.psi), s.name + "/aggregate.csv"});
  }
  outcome.files.push_back(dir / "sweep.csv");
  write_csv(outcome.files.back(), summary);
  outcome.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return outcome;
}

}  // namespace farlab::harness
