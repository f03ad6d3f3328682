#include "farlab/harness/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "farlab/curiosity/visit_counter.hpp"
#include "farlab/harness/errors.hpp"
#include "farlab/harness/toml_lite.hpp"

namespace farlab::harness {

using nlohmann::json;

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::toygrid_resetfree: return "toygrid-resetfree";
    case ExperimentKind::toygrid_fixed: return "toygrid-fixed";
    case ExperimentKind::toygrid_increasing: return "toygrid-increasing";
    case ExperimentKind::toygrid_far: return "toygrid-far";
    case ExperimentKind::two_region: return "two-region";
    case ExperimentKind::multiroom_decay: return "multiroom-decay";
    case ExperimentKind::multiroom_far: return "multiroom-far";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::toygrid_resetfree, ExperimentKind::toygrid_fixed,
                 ExperimentKind::toygrid_increasing, ExperimentKind::toygrid_far, ExperimentKind::two_region,
                 ExperimentKind::multiroom_decay, ExperimentKind::multiroom_far})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown experiment kind '" + s + "'");
}

std::string to_string(CuriosityKind k) {
  switch (k) {
    case CuriosityKind::far: return "far";
    case CuriosityKind::count: return "count";
    default: return "rnd";
  }
}

CuriosityKind curiosity_kind_from_string(const std::string& s) {
  if (s == "rnd") return CuriosityKind::rnd;
  if (s == "far") return CuriosityKind::far;
  if (s == "count") return CuriosityKind::count;
  throw ConfigError("unknown curiosity kind '" + s + "'");
}

bool is_toygrid(ExperimentKind k) {
  return k == ExperimentKind::toygrid_resetfree || k == ExperimentKind::toygrid_fixed ||
         k == ExperimentKind::toygrid_increasing || k == ExperimentKind::toygrid_far;
}

bool is_multiroom(ExperimentKind k) {
  return k == ExperimentKind::multiroom_decay || k == ExperimentKind::multiroom_far;
}

ExperimentConfig defaults_for(ExperimentKind kind) {
  ExperimentConfig c;
  c.kind = kind;
  c.far.rnd.obs_dim = c.grid.obs_dim;
  switch (kind) {
    case ExperimentKind::toygrid_resetfree: c.grid.regime = envs::EpisodeRegime::reset_free; break;
    case ExperimentKind::toygrid_fixed: c.grid.regime = envs::EpisodeRegime::fixed; break;
    case ExperimentKind::toygrid_increasing: c.grid.regime = envs::EpisodeRegime::increasing; break;
    case ExperimentKind::toygrid_far:
      c.curiosity = CuriosityKind::far;
      c.grid.regime = c.far_regime;
      break;
    case ExperimentKind::two_region:
      c.curiosity = CuriosityKind::far;
      c.steps = 30000;
      c.probe_interval = 100;
      break;
    case ExperimentKind::multiroom_decay:
      c.curiosity = CuriosityKind::count;
      c.steps = 500000;
      c.probe_interval = 0;
      c.far.rnd.obs_dim = envs::kOneHotDim;
      // Raw 1/sqrt(N) keeps the decay floor visible; a running-mean rescale
      // would hide it. A larger bonus outweighs the one-off goal reward.
      c.normalize_intrinsic = false;
      c.c_int = 0.01;
      break;
    case ExperimentKind::multiroom_far:
      c.curiosity = CuriosityKind::far;
      c.steps = 500000;
      c.probe_interval = 0;
      c.far.rnd.obs_dim = envs::kOneHotDim;
      c.gamma_decays = {1.0};
      c.c_int = 0.01;
      break;
  }
  return c;
}

void ExperimentConfig::validate() const {
  if (steps <= 0) throw ConfigError("steps must be > 0");
  if (seeds.empty()) throw ConfigError("seeds must be nonempty");
  try {
    far.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("far: ") + e.what());
  }
  if (far.rnd.obs_dim <= 0 || far.rnd.hidden <= 0 || far.rnd.out_dim <= 0 || far.rnd.lr <= 0.0)
    throw ConfigError("rnd dimensions and learning rate must be positive");
  if (is_toygrid(kind) || kind == ExperimentKind::two_region) {
    if (probe_interval <= 0) throw ConfigError("probe_interval must be > 0");
    if (far.rnd.obs_dim != grid.obs_dim) throw ConfigError("far.rnd.obs_dim must equal grid.obs_dim");
    if (grid.width < 2 || grid.height < 2) throw ConfigError("grid must be at least 2x2");
  }
  if (kind == ExperimentKind::two_region) {
    if (two_region.blocks < 2 || two_region.region_size < 1 || two_region.noise < 0.0)
      throw ConfigError("two_region needs blocks >= 2, region_size >= 1, noise >= 0");
    if (grid.obs_dim < 2) throw ConfigError("two_region needs obs_dim >= 2");
  }
  if (is_multiroom(kind)) {
    if (far.rnd.obs_dim != envs::kOneHotDim)
      throw ConfigError("multiroom runs need far.rnd.obs_dim = " + std::to_string(envs::kOneHotDim));
    if (room.n_rooms < 1 || room.min_room < 4 || room.max_room < room.min_room || room.t_max <= 0)
      throw ConfigError("invalid room settings");
    if (ppo.n_envs <= 0 || ppo.rollout_len <= 0 || ppo.epochs <= 0 || ppo.minibatches <= 0 || ppo.lr <= 0.0)
      throw ConfigError("invalid ppo settings");
    if (gamma_decays.empty()) throw ConfigError("gamma_decays must be nonempty");
    for (double g : gamma_decays)
      if (!(g > 0.0 && g <= 1.0)) throw ConfigError("gamma_decays entries must lie in (0, 1]");
    if (c_int < 0.0) throw ConfigError("c_int must be >= 0");
  }
}

json to_json(const ExperimentConfig& c) {
  return {{"kind", to_string(c.kind)},
          {"seeds", c.seeds},
          {"steps", c.steps},
          {"curiosity", to_string(c.curiosity)},
          {"far", memory::far_config_to_json(c.far)},
          {"grid",
           {{"width", c.grid.width},
            {"height", c.grid.height},
            {"obs_dim", c.grid.obs_dim},
            {"fixed_length", c.grid.fixed_length},
            {"increasing_unit", c.grid.increasing_unit}}},
          {"far_regime", envs::to_string(c.far_regime)},
          {"probe_interval", c.probe_interval},
          {"normalize_by_running_mean", c.normalize_by_running_mean},
          {"two_region",
           {{"region_size", c.two_region.region_size},
            {"noise", c.two_region.noise},
            {"blocks", c.two_region.blocks}}},
          {"room",
           {{"n_rooms", c.room.n_rooms},
            {"min_room", c.room.min_room},
            {"max_room", c.room.max_room},
            {"grid_size", c.room.grid_size},
            {"t_max", c.room.t_max}}},
          {"ppo", agent::ppo_config_to_json(c.ppo)},
          {"gamma_decays", c.gamma_decays},
          {"c_int", c.c_int},
          {"normalize_intrinsic", c.normalize_intrinsic},
          {"out_dir", c.out_dir}};
}

ExperimentConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config document must be an object");
  try {
    const auto kind = experiment_kind_from_string(doc.value("kind", std::string("toygrid-resetfree")));
    json merged = to_json(defaults_for(kind));
    static const std::set<std::string> known = [&] {
      std::set<std::string> k;
      for (const auto& [key, v] : merged.items()) k.insert(key);
      return k;
    }();
    for (const auto& [key, v] : doc.items())
      if (!known.count(key)) throw ConfigError("unknown config field '" + key + "'");
    merged.merge_patch(doc);

    ExperimentConfig c;
    c.kind = kind;
    c.seeds = merged.at("seeds").get<std::vector<std::uint64_t>>();
    c.steps = merged.at("steps").get<std::int64_t>();
    c.curiosity = curiosity_kind_from_string(merged.at("curiosity").get<std::string>());
    c.far = memory::far_config_from_json(merged.at("far"));
    const auto& g = merged.at("grid");
    c.grid.width = g.at("width").get<int>();
    c.grid.height = g.at("height").get<int>();
    c.grid.obs_dim = g.at("obs_dim").get<int>();
    c.grid.fixed_length = g.at("fixed_length").get<int>();
    c.grid.increasing_unit = g.at("increasing_unit").get<int>();
    c.far_regime = envs::regime_from_string(merged.at("far_regime").get<std::string>());
    c.grid.regime = defaults_for(kind).grid.regime;
    if (kind == ExperimentKind::toygrid_far) c.grid.regime = c.far_regime;
    c.probe_interval = merged.at("probe_interval").get<std::int64_t>();
    c.normalize_by_running_mean = merged.at("normalize_by_running_mean").get<bool>();
    const auto& tr = merged.at("two_region");
    c.two_region.region_size = tr.at("region_size").get<int>();
    c.two_region.noise = tr.at("noise").get<double>();
    c.two_region.blocks = tr.at("blocks").get<int>();
    const auto& r = merged.at("room");
    c.room.n_rooms = r.at("n_rooms").get<int>();
    c.room.min_room = r.at("min_room").get<int>();
    c.room.max_room = r.at("max_room").get<int>();
    c.room.grid_size = r.at("grid_size").get<int>();
    c.room.t_max = r.at("t_max").get<int>();
    c.ppo = agent::ppo_config_from_json(merged.at("ppo"));
    c.gamma_decays = merged.at("gamma_decays").get<std::vector<double>>();
    c.c_int = merged.at("c_int").get<double>();
    c.normalize_intrinsic = merged.at("normalize_intrinsic").get<bool>();
    c.out_dir = merged.at("out_dir").get<std::string>();
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

json load_config_document(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (path.extension() == ".toml") return parse_toml(text);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value;
  try {
    value = json::parse(text);
  } catch (const json::parse_error&) {
    value = text;
  }
  json* node = &doc;
  std::size_t start = 0;
  for (;;) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ConfigError("override has an empty key segment: " + assignment);
    if (!node->is_object()) *node = json::object();
    if (dot == std::string::npos) {
      (*node)[part] = std::move(value);
      return;
    }
    node = &(*node)[part];
    start = dot + 1;
  }
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string dump = to_json(cfg).dump();
  const auto key = curiosity::md5_key(std::span<const std::uint8_t>(
      reinterpret_cast<const std::uint8_t*>(dump.data()), dump.size()));
  return curiosity::to_hex(key);
}

}  // namespace farlab::harness
