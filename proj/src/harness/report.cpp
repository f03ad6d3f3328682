#include "farlab/harness/report.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "farlab/harness/errors.hpp"
#include "farlab/harness/metrics.hpp"

namespace farlab::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("malformed manifest " + path.string() + ": " + e.what());
  }
}

double mean_where(const std::vector<double>& steps, const std::vector<double>& v, double lo, double hi) {
  std::vector<double> sel;
  for (std::size_t i = 0; i < steps.size(); ++i)
    if (steps[i] >= lo && steps[i] <= hi) sel.push_back(v[i]);
  return sel.empty() ? std::nan("") : mean(sel);
}

double tail_mean(const std::vector<double>& v, double fraction) {
  if (v.empty()) return std::nan("");
  const std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(v.size() * fraction)));
  return mean(std::span<const double>(v).last(n));
}

class Builder {
 public:
  void add(const std::string& section, const std::string& name, const std::string& value) {
    summary.add_row({section, name, value});
    if (section != last_section_) {
      md << "\n## " << section << "\n\n| name | value |\n|---|---|\n";
      last_section_ = section;
    }
    md << "| " << name << " | " << value << " |\n";
  }
  void add(const std::string& section, const std::string& name, double value) {
    add(section, name, format_number(value));
  }

  CsvTable summary;
  std::ostringstream md;

 private:
  std::string last_section_;
};

void event_timeline(Builder& b, const CsvTable& agg) {
  if (!agg.has_column("event")) return;
  const auto steps = agg.strings("step");
  const auto events = agg.strings("event");
  std::size_t n = 0;
  for (std::size_t i = 0; i < events.size(); ++i)
    if (events[i] != "none") {
      b.add("events", "step " + steps[i], events[i]);
      ++n;
    }
  if (n == 0) b.add("events", "structural events", "none");
}

void fragments_over_time(Builder& b, const CsvTable& agg) {
  if (!agg.has_column("n_fragments")) return;
  const auto steps = agg.numbers("step");
  const auto frags = agg.numbers("n_fragments");
  if (steps.empty()) return;
  // A handful of evenly spaced checkpoints keeps the table readable.
  const std::size_t points = std::min<std::size_t>(steps.size(), 5);
  for (std::size_t k = 0; k < points; ++k) {
    const std::size_t i = points == 1 ? 0 : k * (steps.size() - 1) / (points - 1);
    b.add("fragments", "step " + format_number(steps[i]), frags[i]);
  }
}

}  // namespace

Report build_report(const fs::path& run_dir) {
  const fs::path manifest_path = run_dir / "manifest.json";
  const fs::path aggregate_path = run_dir / "aggregate.csv";
  std::vector<std::string> missing;
  if (!fs::exists(manifest_path)) missing.push_back(manifest_path.string());
  if (!fs::exists(aggregate_path)) missing.push_back(aggregate_path.string());
  if (!missing.empty()) throw MissingFilesError(missing);

  const json manifest = read_manifest(manifest_path);
  if (manifest.contains("files"))
    for (const auto& f : manifest.at("files"))
      if (!fs::exists(run_dir / f.get<std::string>())) missing.push_back((run_dir / f.get<std::string>()).string());
  if (!missing.empty()) throw MissingFilesError(missing);

  const std::string kind = manifest.value("kind", std::string("unknown"));
  const CsvTable agg = read_csv(aggregate_path);

  Builder b;
  b.md << "# Run report: " << kind << "\n\n";
  b.md << "code version: " << manifest.value("code_version", std::string("?")) << ", config hash "
       << manifest.value("config_hash", std::string("?")) << "\n";
  b.add("run", "kind", kind);
  b.add("run", "seeds", std::to_string(manifest.value("seeds", json::array()).size()));

  if (agg.has_column("start_obs_intrinsic_mean")) {
    const auto steps = agg.numbers("step");
    const auto vals = agg.numbers("start_obs_intrinsic_mean");
    b.add("start observation", "trend slope", slope(steps, vals));
    b.add("start observation", "mean steps 1k-5k", mean_where(steps, vals, 1000, 5000));
    b.add("start observation", "mean final 10%", tail_mean(vals, 0.1));
  } else if (agg.has_column("rnd_probe_mean")) {
    const auto steps = agg.numbers("step");
    const auto rnd = agg.numbers("rnd_probe_mean");
    const auto far = agg.numbers("far_probe_mean");
    b.add("probe", "rnd trend slope", slope(steps, rnd));
    b.add("probe", "far trend slope", slope(steps, far));
    b.add("probe", "rnd final", rnd.back());
    b.add("probe", "far final", far.back());
    if (manifest.contains("structural_events"))
      for (const auto& e : manifest.at("structural_events")) {
        const std::string seed = "seed " + std::to_string(e.at("seed").get<std::uint64_t>());
        b.add("structural events", seed + " fragmentations", std::to_string(e.at("fragmentations").get<std::size_t>()));
        b.add("structural events", seed + " recalls", std::to_string(e.at("recalls").get<std::size_t>()));
      }
  } else if (agg.has_column("mean_return")) {
    const fs::path finals_path = run_dir / "finals.csv";
    if (!fs::exists(finals_path)) throw MissingFilesError({finals_path.string()});
    const CsvTable finals = read_csv(finals_path);
    const auto gammas = finals.numbers("gamma_decay");
    const auto returns = finals.numbers("final_return");
    std::vector<double> seen;
    for (double g : gammas) {
      if (std::find(seen.begin(), seen.end(), g) != seen.end()) continue;
      seen.push_back(g);
      std::vector<double> sel;
      for (std::size_t i = 0; i < gammas.size(); ++i)
        if (gammas[i] == g) sel.push_back(returns[i]);
      b.add("final return", "gamma_decay " + format_number(g) + " mean", mean(sel));
      b.add("final return", "gamma_decay " + format_number(g) + " stderr", stderr_of_mean(sel));
    }
  } else {
    throw ConfigError("unrecognised aggregate schema in " + aggregate_path.string());
  }

  fragments_over_time(b, agg);
  event_timeline(b, agg);

  Report r;
  r.summary = std::move(b.summary);
  r.summary.columns = {"section", "name", "value"};
  r.markdown = b.md.str();
  return r;
}

Report write_report(const fs::path& run_dir) {
  Report r = build_report(run_dir);
  write_csv(run_dir / "report.csv", r.summary);
  const fs::path md = run_dir / "report.md";
  std::ofstream out(md);
  if (!out) throw IoError("cannot write " + md.string());
  out << r.markdown;
  return r;
}

}  // namespace farlab::harness
