#include "tiers/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <cstdio>
#include <sstream>

#include "tiers/csv.hpp"
#include "tiers/error.hpp"
#include "tiers/parallel.hpp"

namespace tiers {

namespace {

constexpr double kMaxFailureShare = 0.2;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size() || !std::isfinite(d)) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ArgumentError("config key '" + key + "': not a finite number: '" + v + "'");
  }
}

long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long long d = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return static_cast<long>(d);
  } catch (const std::exception&) {
    throw ArgumentError("config key '" + key + "': not an integer: '" + v + "'");
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ArgumentError("config key '" + key + "': not a boolean: '" + v + "'");
}

std::vector<double> to_grid(const std::string& key, std::string v) {
  if (!v.empty() && v.front() == '[' && v.back() == ']') v = v.substr(1, v.size() - 2);
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  return out;
}

void apply(ExperimentSpec& s, const std::string& key, const std::string& v) {
  if (key == "study") {
    if (v == "regression") s.study = Study::Regression;
    else if (v == "ggm") s.study = Study::Ggm;
    else throw ArgumentError("study must be 'regression' or 'ggm', got '" + v + "'");
  } else if (key == "regime") {
    if (auto r = parse_regime(v)) {
      s.regime = *r;
    } else if (auto g = parse_ggm_regime(v)) {
      s.ggm_regime = *g;
      s.study = Study::Ggm;
    } else {
      throw ArgumentError("unknown regime '" + v + "' (SL, SH, DL, DH, SbSO, DbSO, SbDO, DbDO)");
    }
  } else if (key == "c") {
    s.c = to_double(key, v);
  } else if (key == "n") {
    s.n = to_long(key, v);
  } else if (key == "p") {
    s.p = to_long(key, v);
  } else if (key == "h_grid") {
    s.h_grid = to_grid(key, v);
  } else if (key == "reps") {
    s.reps = static_cast<int>(to_long(key, v));
  } else if (key == "alpha") {
    s.alpha = to_double(key, v);
  } else if (key == "variant") {
    if (v == "tiers" || v == "TIERS") s.variant = Variant::Tiers;
    else if (v == "tiers+" || v == "TIERS+" || v == "tiers_plus") s.variant = Variant::TiersPlus;
    else throw ArgumentError("variant must be 'tiers' or 'tiers+', got '" + v + "'");
  } else if (key == "seed") {
    s.seed = static_cast<std::uint64_t>(to_long(key, v));
  } else if (key == "draws") {
    s.draws = static_cast<int>(to_long(key, v));
  } else if (key == "eta") {
    if (v == "adaptive" || v.empty()) s.eta.reset();
    else s.eta = to_double(key, v);
  } else if (key == "mu_scale") {
    s.mu_scale = to_double(key, v);
  } else if (key == "weighted_qhat") {
    s.weighted_qhat = to_bool(key, v);
  } else {
    throw ArgumentError("unknown config key '" + key + "'");
  }
}

}  // namespace

std::string to_string(Study s) { return s == Study::Regression ? "regression" : "ggm"; }

void ExperimentSpec::validate() const {
  if (n < 2) throw ArgumentError("n must be at least 2");
  if (p < 2) throw ArgumentError("p must be at least 2");
  if (h_grid.empty()) throw ArgumentError("h_grid must be nonempty");
  for (double h : h_grid)
    if (!std::isfinite(h)) throw ArgumentError("h_grid entries must be finite");
  if (reps < 1) throw ArgumentError("reps must be at least 1");
  if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
  if (draws < 1000) throw ArgumentError("draws must be at least 1000");
  if (study == Study::Regression && !(c > 0.0)) throw ArgumentError("c must be positive");
  if (study == Study::Ggm) ggm_blocks(p);
  if (eta && !(*eta > 0.0)) throw ArgumentError("eta must be positive");
  if (!(mu_scale > 0.0)) throw ArgumentError("mu_scale must be positive");
}

std::string ExperimentSpec::canonical() const {
  std::ostringstream o;
  o << "study = " << to_string(study) << '\n';
  o << "regime = " << (study == Study::Regression ? to_string(regime) : to_string(ggm_regime)) << '\n';
  if (study == Study::Regression) o << "c = " << format_double(c) << '\n';
  o << "n = " << n << '\n' << "p = " << p << '\n';
  o << "h_grid = ";
  for (std::size_t i = 0; i < h_grid.size(); ++i) o << (i ? "," : "") << format_double(h_grid[i]);
  o << '\n';
  o << "reps = " << reps << '\n' << "alpha = " << format_double(alpha) << '\n';
  o << "variant = " << (variant == Variant::Tiers ? "tiers" : "tiers+") << '\n';
  o << "seed = " << seed << '\n' << "draws = " << draws << '\n';
  o << "eta = " << (eta ? format_double(*eta) : std::string("adaptive")) << '\n';
  o << "mu_scale = " << format_double(mu_scale) << '\n';
  o << "weighted_qhat = " << (weighted_qhat ? "true" : "false") << '\n';
  return o.str();
}

ExperimentSpec desk_preset() { return ExperimentSpec{}; }

ExperimentSpec paper_preset() {
  ExperimentSpec s;
  s.n = 200;
  s.p = 500;
  s.reps = 100;
  return s;
}

ExperimentSpec parse_experiment_config(const std::string& text) {
  std::vector<std::pair<std::string, std::string>> entries;
  std::istringstream in(text);
  std::string line;
  long line_no = 0;
  ExperimentSpec spec = desk_preset();
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ArgumentError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = unquote(trim(line.substr(eq + 1)));
    if (key == "preset") {
      if (value == "desk") spec = desk_preset();
      else if (value == "paper") spec = paper_preset();
      else throw ArgumentError("preset must be 'desk' or 'paper', got '" + value + "'");
      continue;
    }
    entries.emplace_back(std::move(key), std::move(value));
  }
  for (const auto& [k, v] : entries) apply(spec, k, v);
  spec.validate();
  return spec;
}

ExperimentSpec load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

std::uint64_t rep_seed(std::uint64_t experiment_seed, std::size_t h_index, int rep) {
  return derive_seed(experiment_seed, {static_cast<std::uint64_t>(h_index), static_cast<std::uint64_t>(rep)});
}

TestResult run_replication(const ExperimentSpec& spec, double h, std::uint64_t seed) {
  const SyntheticDataset ds =
      spec.study == Study::Regression
          ? gen_regression(spec.regime, spec.c, h, spec.n, spec.p, derive_seed(seed, {0}))
          : gen_ggm(spec.ggm_regime, h, spec.n, spec.p, derive_seed(seed, {0}));
  TiersConfig cfg;
  cfg.draws = spec.draws;
  cfg.seed = derive_seed(seed, {1});
  cfg.eta = spec.eta;
  cfg.mu_scale = spec.mu_scale;
  cfg.weighted_qhat = spec.weighted_qhat;
  cfg.threads = 1;
  return spec.variant == Variant::Tiers ? run_tiers(ds.data, spec.alpha, cfg)
                                        : run_tiers_plus(ds.data, spec.alpha, cfg);
}

ExperimentReport run_experiment(const ExperimentSpec& spec, const RunOptions& options) {
  spec.validate();
  using clock = std::chrono::steady_clock;
  const auto start = clock::now();

  struct Outcome {
    bool ok = false;
    TestResult result;
    std::string error;
    double seconds = 0.0;
  };
  const long per_h = spec.reps;
  const long total = static_cast<long>(spec.h_grid.size()) * per_h;
  std::vector<Outcome> outcomes(static_cast<std::size_t>(total));
  std::atomic<long> done{0};
  const int threads = resolve_threads(options.threads);

  parallel_for(total, threads, [&](long k) {
    const std::size_t hi = static_cast<std::size_t>(k / per_h);
    const int rep = static_cast<int>(k % per_h);
    Outcome& out = outcomes[static_cast<std::size_t>(k)];
    const auto t0 = clock::now();
    try {
      out.result = run_replication(spec, spec.h_grid[hi], rep_seed(spec.seed, hi, rep));
      out.ok = true;
    } catch (const Error& e) {
      out.error = e.what();
    }
    out.seconds = std::chrono::duration<double>(clock::now() - t0).count();
    const long d = ++done;
    if (options.progress) options.progress(d, total);
  });

  ExperimentReport report;
  report.spec = spec;
  report.library_version = library_version();
  report.config_hash = fnv1a_hex(spec.canonical());
  report.threads = threads;
  for (std::size_t hi = 0; hi < spec.h_grid.size(); ++hi) {
    ExperimentRow row;
    row.h = spec.h_grid[hi];
    row.reps = spec.reps;
    double t_sum = 0.0, crit_sum = 0.0, secs = 0.0;
    for (int r = 0; r < spec.reps; ++r) {
      const Outcome& o = outcomes[hi * static_cast<std::size_t>(per_h) + static_cast<std::size_t>(r)];
      row.rep_seeds.push_back(rep_seed(spec.seed, hi, r));
      secs += o.seconds;
      if (!o.ok) {
        ++row.failures;
        if (row.failure_messages.size() < 5 &&
            std::find(row.failure_messages.begin(), row.failure_messages.end(), o.error) ==
                row.failure_messages.end()) {
          row.failure_messages.push_back(o.error);
        }
        continue;
      }
      if (o.result.reject) ++row.rejections;
      t_sum += o.result.t_n;
      crit_sum += o.result.critical_value;
    }
    const int completed = row.reps - row.failures;
    row.rate = static_cast<double>(row.rejections) / row.reps;
    row.se = std::sqrt(row.rate * (1.0 - row.rate) / row.reps);
    row.mean_t_n = completed ? t_sum / completed : 0.0;
    row.mean_critical_value = completed ? crit_sum / completed : 0.0;
    row.wall_seconds_per_rep = secs / row.reps;
    if (row.failures > kMaxFailureShare * row.reps) {
      throw Error("h = " + format_double(row.h) + ": " + std::to_string(row.failures) + " of " +
                  std::to_string(row.reps) + " replications failed (first: " +
                  row.failure_messages.front() + ")");
    }
    report.rows.push_back(std::move(row));
  }
  report.wall_seconds = std::chrono::duration<double>(clock::now() - start).count();
  return report;
}

nlohmann::json report_json(const ExperimentReport& report) {
  const ExperimentSpec& s = report.spec;
  nlohmann::json spec = {
      {"study", to_string(s.study)},
      {"regime", s.study == Study::Regression ? to_string(s.regime) : to_string(s.ggm_regime)},
      {"n", s.n},
      {"p", s.p},
      {"h_grid", s.h_grid},
      {"reps", s.reps},
      {"alpha", s.alpha},
      {"variant", to_string(s.variant)},
      {"seed", s.seed},
      {"draws", s.draws},
      {"eta", s.eta ? nlohmann::json(*s.eta) : nlohmann::json("adaptive")},
      {"mu_scale", s.mu_scale},
      {"weighted_qhat", s.weighted_qhat},
  };
  if (s.study == Study::Regression) spec["c"] = s.c;

  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"h", r.h},
                    {"reps", r.reps},
                    {"rejections", r.rejections},
                    {"failures", r.failures},
                    {"rate", r.rate},
                    {"se", r.se},
                    {"mean_t_n", r.mean_t_n},
                    {"mean_critical_value", r.mean_critical_value},
                    {"failure_messages", r.failure_messages},
                    {"rep_seeds", r.rep_seeds}});
  }
  return {{"spec", spec},
          {"rows", rows},
          {"seed_rule", "rep seed = derive_seed(seed, {h_index, rep})"},
          {"library_version", report.library_version},
          {"config_hash", report.config_hash}};
}

nlohmann::json report_metadata(const ExperimentReport& report) {
  nlohmann::json per_rep = nlohmann::json::array();
  for (const auto& r : report.rows) per_rep.push_back({{"h", r.h}, {"seconds_per_rep", r.wall_seconds_per_rep}});
  return {{"wall_seconds", report.wall_seconds}, {"threads", report.threads}, {"timing", per_rep}};
}

std::string report_json_text(const ExperimentReport& report) {
  nlohmann::json j = {{"report", report_json(report)}, {"metadata", report_metadata(report)}};
  return j.dump(2) + "\n";
}

std::string report_csv(const ExperimentReport& report) {
  std::ostringstream o;
  o << "h,rate,se,rejections,failures,reps\n";
  for (const auto& r : report.rows) {
    o << format_double(r.h) << ',' << format_double(r.rate) << ',' << format_double(r.se) << ','
      << r.rejections << ',' << r.failures << ',' << r.reps << '\n';
  }
  return o.str();
}

std::string library_version() { return TIERS_VERSION; }

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace tiers
