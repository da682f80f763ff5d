// Command-line front end: test, experiment, naive-demo, oracle-power, fixtures.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "tiers/baselines.hpp"
#include "tiers/csv.hpp"
#include "tiers/error.hpp"
#include "tiers/harness.hpp"
#include "tiers/simgen.hpp"
#include "tiers/tiers.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw tiers::ArgumentError("not a number in list: '" + item + "'");
    }
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw tiers::ArgumentError("cannot write '" + path.string() + "'");
  out << text;
}

json result_json(const tiers::TestResult& r) {
  return {{"t_n", r.t_n},
          {"critical_value", r.critical_value},
          {"p_value", r.p_value},
          {"reject", r.reject},
          {"alpha", r.alpha},
          {"variant", tiers::to_string(r.variant)},
          {"sigma_hat_u", r.sigma_hat_u},
          {"sigma_tilde_u", r.sigma_tilde_u},
          {"eta", r.eta},
          {"mu", r.mu},
          {"draws", r.sim_draws},
          {"seed", r.seed},
          {"degenerate_columns", r.degenerate_columns}};
}

struct TestArgs {
  std::string xa, ya, xb, yb;
  double alpha = 0.05;
  std::string variant = "tiers";
  int draws = 2000;
  std::uint64_t seed = 0;
  std::optional<double> eta;
  double mu_scale = 1.0;
  bool weighted = false;
  int threads = 0;
};

int run_test(const TestArgs& a) {
  tiers::TwoSampleData data{tiers::ingest_matrix(a.xa), tiers::ingest_vector(a.ya),
                            tiers::ingest_matrix(a.xb), tiers::ingest_vector(a.yb)};
  try {
    data.validate();
  } catch (const tiers::DimensionError& e) {
    throw tiers::DimensionError(e.axis(), std::string(e.what()) + " (files: " + a.xa + ", " + a.ya +
                                              ", " + a.xb + ", " + a.yb + ")");
  }
  tiers::TiersConfig cfg;
  cfg.draws = a.draws;
  cfg.seed = a.seed;
  cfg.eta = a.eta;
  cfg.mu_scale = a.mu_scale;
  cfg.weighted_qhat = a.weighted;
  cfg.threads = a.threads;
  const bool plus = a.variant == "tiers+" || a.variant == "plus";
  if (!plus && a.variant != "tiers") throw tiers::ArgumentError("--variant must be tiers or tiers+");
  const tiers::TestResult r =
      plus ? tiers::run_tiers_plus(data, a.alpha, cfg) : tiers::run_tiers(data, a.alpha, cfg);
  std::cout << result_json(r).dump(2) << '\n';
  return 0;
}

struct ExperimentArgs {
  std::string config;
  std::string preset;
  std::string out_dir = ".";
  int threads = 0;
  bool quiet = false;
};

int run_experiment_cmd(const ExperimentArgs& a) {
  tiers::ExperimentSpec spec;
  if (!a.config.empty()) {
    std::ifstream in(a.config);
    if (!in) throw tiers::ArgumentError("cannot open config '" + a.config + "'");
    std::stringstream ss;
    if (!a.preset.empty()) ss << "preset = " << a.preset << '\n';
    ss << in.rdbuf();
    spec = tiers::parse_experiment_config(ss.str());
  } else {
    spec = tiers::parse_experiment_config(a.preset.empty() ? "" : "preset = " + a.preset);
  }
  tiers::RunOptions opts;
  opts.threads = a.threads;
  if (!a.quiet) {
    opts.progress = [](long done, long total) {
      if (done == total || done % 10 == 0) std::cerr << "\r" << done << "/" << total << std::flush;
    };
  }
  const tiers::ExperimentReport report = tiers::run_experiment(spec, opts);
  if (!a.quiet) std::cerr << '\n';
  fs::create_directories(a.out_dir);
  const std::string text = tiers::report_json_text(report);
  write_text(fs::path(a.out_dir) / "report.json", text);
  write_text(fs::path(a.out_dir) / "report.csv", tiers::report_csv(report));
  std::cout << text;
  return 0;
}

struct NaiveArgs {
  tiers::NaiveDemoConfig cfg;
  std::string c_grid = "0,0.0005,0.001,0.0015,0.002";
  std::string out;
};

int run_naive(NaiveArgs a) {
  a.cfg.c_grid = parse_list(a.c_grid);
  const auto curve = tiers::naive_size_curve(a.cfg);
  std::ostringstream o;
  o << "c,m_hat,se\n";
  for (const auto& pt : curve)
    o << tiers::format_double(pt.c) << ',' << tiers::format_double(pt.m_hat) << ','
      << tiers::format_double(pt.se) << '\n';
  if (a.out.empty()) std::cout << o.str();
  else write_text(a.out, o.str());
  return 0;
}

struct OracleArgs {
  std::string gamma;
  std::string sigma_b;
  double sigma_u = 1.0;
  long n = 100;
  double alpha = 0.05;
};

int run_oracle(const OracleArgs& a) {
  const std::vector<double> g = parse_list(a.gamma);
  if (g.empty()) throw tiers::ArgumentError("--gamma must list at least one value");
  const tiers::Vector gamma = Eigen::Map<const tiers::Vector>(g.data(), static_cast<Eigen::Index>(g.size()));
  const tiers::Matrix sigma_b = a.sigma_b.empty()
                                    ? tiers::Matrix(tiers::Matrix::Identity(gamma.size(), gamma.size()))
                                    : tiers::ingest_matrix(a.sigma_b);
  const double d = tiers::lr_noncentrality(gamma, sigma_b, a.sigma_u, a.n);
  const double power = tiers::lr_oracle_power(gamma, sigma_b, a.sigma_u, a.n, a.alpha);
  std::cout << json{{"d_n", d}, {"power", power}, {"n", a.n}, {"alpha", a.alpha}}.dump(2) << '\n';
  return 0;
}

struct FixtureArgs {
  std::string study = "regression";
  std::string regime = "SL";
  double c = 2.0;
  double h = 0.0;
  long n = 100;
  long p = 150;
  std::uint64_t seed = 0;
  std::string dir = "fixture";
};

tiers::SyntheticDataset generate(const FixtureArgs& a) {
  if (a.study == "regression") {
    const auto r = tiers::parse_regime(a.regime);
    if (!r) throw tiers::ArgumentError("unknown regression regime '" + a.regime + "'");
    return tiers::gen_regression(*r, a.c, a.h, a.n, a.p, a.seed);
  }
  if (a.study == "ggm") {
    const auto r = tiers::parse_ggm_regime(a.regime);
    if (!r) throw tiers::ArgumentError("unknown GGM regime '" + a.regime + "'");
    return tiers::gen_ggm(*r, a.h, a.n, a.p, a.seed);
  }
  throw tiers::ArgumentError("--study must be regression or ggm");
}

const char* const kFixtureFiles[] = {"xa.csv", "ya.csv", "xb.csv", "yb.csv", "beta_a.csv", "beta_b.csv"};

std::vector<tiers::Matrix> fixture_parts(const tiers::SyntheticDataset& ds) {
  return {ds.data.x_a, ds.data.y_a, ds.data.x_b, ds.data.y_b, ds.truth.beta_a, ds.truth.beta_b};
}

int run_fixture_dump(const FixtureArgs& a) {
  const auto ds = generate(a);
  fs::create_directories(a.dir);
  const auto parts = fixture_parts(ds);
  for (std::size_t i = 0; i < parts.size(); ++i) tiers::write_csv((fs::path(a.dir) / kFixtureFiles[i]).string(), parts[i]);
  const json meta = {{"study", a.study}, {"regime", a.regime}, {"c", a.c}, {"h", a.h},
                     {"n", a.n},         {"p", a.p},           {"seed", a.seed}};
  write_text(fs::path(a.dir) / "fixture.json", meta.dump(2) + "\n");
  std::cout << meta.dump() << '\n';
  return 0;
}

int run_fixture_replay(const std::string& dir) {
  std::ifstream in(fs::path(dir) / "fixture.json");
  if (!in) throw tiers::ArgumentError("no fixture.json in '" + dir + "'");
  const json meta = json::parse(in);
  FixtureArgs a;
  a.study = meta.at("study");
  a.regime = meta.at("regime");
  a.c = meta.at("c");
  a.h = meta.at("h");
  a.n = meta.at("n");
  a.p = meta.at("p");
  a.seed = meta.at("seed");
  const auto parts = fixture_parts(generate(a));
  json mismatched = json::array();
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const tiers::Matrix stored = tiers::ingest_matrix((fs::path(dir) / kFixtureFiles[i]).string());
    const bool same = stored.rows() == parts[i].rows() && stored.cols() == parts[i].cols() &&
                      stored == parts[i];
    if (!same) mismatched.push_back(kFixtureFiles[i]);
  }
  std::cout << json{{"match", mismatched.empty()}, {"mismatched", mismatched}}.dump(2) << '\n';
  return mismatched.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-sample tests for high-dimensional regression coefficients"};
  app.set_version_flag("--version", tiers::library_version());
  app.require_subcommand(1);

  TestArgs test_args;
  auto* test = app.add_subcommand("test", "Run TIERS / TIERS+ on CSV data; JSON on stdout");
  test->add_option("--xa", test_args.xa, "Design of sample A (n x p)")->required()->check(CLI::ExistingFile);
  test->add_option("--ya", test_args.ya, "Response of sample A")->required()->check(CLI::ExistingFile);
  test->add_option("--xb", test_args.xb, "Design of sample B (n x p)")->required()->check(CLI::ExistingFile);
  test->add_option("--yb", test_args.yb, "Response of sample B")->required()->check(CLI::ExistingFile);
  test->add_option("--alpha", test_args.alpha, "Nominal level")->capture_default_str();
  test->add_option("--variant", test_args.variant, "tiers or tiers+")->capture_default_str();
  test->add_option("--draws", test_args.draws, "Simulation draws for the critical value")->capture_default_str();
  test->add_option("--seed", test_args.seed, "Simulation seed")->capture_default_str();
  test->add_option("--eta", test_args.eta, "Fixed eta (default: adaptive)");
  test->add_option("--mu-scale", test_args.mu_scale, "TIERS+ residual bound scale")->capture_default_str();
  test->add_flag("--weighted-qhat", test_args.weighted, "Residual-weighted simulation covariance");
  test->add_option("--threads", test_args.threads, "Worker threads (0 = TIERS_THREADS or all)");

  ExperimentArgs exp_args;
  auto* experiment = app.add_subcommand("experiment", "Run a Monte-Carlo rejection-rate study");
  experiment->add_option("--config", exp_args.config, "key = value config file")->check(CLI::ExistingFile);
  experiment->add_option("--preset", exp_args.preset, "desk or paper")->check(CLI::IsMember({"desk", "paper"}));
  experiment->add_flag("--paper", [&](std::int64_t) { exp_args.preset = "paper"; }, "Same as --preset paper");
  experiment->add_option("--out-dir", exp_args.out_dir, "Where report.json and report.csv go")->capture_default_str();
  experiment->add_option("--threads", exp_args.threads, "Worker threads");
  experiment->add_flag("--quiet", exp_args.quiet, "No progress on stderr");

  NaiveArgs naive_args;
  auto* naive = app.add_subcommand("naive-demo", "Size of the naive max-t test under a dense null (CSV)");
  naive->add_option("--n", naive_args.cfg.n)->capture_default_str();
  naive->add_option("--p", naive_args.cfg.p)->capture_default_str();
  naive->add_option("--c-grid", naive_args.c_grid, "Comma-separated c values")->capture_default_str();
  naive->add_option("--alpha", naive_args.cfg.alpha)->capture_default_str();
  naive->add_option("--outer", naive_args.cfg.outer_reps, "Design draws")->capture_default_str();
  naive->add_option("--inner", naive_args.cfg.inner_draws, "Draws per design")->capture_default_str();
  naive->add_option("--seed", naive_args.cfg.seed)->capture_default_str();
  naive->add_option("--threads", naive_args.cfg.threads);
  naive->add_option("--out", naive_args.out, "Output file, e.g. figure1.csv (default stdout)");

  OracleArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle-power", "Asymptotic power of the oracle likelihood-ratio test");
  oracle->add_option("--gamma", oracle_args.gamma, "Comma-separated deviation vector")->required();
  oracle->add_option("--sigma-b", oracle_args.sigma_b, "CSV covariance of sample B (default identity)")
      ->check(CLI::ExistingFile);
  oracle->add_option("--sigma-u", oracle_args.sigma_u, "Noise SD of sample B")->capture_default_str();
  oracle->add_option("--n", oracle_args.n)->capture_default_str();
  oracle->add_option("--alpha", oracle_args.alpha)->capture_default_str();

  FixtureArgs fix_args;
  std::string replay_dir;
  auto* fixtures = app.add_subcommand("fixtures", "Dump or replay synthetic datasets");
  fixtures->require_subcommand(1);
  auto* dump = fixtures->add_subcommand("dump", "Write a generated dataset as CSV");
  dump->add_option("--study", fix_args.study, "regression or ggm")->capture_default_str();
  dump->add_option("--regime", fix_args.regime, "SL/SH/DL/DH or SbSO/DbSO/SbDO/DbDO")->capture_default_str();
  dump->add_option("--c", fix_args.c)->capture_default_str();
  dump->add_option("--deviation", fix_args.h, "Deviation h in the first coefficient")->capture_default_str();
  dump->add_option("--n", fix_args.n)->capture_default_str();
  dump->add_option("--p", fix_args.p)->capture_default_str();
  dump->add_option("--seed", fix_args.seed)->capture_default_str();
  dump->add_option("--dir", fix_args.dir)->capture_default_str();
  auto* replay = fixtures->add_subcommand("replay", "Regenerate a dumped dataset and compare");
  replay->add_option("--dir", replay_dir)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*test) return run_test(test_args);
    if (*experiment) return run_experiment_cmd(exp_args);
    if (*naive) return run_naive(naive_args);
    if (*oracle) return run_oracle(oracle_args);
    if (*dump) return run_fixture_dump(fix_args);
    if (*replay) return run_fixture_replay(replay_dir);
  } catch (const tiers::ArgumentError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const tiers::DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
