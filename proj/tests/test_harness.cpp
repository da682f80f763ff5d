#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "tiers/csv.hpp"
#include "tiers/error.hpp"
#include "tiers/harness.hpp"
#include "tiers/rng.hpp"

using namespace tiers;

namespace {

CsvTable parse(const std::string& text) {
  std::istringstream in(text);
  return parse_csv(in);
}

void expect_csv_error(const std::string& text, long line, long column) {
  try {
    parse(text);
    FAIL() << "no error for: " << text;
  } catch (const CsvError& e) {
    EXPECT_EQ(e.line(), line) << text;
    EXPECT_EQ(e.column(), column) << text;
  }
}

ExperimentSpec tiny_spec() {
  ExperimentSpec s;
  s.n = 40;
  s.p = 30;
  s.h_grid = {0.0, 1.0};
  s.reps = 3;
  s.draws = 1000;
  s.seed = 17;
  return s;
}

}  // namespace

TEST(Csv, ParsesPlainNumbers) {
  const CsvTable t = parse("1,2.5\n-3,4e2\n");
  EXPECT_TRUE(t.header.empty());
  ASSERT_EQ(t.values.rows(), 2);
  EXPECT_EQ(t.values(1, 1), 400.0);
  EXPECT_EQ(t.values(1, 0), -3.0);
}

TEST(Csv, DetectsHeaderAndBom) {
  const CsvTable t = parse("\xEF\xBB\xBFx1,x2\n1,2\n3,4\n");
  ASSERT_EQ(t.header.size(), 2u);
  EXPECT_EQ(t.header[0], "x1");
  EXPECT_EQ(t.values.rows(), 2);
}

TEST(Csv, ErrorsCarryCoordinates) {
  expect_csv_error("1,2\n3,abc\n", 2, 2);
  expect_csv_error("1,2\n3\n", 2, 2);
  expect_csv_error("1,2\n3,nan\n", 2, 2);
  expect_csv_error("1,2\n,4\n", 2, 1);
  EXPECT_THROW(parse(""), CsvError);
  EXPECT_THROW(parse("a,b\n"), CsvError);
}

TEST(Csv, RoundTripIsExact) {
  Matrix m(1000, 50);
  rng_stream(3, 0).fill_normal(m);
  m(0, 0) = 1e-300;
  m(1, 1) = -123456789.125;
  m(2, 2) = 0.1;
  std::stringstream ss;
  write_csv(ss, m, {});
  const CsvTable t = parse_csv(ss);
  EXPECT_EQ(t.values, m);
}

TEST(Csv, HeaderRoundTrip) {
  Matrix m(2, 2);
  m << 1, 2, 3, 4;
  std::stringstream ss;
  write_csv(ss, m, {"a", "b"});
  const CsvTable t = parse_csv(ss);
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(t.values, m);
}

TEST(Csv, FormatDoubleIsShortest) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(2.0), "2");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST(Config, ParsesKeysAndComments) {
  const ExperimentSpec s = parse_experiment_config(
      "# comment\n[experiment]\nregime = DH\nc = 0.5\nh_grid = 0, 0.5,1\nreps = 7 # trailing\n"
      "variant = tiers+\nseed = 99\n");
  EXPECT_EQ(s.regime, Regime::DH);
  EXPECT_EQ(s.c, 0.5);
  EXPECT_EQ(s.h_grid, (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_EQ(s.reps, 7);
  EXPECT_EQ(s.variant, Variant::TiersPlus);
  EXPECT_EQ(s.seed, 99u);
  EXPECT_EQ(s.n, 100);
}

TEST(Config, PresetAppliesFirst) {
  const ExperimentSpec s = parse_experiment_config("n = 50\npreset = paper\n");
  EXPECT_EQ(s.n, 50);
  EXPECT_EQ(s.p, 500);
  EXPECT_EQ(s.reps, 100);
}

TEST(Config, GgmRegimeSwitchesStudy) {
  const ExperimentSpec s = parse_experiment_config("regime = SbDO\n");
  EXPECT_EQ(s.study, Study::Ggm);
  EXPECT_EQ(s.ggm_regime, GgmRegime::SparseBetaDenseOmega);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(parse_experiment_config("colour = red\n"), ArgumentError);
  EXPECT_THROW(parse_experiment_config("n = ten\n"), ArgumentError);
  EXPECT_THROW(parse_experiment_config("alpha = 2\n"), ArgumentError);
  EXPECT_THROW(parse_experiment_config("just words\n"), ArgumentError);
  EXPECT_THROW(parse_experiment_config("regime = SbSO\np = 5\n"), ArgumentError);
}

TEST(Config, CanonicalTextRoundTrips) {
  ExperimentSpec s = tiny_spec();
  s.eta = 0.25;
  const ExperimentSpec back = parse_experiment_config(s.canonical());
  EXPECT_EQ(back.canonical(), s.canonical());
  ExperimentSpec other = s;
  other.seed = 18;
  EXPECT_NE(fnv1a_hex(s.canonical()), fnv1a_hex(other.canonical()));
}

TEST(Fnv, KnownVectors) {
  EXPECT_EQ(fnv1a_hex(""), "cbf29ce484222325");
  EXPECT_EQ(fnv1a_hex("a"), "af63dc4c8601ec8c");
}

TEST(Experiment, RowInvariants) {
  const ExperimentReport r = run_experiment(tiny_spec(), {1, {}});
  ASSERT_EQ(r.rows.size(), 2u);
  for (const ExperimentRow& row : r.rows) {
    EXPECT_EQ(row.reps, 3);
    EXPECT_EQ(row.rate, static_cast<double>(row.rejections) / 3.0);
    EXPECT_NEAR(row.se, std::sqrt(row.rate * (1.0 - row.rate) / 3.0), 1e-15);
    EXPECT_EQ(row.rep_seeds.size(), 3u);
    EXPECT_EQ(row.failures, 0);
    EXPECT_GT(row.mean_critical_value, 0.0);
  }
  EXPECT_EQ(r.rows[1].rep_seeds[2], rep_seed(17, 1, 2));
  EXPECT_EQ(r.config_hash, fnv1a_hex(tiny_spec().canonical()));
  EXPECT_EQ(report_csv(r).substr(0, 34), "h,rate,se,rejections,failures,reps");
}

TEST(Experiment, DeterministicAcrossRunsAndThreads) {
  const ExperimentSpec s = tiny_spec();
  const std::string a = report_json(run_experiment(s, {1, {}})).dump();
  const std::string b = report_json(run_experiment(s, {1, {}})).dump();
  const std::string c = report_json(run_experiment(s, {2, {}})).dump();
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
}

TEST(Experiment, ReplicationMatchesDirectCall) {
  const ExperimentSpec s = tiny_spec();
  double t_sum = 0.0;
  int rej = 0;
  for (int rep = 0; rep < 3; ++rep) {
    const TestResult direct = run_replication(s, 1.0, rep_seed(17, 1, rep));
    t_sum += direct.t_n;
    rej += direct.reject;
  }
  const ExperimentReport r = run_experiment(s, {1, {}});
  EXPECT_NEAR(r.rows[1].mean_t_n, t_sum / 3.0, 1e-12);
  EXPECT_EQ(r.rows[1].rejections, rej);
}

TEST(Experiment, ProgressReportsEveryReplication) {
  long calls = 0, last = 0;
  RunOptions opt{1, [&](long done, long total) {
                   ++calls;
                   last = done;
                   EXPECT_EQ(total, 6);
                 }};
  run_experiment(tiny_spec(), opt);
  EXPECT_EQ(calls, 6);
  EXPECT_EQ(last, 6);
}

TEST(Experiment, GgmStudyRuns) {
  ExperimentSpec s = tiny_spec();
  s.study = Study::Ggm;
  s.ggm_regime = GgmRegime::DenseBetaSparseOmega;
  s.h_grid = {0.0};
  const ExperimentReport r = run_experiment(s, {1, {}});
  EXPECT_EQ(r.rows[0].failures, 0);
}
