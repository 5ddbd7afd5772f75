#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "doctest.h"
#include "gpaml/acquisition.hpp"
#include "gpaml/dataset.hpp"
#include "gpaml/error.hpp"
#include "gpaml/learner.hpp"
#include "gpaml/rng.hpp"
#include "test_util.hpp"

using namespace gpaml;
using test_util::TempDir;

namespace {

LearnerSpec noiseless_oracle() {
  LearnerSpec spec;
  spec.kind = LearnerKind::Oracle;
  spec.noise_sd = 0.0;
  return spec;
}

PolicyState big_pool_state(int n) {
  PolicyState st;
  st.n_a = 50;
  st.n_b = 50;
  st.n = n;
  st.pool_a = 100000;
  st.pool_b = 100000;
  return st;
}

// Two Gaussian clusters per category; `sep_b` controls how hard B is.
MetadataDataset two_cluster_data(std::int64_t per_category, double sep_a,
                                 double sep_b, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledPoint> pts;
  std::int64_t id = 0;
  for (const Category cat : {Category::A, Category::B}) {
    const double sep = cat == Category::A ? sep_a : sep_b;
    for (std::int64_t i = 0; i < per_category; ++i) {
      LabeledPoint p;
      p.id = id++;
      p.category = cat;
      p.label = static_cast<int>(i % 2);
      p.features = {rng.normal(p.label == 0 ? 0.0 : sep, 1.0),
                    rng.normal(0.0, 1.0)};
      pts.push_back(std::move(p));
    }
  }
  return MetadataDataset(std::move(pts), 0.5);
}

// Category A's label is the parity of the unit stripe holding the first
// feature: learnable, but only with enough samples to place all the
// thresholds. Category B's features carry no label signal at all.
MetadataDataset striped_signal_data(std::int64_t per_category,
                                    std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledPoint> pts;
  std::int64_t id = 0;
  for (std::int64_t i = 0; i < per_category; ++i) {
    LabeledPoint p;
    p.id = id++;
    p.category = Category::A;
    const double x = 8.0 * rng.uniform01();
    p.label = static_cast<int>(x) % 2;
    p.features = {x, rng.uniform01()};
    pts.push_back(std::move(p));
  }
  for (std::int64_t i = 0; i < per_category; ++i) {
    LabeledPoint p;
    p.id = id++;
    p.category = Category::B;
    p.label = static_cast<int>(i % 2);
    p.features = {8.0 * rng.uniform01(), rng.uniform01()};
    pts.push_back(std::move(p));
  }
  return MetadataDataset(std::move(pts), 0.5);
}

}  // namespace

TEST_CASE("policy names parse and round-trip") {
  CHECK(parse_policy("gpaml").kind == PolicyKind::GPAML);
  CHECK(parse_policy("random").kind == PolicyKind::Random);
  CHECK(parse_policy("random-action").kind == PolicyKind::RandomAction);
  CHECK(parse_policy("all-a").kind == PolicyKind::AllA);
  CHECK(parse_policy("all-b").kind == PolicyKind::AllB);
  const Policy fixed = parse_policy("fixed:0.1");
  CHECK(fixed.kind == PolicyKind::FixedProportion);
  CHECK(fixed.proportion == 0.1);

  for (const char* name :
       {"gpaml", "random", "random-action", "fixed:0.25", "all-a", "all-b"}) {
    CHECK(policy_name(parse_policy(name)) == name);
  }

  CHECK_THROWS_AS(parse_policy("greedy"), ConfigError);
  CHECK_THROWS_AS(parse_policy("fixed:1.5"), ConfigError);
  CHECK_THROWS_AS(parse_policy("fixed:x"), ConfigError);
}

TEST_CASE("policy choices follow their definitions") {
  Rng rng(5);

  auto st = big_pool_state(50);
  const auto all_a = apply_policy(parse_policy("all-a"), st, rng);
  CHECK(all_a.n_a == 50);
  CHECK(all_a.n_b == 0);
  CHECK_FALSE(all_a.clamped);

  const auto all_b = apply_policy(parse_policy("all-b"), st, rng);
  CHECK(all_b.n_a == 0);
  CHECK(all_b.n_b == 50);

  const auto tenth = apply_policy(parse_policy("fixed:0.1"), st, rng);
  CHECK(tenth.n_a == 5);
  CHECK(tenth.n_b == 45);

  // Round half up: 0.5 * 5 = 2.5 -> 3.
  auto st5 = big_pool_state(5);
  const auto half = apply_policy(parse_policy("fixed:0.5"), st5, rng);
  CHECK(half.n_a == 3);
  CHECK(half.n_b == 2);

  Rng ra(9), rb(9);
  const auto u1 = apply_policy(parse_policy("random-action"), st, ra);
  const auto u2 = apply_policy(parse_policy("random-action"), st, rb);
  CHECK(u1.n_a == u2.n_a);
  CHECK(u1.n_a >= 0);
  CHECK(u1.n_a <= 50);
  CHECK(u1.n_a + u1.n_b == 50);

  PolicyState empty = st;
  empty.pool_a = 10;
  empty.pool_b = 5;
  CHECK_THROWS_WITH_AS(apply_policy(parse_policy("random"), empty, rng),
                       doctest::Contains("pool exhausted"), DataError);

  PolicyState zero = st;
  zero.n = 0;
  CHECK_THROWS_AS(apply_policy(parse_policy("all-a"), zero, rng), DataError);

  // The surrogate policy cannot run without experiment data.
  CHECK_THROWS_AS(apply_policy(parse_policy("gpaml"), st, rng), DataError);
}

TEST_CASE("random draws follow the pool composition") {
  Policy random = parse_policy("random");
  PolicyState st;
  st.n = 20;
  st.pool_a = 2000;
  st.pool_b = 8000;
  Rng rng(123);
  double sum_prop_b = 0.0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) {
    const auto c = apply_policy(random, st, rng);
    CHECK(c.n_a + c.n_b == 20);
    sum_prop_b += static_cast<double>(c.n_b) / 20.0;
  }
  const double mean_prop_b = sum_prop_b / draws;
  CHECK(mean_prop_b > 0.78);
  CHECK(mean_prop_b < 0.82);
}

TEST_CASE("choices clamp to the available pool and record it") {
  Rng rng(7);
  PolicyState st = big_pool_state(20);
  st.pool_a = 10;
  const auto clamped_a = apply_policy(parse_policy("all-a"), st, rng);
  CHECK(clamped_a.n_a == 10);
  CHECK(clamped_a.n_b == 10);
  CHECK(clamped_a.clamped);

  PolicyState st2 = big_pool_state(20);
  st2.pool_b = 5;
  const auto clamped_b = apply_policy(parse_policy("all-b"), st2, rng);
  CHECK(clamped_b.n_a == 15);
  CHECK(clamped_b.n_b == 5);
  CHECK(clamped_b.clamped);

  PolicyState fine = big_pool_state(20);
  fine.pool_a = 20;
  const auto exact = apply_policy(parse_policy("all-a"), fine, rng);
  CHECK(exact.n_a == 20);
  CHECK_FALSE(exact.clamped);
}

TEST_CASE("a three-step campaign records four conserved rows") {
  const auto data = counts_only_dataset(400, 400, 0.5);
  CampaignConfig cc;
  cc.policy = parse_policy("fixed:0.5");
  cc.n_start = 60;
  cc.n_stop = 120;
  cc.step = 20;
  cc.holdout = 100;
  cc.start.kind = StartingBalance::Kind::Fixed;
  cc.start.fixed_a = 30;

  const auto trace = run_campaign(data, noiseless_oracle(), cc, 11);
  CHECK(trace.policy == "fixed:0.5");
  CHECK(trace.termination == "completed");
  REQUIRE(trace.rows.size() == 4);
  for (int t = 0; t < 4; ++t) {
    const auto& row = trace.rows[static_cast<std::size_t>(t)];
    CHECK(row.step == t);
    CHECK(row.n == 60 + 20 * t);
    CHECK(row.n_a_total + row.n_b_total == row.n);
    CHECK(row.prop_a == 0.5);
    CHECK(row.oos_score == oracle_mean(static_cast<double>(row.n_a_total),
                                       static_cast<double>(row.n_b_total)));
    CHECK(row.has_choice == (t < 3));
    if (row.has_choice) {
      CHECK(row.chosen_n_a == 10);
      CHECK(row.chosen_n_b == 10);
      CHECK_FALSE(row.clamped);
      const auto& next = trace.rows[static_cast<std::size_t>(t) + 1];
      CHECK(next.n_a_total == row.n_a_total + row.chosen_n_a);
      CHECK(next.n_b_total == row.n_b_total + row.chosen_n_b);
    }
  }
}

TEST_CASE("campaigns stop early when a category runs dry") {
  const auto data = counts_only_dataset(500, 120, 0.5);
  CampaignConfig cc;
  cc.policy = parse_policy("all-b");
  cc.n_start = 60;
  cc.n_stop = 160;
  cc.step = 20;
  cc.holdout = 100;
  cc.start.kind = StartingBalance::Kind::Fixed;
  cc.start.fixed_a = 30;

  const auto trace = run_campaign(data, noiseless_oracle(), cc, 13);
  CHECK(trace.termination == "category_exhausted");
  REQUIRE(trace.rows.size() == 3);
  CHECK(trace.rows[0].has_choice);
  CHECK(trace.rows[1].has_choice);
  CHECK_FALSE(trace.rows[2].has_choice);
  CHECK(trace.rows[2].n == 100);

  // A pool that cannot supply even one batch stops before any decision.
  const auto small = counts_only_dataset(100, 100, 0.5);
  CampaignConfig tight = cc;
  tight.policy = parse_policy("fixed:0.5");
  tight.n_start = 120;
  tight.n_stop = 200;
  tight.step = 40;
  tight.holdout = 60;
  tight.start.fixed_a = 60;
  const auto stopped = run_campaign(small, noiseless_oracle(), tight, 13);
  CHECK(stopped.termination == "pool_exhausted");
  REQUIRE(stopped.rows.size() == 1);
  CHECK_FALSE(stopped.rows[0].has_choice);
}

TEST_CASE("campaign configuration is validated") {
  const auto data = counts_only_dataset(300, 300, 0.5);
  CampaignConfig cc;
  cc.policy = parse_policy("fixed:0.5");
  cc.n_start = 100;
  cc.n_stop = 100;
  cc.holdout = 50;
  CHECK_THROWS_AS(run_campaign(data, noiseless_oracle(), cc, 1), ConfigError);

  cc.n_stop = 150;
  cc.step = 20;  // does not divide 50
  CHECK_THROWS_AS(run_campaign(data, noiseless_oracle(), cc, 1), ConfigError);

  cc.n_stop = 140;
  cc.holdout = 0;
  CHECK_THROWS_AS(run_campaign(data, noiseless_oracle(), cc, 1), ConfigError);

  cc.holdout = 50;
  cc.start.kind = StartingBalance::Kind::Fixed;
  cc.start.fixed_a = 0;
  CHECK_THROWS_AS(run_campaign(data, noiseless_oracle(), cc, 1), ConfigError);
  cc.start.fixed_a = 100;
  CHECK_THROWS_AS(run_campaign(data, noiseless_oracle(), cc, 1), ConfigError);

  cc.start.kind = StartingBalance::Kind::UniformRange;
  cc.start.range_lo = 40;
  cc.start.range_hi = 30;
  CHECK_THROWS_AS(run_campaign(data, noiseless_oracle(), cc, 1), ConfigError);
}

TEST_CASE("campaigns are deterministic in the seed") {
  const auto data = counts_only_dataset(300, 300, 0.5);
  CampaignConfig cc;
  cc.policy = parse_policy("random");
  cc.n_start = 50;
  cc.n_stop = 110;
  cc.step = 20;
  cc.holdout = 80;
  cc.start.kind = StartingBalance::Kind::UniformRange;
  cc.start.range_lo = 10;
  cc.start.range_hi = 40;

  const auto a = run_campaign(data, noiseless_oracle(), cc, 5);
  const auto b = run_campaign(data, noiseless_oracle(), cc, 5);
  const auto c = run_campaign(data, noiseless_oracle(), cc, 6);
  REQUIRE(a.rows.size() == b.rows.size());
  bool same = true;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    if (a.rows[i].n_a_total != b.rows[i].n_a_total ||
        a.rows[i].chosen_n_a != b.rows[i].chosen_n_a ||
        a.rows[i].oos_score != b.rows[i].oos_score)
      same = false;
  }
  CHECK(same);
  bool differs = a.rows.size() != c.rows.size();
  for (std::size_t i = 0; !differs && i < a.rows.size(); ++i) {
    differs = a.rows[i].n_a_total != c.rows[i].n_a_total ||
              a.rows[i].chosen_n_a != c.rows[i].chosen_n_a;
  }
  CHECK(differs);
}

TEST_CASE("the surrogate policy runs end to end inside a campaign") {
  const auto data = counts_only_dataset(600, 600, 0.5);
  CampaignConfig cc;
  cc.policy = parse_policy("gpaml");
  cc.n_start = 100;
  cc.n_stop = 140;
  cc.step = 20;
  cc.holdout = 100;
  cc.start.kind = StartingBalance::Kind::Fixed;
  cc.start.fixed_a = 50;
  cc.design.b = 60;
  cc.design.z = 5;
  cc.q = 25;
  LearnerSpec oracle = noiseless_oracle();
  oracle.noise_sd = 0.05;

  const auto trace = run_campaign(data, oracle, cc, 21);
  CHECK(trace.policy == "gpaml");
  CHECK(trace.termination == "completed");
  REQUIRE(trace.rows.size() == 3);
  for (const auto& row : trace.rows) {
    if (!row.has_choice) continue;
    CHECK(row.chosen_n_a + row.chosen_n_b == 20);
    CHECK(row.chosen_n_a >= 0);
    CHECK(row.chosen_n_b >= 0);
  }
  CHECK(trace.rows[2].n == 140);
}

TEST_CASE("suitability of the noiseless oracle matches the closed form") {
  const auto data = counts_only_dataset(200, 200, 0.5);
  SuitabilityConfig sc;
  sc.reps = 1;
  const auto result =
      metadata_suitability_check(data, noiseless_oracle(), sc, 3);
  REQUIRE(result.scores_a.size() == 1);
  REQUIRE(result.scores_b.size() == 1);
  CHECK(result.scores_a[0] == doctest::Approx(0.57562715432305).epsilon(1e-12));
  CHECK(result.scores_b[0] ==
        doctest::Approx(0.46242643066887634).epsilon(1e-12));
  CHECK(result.mean_diff ==
        doctest::Approx(0.11320072365417366).epsilon(1e-12));
  CHECK(result.mean_a == result.scores_a[0]);
  CHECK(result.mean_b == result.scores_b[0]);

  SuitabilityConfig bad;
  bad.reps = 0;
  CHECK_THROWS_AS(metadata_suitability_check(data, noiseless_oracle(), bad, 3),
                  ConfigError);
  bad.reps = 1;
  bad.minor = 0;
  CHECK_THROWS_AS(metadata_suitability_check(data, noiseless_oracle(), bad, 3),
                  ConfigError);
}

TEST_CASE("suitability rewards the category that carries signal") {
  // Training mostly on the striped category transfers; training mostly on
  // the noise category spends its sample budget on nothing.
  const auto data = striped_signal_data(300, 31);
  LearnerSpec spec;
  spec.forest.tree_count = 21;
  SuitabilityConfig sc;
  sc.reps = 6;
  sc.holdout = 300;

  const auto result = metadata_suitability_check(data, spec, sc, 33);
  REQUIRE(result.scores_a.size() == 6);
  REQUIRE(result.scores_b.size() == 6);
  for (double s : result.scores_a) {
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
  CHECK(result.mean_diff > 0.08);
}

TEST_CASE("suitability is symmetric for interchangeable categories") {
  const auto data = two_cluster_data(300, 5.0, 5.0, 41);
  LearnerSpec spec;
  spec.forest.tree_count = 21;
  SuitabilityConfig sc;
  sc.reps = 6;
  sc.holdout = 200;

  const auto result = metadata_suitability_check(data, spec, sc, 43);
  CHECK(std::abs(result.mean_diff) < 0.06);
}

TEST_CASE("good-decision rules parse and round-trip") {
  CHECK(parse_good_decision("majority-a").kind == GoodDecision::Kind::MajorityA);
  CHECK(parse_good_decision("majority-b").kind == GoodDecision::Kind::MajorityB);
  const auto near = parse_good_decision("near:16:3");
  CHECK(near.kind == GoodDecision::Kind::NearTarget);
  CHECK(near.target == 16);
  CHECK(near.tolerance == 3);
  for (const char* name : {"majority-a", "majority-b", "near:16:3"}) {
    CHECK(good_decision_name(parse_good_decision(name)) == name);
  }
  CHECK_THROWS_AS(parse_good_decision("always"), ConfigError);
  CHECK_THROWS_AS(parse_good_decision("near:16"), ConfigError);
  CHECK_THROWS_AS(parse_good_decision("near:16:-1"), ConfigError);
}

TEST_CASE("full-size robustness subsets reproduce one decision") {
  const auto data = counts_only_dataset(120, 120, 0.5);
  LearnerSpec oracle = noiseless_oracle();
  oracle.noise_sd = 0.05;
  RobustnessConfig rc;
  rc.b_total = 30;
  rc.z = 4;
  rc.sizes = {30};
  rc.reps = 3;
  rc.q = 25;
  rc.good = parse_good_decision("near:16:3");

  const auto report = subsample_robustness_study(data, oracle, rc, 51);
  REQUIRE(report.rows.size() == 3);
  REQUIRE(report.good_fraction.size() == 1);
  for (const auto& row : report.rows) {
    CHECK(row.size == 30);
    CHECK(row.n_a == report.rows[0].n_a);
    CHECK(row.n_b == report.rows[0].n_b);
    CHECK(row.n_a + row.n_b == rc.n);
    CHECK(row.good == (std::abs(row.n_a - 16) <= 3));
  }
  CHECK((report.good_fraction[0] == 0.0 || report.good_fraction[0] == 1.0));
  CHECK(report.experiment.observations.size() == 120);
}

TEST_CASE("robustness reports one row per size and rep") {
  const auto data = counts_only_dataset(120, 120, 0.5);
  LearnerSpec oracle = noiseless_oracle();
  oracle.noise_sd = 0.05;
  RobustnessConfig rc;
  rc.b_total = 30;
  rc.z = 4;
  rc.sizes = {10, 20};
  rc.reps = 3;
  rc.q = 25;
  rc.good = parse_good_decision("majority-a");

  const auto report = subsample_robustness_study(data, oracle, rc, 53);
  REQUIRE(report.rows.size() == 6);
  REQUIRE(report.good_fraction.size() == 2);
  for (std::size_t i = 0; i < 6; ++i) {
    const auto& row = report.rows[i];
    CHECK(row.size == (i < 3 ? 10 : 20));
    CHECK(row.rep == static_cast<int>(i % 3) + 1);
    CHECK(row.n_a + row.n_b == rc.n);
    CHECK(row.good == (row.n_a > row.n_b));
  }
  for (std::size_t si = 0; si < 2; ++si) {
    int good = 0;
    for (std::size_t r = 0; r < 3; ++r)
      good += report.rows[3 * si + r].good ? 1 : 0;
    CHECK(report.good_fraction[si] == doctest::Approx(good / 3.0));
  }

  RobustnessConfig bad = rc;
  bad.sizes = {40};
  CHECK_THROWS_AS(subsample_robustness_study(data, oracle, bad, 53),
                  ConfigError);
  bad.sizes = {};
  CHECK_THROWS_AS(subsample_robustness_study(data, oracle, bad, 53),
                  ConfigError);
  bad.sizes = {10};
  bad.reps = 0;
  CHECK_THROWS_AS(subsample_robustness_study(data, oracle, bad, 53),
                  ConfigError);
}

TEST_CASE("trace files leave the chosen columns empty on terminal rows") {
  AcquisitionTrace trace;
  trace.policy = "fixed:0.5";
  TraceRow first;
  first.step = 0;
  first.n = 60;
  first.n_a_total = 30;
  first.n_b_total = 30;
  first.prop_a = 0.5;
  first.has_choice = true;
  first.chosen_n_a = 10;
  first.chosen_n_b = 10;
  first.oos_score = 0.75;
  TraceRow last;
  last.step = 1;
  last.n = 80;
  last.n_a_total = 40;
  last.n_b_total = 40;
  last.prop_a = 0.5;
  last.has_choice = false;
  last.oos_score = 0.8;
  last.clamped = false;
  trace.rows = {first, last};

  TempDir dir("trace");
  const auto path = dir / "trace.csv";
  write_trace_csv(trace, path);
  const auto lines = test_util::read_lines(path);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] ==
        "step,N,n_a_total,n_b_total,prop_a,chosen_n_a,chosen_n_b,policy,"
        "oos_score,clamped");
  CHECK(lines[1] == "0,60,30,30,0.5,10,10,fixed:0.5,0.75,0");
  CHECK(lines[2] == "1,80,40,40,0.5,,,fixed:0.5,0.8,0");
}

TEST_CASE("suitability and robustness files carry their documented shapes") {
  SuitabilityResult sr;
  sr.scores_a = {0.6, 0.7};
  sr.scores_b = {0.5, 0.4};
  TempDir dir("files");
  const auto spath = dir / "suitability.csv";
  write_suitability_csv(sr, spath);
  const auto slines = test_util::read_lines(spath);
  REQUIRE(slines.size() == 5);
  CHECK(slines[0] == "rep,category,score");
  CHECK(slines[1] == "1,A,0.6");
  CHECK(slines[2] == "1,B,0.5");
  CHECK(slines[3] == "2,A,0.7");
  CHECK(slines[4] == "2,B,0.4");

  RobustnessReport rr;
  rr.rows = {{100, 1, 12, 8, true}, {100, 2, 4, 16, false}};
  const auto rpath = dir / "robustness.csv";
  write_robustness_csv(rr, rpath);
  const auto rlines = test_util::read_lines(rpath);
  REQUIRE(rlines.size() == 3);
  CHECK(rlines[0] == "size,rep,n_a,n_b,good");
  CHECK(rlines[1] == "100,1,12,8,1");
  CHECK(rlines[2] == "100,2,4,16,0");
}
