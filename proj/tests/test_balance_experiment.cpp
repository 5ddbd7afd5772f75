#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <vector>

#include "doctest.h"
#include "gpaml/balance_experiment.hpp"
#include "gpaml/dataset.hpp"
#include "gpaml/error.hpp"
#include "gpaml/learner.hpp"
#include "gpaml/rng.hpp"
#include "test_util.hpp"

using namespace gpaml;
using test_util::TempDir;
using test_util::write_file;

namespace {

LearnerSpec noiseless_oracle() {
  LearnerSpec spec;
  spec.kind = LearnerKind::Oracle;
  spec.noise_sd = 0.0;
  return spec;
}

}  // namespace

TEST_CASE("test-set counts follow the tenth-share rule with a floor of one") {
  CHECK(test_set_counts(100, 0.5, 0.5) == std::pair<int, int>(5, 5));
  CHECK(test_set_counts(100, 0.9, 0.1) == std::pair<int, int>(9, 1));
  CHECK(test_set_counts(20, 0.98, 0.02) == std::pair<int, int>(2, 1));
  // Round half up: 0.1 * 75 * 0.5 = 3.75 -> 4.
  CHECK(test_set_counts(75, 0.5, 0.5) == std::pair<int, int>(4, 4));
  CHECK_THROWS_AS(test_set_counts(0, 0.5, 0.5), DataError);
}

TEST_CASE("composing a test set splits the data disjointly at p0") {
  const auto data = counts_only_dataset(50, 50, 0.5);
  Rng rng(3);
  const auto [test, pool] = compose_test_set(data, rng);
  CHECK(test.n_a() == 5);
  CHECK(test.n_b() == 5);
  CHECK(pool.size() == 90);

  auto test_ids = point_ids(test);
  auto pool_ids = point_ids(pool);
  std::sort(test_ids.begin(), test_ids.end());
  std::sort(pool_ids.begin(), pool_ids.end());
  std::vector<std::int64_t> overlap;
  std::set_intersection(test_ids.begin(), test_ids.end(), pool_ids.begin(),
                        pool_ids.end(), std::back_inserter(overlap));
  CHECK(overlap.empty());
  CHECK(test.size() + pool.size() == data.size());

  // Too skewed: the test share wants ten A points but the category holds one.
  const auto skewed = counts_only_dataset(1, 99, 0.99);
  Rng rng2(4);
  CHECK_THROWS_AS(compose_test_set(skewed, rng2), DataError);
}

TEST_CASE("a single noiseless run reports the closed-form accuracy") {
  const auto data = counts_only_dataset(60, 60, 0.5);
  BalanceDesign design;
  design.b = 1;
  design.z = 1;
  const auto out = run_balance_experiment(data, noiseless_oracle(), design, 17);
  REQUIRE(out.observations.size() == 1);
  const auto& o = out.observations.front();
  CHECK(o.valid);
  CHECK(o.block == 1);
  CHECK(o.rep == 1);
  CHECK(o.n_a >= 1);
  CHECK(o.n_a <= out.bound_a);
  CHECK(o.n_b >= 1);
  CHECK(o.n_b <= out.bound_b);
  CHECK(o.score == oracle_mean(o.n_a, o.n_b));
  CHECK(out.bound_a == 54);  // 60 - max(1, round(0.1*120*0.5))
  CHECK(out.bound_b == 54);
  CHECK(out.provenance.n == 120);
  CHECK(out.provenance.seed == 17);
}

TEST_CASE("the blocked design has b distinct balances with z replicates") {
  const auto data = counts_only_dataset(200, 200, 0.5);
  BalanceDesign design;
  design.b = 100;
  design.z = 10;
  LearnerSpec oracle = noiseless_oracle();
  oracle.noise_sd = 0.05;
  const auto out = run_balance_experiment(data, oracle, design, 23);
  REQUIRE(out.observations.size() == 1000);

  std::map<std::pair<int, int>, int> multiplicity;
  for (std::size_t i = 0; i < out.observations.size(); ++i) {
    const auto& o = out.observations[i];
    CHECK(o.valid);
    CHECK(o.block == static_cast<int>(i) / design.z + 1);
    CHECK(o.rep == static_cast<int>(i) % design.z + 1);
    CHECK(o.n_a >= 1);
    CHECK(o.n_a <= out.bound_a);
    CHECK(o.n_b >= 1);
    CHECK(o.n_b <= out.bound_b);
    ++multiplicity[{o.n_a, o.n_b}];
  }
  CHECK(multiplicity.size() == 100);
  for (const auto& [balance, count] : multiplicity) CHECK(count == 10);

  const auto x = out.design_matrix();
  const auto y = out.responses();
  CHECK(x.rows() == 1000);
  CHECK(y.size() == 1000);
  CHECK(x(0, 0) == out.observations[0].n_a);
  CHECK(y[0] == out.observations[0].score);
}

TEST_CASE("replicate noise matches the oracle noise level") {
  const auto data = counts_only_dataset(120, 120, 0.5);
  BalanceDesign design;
  design.b = 1;
  design.z = 200;
  LearnerSpec oracle = noiseless_oracle();
  oracle.noise_sd = 0.05;
  const auto out = run_balance_experiment(data, oracle, design, 31);
  REQUIRE(out.observations.size() == 200);

  double mean = 0.0;
  for (const auto& o : out.observations) mean += o.score;
  mean /= 200.0;
  double ss = 0.0;
  for (const auto& o : out.observations) ss += (o.score - mean) * (o.score - mean);
  const double var = ss / 199.0;
  CHECK(var > 0.5 * 0.0025);
  CHECK(var < 2.0 * 0.0025);
}

TEST_CASE("experiments are deterministic in the seed") {
  const auto data = counts_only_dataset(80, 80, 0.5);
  BalanceDesign design;
  design.b = 12;
  design.z = 3;
  LearnerSpec oracle = noiseless_oracle();
  oracle.noise_sd = 0.05;

  const auto a = run_balance_experiment(data, oracle, design, 77);
  const auto b = run_balance_experiment(data, oracle, design, 77);
  const auto c = run_balance_experiment(data, oracle, design, 78);
  REQUIRE(a.observations.size() == b.observations.size());
  bool identical = true;
  bool differs = false;
  for (std::size_t i = 0; i < a.observations.size(); ++i) {
    if (a.observations[i].n_a != b.observations[i].n_a ||
        a.observations[i].n_b != b.observations[i].n_b ||
        a.observations[i].score != b.observations[i].score)
      identical = false;
    if (a.observations[i].n_a != c.observations[i].n_a ||
        a.observations[i].n_b != c.observations[i].n_b ||
        a.observations[i].score != c.observations[i].score)
      differs = true;
  }
  CHECK(identical);
  CHECK(differs);
}

TEST_CASE("real learner runs keep train and test disjoint") {
  Rng data_rng(41);
  const auto data = synthetic_classification(60, 4.0, data_rng);
  BalanceDesign design;
  design.b = 4;
  design.z = 2;
  design.record_membership = true;
  LearnerSpec spec;
  spec.forest.tree_count = 7;

  const auto out = run_balance_experiment(data, spec, design, 43);
  REQUIRE(out.observations.size() == 8);
  for (const auto& o : out.observations) {
    REQUIRE(o.valid);
    CHECK(o.score >= 0.0);
    CHECK(o.score <= 1.0);
    CHECK(static_cast<int>(o.train_ids.size()) == o.n_a + o.n_b);
    const auto [t_a, t_b] = test_set_counts(
        static_cast<std::int64_t>(data.size()), data.p0_a(), data.p0_b());
    CHECK(static_cast<int>(o.test_ids.size()) == t_a + t_b);
    std::set<std::int64_t> train_set(o.train_ids.begin(), o.train_ids.end());
    for (auto id : o.test_ids) CHECK(train_set.count(id) == 0);
  }

  // Membership tracking is opt-in.
  design.record_membership = false;
  const auto bare = run_balance_experiment(data, spec, design, 43);
  CHECK(bare.observations.front().train_ids.empty());
  CHECK(bare.observations.front().score == out.observations.front().score);
}

TEST_CASE("experiment preconditions are enforced") {
  const auto tiny = counts_only_dataset(2, 2, 0.5);
  BalanceDesign design;
  design.b = 1;
  design.z = 1;
  // Bounds collapse to (1,1) here, which still works; a 1x1 grid cannot
  // host two distinct balances.
  design.b = 2;
  CHECK_THROWS_AS(run_balance_experiment(tiny, noiseless_oracle(), design, 1),
                  DataError);

  const auto starved = counts_only_dataset(1, 50, 0.5);
  design.b = 1;
  CHECK_THROWS_AS(
      run_balance_experiment(starved, noiseless_oracle(), design, 1),
      DataError);

  const auto fine = counts_only_dataset(40, 40, 0.5);
  design.b = 0;
  CHECK_THROWS_AS(run_balance_experiment(fine, noiseless_oracle(), design, 1),
                  DataError);
  design.b = 1;
  design.z = 0;
  CHECK_THROWS_AS(run_balance_experiment(fine, noiseless_oracle(), design, 1),
                  DataError);
}

TEST_CASE("observation files round-trip") {
  const auto data = counts_only_dataset(70, 70, 0.5);
  BalanceDesign design;
  design.b = 6;
  design.z = 2;
  LearnerSpec oracle = noiseless_oracle();
  oracle.noise_sd = 0.05;
  const auto out = run_balance_experiment(data, oracle, design, 53);

  TempDir dir("obs");
  const auto path = dir / "observations.csv";
  write_observations_csv(out, path);

  const auto lines = test_util::read_lines(path);
  REQUIRE(lines.size() == 13);  // header + 12 rows
  CHECK(lines[0] == "block,rep,n_a,n_b,score");

  const auto back = read_observations_csv(path);
  REQUIRE(back.size() == out.observations.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].block == out.observations[i].block);
    CHECK(back[i].rep == out.observations[i].rep);
    CHECK(back[i].n_a == out.observations[i].n_a);
    CHECK(back[i].n_b == out.observations[i].n_b);
    // format_double writes shortest round-trip decimals, so scores survive
    // the file exactly.
    CHECK(back[i].score == out.observations[i].score);
  }
}

TEST_CASE("observation files are validated on the way in") {
  TempDir dir("obs-bad");

  const auto missing = dir / "missing.csv";
  write_file(missing, "block,rep,n_a,score\n1,1,3,0.5\n");
  CHECK_THROWS_WITH_AS(read_observations_csv(missing),
                       doctest::Contains("'n_b'"), DataError);

  const auto bad_cell = dir / "cell.csv";
  write_file(bad_cell, "block,rep,n_a,n_b,score\n1,1,3,4,high\n");
  CHECK_THROWS_AS(read_observations_csv(bad_cell), DataError);

  const auto bad_count = dir / "count.csv";
  write_file(bad_count, "block,rep,n_a,n_b,score\n1,1,0,4,0.5\n");
  CHECK_THROWS_WITH_AS(read_observations_csv(bad_count),
                       doctest::Contains("at least 1"), DataError);
}
