#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "gpaml/dataset.hpp"
#include "gpaml/learner.hpp"
#include "gpaml/rng.hpp"

namespace gpaml {

// The blocked, replicated design: b unique balance pairs, z subsample
// replicates at each, r = b*z learner runs in total.
struct BalanceDesign {
  int b = 100;
  int z = 10;
  Metric metric = Metric::CCR;
  // Keep per-run train/test point ids (memory cost; off by default).
  bool record_membership = false;
  // Experimental: compose each replicate's test set at a freshly drawn
  // random proportion instead of the population p0. Known to distort
  // campaigns; present only so the effect can be studied.
  bool random_test_proportion = false;
};

struct BalanceObservation {
  int block = 0;  // 1-based
  int rep = 0;    // 1-based
  int n_a = 0;
  int n_b = 0;
  double score = 0.0;
  bool valid = true;
  std::string error;
  std::vector<std::int64_t> train_ids;  // filled when record_membership
  std::vector<std::int64_t> test_ids;
};

struct ExperimentProvenance {
  std::int64_t n = 0;  // dataset size the experiment subsampled from
  std::int64_t n_a = 0;
  std::int64_t n_b = 0;
  double p0_a = 0.0;
  int b = 0;
  int z = 0;
  std::uint64_t seed = 0;
};

// Everything the surrogate needs: the balance matrix, responses, and the
// per-category sampling bounds that normalize the GP inputs.
struct ExperimentData {
  std::vector<BalanceObservation> observations;  // ordered by (block, rep)
  int bound_a = 0;
  int bound_b = 0;
  ExperimentProvenance provenance;

  // Valid rows only.
  Eigen::MatrixXd design_matrix() const;
  Eigen::VectorXd responses() const;
};

// Test-set composition at the population proportion: max(1, round-half-up
// of 0.1 * n * p per category).
std::pair<int, int> test_set_counts(std::int64_t n, double p0_a, double p0_b);

// Splits off a test set at the population proportion; returns (test,
// remaining pool), disjoint by point identity.
std::pair<MetadataDataset, MetadataDataset> compose_test_set(
    const MetadataDataset& data, Rng& rng);

// Algorithm: draw b distinct balance pairs uniformly from
// [1,B_A] x [1,B_B]; for each of z replicates per pair, carve a fresh test
// set, subsample a training set of that balance from the rest, train, and
// score out of sample. The oracle learner skips the sampling and reports
// the closed-form accuracy plus noise. Replicates are independent and may
// run across `jobs` threads; output order and content depend only on
// (dataset, learner, design, seed).
ExperimentData run_balance_experiment(const MetadataDataset& data,
                                      const LearnerSpec& learner,
                                      const BalanceDesign& design,
                                      std::uint64_t seed, int jobs = 1);

// observations.csv: block,rep,n_a,n_b,score. Invalid rows are not written.
void write_observations_csv(const ExperimentData& data,
                            const std::filesystem::path& path);

// Reads rows written by write_observations_csv. Bounds and provenance are
// not stored in the CSV; callers supply them from config.
std::vector<BalanceObservation> read_observations_csv(
    const std::filesystem::path& path);

}  // namespace gpaml
