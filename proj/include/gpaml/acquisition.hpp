#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gpaml/balance_experiment.hpp"
#include "gpaml/conic.hpp"
#include "gpaml/dataset.hpp"
#include "gpaml/learner.hpp"

namespace gpaml {

enum class PolicyKind { GPAML, Random, RandomAction, FixedProportion, AllA, AllB };

struct Policy {
  PolicyKind kind = PolicyKind::GPAML;
  double proportion = 0.5;  // FixedProportion only
};

// Round-trips with policy_name: gpaml, random, random-action, fixed:P,
// all-a, all-b.
Policy parse_policy(const std::string& text);
std::string policy_name(const Policy& policy);

// Initial balance rule for campaigns: a fixed category-A count, or one drawn
// uniformly from [lo, hi].
struct StartingBalance {
  enum class Kind { Fixed, UniformRange };
  Kind kind = Kind::UniformRange;
  int fixed_a = 0;
  int range_lo = 20;
  int range_hi = 80;
};

struct PolicyState {
  std::int64_t n_a = 0;  // current training counts
  std::int64_t n_b = 0;
  int n = 0;             // points to acquire
  std::int64_t pool_a = 0;
  std::int64_t pool_b = 0;
  // GPAML only: the balance experiment to decide from.
  const ExperimentData* experiment = nullptr;
  int q = 100;
  const GpFitOptions* gp = nullptr;
};

struct PolicyChoice {
  int n_a = 0;
  int n_b = 0;
  bool clamped = false;  // raw choice exceeded a category's pool
};

// Selects the next batch composition. Random draws n points from the pool
// ignoring category (counts follow the hypergeometric law); RandomAction is
// uniform over the n+1 compositions; FixedProportion rounds p*n; AllA/AllB
// take everything from one side; GPAML delegates to gpaml_step. Choices
// beyond a category's pool clamp toward the available points, recorded in
// the result. Throws when the pool holds fewer than n points.
PolicyChoice apply_policy(const Policy& policy, const PolicyState& state,
                          Rng& rng);

struct CampaignConfig {
  int n_start = 100;
  int n_stop = 500;
  int step = 20;
  Policy policy;
  StartingBalance start;
  BalanceDesign design;  // used by the GPAML policy's per-step experiment
  int q = 100;
  Metric metric = Metric::CCR;
  std::int64_t holdout = 1000;
  GpFitOptions gp;
};

struct TraceRow {
  int step = 0;  // 0-based; N = n_start + step * config.step
  std::int64_t n = 0;
  std::int64_t n_a_total = 0;
  std::int64_t n_b_total = 0;
  double prop_a = 0.0;
  bool has_choice = false;  // final or terminal rows carry no decision
  int chosen_n_a = 0;
  int chosen_n_b = 0;
  bool clamped = false;
  double oos_score = 0.0;
  double wall_seconds = 0.0;  // not serialized; outputs stay byte-stable
};

struct AcquisitionTrace {
  std::vector<TraceRow> rows;
  std::string policy;
  // completed | pool_exhausted | category_exhausted
  std::string termination = "completed";
};

// The full loop: carve a fixed holdout at the population proportion, draw
// the initial training set, then repeatedly decide (for GPAML, after a fresh
// balance experiment on the current training data), acquire from the pool,
// retrain and score on the holdout. The oracle learner scores each state
// with the noiseless closed form instead, making traces analytically
// checkable. Training data, pool and holdout stay disjoint throughout.
AcquisitionTrace run_campaign(const MetadataDataset& data,
                              const LearnerSpec& learner,
                              const CampaignConfig& config, std::uint64_t seed,
                              int jobs = 1);

struct SuitabilityConfig {
  int reps = 5;
  int major = 90;  // training points from the probed category
  int minor = 10;  // training points from the other category
  std::int64_t holdout = 500;
  Metric metric = Metric::CCR;
};

struct SuitabilityResult {
  std::vector<double> scores_a;  // trained on major-A / minor-B
  std::vector<double> scores_b;  // trained on major-B / minor-A
  double mean_a = 0.0;
  double mean_b = 0.0;
  double mean_diff = 0.0;  // mean_a - mean_b
};

// Probes whether the metadata split matters at all: train heavily on one
// category, lightly on the other, score on a fresh holdout, and compare the
// two directions. A difference of means near zero suggests the categories
// are interchangeable for this learner.
SuitabilityResult metadata_suitability_check(const MetadataDataset& data,
                                             const LearnerSpec& learner,
                                             const SuitabilityConfig& config,
                                             std::uint64_t seed);

// Classifies a decision as acceptable for the robustness study.
struct GoodDecision {
  enum class Kind { MajorityA, MajorityB, NearTarget };
  Kind kind = Kind::NearTarget;
  int target = 0;
  int tolerance = 3;
};

GoodDecision parse_good_decision(const std::string& text);
std::string good_decision_name(const GoodDecision& good);

struct RobustnessConfig {
  int b_total = 250;
  std::vector<int> sizes{100, 150, 200};
  int reps = 100;
  int z = 10;
  int n = 20;  // move size for each decision
  int q = 100;
  Metric metric = Metric::CCR;
  GoodDecision good;
  GpFitOptions gp;
};

struct RobustnessRow {
  int size = 0;
  int rep = 0;  // 1-based
  int n_a = 0;
  int n_b = 0;
  bool good = false;
};

struct RobustnessReport {
  std::vector<RobustnessRow> rows;
  ExperimentData experiment;               // the one full-size experiment
  std::vector<double> good_fraction;       // per size, in config order
};

// How stable is the acquisition decision under a smaller experiment? Runs
// one experiment at b_total blocks, then repeatedly refits on random block
// subsets of each size and records the decision each subset produces.
RobustnessReport subsample_robustness_study(const MetadataDataset& data,
                                            const LearnerSpec& learner,
                                            const RobustnessConfig& config,
                                            std::uint64_t seed, int jobs = 1);

// trace.csv: step,N,n_a_total,n_b_total,prop_a,chosen_n_a,chosen_n_b,policy,
// oos_score,clamped. Rows without a decision leave the chosen columns empty.
void write_trace_csv(const AcquisitionTrace& trace,
                     const std::filesystem::path& path);

// suitability.csv: rep,category,score.
void write_suitability_csv(const SuitabilityResult& result,
                           const std::filesystem::path& path);

// robustness.csv: size,rep,n_a,n_b,good.
void write_robustness_csv(const RobustnessReport& report,
                          const std::filesystem::path& path);

}  // namespace gpaml
