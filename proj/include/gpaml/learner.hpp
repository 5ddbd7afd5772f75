#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "gpaml/dataset.hpp"
#include "gpaml/forest.hpp"
#include "gpaml/rng.hpp"

namespace gpaml {

enum class LearnerKind { Oracle, Forest };

struct LearnerSpec {
  LearnerKind kind = LearnerKind::Forest;
  ForestParams forest;
  double noise_sd = 0.05;  // oracle observation noise
};

enum class Metric { CCR, F1 };

Metric parse_metric(const std::string& name);
std::string metric_name(Metric m);

struct ConfusionCounts {
  std::int64_t tp = 0, fp = 0, tn = 0, fn = 0;
};

// CCR = (tp+tn) / (tp+fp+tn+fn)
double ccr(const ConfusionCounts& c);
// F1 = tp / (tp + (fp+fn)/2); 0 when the denominator vanishes
double f1(const ConfusionCounts& c);

// Fitted model plus a fingerprint of what trained it. Immutable; prediction
// is a pure function of the fitted state and the input features.
class TrainedModel {
 public:
  int predict(std::span<const double> features) const;
  bool single_class() const;

  struct Fingerprint {
    std::int64_t train_size = 0;
    std::int64_t n_a = 0, n_b = 0;
    std::uint64_t seed = 0;
  };
  const Fingerprint& fingerprint() const { return fingerprint_; }

 private:
  friend TrainedModel train(const LearnerSpec&, const MetadataDataset&, Rng&);
  std::shared_ptr<const Forest> forest_;
  Fingerprint fingerprint_;
};

// Deterministic under (spec, train_set, rng state). A single-class training
// set degenerates to a constant predictor, flagged on the model.
TrainedModel train(const LearnerSpec& spec, const MetadataDataset& train_set,
                   Rng& rng);

// Exact-match rate / macro-averaged one-vs-rest F1 for multiclass; plain
// binary counts when the labels are {0,1} with 1 as the positive class.
double evaluate(const TrainedModel& model, const MetadataDataset& test_set,
                Metric metric);

// Noiseless closed-form accuracy 1 - exp(-x1*x2 / (10*x1 + 15*x2)),
// the synthetic stand-in for a whole train/evaluate pipeline.
double oracle_mean(double x1, double x2);

// oracle_mean plus Gaussian noise; x1/x2 are the category-A/B training counts.
double oracle_accuracy(double x1, double x2, double noise_sd, Rng& rng);

}  // namespace gpaml
