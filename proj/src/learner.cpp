#include "gpaml/learner.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "gpaml/error.hpp"

namespace gpaml {

Metric parse_metric(const std::string& name) {
  if (name == "ccr") return Metric::CCR;
  if (name == "f1") return Metric::F1;
  throw ConfigError("unknown metric '" + name + "' (expected ccr or f1)");
}

std::string metric_name(Metric m) { return m == Metric::CCR ? "ccr" : "f1"; }

double ccr(const ConfusionCounts& c) {
  const std::int64_t total = c.tp + c.fp + c.tn + c.fn;
  if (total == 0) throw Error("ccr: empty evaluation");
  return static_cast<double>(c.tp + c.tn) / static_cast<double>(total);
}

double f1(const ConfusionCounts& c) {
  const double denom = static_cast<double>(c.tp) +
                       0.5 * static_cast<double>(c.fp + c.fn);
  if (denom == 0.0) return 0.0;
  return static_cast<double>(c.tp) / denom;
}

int TrainedModel::predict(std::span<const double> features) const {
  return forest_->predict(features);
}

bool TrainedModel::single_class() const { return forest_->single_class(); }

TrainedModel train(const LearnerSpec& spec, const MetadataDataset& train_set,
                   Rng& rng) {
  if (spec.kind == LearnerKind::Oracle)
    throw Error("train: the oracle learner has no trainable model; "
                "use oracle_accuracy");
  if (train_set.size() == 0) throw DataError("train: empty training set");

  const std::uint64_t seed = rng.next_u64();
  auto forest = std::make_shared<Forest>();
  forest->fit(train_set, spec.forest, seed);

  TrainedModel model;
  model.forest_ = std::move(forest);
  model.fingerprint_ = {static_cast<std::int64_t>(train_set.size()),
                        train_set.n_a(), train_set.n_b(), seed};
  return model;
}

namespace {

double macro_f1(const TrainedModel& model, const MetadataDataset& test_set,
                const std::vector<int>& labels) {
  double sum = 0.0;
  for (int positive : labels) {
    ConfusionCounts c;
    for (const auto& p : test_set.points()) {
      const bool actual = p.label == positive;
      const bool predicted = model.predict(p.features) == positive;
      if (actual && predicted)
        ++c.tp;
      else if (!actual && predicted)
        ++c.fp;
      else if (actual && !predicted)
        ++c.fn;
      else
        ++c.tn;
    }
    sum += f1(c);
  }
  return sum / static_cast<double>(labels.size());
}

}  // namespace

double evaluate(const TrainedModel& model, const MetadataDataset& test_set,
                Metric metric) {
  if (test_set.size() == 0) throw DataError("evaluate: empty test set");

  std::vector<int> labels;
  for (const auto& p : test_set.points()) labels.push_back(p.label);
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());

  if (metric == Metric::CCR) {
    std::int64_t correct = 0;
    for (const auto& p : test_set.points())
      if (model.predict(p.features) == p.label) ++correct;
    return static_cast<double>(correct) /
           static_cast<double>(test_set.size());
  }

  const bool binary01 = labels.size() <= 2 &&
                        std::all_of(labels.begin(), labels.end(),
                                    [](int l) { return l == 0 || l == 1; });
  if (binary01) {
    ConfusionCounts c;
    for (const auto& p : test_set.points()) {
      const bool actual = p.label == 1;
      const bool predicted = model.predict(p.features) == 1;
      if (actual && predicted)
        ++c.tp;
      else if (!actual && predicted)
        ++c.fp;
      else if (actual && !predicted)
        ++c.fn;
      else
        ++c.tn;
    }
    return f1(c);
  }
  return macro_f1(model, test_set, labels);
}

double oracle_mean(double x1, double x2) {
  if (x1 < 0 || x2 < 0) throw Error("oracle_mean: negative count");
  if (x1 == 0 && x2 == 0) throw Error("oracle_mean: both counts zero");
  return 1.0 - std::exp(-(x1 * x2) / (10.0 * x1 + 15.0 * x2));
}

double oracle_accuracy(double x1, double x2, double noise_sd, Rng& rng) {
  const double mean = oracle_mean(x1, x2);
  if (noise_sd < 0) throw Error("oracle_accuracy: negative noise_sd");
  return noise_sd == 0.0 ? mean : mean + rng.normal(0.0, noise_sd);
}

}  // namespace gpaml
