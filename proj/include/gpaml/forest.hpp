#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gpaml/dataset.hpp"
#include "gpaml/rng.hpp"

namespace gpaml {

struct ForestParams {
  int tree_count = 100;
  int max_depth = 0;  // 0 = unlimited
  int min_leaf = 1;
  int feature_subset_size = 0;  // 0 = ceil(sqrt(p))
};

// Axis-aligned binary tree with Gini-impurity splits. Nodes are stored in a
// flat array; leaves carry the majority class (smallest label on ties).
class DecisionTree {
 public:
  // `rows` indexes into `points`, already in canonical (id-sorted) order.
  void build(const std::vector<LabeledPoint>& points,
             std::vector<std::size_t> rows, const std::vector<int>& labels,
             const ForestParams& params, Rng& rng);
  int predict(std::span<const double> features) const;

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    int label = 0;
  };
  std::vector<Node> nodes_;
};

// Bagged decision trees: each tree is grown on a bootstrap resample with a
// fresh uniform feature subset at every split; prediction is a majority vote.
class Forest {
 public:
  // Training rows are canonicalized by point id before any randomness is
  // drawn, so the fit does not depend on the dataset's row order.
  void fit(const MetadataDataset& train, const ForestParams& params,
           std::uint64_t seed);
  int predict(std::span<const double> features) const;

  bool single_class() const { return labels_.size() == 1; }
  const std::vector<int>& labels() const { return labels_; }

 private:
  std::vector<DecisionTree> trees_;
  std::vector<int> labels_;  // sorted distinct training labels
};

}  // namespace gpaml
