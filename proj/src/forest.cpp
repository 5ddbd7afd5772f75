#include "gpaml/forest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gpaml/error.hpp"

namespace gpaml {

namespace {

double gini(const std::vector<std::int64_t>& counts, std::int64_t total) {
  if (total == 0) return 0.0;
  double sum_sq = 0.0;
  for (auto c : counts) {
    const double p = static_cast<double>(c) / static_cast<double>(total);
    sum_sq += p * p;
  }
  return 1.0 - sum_sq;
}

int majority(const std::vector<std::int64_t>& counts) {
  int best = 0;
  std::int64_t best_count = -1;
  for (std::size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] > best_count) {  // strict: keeps the smallest label on ties
      best_count = counts[c];
      best = static_cast<int>(c);
    }
  }
  return best;
}

}  // namespace

void DecisionTree::build(const std::vector<LabeledPoint>& points,
                         std::vector<std::size_t> rows,
                         const std::vector<int>& labels,
                         const ForestParams& params, Rng& rng) {
  const std::size_t n_classes = labels.size();
  const std::size_t n_features =
      points.empty() ? 0 : points.front().features.size();
  const int max_depth =
      params.max_depth > 0 ? params.max_depth : std::numeric_limits<int>::max();
  std::size_t mtry = params.feature_subset_size > 0
                         ? static_cast<std::size_t>(params.feature_subset_size)
                         : static_cast<std::size_t>(std::ceil(
                               std::sqrt(static_cast<double>(n_features))));
  mtry = std::min(mtry, n_features);

  // label -> compact class index
  auto class_of = [&](std::size_t row) {
    const int lab = points[row].label;
    return static_cast<std::size_t>(
        std::lower_bound(labels.begin(), labels.end(), lab) - labels.begin());
  };

  struct Work {
    std::size_t begin, end;
    int depth;
    std::int32_t node;
  };
  std::vector<std::size_t> order = std::move(rows);
  nodes_.clear();
  nodes_.push_back({});
  std::vector<Work> stack{{0, order.size(), 0, 0}};
  std::vector<std::size_t> feat_pool(n_features);
  std::vector<std::int64_t> counts(n_classes), left_counts(n_classes),
      right_counts(n_classes);
  std::vector<std::pair<double, std::size_t>> sorted;  // (value, class)

  while (!stack.empty()) {
    const Work w = stack.back();
    stack.pop_back();
    const std::size_t n = w.end - w.begin;

    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = w.begin; i < w.end; ++i) ++counts[class_of(order[i])];
    const double node_gini = gini(counts, static_cast<std::int64_t>(n));
    Node& self = nodes_[static_cast<std::size_t>(w.node)];
    self.label = labels[static_cast<std::size_t>(majority(counts))];

    if (node_gini == 0.0 || w.depth >= max_depth ||
        n < 2 * static_cast<std::size_t>(params.min_leaf) || n < 2)
      continue;  // leaf

    // draw the feature subset for this split
    for (std::size_t i = 0; i < n_features; ++i) feat_pool[i] = i;
    for (std::size_t i = 0; i < mtry; ++i) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(
          static_cast<std::int64_t>(i), static_cast<std::int64_t>(n_features - 1)));
      std::swap(feat_pool[i], feat_pool[j]);
    }

    double best_score = std::numeric_limits<double>::infinity();
    std::size_t best_feature = 0;
    double best_threshold = 0.0;
    bool found = false;

    for (std::size_t fi = 0; fi < mtry; ++fi) {
      const std::size_t f = feat_pool[fi];
      sorted.clear();
      for (std::size_t i = w.begin; i < w.end; ++i)
        sorted.emplace_back(points[order[i]].features[f], class_of(order[i]));
      std::sort(sorted.begin(), sorted.end());

      std::fill(left_counts.begin(), left_counts.end(), 0);
      right_counts = counts;
      for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        ++left_counts[sorted[i].second];
        --right_counts[sorted[i].second];
        if (sorted[i].first == sorted[i + 1].first) continue;
        const auto nl = static_cast<std::int64_t>(i + 1);
        const auto nr = static_cast<std::int64_t>(n) - nl;
        if (nl < params.min_leaf || nr < params.min_leaf) continue;
        const double score =
            (static_cast<double>(nl) * gini(left_counts, nl) +
             static_cast<double>(nr) * gini(right_counts, nr)) /
            static_cast<double>(n);
        if (score < best_score - 1e-12) {
          best_score = score;
          best_feature = f;
          best_threshold = 0.5 * (sorted[i].first + sorted[i + 1].first);
          found = true;
        }
      }
    }

    if (!found || best_score >= node_gini) continue;  // no useful split

    const auto mid = std::partition(
        order.begin() + static_cast<std::ptrdiff_t>(w.begin),
        order.begin() + static_cast<std::ptrdiff_t>(w.end),
        [&](std::size_t row) {
          return points[row].features[best_feature] <= best_threshold;
        });
    const auto split =
        static_cast<std::size_t>(mid - order.begin());
    if (split == w.begin || split == w.end) continue;  // degenerate partition

    const auto left_id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({});
    const auto right_id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back({});
    Node& parent = nodes_[static_cast<std::size_t>(w.node)];
    parent.feature = static_cast<int>(best_feature);
    parent.threshold = best_threshold;
    parent.left = left_id;
    parent.right = right_id;
    // Push right first so the left child is processed next; the traversal
    // order fixes the rng consumption order and must stay stable.
    stack.push_back({split, w.end, w.depth + 1, right_id});
    stack.push_back({w.begin, split, w.depth + 1, left_id});
  }
}

int DecisionTree::predict(std::span<const double> features) const {
  std::size_t node = 0;
  while (nodes_[node].feature >= 0) {
    const Node& nd = nodes_[node];
    node = static_cast<std::size_t>(
        features[static_cast<std::size_t>(nd.feature)] <= nd.threshold
            ? nd.left
            : nd.right);
  }
  return nodes_[node].label;
}

void Forest::fit(const MetadataDataset& train, const ForestParams& params,
                 std::uint64_t seed) {
  if (train.size() == 0) throw DataError("forest: empty training set");
  if (params.tree_count < 1) throw DataError("forest: tree_count must be >= 1");

  // canonical order: by point id
  std::vector<std::size_t> canon(train.size());
  for (std::size_t i = 0; i < canon.size(); ++i) canon[i] = i;
  std::sort(canon.begin(), canon.end(), [&](std::size_t a, std::size_t b) {
    return train.points()[a].id < train.points()[b].id;
  });

  labels_.clear();
  for (const auto& p : train.points()) labels_.push_back(p.label);
  std::sort(labels_.begin(), labels_.end());
  labels_.erase(std::unique(labels_.begin(), labels_.end()), labels_.end());

  trees_.assign(static_cast<std::size_t>(params.tree_count), {});
  for (std::size_t t = 0; t < trees_.size(); ++t) {
    Rng tree_rng(mix_seed(seed, t));
    std::vector<std::size_t> boot(train.size());
    for (auto& b : boot)
      b = canon[static_cast<std::size_t>(
          tree_rng.uniform_int(0, static_cast<std::int64_t>(train.size()) - 1))];
    trees_[t].build(train.points(), std::move(boot), labels_, params, tree_rng);
  }
}

int Forest::predict(std::span<const double> features) const {
  std::vector<int> votes(labels_.size(), 0);
  for (const auto& tree : trees_) {
    const int lab = tree.predict(features);
    const auto it = std::lower_bound(labels_.begin(), labels_.end(), lab);
    ++votes[static_cast<std::size_t>(it - labels_.begin())];
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < votes.size(); ++i)
    if (votes[i] > votes[best]) best = i;
  return labels_[best];
}

}  // namespace gpaml
