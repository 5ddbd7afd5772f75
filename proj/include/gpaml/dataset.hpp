#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gpaml/csv.hpp"
#include "gpaml/rng.hpp"

namespace gpaml {

enum class Category : std::uint8_t { A = 0, B = 1 };

inline char category_tag(Category c) { return c == Category::A ? 'A' : 'B'; }

struct LabeledPoint {
  std::vector<double> features;
  int label = 0;
  Category category = Category::A;
  std::int64_t id = -1;  // stable identity assigned at load, never reused
};

// Labeled points partitioned into categories A/B, plus the assumed population
// proportion pair (p0_a, p0_b = 1 - p0_a). Immutable after construction;
// subsetting always copies.
class MetadataDataset {
 public:
  MetadataDataset() = default;
  // Counts the tags and validates invariants (p0 in [0,1], uniform feature
  // width, ids distinct).
  MetadataDataset(std::vector<LabeledPoint> points, double p0_a);

  const std::vector<LabeledPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }
  std::int64_t n_a() const { return n_a_; }
  std::int64_t n_b() const { return n_b_; }
  std::int64_t count(Category c) const { return c == Category::A ? n_a_ : n_b_; }
  double p0_a() const { return p0_a_; }
  double p0_b() const { return 1.0 - p0_a_; }
  std::size_t feature_dim() const {
    return points_.empty() ? 0 : points_.front().features.size();
  }

 private:
  std::vector<LabeledPoint> points_;
  std::int64_t n_a_ = 0;
  std::int64_t n_b_ = 0;
  double p0_a_ = 0.5;
};

// Maps CSV columns onto point roles. The category is either read from an
// explicit column holding tags A/B, or derived: a point is tagged B when any
// column whose name starts with `rule_arg` is strictly positive (the derived
// rule also drops those columns from the features).
struct CsvSchema {
  enum class Rule { Column, AnyPositivePrefix };

  std::string label_column;  // name, or 0-based index when no name matches
  Rule rule = Rule::Column;
  std::string rule_arg;
  std::vector<std::string> drop_columns;  // exact names or trailing-* prefixes
  std::optional<double> p0_a;  // override; default is the empirical proportion
};

MetadataDataset load_csv(const std::filesystem::path& path,
                         const CsvSchema& schema, bool has_header,
                         const std::vector<std::string>& names = {});

// Writes features (f0..fK), label and category with a header; load_csv on the
// result with the matching schema is an identity on features/labels/tags.
void save_csv(const MetadataDataset& ds, const std::filesystem::path& path);

// Canonical 58-column Spambase layout (57 attributes + `spam` label).
const std::vector<std::string>& spambase_column_names();

// Tags a raw Spambase table: category B iff any char_freq_* value > 0, and
// removes the char_freq_* columns from the features.
MetadataDataset engineer_spambase_metadata(const CsvTable& raw,
                                           std::optional<double> p0_a = {});

// Headerless canonical file straight from the UCI distribution.
MetadataDataset load_spambase(const std::filesystem::path& path,
                              std::optional<double> p0_a = {});

// Uniform sample without replacement of `count` points carrying `category`.
MetadataDataset samp(const MetadataDataset& ds, Category category,
                     std::int64_t count, Rng& rng);

// Self-contained two-class test data: Gaussian clusters per class, with the
// category-B clusters at half the class separation so B is harder to learn.
MetadataDataset synthetic_classification(std::int64_t n_per_category,
                                         double separation, Rng& rng);

// Feature-free stand-in pool for closed-form learners: category counts and
// point identities only (a single zero feature, all labels 0).
MetadataDataset counts_only_dataset(std::int64_t n_a, std::int64_t n_b,
                                    double p0_a);

// Set operations by point identity.
MetadataDataset concat(const MetadataDataset& a, const MetadataDataset& b);
MetadataDataset remove_ids(const MetadataDataset& ds,
                           const std::vector<std::int64_t>& ids);
MetadataDataset with_p0(const MetadataDataset& ds, double p0_a);
std::vector<std::int64_t> point_ids(const MetadataDataset& ds);

}  // namespace gpaml
