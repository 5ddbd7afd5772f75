#include "gpaml/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_set>

#include "gpaml/error.hpp"

namespace gpaml {

MetadataDataset::MetadataDataset(std::vector<LabeledPoint> points, double p0_a)
    : points_(std::move(points)), p0_a_(p0_a) {
  if (!(p0_a_ >= 0.0 && p0_a_ <= 1.0))
    throw DataError("population proportion p0_a must lie in [0,1]");
  std::unordered_set<std::int64_t> seen;
  seen.reserve(points_.size());
  const std::size_t dim = feature_dim();
  for (const auto& p : points_) {
    if (p.features.size() != dim)
      throw DataError("inconsistent feature vector length in dataset");
    if (!seen.insert(p.id).second)
      throw DataError("duplicate point identity " + std::to_string(p.id));
    if (p.category == Category::A)
      ++n_a_;
    else
      ++n_b_;
  }
}

namespace {

std::size_t resolve_column(const CsvTable& table, const std::string& ref,
                           const char* role) {
  if (auto idx = table.find_column(ref)) return *idx;
  std::size_t idx = 0;
  auto [ptr, ec] = std::from_chars(ref.data(), ref.data() + ref.size(), idx);
  if (ec == std::errc{} && ptr == ref.data() + ref.size() &&
      idx < table.ncol())
    return idx;
  throw DataError(std::string(role) + " column '" + ref +
                  "' not found in header");
}

bool matches_pattern(const std::string& name, const std::string& pattern) {
  if (!pattern.empty() && pattern.back() == '*')
    return name.rfind(pattern.substr(0, pattern.size() - 1), 0) == 0;
  return name == pattern;
}

MetadataDataset dataset_from_table(const CsvTable& table,
                                   const CsvSchema& schema) {
  const std::size_t label_idx =
      resolve_column(table, schema.label_column, "label");

  std::optional<std::size_t> category_idx;
  std::vector<std::size_t> rule_cols;
  if (schema.rule == CsvSchema::Rule::Column) {
    category_idx = resolve_column(table, schema.rule_arg, "category");
  } else {
    for (std::size_t i = 0; i < table.ncol(); ++i)
      if (table.columns[i].rfind(schema.rule_arg, 0) == 0) rule_cols.push_back(i);
    if (rule_cols.empty())
      throw DataError("no columns matching prefix '" + schema.rule_arg + "'");
  }

  for (const auto& pat : schema.drop_columns)
    if (matches_pattern(table.columns[label_idx], pat))
      throw DataError("label column '" + table.columns[label_idx] +
                      "' is listed in drop_columns");

  std::vector<std::size_t> feature_cols;
  for (std::size_t i = 0; i < table.ncol(); ++i) {
    if (i == label_idx) continue;
    if (category_idx && i == *category_idx) continue;
    if (std::find(rule_cols.begin(), rule_cols.end(), i) != rule_cols.end())
      continue;
    bool dropped = false;
    for (const auto& pat : schema.drop_columns)
      if (matches_pattern(table.columns[i], pat)) {
        dropped = true;
        break;
      }
    if (!dropped) feature_cols.push_back(i);
  }

  std::vector<LabeledPoint> points;
  points.reserve(table.nrow());
  for (std::size_t r = 0; r < table.nrow(); ++r) {
    LabeledPoint p;
    p.id = static_cast<std::int64_t>(r);
    p.features.reserve(feature_cols.size());
    for (std::size_t c : feature_cols)
      p.features.push_back(parse_double_cell(table.rows[r][c], r + 1, c + 1));
    p.label = static_cast<int>(
        parse_int_cell(table.rows[r][label_idx], r + 1, label_idx + 1));
    if (category_idx) {
      const std::string& tag = table.rows[r][*category_idx];
      if (tag == "A")
        p.category = Category::A;
      else if (tag == "B")
        p.category = Category::B;
      else
        throw DataError("unknown category tag '" + tag + "' at row " +
                        std::to_string(r + 1));
    } else {
      p.category = Category::A;
      for (std::size_t c : rule_cols)
        if (parse_double_cell(table.rows[r][c], r + 1, c + 1) > 0.0) {
          p.category = Category::B;
          break;
        }
    }
    points.push_back(std::move(p));
  }

  double p0_a;
  if (schema.p0_a) {
    p0_a = *schema.p0_a;
  } else {
    std::int64_t a = 0;
    for (const auto& p : points)
      if (p.category == Category::A) ++a;
    p0_a = points.empty()
               ? 0.5
               : static_cast<double>(a) / static_cast<double>(points.size());
  }
  return MetadataDataset(std::move(points), p0_a);
}

}  // namespace

MetadataDataset load_csv(const std::filesystem::path& path,
                         const CsvSchema& schema, bool has_header,
                         const std::vector<std::string>& names) {
  return dataset_from_table(read_csv_table(path, has_header, names), schema);
}

void save_csv(const MetadataDataset& ds, const std::filesystem::path& path) {
  CsvWriter w(path);
  std::vector<std::string> header;
  for (std::size_t i = 0; i < ds.feature_dim(); ++i)
    header.push_back("f" + std::to_string(i));
  header.push_back("label");
  header.push_back("category");
  w.row(header);
  for (const auto& p : ds.points()) {
    std::vector<std::string> cells;
    cells.reserve(p.features.size() + 2);
    for (double v : p.features) cells.push_back(format_double(v));
    cells.push_back(std::to_string(p.label));
    cells.push_back(std::string(1, category_tag(p.category)));
    w.row(cells);
  }
  w.close();
}

const std::vector<std::string>& spambase_column_names() {
  static const std::vector<std::string> names = [] {
    const char* words[] = {
        "make",      "address", "all",   "3d",         "our",     "over",
        "remove",    "internet","order", "mail",       "receive", "will",
        "people",    "report",  "addresses", "free",   "business","email",
        "you",       "credit",  "your",  "font",       "000",     "money",
        "hp",        "hpl",     "george","650",        "lab",     "labs",
        "telnet",    "857",     "data",  "415",        "85",      "technology",
        "1999",      "parts",   "pm",    "direct",     "cs",      "meeting",
        "original",  "project", "re",    "edu",        "table",   "conference"};
    const char* chars[] = {"semicolon", "paren", "bracket",
                           "bang",      "dollar", "hash"};
    std::vector<std::string> v;
    for (const char* wname : words) v.push_back(std::string("word_freq_") + wname);
    for (const char* cname : chars) v.push_back(std::string("char_freq_") + cname);
    v.push_back("capital_run_length_average");
    v.push_back("capital_run_length_longest");
    v.push_back("capital_run_length_total");
    v.push_back("spam");
    return v;
  }();
  return names;
}

MetadataDataset engineer_spambase_metadata(const CsvTable& raw,
                                           std::optional<double> p0_a) {
  CsvSchema schema;
  schema.label_column = "spam";
  schema.rule = CsvSchema::Rule::AnyPositivePrefix;
  schema.rule_arg = "char_freq_";
  schema.p0_a = p0_a;
  return dataset_from_table(raw, schema);
}

MetadataDataset load_spambase(const std::filesystem::path& path,
                              std::optional<double> p0_a) {
  return engineer_spambase_metadata(
      read_csv_table(path, /*has_header=*/false, spambase_column_names()),
      p0_a);
}

MetadataDataset samp(const MetadataDataset& ds, Category category,
                     std::int64_t count, Rng& rng) {
  if (count < 0) throw DataError("samp: negative count");
  std::vector<std::size_t> members;
  members.reserve(ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i)
    if (ds.points()[i].category == category) members.push_back(i);
  if (count > static_cast<std::int64_t>(members.size()))
    throw DataError("samp: requested " + std::to_string(count) +
                    " points from category " +
                    std::string(1, category_tag(category)) + " but only " +
                    std::to_string(members.size()) + " available");
  auto pick = rng.sample_without_replacement(members.size(),
                                             static_cast<std::size_t>(count));
  std::vector<LabeledPoint> out;
  out.reserve(pick.size());
  for (std::size_t k : pick) out.push_back(ds.points()[members[k]]);
  return MetadataDataset(std::move(out), ds.p0_a());
}

MetadataDataset synthetic_classification(std::int64_t n_per_category,
                                         double separation, Rng& rng) {
  if (n_per_category < 1)
    throw DataError("synthetic_classification: n_per_category must be >= 1");
  if (!(separation > 0))
    throw DataError("synthetic_classification: separation must be > 0");

  std::vector<LabeledPoint> points;
  points.reserve(static_cast<std::size_t>(2 * n_per_category));
  std::int64_t next_id = 0;
  for (Category cat : {Category::A, Category::B}) {
    // B clusters sit at half the separation, so B points are harder.
    const double sep = cat == Category::A ? separation : separation / 2.0;
    for (std::int64_t i = 0; i < n_per_category; ++i) {
      LabeledPoint p;
      p.id = next_id++;
      p.category = cat;
      p.label = static_cast<int>(i % 2);
      const double cx = p.label == 0 ? 0.0 : sep;
      p.features = {rng.normal(cx, 1.0), rng.normal(0.0, 1.0),
                    rng.normal(0.0, 1.0), rng.normal(0.0, 1.0),
                    rng.normal(0.0, 1.0)};
      points.push_back(std::move(p));
    }
  }
  return MetadataDataset(std::move(points), 0.5);
}

MetadataDataset counts_only_dataset(std::int64_t n_a, std::int64_t n_b,
                                    double p0_a) {
  if (n_a < 0 || n_b < 0) throw DataError("counts must be non-negative");
  std::vector<LabeledPoint> points;
  points.reserve(static_cast<std::size_t>(n_a + n_b));
  std::int64_t next_id = 0;
  for (std::int64_t i = 0; i < n_a; ++i)
    points.push_back({{0.0}, 0, Category::A, next_id++});
  for (std::int64_t i = 0; i < n_b; ++i)
    points.push_back({{0.0}, 0, Category::B, next_id++});
  return MetadataDataset(std::move(points), p0_a);
}

MetadataDataset concat(const MetadataDataset& a, const MetadataDataset& b) {
  std::vector<LabeledPoint> points = a.points();
  points.insert(points.end(), b.points().begin(), b.points().end());
  return MetadataDataset(std::move(points), a.p0_a());
}

MetadataDataset remove_ids(const MetadataDataset& ds,
                           const std::vector<std::int64_t>& ids) {
  std::unordered_set<std::int64_t> gone(ids.begin(), ids.end());
  std::vector<LabeledPoint> points;
  points.reserve(ds.size());
  for (const auto& p : ds.points())
    if (!gone.count(p.id)) points.push_back(p);
  return MetadataDataset(std::move(points), ds.p0_a());
}

MetadataDataset with_p0(const MetadataDataset& ds, double p0_a) {
  return MetadataDataset(ds.points(), p0_a);
}

std::vector<std::int64_t> point_ids(const MetadataDataset& ds) {
  std::vector<std::int64_t> ids;
  ids.reserve(ds.size());
  for (const auto& p : ds.points()) ids.push_back(p.id);
  return ids;
}

}  // namespace gpaml
