#include "gpaml/balance_experiment.hpp"

#include <cmath>
#include <unordered_set>

#include "gpaml/csv.hpp"
#include "gpaml/error.hpp"
#include "gpaml/parallel.hpp"

namespace gpaml {

namespace {

std::int64_t round_half_up(double x) {
  return static_cast<std::int64_t>(std::floor(x + 0.5));
}

std::pair<MetadataDataset, MetadataDataset> compose_test_set_at(
    const MetadataDataset& data, double p_a, Rng& rng) {
  const auto [t_a, t_b] =
      test_set_counts(static_cast<std::int64_t>(data.size()), p_a, 1.0 - p_a);
  const MetadataDataset test_a = samp(data, Category::A, t_a, rng);
  const MetadataDataset test_b = samp(data, Category::B, t_b, rng);
  MetadataDataset test = concat(test_a, test_b);
  MetadataDataset pool = remove_ids(data, point_ids(test));
  return {std::move(test), std::move(pool)};
}

}  // namespace

std::pair<int, int> test_set_counts(std::int64_t n, double p0_a, double p0_b) {
  if (n < 1) throw DataError("cannot compose a test set from an empty dataset");
  const auto count = [n](double p) {
    return std::max<std::int64_t>(1, round_half_up(0.1 * static_cast<double>(n) * p));
  };
  return {static_cast<int>(count(p0_a)), static_cast<int>(count(p0_b))};
}

std::pair<MetadataDataset, MetadataDataset> compose_test_set(
    const MetadataDataset& data, Rng& rng) {
  return compose_test_set_at(data, data.p0_a(), rng);
}

Eigen::MatrixXd ExperimentData::design_matrix() const {
  Eigen::Index valid = 0;
  for (const auto& o : observations)
    if (o.valid) ++valid;
  Eigen::MatrixXd x(valid, 2);
  Eigen::Index i = 0;
  for (const auto& o : observations) {
    if (!o.valid) continue;
    x(i, 0) = o.n_a;
    x(i, 1) = o.n_b;
    ++i;
  }
  return x;
}

Eigen::VectorXd ExperimentData::responses() const {
  Eigen::Index valid = 0;
  for (const auto& o : observations)
    if (o.valid) ++valid;
  Eigen::VectorXd y(valid);
  Eigen::Index i = 0;
  for (const auto& o : observations)
    if (o.valid) y[i++] = o.score;
  return y;
}

ExperimentData run_balance_experiment(const MetadataDataset& data,
                                      const LearnerSpec& learner,
                                      const BalanceDesign& design,
                                      std::uint64_t seed, int jobs) {
  if (design.b < 1 || design.z < 1) {
    throw DataError("experiment design needs b >= 1 and z >= 1");
  }
  const auto n = static_cast<std::int64_t>(data.size());
  const auto [t_a, t_b] = test_set_counts(n, data.p0_a(), data.p0_b());
  const std::int64_t bound_a = data.n_a() - t_a;
  const std::int64_t bound_b = data.n_b() - t_b;
  if (bound_a < 1 || bound_b < 1) {
    throw DataError("dataset too small: sampling bounds (" +
                    std::to_string(bound_a) + ", " + std::to_string(bound_b) +
                    ") after reserving the test share");
  }
  if (static_cast<std::int64_t>(design.b) > bound_a * bound_b) {
    throw DataError("cannot place " + std::to_string(design.b) +
                    " distinct balances on a " + std::to_string(bound_a) +
                    " x " + std::to_string(bound_b) + " grid");
  }

  // Distinct blocks, uniform over the grid via rejection.
  Rng block_rng(mix_seed(seed, "blocks"));
  std::vector<std::pair<int, int>> blocks;
  std::unordered_set<std::int64_t> seen;
  while (blocks.size() < static_cast<std::size_t>(design.b)) {
    const auto a = block_rng.uniform_int(1, bound_a);
    const auto b = block_rng.uniform_int(1, bound_b);
    if (seen.insert(a * (bound_b + 1) + b).second) {
      blocks.emplace_back(static_cast<int>(a), static_cast<int>(b));
    }
  }

  ExperimentData out;
  out.bound_a = static_cast<int>(bound_a);
  out.bound_b = static_cast<int>(bound_b);
  out.provenance = {n, data.n_a(), data.n_b(), data.p0_a(),
                    design.b, design.z, seed};
  const std::size_t runs =
      static_cast<std::size_t>(design.b) * static_cast<std::size_t>(design.z);
  out.observations.resize(runs);

  parallel_for(jobs, runs, [&](std::size_t i) {
    const int j = static_cast<int>(i) / design.z + 1;
    const int k = static_cast<int>(i) % design.z + 1;
    BalanceObservation& obs = out.observations[i];
    obs.block = j;
    obs.rep = k;
    obs.n_a = blocks[static_cast<std::size_t>(j - 1)].first;
    obs.n_b = blocks[static_cast<std::size_t>(j - 1)].second;
    Rng rng(mix_seed(mix_seed(seed, static_cast<std::uint64_t>(j)),
                     static_cast<std::uint64_t>(k)));
    try {
      if (learner.kind == LearnerKind::Oracle) {
        obs.score = oracle_accuracy(obs.n_a, obs.n_b, learner.noise_sd, rng);
        return;
      }
      double p_test = data.p0_a();
      if (design.random_test_proportion) p_test = rng.uniform01();
      auto [test, pool] = compose_test_set_at(data, p_test, rng);
      const MetadataDataset train_a = samp(pool, Category::A, obs.n_a, rng);
      const MetadataDataset train_b = samp(pool, Category::B, obs.n_b, rng);
      const MetadataDataset train_set = concat(train_a, train_b);
      const TrainedModel model = train(learner, train_set, rng);
      obs.score = evaluate(model, test, design.metric);
      if (design.record_membership) {
        obs.train_ids = point_ids(train_set);
        obs.test_ids = point_ids(test);
      }
    } catch (const std::exception& e) {
      obs.valid = false;
      obs.error = e.what();
    }
  });

  std::size_t invalid = 0;
  std::string first_error;
  for (const auto& o : out.observations) {
    if (!o.valid) {
      if (first_error.empty()) first_error = o.error;
      ++invalid;
    }
  }
  if (invalid * 20 > runs) {
    throw DataError("aborting: " + std::to_string(invalid) + " of " +
                    std::to_string(runs) + " runs failed; first error: " +
                    first_error);
  }
  return out;
}

void write_observations_csv(const ExperimentData& data,
                            const std::filesystem::path& path) {
  CsvWriter w(path);
  w.row({"block", "rep", "n_a", "n_b", "score"});
  for (const auto& o : data.observations) {
    if (!o.valid) continue;
    w.row({std::to_string(o.block), std::to_string(o.rep),
           std::to_string(o.n_a), std::to_string(o.n_b),
           format_double(o.score)});
  }
  w.close();
}

std::vector<BalanceObservation> read_observations_csv(
    const std::filesystem::path& path) {
  const CsvTable table = read_csv_table(path, true);
  const auto col = [&](const char* name) {
    const auto idx = table.find_column(name);
    if (!idx) {
      throw DataError(path.string() + ": missing column '" + name + "'");
    }
    return *idx;
  };
  const std::size_t c_block = col("block"), c_rep = col("rep");
  const std::size_t c_na = col("n_a"), c_nb = col("n_b"), c_score = col("score");
  std::vector<BalanceObservation> obs;
  obs.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto cell = [&](std::size_t c) -> const std::string& {
      return table.rows[r][c];
    };
    BalanceObservation o;
    o.block = static_cast<int>(parse_int_cell(cell(c_block), r + 2, c_block + 1));
    o.rep = static_cast<int>(parse_int_cell(cell(c_rep), r + 2, c_rep + 1));
    o.n_a = static_cast<int>(parse_int_cell(cell(c_na), r + 2, c_na + 1));
    o.n_b = static_cast<int>(parse_int_cell(cell(c_nb), r + 2, c_nb + 1));
    o.score = parse_double_cell(cell(c_score), r + 2, c_score + 1);
    if (o.n_a < 1 || o.n_b < 1) {
      throw DataError(path.string() + ": row " + std::to_string(r + 2) +
                      ": balance counts must be at least 1");
    }
    obs.push_back(std::move(o));
  }
  return obs;
}

}  // namespace gpaml
