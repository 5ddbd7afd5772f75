#include "gpaml/acquisition.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

#include "gpaml/csv.hpp"
#include "gpaml/error.hpp"

namespace gpaml {

namespace {

std::int64_t round_half_up(double x) {
  return static_cast<std::int64_t>(std::floor(x + 0.5));
}

// Holdout composition at the population proportion.
std::pair<std::int64_t, std::int64_t> holdout_counts(std::int64_t size,
                                                     double p0_a) {
  const std::int64_t a =
      std::clamp<std::int64_t>(round_half_up(p0_a * static_cast<double>(size)),
                               0, size);
  return {a, size - a};
}

MetadataDataset carve(const MetadataDataset& from, std::int64_t want_a,
                      std::int64_t want_b, Rng& rng) {
  return concat(samp(from, Category::A, want_a, rng),
                samp(from, Category::B, want_b, rng));
}

}  // namespace

Policy parse_policy(const std::string& text) {
  if (text == "gpaml") return {PolicyKind::GPAML, 0.5};
  if (text == "random") return {PolicyKind::Random, 0.5};
  if (text == "random-action") return {PolicyKind::RandomAction, 0.5};
  if (text == "all-a") return {PolicyKind::AllA, 0.5};
  if (text == "all-b") return {PolicyKind::AllB, 0.5};
  if (text.rfind("fixed:", 0) == 0) {
    double p = 0.0;
    try {
      p = std::stod(text.substr(6));
    } catch (const std::exception&) {
      throw ConfigError("bad fixed-proportion policy '" + text + "'");
    }
    if (p < 0.0 || p > 1.0) {
      throw ConfigError("fixed-proportion policy needs p in [0,1], got " +
                        text.substr(6));
    }
    return {PolicyKind::FixedProportion, p};
  }
  throw ConfigError("unknown policy '" + text +
                    "' (expected gpaml, random, random-action, fixed:P, "
                    "all-a or all-b)");
}

std::string policy_name(const Policy& policy) {
  switch (policy.kind) {
    case PolicyKind::GPAML: return "gpaml";
    case PolicyKind::Random: return "random";
    case PolicyKind::RandomAction: return "random-action";
    case PolicyKind::FixedProportion:
      return "fixed:" + format_double(policy.proportion);
    case PolicyKind::AllA: return "all-a";
    case PolicyKind::AllB: return "all-b";
  }
  return "unknown";
}

PolicyChoice apply_policy(const Policy& policy, const PolicyState& state,
                          Rng& rng) {
  if (state.n < 1) throw DataError("batch size must be at least 1");
  const std::int64_t total = state.pool_a + state.pool_b;
  if (total < state.n) {
    throw DataError("pool exhausted: " + std::to_string(total) +
                    " points left, need " + std::to_string(state.n));
  }
  std::int64_t raw_a = 0;
  switch (policy.kind) {
    case PolicyKind::GPAML: {
      if (!state.experiment) {
        throw DataError("the gpaml policy needs balance-experiment data");
      }
      const GpFitOptions opts = state.gp ? *state.gp : GpFitOptions{};
      const AcquisitionDecision d =
          gpaml_step(*state.experiment, static_cast<int>(state.n_a),
                     static_cast<int>(state.n_b), state.n, state.q, opts);
      raw_a = d.n_a;
      break;
    }
    case PolicyKind::Random: {
      const auto picks = rng.sample_without_replacement(
          static_cast<std::size_t>(total), static_cast<std::size_t>(state.n));
      for (const auto i : picks) {
        if (static_cast<std::int64_t>(i) < state.pool_a) ++raw_a;
      }
      break;
    }
    case PolicyKind::RandomAction:
      raw_a = rng.uniform_int(0, state.n);
      break;
    case PolicyKind::FixedProportion:
      raw_a = round_half_up(policy.proportion * state.n);
      break;
    case PolicyKind::AllA:
      raw_a = state.n;
      break;
    case PolicyKind::AllB:
      raw_a = 0;
      break;
  }
  const std::int64_t a =
      std::clamp(raw_a, std::max<std::int64_t>(0, state.n - state.pool_b),
                 std::min<std::int64_t>(state.n, state.pool_a));
  return {static_cast<int>(a), static_cast<int>(state.n - a), a != raw_a};
}

AcquisitionTrace run_campaign(const MetadataDataset& data,
                              const LearnerSpec& learner,
                              const CampaignConfig& config, std::uint64_t seed,
                              int jobs) {
  if (config.step < 1) throw ConfigError("campaign.step must be at least 1");
  if (config.n_start >= config.n_stop) {
    throw ConfigError("campaign.n_start must be below campaign.n_stop");
  }
  if ((config.n_stop - config.n_start) % config.step != 0) {
    throw ConfigError("campaign.step must divide n_stop - n_start");
  }
  if (config.holdout < 1) throw ConfigError("campaign.holdout must be at least 1");
  const int steps = (config.n_stop - config.n_start) / config.step;

  Rng setup_rng(mix_seed(seed, "campaign-setup"));
  const auto [h_a, h_b] = holdout_counts(config.holdout, data.p0_a());
  const MetadataDataset holdout_set = carve(data, h_a, h_b, setup_rng);
  MetadataDataset pool = remove_ids(data, point_ids(holdout_set));

  int init_a = config.start.fixed_a;
  if (config.start.kind == StartingBalance::Kind::UniformRange) {
    if (config.start.range_lo > config.start.range_hi) {
      throw ConfigError("starting-balance range is empty");
    }
    init_a = static_cast<int>(
        setup_rng.uniform_int(config.start.range_lo, config.start.range_hi));
  }
  if (init_a < 1 || init_a > config.n_start - 1) {
    throw ConfigError("starting category-A count " + std::to_string(init_a) +
                      " must leave both categories non-empty at n_start " +
                      std::to_string(config.n_start));
  }
  MetadataDataset train_set =
      carve(pool, init_a, config.n_start - init_a, setup_rng);
  pool = remove_ids(pool, point_ids(train_set));

  AcquisitionTrace trace;
  trace.policy = policy_name(config.policy);
  for (int t = 0;; ++t) {
    const auto t0 = std::chrono::steady_clock::now();
    TraceRow row;
    row.step = t;
    row.n = static_cast<std::int64_t>(train_set.size());
    row.n_a_total = train_set.n_a();
    row.n_b_total = train_set.n_b();
    row.prop_a = static_cast<double>(row.n_a_total) / static_cast<double>(row.n);

    if (learner.kind == LearnerKind::Oracle) {
      row.oos_score = oracle_mean(static_cast<double>(row.n_a_total),
                                  static_cast<double>(row.n_b_total));
    } else {
      Rng eval_rng(mix_seed(mix_seed(seed, "campaign-eval"),
                            static_cast<std::uint64_t>(t)));
      const TrainedModel model = train(learner, train_set, eval_rng);
      row.oos_score = evaluate(model, holdout_set, config.metric);
    }

    const auto done = [&](const std::string& reason) {
      trace.termination = reason;
      row.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
              .count();
      trace.rows.push_back(row);
    };
    if (t == steps) {
      done("completed");
      break;
    }
    if (static_cast<std::int64_t>(pool.size()) < config.step) {
      done("pool_exhausted");
      break;
    }
    if ((config.policy.kind == PolicyKind::AllA &&
         pool.n_a() < config.step) ||
        (config.policy.kind == PolicyKind::AllB &&
         pool.n_b() < config.step)) {
      done("category_exhausted");
      break;
    }

    PolicyState st;
    st.n_a = row.n_a_total;
    st.n_b = row.n_b_total;
    st.n = config.step;
    st.pool_a = pool.n_a();
    st.pool_b = pool.n_b();
    st.q = config.q;
    st.gp = &config.gp;
    ExperimentData experiment;
    if (config.policy.kind == PolicyKind::GPAML) {
      experiment = run_balance_experiment(
          train_set, learner, config.design,
          mix_seed(mix_seed(seed, "campaign-experiment"),
                   static_cast<std::uint64_t>(t)),
          jobs);
      st.experiment = &experiment;
    }
    Rng step_rng(mix_seed(mix_seed(seed, "campaign-step"),
                          static_cast<std::uint64_t>(t)));
    const PolicyChoice choice = apply_policy(config.policy, st, step_rng);
    row.has_choice = true;
    row.chosen_n_a = choice.n_a;
    row.chosen_n_b = choice.n_b;
    row.clamped = choice.clamped;

    const MetadataDataset acquired =
        carve(pool, choice.n_a, choice.n_b, step_rng);
    train_set = concat(train_set, acquired);
    pool = remove_ids(pool, point_ids(acquired));

    row.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    trace.rows.push_back(row);
  }
  return trace;
}

SuitabilityResult metadata_suitability_check(const MetadataDataset& data,
                                             const LearnerSpec& learner,
                                             const SuitabilityConfig& config,
                                             std::uint64_t seed) {
  if (config.reps < 1) throw ConfigError("suitability.reps must be at least 1");
  if (config.major < 1 || config.minor < 1) {
    throw ConfigError("suitability train split needs positive counts");
  }
  SuitabilityResult result;
  for (int rep = 1; rep <= config.reps; ++rep) {
    for (const Category cat : {Category::A, Category::B}) {
      Rng rng(mix_seed(mix_seed(mix_seed(seed, "suitability"),
                                static_cast<std::uint64_t>(rep)),
                       cat == Category::A ? 0u : 1u));
      const std::int64_t major_a = cat == Category::A ? config.major : config.minor;
      const std::int64_t major_b = cat == Category::A ? config.minor : config.major;
      double score = 0.0;
      if (learner.kind == LearnerKind::Oracle) {
        score = oracle_accuracy(static_cast<double>(major_a),
                                static_cast<double>(major_b),
                                learner.noise_sd, rng);
      } else {
        const auto [h_a, h_b] = holdout_counts(config.holdout, data.p0_a());
        const MetadataDataset hold = carve(data, h_a, h_b, rng);
        const MetadataDataset rest = remove_ids(data, point_ids(hold));
        const MetadataDataset train_set = carve(rest, major_a, major_b, rng);
        const TrainedModel model = train(learner, train_set, rng);
        score = evaluate(model, hold, config.metric);
      }
      (cat == Category::A ? result.scores_a : result.scores_b).push_back(score);
    }
  }
  const auto mean = [](const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) /
           static_cast<double>(v.size());
  };
  result.mean_a = mean(result.scores_a);
  result.mean_b = mean(result.scores_b);
  result.mean_diff = result.mean_a - result.mean_b;
  return result;
}

GoodDecision parse_good_decision(const std::string& text) {
  if (text == "majority-a") return {GoodDecision::Kind::MajorityA, 0, 0};
  if (text == "majority-b") return {GoodDecision::Kind::MajorityB, 0, 0};
  if (text.rfind("near:", 0) == 0) {
    const auto rest = text.substr(5);
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
      try {
        const int target = std::stoi(rest.substr(0, colon));
        const int tol = std::stoi(rest.substr(colon + 1));
        if (tol >= 0) return {GoodDecision::Kind::NearTarget, target, tol};
      } catch (const std::exception&) {
      }
    }
  }
  throw ConfigError("unknown good-decision rule '" + text +
                    "' (expected majority-a, majority-b or near:TARGET:TOL)");
}

std::string good_decision_name(const GoodDecision& good) {
  switch (good.kind) {
    case GoodDecision::Kind::MajorityA: return "majority-a";
    case GoodDecision::Kind::MajorityB: return "majority-b";
    case GoodDecision::Kind::NearTarget:
      return "near:" + std::to_string(good.target) + ":" +
             std::to_string(good.tolerance);
  }
  return "unknown";
}

namespace {

bool is_good(const GoodDecision& good, int n_a, int n_b) {
  switch (good.kind) {
    case GoodDecision::Kind::MajorityA: return n_a > n_b;
    case GoodDecision::Kind::MajorityB: return n_b > n_a;
    case GoodDecision::Kind::NearTarget:
      return std::abs(n_a - good.target) <= good.tolerance;
  }
  return false;
}

}  // namespace

RobustnessReport subsample_robustness_study(const MetadataDataset& data,
                                            const LearnerSpec& learner,
                                            const RobustnessConfig& config,
                                            std::uint64_t seed, int jobs) {
  if (config.sizes.empty()) throw ConfigError("robustness.sizes is empty");
  for (const int s : config.sizes) {
    if (s < 1 || s > config.b_total) {
      throw ConfigError("robustness subset size " + std::to_string(s) +
                        " outside [1, b_total=" +
                        std::to_string(config.b_total) + "]");
    }
  }
  if (config.reps < 1) throw ConfigError("robustness.reps must be at least 1");

  BalanceDesign design;
  design.b = config.b_total;
  design.z = config.z;
  design.metric = config.metric;
  RobustnessReport report;
  report.experiment = run_balance_experiment(
      data, learner, design, mix_seed(seed, "robustness-experiment"), jobs);

  const int n_a = static_cast<int>(data.n_a());
  const int n_b = static_cast<int>(data.n_b());
  const int z = config.z;
  for (std::size_t si = 0; si < config.sizes.size(); ++si) {
    const int size = config.sizes[si];
    int good_count = 0;
    for (int rep = 1; rep <= config.reps; ++rep) {
      Rng rng(mix_seed(mix_seed(mix_seed(seed, "robustness-subset"),
                                static_cast<std::uint64_t>(si)),
                       static_cast<std::uint64_t>(rep)));
      auto picked = rng.sample_without_replacement(
          static_cast<std::size_t>(config.b_total),
          static_cast<std::size_t>(size));
      std::sort(picked.begin(), picked.end());

      ExperimentData subset;
      subset.bound_a = report.experiment.bound_a;
      subset.bound_b = report.experiment.bound_b;
      subset.provenance = report.experiment.provenance;
      subset.provenance.b = size;
      for (const auto block : picked) {
        for (int k = 0; k < z; ++k) {
          subset.observations.push_back(
              report.experiment.observations[block * static_cast<std::size_t>(z) +
                                             static_cast<std::size_t>(k)]);
        }
      }
      const AcquisitionDecision decision =
          gpaml_step(subset, n_a, n_b, config.n, config.q, config.gp);
      const bool good = is_good(config.good, decision.n_a, decision.n_b);
      good_count += good ? 1 : 0;
      report.rows.push_back({size, rep, decision.n_a, decision.n_b, good});
    }
    report.good_fraction.push_back(static_cast<double>(good_count) /
                                   static_cast<double>(config.reps));
  }
  return report;
}

void write_trace_csv(const AcquisitionTrace& trace,
                     const std::filesystem::path& path) {
  CsvWriter w(path);
  w.row({"step", "N", "n_a_total", "n_b_total", "prop_a", "chosen_n_a",
         "chosen_n_b", "policy", "oos_score", "clamped"});
  for (const auto& r : trace.rows) {
    w.row({std::to_string(r.step), std::to_string(r.n),
           std::to_string(r.n_a_total), std::to_string(r.n_b_total),
           format_double(r.prop_a),
           r.has_choice ? std::to_string(r.chosen_n_a) : "",
           r.has_choice ? std::to_string(r.chosen_n_b) : "", trace.policy,
           format_double(r.oos_score), r.clamped ? "1" : "0"});
  }
  w.close();
}

void write_suitability_csv(const SuitabilityResult& result,
                           const std::filesystem::path& path) {
  CsvWriter w(path);
  w.row({"rep", "category", "score"});
  for (std::size_t i = 0; i < result.scores_a.size(); ++i) {
    w.row({std::to_string(i + 1), "A", format_double(result.scores_a[i])});
    w.row({std::to_string(i + 1), "B", format_double(result.scores_b[i])});
  }
  w.close();
}

void write_robustness_csv(const RobustnessReport& report,
                          const std::filesystem::path& path) {
  CsvWriter w(path);
  w.row({"size", "rep", "n_a", "n_b", "good"});
  for (const auto& r : report.rows) {
    w.row({std::to_string(r.size), std::to_string(r.rep),
           std::to_string(r.n_a), std::to_string(r.n_b), r.good ? "1" : "0"});
  }
  w.close();
}

}  // namespace gpaml
