#include "gpaml/commands.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "gpaml/acquisition.hpp"
#include "gpaml/balance_experiment.hpp"
#include "gpaml/config.hpp"
#include "gpaml/conic.hpp"
#include "gpaml/csv.hpp"
#include "gpaml/dataset.hpp"
#include "gpaml/error.hpp"
#include "gpaml/learner.hpp"
#include "gpaml/version.hpp"

namespace gpaml {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format_seconds(double s) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", s);
  return buf;
}

Metric metric_from(const Config& cfg) {
  return parse_metric(cfg.get_string("metric", "ccr"));
}

LearnerSpec learner_from(const Config& cfg) {
  LearnerSpec spec;
  const std::string kind = cfg.get_string("learner.kind", "forest");
  if (kind == "oracle") {
    spec.kind = LearnerKind::Oracle;
  } else if (kind == "forest") {
    spec.kind = LearnerKind::Forest;
  } else {
    throw ConfigError("learner.kind must be forest or oracle, got '" + kind +
                      "'");
  }
  spec.noise_sd = cfg.get_double("learner.noise_sd", 0.05);
  if (spec.noise_sd < 0.0) throw ConfigError("learner.noise_sd must be >= 0");
  spec.forest.tree_count =
      static_cast<int>(cfg.get_int("learner.forest.trees", 100));
  spec.forest.max_depth =
      static_cast<int>(cfg.get_int("learner.forest.max_depth", 0));
  spec.forest.min_leaf =
      static_cast<int>(cfg.get_int("learner.forest.min_leaf", 1));
  spec.forest.feature_subset_size =
      static_cast<int>(cfg.get_int("learner.forest.mtry", 0));
  if (spec.forest.tree_count < 1) {
    throw ConfigError("learner.forest.trees must be at least 1");
  }
  if (spec.forest.max_depth < 0 || spec.forest.min_leaf < 1 ||
      spec.forest.feature_subset_size < 0) {
    throw ConfigError("invalid forest parameters");
  }
  return spec;
}

std::optional<double> p0_from(const Config& cfg) {
  if (!cfg.has("p0.a")) return {};
  const double p = cfg.get_double("p0.a", 0.5);
  if (p < 0.0 || p > 1.0) throw ConfigError("p0.a must lie in [0,1]");
  return p;
}

MetadataDataset dataset_from(const Config& cfg, std::uint64_t seed) {
  const bool has_path = cfg.has("dataset.path");
  const bool has_counts =
      cfg.has("dataset.counts.a") || cfg.has("dataset.counts.b");
  const bool has_synth = cfg.has("dataset.synthetic.n_per_category");
  if (static_cast<int>(has_path) + static_cast<int>(has_counts) +
          static_cast<int>(has_synth) !=
      1) {
    throw ConfigError(
        "configure exactly one of dataset.path, dataset.counts.*, "
        "dataset.synthetic.*");
  }
  const std::optional<double> p0 = p0_from(cfg);
  if (has_path) {
    const std::string path = cfg.require_string("dataset.path");
    const std::string format = cfg.get_string("dataset.format", "labeled");
    if (format == "spambase") return load_spambase(path, p0);
    if (format == "labeled") {
      CsvSchema schema;
      schema.label_column = "label";
      schema.rule = CsvSchema::Rule::Column;
      schema.rule_arg = "category";
      schema.p0_a = p0;
      return load_csv(path, schema, true);
    }
    throw ConfigError("dataset.format must be labeled or spambase, got '" +
                      format + "'");
  }
  if (has_counts) {
    const std::int64_t a = cfg.require_int("dataset.counts.a");
    const std::int64_t b = cfg.require_int("dataset.counts.b");
    if (a < 0 || b < 0 || a + b < 1) {
      throw ConfigError("dataset.counts.* must be non-negative and non-empty");
    }
    const double p =
        p0 ? *p0 : static_cast<double>(a) / static_cast<double>(a + b);
    return counts_only_dataset(a, b, p);
  }
  const std::int64_t npc = cfg.require_int("dataset.synthetic.n_per_category");
  if (npc < 1) {
    throw ConfigError("dataset.synthetic.n_per_category must be at least 1");
  }
  const double sep = cfg.get_double("dataset.synthetic.separation", 2.0);
  Rng rng(mix_seed(seed, "dataset"));
  MetadataDataset ds = synthetic_classification(npc, sep, rng);
  return p0 ? with_p0(ds, *p0) : ds;
}

BalanceDesign design_from(const Config& cfg, Metric metric) {
  BalanceDesign d;
  d.b = static_cast<int>(cfg.get_int("experiment.b", 100));
  d.z = static_cast<int>(cfg.get_int("experiment.z", 10));
  d.metric = metric;
  d.record_membership = cfg.get_bool("experiment.record_membership", false);
  d.random_test_proportion =
      cfg.get_bool("experiment.random_test_proportion", false);
  if (d.b < 1 || d.z < 1) {
    throw ConfigError("experiment.b and experiment.z must be at least 1");
  }
  return d;
}

GpFitOptions gp_from(const Config& cfg) {
  GpFitOptions o;
  o.starts = static_cast<int>(cfg.get_int("gp.starts", 5));
  o.max_evals_per_start = static_cast<int>(cfg.get_int("gp.max_evals", 80));
  if (o.starts < 1 || o.max_evals_per_start < 1) {
    throw ConfigError("gp.starts and gp.max_evals must be at least 1");
  }
  return o;
}

StartingBalance start_balance_from(const Config& cfg) {
  const std::string text =
      cfg.get_string("campaign.start_balance", "uniform:20:80");
  StartingBalance sb;
  if (text.rfind("fixed:", 0) == 0) {
    sb.kind = StartingBalance::Kind::Fixed;
    try {
      sb.fixed_a = std::stoi(text.substr(6));
    } catch (const std::exception&) {
      throw ConfigError("bad campaign.start_balance '" + text + "'");
    }
    return sb;
  }
  if (text.rfind("uniform:", 0) == 0) {
    const auto rest = text.substr(8);
    const auto colon = rest.find(':');
    if (colon != std::string::npos) {
      try {
        sb.kind = StartingBalance::Kind::UniformRange;
        sb.range_lo = std::stoi(rest.substr(0, colon));
        sb.range_hi = std::stoi(rest.substr(colon + 1));
        return sb;
      } catch (const std::exception&) {
      }
    }
  }
  throw ConfigError("campaign.start_balance must be fixed:A or uniform:LO:HI, "
                    "got '" + text + "'");
}

void write_manifest(const CommandOptions& opts, const std::string& command,
                    const Config& cfg,
                    const std::vector<std::string>& outputs) {
  const auto path = opts.out_dir / "manifest.txt";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << "# gpaml " << kToolVersion << " manifest\n";
  out << "# command: " << command << "\n";
  for (const auto& [key, value] : cfg.resolved()) {
    out << key << " = " << value << "\n";
  }
  for (const auto& name : outputs) {
    out << "# digest " << name << " " << file_digest_hex(opts.out_dir / name)
        << "\n";
  }
  out.flush();
  if (!out) throw DataError("failed writing " + path.string());
}

void write_summary(const CommandOptions& opts,
                   const std::vector<std::string>& lines) {
  const auto path = opts.out_dir / "summary.txt";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& line : lines) out << line << "\n";
  out.flush();
  if (!out) throw DataError("failed writing " + path.string());
}

void write_gp_report_csv(const GpFitReport& report,
                         const std::filesystem::path& path) {
  CsvWriter w(path);
  w.row({"start", "theta0", "g0", "theta", "g", "loglik", "tau2", "chosen"});
  for (std::size_t i = 0; i < report.size(); ++i) {
    const auto& r = report[i];
    w.row({std::to_string(i + 1), format_double(r.theta0), format_double(r.g0),
           format_double(r.theta), format_double(r.g), format_double(r.loglik),
           format_double(r.tau2), r.chosen ? "1" : "0"});
  }
  w.close();
}

int run_guarded(const std::string& command, const CommandOptions& opts,
                const std::function<void(Config&)>& body) {
  try {
    Config cfg = Config::load(opts.config_path);
    if (opts.seed_override) {
      cfg.set("seed", std::to_string(*opts.seed_override));
    }
    if (opts.jobs < 1) throw ConfigError("--jobs must be at least 1");
    std::filesystem::create_directories(opts.out_dir);
    body(cfg);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "gpaml " << command << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "gpaml " << command << ": " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int cmd_balance_experiment(const CommandOptions& opts) {
  return run_guarded("balance-experiment", opts, [&](Config& cfg) {
    const auto t0 = Clock::now();
    const std::uint64_t seed = cfg.get_seed();
    const Metric metric = metric_from(cfg);
    const LearnerSpec learner = learner_from(cfg);
    const BalanceDesign design = design_from(cfg, metric);
    const MetadataDataset data = dataset_from(cfg, seed);
    const ExperimentData experiment =
        run_balance_experiment(data, learner, design, seed, opts.jobs);
    write_observations_csv(experiment, opts.out_dir / "observations.csv");
    write_manifest(opts, "balance-experiment", cfg, {"observations.csv"});
    std::size_t invalid = 0;
    for (const auto& o : experiment.observations) {
      if (!o.valid) ++invalid;
    }
    write_summary(
        opts,
        {"command: balance-experiment",
         "runs: " + std::to_string(experiment.observations.size()),
         "invalid_runs: " + std::to_string(invalid),
         "bounds: (" + std::to_string(experiment.bound_a) + ", " +
             std::to_string(experiment.bound_b) + ")",
         "elapsed_seconds: " + format_seconds(seconds_since(t0))});
  });
}

int cmd_decide(const CommandOptions& opts) {
  return run_guarded("decide", opts, [&](Config& cfg) {
    const auto t0 = Clock::now();
    cfg.get_seed();  // recorded for provenance; the decision is deterministic
    const std::int64_t n_a = cfg.require_int("state.n_a");
    const std::int64_t n_b = cfg.require_int("state.n_b");
    if (n_a < 1 || n_b < 1) {
      throw ConfigError("state.n_a and state.n_b must be at least 1");
    }
    const int n = static_cast<int>(cfg.get_int("acquire.n", 20));
    const int q = static_cast<int>(cfg.get_int("experiment.q", 100));
    const double p0 = cfg.get_double("p0.a", 0.5);
    if (p0 < 0.0 || p0 > 1.0) throw ConfigError("p0.a must lie in [0,1]");

    ExperimentData data;
    data.observations = read_observations_csv(opts.observations);
    const std::int64_t total = n_a + n_b;
    const auto [t_a, t_b] = test_set_counts(total, p0, 1.0 - p0);
    data.bound_a = static_cast<int>(n_a - t_a);
    data.bound_b = static_cast<int>(n_b - t_b);
    if (data.bound_a < 1 || data.bound_b < 1) {
      throw ConfigError("state too small: sampling bounds are empty");
    }
    data.provenance = {total, n_a, n_b, p0, 0, 0, 0};

    const AcquisitionDecision decision =
        gpaml_step(data, static_cast<int>(n_a), static_cast<int>(n_b), n, q,
                   gp_from(cfg));
    write_decision_csv(decision, opts.out_dir / "decision.csv");
    write_cone_csv(decision, opts.out_dir / "cone.csv");
    write_gp_report_csv(decision.gp_report, opts.out_dir / "gp_fit.csv");
    write_manifest(opts, "decide", cfg,
                   {"decision.csv", "cone.csv", "gp_fit.csv"});
    write_summary(
        opts,
        {"command: decide",
         "observations: " + std::to_string(data.observations.size()),
         "chosen: (" + std::to_string(decision.n_a) + ", " +
             std::to_string(decision.n_b) + ") at row k=" +
             std::to_string(decision.argmax_k),
         "gp: theta=" + format_double(decision.gp_hyper.theta) +
             " g=" + format_double(decision.gp_hyper.g) +
             " tau2=" + format_double(decision.gp_hyper.tau2) +
             " jitter=" + format_double(decision.gp_jitter),
         "elapsed_seconds: " + format_seconds(seconds_since(t0))});
  });
}

int cmd_campaign(const CommandOptions& opts) {
  return run_guarded("campaign", opts, [&](Config& cfg) {
    const auto t0 = Clock::now();
    const std::uint64_t seed = cfg.get_seed();
    CampaignConfig cc;
    cc.metric = metric_from(cfg);
    cc.policy = parse_policy(cfg.get_string("campaign.policy", "gpaml"));
    cc.n_start = static_cast<int>(cfg.get_int("campaign.n_start", 100));
    cc.n_stop = static_cast<int>(cfg.get_int("campaign.n_stop", 500));
    cc.step = static_cast<int>(cfg.get_int("campaign.step", 20));
    cc.holdout = cfg.get_int("campaign.holdout", 1000);
    cc.start = start_balance_from(cfg);
    cc.design = design_from(cfg, cc.metric);
    cc.q = static_cast<int>(cfg.get_int("experiment.q", 100));
    cc.gp = gp_from(cfg);
    const LearnerSpec learner = learner_from(cfg);
    const MetadataDataset data = dataset_from(cfg, seed);

    const AcquisitionTrace trace =
        run_campaign(data, learner, cc, seed, opts.jobs);
    write_trace_csv(trace, opts.out_dir / "trace.csv");
    write_manifest(opts, "campaign", cfg, {"trace.csv"});
    const TraceRow& last = trace.rows.back();
    write_summary(
        opts,
        {"command: campaign", "policy: " + trace.policy,
         "termination: " + trace.termination,
         "steps: " + std::to_string(trace.rows.size()),
         "final_n: " + std::to_string(last.n),
         "final_prop_a: " + format_double(last.prop_a),
         "final_oos_score: " + format_double(last.oos_score),
         "elapsed_seconds: " + format_seconds(seconds_since(t0))});
  });
}

int cmd_suitability(const CommandOptions& opts) {
  return run_guarded("suitability", opts, [&](Config& cfg) {
    const auto t0 = Clock::now();
    const std::uint64_t seed = cfg.get_seed();
    SuitabilityConfig sc;
    sc.metric = metric_from(cfg);
    sc.reps = static_cast<int>(cfg.get_int("suitability.reps", 5));
    sc.major = static_cast<int>(cfg.get_int("suitability.major", 90));
    sc.minor = static_cast<int>(cfg.get_int("suitability.minor", 10));
    sc.holdout = cfg.get_int("suitability.holdout", 500);
    const LearnerSpec learner = learner_from(cfg);
    const MetadataDataset data = dataset_from(cfg, seed);

    const SuitabilityResult result =
        metadata_suitability_check(data, learner, sc, seed);
    write_suitability_csv(result, opts.out_dir / "suitability.csv");
    write_manifest(opts, "suitability", cfg, {"suitability.csv"});
    write_summary(opts,
                  {"command: suitability",
                   "reps: " + std::to_string(sc.reps),
                   "mean_score_a: " + format_double(result.mean_a),
                   "mean_score_b: " + format_double(result.mean_b),
                   "mean_diff: " + format_double(result.mean_diff),
                   "elapsed_seconds: " + format_seconds(seconds_since(t0))});
  });
}

int cmd_robustness(const CommandOptions& opts) {
  return run_guarded("robustness", opts, [&](Config& cfg) {
    const auto t0 = Clock::now();
    const std::uint64_t seed = cfg.get_seed();
    RobustnessConfig rc;
    rc.metric = metric_from(cfg);
    rc.b_total = static_cast<int>(cfg.get_int("robustness.b_total", 250));
    rc.sizes = cfg.get_int_list("robustness.sizes", {100, 150, 200});
    rc.reps = static_cast<int>(cfg.get_int("robustness.reps", 100));
    rc.z = static_cast<int>(cfg.get_int("experiment.z", 10));
    rc.n = static_cast<int>(cfg.get_int("acquire.n", 20));
    rc.q = static_cast<int>(cfg.get_int("experiment.q", 100));
    rc.good =
        parse_good_decision(cfg.get_string("robustness.good", "majority-a"));
    rc.gp = gp_from(cfg);
    const LearnerSpec learner = learner_from(cfg);
    const MetadataDataset data = dataset_from(cfg, seed);

    const RobustnessReport report =
        subsample_robustness_study(data, learner, rc, seed, opts.jobs);
    write_robustness_csv(report, opts.out_dir / "robustness.csv");
    write_observations_csv(report.experiment,
                           opts.out_dir / "observations.csv");
    write_manifest(opts, "robustness", cfg,
                   {"robustness.csv", "observations.csv"});
    std::vector<std::string> lines{
        "command: robustness",
        "good_rule: " + good_decision_name(rc.good)};
    for (std::size_t i = 0; i < rc.sizes.size(); ++i) {
      lines.push_back("good_fraction[size=" + std::to_string(rc.sizes[i]) +
                      "]: " + format_double(report.good_fraction[i]));
    }
    lines.push_back("elapsed_seconds: " + format_seconds(seconds_since(t0)));
    write_summary(opts, lines);
  });
}

}  // namespace gpaml
