#include <cstdint>
#include <string>

#include <CLI11.hpp>

#include "gpaml/commands.hpp"
#include "gpaml/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "gpaml: measures how a learner's accuracy responds to the metadata "
      "balance of its training data and picks the next acquisition batch"};
  app.set_version_flag("--version", std::string("gpaml ") + gpaml::kToolVersion);
  app.require_subcommand(1);

  gpaml::CommandOptions opts;
  std::string config_path, out_dir, observations_path;
  std::uint64_t seed = 0;
  int exit_code = 0;

  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Config file (key = value lines)")
        ->required();
    sub->add_option("--out", out_dir, "Output directory (created if absent)")
        ->required();
    CLI::Option* seed_opt =
        sub->add_option("--seed", seed, "Master seed, overrides the config");
    sub->add_option("--jobs", opts.jobs, "Worker threads for learner runs")
        ->check(CLI::PositiveNumber);
    return seed_opt;
  };
  const auto finish = [&](CLI::Option* seed_opt) {
    opts.config_path = config_path;
    opts.out_dir = out_dir;
    opts.observations = observations_path;
    if (seed_opt->count() > 0) opts.seed_override = seed;
  };

  {
    CLI::App* sub = app.add_subcommand(
        "balance-experiment",
        "Run the blocked balance experiment and write observations.csv");
    CLI::Option* seed_opt = add_common(sub);
    sub->callback([&, seed_opt] {
      finish(seed_opt);
      exit_code = gpaml::cmd_balance_experiment(opts);
    });
  }
  {
    CLI::App* sub = app.add_subcommand(
        "decide",
        "Fit the surrogate to an observations file and choose the next batch");
    CLI::Option* seed_opt = add_common(sub);
    sub->add_option("--observations", observations_path,
                    "observations.csv from balance-experiment")
        ->required();
    sub->callback([&, seed_opt] {
      finish(seed_opt);
      exit_code = gpaml::cmd_decide(opts);
    });
  }
  {
    CLI::App* sub = app.add_subcommand(
        "campaign", "Run a multi-step acquisition campaign and write trace.csv");
    CLI::Option* seed_opt = add_common(sub);
    sub->callback([&, seed_opt] {
      finish(seed_opt);
      exit_code = gpaml::cmd_campaign(opts);
    });
  }
  {
    CLI::App* sub = app.add_subcommand(
        "suitability",
        "Check whether the metadata split matters for the learner");
    CLI::Option* seed_opt = add_common(sub);
    sub->callback([&, seed_opt] {
      finish(seed_opt);
      exit_code = gpaml::cmd_suitability(opts);
    });
  }
  {
    CLI::App* sub = app.add_subcommand(
        "robustness",
        "Measure decision stability under subsampled experiments");
    CLI::Option* seed_opt = add_common(sub);
    sub->callback([&, seed_opt] {
      finish(seed_opt);
      exit_code = gpaml::cmd_robustness(opts);
    });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;  // bad usage is a configuration error
  }
  return exit_code;
}
