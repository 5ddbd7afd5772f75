#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>

namespace gpaml {

struct CommandOptions {
  std::filesystem::path config_path;
  std::filesystem::path out_dir;
  std::filesystem::path observations;  // decide only
  std::optional<std::uint64_t> seed_override;
  int jobs = 1;
};

// Each command loads the config, runs its study, and writes the documented
// CSVs plus manifest.txt and summary.txt into the output directory.
// Returns 0 on success, 1 on runtime errors, 2 on configuration errors.
int cmd_balance_experiment(const CommandOptions& opts);
int cmd_decide(const CommandOptions& opts);
int cmd_campaign(const CommandOptions& opts);
int cmd_suitability(const CommandOptions& opts);
int cmd_robustness(const CommandOptions& opts);

}  // namespace gpaml
