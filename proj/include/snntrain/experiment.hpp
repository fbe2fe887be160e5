#pragma once

// Experiment configuration: one JSON document with `dataset`, `network`,
// `train`, `carbon` and `sweep` sections plus a top-level `seed` and
// `output_dir`. Every section and key is optional; omitted values take the
// defaults below. Unknown keys are rejected so typos do not pass silently.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "snntrain/carbon.hpp"
#include "snntrain/events.hpp"
#include "snntrain/snn.hpp"
#include "snntrain/trainer.hpp"

namespace snntrain::experiment {

using Json = nlohmann::ordered_json;

enum class DatasetSource { Synthetic, File };

struct DatasetConfig {
  DatasetSource source = DatasetSource::Synthetic;
  events::SyntheticParams synthetic;
  std::filesystem::path path;  // File source only
  double train_fraction = 0.8;
};

struct CarbonConfig {
  carbon::PowerProfile power{65.0, 10.0, 0.0, 0};
  carbon::AccountingMode mode = carbon::AccountingMode::Full;
};

struct SweepConfig {
  std::vector<double> learning_rates = {1e-6, 5e-6, 1e-5, 5e-5, 1e-2, 5e-2, 1e-1};
  // A rate is flagged ineffective when its final test accuracy trails the
  // best one by more than this many percentage points.
  double margin = 5.0;
};

struct ExperimentConfig {
  std::uint64_t seed = 7;
  DatasetConfig dataset;
  snn::NetworkSpec network;
  trainer::TrainConfig train;
  CarbonConfig carbon;
  SweepConfig sweep;
  std::filesystem::path output_dir;  // empty: use the default root
};

/// Desk-scale defaults: 250 synthetic 32x32 samples split 200/50, the default
/// network, and the exponential-decay setting at B=40, V_th=0.4 for 60 epochs.
/// Timing uses the nominal clock so reruns are byte-identical.
ExperimentConfig default_config();

/// Applies `path=value` overrides to a config document. The value is parsed
/// as JSON when possible (numbers, booleans, arrays) and taken as a string
/// otherwise. Intermediate objects are created as needed.
void apply_override(Json& doc, const std::string& assignment);

/// Parses and validates, reporting every problem in one ValidationError.
ExperimentConfig parse_config(const Json& doc);

/// Reads a file, applies overrides in order, then parses.
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides);

/// Complete, normalized document; parse_config(to_json(c)) reproduces c.
Json to_json(const ExperimentConfig& cfg);

// Section-level conversions, shared with run-log files.
Json policy_to_json(const schedule::PolicyConfig& p);
schedule::PolicyConfig policy_from_json(const Json& j, int default_epochs, std::vector<std::string>& errors,
                                        const std::string& where);
Json train_to_json(const trainer::TrainConfig& t);
Json network_to_json(const snn::NetworkSpec& n);

/// Environment variable naming the default output root.
inline constexpr const char* kOutputRootEnv = "SNNTRAIN_OUT";

/// --out when given, else the config's output_dir, else $SNNTRAIN_OUT, else
/// "snntrain-out".
std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg, const std::optional<std::filesystem::path>& cli_out);

/// Generates or loads the dataset and performs the seeded split.
events::Split load_dataset(const ExperimentConfig& cfg);

}  // namespace snntrain::experiment
