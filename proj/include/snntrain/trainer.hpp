#pragma once

// Epoch loop, stability-based early termination, and comparison reports.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "snntrain/carbon.hpp"
#include "snntrain/events.hpp"
#include "snntrain/schedule.hpp"
#include "snntrain/snn.hpp"

namespace snntrain::trainer {

/// Training counts as stable once the population standard deviation of the
/// last `window` accuracies (in percentage points) is at most `acc_th`.
struct StabilityCriterion {
  int window = 10;
  double acc_th = 1.0;
};

enum class AccuracySource { Test, Train };

enum class ClockKind {
  Wall,
  // Every epoch is charged a fixed duration, making timing columns
  // reproducible across runs.
  Nominal,
};

struct TrainConfig {
  schedule::PolicyConfig policy;
  int batch_size = 40;
  double v_th = 0.4;
  int epochs = 200;
  std::uint64_t seed = 1;
  StabilityCriterion stability;
  bool early_stop = true;
  AccuracySource stability_source = AccuracySource::Test;
  events::AccumulationMode accumulation = events::AccumulationMode::Binary;
  int threads = 1;
  ClockKind clock = ClockKind::Wall;
  double nominal_epoch_seconds = 1.0;
};

std::vector<std::string> validate(const TrainConfig& cfg);

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double train_accuracy = 0.0;  // percent
  double test_accuracy = 0.0;   // percent
  double train_loss = 0.0;      // mean rate-MSE over the epoch
  double wall_time_s = 0.0;
  bool stable_so_far = false;
};

struct RunLog {
  std::string label;
  TrainConfig config;
  std::vector<EpochRecord> records;
  std::optional<int> first_stable_epoch;
  std::optional<double> accuracy_at_stability;
  double total_wall_time_s = 0.0;
  bool aborted = false;
  std::string abort_reason;
  std::optional<carbon::EmissionReport> emission;

  /// Seconds spent up to and including `epoch`.
  double time_through(int epoch) const;
};

/// False for sequences shorter than the window.
bool stability_check(std::span<const double> accuracies, const StabilityCriterion& crit);

std::optional<int> first_stable_epoch(std::span<const EpochRecord> records, const StabilityCriterion& crit,
                                      AccuracySource source = AccuracySource::Test);

/// Percent of samples whose predicted class matches the label. Does not
/// modify the network.
double evaluate_accuracy(const snn::Network& net, std::span<const events::FrameTensor> frames,
                         std::span<const std::uint8_t> labels);

struct FrameSet {
  std::vector<events::FrameTensor> frames;
  std::vector<std::uint8_t> labels;
};

FrameSet make_frames(std::span<const events::EventSample> samples, int timesteps, events::AccumulationMode mode);

struct TrainingResult {
  RunLog log;
  snn::Network network;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Throws ArgumentError/ValidationError for invalid inputs. A non-finite
/// loss or weight stops the run and is reported through RunLog::aborted.
TrainingResult train_network(const TrainConfig& cfg, const snn::NetworkSpec& spec, const events::Split& data,
                             const EpochCallback& on_epoch = {});

RunLog run_training(const TrainConfig& cfg, const snn::NetworkSpec& spec, const events::Split& data);

struct SpeedupRow {
  std::string label;
  std::optional<int> first_stable_epoch;
  std::optional<double> accuracy_at_stability;
  std::optional<double> speedup_full;    // baseline epochs run / candidate first stable
  std::optional<double> speedup_stable;  // baseline first stable / candidate first stable
  int epochs_run = 0;
  double final_test_accuracy = 0.0;

  bool stable() const noexcept { return first_stable_epoch.has_value(); }
};

/// Throws ArgumentError when either log has no records.
SpeedupRow speedup_report(const RunLog& candidate, const RunLog& baseline);

/// Ratio printed to one decimal with an "x" suffix, e.g. "10.5x".
std::string format_speedup(double ratio);

/// Columns: label, first stable epoch, accuracy at first stable epoch,
/// speedup vs full baseline training, speedup vs baseline first stability,
/// then epochs run and final test accuracy.
std::string report_csv(std::span<const SpeedupRow> rows);
std::string report_text(std::span<const SpeedupRow> rows, const std::string& baseline_label);

struct GridOutcome {
  std::string label;
  std::optional<RunLog> log;
  std::string error;  // set when the run threw
};

/// One run per grid entry with `base` supplying everything the entry does
/// not override (policy, batch size, threshold). Runs `jobs` entries at a
/// time; results keep grid order and do not depend on `jobs`.
std::vector<GridOutcome> explore_grid(std::span<const schedule::GridEntry> grid, const TrainConfig& base,
                                      const snn::NetworkSpec& spec, const events::Split& data, int jobs = 1);

/// `base` with the entry's policy, batch size and threshold applied.
TrainConfig apply_entry(const TrainConfig& base, const schedule::GridEntry& entry);

/// `epoch,lr,train_acc,test_acc,wall_s,stable`
std::string run_csv(const RunLog& log);

}  // namespace snntrain::trainer
