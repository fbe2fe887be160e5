#pragma once

// Run-log files and the artifacts derived from them.

#include <filesystem>
#include <string>
#include <vector>

#include "snntrain/experiment.hpp"
#include "snntrain/trainer.hpp"

namespace snntrain::report {

using experiment::Json;

/// The seed is recorded next to the config so every output names it.
Json run_log_to_json(const trainer::RunLog& log, std::uint64_t seed);
/// Throws ValidationError listing missing or mistyped fields.
trainer::RunLog run_log_from_json(const Json& j);

trainer::RunLog read_run_log(const std::filesystem::path& path);

/// Writes `text` to `path`, creating parent directories. Throws
/// std::runtime_error on I/O failure.
void write_file(const std::filesystem::path& path, const std::string& text);

/// `run.json` and `run.csv` inside `dir`.
void write_run(const std::filesystem::path& dir, const trainer::RunLog& log, std::uint64_t seed);

/// Rows for each candidate against `baseline`, in the given order.
std::vector<trainer::SpeedupRow> speedup_rows(const std::vector<trainer::RunLog>& candidates,
                                              const trainer::RunLog& baseline);

/// Emission rows for the baseline (full length and truncated at its first
/// stable epoch) followed by each candidate's run up to its stop. Reductions
/// are measured against the full-length baseline.
std::vector<carbon::EmissionRow> emission_rows(const std::vector<trainer::RunLog>& candidates,
                                               const trainer::RunLog& baseline, const carbon::PowerProfile& power);

struct SweepSummaryRow {
  double lr = 0.0;
  double final_test_accuracy = 0.0;
  double best_test_accuracy = 0.0;
  std::optional<int> first_stable_epoch;
  bool effective = false;
};

/// A rate is ineffective when its final test accuracy is more than `margin`
/// points below the best final accuracy of the sweep.
std::vector<SweepSummaryRow> summarize_sweep(const std::vector<trainer::RunLog>& runs, double margin);
/// `lr,final_test_accuracy,best_test_accuracy,first_stable_epoch,effective`
std::string sweep_summary_csv(const std::vector<SweepSummaryRow>& rows);
/// `epoch,<lr>...` with one test-accuracy column per run; blank past a run's end.
std::string sweep_curves_csv(const std::vector<trainer::RunLog>& runs);

}  // namespace snntrain::report
