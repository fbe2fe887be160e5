#pragma once

// Epoch-indexed learning-rate policies.
//
// Every policy is a pure function of (config, epoch) with 1-based epochs. The
// modular arithmetic at cycle boundaries follows the usual "ep % interval"
// formulation, so e.g. a decreasing step with interval 20 first reduces the
// rate at epoch 20, and a cyclical policy with half-cycle 25 sits at its
// minimum at epoch 50.

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace snntrain::schedule {

struct DecreasingStep {
  double factor = 0.5;  // multiplicative reduction per interval
  int interval = 20;
};

struct ExponentialDecay {
  double rate = 0.98;
  int steps = 1;
};

struct OneCycle {
  int peak_epoch = 90;
  int drop_epoch = 180;
  double start_lr = 1e-5;
  double max_lr = 1e-2;
  double min_lr = 1e-5;
  double end_lr = 1e-8;
};

struct Cyclical {
  double min_lr = 1e-5;
  double max_lr = 1e-2;
  int half_cycle = 25;
};

enum class MaxDecay { Linear, Multiplicative };

struct DecreasingCyclical {
  double min_lr = 1e-5;
  double max_lr = 1e-2;
  int cycle_length = 40;
  MaxDecay decay = MaxDecay::Linear;
  double multiplicative_factor = 0.9;  // only read in Multiplicative mode
};

struct EqualCycles {
  int peaks = 4;
};

struct Geometric {
  int first_period = 4;
  int period_multiplier = 2;
};

enum class RestartFormula {
  // Cosine amplitude is (max - min) every cycle; each cycle restarts at max.
  Standard,
  // Cosine multiplies the previous epoch's rate, compounding across epochs.
  Literal,
};

struct WarmRestarts {
  double min_lr = 1e-5;
  double max_lr = 1e-2;
  std::variant<EqualCycles, Geometric> cycles = EqualCycles{};
  RestartFormula formula = RestartFormula::Standard;
};

enum class PolicyKind {
  DecreasingStep,
  ExponentialDecay,
  OneCycle,
  Cyclical,
  DecreasingCyclical,
  WarmRestarts,
};

using PolicyParams =
    std::variant<DecreasingStep, ExponentialDecay, OneCycle, Cyclical, DecreasingCyclical, WarmRestarts>;

struct PolicyConfig {
  double init_lr = 1e-3;
  int epochs = 200;
  PolicyParams params = DecreasingStep{};

  PolicyKind kind() const noexcept { return static_cast<PolicyKind>(params.index()); }
};

std::string_view kind_name(PolicyKind kind) noexcept;
/// Accepts the canonical CamelCase name or its kebab-case form ("one-cycle").
PolicyKind parse_kind(std::string_view name);

/// Every violated invariant, empty when valid.
std::vector<std::string> validate(const PolicyConfig& cfg);
/// Throws ValidationError listing every violation.
void require_valid(const PolicyConfig& cfg);

// Per-policy rates. `ep` must lie in [1, cfg.epochs]; ArgumentError otherwise.
double lr_decreasing_step(const PolicyConfig& cfg, const DecreasingStep& p, int ep);
double lr_exponential_decay(const PolicyConfig& cfg, const ExponentialDecay& p, int ep);
double lr_one_cycle(const PolicyConfig& cfg, const OneCycle& p, int ep);
double lr_cyclical(const PolicyConfig& cfg, const Cyclical& p, int ep);
double lr_decreasing_cyclical(const PolicyConfig& cfg, const DecreasingCyclical& p, int ep);
double lr_warm_restarts(const PolicyConfig& cfg, const WarmRestarts& p, int ep);

/// Dispatches on cfg.params.
double learning_rate(const PolicyConfig& cfg, int ep);

/// Epochs (1-based, in range) at which a warm-restart cycle begins, i.e. the
/// cosine phase is zero. Excludes the implicit cycle starting at epoch 0.
std::vector<int> restart_epochs(const PolicyConfig& cfg, const WarmRestarts& p);

/// Materialized rate per epoch.
class ScheduleTrace {
 public:
  explicit ScheduleTrace(std::vector<double> lr_by_epoch) : lr_(std::move(lr_by_epoch)) {}

  int epochs() const noexcept { return static_cast<int>(lr_.size()); }
  /// 1-based.
  double at(int ep) const;
  const std::vector<double>& values() const noexcept { return lr_; }

  /// `epoch,lr` CSV, 17 significant digits.
  std::string to_csv() const;

 private:
  std::vector<double> lr_;
};

ScheduleTrace build_schedule(const PolicyConfig& cfg);

/// Closed interval every value of a valid config's trace lies within.
struct RateBounds {
  double lo;
  double hi;
};
RateBounds rate_bounds(const PolicyConfig& cfg);

/// One row of the exploration grid.
struct GridEntry {
  std::string label;
  PolicyConfig policy;
  int batch_size;
  double v_th;
};

/// The twelve exploration settings: six warm-restart peak counts and six
/// exponential-decay batch/threshold combinations, all at init_lr 1e-2 over
/// `epochs` epochs.
std::vector<GridEntry> exploration_grid(int epochs = 200);

/// Decreasing step at init_lr 1e-3, B=40, V_th=0.4. Comparison baseline.
GridEntry baseline_entry(int epochs = 200);

// Named presets with the default parameters from the reference pseudocode.
PolicyConfig preset(PolicyKind kind, int epochs = 200);
/// One-cycle variant peaking at epoch 100 instead of 90.
PolicyConfig one_cycle_peak100_preset(int epochs = 200);

}  // namespace snntrain::schedule
