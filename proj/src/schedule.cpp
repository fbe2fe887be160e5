#include "snntrain/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "snntrain/error.hpp"

namespace snntrain::schedule {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_epoch(const PolicyConfig& cfg, int ep) {
  if (ep < 1 || ep > cfg.epochs) {
    throw ArgumentError("epoch " + std::to_string(ep) + " outside [1, " + std::to_string(cfg.epochs) + "]");
  }
}

bool positive(double x) { return std::isfinite(x) && x > 0.0; }

void check_bounds(std::vector<std::string>& out, const char* policy, double min_lr, double max_lr) {
  if (!positive(min_lr)) out.push_back(std::string(policy) + ": min_lr must be positive");
  if (!positive(max_lr)) out.push_back(std::string(policy) + ": max_lr must be positive");
  if (min_lr > max_lr) out.push_back(std::string(policy) + ": min_lr must not exceed max_lr");
}

double cosine_anneal(double min_lr, double amplitude_top, double phase) {
  return min_lr + (amplitude_top - min_lr) * 0.5 * (1.0 + std::cos(std::numbers::pi * phase));
}

// Position inside the current geometric cycle, walking cycle lengths
// first_period, first_period*mult, ... until the remainder fits.
struct CyclePhase {
  std::int64_t t_cur;
  std::int64_t period;
};

CyclePhase geometric_phase(const Geometric& g, int ep) {
  std::int64_t period = g.first_period;
  std::int64_t t_cur = ep;
  for (int i = 0; i <= ep; ++i) {
    if (t_cur < period) break;
    t_cur -= period;
    period *= g.period_multiplier;
  }
  return {t_cur, period};
}

// Fraction of the cycle elapsed at `ep`, in [0, 1).
double cycle_fraction(const PolicyConfig& cfg, const WarmRestarts& p, int ep) {
  return std::visit(
      overloaded{
          [&](const EqualCycles& eq) {
            // Cycle length is epochs/peaks, possibly fractional. Keep the
            // modulus in integers so boundaries land exactly.
            const std::int64_t num = (static_cast<std::int64_t>(ep) * eq.peaks) % cfg.epochs;
            return static_cast<double>(num) / static_cast<double>(cfg.epochs);
          },
          [&](const Geometric& g) {
            const auto ph = geometric_phase(g, ep);
            return static_cast<double>(ph.t_cur) / static_cast<double>(ph.period);
          },
      },
      p.cycles);
}

}  // namespace

std::string_view kind_name(PolicyKind kind) noexcept {
  switch (kind) {
    case PolicyKind::DecreasingStep: return "DecreasingStep";
    case PolicyKind::ExponentialDecay: return "ExponentialDecay";
    case PolicyKind::OneCycle: return "OneCycle";
    case PolicyKind::Cyclical: return "Cyclical";
    case PolicyKind::DecreasingCyclical: return "DecreasingCyclical";
    case PolicyKind::WarmRestarts: return "WarmRestarts";
  }
  return "?";
}

PolicyKind parse_kind(std::string_view name) {
  static constexpr struct {
    std::string_view camel;
    std::string_view kebab;
    PolicyKind kind;
  } kNames[] = {
      {"DecreasingStep", "decreasing-step", PolicyKind::DecreasingStep},
      {"ExponentialDecay", "exponential-decay", PolicyKind::ExponentialDecay},
      {"OneCycle", "one-cycle", PolicyKind::OneCycle},
      {"Cyclical", "cyclical", PolicyKind::Cyclical},
      {"DecreasingCyclical", "decreasing-cyclical", PolicyKind::DecreasingCyclical},
      {"WarmRestarts", "warm-restarts", PolicyKind::WarmRestarts},
  };
  for (const auto& n : kNames) {
    if (name == n.camel || name == n.kebab) return n.kind;
  }
  throw ArgumentError("unknown policy kind '" + std::string(name) + "'");
}

std::vector<std::string> validate(const PolicyConfig& cfg) {
  std::vector<std::string> out;
  if (!positive(cfg.init_lr)) out.emplace_back("init_lr must be positive");
  if (cfg.epochs < 1) out.emplace_back("epochs must be >= 1");

  std::visit(
      overloaded{
          [&](const DecreasingStep& p) {
            if (!(p.factor > 0.0 && p.factor <= 1.0)) out.emplace_back("DecreasingStep: factor must lie in (0, 1]");
            if (p.interval < 1) out.emplace_back("DecreasingStep: interval must be >= 1");
          },
          [&](const ExponentialDecay& p) {
            if (!(p.rate > 0.0 && p.rate <= 1.0)) out.emplace_back("ExponentialDecay: rate must lie in (0, 1]");
            if (p.steps < 1) out.emplace_back("ExponentialDecay: steps must be >= 1");
          },
          [&](const OneCycle& p) {
            check_bounds(out, "OneCycle", p.min_lr, p.max_lr);
            if (!positive(p.start_lr)) out.emplace_back("OneCycle: start_lr must be positive");
            if (!positive(p.end_lr)) out.emplace_back("OneCycle: end_lr must be positive");
            if (p.start_lr > p.max_lr) out.emplace_back("OneCycle: start_lr must not exceed max_lr");
            if (p.end_lr > p.min_lr) out.emplace_back("OneCycle: end_lr must not exceed min_lr");
            if (!(0 < p.peak_epoch && p.peak_epoch < p.drop_epoch && p.drop_epoch < cfg.epochs)) {
              out.emplace_back("OneCycle: need 0 < peak_epoch < drop_epoch < epochs");
            }
          },
          [&](const Cyclical& p) {
            check_bounds(out, "Cyclical", p.min_lr, p.max_lr);
            if (p.half_cycle < 1) out.emplace_back("Cyclical: half_cycle must be >= 1");
          },
          [&](const DecreasingCyclical& p) {
            check_bounds(out, "DecreasingCyclical", p.min_lr, p.max_lr);
            if (p.cycle_length < 1) {
              out.emplace_back("DecreasingCyclical: cycle_length must be >= 1");
            } else if (cfg.epochs >= 1) {
              if (cfg.epochs % p.cycle_length != 0) {
                out.emplace_back("DecreasingCyclical: cycle_length must divide epochs");
              } else if (p.decay == MaxDecay::Linear && cfg.epochs / p.cycle_length < 2) {
                out.emplace_back("DecreasingCyclical: linear max decay needs at least two cycles");
              }
            }
            if (p.decay == MaxDecay::Multiplicative &&
                !(p.multiplicative_factor > 0.0 && p.multiplicative_factor <= 1.0)) {
              out.emplace_back("DecreasingCyclical: multiplicative_factor must lie in (0, 1]");
            }
          },
          [&](const WarmRestarts& p) {
            check_bounds(out, "WarmRestarts", p.min_lr, p.max_lr);
            std::visit(overloaded{
                           [&](const EqualCycles& eq) {
                             if (eq.peaks < 1) out.emplace_back("WarmRestarts: peaks must be >= 1");
                           },
                           [&](const Geometric& g) {
                             if (g.first_period < 1) out.emplace_back("WarmRestarts: first_period must be >= 1");
                             if (g.period_multiplier < 1) {
                               out.emplace_back("WarmRestarts: period_multiplier must be >= 1");
                             }
                           },
                       },
                       p.cycles);
          },
      },
      cfg.params);
  return out;
}

void require_valid(const PolicyConfig& cfg) {
  auto v = validate(cfg);
  if (!v.empty()) throw ValidationError(std::move(v));
}

double lr_decreasing_step(const PolicyConfig& cfg, const DecreasingStep& p, int ep) {
  check_epoch(cfg, ep);
  return cfg.init_lr * std::pow(p.factor, ep / p.interval);
}

double lr_exponential_decay(const PolicyConfig& cfg, const ExponentialDecay& p, int ep) {
  check_epoch(cfg, ep);
  return cfg.init_lr * std::pow(p.rate, static_cast<double>(ep) / static_cast<double>(p.steps));
}

double lr_one_cycle(const PolicyConfig& cfg, const OneCycle& p, int ep) {
  check_epoch(cfg, ep);
  if (ep < p.peak_epoch) {
    return p.start_lr + (p.max_lr - p.start_lr) / p.peak_epoch * ep;
  }
  if (ep < p.drop_epoch) {
    return p.max_lr - (p.max_lr - p.min_lr) / (p.drop_epoch - p.peak_epoch) * (ep - p.peak_epoch);
  }
  return p.min_lr - (p.min_lr - p.end_lr) / (cfg.epochs - p.drop_epoch) * (ep - p.drop_epoch);
}

double lr_cyclical(const PolicyConfig& cfg, const Cyclical& p, int ep) {
  check_epoch(cfg, ep);
  const int pos = ep % (p.half_cycle * 2);
  if (pos < p.half_cycle) {
    return p.min_lr + (p.max_lr - p.min_lr) * pos / p.half_cycle;
  }
  return p.max_lr - (p.max_lr - p.min_lr) * (pos - p.half_cycle) / p.half_cycle;
}

double lr_decreasing_cyclical(const PolicyConfig& cfg, const DecreasingCyclical& p, int ep) {
  check_epoch(cfg, ep);
  if (p.cycle_length < 1 || cfg.epochs % p.cycle_length != 0) {
    throw ArgumentError("DecreasingCyclical: cycle_length must divide epochs");
  }
  const int completed = ep / p.cycle_length;
  double cur_max = 0.0;
  if (p.decay == MaxDecay::Linear) {
    const double step = (p.max_lr - p.min_lr) / (static_cast<double>(cfg.epochs / p.cycle_length) - 1.0);
    cur_max = p.max_lr - step * completed;
  } else {
    cur_max = p.max_lr * std::pow(p.multiplicative_factor, completed);
  }
  const double progress = static_cast<double>(ep % p.cycle_length) / p.cycle_length;
  const double lr = cur_max - (cur_max - p.min_lr) * progress;
  return std::max(lr, p.min_lr);
}

double lr_warm_restarts(const PolicyConfig& cfg, const WarmRestarts& p, int ep) {
  check_epoch(cfg, ep);
  if (p.formula == RestartFormula::Standard) {
    return cosine_anneal(p.min_lr, p.max_lr, cycle_fraction(cfg, p, ep));
  }
  double lr = cfg.init_lr;
  for (int e = 1; e <= ep; ++e) {
    lr = cosine_anneal(p.min_lr, lr, cycle_fraction(cfg, p, e));
  }
  return lr;
}

double learning_rate(const PolicyConfig& cfg, int ep) {
  return std::visit(
      overloaded{
          [&](const DecreasingStep& p) { return lr_decreasing_step(cfg, p, ep); },
          [&](const ExponentialDecay& p) { return lr_exponential_decay(cfg, p, ep); },
          [&](const OneCycle& p) { return lr_one_cycle(cfg, p, ep); },
          [&](const Cyclical& p) { return lr_cyclical(cfg, p, ep); },
          [&](const DecreasingCyclical& p) { return lr_decreasing_cyclical(cfg, p, ep); },
          [&](const WarmRestarts& p) { return lr_warm_restarts(cfg, p, ep); },
      },
      cfg.params);
}

std::vector<int> restart_epochs(const PolicyConfig& cfg, const WarmRestarts& p) {
  std::vector<int> out;
  for (int ep = 1; ep <= cfg.epochs; ++ep) {
    if (cycle_fraction(cfg, p, ep) == 0.0) out.push_back(ep);
  }
  return out;
}

double ScheduleTrace::at(int ep) const {
  if (ep < 1 || ep > epochs()) throw ArgumentError("epoch " + std::to_string(ep) + " outside trace");
  return lr_[static_cast<std::size_t>(ep - 1)];
}

std::string ScheduleTrace::to_csv() const {
  std::string out = "epoch,lr\n";
  char buf[64];
  for (std::size_t i = 0; i < lr_.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i + 1, lr_[i]);
    out += buf;
  }
  return out;
}

ScheduleTrace build_schedule(const PolicyConfig& cfg) {
  require_valid(cfg);
  std::vector<double> lr(static_cast<std::size_t>(cfg.epochs));
  if (const auto* wr = std::get_if<WarmRestarts>(&cfg.params); wr && wr->formula == RestartFormula::Literal) {
    // The literal recurrence depends on the previous epoch; walk it once
    // instead of re-running it from epoch 1 for every entry.
    double cur = cfg.init_lr;
    for (int ep = 1; ep <= cfg.epochs; ++ep) {
      cur = cosine_anneal(wr->min_lr, cur, cycle_fraction(cfg, *wr, ep));
      lr[static_cast<std::size_t>(ep - 1)] = cur;
    }
    return ScheduleTrace(std::move(lr));
  }
  for (int ep = 1; ep <= cfg.epochs; ++ep) lr[static_cast<std::size_t>(ep - 1)] = learning_rate(cfg, ep);
  return ScheduleTrace(std::move(lr));
}

RateBounds rate_bounds(const PolicyConfig& cfg) {
  return std::visit(
      overloaded{
          [&](const DecreasingStep&) { return RateBounds{0.0, cfg.init_lr}; },
          [&](const ExponentialDecay&) { return RateBounds{0.0, cfg.init_lr}; },
          [&](const OneCycle& p) { return RateBounds{p.end_lr, p.max_lr}; },
          [&](const Cyclical& p) { return RateBounds{p.min_lr, p.max_lr}; },
          [&](const DecreasingCyclical& p) { return RateBounds{p.min_lr, p.max_lr}; },
          [&](const WarmRestarts& p) {
            if (p.formula == RestartFormula::Literal) return RateBounds{p.min_lr, std::max(p.min_lr, cfg.init_lr)};
            return RateBounds{p.min_lr, p.max_lr};
          },
      },
      cfg.params);
}

std::vector<GridEntry> exploration_grid(int epochs) {
  std::vector<GridEntry> grid;
  for (int peaks : {2, 3, 4, 6, 7, 10}) {
    PolicyConfig cfg;
    cfg.init_lr = 1e-2;
    cfg.epochs = epochs;
    cfg.params = WarmRestarts{1e-5, 1e-2, EqualCycles{peaks}, RestartFormula::Standard};
    grid.push_back({"WR_" + std::to_string(peaks) + "P", cfg, 40, 0.4});
  }
  struct Setting {
    int batch;
    int vth_tenths;
  };
  for (Setting s : {Setting{40, 3}, Setting{40, 4}, Setting{40, 5}, Setting{40, 6}, Setting{30, 4}, Setting{20, 4}}) {
    PolicyConfig cfg;
    cfg.init_lr = 1e-2;
    cfg.epochs = epochs;
    cfg.params = ExponentialDecay{0.98, 1};
    grid.push_back({"ED_B" + std::to_string(s.batch) + "_V" + std::to_string(s.vth_tenths), cfg, s.batch,
                    s.vth_tenths / 10.0});
  }
  return grid;
}

GridEntry baseline_entry(int epochs) {
  PolicyConfig cfg;
  cfg.init_lr = 1e-3;
  cfg.epochs = epochs;
  cfg.params = DecreasingStep{0.5, 20};
  return {"SOTA_DS", cfg, 40, 0.4};
}

PolicyConfig preset(PolicyKind kind, int epochs) {
  PolicyConfig cfg;
  cfg.init_lr = 0.1;
  cfg.epochs = epochs;
  switch (kind) {
    case PolicyKind::DecreasingStep: cfg.params = DecreasingStep{}; break;
    case PolicyKind::ExponentialDecay: cfg.params = ExponentialDecay{}; break;
    case PolicyKind::OneCycle: cfg.params = OneCycle{}; break;
    case PolicyKind::Cyclical: cfg.params = Cyclical{}; break;
    case PolicyKind::DecreasingCyclical: cfg.params = DecreasingCyclical{}; break;
    case PolicyKind::WarmRestarts: cfg.params = WarmRestarts{1e-5, 1e-2, Geometric{4, 2}, RestartFormula::Standard}; break;
  }
  return cfg;
}

PolicyConfig one_cycle_peak100_preset(int epochs) {
  PolicyConfig cfg = preset(PolicyKind::OneCycle, epochs);
  std::get<OneCycle>(cfg.params).peak_epoch = 100;
  return cfg;
}

}  // namespace snntrain::schedule
