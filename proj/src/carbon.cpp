#include "snntrain/carbon.hpp"

#include <cmath>
#include <cstdio>

#include "snntrain/error.hpp"

namespace snntrain::carbon {
namespace {

void require_non_negative(double v, const char* what) {
  if (!std::isfinite(v) || v < 0.0) throw ArgumentError(std::string(what) + " must be a non-negative finite value");
}

}  // namespace

PowerProfile apply_mode(const PowerProfile& p, AccountingMode mode) {
  if (mode == AccountingMode::Full) return p;
  return {0.0, 0.0, p.p_gpu_w, p.gpu_count};
}

double training_power(const PowerProfile& profile) {
  require_non_negative(profile.p_cpu_w, "p_cpu");
  require_non_negative(profile.p_mem_w, "p_mem");
  require_non_negative(profile.p_gpu_w, "p_gpu");
  if (profile.gpu_count < 0) throw ArgumentError("gpu count must be non-negative");
  return kPowerUsageEffectiveness * (profile.p_cpu_w + profile.p_mem_w + profile.gpu_count * profile.p_gpu_w) / 1000.0;
}

EmissionReport carbon_emission(const PowerProfile& profile, double duration_h) {
  require_non_negative(duration_h, "duration");
  const double p_train = training_power(profile);
  return {p_train, duration_h, kLbsCo2ePerKwh * p_train * duration_h};
}

double emission_reduction(const EmissionReport& candidate, const EmissionReport& baseline) {
  if (!(baseline.co2e_lbs > 0.0)) throw ArgumentError("baseline emission must be positive");
  return 100.0 * (1.0 - candidate.co2e_lbs / baseline.co2e_lbs);
}

std::string emissions_csv(std::span<const EmissionRow> rows) {
  std::string out = "label,p_train_kw,hours,co2e_lbs,reduction_pct\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,%.4f\n", r.report.p_train_kw, r.report.duration_h,
                  r.report.co2e_lbs, r.reduction_pct);
    out += r.label;
    out += buf;
  }
  return out;
}

}  // namespace snntrain::carbon
