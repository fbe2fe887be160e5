#pragma once

// Training-time carbon estimate:
//   P_train [kW]  = 1.58 * (P_cpu + P_mem + g * P_gpu) / 1000
//   CO2e   [lbs]  = 0.954 * P_train * t[h]
// 1.58 is the datacenter power usage effectiveness and 0.954 the pounds of
// CO2e emitted per kWh.

#include <span>
#include <string>
#include <vector>

namespace snntrain::carbon {

inline constexpr double kPowerUsageEffectiveness = 1.58;
inline constexpr double kLbsCo2ePerKwh = 0.954;

struct PowerProfile {
  double p_cpu_w = 0.0;
  double p_mem_w = 0.0;
  double p_gpu_w = 0.0;
  int gpu_count = 0;
};

/// GPU-only accounting zeroes the CPU and DRAM terms.
enum class AccountingMode { Full, GpuOnly };

PowerProfile apply_mode(const PowerProfile& p, AccountingMode mode);

struct EmissionReport {
  double p_train_kw = 0.0;
  double duration_h = 0.0;
  double co2e_lbs = 0.0;
};

/// Throws ArgumentError on negative or non-finite fields.
double training_power(const PowerProfile& profile);
EmissionReport carbon_emission(const PowerProfile& profile, double duration_h);
/// 100 * (1 - candidate/baseline). Throws ArgumentError when baseline is 0.
double emission_reduction(const EmissionReport& candidate, const EmissionReport& baseline);

struct EmissionRow {
  std::string label;
  EmissionReport report;
  double reduction_pct = 0.0;  // against the reference row
};

/// `label,p_train_kw,hours,co2e_lbs,reduction_pct`
std::string emissions_csv(std::span<const EmissionRow> rows);

}  // namespace snntrain::carbon
