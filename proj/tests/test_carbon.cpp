#include <cmath>

#include "doctest.h"
#include "snntrain/carbon.hpp"
#include "snntrain/error.hpp"
#include "snntrain/report.hpp"
#include "snntrain/rng.hpp"

using namespace snntrain;
using namespace snntrain::carbon;

namespace {

bool rel_close(double a, double b, double tol) { return std::fabs(a - b) <= tol * std::max(std::fabs(b), 1e-300); }

}  // namespace

TEST_CASE("carbon: hand-computed reference values") {
  // 1.58 * (100 + 50 + 300) / 1000 = 0.711 kW; 0.954 * 0.711 * 9 = 6.104646 lbs.
  const PowerProfile p{100.0, 50.0, 300.0, 1};
  CHECK(rel_close(training_power(p), 0.711, 1e-12));
  const auto r = carbon_emission(p, 9.0);
  CHECK(rel_close(r.co2e_lbs, 6.104646, 1e-9));
  CHECK(r.duration_h == 9.0);
  // Two GPUs: 1.58 * 750 / 1000.
  CHECK(rel_close(training_power({100.0, 50.0, 300.0, 2}), 1.185, 1e-12));
  CHECK(training_power({}) == 0.0);
}

TEST_CASE("carbon: reduction for a run stopped at 19 of 200 epochs") {
  const PowerProfile p{100.0, 50.0, 300.0, 1};
  const auto full = carbon_emission(p, 200.0);
  const auto early = carbon_emission(p, 19.0);
  CHECK(rel_close(emission_reduction(early, full), 90.5, 1e-12));
  CHECK(emission_reduction(full, full) == 0.0);
  CHECK_THROWS_AS(emission_reduction(full, carbon_emission(p, 0.0)), ArgumentError);
}

TEST_CASE("carbon: linear in time and monotone in every power term") {
  Rng rng(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const PowerProfile p{rng.uniform(0, 300), rng.uniform(0, 100), rng.uniform(0, 400),
                         static_cast<int>(rng.below(9))};
    const double t = rng.uniform(0.01, 100.0), k = rng.uniform(0.1, 10.0);
    const auto a = carbon_emission(p, t);
    const auto b = carbon_emission(p, k * t);
    CHECK(rel_close(b.co2e_lbs, k * a.co2e_lbs, 1e-12));
    CHECK(a.co2e_lbs >= 0.0);

    const double d = rng.uniform(0.001, 50.0);
    PowerProfile q = p;
    q.p_cpu_w += d;
    CHECK(carbon_emission(q, t).co2e_lbs > a.co2e_lbs);
    q = p;
    q.p_mem_w += d;
    CHECK(carbon_emission(q, t).co2e_lbs > a.co2e_lbs);
    q = p;
    q.gpu_count += 1;
    CHECK(carbon_emission(q, t).co2e_lbs >= a.co2e_lbs);
  }
}

TEST_CASE("carbon: GPU-only accounting drops CPU and DRAM") {
  const PowerProfile p{100.0, 50.0, 300.0, 2};
  const auto g = apply_mode(p, AccountingMode::GpuOnly);
  CHECK(g.p_cpu_w == 0.0);
  CHECK(g.p_mem_w == 0.0);
  CHECK(rel_close(training_power(g), 1.58 * 600.0 / 1000.0, 1e-12));
  CHECK(apply_mode(p, AccountingMode::Full).p_cpu_w == 100.0);
}

TEST_CASE("carbon: invalid inputs") {
  CHECK_THROWS_AS(training_power({-1.0, 0, 0, 0}), ArgumentError);
  CHECK_THROWS_AS(training_power({0, NAN, 0, 0}), ArgumentError);
  CHECK_THROWS_AS(training_power({0, 0, INFINITY, 1}), ArgumentError);
  CHECK_THROWS_AS(training_power({0, 0, 0, -1}), ArgumentError);
  CHECK_THROWS_AS(carbon_emission({}, -1.0), ArgumentError);
}

TEST_CASE("emission rows against a full-length baseline") {
  auto make = [](const char* label, int n, std::optional<int> stable) {
    trainer::RunLog log;
    log.label = label;
    for (int e = 1; e <= n; ++e) {
      trainer::EpochRecord r;
      r.epoch = e;
      r.wall_time_s = 3600.0;  // one hour per epoch
      log.records.push_back(r);
    }
    log.total_wall_time_s = 3600.0 * n;
    log.first_stable_epoch = stable;
    return log;
  };
  const auto base = make("SOTA_DS", 200, 77);
  const auto cand = make("ED_B40_V6", 19, 19);
  const PowerProfile p{100.0, 50.0, 300.0, 1};
  const auto rows = report::emission_rows({cand}, base, p);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].label == "SOTA_DS_full");
  CHECK(rows[1].label == "SOTA_DS_fast");
  CHECK(rows[0].reduction_pct == 0.0);
  CHECK(rows[1].report.duration_h == doctest::Approx(77.0));
  CHECK(rows[2].label == "ED_B40_V6");
  CHECK(rows[2].reduction_pct == doctest::Approx(90.5));
  CHECK(rows[2].report.co2e_lbs == doctest::Approx(0.954 * 0.711 * 19));

  const auto csv = emissions_csv(rows);
  CHECK(csv.rfind("label,p_train_kw,hours,co2e_lbs,reduction_pct\nSOTA_DS_full,", 0) == 0);
  CHECK(csv.find("\nED_B40_V6,") != std::string::npos);
  CHECK(csv.find(",19,") != std::string::npos);
  CHECK(csv.find(",90.5000\n") != std::string::npos);
}
