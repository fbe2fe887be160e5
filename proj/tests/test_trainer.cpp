#include <cmath>

#include "doctest.h"
#include "snntrain/error.hpp"
#include "snntrain/rng.hpp"
#include "snntrain/trainer.hpp"

using namespace snntrain;
using namespace snntrain::trainer;

namespace {

std::vector<EpochRecord> records_from(const std::vector<double>& acc) {
  std::vector<EpochRecord> out;
  for (std::size_t i = 0; i < acc.size(); ++i) {
    EpochRecord r;
    r.epoch = static_cast<int>(i + 1);
    r.test_accuracy = acc[i];
    r.train_accuracy = acc[i];
    r.wall_time_s = 1.0;
    out.push_back(r);
  }
  return out;
}

// Noisy rise followed by a plateau starting at `onset`.
std::vector<double> plateau_fixture(int onset, int length, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> acc;
  for (int e = 1; e <= length; ++e) {
    if (e < onset) acc.push_back(50.0 + 40.0 * e / onset + rng.uniform(-6.0, 6.0));
    else acc.push_back(92.0 + rng.uniform(-1.0, 1.0));
  }
  return acc;
}

struct Fixture {
  snn::NetworkSpec spec;
  events::Split data;
  TrainConfig cfg;
};

Fixture small_problem(int epochs = 4) {
  Fixture f;
  events::SyntheticParams p;
  p.n_samples = 40;
  p.width = 16;
  p.height = 16;
  f.data = events::split_dataset(events::generate_synthetic_dataset(p), 0.75, 3);
  f.spec = snn::default_spec(16, 16);
  f.cfg.epochs = epochs;
  f.cfg.batch_size = 10;
  f.cfg.stability.window = 2;
  f.cfg.early_stop = false;
  f.cfg.clock = ClockKind::Nominal;
  f.cfg.policy = schedule::preset(schedule::PolicyKind::ExponentialDecay, epochs);
  f.cfg.policy.init_lr = 1e-2;
  return f;
}

}  // namespace

TEST_CASE("stability: constant sequence is stable exactly at the window") {
  const auto recs = records_from(std::vector<double>(30, 80.0));
  CHECK(first_stable_epoch(recs, {10, 1.0}) == 10);
  CHECK_FALSE(stability_check(std::vector<double>(9, 80.0), {10, 1.0}));
  CHECK(stability_check(std::vector<double>(10, 80.0), {10, 1.0}));
}

TEST_CASE("stability: +-5 point oscillation is never stable") {
  std::vector<double> acc;
  for (int i = 0; i < 200; ++i) acc.push_back(80.0 + (i % 2 ? 5.0 : -5.0));
  CHECK_FALSE(first_stable_epoch(records_from(acc), {10, 1.0}).has_value());
}

TEST_CASE("stability: plateau detected within one window of its onset") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    for (int onset : {15, 34, 60}) {
      const auto recs = records_from(plateau_fixture(onset, 120, seed));
      const auto e = first_stable_epoch(recs, {10, 1.0});
      REQUIRE(e.has_value());
      CHECK(*e >= onset);  // the noisy ramp never qualifies
      CHECK(*e <= onset + 10);
    }
  }
}

TEST_CASE("stability: first stable epoch is minimal") {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> acc;
    for (int i = 0; i < 80; ++i) acc.push_back(90.0 + rng.uniform(-2.0, 2.0) * (trial % 3));
    const auto recs = records_from(acc);
    const StabilityCriterion crit{10, 1.0};
    const auto e = first_stable_epoch(recs, crit);
    // Scan every prefix independently.
    std::optional<int> scan;
    for (std::size_t n = 1; n <= acc.size() && !scan; ++n) {
      if (stability_check(std::span(acc).first(n), crit)) scan = static_cast<int>(n);
    }
    CHECK(e == scan);
  }
}

TEST_CASE("stability uses the population standard deviation") {
  // Window {0,2} repeated: population sd is exactly 1.
  std::vector<double> acc;
  for (int i = 0; i < 10; ++i) acc.push_back(i % 2 ? 2.0 : 0.0);
  CHECK(stability_check(acc, {10, 1.0}));
  CHECK_FALSE(stability_check(acc, {10, 0.999}));
  CHECK_FALSE(stability_check(acc, {0, 1.0}));
}

TEST_CASE("training is deterministic and independent of the thread count") {
  auto f = small_problem();
  const auto a = train_network(f.cfg, f.spec, f.data);
  const auto b = train_network(f.cfg, f.spec, f.data);
  CHECK(a.network == b.network);
  f.cfg.threads = 3;
  const auto c = train_network(f.cfg, f.spec, f.data);
  CHECK(a.network == c.network);
  CHECK(run_csv(a.log) == run_csv(c.log));
  REQUIRE(a.log.records.size() == 4);
  CHECK(a.log.records[0].lr == doctest::Approx(0.0098));
  CHECK(a.log.total_wall_time_s == 4.0);
  CHECK(a.log.time_through(2) == 2.0);
  CHECK_FALSE(a.network == snn::Network(f.spec, f.cfg.seed));  // weights moved
}

TEST_CASE("early stop ends the run at the first stable epoch") {
  auto f = small_problem(12);
  f.cfg.early_stop = true;
  f.cfg.stability = {2, 100.0};  // any two epochs qualify
  std::vector<int> seen;
  const auto res = train_network(f.cfg, f.spec, f.data, [&](const EpochRecord& r) { seen.push_back(r.epoch); });
  CHECK(res.log.first_stable_epoch == 2);
  CHECK(res.log.records.size() == 2);
  CHECK(seen == std::vector<int>{1, 2});
  CHECK(res.log.records.back().stable_so_far);
  CHECK_FALSE(res.log.records.front().stable_so_far);
  CHECK(res.log.accuracy_at_stability == res.log.records.back().test_accuracy);
}

TEST_CASE("wall clock: total equals the sum of epoch times") {
  auto f = small_problem(3);
  f.cfg.clock = ClockKind::Wall;
  const auto log = run_training(f.cfg, f.spec, f.data);
  double sum = 0;
  for (const auto& r : log.records) {
    CHECK(r.wall_time_s > 0.0);
    sum += r.wall_time_s;
  }
  CHECK(std::fabs(log.total_wall_time_s - sum) <= 0.01 * sum);
}

TEST_CASE("divergence aborts with a partial log") {
  // Surrogate gradients are bounded, so only a step near the double range
  // overflows; smaller steps just silence the network.
  auto f = small_problem(5);
  f.cfg.batch_size = 1;
  f.cfg.policy.init_lr = 1.7e308;
  const auto log = run_training(f.cfg, f.spec, f.data);
  CHECK(log.aborted);
  CHECK(log.abort_reason.find("non-finite") != std::string::npos);
  CHECK(log.abort_reason.find("epoch 1 (lr ") != std::string::npos);
  CHECK(log.records.size() == 1);
  CHECK_FALSE(log.first_stable_epoch.has_value());
}

TEST_CASE("invalid configs and data are rejected") {
  auto f = small_problem();
  TrainConfig bad = f.cfg;
  bad.batch_size = 0;
  bad.epochs = 1;  // shorter than the window too
  bad.policy.init_lr = -1;
  try {
    run_training(bad, f.spec, f.data);
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(e.violations().size() >= 3);
  }
  events::Split one_class = f.data;
  std::erase_if(one_class.train, [](const auto& s) { return s.label == 1; });
  CHECK_THROWS_AS(run_training(f.cfg, f.spec, one_class), ArgumentError);
  events::Split empty = f.data;
  empty.test.clear();
  CHECK_THROWS_AS(run_training(f.cfg, f.spec, empty), ArgumentError);
}

TEST_CASE("speedup arithmetic on published epoch counts") {
  RunLog base, cand;
  base.label = "SOTA_DS";
  base.records = records_from(std::vector<double>(200, 80.0));
  base.first_stable_epoch = 77;
  cand.label = "ED_B40_V6";
  cand.records = records_from(std::vector<double>(19, 85.0));
  cand.first_stable_epoch = 19;
  cand.accuracy_at_stability = 85.0;
  const auto row = speedup_report(cand, base);
  CHECK(*row.speedup_full == doctest::Approx(200.0 / 19.0));
  CHECK(format_speedup(*row.speedup_full) == "10.5x");
  CHECK(format_speedup(*row.speedup_stable) == "4.1x");
  CHECK(row.epochs_run == 19);

  RunLog unstable = cand;
  unstable.first_stable_epoch.reset();
  const auto u = speedup_report(unstable, base);
  CHECK_FALSE(u.speedup_full.has_value());
  CHECK_THROWS_AS(speedup_report(RunLog{}, base), ArgumentError);

  const std::vector<SpeedupRow> rows = {row, u};
  const auto csv = report_csv(rows);
  CHECK(csv.rfind("label,first_stable_epoch,accuracy_at_first_stable,speedup_vs_full_training,"
                  "speedup_vs_first_stable,epochs_run,final_test_accuracy\n",
                  0) == 0);
  CHECK(csv.find("ED_B40_V6,19,85.00,10.5,4.1,19,85.00\n") != std::string::npos);
  const auto text = report_text(rows, "SOTA_DS");
  CHECK(text.find("Speedup vs. SOTA_DS full training") != std::string::npos);
  CHECK(text.find("10.5x") != std::string::npos);
  CHECK(text.find("unstable") != std::string::npos);
}

TEST_CASE("run CSV layout") {
  RunLog log;
  log.records = records_from({50.0, 60.5});
  log.records[1].stable_so_far = true;
  log.records[0].lr = 0.01;
  CHECK(run_csv(log) ==
        "epoch,lr,train_acc,test_acc,wall_s,stable\n1,0.01,50.0000,50.0000,1.000000,0\n2,0,60.5000,60.5000,1.000000,1\n");
}

TEST_CASE("grid runs isolate failures and keep order for any job count") {
  auto f = small_problem(3);
  auto grid = schedule::exploration_grid(3);
  grid.resize(3);
  grid[1].policy.init_lr = -1;  // invalid entry
  const auto one = explore_grid(grid, f.cfg, f.spec, f.data, 1);
  const auto many = explore_grid(grid, f.cfg, f.spec, f.data, 3);
  REQUIRE(one.size() == 3);
  CHECK(one[0].label == "WR_2P");
  CHECK(one[0].log.has_value());
  CHECK_FALSE(one[1].log.has_value());
  CHECK_FALSE(one[1].error.empty());
  for (std::size_t i : {0u, 2u}) CHECK(run_csv(*one[i].log) == run_csv(*many[i].log));
  CHECK(apply_entry(f.cfg, grid[2]).batch_size == 40);
}
