#include "snntrain/trainer.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include "snntrain/error.hpp"
#include "snntrain/rng.hpp"

namespace snntrain::trainer {
namespace {

// Runs f(i) for i in [0, n) on up to `threads` threads. The first exception
// thrown by any call is rethrown on the calling thread.
template <class F>
void parallel_for(std::size_t n, int threads, F&& f) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const auto extra = std::min<std::size_t>(static_cast<std::size_t>(threads), n) - 1;
    for (std::size_t t = 0; t < extra; ++t) pool.emplace_back(worker);
    worker();
  }
  if (failure) std::rethrow_exception(failure);
}

double population_stddev(std::span<const double> xs) {
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size()));
}

bool all_finite(const snn::LayerArrays& arrays) {
  for (const auto& a : arrays) {
    for (double v : a) {
      if (!std::isfinite(v)) return false;
    }
  }
  return true;
}

double accuracy_of(const EpochRecord& r, AccuracySource source) {
  return source == AccuracySource::Test ? r.test_accuracy : r.train_accuracy;
}

struct SampleResult {
  snn::LayerArrays grad;
  double loss = 0.0;
  bool correct = false;
};

}  // namespace

std::vector<std::string> validate(const TrainConfig& cfg) {
  std::vector<std::string> out = schedule::validate(cfg.policy);
  for (auto& e : out) e = "policy: " + e;
  if (cfg.batch_size < 1) out.emplace_back("train: batch_size must be >= 1");
  if (cfg.epochs < 1) out.emplace_back("train: epochs must be >= 1");
  if (cfg.policy.epochs < cfg.epochs) out.emplace_back("train: policy covers fewer epochs than the run");
  if (!std::isfinite(cfg.v_th)) out.emplace_back("train: v_th must be finite");
  if (cfg.stability.window < 2) out.emplace_back("stability: window must be >= 2");
  if (!(cfg.stability.acc_th > 0.0)) out.emplace_back("stability: acc_th must be positive");
  if (cfg.epochs < cfg.stability.window) out.emplace_back("train: epochs must be >= stability window");
  if (cfg.threads < 1) out.emplace_back("train: threads must be >= 1");
  if (cfg.clock == ClockKind::Nominal && !(cfg.nominal_epoch_seconds >= 0.0)) {
    out.emplace_back("train: nominal_epoch_seconds must be non-negative");
  }
  return out;
}

double RunLog::time_through(int epoch) const {
  double s = 0.0;
  for (const auto& r : records) {
    if (r.epoch > epoch) break;
    s += r.wall_time_s;
  }
  return s;
}

bool stability_check(std::span<const double> accuracies, const StabilityCriterion& crit) {
  const auto window = static_cast<std::size_t>(crit.window);
  if (crit.window < 1 || accuracies.size() < window) return false;
  return population_stddev(accuracies.last(window)) <= crit.acc_th;
}

std::optional<int> first_stable_epoch(std::span<const EpochRecord> records, const StabilityCriterion& crit,
                                      AccuracySource source) {
  std::vector<double> acc;
  acc.reserve(records.size());
  for (const auto& r : records) {
    acc.push_back(accuracy_of(r, source));
    if (stability_check(acc, crit)) return r.epoch;
  }
  return std::nullopt;
}

FrameSet make_frames(std::span<const events::EventSample> samples, int timesteps, events::AccumulationMode mode) {
  FrameSet set;
  set.frames.reserve(samples.size());
  set.labels.reserve(samples.size());
  for (const auto& s : samples) {
    set.frames.push_back(events::accumulate_frames(s, timesteps, mode));
    set.labels.push_back(s.label);
  }
  return set;
}

double evaluate_accuracy(const snn::Network& net, std::span<const events::FrameTensor> frames,
                         std::span<const std::uint8_t> labels) {
  if (frames.size() != labels.size()) throw ArgumentError("frame and label counts differ");
  if (frames.empty()) return 0.0;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < frames.size(); ++i) {
    if (net.predict(frames[i]) == labels[i]) ++correct;
  }
  return 100.0 * static_cast<double>(correct) / static_cast<double>(frames.size());
}

TrainingResult train_network(const TrainConfig& cfg, const snn::NetworkSpec& spec_in, const events::Split& data,
                             const EpochCallback& on_epoch) {
  if (auto errs = validate(cfg); !errs.empty()) throw ValidationError(std::move(errs));
  if (data.train.empty() || data.test.empty()) throw ArgumentError("train and test partitions must be nonempty");

  snn::NetworkSpec spec = spec_in;
  spec.lif.v_th = cfg.v_th;
  for (const auto* part : {&data.train, &data.test}) {
    for (const auto& s : *part) {
      if (auto err = events::check_sample(s, spec.n_classes); !err.empty()) throw ArgumentError("dataset: " + err);
    }
  }
  bool seen[2] = {false, false};
  for (const auto& s : data.train) seen[s.label == 0 ? 0 : 1] = true;
  if (!seen[0] || !seen[1]) throw ArgumentError("training data must contain both background and positive samples");

  const schedule::ScheduleTrace lr_trace = schedule::build_schedule(cfg.policy);
  snn::Network net(spec, cfg.seed);
  const auto& k = kernels::active();

  const FrameSet train = make_frames(data.train, spec.timesteps, cfg.accumulation);
  const FrameSet test = make_frames(data.test, spec.timesteps, cfg.accumulation);
  const std::size_t n_train = train.frames.size();

  RunLog log;
  log.config = cfg;
  std::vector<std::size_t> order(n_train);
  std::vector<SampleResult> results(std::min<std::size_t>(n_train, static_cast<std::size_t>(cfg.batch_size)));

  using Clock = std::chrono::steady_clock;
  auto epoch_start = Clock::now();
  for (int ep = 1; ep <= cfg.epochs; ++ep) {
    const double lr = lr_trace.at(ep);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(derive_seed(cfg.seed, 0xe90c0000ULL + static_cast<std::uint64_t>(ep)));
    shuffle_rng.shuffle(std::span<std::size_t>(order));

    std::size_t correct = 0;
    double loss_sum = 0.0;
    bool diverged = false;
    for (std::size_t start = 0; start < n_train; start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t count = std::min(n_train - start, static_cast<std::size_t>(cfg.batch_size));
      parallel_for(count, cfg.threads, [&](std::size_t j) {
        const std::size_t idx = order[start + j];
        const auto trace = net.forward(train.frames[idx], snn::SpikeMode::Hard, k);
        results[j].correct = snn::predict_class(trace.spike_counts) == train.labels[idx];
        results[j].loss = snn::rate_mse(trace, train.labels[idx]);
        results[j].grad = net.backward(trace, train.labels[idx], 1.0, k);
      });
      // Ordered reduction keeps the sum independent of the thread count.
      snn::LayerArrays grad_sum = net.zero_gradients();
      for (std::size_t j = 0; j < count; ++j) {
        snn::accumulate(grad_sum, results[j].grad, k);
        loss_sum += results[j].loss;
        correct += results[j].correct ? 1 : 0;
      }
      snn::update_weights(net.weights(), grad_sum, lr, static_cast<int>(count), k);
      if (!std::isfinite(loss_sum) || !all_finite(net.weights())) {
        diverged = true;
        break;
      }
    }

    EpochRecord rec;
    rec.epoch = ep;
    rec.lr = lr;
    rec.train_accuracy = 100.0 * static_cast<double>(correct) / static_cast<double>(n_train);
    rec.train_loss = loss_sum / static_cast<double>(n_train);
    if (diverged) {
      rec.test_accuracy = 0.0;
      log.aborted = true;
      char buf[96];
      std::snprintf(buf, sizeof buf, "non-finite loss or weights at epoch %d (lr %g)", ep, lr);
      log.abort_reason = buf;
    } else {
      rec.test_accuracy = evaluate_accuracy(net, test.frames, test.labels);
    }

    const auto epoch_end = Clock::now();
    rec.wall_time_s = cfg.clock == ClockKind::Wall ? std::chrono::duration<double>(epoch_end - epoch_start).count()
                                                   : cfg.nominal_epoch_seconds;
    epoch_start = epoch_end;
    log.records.push_back(rec);
    if (!diverged && !log.first_stable_epoch) {
      log.first_stable_epoch = first_stable_epoch(log.records, cfg.stability, cfg.stability_source);
      if (log.first_stable_epoch) log.accuracy_at_stability = rec.test_accuracy;
    }
    log.records.back().stable_so_far = log.first_stable_epoch.has_value();
    if (on_epoch) on_epoch(log.records.back());
    if (diverged) break;
    if (cfg.early_stop && log.first_stable_epoch) break;
  }
  for (const auto& r : log.records) log.total_wall_time_s += r.wall_time_s;
  return {std::move(log), std::move(net)};
}

RunLog run_training(const TrainConfig& cfg, const snn::NetworkSpec& spec, const events::Split& data) {
  return train_network(cfg, spec, data).log;
}

SpeedupRow speedup_report(const RunLog& candidate, const RunLog& baseline) {
  if (candidate.records.empty() || baseline.records.empty()) throw ArgumentError("speedup needs nonempty run logs");
  SpeedupRow row;
  row.label = candidate.label;
  row.first_stable_epoch = candidate.first_stable_epoch;
  row.accuracy_at_stability = candidate.accuracy_at_stability;
  row.epochs_run = static_cast<int>(candidate.records.size());
  row.final_test_accuracy = candidate.records.back().test_accuracy;
  if (candidate.first_stable_epoch) {
    const double stable = *candidate.first_stable_epoch;
    row.speedup_full = static_cast<double>(baseline.records.size()) / stable;
    if (baseline.first_stable_epoch) row.speedup_stable = *baseline.first_stable_epoch / stable;
  }
  return row;
}

std::string format_speedup(double ratio) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1fx", ratio);
  return buf;
}

namespace {

std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(); }

std::string opt_fixed(const std::optional<double>& v, const char* fmt) {
  if (!v) return {};
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, *v);
  return buf;
}

}  // namespace

std::string report_csv(std::span<const SpeedupRow> rows) {
  std::string out =
      "label,first_stable_epoch,accuracy_at_first_stable,speedup_vs_full_training,speedup_vs_first_stable,"
      "epochs_run,final_test_accuracy\n";
  char buf[64];
  for (const auto& r : rows) {
    out += r.label + ',' + opt_int(r.first_stable_epoch) + ',' + opt_fixed(r.accuracy_at_stability, "%.2f") + ',' +
           opt_fixed(r.speedup_full, "%.1f") + ',' + opt_fixed(r.speedup_stable, "%.1f") + ',' +
           std::to_string(r.epochs_run) + ',';
    std::snprintf(buf, sizeof buf, "%.2f\n", r.final_test_accuracy);
    out += buf;
  }
  return out;
}

std::string report_text(std::span<const SpeedupRow> rows, const std::string& baseline_label) {
  const std::vector<std::string> headers = {
      "Setting",
      "First stable [epochs]",
      "Accuracy at first stable",
      "Speedup vs. " + baseline_label + " full training",
      "Speedup vs. " + baseline_label + " first stable",
  };
  std::vector<std::vector<std::string>> cells;
  for (const auto& r : rows) {
    cells.push_back({
        r.label,
        r.stable() ? std::to_string(*r.first_stable_epoch) : "unstable",
        r.accuracy_at_stability ? opt_fixed(r.accuracy_at_stability, "%.1f%%") : "-",
        r.speedup_full ? format_speedup(*r.speedup_full) : "-",
        r.speedup_stable ? format_speedup(*r.speedup_stable) : "-",
    });
  }
  std::vector<std::size_t> width(headers.size());
  for (std::size_t c = 0; c < headers.size(); ++c) {
    width[c] = headers[c].size();
    for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string>& row) {
    std::string s;
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) s += " | ";
      s += row[c];
      s.append(width[c] - row[c].size(), ' ');
    }
    while (!s.empty() && s.back() == ' ') s.pop_back();
    return s + '\n';
  };
  std::string out = line(headers);
  std::string rule;
  for (std::size_t c = 0; c < width.size(); ++c) {
    if (c) rule += "-+-";
    rule.append(width[c], '-');
  }
  out += rule + '\n';
  for (const auto& row : cells) out += line(row);
  return out;
}

TrainConfig apply_entry(const TrainConfig& base, const schedule::GridEntry& entry) {
  TrainConfig cfg = base;
  cfg.policy = entry.policy;
  cfg.batch_size = entry.batch_size;
  cfg.v_th = entry.v_th;
  return cfg;
}

std::vector<GridOutcome> explore_grid(std::span<const schedule::GridEntry> grid, const TrainConfig& base,
                                      const snn::NetworkSpec& spec, const events::Split& data, int jobs) {
  std::vector<GridOutcome> out(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    out[i].label = grid[i].label;
    try {
      RunLog log = run_training(apply_entry(base, grid[i]), spec, data);
      log.label = grid[i].label;
      out[i].log = std::move(log);
    } catch (const std::exception& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

std::string run_csv(const RunLog& log) {
  std::string out = "epoch,lr,train_acc,test_acc,wall_s,stable\n";
  char buf[192];
  for (const auto& r : log.records) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.4f,%.4f,%.6f,%d\n", r.epoch, r.lr, r.train_accuracy, r.test_accuracy,
                  r.wall_time_s, r.stable_so_far ? 1 : 0);
    out += buf;
  }
  return out;
}

}  // namespace snntrain::trainer
