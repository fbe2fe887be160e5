#include "snntrain/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "snntrain/error.hpp"

namespace snntrain::report {
namespace {

Json opt(const std::optional<int>& v) { return v ? Json(*v) : Json(nullptr); }
Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

template <class T>
T field(const Json& j, const char* key, const std::string& where, std::vector<std::string>& errors, T fallback = {}) {
  auto it = j.find(key);
  if (it == j.end()) {
    errors.push_back(where + "." + key + ": missing");
    return fallback;
  }
  try {
    return it->template get<T>();
  } catch (const nlohmann::json::exception&) {
    errors.push_back(where + "." + key + ": wrong type");
    return fallback;
  }
}

template <class T>
std::optional<T> nullable(const Json& j, const char* key, const std::string& where, std::vector<std::string>& errors) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return field<T>(j, key, where, errors);
}

std::string lr_label(double lr) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", lr);
  return buf;
}

}  // namespace

Json run_log_to_json(const trainer::RunLog& log, std::uint64_t seed) {
  Json j;
  j["label"] = log.label;
  j["seed"] = seed;
  j["config"] = experiment::train_to_json(log.config);
  Json records = Json::array();
  for (const auto& r : log.records) {
    records.push_back({{"epoch", r.epoch},
                       {"lr", r.lr},
                       {"train_accuracy", r.train_accuracy},
                       {"test_accuracy", r.test_accuracy},
                       {"train_loss", r.train_loss},
                       {"wall_time_s", r.wall_time_s},
                       {"stable", r.stable_so_far}});
  }
  j["records"] = std::move(records);
  j["summary"] = {{"epochs_run", log.records.size()},
                  {"first_stable_epoch", opt(log.first_stable_epoch)},
                  {"accuracy_at_stability", opt(log.accuracy_at_stability)},
                  {"final_test_accuracy", log.records.empty() ? 0.0 : log.records.back().test_accuracy},
                  {"total_wall_time_s", log.total_wall_time_s},
                  {"aborted", log.aborted},
                  {"abort_reason", log.abort_reason}};
  if (log.emission) {
    j["emission"] = {{"p_train_kw", log.emission->p_train_kw},
                     {"duration_h", log.emission->duration_h},
                     {"co2e_lbs", log.emission->co2e_lbs}};
  } else {
    j["emission"] = nullptr;
  }
  return j;
}

trainer::RunLog run_log_from_json(const Json& j) {
  std::vector<std::string> errors;
  if (!j.is_object()) throw ValidationError({"run log: not a JSON object"});
  trainer::RunLog log;
  log.label = field<std::string>(j, "label", "run", errors);
  const auto seed = field<std::uint64_t>(j, "seed", "run", errors);
  if (auto it = j.find("config"); it != j.end()) {
    try {
      log.config = experiment::parse_config(Json{{"seed", seed}, {"train", *it}}).train;
    } catch (const ValidationError& e) {
      for (const auto& v : e.violations()) errors.push_back("run.config: " + v);
    }
  } else {
    errors.emplace_back("run.config: missing");
  }
  if (auto it = j.find("records"); it != j.end() && it->is_array()) {
    for (std::size_t i = 0; i < it->size(); ++i) {
      const Json& r = (*it)[i];
      const std::string where = "run.records[" + std::to_string(i) + "]";
      if (!r.is_object()) {
        errors.push_back(where + ": not an object");
        continue;
      }
      trainer::EpochRecord rec;
      rec.epoch = field<int>(r, "epoch", where, errors);
      rec.lr = field<double>(r, "lr", where, errors);
      rec.train_accuracy = field<double>(r, "train_accuracy", where, errors);
      rec.test_accuracy = field<double>(r, "test_accuracy", where, errors);
      rec.train_loss = field<double>(r, "train_loss", where, errors);
      rec.wall_time_s = field<double>(r, "wall_time_s", where, errors);
      rec.stable_so_far = field<bool>(r, "stable", where, errors);
      log.records.push_back(rec);
    }
  } else {
    errors.emplace_back("run.records: missing or not an array");
  }
  if (auto it = j.find("summary"); it != j.end() && it->is_object()) {
    const Json& s = *it;
    log.first_stable_epoch = nullable<int>(s, "first_stable_epoch", "run.summary", errors);
    log.accuracy_at_stability = nullable<double>(s, "accuracy_at_stability", "run.summary", errors);
    log.total_wall_time_s = field<double>(s, "total_wall_time_s", "run.summary", errors);
    log.aborted = field<bool>(s, "aborted", "run.summary", errors);
    log.abort_reason = field<std::string>(s, "abort_reason", "run.summary", errors);
  } else {
    errors.emplace_back("run.summary: missing or not an object");
  }
  if (auto it = j.find("emission"); it != j.end() && it->is_object()) {
    carbon::EmissionReport e;
    e.p_train_kw = field<double>(*it, "p_train_kw", "run.emission", errors);
    e.duration_h = field<double>(*it, "duration_h", "run.emission", errors);
    e.co2e_lbs = field<double>(*it, "co2e_lbs", "run.emission", errors);
    log.emission = e;
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return log;
}

trainer::RunLog read_run_log(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError({"cannot read run log " + path.string()});
  std::stringstream ss;
  ss << f.rdbuf();
  Json j = Json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) throw ValidationError({path.string() + ": invalid JSON"});
  try {
    return run_log_from_json(j);
  } catch (const ValidationError& e) {
    std::vector<std::string> v;
    for (const auto& s : e.violations()) v.push_back(path.string() + ": " + s);
    throw ValidationError(std::move(v));
  }
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write to " + path.string() + " failed");
}

void write_run(const std::filesystem::path& dir, const trainer::RunLog& log, std::uint64_t seed) {
  write_file(dir / "run.json", run_log_to_json(log, seed).dump(2) + '\n');
  write_file(dir / "run.csv", trainer::run_csv(log));
}

std::vector<trainer::SpeedupRow> speedup_rows(const std::vector<trainer::RunLog>& candidates,
                                              const trainer::RunLog& baseline) {
  std::vector<trainer::SpeedupRow> rows;
  rows.reserve(candidates.size());
  for (const auto& c : candidates) rows.push_back(trainer::speedup_report(c, baseline));
  return rows;
}

std::vector<carbon::EmissionRow> emission_rows(const std::vector<trainer::RunLog>& candidates,
                                               const trainer::RunLog& baseline, const carbon::PowerProfile& power) {
  std::vector<carbon::EmissionRow> rows;
  const auto full = carbon::carbon_emission(power, baseline.total_wall_time_s / 3600.0);
  auto add = [&](const std::string& label, double seconds) {
    const auto rep = carbon::carbon_emission(power, seconds / 3600.0);
    rows.push_back({label, rep, full.co2e_lbs > 0.0 ? carbon::emission_reduction(rep, full) : 0.0});
  };
  add(baseline.label + "_full", baseline.total_wall_time_s);
  if (baseline.first_stable_epoch) add(baseline.label + "_fast", baseline.time_through(*baseline.first_stable_epoch));
  for (const auto& c : candidates) add(c.label, c.total_wall_time_s);
  return rows;
}

std::vector<SweepSummaryRow> summarize_sweep(const std::vector<trainer::RunLog>& runs, double margin) {
  std::vector<SweepSummaryRow> rows;
  double best_final = 0.0;
  for (const auto& r : runs) {
    SweepSummaryRow row;
    row.lr = r.config.policy.init_lr;
    for (const auto& e : r.records) row.best_test_accuracy = std::max(row.best_test_accuracy, e.test_accuracy);
    row.final_test_accuracy = r.records.empty() ? 0.0 : r.records.back().test_accuracy;
    row.first_stable_epoch = r.first_stable_epoch;
    best_final = std::max(best_final, row.final_test_accuracy);
    rows.push_back(row);
  }
  for (auto& row : rows) row.effective = row.final_test_accuracy >= best_final - margin;
  return rows;
}

std::string sweep_summary_csv(const std::vector<SweepSummaryRow>& rows) {
  std::string out = "lr,final_test_accuracy,best_test_accuracy,first_stable_epoch,effective\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%g,%.2f,%.2f,%s,%d\n", r.lr, r.final_test_accuracy, r.best_test_accuracy,
                  r.first_stable_epoch ? std::to_string(*r.first_stable_epoch).c_str() : "", r.effective ? 1 : 0);
    out += buf;
  }
  return out;
}

std::string sweep_curves_csv(const std::vector<trainer::RunLog>& runs) {
  std::string out = "epoch";
  std::size_t longest = 0;
  for (const auto& r : runs) {
    out += ",lr_" + lr_label(r.config.policy.init_lr);
    longest = std::max(longest, r.records.size());
  }
  out += '\n';
  char buf[32];
  for (std::size_t e = 0; e < longest; ++e) {
    out += std::to_string(e + 1);
    for (const auto& r : runs) {
      out += ',';
      if (e < r.records.size()) {
        std::snprintf(buf, sizeof buf, "%.2f", r.records[e].test_accuracy);
        out += buf;
      }
    }
    out += '\n';
  }
  return out;
}

}  // namespace snntrain::report
