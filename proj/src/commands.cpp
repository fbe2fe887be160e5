#include "snntrain/commands.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "snntrain/error.hpp"
#include "snntrain/experiment.hpp"
#include "snntrain/kernels.hpp"
#include "snntrain/report.hpp"

namespace snntrain::cli {
namespace {

namespace fs = std::filesystem;
using experiment::ExperimentConfig;
using experiment::Json;

struct CommonOptions {
  std::string config;
  std::vector<std::string> sets;
  std::string out;
  int jobs = 1;
};

void add_common(CLI::App* sub, CommonOptions& o, bool with_jobs) {
  sub->add_option("--config", o.config, "Experiment config (JSON)")->check(CLI::ExistingFile);
  sub->add_option("--set", o.sets, "Override a config value, e.g. train.epochs=30 (repeatable)")
      ->allow_extra_args(false)
      ->take_all();
  sub->add_option("--out", o.out, "Output directory");
  if (with_jobs) sub->add_option("--jobs", o.jobs, "Runs executed concurrently")->check(CLI::Range(1, 256));
}

std::optional<fs::path> cli_out(const CommonOptions& o) {
  if (o.out.empty()) return std::nullopt;
  return fs::path(o.out);
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

carbon::PowerProfile power_of(const ExperimentConfig& cfg) {
  return carbon::apply_mode(cfg.carbon.power, cfg.carbon.mode);
}

void attach_emission(trainer::RunLog& log, const ExperimentConfig& cfg) {
  log.emission = carbon::carbon_emission(power_of(cfg), log.total_wall_time_s / 3600.0);
}

std::string summary_line(const trainer::RunLog& log) {
  std::string s = log.label + ": " + std::to_string(log.records.size()) + " epochs";
  if (log.first_stable_epoch) {
    s += ", stable at epoch " + std::to_string(*log.first_stable_epoch) + " (" +
         fmt("%.2f", log.accuracy_at_stability.value_or(0.0)) + "% test)";
  } else {
    s += ", never stable";
  }
  if (!log.records.empty()) s += ", final test " + fmt("%.2f", log.records.back().test_accuracy) + "%";
  if (log.aborted) s += ", ABORTED: " + log.abort_reason;
  return s;
}

void write_config(const fs::path& dir, const ExperimentConfig& cfg) {
  report::write_file(dir / "config.json", experiment::to_json(cfg).dump(2) + '\n');
}

int cmd_train(const CommonOptions& o, const std::string& label, std::ostream& out) {
  const ExperimentConfig cfg = experiment::load_config(o.config, o.sets);
  const fs::path dir = experiment::resolve_output_dir(cfg, cli_out(o));
  const events::Split data = experiment::load_dataset(cfg);
  write_config(dir, cfg);
  out << "training " << data.train.size() << " / testing " << data.test.size() << " samples, kernels "
      << kernels::active().name << '\n';

  auto result = trainer::train_network(cfg.train, cfg.network, data, [&](const trainer::EpochRecord& r) {
    out << "epoch " << r.epoch << " lr " << fmt("%.4g", r.lr) << " train " << fmt("%.2f", r.train_accuracy)
        << "% test " << fmt("%.2f", r.test_accuracy) << "%" << (r.stable_so_far ? " stable" : "") << '\n';
  });
  auto& log = result.log;
  log.label = label;
  attach_emission(log, cfg);
  report::write_run(dir, log, cfg.seed);
  const carbon::EmissionRow row{label, *log.emission, 0.0};
  report::write_file(dir / "emission.csv", carbon::emissions_csv(std::span(&row, 1)));
  snn::save_checkpoint({result.network, static_cast<std::uint32_t>(log.records.size())}, dir / "checkpoint.snnc");
  out << summary_line(log) << '\n' << "wrote " << dir.string() << '\n';
  return log.aborted ? kExitRuntime : kExitOk;
}

int cmd_sweep(const CommonOptions& o, std::ostream& out) {
  const ExperimentConfig cfg = experiment::load_config(o.config, o.sets);
  const fs::path dir = experiment::resolve_output_dir(cfg, cli_out(o));
  const events::Split data = experiment::load_dataset(cfg);
  write_config(dir, cfg);

  // Each rate drives the baseline decreasing-step policy for the full epoch
  // budget so the accuracy curves are comparable.
  std::vector<schedule::GridEntry> entries;
  for (double lr : cfg.sweep.learning_rates) {
    schedule::GridEntry e = schedule::baseline_entry(cfg.train.epochs);
    e.policy.init_lr = lr;
    e.batch_size = cfg.train.batch_size;
    e.v_th = cfg.train.v_th;
    e.label = "lr_" + fmt("%g", lr);
    entries.push_back(e);
  }
  trainer::TrainConfig base = cfg.train;
  base.early_stop = false;
  out << "sweeping " << entries.size() << " learning rates over " << base.epochs << " epochs\n";
  const auto outcomes = trainer::explore_grid(entries, base, cfg.network, data, o.jobs);

  std::vector<trainer::RunLog> runs;
  bool failed = false;
  for (const auto& oc : outcomes) {
    if (!oc.log) {
      out << oc.label << ": FAILED: " << oc.error << '\n';
      failed = true;
      continue;
    }
    trainer::RunLog log = *oc.log;
    attach_emission(log, cfg);
    report::write_run(dir / "runs" / log.label, log, cfg.seed);
    out << summary_line(log) << '\n';
    failed = failed || log.aborted;
    runs.push_back(std::move(log));
  }
  const auto summary = report::summarize_sweep(runs, cfg.sweep.margin);
  report::write_file(dir / "sweep_summary.csv", report::sweep_summary_csv(summary));
  report::write_file(dir / "sweep_curves.csv", report::sweep_curves_csv(runs));
  std::string ineffective;
  for (const auto& r : summary) {
    if (!r.effective) ineffective += (ineffective.empty() ? "" : ", ") + fmt("%g", r.lr);
  }
  out << "ineffective (final accuracy more than " << fmt("%g", cfg.sweep.margin)
      << " points below best): " << (ineffective.empty() ? "none" : ineffective) << '\n';
  out << "wrote " << dir.string() << '\n';
  return failed ? kExitRuntime : kExitOk;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

int write_report(const fs::path& dir, const std::vector<trainer::RunLog>& runs, const trainer::RunLog& baseline,
                 const ExperimentConfig& cfg, std::ostream& out) {
  std::vector<trainer::RunLog> with_baseline;
  with_baseline.push_back(baseline);
  with_baseline.insert(with_baseline.end(), runs.begin(), runs.end());
  const auto rows = report::speedup_rows(with_baseline, baseline);
  const std::string text = trainer::report_text(rows, baseline.label);
  report::write_file(dir / "report.csv", trainer::report_csv(rows));
  report::write_file(dir / "report.txt", text);
  report::write_file(dir / "emissions.csv",
                     carbon::emissions_csv(report::emission_rows(runs, baseline, power_of(cfg))));
  out << text;
  return kExitOk;
}

int cmd_explore(const CommonOptions& o, const std::string& only, std::ostream& out) {
  const ExperimentConfig cfg = experiment::load_config(o.config, o.sets);
  const int epochs = cfg.train.epochs;
  std::vector<schedule::GridEntry> grid = schedule::exploration_grid(epochs);
  if (!only.empty()) {
    std::vector<std::string> errors;
    const auto wanted = split_list(only);
    std::set<std::string> known;
    for (const auto& g : grid) known.insert(g.label);
    for (const auto& w : wanted) {
      if (!known.count(w)) errors.push_back("--only: unknown setting '" + w + "'");
    }
    if (!errors.empty()) throw ValidationError(std::move(errors));
    std::erase_if(grid, [&](const auto& g) { return std::find(wanted.begin(), wanted.end(), g.label) == wanted.end(); });
  }
  const fs::path dir = experiment::resolve_output_dir(cfg, cli_out(o));
  const events::Split data = experiment::load_dataset(cfg);
  write_config(dir, cfg);

  // Baseline runs to the full budget; its first stable epoch is read off the
  // complete curve.
  std::vector<schedule::GridEntry> all;
  all.push_back(schedule::baseline_entry(epochs));
  all.insert(all.end(), grid.begin(), grid.end());
  out << "exploring " << grid.size() << " settings plus baseline over " << epochs << " epochs\n";

  trainer::TrainConfig base = cfg.train;
  std::vector<trainer::GridOutcome> outcomes(all.size());
  {
    trainer::TrainConfig full = base;
    full.early_stop = false;
    auto first = trainer::explore_grid(std::span(all).first(1), full, cfg.network, data, 1);
    outcomes[0] = std::move(first[0]);
  }
  auto rest = trainer::explore_grid(std::span(all).subspan(1), base, cfg.network, data, o.jobs);
  std::move(rest.begin(), rest.end(), outcomes.begin() + 1);

  bool failed = false;
  std::vector<trainer::RunLog> runs;
  std::optional<trainer::RunLog> baseline;
  for (std::size_t i = 0; i < outcomes.size(); ++i) {
    auto& oc = outcomes[i];
    if (!oc.log) {
      out << oc.label << ": FAILED: " << oc.error << '\n';
      failed = true;
      continue;
    }
    trainer::RunLog log = std::move(*oc.log);
    attach_emission(log, cfg);
    report::write_run(dir / "runs" / log.label, log, cfg.seed);
    out << summary_line(log) << '\n';
    failed = failed || log.aborted;
    if (i == 0) baseline = std::move(log);
    else runs.push_back(std::move(log));
  }
  if (!baseline || baseline->records.empty()) {
    out << "baseline failed; no report written\n";
    return kExitRuntime;
  }
  write_report(dir, runs, *baseline, cfg, out);
  out << "wrote " << dir.string() << '\n';
  return failed ? kExitRuntime : kExitOk;
}

int cmd_schedule(const std::string& config, const std::vector<std::string>& sets, const std::string& kind,
                 int epochs, std::optional<double> init_lr, const std::string& preset_name, const std::string& out_path,
                 std::ostream& out) {
  Json policy = Json::object();
  if (!config.empty()) {
    const ExperimentConfig cfg = experiment::load_config(config, {});
    policy = experiment::policy_to_json(cfg.train.policy);
  }
  if (!kind.empty()) {
    if (!config.empty()) {
      policy = Json::object();
    }
    policy["kind"] = kind;
  }
  if (policy.empty()) throw ValidationError({"schedule: --kind or --config is required"});
  if (epochs > 0) policy["epochs"] = epochs;
  if (init_lr) policy["init_lr"] = *init_lr;
  if (preset_name == "peak100") {
    if (policy.value("kind", "") != "OneCycle" && policy.value("kind", "") != "one-cycle") {
      throw ValidationError({"--preset peak100 applies to the one-cycle policy only"});
    }
    const Json preset = experiment::policy_to_json(schedule::one_cycle_peak100_preset(policy.value("epochs", 200)));
    for (const auto& [k, v] : preset.items()) {
      if (!policy.contains(k) || k == "peak_epoch") policy[k] = v;
    }
  } else if (!preset_name.empty() && preset_name != "default") {
    throw ValidationError({"--preset must be 'default' or 'peak100'"});
  }
  for (const auto& s : sets) experiment::apply_override(policy, s);

  std::vector<std::string> errors;
  const int fallback_epochs = policy.contains("epochs") && policy["epochs"].is_number_integer()
                                  ? policy["epochs"].get<int>()
                                  : 200;
  auto cfg = experiment::policy_from_json(policy, fallback_epochs, errors, "policy");
  if (errors.empty()) {
    for (auto& v : schedule::validate(cfg)) errors.push_back("policy: " + v);
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));

  const std::string csv = schedule::build_schedule(cfg).to_csv();
  if (out_path.empty()) {
    out << csv;
  } else {
    report::write_file(out_path, csv);
    out << "wrote " << out_path << '\n';
  }
  if (const auto* wr = std::get_if<schedule::WarmRestarts>(&cfg.params)) {
    std::string r;
    for (int e : schedule::restart_epochs(cfg, *wr)) r += (r.empty() ? "" : ",") + std::to_string(e);
    if (!out_path.empty()) out << "restarts at epochs " << (r.empty() ? "none" : r) << '\n';
  }
  return kExitOk;
}

int cmd_report(const CommonOptions& o, const std::string& baseline_path, const std::vector<std::string>& run_paths,
               const std::string& from_dir, std::ostream& out) {
  const ExperimentConfig cfg = experiment::load_config(o.config, o.sets);
  std::optional<trainer::RunLog> baseline;
  std::vector<trainer::RunLog> runs;
  if (!from_dir.empty()) {
    const fs::path runs_dir = fs::path(from_dir) / "runs";
    if (!fs::is_directory(runs_dir)) throw ValidationError({"--dir: " + runs_dir.string() + " is not a directory"});
    const std::string base_label = schedule::baseline_entry().label;
    // Grid order, not directory order.
    std::vector<std::string> order;
    for (const auto& g : schedule::exploration_grid()) order.push_back(g.label);
    for (const auto& label : order) {
      const fs::path p = runs_dir / label / "run.json";
      if (fs::exists(p)) runs.push_back(report::read_run_log(p));
    }
    const fs::path bp = runs_dir / base_label / "run.json";
    if (!fs::exists(bp)) throw ValidationError({"--dir: missing baseline run " + bp.string()});
    baseline = report::read_run_log(bp);
  } else {
    if (baseline_path.empty()) throw ValidationError({"report: --baseline or --dir is required"});
    baseline = report::read_run_log(baseline_path);
    for (const auto& p : run_paths) runs.push_back(report::read_run_log(p));
  }
  if (baseline->records.empty()) throw ValidationError({"report: baseline run has no epochs"});
  const fs::path dir = o.out.empty() ? (from_dir.empty() ? fs::path(".") : fs::path(from_dir)) : fs::path(o.out);
  write_report(dir, runs, *baseline, cfg, out);
  return kExitOk;
}

int cmd_dataset(const CommonOptions& o, std::ostream& out) {
  const ExperimentConfig cfg = experiment::load_config(o.config, o.sets);
  const fs::path dir = experiment::resolve_output_dir(cfg, cli_out(o));
  const auto samples = events::generate_synthetic_dataset(cfg.dataset.synthetic);
  fs::create_directories(dir);
  events::save_events(samples, dir / "events.evts");
  report::write_file(dir / "metadata.csv", events::metadata_csv(samples));
  out << "wrote " << samples.size() << " samples to " << (dir / "events.evts").string() << '\n';
  return kExitOk;
}

void print_errors(std::ostream& err, const char* heading, const std::vector<std::string>& items) {
  err << heading << '\n';
  for (const auto& v : items) err << "  - " << v << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spiking neural network training with learning-rate policy exploration", "snntrain"};
  app.require_subcommand(1);
  std::string kernel_choice;  // empty: keep SNNTRAIN_KERNELS / auto
  app.add_option("--kernels", kernel_choice, "Compute kernels: auto, scalar, avx2, neon");

  CommonOptions common;
  std::string label = "run";
  auto* train = app.add_subcommand("train", "Train one configuration");
  add_common(train, common, false);
  train->add_option("--label", label, "Name recorded in the run log");

  auto* sweep = app.add_subcommand("sweep", "Baseline policy at several initial learning rates");
  add_common(sweep, common, true);

  std::string only;
  auto* explore = app.add_subcommand("explore", "Baseline plus the twelve exploration settings");
  add_common(explore, common, true);
  explore->add_option("--only", only, "Comma-separated subset of settings to run");

  std::string kind, preset_name, sched_out;
  int epochs = 0;
  std::optional<double> init_lr;
  auto* sched = app.add_subcommand("schedule", "Print a learning-rate trace as CSV");
  sched->add_option("--config", common.config, "Take the policy from this config")->check(CLI::ExistingFile);
  sched->add_option("--kind", kind, "Policy, e.g. one-cycle or WarmRestarts");
  sched->add_option("--epochs", epochs, "Trace length")->check(CLI::Range(1, 1000000));
  sched->add_option("--init-lr", init_lr, "Initial learning rate");
  sched->add_option("--preset", preset_name, "default or peak100 (one-cycle only)");
  sched->add_option("--set", common.sets, "Override a policy field, e.g. cycles=geometric (repeatable)");
  sched->add_option("--out", sched_out, "Write the CSV here instead of stdout");

  std::string baseline_path, from_dir;
  std::vector<std::string> run_paths;
  auto* rep = app.add_subcommand("report", "Speedup and emission tables from saved run logs");
  add_common(rep, common, false);
  rep->add_option("--baseline", baseline_path, "Baseline run.json")->check(CLI::ExistingFile);
  rep->add_option("--dir", from_dir, "Output directory of a previous explore");
  rep->add_option("runs", run_paths, "Candidate run.json files")->check(CLI::ExistingFile);

  auto* dataset = app.add_subcommand("dataset", "Write the synthetic dataset as an event container");
  add_common(dataset, common, false);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::Success& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitConfig;
  }

  try {
    if (!kernel_choice.empty()) kernels::set_active(kernels::parse_choice(kernel_choice));
    if (train->parsed()) return cmd_train(common, label, out);
    if (sweep->parsed()) return cmd_sweep(common, out);
    if (explore->parsed()) return cmd_explore(common, only, out);
    if (sched->parsed())
      return cmd_schedule(common.config, common.sets, kind, epochs, init_lr, preset_name, sched_out, out);
    if (rep->parsed()) return cmd_report(common, baseline_path, run_paths, from_dir, out);
    if (dataset->parsed()) return cmd_dataset(common, out);
  } catch (const ValidationError& e) {
    print_errors(err, "configuration error:", e.violations());
    return kExitConfig;
  } catch (const ArgumentError& e) {
    print_errors(err, "configuration error:", {e.what()});
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitConfig;
}

}  // namespace snntrain::cli
