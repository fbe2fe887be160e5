#include <cmath>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "snntrain/error.hpp"
#include "snntrain/experiment.hpp"
#include "snntrain/rng.hpp"

namespace snntrain::experiment {
namespace {

// Walks one JSON object, collecting type errors and unknown keys instead of
// stopping at the first one.
class Reader {
 public:
  Reader(const Json* j, std::string where, std::vector<std::string>& errors)
      : j_(j), where_(std::move(where)), errors_(errors) {
    if (j_ && !j_->is_object()) {
      fail("", "must be an object");
      j_ = nullptr;
    }
  }

  void get(const char* key, double& out) {
    if (const Json* v = find(key)) {
      if (v->is_number()) out = v->get<double>();
      else fail(key, "must be a number");
    }
  }
  void get(const char* key, int& out) {
    if (const Json* v = find(key)) {
      if (v->is_number_integer() && v->get<std::int64_t>() >= INT32_MIN && v->get<std::int64_t>() <= INT32_MAX)
        out = v->get<int>();
      else fail(key, "must be an integer");
    }
  }
  void get(const char* key, std::uint32_t& out) {
    if (const Json* v = find(key)) {
      if (v->is_number_unsigned() && v->get<std::uint64_t>() <= UINT32_MAX) out = v->get<std::uint32_t>();
      else fail(key, "must be a non-negative integer");
    }
  }
  void get(const char* key, std::uint64_t& out) {
    if (const Json* v = find(key)) {
      if (v->is_number_unsigned()) out = v->get<std::uint64_t>();
      else fail(key, "must be a non-negative integer");
    }
  }
  void get(const char* key, bool& out) {
    if (const Json* v = find(key)) {
      if (v->is_boolean()) out = v->get<bool>();
      else fail(key, "must be true or false");
    }
  }
  void get(const char* key, std::string& out) {
    if (const Json* v = find(key)) {
      if (v->is_string()) out = v->get<std::string>();
      else fail(key, "must be a string");
    }
  }
  void get(const char* key, std::vector<double>& out) {
    if (const Json* v = find(key)) {
      if (!v->is_array()) {
        fail(key, "must be an array of numbers");
        return;
      }
      std::vector<double> vals;
      for (const auto& e : *v) {
        if (!e.is_number()) {
          fail(key, "must be an array of numbers");
          return;
        }
        vals.push_back(e.get<double>());
      }
      out = std::move(vals);
    }
  }

  /// Maps a string value through `table`; reports the accepted spellings.
  template <class E>
  void get_enum(const char* key, E& out, std::initializer_list<std::pair<const char*, E>> table) {
    std::string s;
    const Json* v = find(key);
    if (!v) return;
    if (!v->is_string()) {
      fail(key, "must be a string");
      return;
    }
    s = v->get<std::string>();
    std::string options;
    for (const auto& [name, value] : table) {
      if (s == name) {
        out = value;
        return;
      }
      options += options.empty() ? name : std::string(", ") + name;
    }
    fail(key, "must be one of " + options + " (got \"" + s + "\")");
  }

  bool has(const char* key) const { return j_ && j_->contains(key); }
  const Json* raw(const char* key) { return find(key); }

  Reader child(const char* key) { return Reader(find(key), path(key), errors_); }

  /// Reports keys never requested. Call after all get()s.
  void finish() {
    if (!j_) return;
    for (const auto& [k, v] : j_->items()) {
      if (!seen_.count(k)) fail(k.c_str(), "unknown key");
    }
  }

  void allow(const char* key) { seen_.insert(key); }
  const std::string& where() const { return where_; }
  void fail(const std::string& key, const std::string& msg) { errors_.push_back(path(key) + ": " + msg); }
  std::string path(const std::string& key) const {
    if (key.empty()) return where_.empty() ? "<root>" : where_;
    return where_.empty() ? key : where_ + "." + key;
  }

 private:
  const Json* find(const char* key) {
    seen_.insert(key);
    if (!j_) return nullptr;
    auto it = j_->find(key);
    return it == j_->end() ? nullptr : &*it;
  }

  const Json* j_;
  std::string where_;
  std::vector<std::string>& errors_;
  std::set<std::string, std::less<>> seen_;
};

std::string accumulation_name(events::AccumulationMode m) {
  return m == events::AccumulationMode::Binary ? "binary" : "count";
}

void prefix(std::vector<std::string>& dst, const std::vector<std::string>& src, const std::string& where) {
  for (const auto& s : src) dst.push_back(where + ": " + s);
}

events::SyntheticParams read_synthetic(Reader r) {
  events::SyntheticParams p;
  r.get("n_samples", p.n_samples);
  r.get("width", p.width);
  r.get("height", p.height);
  r.get("duration_us", p.duration_us);
  r.get("min_events", p.min_events);
  r.get("max_events", p.max_events);
  r.get("noise_fraction", p.noise_fraction);
  r.finish();
  return p;
}

snn::NetworkSpec read_network(Reader r, std::vector<std::string>& errors) {
  snn::NetworkSpec spec = snn::default_spec();
  r.get("timesteps", spec.timesteps);
  r.get("n_classes", spec.n_classes);
  r.get("surrogate_width", spec.surrogate.width);
  {
    Reader lif = r.child("lif");
    lif.get("v_rest", spec.lif.v_rest);
    lif.get("tau", spec.lif.tau);
    lif.get("r_in", spec.lif.r_in);
    lif.finish();
  }
  if (const Json* layers = r.raw("layers")) {
    if (!layers->is_array()) {
      r.fail("layers", "must be an array");
    } else {
      spec.layers.clear();
      for (std::size_t i = 0; i < layers->size(); ++i) {
        Reader l(&(*layers)[i], r.path("layers[" + std::to_string(i) + "]"), errors);
        std::string type;
        l.get("type", type);
        if (type == "dense") {
          snn::DenseLayer d;
          l.get("in_features", d.in_features);
          l.get("out_features", d.out_features);
          spec.layers.emplace_back(d);
        } else if (type == "conv2d") {
          snn::Conv2dLayer c;
          l.get("in_channels", c.in_channels);
          l.get("out_channels", c.out_channels);
          l.get("kernel", c.kernel);
          l.get("stride", c.stride);
          spec.layers.emplace_back(c);
        } else {
          l.fail("type", "must be \"dense\" or \"conv2d\"");
          continue;
        }
        l.finish();
      }
    }
  }
  r.finish();
  return spec;
}

}  // namespace

Json policy_to_json(const schedule::PolicyConfig& p) {
  Json j;
  j["kind"] = std::string(schedule::kind_name(p.kind()));
  j["init_lr"] = p.init_lr;
  j["epochs"] = p.epochs;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, schedule::DecreasingStep>) {
          j["factor"] = v.factor;
          j["interval"] = v.interval;
        } else if constexpr (std::is_same_v<T, schedule::ExponentialDecay>) {
          j["rate"] = v.rate;
          j["steps"] = v.steps;
        } else if constexpr (std::is_same_v<T, schedule::OneCycle>) {
          j["peak_epoch"] = v.peak_epoch;
          j["drop_epoch"] = v.drop_epoch;
          j["start_lr"] = v.start_lr;
          j["max_lr"] = v.max_lr;
          j["min_lr"] = v.min_lr;
          j["end_lr"] = v.end_lr;
        } else if constexpr (std::is_same_v<T, schedule::Cyclical>) {
          j["min_lr"] = v.min_lr;
          j["max_lr"] = v.max_lr;
          j["half_cycle"] = v.half_cycle;
        } else if constexpr (std::is_same_v<T, schedule::DecreasingCyclical>) {
          j["min_lr"] = v.min_lr;
          j["max_lr"] = v.max_lr;
          j["cycle_length"] = v.cycle_length;
          j["max_decay"] = v.decay == schedule::MaxDecay::Linear ? "linear" : "multiplicative";
          j["decay_factor"] = v.multiplicative_factor;
        } else {
          j["min_lr"] = v.min_lr;
          j["max_lr"] = v.max_lr;
          if (const auto* eq = std::get_if<schedule::EqualCycles>(&v.cycles)) {
            j["cycles"] = "equal";
            j["peaks"] = eq->peaks;
          } else {
            const auto& g = std::get<schedule::Geometric>(v.cycles);
            j["cycles"] = "geometric";
            j["first_period"] = g.first_period;
            j["period_multiplier"] = g.period_multiplier;
          }
          j["formula"] = v.formula == schedule::RestartFormula::Standard ? "standard" : "literal";
        }
      },
      p.params);
  return j;
}

schedule::PolicyConfig policy_from_json(const Json& j, int default_epochs, std::vector<std::string>& errors,
                                        const std::string& where) {
  Reader r(&j, where, errors);
  schedule::PolicyConfig p;
  p.epochs = default_epochs;
  std::string kind_s = "ExponentialDecay";
  r.get("kind", kind_s);
  schedule::PolicyKind kind = schedule::PolicyKind::ExponentialDecay;
  try {
    kind = schedule::parse_kind(kind_s);
  } catch (const std::exception& e) {
    r.fail("kind", e.what());
  }
  p = schedule::preset(kind, default_epochs);
  r.get("init_lr", p.init_lr);
  r.get("epochs", p.epochs);

  // Parameters of every kind are accepted so that switching `kind` with an
  // override does not invalidate the rest of the object; only the ones for
  // the chosen kind are read into the result.
  schedule::DecreasingStep ds;
  schedule::ExponentialDecay ed;
  schedule::OneCycle oc;
  schedule::Cyclical cy;
  schedule::DecreasingCyclical dc;
  schedule::WarmRestarts wr;
  std::visit(
      [&](const auto& v) {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, schedule::DecreasingStep>) ds = v;
        else if constexpr (std::is_same_v<T, schedule::ExponentialDecay>) ed = v;
        else if constexpr (std::is_same_v<T, schedule::OneCycle>) oc = v;
        else if constexpr (std::is_same_v<T, schedule::Cyclical>) cy = v;
        else if constexpr (std::is_same_v<T, schedule::DecreasingCyclical>) dc = v;
        else wr = v;
      },
      p.params);

  double min_lr = 0, max_lr = 0;
  const bool has_min = r.has("min_lr"), has_max = r.has("max_lr");
  r.get("min_lr", min_lr);
  r.get("max_lr", max_lr);
  r.get("factor", ds.factor);
  r.get("interval", ds.interval);
  r.get("rate", ed.rate);
  r.get("steps", ed.steps);
  r.get("peak_epoch", oc.peak_epoch);
  r.get("drop_epoch", oc.drop_epoch);
  r.get("start_lr", oc.start_lr);
  r.get("end_lr", oc.end_lr);
  r.get("half_cycle", cy.half_cycle);
  r.get("cycle_length", dc.cycle_length);
  r.get_enum("max_decay", dc.decay,
             {{"linear", schedule::MaxDecay::Linear}, {"multiplicative", schedule::MaxDecay::Multiplicative}});
  r.get("decay_factor", dc.multiplicative_factor);

  std::string cycles = std::holds_alternative<schedule::Geometric>(wr.cycles) ? "geometric" : "equal";
  schedule::EqualCycles eq;
  schedule::Geometric geo;
  if (const auto* e = std::get_if<schedule::EqualCycles>(&wr.cycles)) eq = *e;
  else geo = std::get<schedule::Geometric>(wr.cycles);
  r.get_enum("cycles", cycles, {{"equal", std::string("equal")}, {"geometric", std::string("geometric")}});
  r.get("peaks", eq.peaks);
  r.get("first_period", geo.first_period);
  r.get("period_multiplier", geo.period_multiplier);
  r.get_enum("formula", wr.formula,
             {{"standard", schedule::RestartFormula::Standard}, {"literal", schedule::RestartFormula::Literal}});
  if (cycles == "equal") wr.cycles = eq;
  else wr.cycles = geo;
  r.finish();

  if (has_min) oc.min_lr = cy.min_lr = dc.min_lr = wr.min_lr = min_lr;
  if (has_max) oc.max_lr = cy.max_lr = dc.max_lr = wr.max_lr = max_lr;

  switch (kind) {
    case schedule::PolicyKind::DecreasingStep: p.params = ds; break;
    case schedule::PolicyKind::ExponentialDecay: p.params = ed; break;
    case schedule::PolicyKind::OneCycle: p.params = oc; break;
    case schedule::PolicyKind::Cyclical: p.params = cy; break;
    case schedule::PolicyKind::DecreasingCyclical: p.params = dc; break;
    case schedule::PolicyKind::WarmRestarts: p.params = wr; break;
  }
  return p;
}

Json network_to_json(const snn::NetworkSpec& n) {
  Json j;
  j["timesteps"] = n.timesteps;
  j["n_classes"] = n.n_classes;
  j["surrogate_width"] = n.surrogate.width;
  j["lif"] = {{"v_rest", n.lif.v_rest}, {"tau", n.lif.tau}, {"r_in", n.lif.r_in}};
  Json layers = Json::array();
  for (const auto& l : n.layers) {
    if (const auto* d = std::get_if<snn::DenseLayer>(&l)) {
      layers.push_back({{"type", "dense"}, {"in_features", d->in_features}, {"out_features", d->out_features}});
    } else {
      const auto& c = std::get<snn::Conv2dLayer>(l);
      layers.push_back({{"type", "conv2d"},
                        {"in_channels", c.in_channels},
                        {"out_channels", c.out_channels},
                        {"kernel", c.kernel},
                        {"stride", c.stride}});
    }
  }
  j["layers"] = std::move(layers);
  return j;
}

Json train_to_json(const trainer::TrainConfig& t) {
  Json j;
  j["epochs"] = t.epochs;
  j["batch_size"] = t.batch_size;
  j["v_th"] = t.v_th;
  j["early_stop"] = t.early_stop;
  j["stability"] = {{"window", t.stability.window}, {"acc_th", t.stability.acc_th}};
  j["stability_source"] = t.stability_source == trainer::AccuracySource::Test ? "test" : "train";
  j["accumulation"] = accumulation_name(t.accumulation);
  j["threads"] = t.threads;
  j["clock"] = t.clock == trainer::ClockKind::Wall ? "wall" : "nominal";
  j["nominal_epoch_seconds"] = t.nominal_epoch_seconds;
  j["policy"] = policy_to_json(t.policy);
  return j;
}

ExperimentConfig default_config() {
  ExperimentConfig c;
  c.network = snn::default_spec(c.dataset.synthetic.height, c.dataset.synthetic.width);
  c.train.epochs = 60;
  c.train.seed = c.seed;
  // Measured wall time would make reruns differ; opt in with clock=wall.
  c.train.clock = trainer::ClockKind::Nominal;
  c.train.policy = schedule::preset(schedule::PolicyKind::ExponentialDecay, c.train.epochs);
  c.train.policy.init_lr = 1e-2;
  return c;
}

void apply_override(Json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ValidationError({"--set " + assignment + ": expected key=value"});
  }
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  Json value = Json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;

  Json* node = &doc;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (part.empty()) throw ValidationError({"--set " + assignment + ": empty key segment"});
    if (!node->is_object()) {
      if (!node->is_null()) throw ValidationError({"--set " + assignment + ": '" + part + "' is not inside an object"});
      *node = Json::object();
    }
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  *node = std::move(value);
}

ExperimentConfig parse_config(const Json& doc) {
  std::vector<std::string> errors;
  ExperimentConfig c = default_config();
  Reader root(&doc, "", errors);
  root.get("seed", c.seed);
  std::string out_dir;
  root.get("output_dir", out_dir);
  c.output_dir = out_dir;

  {
    Reader d = root.child("dataset");
    d.get_enum("source", c.dataset.source, {{"synthetic", DatasetSource::Synthetic}, {"file", DatasetSource::File}});
    std::string path;
    d.get("path", path);
    c.dataset.path = path;
    d.get("train_fraction", c.dataset.train_fraction);
    c.dataset.synthetic = read_synthetic(d.child("synthetic"));
    d.finish();
  }
  c.dataset.synthetic.seed = c.seed;

  c.network = read_network(root.child("network"), errors);
  c.network.input.height = c.dataset.synthetic.height;
  c.network.input.width = c.dataset.synthetic.width;

  {
    Reader t = root.child("train");
    t.get("epochs", c.train.epochs);
    t.get("batch_size", c.train.batch_size);
    t.get("v_th", c.train.v_th);
    t.get("early_stop", c.train.early_stop);
    {
      Reader s = t.child("stability");
      s.get("window", c.train.stability.window);
      s.get("acc_th", c.train.stability.acc_th);
      s.finish();
    }
    t.get_enum("stability_source", c.train.stability_source,
               {{"test", trainer::AccuracySource::Test}, {"train", trainer::AccuracySource::Train}});
    t.get_enum("accumulation", c.train.accumulation,
               {{"binary", events::AccumulationMode::Binary}, {"count", events::AccumulationMode::Count}});
    t.get("threads", c.train.threads);
    t.get_enum("clock", c.train.clock, {{"wall", trainer::ClockKind::Wall}, {"nominal", trainer::ClockKind::Nominal}});
    t.get("nominal_epoch_seconds", c.train.nominal_epoch_seconds);
    if (const Json* p = t.raw("policy")) {
      c.train.policy = policy_from_json(*p, c.train.epochs, errors, t.path("policy"));
    } else {
      c.train.policy.epochs = c.train.epochs;
    }
    t.finish();
  }
  c.train.seed = c.seed;
  c.network.lif.v_th = c.train.v_th;

  {
    Reader k = root.child("carbon");
    k.get("p_cpu_w", c.carbon.power.p_cpu_w);
    k.get("p_mem_w", c.carbon.power.p_mem_w);
    k.get("p_gpu_w", c.carbon.power.p_gpu_w);
    k.get("gpu_count", c.carbon.power.gpu_count);
    k.get_enum("mode", c.carbon.mode,
               {{"full", carbon::AccountingMode::Full}, {"gpu-only", carbon::AccountingMode::GpuOnly}});
    k.finish();
  }
  {
    Reader s = root.child("sweep");
    s.get("learning_rates", c.sweep.learning_rates);
    s.get("margin", c.sweep.margin);
    s.finish();
  }
  root.finish();

  // Semantic checks run on whatever parsed, so one pass reports everything.
  {
    const auto& sp = c.dataset.synthetic;
    if (c.dataset.source == DatasetSource::File) {
      if (c.dataset.path.empty()) errors.emplace_back("dataset.path: required when source is \"file\"");
      else if (!std::filesystem::exists(c.dataset.path))
        errors.push_back("dataset.path: " + c.dataset.path.string() + " does not exist");
    } else {
      if (sp.n_samples < 4 || sp.n_samples % 2 != 0)
        errors.emplace_back("dataset.synthetic.n_samples: must be even and >= 4");
      if (sp.width < 1 || sp.height < 1 || sp.width > 65535 || sp.height > 65535)
        errors.emplace_back("dataset.synthetic: width and height must be in [1, 65535]");
      if (sp.duration_us < 1) errors.emplace_back("dataset.synthetic.duration_us: must be >= 1");
      if (sp.min_events < 1 || sp.max_events < sp.min_events)
        errors.emplace_back("dataset.synthetic: need 1 <= min_events <= max_events");
      if (!(sp.noise_fraction >= 0.0 && sp.noise_fraction <= 1.0))
        errors.emplace_back("dataset.synthetic.noise_fraction: must be in [0, 1]");
    }
    if (!(c.dataset.train_fraction > 0.0 && c.dataset.train_fraction < 1.0))
      errors.emplace_back("dataset.train_fraction: must be in (0, 1)");
    prefix(errors, snn::validate(c.network), "network");
    for (auto& v : trainer::validate(c.train)) errors.push_back(std::move(v));
    for (const char* f : {"p_cpu_w", "p_mem_w", "p_gpu_w"}) {
      const double v = f[2] == 'c' ? c.carbon.power.p_cpu_w : f[2] == 'm' ? c.carbon.power.p_mem_w : c.carbon.power.p_gpu_w;
      if (!(v >= 0.0) || !std::isfinite(v)) errors.push_back(std::string("carbon.") + f + ": must be finite and >= 0");
    }
    if (c.carbon.power.gpu_count < 0) errors.emplace_back("carbon.gpu_count: must be >= 0");
    if (c.sweep.learning_rates.empty()) errors.emplace_back("sweep.learning_rates: must not be empty");
    for (double lr : c.sweep.learning_rates) {
      if (!(lr > 0.0) || !std::isfinite(lr)) {
        errors.emplace_back("sweep.learning_rates: every rate must be positive");
        break;
      }
    }
    if (!(c.sweep.margin >= 0.0)) errors.emplace_back("sweep.margin: must be >= 0");
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  Json doc = Json::object();
  if (!path.empty()) {
    std::ifstream f(path);
    if (!f) throw ValidationError({"cannot read config file " + path.string()});
    std::stringstream ss;
    ss << f.rdbuf();
    try {
      doc = Json::parse(ss.str());
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError({path.string() + ": invalid JSON: " + e.what()});
    }
  }
  std::vector<std::string> errors;
  for (const auto& o : overrides) {
    try {
      apply_override(doc, o);
    } catch (const ValidationError& e) {
      for (const auto& v : e.violations()) errors.push_back(v);
    }
  }
  if (!errors.empty()) throw ValidationError(std::move(errors));
  return parse_config(doc);
}

Json to_json(const ExperimentConfig& c) {
  Json j;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir.string();
  const auto& s = c.dataset.synthetic;
  j["dataset"] = {{"source", c.dataset.source == DatasetSource::Synthetic ? "synthetic" : "file"},
                  {"path", c.dataset.path.string()},
                  {"train_fraction", c.dataset.train_fraction},
                  {"synthetic",
                   {{"n_samples", s.n_samples},
                    {"width", s.width},
                    {"height", s.height},
                    {"duration_us", s.duration_us},
                    {"min_events", s.min_events},
                    {"max_events", s.max_events},
                    {"noise_fraction", s.noise_fraction}}}};
  j["network"] = network_to_json(c.network);
  j["train"] = train_to_json(c.train);
  j["carbon"] = {{"p_cpu_w", c.carbon.power.p_cpu_w},
                 {"p_mem_w", c.carbon.power.p_mem_w},
                 {"p_gpu_w", c.carbon.power.p_gpu_w},
                 {"gpu_count", c.carbon.power.gpu_count},
                 {"mode", c.carbon.mode == carbon::AccountingMode::Full ? "full" : "gpu-only"}};
  j["sweep"] = {{"learning_rates", c.sweep.learning_rates}, {"margin", c.sweep.margin}};
  return j;
}

std::filesystem::path resolve_output_dir(const ExperimentConfig& cfg,
                                         const std::optional<std::filesystem::path>& cli_out) {
  if (cli_out && !cli_out->empty()) return *cli_out;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  if (const char* env = std::getenv(kOutputRootEnv); env && *env) return env;
  return "snntrain-out";
}

events::Split load_dataset(const ExperimentConfig& cfg) {
  std::vector<events::EventSample> samples;
  if (cfg.dataset.source == DatasetSource::File) {
    if (!std::filesystem::is_regular_file(cfg.dataset.path))
      throw ValidationError({"dataset.path: no such file: " + cfg.dataset.path.string()});
    samples = events::load_events(cfg.dataset.path);
    if (samples.empty()) throw ValidationError({"dataset.path: container holds no samples"});
    const auto& first = samples.front();
    if (first.width != cfg.network.input.width || first.height != cfg.network.input.height) {
      throw ValidationError({"dataset: sample size " + std::to_string(first.width) + "x" +
                             std::to_string(first.height) + " does not match network input " +
                             std::to_string(cfg.network.input.width) + "x" + std::to_string(cfg.network.input.height) +
                             " (set dataset.synthetic.width/height)"});
    }
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (auto err = events::check_sample(samples[i], cfg.network.n_classes); !err.empty())
        throw ValidationError({"dataset: sample " + std::to_string(i) + ": " + err});
    }
  } else {
    samples = events::generate_synthetic_dataset(cfg.dataset.synthetic);
  }
  return events::split_dataset(samples, cfg.dataset.train_fraction, derive_seed(cfg.seed, 0x5911u));
}

}  // namespace snntrain::experiment
