#include "snntrain/snn.hpp"

#include <algorithm>
#include <cmath>

#include "snntrain/error.hpp"
#include "snntrain/rng.hpp"

namespace snntrain::snn {

std::vector<std::string> validate(const LifParams& p) {
  std::vector<std::string> out;
  if (!std::isfinite(p.v_rest) || !std::isfinite(p.v_th)) out.emplace_back("lif: potentials must be finite");
  if (!(p.tau > 0.0) || !std::isfinite(p.tau)) out.emplace_back("lif: tau must be positive");
  if (!(p.v_th > p.v_rest)) out.emplace_back("lif: v_th must exceed v_rest");
  if (!(p.r_in > 0.0) || !std::isfinite(p.r_in)) out.emplace_back("lif: r_in must be positive");
  return out;
}

LifStep lif_step(double v, double i_in, const LifParams& p) {
  if (!std::isfinite(v) || !std::isfinite(i_in)) throw NumericError("lif_step: non-finite membrane or input");
  const double inv_tau = 1.0 / p.tau;
  const double vc = v + inv_tau * (-(v - p.v_rest) + p.r_in * i_in);
  if (vc >= p.v_th) return {p.v_rest, 1, vc};
  return {vc, 0, vc};
}

double surrogate_grad(double v_candidate, const SurrogateConfig& cfg, const LifParams& p) {
  return std::fabs(v_candidate - p.v_th) <= 0.5 * cfg.width ? 1.0 / cfg.width : 0.0;
}

NetworkSpec default_spec(int height, int width) {
  NetworkSpec spec;
  spec.input = {events::FrameTensor::kChannels, height, width};
  spec.layers = {Conv2dLayer{2, 8, 5, 2}, DenseLayer{0, 32}, DenseLayer{0, 2}};
  spec.timesteps = 10;
  spec.n_classes = 2;
  return spec;
}

namespace {

struct GeometryResult {
  std::vector<LayerGeometry> layers;
  std::vector<std::string> errors;
};

GeometryResult compute_geometry(const NetworkSpec& spec) {
  GeometryResult r;
  auto& err = r.errors;
  if (spec.input.channels != events::FrameTensor::kChannels) {
    err.emplace_back("network: input channels must be 2 (one per polarity)");
  }
  if (spec.input.height < 1 || spec.input.width < 1) err.emplace_back("network: input dimensions must be positive");
  if (spec.timesteps < 1) err.emplace_back("network: timesteps must be >= 1");
  if (spec.n_classes < 2) err.emplace_back("network: n_classes must be >= 2");
  if (spec.layers.empty()) err.emplace_back("network: at least one layer is required");
  for (auto& e : validate(spec.lif)) err.push_back(std::move(e));
  if (!(spec.surrogate.width > 0.0) || !std::isfinite(spec.surrogate.width)) {
    err.emplace_back("surrogate: width must be positive");
  }

  int ch = spec.input.channels, h = spec.input.height, w = spec.input.width;
  bool shapes_ok = h > 0 && w > 0;
  for (std::size_t i = 0; i < spec.layers.size() && shapes_ok; ++i) {
    const std::string where = "layer " + std::to_string(i) + ": ";
    LayerGeometry g;
    g.in_channels = ch;
    g.in_height = h;
    g.in_width = w;
    if (const auto* c = std::get_if<Conv2dLayer>(&spec.layers[i])) {
      g.conv = true;
      g.kernel = c->kernel;
      g.stride = c->stride;
      g.out_channels = c->out_channels;
      if (c->in_channels != ch) {
        err.push_back(where + "conv in_channels " + std::to_string(c->in_channels) + " != incoming " + std::to_string(ch));
      }
      if (c->out_channels < 1 || c->kernel < 1 || c->stride < 1) {
        err.push_back(where + "conv channels, kernel and stride must be positive");
        shapes_ok = false;
        break;
      }
      if (c->kernel > h || c->kernel > w) {
        err.push_back(where + "conv kernel larger than its input");
        shapes_ok = false;
        break;
      }
      g.out_height = (h - c->kernel) / c->stride + 1;
      g.out_width = (w - c->kernel) / c->stride + 1;
    } else {
      const auto& d = std::get<DenseLayer>(spec.layers[i]);
      // Dense layers see the flattened input as [in][1][1].
      g.in_channels = ch * h * w;
      g.in_height = g.in_width = 1;
      if (d.in_features != 0 && static_cast<std::size_t>(d.in_features) != g.in_size()) {
        err.push_back(where + "dense in_features " + std::to_string(d.in_features) + " != incoming " +
                      std::to_string(g.in_size()));
      }
      if (d.out_features < 1) {
        err.push_back(where + "dense out_features must be positive");
        shapes_ok = false;
        break;
      }
      g.out_channels = d.out_features;
      g.out_height = g.out_width = 1;
    }
    r.layers.push_back(g);
    ch = g.out_channels;
    h = g.out_height;
    w = g.out_width;
  }
  if (shapes_ok && !r.layers.empty() && r.layers.back().out_size() != static_cast<std::size_t>(spec.n_classes)) {
    err.push_back("network: final layer width " + std::to_string(r.layers.back().out_size()) + " != n_classes " +
                  std::to_string(spec.n_classes));
  }
  return r;
}

kernels::LifConstants constants_of(const NetworkSpec& spec) {
  return {spec.lif.v_rest, spec.lif.v_th, 1.0 / spec.lif.tau, spec.lif.r_in, spec.surrogate.width};
}

// patches[pos][ic][ky][kx] for every output position.
void im2col(const double* x, const LayerGeometry& g, double* patches) {
  const std::size_t fan = g.fan_in();
  std::size_t pos = 0;
  for (int oy = 0; oy < g.out_height; ++oy) {
    for (int ox = 0; ox < g.out_width; ++ox, ++pos) {
      double* dst = patches + pos * fan;
      for (int ic = 0; ic < g.in_channels; ++ic) {
        for (int ky = 0; ky < g.kernel; ++ky) {
          const double* row = x + (static_cast<std::size_t>(ic) * static_cast<std::size_t>(g.in_height) +
                                   static_cast<std::size_t>(oy * g.stride + ky)) *
                                      static_cast<std::size_t>(g.in_width) +
                              static_cast<std::size_t>(ox * g.stride);
          std::copy(row, row + g.kernel, dst);
          dst += g.kernel;
        }
      }
    }
  }
}

void col2im_add(const double* patches, const LayerGeometry& g, double* x) {
  const std::size_t fan = g.fan_in();
  std::size_t pos = 0;
  for (int oy = 0; oy < g.out_height; ++oy) {
    for (int ox = 0; ox < g.out_width; ++ox, ++pos) {
      const double* src = patches + pos * fan;
      for (int ic = 0; ic < g.in_channels; ++ic) {
        for (int ky = 0; ky < g.kernel; ++ky) {
          double* row = x + (static_cast<std::size_t>(ic) * static_cast<std::size_t>(g.in_height) +
                             static_cast<std::size_t>(oy * g.stride + ky)) *
                                static_cast<std::size_t>(g.in_width) +
                        static_cast<std::size_t>(ox * g.stride);
          for (int kx = 0; kx < g.kernel; ++kx) row[kx] += src[kx];
          src += g.kernel;
        }
      }
    }
  }
}

std::size_t positions(const LayerGeometry& g) {
  return static_cast<std::size_t>(g.out_height) * static_cast<std::size_t>(g.out_width);
}

}  // namespace

std::vector<std::string> validate(const NetworkSpec& spec) { return compute_geometry(spec).errors; }

std::vector<LayerGeometry> resolve_geometry(const NetworkSpec& spec) {
  auto r = compute_geometry(spec);
  if (!r.errors.empty()) throw ValidationError(std::move(r.errors));
  return std::move(r.layers);
}

int predict_class(std::span<const double> spike_counts) {
  int best = 0;
  for (std::size_t c = 1; c < spike_counts.size(); ++c) {
    if (spike_counts[c] > spike_counts[static_cast<std::size_t>(best)]) best = static_cast<int>(c);
  }
  return best;
}

double rate_mse(const ForwardTrace& trace, int target, double loss_scale) {
  const std::size_t n = trace.spike_counts.size();
  double sum = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    const double rate = trace.spike_counts[c] / trace.timesteps;
    const double diff = rate - (static_cast<int>(c) == target ? 1.0 : 0.0);
    sum += diff * diff;
  }
  return loss_scale * sum / static_cast<double>(n);
}

Network::Network(NetworkSpec spec, std::uint64_t seed) : Network(std::move(spec), seed, true) {}

Network Network::zeros(NetworkSpec spec) { return Network(std::move(spec), 0, false); }

Network::Network(NetworkSpec spec, std::uint64_t seed, bool randomize)
    : spec_(std::move(spec)), geometry_(resolve_geometry(spec_)), seed_(seed) {
  weights_.resize(geometry_.size());
  for (std::size_t l = 0; l < geometry_.size(); ++l) {
    weights_[l].assign(geometry_[l].weight_count(), 0.0);
    if (!randomize) continue;
    Rng rng(derive_seed(seed, 0x1a7e0000ULL + l));
    const double bound = std::sqrt(1.0 / static_cast<double>(geometry_[l].fan_in()));
    for (double& w : weights_[l]) w = rng.uniform(-bound, bound);
  }
}

std::size_t Network::parameter_count() const {
  std::size_t n = 0;
  for (const auto& w : weights_) n += w.size();
  return n;
}

LayerArrays Network::zero_gradients() const {
  LayerArrays g(weights_.size());
  for (std::size_t l = 0; l < weights_.size(); ++l) g[l].assign(weights_[l].size(), 0.0);
  return g;
}

ForwardTrace Network::forward(const events::FrameTensor& input, SpikeMode mode) const {
  return forward(input, mode, kernels::active());
}

ForwardTrace Network::forward(const events::FrameTensor& input, SpikeMode mode, const kernels::KernelTable& k) const {
  if (input.timesteps() != spec_.timesteps || input.height() != spec_.input.height ||
      input.width() != spec_.input.width) {
    throw ArgumentError("input tensor shape does not match the network spec");
  }
  const auto T = static_cast<std::size_t>(spec_.timesteps);
  const auto lc = constants_of(spec_);
  const std::size_t L = geometry_.size();

  ForwardTrace tr;
  tr.timesteps = spec_.timesteps;
  tr.input = input.data();
  tr.v_cand.resize(L);
  tr.fired.resize(L);
  tr.output.resize(L);
  std::vector<std::vector<double>> membrane(L);
  std::size_t max_out = 0;
  std::size_t max_patches = 0;
  for (std::size_t l = 0; l < L; ++l) {
    const std::size_t n = geometry_[l].out_size();
    tr.v_cand[l].resize(T * n);
    tr.fired[l].resize(T * n);
    tr.output[l].resize(T * n);
    membrane[l].assign(n, spec_.lif.v_rest);
    max_out = std::max(max_out, n);
    if (geometry_[l].conv) max_patches = std::max(max_patches, positions(geometry_[l]) * geometry_[l].fan_in());
  }
  std::vector<double> current(max_out);
  std::vector<double> patches(max_patches);

  const double inv_width = 1.0 / spec_.surrogate.width;
  for (std::size_t t = 0; t < T; ++t) {
    const double* x = tr.input.data() + t * input.frame_size();
    for (std::size_t l = 0; l < L; ++l) {
      const LayerGeometry& g = geometry_[l];
      const std::size_t n = g.out_size();
      const double* w = weights_[l].data();
      if (g.conv) {
        const std::size_t fan = g.fan_in();
        const std::size_t npos = positions(g);
        im2col(x, g, patches.data());
        for (std::size_t oc = 0; oc < static_cast<std::size_t>(g.out_channels); ++oc) {
          for (std::size_t p = 0; p < npos; ++p) {
            current[oc * npos + p] = k.dot(w + oc * fan, patches.data() + p * fan, fan);
          }
        }
      } else {
        const std::size_t in = g.in_size();
        for (std::size_t o = 0; o < n; ++o) current[o] = k.dot(w + o * in, x, in);
      }
      double* vc = tr.v_cand[l].data() + t * n;
      double* fired = tr.fired[l].data() + t * n;
      double* out = tr.output[l].data() + t * n;
      k.lif_forward(lc, membrane[l].data(), current.data(), vc, fired, n);
      if (mode == SpikeMode::Relaxed) {
        for (std::size_t j = 0; j < n; ++j) out[j] = std::clamp((vc[j] - lc.v_th) * inv_width + 0.5, 0.0, 1.0);
      } else {
        std::copy(fired, fired + n, out);
      }
      x = out;
    }
  }

  const std::size_t C = geometry_.back().out_size();
  tr.spike_counts.assign(C, 0.0);
  for (std::size_t t = 0; t < T; ++t) {
    for (std::size_t c = 0; c < C; ++c) tr.spike_counts[c] += tr.output.back()[t * C + c];
  }
  return tr;
}

int Network::predict(const events::FrameTensor& input) const { return predict_class(forward(input).spike_counts); }

LayerArrays Network::backward(const ForwardTrace& trace, int target, double loss_scale) const {
  return backward(trace, target, loss_scale, kernels::active());
}

LayerArrays Network::backward(const ForwardTrace& trace, int target, double loss_scale,
                              const kernels::KernelTable& k) const {
  if (trace.empty()) throw StateError("backward called without a forward trace");
  if (trace.v_cand.size() != geometry_.size() || trace.timesteps != spec_.timesteps) {
    throw StateError("forward trace does not belong to this network");
  }
  if (target < 0 || target >= spec_.n_classes) throw ArgumentError("target class out of range");

  const auto T = static_cast<std::size_t>(spec_.timesteps);
  const auto lc = constants_of(spec_);
  const std::size_t L = geometry_.size();
  LayerArrays grads = zero_gradients();

  // d loss / d output spike of the last layer, identical at every timestep.
  const std::size_t C = geometry_.back().out_size();
  std::vector<double> grad_out(T * C);
  for (std::size_t c = 0; c < C; ++c) {
    const double rate = trace.spike_counts[c] / static_cast<double>(T);
    const double diff = rate - (static_cast<int>(c) == target ? 1.0 : 0.0);
    const double g = loss_scale * 2.0 * diff / (static_cast<double>(C) * static_cast<double>(T));
    for (std::size_t t = 0; t < T; ++t) grad_out[t * C + c] = g;
  }

  std::vector<double> grad_current;
  std::vector<double> grad_v;
  std::vector<double> grad_in;
  std::vector<double> patches;
  std::vector<double> grad_patches;
  for (std::size_t li = L; li-- > 0;) {
    const LayerGeometry& g = geometry_[li];
    const std::size_t n = g.out_size();
    const std::size_t in = g.in_size();

    grad_current.assign(T * n, 0.0);
    grad_v.assign(n, 0.0);
    for (std::size_t t = T; t-- > 0;) {
      k.lif_backward(lc, grad_out.data() + t * n, grad_v.data(), trace.v_cand[li].data() + t * n,
                     trace.fired[li].data() + t * n, grad_current.data() + t * n, n);
    }

    const bool need_input_grad = li > 0;
    if (need_input_grad) grad_in.assign(T * in, 0.0);
    const double* w = weights_[li].data();
    double* dw = grads[li].data();
    for (std::size_t t = 0; t < T; ++t) {
      const double* x = li == 0 ? trace.input.data() + t * in : trace.output[li - 1].data() + t * in;
      const double* gc = grad_current.data() + t * n;
      if (g.conv) {
        const std::size_t fan = g.fan_in();
        const std::size_t npos = positions(g);
        patches.resize(npos * fan);
        im2col(x, g, patches.data());
        if (need_input_grad) grad_patches.assign(npos * fan, 0.0);
        for (std::size_t oc = 0; oc < static_cast<std::size_t>(g.out_channels); ++oc) {
          for (std::size_t p = 0; p < npos; ++p) {
            const double gi = gc[oc * npos + p];
            if (gi == 0.0) continue;
            k.axpy(gi, patches.data() + p * fan, dw + oc * fan, fan);
            if (need_input_grad) k.axpy(gi, w + oc * fan, grad_patches.data() + p * fan, fan);
          }
        }
        if (need_input_grad) col2im_add(grad_patches.data(), g, grad_in.data() + t * in);
      } else {
        for (std::size_t o = 0; o < n; ++o) {
          const double gi = gc[o];
          if (gi == 0.0) continue;
          k.axpy(gi, x, dw + o * in, in);
          if (need_input_grad) k.axpy(gi, w + o * in, grad_in.data() + t * in, in);
        }
      }
    }
    if (need_input_grad) grad_out.swap(grad_in);
  }
  return grads;
}

void update_weights(LayerArrays& weights, const LayerArrays& grad_sum, double lr, int batch_size,
                    const kernels::KernelTable& k) {
  if (batch_size < 1) throw ArgumentError("batch size must be >= 1");
  if (weights.size() != grad_sum.size()) throw ArgumentError("gradient layer count does not match weights");
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].size() != grad_sum[l].size()) throw ArgumentError("gradient shape does not match weights");
  }
  const double step = -lr / static_cast<double>(batch_size);
  if (step == 0.0) return;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    k.axpy(step, grad_sum[l].data(), weights[l].data(), weights[l].size());
  }
}

void accumulate(LayerArrays& dst, const LayerArrays& src, const kernels::KernelTable& k) {
  if (dst.size() != src.size()) throw ArgumentError("gradient layer count mismatch");
  for (std::size_t l = 0; l < dst.size(); ++l) {
    if (dst[l].size() != src[l].size()) throw ArgumentError("gradient shape mismatch");
    k.axpy(1.0, src[l].data(), dst[l].data(), dst[l].size());
  }
}

}  // namespace snntrain::snn
