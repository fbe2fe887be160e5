#pragma once

// Layered leaky integrate-and-fire network trained with surrogate-gradient
// backpropagation through time.
//
// Each layer applies a linear map (dense or strided convolution, no bias) to
// the previous layer's spikes and integrates the result as input current:
//
//   v_cand = v + (1/tau) * (-(v - v_rest) + R * I)
//   spike  = v_cand >= v_th
//   v      = spike ? v_rest : v_cand
//
// Backward replaces d(spike)/d(v_cand) with a rectangular window of width `a`
// and height 1/a centred on v_th, and treats the reset as a constant (no
// gradient flows through the spike into the reset branch).

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "snntrain/events.hpp"
#include "snntrain/kernels.hpp"

namespace snntrain::snn {

struct LifParams {
  double v_rest = 0.0;
  double v_th = 0.4;
  double tau = 2.0;  // in timesteps
  double r_in = 5.0;  // input gain; at 1.0 the default network stays silent

  friend bool operator==(const LifParams&, const LifParams&) = default;
};

std::vector<std::string> validate(const LifParams& p);

struct LifStep {
  double v_next;
  int spike;
  double v_candidate;
};

/// One forward-Euler step. Throws NumericError on non-finite input.
LifStep lif_step(double v, double i_in, const LifParams& p);

struct SurrogateConfig {
  double width = 1.0;

  friend bool operator==(const SurrogateConfig&, const SurrogateConfig&) = default;
};

/// 1/width inside |v_candidate - v_th| <= width/2, else 0.
double surrogate_grad(double v_candidate, const SurrogateConfig& cfg, const LifParams& p);

struct DenseLayer {
  int in_features = 0;  // 0: take the previous layer's output size
  int out_features = 0;

  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

struct Conv2dLayer {
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 0;
  int stride = 1;

  friend bool operator==(const Conv2dLayer&, const Conv2dLayer&) = default;
};

using LayerSpec = std::variant<DenseLayer, Conv2dLayer>;

struct InputShape {
  int channels = events::FrameTensor::kChannels;
  int height = 32;
  int width = 32;

  friend bool operator==(const InputShape&, const InputShape&) = default;
};

struct NetworkSpec {
  InputShape input;
  std::vector<LayerSpec> layers;
  int timesteps = 10;
  int n_classes = 2;
  LifParams lif;
  SurrogateConfig surrogate;

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

/// Conv2d(2->8, k5, s2) -> Dense(32) -> Dense(n_classes), T=10.
NetworkSpec default_spec(int height = 32, int width = 32);

/// Shapes after inference of omitted dense input widths.
struct LayerGeometry {
  bool conv = false;
  int in_channels = 0, in_height = 0, in_width = 0;
  int out_channels = 0, out_height = 0, out_width = 0;
  int kernel = 0, stride = 1;

  std::size_t in_size() const {
    return static_cast<std::size_t>(in_channels) * static_cast<std::size_t>(in_height) *
           static_cast<std::size_t>(in_width);
  }
  std::size_t out_size() const {
    return static_cast<std::size_t>(out_channels) * static_cast<std::size_t>(out_height) *
           static_cast<std::size_t>(out_width);
  }
  std::size_t fan_in() const {
    return conv ? static_cast<std::size_t>(in_channels) * static_cast<std::size_t>(kernel * kernel) : in_size();
  }
  std::size_t weight_count() const { return static_cast<std::size_t>(out_channels) * fan_in(); }
};

/// Every violated invariant, empty when the spec is usable.
std::vector<std::string> validate(const NetworkSpec& spec);
/// Throws ValidationError.
std::vector<LayerGeometry> resolve_geometry(const NetworkSpec& spec);

enum class SpikeMode {
  Hard,
  // Layer outputs are clamp((v_cand - v_th)/a + 1/2, 0, 1), whose derivative
  // is exactly the rectangular surrogate. Resets still use the hard spike.
  // Only used to check gradients against finite differences.
  Relaxed,
};

/// Per-layer trajectories of one forward pass, each stored [T][neurons].
struct ForwardTrace {
  int timesteps = 0;
  std::vector<double> input;                   // [T][input size]
  std::vector<std::vector<double>> v_cand;     // per layer
  std::vector<std::vector<double>> fired;      // hard spikes, per layer
  std::vector<std::vector<double>> output;     // spikes passed downstream
  std::vector<double> spike_counts;            // per class, summed over T

  bool empty() const noexcept { return v_cand.empty(); }
};

using LayerArrays = std::vector<std::vector<double>>;

/// Argmax of spike counts, ties to the lowest index.
int predict_class(std::span<const double> spike_counts);

/// Mean over classes of (count/T - onehot)^2, times `loss_scale`.
double rate_mse(const ForwardTrace& trace, int target, double loss_scale = 1.0);

class Network {
 public:
  /// Uniform init in [-b, b], b = sqrt(1/fan_in), seeded per layer.
  Network(NetworkSpec spec, std::uint64_t seed);
  /// All weights zero.
  static Network zeros(NetworkSpec spec);

  const NetworkSpec& spec() const noexcept { return spec_; }
  const std::vector<LayerGeometry>& geometry() const noexcept { return geometry_; }
  std::uint64_t seed() const noexcept { return seed_; }

  LayerArrays& weights() noexcept { return weights_; }
  const LayerArrays& weights() const noexcept { return weights_; }
  std::size_t parameter_count() const;

  /// Throws ArgumentError when the tensor shape does not match the spec.
  ForwardTrace forward(const events::FrameTensor& input, SpikeMode mode = SpikeMode::Hard) const;
  ForwardTrace forward(const events::FrameTensor& input, SpikeMode mode, const kernels::KernelTable& k) const;

  int predict(const events::FrameTensor& input) const;

  /// Gradients of rate_mse w.r.t. every weight. Throws StateError on an empty
  /// trace.
  LayerArrays backward(const ForwardTrace& trace, int target, double loss_scale = 1.0) const;
  LayerArrays backward(const ForwardTrace& trace, int target, double loss_scale,
                       const kernels::KernelTable& k) const;

  LayerArrays zero_gradients() const;

  bool operator==(const Network& other) const {
    return spec_ == other.spec_ && seed_ == other.seed_ && weights_ == other.weights_;
  }

 private:
  Network(NetworkSpec spec, std::uint64_t seed, bool randomize);

  NetworkSpec spec_;
  std::vector<LayerGeometry> geometry_;
  std::uint64_t seed_ = 0;
  LayerArrays weights_;
};

/// w <- w - lr * (grad_sum / batch_size). Throws ArgumentError on a shape
/// mismatch or batch_size < 1.
void update_weights(LayerArrays& weights, const LayerArrays& grad_sum, double lr, int batch_size,
                    const kernels::KernelTable& k = kernels::active());

/// dst += src, shape-checked.
void accumulate(LayerArrays& dst, const LayerArrays& src, const kernels::KernelTable& k = kernels::active());

// Checkpoint: versioned binary blob of spec, seed, training progress and
// weights. Little-endian; doubles stored as their IEEE-754 bit patterns.
struct Checkpoint {
  Network network;
  std::uint32_t epochs_completed = 0;
};

inline constexpr char kCheckpointMagic[4] = {'S', 'N', 'N', 'C'};
inline constexpr std::uint8_t kCheckpointVersion = 1;

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& cp);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes);
void save_checkpoint(const Checkpoint& cp, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace snntrain::snn
