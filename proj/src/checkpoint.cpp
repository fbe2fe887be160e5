#include <bit>
#include <fstream>
#include <iterator>

#include "snntrain/error.hpp"
#include "snntrain/snn.hpp"

namespace snntrain::snn {
namespace {

class Encoder {
 public:
  void u8(std::uint8_t v) { out.push_back(v); }
  void u32(std::uint32_t v) { put(v, 4); }
  void i32(std::int32_t v) { put(static_cast<std::uint32_t>(v), 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }

  std::vector<std::uint8_t> out;

 private:
  void put(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
};

class Decoder {
 public:
  explicit Decoder(std::span<const std::uint8_t> b) : bytes(b) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::int32_t i32() { return static_cast<std::int32_t>(static_cast<std::uint32_t>(get(4))); }
  std::uint64_t u64() { return get(8); }
  double f64() { return std::bit_cast<double>(get(8)); }

  std::size_t pos = 0;
  std::span<const std::uint8_t> bytes;

 private:
  std::uint64_t get(int n) {
    if (bytes.size() - pos < static_cast<std::size_t>(n)) throw ParseError("truncated checkpoint", pos);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes[pos + static_cast<std::size_t>(i)]) << (8 * i);
    pos += static_cast<std::size_t>(n);
    return v;
  }
};

constexpr std::uint8_t kDenseTag = 0;
constexpr std::uint8_t kConvTag = 1;

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& cp) {
  const Network& net = cp.network;
  const NetworkSpec& s = net.spec();
  Encoder e;
  for (char c : kCheckpointMagic) e.u8(static_cast<std::uint8_t>(c));
  e.u8(kCheckpointVersion);
  e.i32(s.input.channels);
  e.i32(s.input.height);
  e.i32(s.input.width);
  e.i32(s.timesteps);
  e.i32(s.n_classes);
  e.f64(s.lif.v_rest);
  e.f64(s.lif.v_th);
  e.f64(s.lif.tau);
  e.f64(s.lif.r_in);
  e.f64(s.surrogate.width);
  e.u32(static_cast<std::uint32_t>(s.layers.size()));
  for (const auto& layer : s.layers) {
    if (const auto* d = std::get_if<DenseLayer>(&layer)) {
      e.u8(kDenseTag);
      e.i32(d->in_features);
      e.i32(d->out_features);
      e.i32(0);
      e.i32(0);
    } else {
      const auto& c = std::get<Conv2dLayer>(layer);
      e.u8(kConvTag);
      e.i32(c.in_channels);
      e.i32(c.out_channels);
      e.i32(c.kernel);
      e.i32(c.stride);
    }
  }
  e.u64(net.seed());
  e.u32(cp.epochs_completed);
  for (const auto& w : net.weights()) {
    e.u64(w.size());
    for (double v : w) e.f64(v);
  }
  return std::move(e.out);
}

Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes) {
  Decoder d(bytes);
  for (char c : kCheckpointMagic) {
    if (d.u8() != static_cast<std::uint8_t>(c)) throw FormatError("not a checkpoint (bad magic)");
  }
  if (const auto v = d.u8(); v != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(v));
  }
  NetworkSpec s;
  s.input.channels = d.i32();
  s.input.height = d.i32();
  s.input.width = d.i32();
  s.timesteps = d.i32();
  s.n_classes = d.i32();
  s.lif.v_rest = d.f64();
  s.lif.v_th = d.f64();
  s.lif.tau = d.f64();
  s.lif.r_in = d.f64();
  s.surrogate.width = d.f64();
  const std::uint32_t n_layers = d.u32();
  if (n_layers > 1024) throw ParseError("implausible layer count", d.pos - 4);
  for (std::uint32_t i = 0; i < n_layers; ++i) {
    const std::size_t at = d.pos;
    const std::uint8_t tag = d.u8();
    const std::int32_t a = d.i32(), b = d.i32(), c = d.i32(), e = d.i32();
    if (tag == kDenseTag) {
      s.layers.emplace_back(DenseLayer{a, b});
    } else if (tag == kConvTag) {
      s.layers.emplace_back(Conv2dLayer{a, b, c, e});
    } else {
      throw ParseError("unknown layer tag", at);
    }
  }
  const std::uint64_t seed = d.u64();
  const std::uint32_t epochs = d.u32();

  Network restored(s, seed);
  for (std::size_t l = 0; l < restored.weights().size(); ++l) {
    const std::size_t at = d.pos;
    const std::uint64_t n = d.u64();
    if (n != restored.weights()[l].size()) throw ParseError("weight count does not match layer shape", at);
    for (double& w : restored.weights()[l]) w = d.f64();
  }
  if (d.pos != bytes.size()) throw ParseError("trailing bytes after checkpoint", d.pos);
  return {std::move(restored), epochs};
}

void save_checkpoint(const Checkpoint& cp, const std::filesystem::path& path) {
  const auto bytes = encode_checkpoint(cp);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace snntrain::snn
