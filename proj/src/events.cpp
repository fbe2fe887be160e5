#include "snntrain/events.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include "snntrain/error.hpp"
#include "snntrain/rng.hpp"

namespace snntrain::events {

std::string check_sample(const EventSample& s, int n_classes) {
  if (s.width == 0 || s.height == 0) return "sensor dimensions must be nonzero";
  if (s.duration_us == 0) return "duration must be nonzero";
  if (s.label >= n_classes) return "label " + std::to_string(s.label) + " outside class count";
  std::uint32_t prev = 0;
  for (std::size_t i = 0; i < s.events.size(); ++i) {
    const Event& e = s.events[i];
    if (e.x >= s.width || e.y >= s.height) return "event " + std::to_string(i) + " outside sensor bounds";
    if (e.t >= s.duration_us) return "event " + std::to_string(i) + " timestamp beyond sample duration";
    if (e.t < prev) return "event " + std::to_string(i) + " out of time order";
    if (e.polarity != Polarity::Negative && e.polarity != Polarity::Positive) {
      return "event " + std::to_string(i) + " has invalid polarity";
    }
    prev = e.t;
  }
  return {};
}

FrameTensor::FrameTensor(int timesteps, int height, int width)
    : timesteps_(timesteps), height_(height), width_(width) {
  if (timesteps < 1 || height < 1 || width < 1) throw ArgumentError("frame tensor dimensions must be positive");
  data_.assign(static_cast<std::size_t>(timesteps) * frame_size(), 0.0);
}

double FrameTensor::sum() const {
  double s = 0.0;
  for (double v : data_) s += v;
  return s;
}

int timestep_bin(std::uint32_t t, std::uint32_t duration_us, int timesteps) {
  return static_cast<int>((static_cast<std::uint64_t>(t) * static_cast<std::uint64_t>(timesteps)) / duration_us);
}

FrameTensor accumulate_frames(const EventSample& sample, int timesteps, AccumulationMode mode) {
  if (timesteps < 1) throw ArgumentError("timestep count must be >= 1");
  if (sample.width == 0 || sample.height == 0) throw ArgumentError("sensor dimensions must be nonzero");
  if (sample.duration_us == 0) throw ArgumentError("sample duration must be nonzero");

  FrameTensor frames(timesteps, sample.height, sample.width);
  for (const Event& e : sample.events) {
    if (e.x >= sample.width || e.y >= sample.height || e.t >= sample.duration_us) {
      throw ArgumentError("event outside sample bounds");
    }
    const int bin = timestep_bin(e.t, sample.duration_us, timesteps);
    double& cell = frames.at(bin, static_cast<int>(e.polarity), e.y, e.x);
    if (mode == AccumulationMode::Count) {
      cell += 1.0;
    } else {
      cell = 1.0;
    }
  }
  return frames;
}

namespace {

std::uint32_t draw_count(Rng& rng, const SyntheticParams& p) {
  const auto span = static_cast<std::uint64_t>(p.max_events - p.min_events + 1);
  return static_cast<std::uint32_t>(p.min_events) + static_cast<std::uint32_t>(rng.below(span));
}

Event noise_event(Rng& rng, const SyntheticParams& p) {
  Event e;
  e.x = static_cast<std::uint16_t>(rng.below(static_cast<std::uint64_t>(p.width)));
  e.y = static_cast<std::uint16_t>(rng.below(static_cast<std::uint64_t>(p.height)));
  e.t = static_cast<std::uint32_t>(rng.below(p.duration_us));
  e.polarity = rng.below(2) ? Polarity::Positive : Polarity::Negative;
  return e;
}

void sort_by_time(std::vector<Event>& events) {
  std::stable_sort(events.begin(), events.end(), [](const Event& a, const Event& b) { return a.t < b.t; });
}

EventSample background_sample(Rng& rng, const SyntheticParams& p) {
  EventSample s{{}, 0, p.duration_us, static_cast<std::uint16_t>(p.width), static_cast<std::uint16_t>(p.height)};
  const std::uint32_t n = draw_count(rng, p);
  s.events.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) s.events.push_back(noise_event(rng, p));
  sort_by_time(s.events);
  return s;
}

// A bar spanning part of the sensor translates across it at constant speed.
// Brightness increases on the leading edge (positive events) and decreases on
// the trailing edge (negative events).
EventSample car_sample(Rng& rng, const SyntheticParams& p) {
  EventSample s{{}, 1, p.duration_us, static_cast<std::uint16_t>(p.width), static_cast<std::uint16_t>(p.height)};
  const bool horizontal_motion = rng.below(2) == 0;  // bar is vertical, moves along x
  const int travel_extent = horizontal_motion ? p.width : p.height;
  const int along_extent = horizontal_motion ? p.height : p.width;

  const double bar_len = along_extent * rng.uniform(0.4, 0.8);
  const double bar_start = rng.uniform(0.0, along_extent - bar_len);
  const double thickness = rng.uniform(2.0, 4.0);
  // Cover between a third and the full extent during the sample.
  const double distance = travel_extent * rng.uniform(0.33, 1.0);
  const double origin = rng.uniform(0.0, travel_extent - distance);
  const bool forward = rng.below(2) == 0;

  const std::uint32_t n = draw_count(rng, p);
  s.events.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (rng.uniform() < p.noise_fraction) {
      s.events.push_back(noise_event(rng, p));
      continue;
    }
    Event e;
    e.t = static_cast<std::uint32_t>(rng.below(p.duration_us));
    const double progress = static_cast<double>(e.t) / p.duration_us;
    const double center = forward ? origin + distance * progress : origin + distance * (1.0 - progress);
    const bool leading = rng.below(2) == 0;
    const double edge = (leading == forward) ? center + 0.5 * thickness : center - 0.5 * thickness;
    const double across = edge + rng.uniform(-0.5, 0.5);
    const double along = bar_start + bar_len * rng.uniform();

    const int a = std::clamp(static_cast<int>(std::floor(across)), 0, travel_extent - 1);
    const int b = std::clamp(static_cast<int>(std::floor(along)), 0, along_extent - 1);
    e.x = static_cast<std::uint16_t>(horizontal_motion ? a : b);
    e.y = static_cast<std::uint16_t>(horizontal_motion ? b : a);
    e.polarity = leading ? Polarity::Positive : Polarity::Negative;
    s.events.push_back(e);
  }
  sort_by_time(s.events);
  return s;
}

}  // namespace

std::vector<EventSample> generate_synthetic_dataset(const SyntheticParams& p) {
  if (p.width < 1 || p.height < 1 || p.width > 65535 || p.height > 65535) {
    throw ArgumentError("sensor dimensions must lie in [1, 65535]");
  }
  if (p.duration_us == 0) throw ArgumentError("duration must be nonzero");
  if (p.n_samples < 2 || p.n_samples % 2 != 0) throw ArgumentError("sample count must be even and >= 2");
  if (p.min_events < 0 || p.max_events < p.min_events) throw ArgumentError("invalid event count range");
  if (!(p.noise_fraction >= 0.0 && p.noise_fraction <= 1.0)) throw ArgumentError("noise_fraction must lie in [0, 1]");

  std::vector<EventSample> out;
  out.reserve(static_cast<std::size_t>(p.n_samples));
  for (int i = 0; i < p.n_samples; ++i) {
    Rng rng(derive_seed(p.seed, static_cast<std::uint64_t>(i)));
    out.push_back(i % 2 == 0 ? background_sample(rng, p) : car_sample(rng, p));
  }
  return out;
}

namespace {

class Writer {
 public:
  void u8(std::uint8_t v) { buf_.push_back(v); }
  void u16(std::uint16_t v) {
    for (int i = 0; i < 2; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

  std::uint8_t u8(const char* field) {
    need(1, field);
    return bytes_[pos_++];
  }
  std::uint16_t u16(const char* field) {
    need(2, field);
    std::uint16_t v = static_cast<std::uint16_t>(bytes_[pos_] | (bytes_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(const char* field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    pos_ += 4;
    return v;
  }

 private:
  void need(std::size_t n, const char* field) const {
    if (remaining() < n) throw ParseError(std::string("truncated event container while reading ") + field, pos_);
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

constexpr std::size_t kEventRecordBytes = 9;

}  // namespace

std::vector<std::uint8_t> encode_events(std::span<const EventSample> samples) {
  Writer w;
  for (char c : kContainerMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u8(kContainerVersion);
  w.u32(static_cast<std::uint32_t>(samples.size()));
  for (const EventSample& s : samples) {
    w.u8(s.label);
    w.u32(s.duration_us);
    w.u16(s.width);
    w.u16(s.height);
    w.u32(static_cast<std::uint32_t>(s.events.size()));
    for (const Event& e : s.events) {
      w.u16(e.x);
      w.u16(e.y);
      w.u32(e.t);
      w.u8(static_cast<std::uint8_t>(e.polarity));
    }
  }
  return w.take();
}

std::vector<EventSample> decode_events(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  for (char c : kContainerMagic) {
    if (r.remaining() == 0) throw ParseError("truncated event container header", r.offset());
    if (r.u8("magic") != static_cast<std::uint8_t>(c)) throw FormatError("not an event container (bad magic)");
  }
  const std::uint8_t version = r.u8("version");
  if (version != kContainerVersion) {
    throw FormatError("unsupported event container version " + std::to_string(version));
  }
  const std::uint32_t count = r.u32("sample count");

  std::vector<EventSample> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::size_t sample_offset = r.offset();
    EventSample s;
    s.label = r.u8("label");
    s.duration_us = r.u32("duration");
    s.width = r.u16("width");
    s.height = r.u16("height");
    const std::uint32_t n = r.u32("event count");
    if (r.remaining() / kEventRecordBytes < n) {
      throw ParseError("event count exceeds remaining bytes in sample " + std::to_string(i), r.offset());
    }
    s.events.resize(n);
    for (Event& e : s.events) {
      e.x = r.u16("x");
      e.y = r.u16("y");
      e.t = r.u32("t");
      const std::uint8_t pol = r.u8("polarity");
      if (pol > 1) throw ParseError("invalid polarity byte", r.offset() - 1);
      e.polarity = static_cast<Polarity>(pol);
    }
    if (auto err = check_sample(s, 256); !err.empty()) {
      throw ParseError("sample " + std::to_string(i) + ": " + err, sample_offset);
    }
    out.push_back(std::move(s));
  }
  if (r.remaining() != 0) throw ParseError("trailing bytes after last sample", r.offset());
  return out;
}

void save_events(std::span<const EventSample> samples, const std::filesystem::path& path) {
  const auto bytes = encode_events(samples);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

std::vector<EventSample> load_events(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return decode_events(bytes);
}

std::string metadata_csv(std::span<const EventSample> samples) {
  std::string out = "index,label,n_events,duration_us\n";
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out += std::to_string(i) + ',' + std::to_string(samples[i].label) + ',' + std::to_string(samples[i].events.size()) +
           ',' + std::to_string(samples[i].duration_us) + '\n';
  }
  return out;
}

Split split_dataset(std::span<const EventSample> samples, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) throw ArgumentError("train_fraction must lie in (0, 1)");

  int max_label = -1;
  for (const auto& s : samples) max_label = std::max(max_label, static_cast<int>(s.label));
  std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(max_label + 1));
  for (std::size_t i = 0; i < samples.size(); ++i) by_class[samples[i].label].push_back(i);

  std::vector<bool> in_train(samples.size(), false);
  Rng rng(derive_seed(seed, 0x5b1d));
  for (auto& idx : by_class) {
    if (idx.empty()) continue;
    if (idx.size() < 2) throw ArgumentError("each present class needs at least two samples to split");
    rng.shuffle(std::span<std::size_t>(idx));
    auto k = static_cast<std::size_t>(std::llround(static_cast<double>(idx.size()) * train_fraction));
    k = std::clamp<std::size_t>(k, 1, idx.size() - 1);
    for (std::size_t j = 0; j < k; ++j) in_train[idx[j]] = true;
  }

  Split out;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    (in_train[i] ? out.train : out.test).push_back(samples[i]);
  }
  return out;
}

}  // namespace snntrain::events
