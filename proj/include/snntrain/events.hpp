#pragma once

// Event-camera samples, the on-disk container, and conversion of an event
// stream into per-timestep input frames.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace snntrain::events {

enum class Polarity : std::uint8_t { Negative = 0, Positive = 1 };

struct Event {
  std::uint16_t x = 0;
  std::uint16_t y = 0;
  std::uint32_t t = 0;  // microseconds from sample start
  Polarity polarity = Polarity::Positive;

  friend bool operator==(const Event&, const Event&) = default;
};

struct EventSample {
  std::vector<Event> events;  // sorted by t
  std::uint8_t label = 0;     // 0 background, 1 car
  std::uint32_t duration_us = 100'000;
  std::uint16_t width = 0;
  std::uint16_t height = 0;

  friend bool operator==(const EventSample&, const EventSample&) = default;
};

/// Returns a description of the first violated invariant, or empty.
std::string check_sample(const EventSample& s, int n_classes = 2);

/// Dense [T][2][height][width] tensor, row-major. Channel 0 holds
/// negative-polarity events, channel 1 positive.
class FrameTensor {
 public:
  static constexpr int kChannels = 2;

  FrameTensor() = default;
  FrameTensor(int timesteps, int height, int width);

  int timesteps() const noexcept { return timesteps_; }
  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::size_t frame_size() const noexcept {
    return static_cast<std::size_t>(kChannels) * static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }

  double& at(int t, int c, int y, int x) { return data_[index(t, c, y, x)]; }
  double at(int t, int c, int y, int x) const { return data_[index(t, c, y, x)]; }

  /// One timestep, flattened as [channel][y][x].
  std::span<const double> frame(int t) const {
    return {data_.data() + static_cast<std::size_t>(t) * frame_size(), frame_size()};
  }
  std::span<double> frame(int t) { return {data_.data() + static_cast<std::size_t>(t) * frame_size(), frame_size()}; }

  const std::vector<double>& data() const noexcept { return data_; }
  double sum() const;

 private:
  std::size_t index(int t, int c, int y, int x) const {
    return ((static_cast<std::size_t>(t) * kChannels + static_cast<std::size_t>(c)) * static_cast<std::size_t>(height_) +
            static_cast<std::size_t>(y)) *
               static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int timesteps_ = 0;
  int height_ = 0;
  int width_ = 0;
  std::vector<double> data_;
};

enum class AccumulationMode { Count, Binary };

/// Bin of an event: floor(t * timesteps / duration_us).
int timestep_bin(std::uint32_t t, std::uint32_t duration_us, int timesteps);

FrameTensor accumulate_frames(const EventSample& sample, int timesteps, AccumulationMode mode);

struct SyntheticParams {
  std::uint64_t seed = 7;
  int n_samples = 250;
  int width = 32;
  int height = 32;
  std::uint32_t duration_us = 100'000;
  int min_events = 200;
  int max_events = 400;
  double noise_fraction = 0.1;  // share of a car sample's events that are uniform noise
};

/// Balanced two-class dataset. Label 1 samples contain a moving bar, label 0
/// uniform noise at a matched event rate. Samples alternate 0/1 by index.
std::vector<EventSample> generate_synthetic_dataset(const SyntheticParams& p);

// Binary container, all integers little-endian:
//   "EVTS" | version u8 | sample count u32
//   per sample: label u8 | duration_us u32 | width u16 | height u16 | n_events u32
//               then n_events x { x u16 | y u16 | t u32 | polarity u8 }
inline constexpr char kContainerMagic[4] = {'E', 'V', 'T', 'S'};
inline constexpr std::uint8_t kContainerVersion = 1;

std::vector<std::uint8_t> encode_events(std::span<const EventSample> samples);
/// Throws ParseError on truncation or invalid records, FormatError on a bad
/// magic/version.
std::vector<EventSample> decode_events(std::span<const std::uint8_t> bytes);

void save_events(std::span<const EventSample> samples, const std::filesystem::path& path);
std::vector<EventSample> load_events(const std::filesystem::path& path);

/// `index,label,n_events,duration_us`
std::string metadata_csv(std::span<const EventSample> samples);

struct Split {
  std::vector<EventSample> train;
  std::vector<EventSample> test;
};

/// Stratified, seeded split. Each class contributes round(n_class * fraction)
/// samples to train, clamped so both partitions keep at least one per class.
Split split_dataset(std::span<const EventSample> samples, double train_fraction, std::uint64_t seed);

}  // namespace snntrain::events
