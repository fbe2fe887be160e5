#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "doctest.h"
#include "snntrain/error.hpp"
#include "snntrain/events.hpp"

using namespace snntrain;
using namespace snntrain::events;

namespace {

SyntheticParams small(std::uint64_t seed = 7, int n = 100) {
  SyntheticParams p;
  p.seed = seed;
  p.n_samples = n;
  return p;
}

}  // namespace

TEST_CASE("synthetic dataset is deterministic and balanced") {
  const auto a = generate_synthetic_dataset(small());
  const auto b = generate_synthetic_dataset(small());
  CHECK(encode_events(a) == encode_events(b));
  const auto c = generate_synthetic_dataset(small(8));
  CHECK(encode_events(a) != encode_events(c));

  int ones = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].label == i % 2);
    ones += a[i].label;
    CHECK(check_sample(a[i]).empty());
    CHECK(a[i].events.size() >= 200);
    CHECK(a[i].events.size() <= 400);
    for (std::size_t k = 1; k < a[i].events.size(); ++k) CHECK(a[i].events[k - 1].t <= a[i].events[k].t);
  }
  CHECK(ones == 50);
}

TEST_CASE("car samples carry a moving, spatially coherent motif") {
  // Split each sample in time halves and compare the centroid of positive
  // events: a bar translates, background noise does not move on average.
  const auto ds = generate_synthetic_dataset(small(7, 200));
  double car_shift = 0.0, bg_shift = 0.0;
  double car_spread = 0.0, bg_spread = 0.0;
  for (const auto& s : ds) {
    double sx[2] = {0, 0}, sy[2] = {0, 0}, n[2] = {0, 0};
    double mx = 0, my = 0, mxx = 0, myy = 0;
    for (const auto& e : s.events) {
      const int h = e.t * 2 < s.duration_us ? 0 : 1;
      sx[h] += e.x;
      sy[h] += e.y;
      n[h] += 1;
      mx += e.x;
      my += e.y;
      mxx += double(e.x) * e.x;
      myy += double(e.y) * e.y;
    }
    const double N = static_cast<double>(s.events.size());
    const double shift = std::hypot(sx[1] / n[1] - sx[0] / n[0], sy[1] / n[1] - sy[0] / n[0]);
    const double spread = std::min(mxx / N - (mx / N) * (mx / N), myy / N - (my / N) * (my / N));
    (s.label ? car_shift : bg_shift) += shift;
    (s.label ? car_spread : bg_spread) += spread;
  }
  CHECK(car_shift > 3.0 * bg_shift);
  // Along the direction of travel the bar is thin at any instant but sweeps,
  // so at least one axis is narrower than uniform noise.
  CHECK(car_spread < bg_spread);
}

TEST_CASE("container round trip and error offsets") {
  const auto ds = generate_synthetic_dataset(small(3, 10));
  const auto bytes = encode_events(ds);
  CHECK(bytes[0] == 'E');
  CHECK(bytes[4] == kContainerVersion);
  CHECK(decode_events(bytes) == ds);

  SUBCASE("truncation at every prefix is a ParseError or FormatError") {
    for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{6}, std::size_t{12}, bytes.size() / 2,
                            bytes.size() - 1}) {
      std::vector<std::uint8_t> t(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
      CHECK_THROWS(decode_events(t));
    }
    std::vector<std::uint8_t> t(bytes.begin(), bytes.end() - 1);
    try {
      decode_events(t);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.offset() <= t.size());
    }
  }
  SUBCASE("bad magic and version") {
    auto m = bytes;
    m[0] = 'X';
    CHECK_THROWS_AS(decode_events(m), FormatError);
    m = bytes;
    m[4] = 99;
    CHECK_THROWS_AS(decode_events(m), FormatError);
  }
  SUBCASE("invalid polarity reports its byte") {
    auto m = bytes;
    // First event of sample 0 starts after the 9-byte header and 13-byte
    // sample header; polarity is the event's last byte.
    const std::size_t pol = 9 + 13 + 8;
    m[pol] = 7;
    try {
      decode_events(m);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.offset() == pol);
    }
  }
  SUBCASE("trailing bytes") {
    auto m = bytes;
    m.push_back(0);
    CHECK_THROWS_AS(decode_events(m), ParseError);
  }
  SUBCASE("file round trip") {
    const auto path = std::filesystem::temp_directory_path() / "snntrain_events_test.evts";
    save_events(ds, path);
    CHECK(load_events(path) == ds);
    std::filesystem::remove(path);
  }
}

TEST_CASE("frame accumulation") {
  EventSample s{{{1, 2, 0, Polarity::Positive},
                 {1, 2, 5, Polarity::Positive},
                 {0, 0, 99'999, Polarity::Negative},
                 {3, 3, 50'000, Polarity::Negative}},
                1,
                100'000,
                4,
                4};
  CHECK(timestep_bin(0, 100'000, 10) == 0);
  CHECK(timestep_bin(9'999, 100'000, 10) == 0);
  CHECK(timestep_bin(10'000, 100'000, 10) == 1);
  CHECK(timestep_bin(99'999, 100'000, 10) == 9);

  const auto count = accumulate_frames(s, 10, AccumulationMode::Count);
  CHECK(count.at(0, 1, 2, 1) == 2.0);
  CHECK(count.at(9, 0, 0, 0) == 1.0);
  CHECK(count.at(5, 0, 3, 3) == 1.0);
  CHECK(count.sum() == 4.0);
  const auto binary = accumulate_frames(s, 10, AccumulationMode::Binary);
  CHECK(binary.at(0, 1, 2, 1) == 1.0);
  CHECK(binary.sum() == 3.0);

  SUBCASE("property: count frames conserve events for any T") {
    const auto ds = generate_synthetic_dataset(small(11, 20));
    for (int T : {1, 3, 10, 17}) {
      for (const auto& sample : ds) {
        CHECK(accumulate_frames(sample, T, AccumulationMode::Count).sum() ==
              static_cast<double>(sample.events.size()));
        CHECK(accumulate_frames(sample, T, AccumulationMode::Binary).sum() <=
              static_cast<double>(sample.events.size()));
      }
    }
  }
  EventSample bad = s;
  bad.events.push_back({9, 0, 0, Polarity::Positive});
  CHECK_THROWS_AS(accumulate_frames(bad, 10, AccumulationMode::Count), ArgumentError);
  CHECK_THROWS_AS(accumulate_frames(s, 0, AccumulationMode::Count), ArgumentError);
}

TEST_CASE("stratified split") {
  const auto ds = generate_synthetic_dataset(small(7, 250));
  const auto sp = split_dataset(ds, 0.8, 7);
  CHECK(sp.train.size() == 200);
  CHECK(sp.test.size() == 50);
  int train_ones = 0;
  for (const auto& s : sp.train) train_ones += s.label;
  CHECK(train_ones == 100);

  // Disjoint and exhaustive: compare serialized samples.
  std::multiset<std::vector<std::uint8_t>> all, parts;
  for (const auto& s : ds) all.insert(encode_events(std::span(&s, 1)));
  for (const auto& s : sp.train) parts.insert(encode_events(std::span(&s, 1)));
  for (const auto& s : sp.test) parts.insert(encode_events(std::span(&s, 1)));
  CHECK(all == parts);

  const auto again = split_dataset(ds, 0.8, 7);
  CHECK(encode_events(again.test) == encode_events(sp.test));
  const auto other = split_dataset(ds, 0.8, 8);
  CHECK(encode_events(other.test) != encode_events(sp.test));

  CHECK_THROWS_AS(split_dataset(ds, 1.0, 7), ArgumentError);
  CHECK_THROWS_AS(split_dataset(std::span(ds).first(3), 0.5, 7), ArgumentError);
}

TEST_CASE("metadata CSV") {
  const auto ds = generate_synthetic_dataset(small(7, 4));
  const auto csv = metadata_csv(ds);
  CHECK(csv.rfind("index,label,n_events,duration_us\n0,0,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
}
