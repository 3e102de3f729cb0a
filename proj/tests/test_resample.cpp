#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "test_support.hpp"
#include "uavtype/resample.hpp"
#include "uavtype/synth.hpp"

using namespace uavtype;
using testsupport::error_code_of;

namespace {

constexpr std::uint64_t kSec = 1'000'000;

FeatureSeries ramp(int first_s, int last_s) {
  FeatureSeries s;
  for (int t = first_s; t <= last_s; ++t) {
    s.timestamps.push_back(static_cast<std::uint64_t>(t) * kSec);
    s.values.push_back(t);
  }
  return s;
}

std::vector<double> column(const SampledMatrix& m, int f = 0) {
  std::vector<double> v(static_cast<std::size_t>(m.values.rows()));
  for (Eigen::Index r = 0; r < m.values.rows(); ++r) v[static_cast<std::size_t>(r)] = m.values(r, f);
  return v;
}

SampledInstance instance(std::vector<std::vector<double>> rows, std::vector<std::vector<int>> mask) {
  SampledInstance s;
  s.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  s.observed.resize(s.values.rows(), s.values.cols());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[0].size(); ++c) {
      s.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
      s.observed(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = static_cast<std::uint8_t>(mask[r][c]);
    }
  s.label = VehicleType::Quadrotor;
  return s;
}

}  // namespace

TEST_CASE("global time range") {
  const std::vector<FeatureSeries> one = {ramp(3, 9)};
  CHECK(global_time_range(one).t_min == 3 * kSec);
  CHECK(global_time_range(one).t_max == 9 * kSec);
  const std::vector<FeatureSeries> two = {ramp(2, 8), ramp(0, 10), FeatureSeries{}};
  CHECK(global_time_range(two).t_min == 0);
  CHECK(global_time_range(two).t_max == 10 * kSec);
  CHECK(error_code_of([] { global_time_range(std::vector<FeatureSeries>(2)); }) == ErrorCode::AllEmpty);
  const std::vector<FeatureSeries> instant = {ramp(4, 4)};
  CHECK(error_code_of([&] { average_sample(instant, 3); }) == ErrorCode::DegenerateRange);
}

TEST_CASE("average sampling examples") {
  FeatureSeries constant = ramp(0, 10);
  std::fill(constant.values.begin(), constant.values.end(), 7.0);
  for (std::size_t n : {1u, 3u, 7u})
    CHECK(column(average_sample(std::vector{constant}, n)) == std::vector<double>(n, 7.0));

  CHECK(column(average_sample(std::vector{ramp(0, 10)}, 2)) == std::vector<double>{2.0, 7.5});

  // samples at 4.0, 4.5, 5.0, 5.5 s; a sample at exactly 6 s would open bin 3
  FeatureSeries inner;
  for (std::uint64_t t = 8; t < 12; ++t) {
    inner.timestamps.push_back(t * kSec / 2);
    inner.values.push_back(static_cast<double>(t) / 2);
  }
  const std::vector<FeatureSeries> partial = {ramp(0, 10), inner};
  const SampledMatrix m = average_sample(partial, 5);
  CHECK(column(m, 1) == std::vector<double>{0, 0, 4.75, 0, 0});
  CHECK(m.observed(2, 1) == 1);
  CHECK(m.observed(0, 1) == 0);
  CHECK(m.observed(4, 1) == 0);
}

TEST_CASE("fixed window examples") {
  CHECK(column(fixed_window_sample(std::vector{ramp(0, 20)}, 2, 2.0)) == std::vector<double>{1.0, 11.0});

  FeatureSeries constant = ramp(0, 20);
  std::fill(constant.values.begin(), constant.values.end(), -3.5);
  for (double w : {0.5, 1.0, 3.0, 100.0})
    for (double v : column(fixed_window_sample(std::vector{constant}, 4, w))) CHECK((v == -3.5 || v == 0.0));

  const std::vector<FeatureSeries> flight = {ramp(0, 20)};
  CHECK(fixed_window_sample(flight, 2, 10.0).values == average_sample(flight, 2).values);
  CHECK(fixed_window_sample(flight, 2, 30.0).values == average_sample(flight, 2).values);
  CHECK(error_code_of([&] { fixed_window_sample(flight, 2, 0.0); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("both methods match the brute-force oracle") {
  std::mt19937_64 rng(99);
  int checked = 0;
  while (checked < 200) {
    const std::vector<FeatureSeries> flight = oracle::random_flight(rng);
    const TimeRange range = global_time_range(flight);
    if (range.t_min == range.t_max) continue;
    const std::size_t n = 1 + rng() % 12;
    CHECK(average_sample(flight, n).values == oracle::brute_force_bins(flight, n));

    const std::uint64_t window_us = 1 + rng() % 3'000'000;
    const SampledMatrix fw = fixed_window_sample(flight, n, static_cast<double>(window_us) / 1e6);
    CHECK(fw.values == oracle::brute_force_bins(flight, n, window_us));

    const double width_s = static_cast<double>(range.t_max - range.t_min) / static_cast<double>(n) / 1e6;
    CHECK(fixed_window_sample(flight, n, width_s).values == average_sample(flight, n).values);
    ++checked;
  }
}

TEST_CASE("average sampling preserves mass and order") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::vector<FeatureSeries> flight = oracle::random_flight(rng);
    const TimeRange range = global_time_range(flight);
    if (range.t_min == range.t_max) continue;
    const std::size_t n = 1 + rng() % 10;
    const SampledMatrix m = average_sample(flight, n);
    CHECK(m.values.rows() == static_cast<Eigen::Index>(n));
    CHECK(m.values.cols() == static_cast<Eigen::Index>(flight.size()));
    for (std::size_t f = 0; f < flight.size(); ++f) {
      // recount per-bin sample counts with the oracle's ones column
      FeatureSeries ones = flight[f];
      std::fill(ones.values.begin(), ones.values.end(), 1.0);
      std::vector<FeatureSeries> probe = flight;
      probe[f] = ones;
      const Eigen::MatrixXd occupied = oracle::brute_force_bins(probe, n);
      double raw = 0.0, abs_raw = 0.0;
      for (double v : flight[f].values) raw += v, abs_raw += std::abs(v);
      double rebuilt = 0.0;
      for (std::size_t b = 0; b < n; ++b) {
        std::size_t count = 0;
        const auto lo = static_cast<unsigned __int128>(b) * (range.t_max - range.t_min);
        for (std::uint64_t t : flight[f].timestamps) {
          const auto off = static_cast<unsigned __int128>(t - range.t_min) * n;
          const auto hi = lo + (range.t_max - range.t_min);
          if (off >= lo && (off < hi || (b + 1 == n && off == hi))) ++count;
        }
        CHECK((count > 0) == (occupied(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(f)) == 1.0));
        rebuilt += m.values(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(f)) * static_cast<double>(count);
      }
      CHECK(std::abs(rebuilt - raw) <= 1e-9 * std::max(1.0, abs_raw));
    }
  }

  const std::vector<FeatureSeries> ramp_flight = {ramp(0, 97)};
  for (std::size_t n : {3u, 10u, 50u}) {
    const auto a = column(average_sample(ramp_flight, n));
    const auto w = column(fixed_window_sample(ramp_flight, n, 0.5));
    CHECK(std::is_sorted(a.begin(), a.end()));
    // empty windows are zero-filled, so only the observed cells must climb
    std::vector<double> seen;
    for (double v : w)
      if (v != 0.0 || seen.empty()) seen.push_back(v);
    CHECK(std::is_sorted(seen.begin(), seen.end()));
  }
}

TEST_CASE("standardizer") {
  CHECK(error_code_of([] { Standardizer::fit({}); }) == ErrorCode::EmptySplit);

  std::vector<SampledInstance> train = {instance({{1, 5}, {3, 5}}, {{1, 1}, {1, 1}}),
                                        instance({{5, 5}, {100, 5}}, {{1, 1}, {0, 1}})};
  train[1].values(1, 0) = 0.0;  // zero-padded cell
  const Standardizer st = Standardizer::fit(train);
  CHECK(st.mean[0] == doctest::Approx(3.0));
  CHECK(st.stddev[0] == doctest::Approx(std::sqrt(8.0 / 3.0)));
  CHECK_FALSE(st.scaled[1]);

  std::vector<SampledInstance> test = {instance({{7, 5}, {9, 9}}, {{1, 1}, {0, 1}})};
  test[0].values(1, 0) = 0.0;
  st.apply(train);
  st.apply(test);

  double sum = 0, sq = 0;
  for (double v : {train[0].values(0, 0), train[0].values(1, 0), train[1].values(0, 0)}) sum += v, sq += v * v;
  CHECK(std::abs(sum / 3) < 1e-9);
  CHECK(std::abs(sq / 3 - 1.0) < 1e-9);
  CHECK(train[1].values(1, 0) == 0.0);
  CHECK(train[0].values(0, 1) == 5.0);  // constant feature untouched

  // the held-out instance uses the training statistics
  CHECK(test[0].values(0, 0) == doctest::Approx((7.0 - 3.0) / std::sqrt(8.0 / 3.0)));
  CHECK(test[0].values(1, 0) == 0.0);
  CHECK(test[0].values(1, 1) == 9.0);
}

TEST_CASE("dataset assembly and serialization") {
  std::vector<FlightLog> corpus;
  for (VehicleType type : {VehicleType::Quadrotor, VehicleType::FixedWing, VehicleType::Hexarotor}) {
    SynthSpec spec;
    spec.vehicle_type = type;
    spec.duration_s = 30.0;
    corpus.push_back(generate_flight(spec, std::string(to_string(type))));
  }
  corpus[1].topics.erase({"battery_status", 0});

  SamplingConfig cfg;
  cfg.n_intervals = 20;
  const Dataset ds = build_dataset(corpus, baseline_declaration().base_subset(), cfg);
  REQUIRE(ds.instances.size() == 2);
  REQUIRE(ds.skipped.size() == 1);
  CHECK(ds.skipped[0].source_id == "fixed_wing");
  CHECK(ds.feature_names.size() == 9);
  for (const auto& inst : ds.instances) {
    CHECK(inst.values.rows() == 20);
    CHECK(inst.values.cols() == 9);
    CHECK(inst.values.allFinite());
  }
  CHECK(ds.class_counts() == std::array<std::size_t, kNumClasses>{1, 0, 1});

  testsupport::TempDir dir;
  write_dataset(ds, dir / "ds.bin");
  const Dataset back = read_dataset(dir / "ds.bin");
  CHECK(back.sampling == ds.sampling);
  CHECK(back.feature_names == ds.feature_names);
  CHECK(back.instances == ds.instances);
  std::vector<std::uint8_t> bytes = encode_dataset(ds);
  bytes[30] ^= 0x40;
  CHECK(error_code_of([&] { decode_dataset(bytes); }) == ErrorCode::ChecksumFailure);
}
