#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "test_support.hpp"
#include "uavtype/features.hpp"
#include "uavtype/synth.hpp"

using namespace uavtype;
using testsupport::error_code_of;

namespace {

const std::vector<double>& col(const FlightLog& log, const char* topic, const char* field) {
  return log.topic(topic)->find(field)->values;
}

/// Turn angles (degrees) between successive chords of `chord_m` path length.
std::vector<double> chord_turns(const FlightLog& log, double chord_m) {
  const auto& x = col(log, "vehicle_local_position", "x");
  const auto& y = col(log, "vehicle_local_position", "y");
  std::vector<std::pair<double, double>> pts = {{x[0], y[0]}};
  for (std::size_t i = 1; i < x.size(); ++i)
    if (std::hypot(x[i] - pts.back().first, y[i] - pts.back().second) >= chord_m) pts.emplace_back(x[i], y[i]);
  std::vector<double> turns;
  for (std::size_t i = 2; i < pts.size(); ++i) {
    const double a = std::atan2(pts[i - 1].second - pts[i - 2].second, pts[i - 1].first - pts[i - 2].first);
    const double b = std::atan2(pts[i].second - pts[i - 1].second, pts[i].first - pts[i - 1].first);
    double d = std::abs(b - a);
    if (d > std::numbers::pi) d = 2 * std::numbers::pi - d;
    turns.push_back(d * 180.0 / std::numbers::pi);
  }
  return turns;
}

double sharp_fraction(VehicleType type, int seeds) {
  std::size_t sharp = 0, total = 0;
  for (int s = 0; s < seeds; ++s) {
    SynthSpec spec;
    spec.vehicle_type = type;
    spec.duration_s = 120.0;
    spec.seed = static_cast<std::uint64_t>(s);
    for (double t : chord_turns(generate_flight(spec), 20.0)) {
      ++total;
      sharp += t > 60.0 ? 1 : 0;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(sharp) / static_cast<double>(total);
}

}  // namespace

TEST_CASE("spec validation") {
  SynthSpec spec;
  spec.duration_s = -1.0;
  CHECK(error_code_of([&] { spec.validate(); }) == ErrorCode::InvalidSpec);
  spec.duration_s = 10.0;
  spec.sample_rate_hz = 0.0;
  CHECK(error_code_of([&] { generate_flight(spec); }) == ErrorCode::InvalidSpec);
  spec.sample_rate_hz = 5.0;
  spec.vehicle_type = VehicleType::Other;
  CHECK(error_code_of([&] { generate_flight(spec); }) == ErrorCode::InvalidSpec);
}

TEST_CASE("fixed-wing never hovers") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthSpec spec;
    spec.vehicle_type = VehicleType::FixedWing;
    spec.duration_s = 200.0;
    spec.seed = seed;
    const FlightLog log = generate_flight(spec);
    const auto& vx = col(log, "vehicle_local_position", "vx");
    const auto& vy = col(log, "vehicle_local_position", "vy");
    double slowest = 1e9;
    for (std::size_t i = 0; i < vx.size(); ++i) slowest = std::min(slowest, std::hypot(vx[i], vy[i]));
    CHECK(slowest > 0.5 * spec.min_airspeed_m_s);
  }
}

TEST_CASE("fixed-wing turn rate stays under the cap") {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    SynthSpec spec;
    spec.vehicle_type = VehicleType::FixedWing;
    spec.duration_s = 200.0;
    spec.seed = seed;
    const FlightLog log = generate_flight(spec);
    const TopicSeries& lp = *log.topic("vehicle_local_position");
    const auto& vx = lp.find("vx")->values;
    const auto& vy = lp.find("vy")->values;
    for (std::size_t i = 0; i + 5 < vx.size(); ++i) {
      const std::size_t j = i + 5;
      double d = std::abs(std::atan2(vy[j], vx[j]) - std::atan2(vy[i], vx[i]));
      if (d > std::numbers::pi) d = 2 * std::numbers::pi - d;
      const double dt = static_cast<double>(lp.timestamps[j] - lp.timestamps[i]) / 1e6;
      CHECK(d * 180.0 / std::numbers::pi / dt <= spec.max_turn_rate_deg_s);
    }
  }
}

TEST_CASE("single-waypoint multirotor hovers") {
  SynthSpec spec;
  spec.waypoints = 1;
  spec.duration_s = 60.0;
  const FlightLog log = generate_flight(spec);
  for (const char* axis : {"x", "y", "z"}) {
    const auto& v = col(log, "vehicle_local_position", axis);
    double mean = 0, var = 0;
    for (double x : v) mean += x / static_cast<double>(v.size());
    for (double x : v) var += (x - mean) * (x - mean) / static_cast<double>(v.size());
    CHECK(var < 4.0 * spec.position_noise_m * spec.position_noise_m);
  }
}

TEST_CASE("multirotor paths turn more sharply than fixed-wing paths") {
  const double quad = sharp_fraction(VehicleType::Quadrotor, 100);
  const double fw = sharp_fraction(VehicleType::FixedWing, 100);
  CHECK(quad > fw);
  CHECK(fw == 0.0);
}

TEST_CASE("baseline features are always present") {
  for (VehicleType type : {VehicleType::Quadrotor, VehicleType::Hexarotor, VehicleType::FixedWing}) {
    SynthSpec spec;
    spec.vehicle_type = type;
    spec.duration_s = 30.0;
    const auto series = assemble_features(generate_flight(spec), baseline_declaration().base_subset());
    REQUIRE(series.has_value());
    for (const auto& s : *series) CHECK(s.values.size() > 100);
  }
}

TEST_CASE("default durations follow the class means") {
  for (VehicleType type : {VehicleType::Quadrotor, VehicleType::FixedWing}) {
    double sum = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      SynthSpec spec;
      spec.vehicle_type = type;
      spec.sample_rate_hz = 1.0;
      spec.seed = seed;
      sum += generate_flight(spec).duration_s;
    }
    const double target = type == VehicleType::FixedWing ? kFixedWingMeanDuration : kMultirotorMeanDuration;
    CHECK(std::abs(sum / 100 - target) <= 0.2 * target);
  }
}

TEST_CASE("corpus counts and determinism") {
  CorpusSpec spec;
  spec.n_quadrotor = 6;
  spec.n_hexarotor = 2;
  spec.n_fixed_wing = 3;
  spec.sample_rate_hz = 1.0;
  spec.seed = 3;
  const auto corpus = generate_corpus(spec);
  REQUIRE(corpus.size() == 11);
  std::array<int, 3> counts{};
  for (const auto& log : corpus) ++counts[static_cast<std::size_t>(*class_index(log.vehicle_type))];
  CHECK(counts == std::array<int, 3>{6, 3, 2});
  CHECK(corpus[0].source_id == "synth_quadrotor_0000.ulg");
  CHECK(generate_corpus(spec) == corpus);
  spec.seed = 4;
  CHECK(generate_corpus(spec) != corpus);

  CorpusSpec bad;
  bad.n_hexarotor = 0;
  CHECK(error_code_of([&] { bad.validate(); }) == ErrorCode::InvalidSpec);
}

TEST_CASE("writer output") {
  SynthSpec spec;
  spec.duration_s = 10.0;
  const FlightLog log = generate_flight(spec);
  const auto bytes = write_ulog(log);
  CHECK(std::equal(std::begin(kULogMagic), std::end(kULogMagic), bytes.begin()));

  FlightLog empty_topic = log;
  empty_topic.topics.begin()->second.timestamps.clear();
  for (auto& c : empty_topic.topics.begin()->second.columns) c.values.clear();
  CHECK(error_code_of([&] { write_ulog(empty_topic); }) == ErrorCode::EmptyLog);

  FlightLog none;
  CHECK(error_code_of([&] { write_ulog(none); }) == ErrorCode::EmptyLog);

  FlightLog bad_name = log;
  bad_name.topics.begin()->second.columns[0].name = "has space";
  CHECK(error_code_of([&] { write_ulog(bad_name); }) == ErrorCode::UnsupportedFieldKind);
}
