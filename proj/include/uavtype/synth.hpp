#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "uavtype/ulog.hpp"

namespace uavtype {

/// Parameters of one generated flight. Multirotors fly straight legs between
/// waypoints and hover at each one; fixed-wing aircraft fly smooth, banked
/// turns with a minimum airspeed.
struct SynthSpec {
  VehicleType vehicle_type = VehicleType::Quadrotor;
  std::optional<double> duration_s;  // drawn around the class mean when unset
  double sample_rate_hz = 5.0;       // every topic
  std::size_t waypoints = 6;
  double position_noise_m = 0.05;
  double attitude_noise_rad = 0.01;
  double max_turn_rate_deg_s = 20.0;  // fixed-wing only
  double min_airspeed_m_s = 10.0;     // fixed-wing only
  std::uint64_t seed = 0;

  /// Throws InvalidSpec.
  void validate() const;
};

/// Mean flight durations used when SynthSpec::duration_s is unset.
inline constexpr double kMultirotorMeanDuration = 333.6;
inline constexpr double kFixedWingMeanDuration = 448.8;

/// Emits vehicle_local_position, vehicle_attitude, actuator_controls_0,
/// vehicle_global_position and battery_status with per-topic phase offsets
/// and jitter. Values are rounded the way the writer will store them, so
/// write_ulog/parse_ulog reproduce the log exactly.
FlightLog generate_flight(const SynthSpec& spec, std::string source_id = {});

/// Serializes a log as ULog bytes (header, flag bits, formats, MAV_TYPE
/// parameter, subscriptions, time-merged data). Columns named `name[i]`
/// become array fields; a column is written as float when every value is
/// exactly representable, otherwise as double.
/// Throws EmptyLog for a log with no topics or an empty topic, and
/// UnsupportedFieldKind for column names ULog cannot express.
std::vector<std::uint8_t> write_ulog(const FlightLog& log);
void write_ulog_file(const FlightLog& log, const std::filesystem::path& path);

struct CorpusSpec {
  std::size_t n_quadrotor = 400;
  std::size_t n_hexarotor = 40;
  std::size_t n_fixed_wing = 40;
  double sample_rate_hz = 5.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Quadrotors first, then hexarotors, then fixed-wing; source ids are
/// `synth_<class>_<index>.ulg`.
std::vector<FlightLog> generate_corpus(const CorpusSpec& spec);

/// The spec for flight `index` of `type` in a corpus, as generate_corpus uses it.
SynthSpec corpus_flight_spec(const CorpusSpec& spec, VehicleType type, std::size_t index);

}  // namespace uavtype
