#include "uavtype/synth.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <queue>
#include <random>

#include "byte_io.hpp"
#include "container.hpp"
#include "uavtype/error.hpp"

namespace uavtype {

namespace {

constexpr double kGravity = 9.80665;
constexpr double kSimDt = 0.02;
constexpr double kPi = std::numbers::pi;

struct SimState {
  double x = 0, y = 0, z = 0;
  double vx = 0, vy = 0, vz = 0;
  double roll = 0, pitch = 0, yaw = 0;
  double throttle = 0;
};

double wrap_angle(double a) {
  while (a > kPi) a -= 2.0 * kPi;
  while (a < -kPi) a += 2.0 * kPi;
  return a;
}

double as_float(double v) { return static_cast<double>(static_cast<float>(v)); }

/// Ornstein-Uhlenbeck noise with unit-time correlation.
class Wobble {
 public:
  Wobble(double sigma, double tau) : sigma_(sigma), decay_(std::exp(-kSimDt / tau)) {}
  double next(std::mt19937_64& rng) {
    value_ = value_ * decay_ + sigma_ * std::sqrt(1.0 - decay_ * decay_) * normal_(rng);
    return value_;
  }

 private:
  double sigma_;
  double decay_;
  double value_ = 0.0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

double draw_duration(VehicleType type, std::mt19937_64& rng) {
  const double mean = type == VehicleType::FixedWing ? kFixedWingMeanDuration : kMultirotorMeanDuration;
  const double d = std::normal_distribution<double>(mean, 0.15 * mean)(rng);
  return std::clamp(d, 0.4 * mean, 2.0 * mean);
}

std::vector<SimState> simulate_multirotor(const SynthSpec& spec, double duration, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const bool hex = spec.vehicle_type == VehicleType::Hexarotor;
  const double altitude = 10.0 + 30.0 * uni(rng);
  const double radius = 40.0 + 110.0 * uni(rng);
  const double cruise = 3.0 + 5.0 * uni(rng);
  const double accel = 2.5;
  // Hexarotors: a little more throttle for the same hover and a calmer airframe.
  const double hover_throttle = (hex ? 0.47 : 0.42) + 0.16 * uni(rng);
  Wobble roll_noise(spec.attitude_noise_rad * (hex ? 0.7 : 1.0), 0.5);
  Wobble pitch_noise(spec.attitude_noise_rad * (hex ? 0.7 : 1.0), 0.5);
  Wobble throttle_noise(0.01, 1.0);

  std::vector<std::array<double, 3>> waypoints{{0.0, 0.0, -altitude}};
  for (std::size_t i = 1; i < spec.waypoints; ++i)
    waypoints.push_back({radius * (2.0 * uni(rng) - 1.0), radius * (2.0 * uni(rng) - 1.0),
                         -(altitude + 10.0 * uni(rng) - 5.0)});

  const auto steps = static_cast<std::size_t>(std::ceil(duration / kSimDt)) + 1;
  std::vector<SimState> out;
  out.reserve(steps);
  SimState s;
  s.z = -altitude;
  s.yaw = wrap_angle(2.0 * kPi * uni(rng));
  std::size_t target = waypoints.size() > 1 ? 1 : 0;
  double dwell = 0.0;
  for (std::size_t step = 0; step < steps; ++step) {
    const auto& wp = waypoints[target];
    const double dx = wp[0] - s.x, dy = wp[1] - s.y, dz = wp[2] - s.z;
    const double dist = std::sqrt(dx * dx + dy * dy + dz * dz);
    const double speed_now = std::sqrt(s.vx * s.vx + s.vy * s.vy + s.vz * s.vz);
    if (dist < 0.5 && speed_now < 0.3 && waypoints.size() > 1) {
      if (dwell <= 0.0) dwell = 2.0 + 6.0 * uni(rng);
      dwell -= kSimDt;
      if (dwell <= 0.0) target = (target + 1) % waypoints.size();
    }

    double want_x = 0.0, want_y = 0.0, want_z = 0.0;
    if (dist > 1e-9) {
      const double v = std::min(cruise, std::sqrt(2.0 * accel * dist));
      want_x = v * dx / dist;
      want_y = v * dy / dist;
      want_z = v * dz / dist;
    }
    double ax = (want_x - s.vx) / kSimDt, ay = (want_y - s.vy) / kSimDt, az = (want_z - s.vz) / kSimDt;
    const double a_norm = std::sqrt(ax * ax + ay * ay + az * az);
    if (a_norm > accel) {
      ax *= accel / a_norm;
      ay *= accel / a_norm;
      az *= accel / a_norm;
    }
    s.vx += ax * kSimDt;
    s.vy += ay * kSimDt;
    s.vz += az * kSimDt;
    s.x += s.vx * kSimDt;
    s.y += s.vy * kSimDt;
    s.z += s.vz * kSimDt;

    const double ground_speed = std::hypot(s.vx, s.vy);
    if (ground_speed > 0.5) {
      const double err = wrap_angle(std::atan2(s.vy, s.vx) - s.yaw);
      const double max_step = kPi / 2.0 * kSimDt;
      s.yaw = wrap_angle(s.yaw + std::clamp(err, -max_step, max_step));
    }
    const double a_fwd = ax * std::cos(s.yaw) + ay * std::sin(s.yaw);
    const double a_lat = -ax * std::sin(s.yaw) + ay * std::cos(s.yaw);
    s.pitch = -std::atan(a_fwd / kGravity) + pitch_noise.next(rng);
    s.roll = std::atan(a_lat / kGravity) + roll_noise.next(rng);
    s.throttle = std::clamp(hover_throttle * (1.0 - 0.05 * az) / (std::cos(s.roll) * std::cos(s.pitch)) +
                                throttle_noise.next(rng),
                            0.0, 1.0);
    out.push_back(s);
  }
  return out;
}

std::vector<SimState> simulate_fixed_wing(const SynthSpec& spec, double duration, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double altitude = 60.0 + 90.0 * uni(rng);
  const double radius = 300.0 + 700.0 * uni(rng);
  const double base_speed = std::max(spec.min_airspeed_m_s + 2.0, 14.0 + 6.0 * uni(rng));
  const double speed_period = 40.0 + 40.0 * uni(rng);
  // stay a little inside the cap so sampled headings never exceed it
  const double max_rate = 0.95 * spec.max_turn_rate_deg_s * kPi / 180.0;
  const double max_rate_change = 5.0 * kPi / 180.0 * kSimDt;
  Wobble roll_noise(spec.attitude_noise_rad, 0.5);
  Wobble pitch_noise(spec.attitude_noise_rad, 0.5);
  Wobble speed_noise(0.5, 5.0);
  Wobble throttle_noise(0.01, 1.0);

  std::vector<std::array<double, 3>> waypoints;
  for (std::size_t i = 0; i < std::max<std::size_t>(spec.waypoints, 1); ++i) {
    const double angle = 2.0 * kPi * uni(rng);
    const double r = radius * (0.3 + 0.7 * uni(rng));
    waypoints.push_back({r * std::cos(angle), r * std::sin(angle), -(altitude + 40.0 * uni(rng) - 20.0)});
  }

  const auto steps = static_cast<std::size_t>(std::ceil(duration / kSimDt)) + 1;
  std::vector<SimState> out;
  out.reserve(steps);
  SimState s;
  s.z = -altitude;
  s.yaw = wrap_angle(2.0 * kPi * uni(rng));
  double rate = 0.0;
  std::size_t target = 0;
  for (std::size_t step = 0; step < steps; ++step) {
    const double t = static_cast<double>(step) * kSimDt;
    const auto& wp = waypoints[target];
    const double dx = wp[0] - s.x, dy = wp[1] - s.y;
    if (std::hypot(dx, dy) < 60.0) target = (target + 1) % waypoints.size();

    const double err = wrap_angle(std::atan2(dy, dx) - s.yaw);
    const double want_rate = std::clamp(0.3 * err, -max_rate, max_rate);
    rate += std::clamp(want_rate - rate, -max_rate_change, max_rate_change);
    rate = std::clamp(rate, -max_rate, max_rate);
    s.yaw = wrap_angle(s.yaw + rate * kSimDt);

    const double speed = std::max(spec.min_airspeed_m_s,
                                  base_speed + 2.0 * std::sin(2.0 * kPi * t / speed_period) + speed_noise.next(rng));
    s.vx = speed * std::cos(s.yaw);
    s.vy = speed * std::sin(s.yaw);
    s.vz = std::clamp(0.2 * (wp[2] - s.z), -2.0, 2.0);
    s.x += s.vx * kSimDt;
    s.y += s.vy * kSimDt;
    s.z += s.vz * kSimDt;

    s.roll = std::atan(speed * rate / kGravity) + roll_noise.next(rng);
    s.pitch = std::atan2(-s.vz, speed) + 0.04 + pitch_noise.next(rng);
    s.throttle = std::clamp(0.55 + 0.03 * (speed - base_speed) - 0.05 * s.vz + throttle_noise.next(rng), 0.0, 1.0);
    out.push_back(s);
  }
  return out;
}

std::array<double, 4> euler_to_quaternion(double roll, double pitch, double yaw) {
  const double cr = std::cos(roll / 2), sr = std::sin(roll / 2);
  const double cp = std::cos(pitch / 2), sp = std::sin(pitch / 2);
  const double cy = std::cos(yaw / 2), sy = std::sin(yaw / 2);
  return {cr * cp * cy + sr * sp * sy, sr * cp * cy - cr * sp * sy, cr * sp * cy + sr * cp * sy,
          cr * cp * sy - sr * sp * cy};
}

/// Sample times of one topic in seconds since the start of the flight.
std::vector<double> sample_times(double duration, double rate, std::mt19937_64& rng) {
  const double period = 1.0 / rate;
  const double phase = std::uniform_real_distribution<double>(0.0, period)(rng);
  std::uniform_real_distribution<double> jitter(-0.05 * period, 0.05 * period);
  std::vector<double> times;
  for (std::size_t k = 0;; ++k) {
    const double t = std::max(0.0, phase + static_cast<double>(k) * period + jitter(rng));
    if (t > duration) break;
    times.push_back(t);
  }
  return times;
}

TopicSeries make_topic(std::string name, const std::vector<std::string>& fields) {
  TopicSeries ts;
  ts.topic_name = std::move(name);
  for (const std::string& f : fields) ts.columns.push_back({f, {}});
  return ts;
}

// ULog writer helpers

struct ArrayField {
  std::string base;
  std::size_t first_column = 0;
  std::uint32_t length = 0;  // 0 = scalar
  bool as_double = false;
};

bool valid_identifier(std::string_view s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

std::vector<ArrayField> group_fields(const TopicSeries& series) {
  std::vector<ArrayField> fields;
  for (std::size_t i = 0; i < series.columns.size();) {
    const std::string& name = series.columns[i].name;
    ArrayField f;
    f.first_column = i;
    const auto open = name.find('[');
    if (open == std::string::npos) {
      f.base = name;
      ++i;
    } else {
      f.base = name.substr(0, open);
      while (i < series.columns.size() && series.columns[i].name == fmt::format("{}[{}]", f.base, f.length)) {
        ++f.length;
        ++i;
      }
      if (f.length == 0)
        throw Error(ErrorCode::UnsupportedFieldKind, "column '" + name + "' is not part of an array starting at [0]");
    }
    if (!valid_identifier(f.base) || f.base == "timestamp" || f.base.starts_with("_padding"))
      throw Error(ErrorCode::UnsupportedFieldKind, "column '" + name + "' cannot be written as a ULog field");
    const std::size_t n_cols = std::max<std::uint32_t>(f.length, 1);
    for (std::size_t c = f.first_column; c < f.first_column + n_cols && !f.as_double; ++c)
      for (double v : series.columns[c].values)
        if (std::isfinite(v) && as_float(v) != v) {
          f.as_double = true;
          break;
        }
    fields.push_back(std::move(f));
  }
  return fields;
}

void append_message(std::vector<std::uint8_t>& out, char type, const std::vector<std::uint8_t>& payload) {
  if (payload.size() > 0xFFFF)
    throw Error(ErrorCode::UnsupportedFieldKind, fmt::format("'{}' message of {} bytes exceeds the ULog limit", type,
                                                             payload.size()));
  detail::append_le<std::uint16_t>(out, static_cast<std::uint16_t>(payload.size()));
  out.push_back(static_cast<std::uint8_t>(type));
  out.insert(out.end(), payload.begin(), payload.end());
}

std::int32_t mav_type_of(VehicleType type) {
  switch (type) {
    case VehicleType::Quadrotor: return 2;
    case VehicleType::Hexarotor: return 13;
    case VehicleType::FixedWing: return 1;
    case VehicleType::Other: break;
  }
  return 0;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

void SynthSpec::validate() const {
  if (vehicle_type == VehicleType::Other) throw Error(ErrorCode::InvalidSpec, "vehicle type must be a class");
  if (duration_s && !(*duration_s > 0.0 && std::isfinite(*duration_s)))
    throw Error(ErrorCode::InvalidSpec, "duration must be > 0");
  if (!(sample_rate_hz > 0.0 && sample_rate_hz <= 1000.0))
    throw Error(ErrorCode::InvalidSpec, "sample rate must be in (0, 1000] Hz");
  if (waypoints < 1) throw Error(ErrorCode::InvalidSpec, "at least one waypoint is needed");
  if (!(position_noise_m >= 0.0) || !(attitude_noise_rad >= 0.0))
    throw Error(ErrorCode::InvalidSpec, "noise levels must be >= 0");
  if (!(max_turn_rate_deg_s > 0.0) || !(min_airspeed_m_s > 0.0))
    throw Error(ErrorCode::InvalidSpec, "turn rate cap and minimum airspeed must be > 0");
}

FlightLog generate_flight(const SynthSpec& spec, std::string source_id) {
  spec.validate();
  std::mt19937_64 rng(spec.seed);
  const double duration = spec.duration_s ? *spec.duration_s : draw_duration(spec.vehicle_type, rng);
  const std::vector<SimState> sim = spec.vehicle_type == VehicleType::FixedWing
                                        ? simulate_fixed_wing(spec, duration, rng)
                                        : simulate_multirotor(spec, duration, rng);

  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double boot_offset = 2.0 + 28.0 * uni(rng);
  const double lat0 = -60.0 + 120.0 * uni(rng);
  const double lon0 = -180.0 + 360.0 * uni(rng);
  const double home_amsl = 1500.0 * uni(rng);
  const double ambient = 15.0 + 20.0 * uni(rng);
  const double cells = std::array<double, 3>{3.0, 4.0, 6.0}[static_cast<std::size_t>(uni(rng) * 3.0) % 3];
  std::normal_distribution<double> pos_noise(0.0, spec.position_noise_m);
  std::normal_distribution<double> small_noise(0.0, 0.02);

  auto state_at = [&](double t) -> const SimState& {
    const auto idx = static_cast<std::size_t>(std::llround(t / kSimDt));
    return sim[std::min(idx, sim.size() - 1)];
  };
  auto stamp = [&](double t) { return static_cast<std::uint64_t>(std::llround((boot_offset + t) * 1e6)); };

  FlightLog log;
  log.vehicle_type = spec.vehicle_type;
  log.source_id = std::move(source_id);

  {
    TopicSeries ts = make_topic("vehicle_local_position", {"x", "y", "z", "vx", "vy", "vz"});
    for (double t : sample_times(duration, spec.sample_rate_hz, rng)) {
      const SimState& s = state_at(t);
      ts.timestamps.push_back(stamp(t));
      const double vals[] = {s.x + pos_noise(rng),  s.y + pos_noise(rng),  s.z + pos_noise(rng),
                             s.vx + small_noise(rng), s.vy + small_noise(rng), s.vz + small_noise(rng)};
      for (std::size_t c = 0; c < 6; ++c) ts.columns[c].values.push_back(as_float(vals[c]));
    }
    log.topics.emplace(TopicKey{ts.topic_name, 0}, std::move(ts));
  }
  {
    TopicSeries ts = make_topic("vehicle_attitude", {"q[0]", "q[1]", "q[2]", "q[3]"});
    for (double t : sample_times(duration, spec.sample_rate_hz, rng)) {
      const SimState& s = state_at(t);
      ts.timestamps.push_back(stamp(t));
      const auto q = euler_to_quaternion(s.roll, s.pitch, s.yaw);
      for (std::size_t c = 0; c < 4; ++c) ts.columns[c].values.push_back(as_float(q[c]));
    }
    log.topics.emplace(TopicKey{ts.topic_name, 0}, std::move(ts));
  }
  {
    std::vector<std::string> names;
    for (int i = 0; i < 8; ++i) names.push_back(fmt::format("control[{}]", i));
    TopicSeries ts = make_topic("actuator_controls_0", names);
    for (double t : sample_times(duration, spec.sample_rate_hz, rng)) {
      const SimState& s = state_at(t);
      ts.timestamps.push_back(stamp(t));
      const double vals[8] = {std::clamp(s.roll, -1.0, 1.0), std::clamp(s.pitch, -1.0, 1.0), 0.0, s.throttle,
                              0.0, 0.0, 0.0, 0.0};
      for (std::size_t c = 0; c < 8; ++c) ts.columns[c].values.push_back(as_float(vals[c]));
    }
    log.topics.emplace(TopicKey{ts.topic_name, 0}, std::move(ts));
  }
  {
    TopicSeries ts = make_topic("vehicle_global_position", {"lat", "lon", "alt"});
    const double m_per_deg = 111320.0;
    for (double t : sample_times(duration, spec.sample_rate_hz, rng)) {
      const SimState& s = state_at(t);
      ts.timestamps.push_back(stamp(t));
      ts.columns[0].values.push_back(lat0 + s.x / m_per_deg);
      ts.columns[1].values.push_back(lon0 + s.y / (m_per_deg * std::cos(lat0 * kPi / 180.0)));
      ts.columns[2].values.push_back(as_float(home_amsl - s.z + 2.0 * pos_noise(rng)));
    }
    log.topics.emplace(TopicKey{ts.topic_name, 0}, std::move(ts));
  }
  {
    TopicSeries ts = make_topic("battery_status", {"voltage_v", "temperature"});
    for (double t : sample_times(duration, spec.sample_rate_hz, rng)) {
      const SimState& s = state_at(t);
      ts.timestamps.push_back(stamp(t));
      const double voltage = cells * (4.2 - 0.6 * t / duration) - 0.5 * s.throttle + small_noise(rng);
      const double temperature = ambient + 15.0 * (1.0 - std::exp(-t / 300.0)) * s.throttle + 2.5 * small_noise(rng);
      ts.columns[0].values.push_back(as_float(voltage));
      ts.columns[1].values.push_back(as_float(temperature));
    }
    log.topics.emplace(TopicKey{ts.topic_name, 0}, std::move(ts));
  }
  log.duration_s = flight_duration(log);
  return log;
}

std::vector<std::uint8_t> write_ulog(const FlightLog& log) {
  if (log.topics.empty()) throw Error(ErrorCode::EmptyLog, "log has no topics");
  std::map<std::string, std::string> formats;
  std::vector<std::vector<ArrayField>> layouts;
  std::uint64_t first_stamp = std::numeric_limits<std::uint64_t>::max();
  for (const auto& [key, series] : log.topics) {
    if (series.timestamps.empty()) throw Error(ErrorCode::EmptyLog, "topic '" + key.name + "' has no samples");
    if (!valid_identifier(key.name))
      throw Error(ErrorCode::UnsupportedFieldKind, "topic name '" + key.name + "' cannot be written");
    for (const Column& c : series.columns)
      if (c.values.size() != series.timestamps.size())
        throw Error(ErrorCode::LengthMismatch, "column '" + c.name + "' differs in length from its timestamps");
    first_stamp = std::min(first_stamp, series.timestamps.front());

    layouts.push_back(group_fields(series));
    std::string text = key.name + ":uint64_t timestamp;";
    for (const ArrayField& f : layouts.back()) {
      text += f.as_double ? "double" : "float";
      if (f.length > 0) text += fmt::format("[{}]", f.length);
      text += " " + f.base + ";";
    }
    auto [it, inserted] = formats.try_emplace(key.name, text);
    if (!inserted && it->second != text)
      throw Error(ErrorCode::UnsupportedFieldKind, "instances of '" + key.name + "' differ in layout");
  }

  std::vector<std::uint8_t> out(std::begin(kULogMagic), std::end(kULogMagic));
  out.push_back(1);
  detail::append_le<std::uint64_t>(out, first_stamp);
  append_message(out, 'B', std::vector<std::uint8_t>(40, 0));
  for (const auto& [name, text] : formats) append_message(out, 'F', std::vector<std::uint8_t>(text.begin(), text.end()));
  {
    const std::string key = "int32_t MAV_TYPE";
    std::vector<std::uint8_t> payload{static_cast<std::uint8_t>(key.size())};
    detail::append_bytes(payload, key);
    detail::append_le<std::int32_t>(payload, mav_type_of(log.vehicle_type));
    append_message(out, 'P', payload);
  }

  std::vector<const TopicSeries*> series_of;
  std::uint16_t msg_id = 0;
  for (const auto& [key, series] : log.topics) {
    std::vector<std::uint8_t> payload{key.instance};
    detail::append_le<std::uint16_t>(payload, msg_id++);
    detail::append_bytes(payload, key.name);
    append_message(out, 'A', payload);
    series_of.push_back(&series);
  }

  // Merge samples by time while keeping each topic's own order.
  using Head = std::tuple<std::uint64_t, std::size_t, std::size_t>;  // timestamp, topic, row
  std::priority_queue<Head, std::vector<Head>, std::greater<>> heads;
  for (std::size_t t = 0; t < series_of.size(); ++t) heads.emplace(series_of[t]->timestamps[0], t, 0);
  std::vector<std::uint8_t> payload;
  while (!heads.empty()) {
    const auto [stamp, t, row] = heads.top();
    heads.pop();
    const TopicSeries& series = *series_of[t];
    payload.clear();
    detail::append_le<std::uint16_t>(payload, static_cast<std::uint16_t>(t));
    detail::append_le<std::uint64_t>(payload, stamp);
    for (const ArrayField& f : layouts[t]) {
      const std::size_t n = std::max<std::uint32_t>(f.length, 1);
      for (std::size_t c = f.first_column; c < f.first_column + n; ++c) {
        const double v = series.columns[c].values[row];
        if (f.as_double) detail::append_le<double>(payload, v);
        else detail::append_le<float>(payload, static_cast<float>(v));
      }
    }
    append_message(out, 'D', payload);
    if (row + 1 < series.size()) heads.emplace(series.timestamps[row + 1], t, row + 1);
  }
  return out;
}

void write_ulog_file(const FlightLog& log, const std::filesystem::path& path) {
  detail::write_file_atomic(path, write_ulog(log));
}

void CorpusSpec::validate() const {
  if (n_quadrotor < 1 || n_hexarotor < 1 || n_fixed_wing < 1)
    throw Error(ErrorCode::InvalidSpec, "every class needs at least one flight");
  if (!(sample_rate_hz > 0.0)) throw Error(ErrorCode::InvalidSpec, "sample rate must be > 0");
}

SynthSpec corpus_flight_spec(const CorpusSpec& spec, VehicleType type, std::size_t index) {
  SynthSpec s;
  s.vehicle_type = type;
  s.sample_rate_hz = spec.sample_rate_hz;
  s.seed = splitmix64(spec.seed ^ splitmix64(static_cast<std::uint64_t>(type) * 0x100000000ULL + index));
  std::mt19937_64 rng(s.seed ^ 0xa5a5a5a5ULL);
  s.waypoints = 3 + static_cast<std::size_t>(std::uniform_int_distribution<int>(0, 6)(rng));
  return s;
}

std::vector<FlightLog> generate_corpus(const CorpusSpec& spec) {
  spec.validate();
  std::vector<FlightLog> corpus;
  corpus.reserve(spec.n_quadrotor + spec.n_hexarotor + spec.n_fixed_wing);
  const std::pair<VehicleType, std::size_t> plan[] = {{VehicleType::Quadrotor, spec.n_quadrotor},
                                                      {VehicleType::Hexarotor, spec.n_hexarotor},
                                                      {VehicleType::FixedWing, spec.n_fixed_wing}};
  for (const auto& [type, count] : plan)
    for (std::size_t i = 0; i < count; ++i)
      corpus.push_back(generate_flight(corpus_flight_spec(spec, type, i),
                                       fmt::format("synth_{}_{:04}.ulg", to_string(type), i)));
  return corpus;
}

}  // namespace uavtype
