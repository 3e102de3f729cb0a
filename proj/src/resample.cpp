#include "uavtype/resample.hpp"

#include <fmt/format.h>

#include <cmath>
#include <limits>

#include "container.hpp"
#include "uavtype/error.hpp"

namespace uavtype {

namespace {

using u128 = unsigned __int128;

// Shared binning kernel. `window_us` < 0 means "whole bin".
SampledMatrix bin_series(std::span<const FeatureSeries> series, std::size_t n_intervals, long double window_us) {
  if (n_intervals == 0) throw Error(ErrorCode::InvalidConfig, "n_intervals must be >= 1");
  const TimeRange range = global_time_range(series);
  const std::uint64_t span = range.t_max - range.t_min;
  if (span == 0) throw Error(ErrorCode::DegenerateRange, "flight spans a single instant");

  const auto n = static_cast<u128>(n_intervals);
  // A sample counts when n * (t - start_b) <= n * window; compare in integers.
  // The relative slack absorbs decimal windows such as 0.1 s and a window
  // computed as exactly one bin width, which must keep the whole bin.
  bool windowed = window_us >= 0;
  u128 n_window = 0;
  if (windowed) {
    const long double scaled = window_us * static_cast<long double>(n_intervals) * (1.0L + 1e-12L);
    if (scaled >= static_cast<long double>(span)) windowed = false;
    else n_window = static_cast<u128>(std::floor(scaled));
  }

  const auto n_rows = static_cast<Eigen::Index>(n_intervals);
  const auto n_cols = static_cast<Eigen::Index>(series.size());
  SampledMatrix out{Eigen::MatrixXd::Zero(n_rows, n_cols), MaskMatrix::Zero(n_rows, n_cols)};
  std::vector<std::size_t> counts(n_intervals);

  for (Eigen::Index f = 0; f < n_cols; ++f) {
    const FeatureSeries& s = series[static_cast<std::size_t>(f)];
    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t i = 0; i < s.timestamps.size(); ++i) {
      const u128 scaled = n * static_cast<u128>(s.timestamps[i] - range.t_min);
      u128 bin = scaled / span;
      if (bin >= n) bin = n - 1;  // t == t_max closes the last bin
      if (windowed && scaled - bin * span > n_window) continue;
      const auto b = static_cast<Eigen::Index>(bin);
      out.values(b, f) += s.values[i];
      ++counts[static_cast<std::size_t>(b)];
    }
    for (Eigen::Index b = 0; b < n_rows; ++b) {
      const std::size_t c = counts[static_cast<std::size_t>(b)];
      if (c == 0) continue;
      out.values(b, f) /= static_cast<double>(c);
      out.observed(b, f) = 1;
    }
  }
  return out;
}

}  // namespace

void SamplingConfig::validate() const {
  if (n_intervals == 0) throw Error(ErrorCode::InvalidConfig, "n_intervals must be >= 1");
  if (method == SamplingMethod::FixedWindowAverage && !(window_s > 0.0))
    throw Error(ErrorCode::InvalidConfig, "fixed-window sampling needs window_s > 0");
}

std::string_view to_string(SamplingMethod method) {
  return method == SamplingMethod::Average ? "average" : "fixed_window";
}

int SampledInstance::class_idx() const {
  const auto idx = class_index(label);
  if (!idx) throw Error(ErrorCode::InvalidLabel, "instance '" + source_id + "' has no trainable class");
  return *idx;
}

std::array<std::size_t, kNumClasses> class_counts(std::span<const SampledInstance> instances) {
  std::array<std::size_t, kNumClasses> counts{};
  for (const SampledInstance& inst : instances)
    if (const auto idx = class_index(inst.label)) ++counts[static_cast<std::size_t>(*idx)];
  return counts;
}

std::array<std::size_t, kNumClasses> Dataset::class_counts() const { return uavtype::class_counts(instances); }

std::vector<int> Dataset::labels() const {
  std::vector<int> out;
  out.reserve(instances.size());
  for (const SampledInstance& inst : instances) out.push_back(inst.class_idx());
  return out;
}

TimeRange global_time_range(std::span<const FeatureSeries> series) {
  TimeRange r{std::numeric_limits<std::uint64_t>::max(), 0};
  bool any = false;
  for (const FeatureSeries& s : series) {
    if (s.timestamps.empty()) continue;
    any = true;
    r.t_min = std::min(r.t_min, s.timestamps.front());
    r.t_max = std::max(r.t_max, s.timestamps.back());
  }
  if (!any) throw Error(ErrorCode::AllEmpty, "no feature has samples");
  return r;
}

SampledMatrix average_sample(std::span<const FeatureSeries> series, std::size_t n_intervals) {
  return bin_series(series, n_intervals, -1.0L);
}

SampledMatrix fixed_window_sample(std::span<const FeatureSeries> series, std::size_t n_intervals, double window_s) {
  if (!(window_s > 0.0)) throw Error(ErrorCode::InvalidConfig, "window_s must be > 0");
  return bin_series(series, n_intervals, static_cast<long double>(window_s) * 1e6L);
}

SampledMatrix resample(std::span<const FeatureSeries> series, const SamplingConfig& config) {
  config.validate();
  return config.method == SamplingMethod::Average ? average_sample(series, config.n_intervals)
                                                  : fixed_window_sample(series, config.n_intervals, config.window_s);
}

Standardizer Standardizer::fit(std::span<const SampledInstance> train) {
  if (train.empty()) throw Error(ErrorCode::EmptySplit, "cannot standardize on an empty training split");
  const auto n_features = static_cast<std::size_t>(train.front().values.cols());
  Standardizer st;
  st.mean.assign(n_features, 0.0);
  st.stddev.assign(n_features, 1.0);
  st.scaled.assign(n_features, false);
  for (std::size_t f = 0; f < n_features; ++f) {
    const auto col = static_cast<Eigen::Index>(f);
    double sum = 0.0;
    std::size_t count = 0;
    for (const SampledInstance& inst : train)
      for (Eigen::Index r = 0; r < inst.values.rows(); ++r)
        if (inst.observed(r, col)) {
          sum += inst.values(r, col);
          ++count;
        }
    if (count == 0) continue;
    const double mean = sum / static_cast<double>(count);
    double ss = 0.0;
    for (const SampledInstance& inst : train)
      for (Eigen::Index r = 0; r < inst.values.rows(); ++r)
        if (inst.observed(r, col)) ss += (inst.values(r, col) - mean) * (inst.values(r, col) - mean);
    const double sd = std::sqrt(ss / static_cast<double>(count));
    st.mean[f] = mean;
    if (sd >= 1e-12) {
      st.stddev[f] = sd;
      st.scaled[f] = true;
    }
  }
  return st;
}

void Standardizer::apply(std::span<SampledInstance> instances) const {
  for (SampledInstance& inst : instances) {
    if (static_cast<std::size_t>(inst.values.cols()) != mean.size())
      throw Error(ErrorCode::ShapeMismatch, "instance feature count differs from the fitted standardizer");
    for (Eigen::Index f = 0; f < inst.values.cols(); ++f) {
      if (!scaled[static_cast<std::size_t>(f)]) continue;
      const double mu = mean[static_cast<std::size_t>(f)];
      const double sd = stddev[static_cast<std::size_t>(f)];
      for (Eigen::Index r = 0; r < inst.values.rows(); ++r)
        if (inst.observed(r, f)) inst.values(r, f) = (inst.values(r, f) - mu) / sd;
    }
  }
}

Dataset build_dataset(std::span<const FlightLog> corpus, const FeatureSubset& subset, const SamplingConfig& config) {
  config.validate();
  Dataset ds;
  ds.sampling = config;
  for (const FeatureKey& key : subset.keys) ds.feature_names.push_back(key.to_string());

  for (const FlightLog& log : corpus) {
    if (!class_index(log.vehicle_type)) {
      ds.skipped.push_back({log.source_id, "vehicle type is not a classifier class"});
      continue;
    }
    auto series = assemble_features(log, subset);
    if (!series) {
      ds.skipped.push_back({log.source_id, "missing feature for subset '" + subset.name + "'"});
      continue;
    }
    SampledMatrix m;
    try {
      m = resample(*series, config);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateRange && e.code() != ErrorCode::AllEmpty) throw;
      ds.skipped.push_back({log.source_id, e.what()});
      continue;
    }
    SampledInstance inst;
    inst.values = std::move(m.values);
    inst.observed = std::move(m.observed);
    inst.label = log.vehicle_type;
    inst.source_id = log.source_id;
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

std::vector<std::uint8_t> encode_dataset(const Dataset& ds) {
  using detail::append_le;
  using detail::append_string;
  std::vector<std::uint8_t> p;
  append_le<std::uint32_t>(p, static_cast<std::uint32_t>(ds.sampling.method));
  append_le<std::uint64_t>(p, ds.sampling.n_intervals);
  append_le<double>(p, ds.sampling.window_s);
  append_le<std::uint8_t>(p, ds.sampling.standardize ? 1 : 0);
  append_le<std::uint32_t>(p, static_cast<std::uint32_t>(ds.feature_names.size()));
  for (const std::string& name : ds.feature_names) append_string(p, name);
  append_le<std::uint32_t>(p, static_cast<std::uint32_t>(ds.instances.size()));
  for (const SampledInstance& inst : ds.instances) {
    append_string(p, inst.source_id);
    append_le<std::uint8_t>(p, static_cast<std::uint8_t>(inst.label));
    append_le<std::uint8_t>(p, inst.synthetic ? 1 : 0);
    append_le<std::int32_t>(p, inst.fold);
    append_le<std::uint64_t>(p, static_cast<std::uint64_t>(inst.values.rows()));
    append_le<std::uint64_t>(p, static_cast<std::uint64_t>(inst.values.cols()));
    for (Eigen::Index r = 0; r < inst.values.rows(); ++r)
      for (Eigen::Index c = 0; c < inst.values.cols(); ++c) append_le<double>(p, inst.values(r, c));
    for (Eigen::Index r = 0; r < inst.values.rows(); ++r)
      for (Eigen::Index c = 0; c < inst.values.cols(); ++c) append_le<std::uint8_t>(p, inst.observed(r, c));
  }
  append_le<std::uint32_t>(p, static_cast<std::uint32_t>(ds.skipped.size()));
  for (const SkipRecord& s : ds.skipped) {
    append_string(p, s.source_id);
    append_string(p, s.reason);
  }
  return detail::wrap_container(detail::PayloadKind::SampledDataset, p);
}

Dataset decode_dataset(const std::vector<std::uint8_t>& bytes) {
  using detail::require;
  const std::vector<std::uint8_t> payload = detail::unwrap_container(bytes, detail::PayloadKind::SampledDataset);
  detail::Cursor cur(payload.data(), payload.size());
  Dataset ds;
  const auto method = cur.get<std::uint32_t>();
  if (method > 1) throw Error(ErrorCode::ChecksumFailure, "unknown sampling method tag");
  ds.sampling.method = static_cast<SamplingMethod>(method);
  ds.sampling.n_intervals = cur.get<std::uint64_t>();
  ds.sampling.window_s = cur.get<double>();
  ds.sampling.standardize = cur.get<std::uint8_t>() != 0;
  const auto n_features = cur.get<std::uint32_t>();
  require(cur, "dataset header");
  for (std::uint32_t i = 0; i < n_features; ++i) ds.feature_names.push_back(detail::read_string(cur));
  const auto n_instances = cur.get<std::uint32_t>();
  require(cur, "instance count");
  for (std::uint32_t i = 0; i < n_instances; ++i) {
    SampledInstance inst;
    inst.source_id = detail::read_string(cur);
    const auto label = cur.get<std::uint8_t>();
    inst.synthetic = cur.get<std::uint8_t>() != 0;
    inst.fold = cur.get<std::int32_t>();
    const auto rows = cur.get<std::uint64_t>();
    const auto cols = cur.get<std::uint64_t>();
    require(cur, "instance header");
    if (label > static_cast<std::uint8_t>(VehicleType::Other) || (cols != 0 && rows > cur.remaining() / 9 / cols))
      throw Error(ErrorCode::ChecksumFailure, "instance shape exceeds payload");
    inst.label = static_cast<VehicleType>(label);
    inst.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    inst.observed.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index r = 0; r < inst.values.rows(); ++r)
      for (Eigen::Index c = 0; c < inst.values.cols(); ++c) inst.values(r, c) = cur.get<double>();
    for (Eigen::Index r = 0; r < inst.values.rows(); ++r)
      for (Eigen::Index c = 0; c < inst.values.cols(); ++c) inst.observed(r, c) = cur.get<std::uint8_t>();
    require(cur, "instance data");
    ds.instances.push_back(std::move(inst));
  }
  const auto n_skipped = cur.get<std::uint32_t>();
  require(cur, "skip count");
  for (std::uint32_t i = 0; i < n_skipped; ++i) {
    SkipRecord s;
    s.source_id = detail::read_string(cur);
    s.reason = detail::read_string(cur);
    ds.skipped.push_back(std::move(s));
  }
  if (cur.remaining() != 0) throw Error(ErrorCode::ChecksumFailure, "trailing bytes after dataset");
  return ds;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  detail::write_file_atomic(path, encode_dataset(dataset));
}

Dataset read_dataset(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::MissingCache, path.string() + " does not exist");
  return decode_dataset(detail::read_file(path));
}

}  // namespace uavtype
