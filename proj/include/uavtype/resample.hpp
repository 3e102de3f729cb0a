#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "uavtype/features.hpp"
#include "uavtype/types.hpp"

namespace uavtype {

enum class SamplingMethod { Average, FixedWindowAverage };

struct SamplingConfig {
  SamplingMethod method = SamplingMethod::Average;
  std::size_t n_intervals = 50;
  double window_s = 0.0;  // FixedWindowAverage only
  bool standardize = true;

  /// Throws InvalidConfig when n_intervals == 0 or a window method has window_s <= 0.
  void validate() const;
  bool operator==(const SamplingConfig&) const = default;
};

std::string_view to_string(SamplingMethod method);

using MaskMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Output of one resampling pass: [n_intervals x n_features] means plus a
/// mask of cells that received at least one sample (0 = zero-padded).
struct SampledMatrix {
  Eigen::MatrixXd values;
  MaskMatrix observed;
};

struct SampledInstance {
  Eigen::MatrixXd values;
  MaskMatrix observed;
  VehicleType label = VehicleType::Other;
  std::string source_id;
  bool synthetic = false;
  int fold = -1;  // -1 until folds are assigned

  int class_idx() const;
  bool operator==(const SampledInstance&) const = default;
};

using Instances = std::vector<SampledInstance>;

struct SkipRecord {
  std::string source_id;
  std::string reason;
};

struct Dataset {
  SamplingConfig sampling;
  std::vector<std::string> feature_names;
  Instances instances;
  std::vector<SkipRecord> skipped;  // logs excluded during assembly, with reasons

  std::array<std::size_t, kNumClasses> class_counts() const;
  std::vector<int> labels() const;
};

std::array<std::size_t, kNumClasses> class_counts(std::span<const SampledInstance> instances);

struct TimeRange {
  std::uint64_t t_min = 0;
  std::uint64_t t_max = 0;
};

/// Envelope of the first and last timestamps of the non-empty series.
/// Throws AllEmpty when every series is empty.
TimeRange global_time_range(std::span<const FeatureSeries> series);

/// Equal-width bins over the flight's own range: bin b holds samples with
/// b <= n (t - t_min) / (t_max - t_min) < b + 1, the final bin also taking t_max.
/// Bin membership is evaluated in exact integer arithmetic. Empty bins are 0.
/// Throws DegenerateRange when t_min == t_max.
SampledMatrix average_sample(std::span<const FeatureSeries> series, std::size_t n_intervals);

/// Averages only the first `window_s` seconds of every bin: a sample counts
/// for bin b when it is in bin b and t - start_b <= window. A window at least
/// as wide as the bin reproduces average_sample.
SampledMatrix fixed_window_sample(std::span<const FeatureSeries> series, std::size_t n_intervals, double window_s);

SampledMatrix resample(std::span<const FeatureSeries> series, const SamplingConfig& config);

/// Per-feature mean/std learned on observed training cells.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> stddev;
  std::vector<bool> scaled;  // false when std < 1e-12

  /// Throws EmptySplit.
  static Standardizer fit(std::span<const SampledInstance> train);
  /// Transforms observed cells in place; zero-padded cells stay 0.
  void apply(std::span<SampledInstance> instances) const;
};

/// Assembles and resamples every log of the corpus. Logs missing a feature
/// or spanning a single instant are listed in Dataset::skipped.
Dataset build_dataset(std::span<const FlightLog> corpus, const FeatureSubset& subset, const SamplingConfig& config);

/// Sampled datasets use the cache container with the sampling config embedded.
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);
Dataset read_dataset(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_dataset(const Dataset& dataset);
Dataset decode_dataset(const std::vector<std::uint8_t>& bytes);

}  // namespace uavtype
