#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "uavtype/resample.hpp"

namespace uavtype {

enum class BalanceMethod { None, RandomOversample, RandomUndersample, Smote, ClusterCentroid, Augmentation };

std::string_view to_string(BalanceMethod method);

struct AugmentSpec {
  double crop_min = 0.7;            // kept fraction drawn from [crop_min, 1]
  double drift_max = 0.1;           // max |drift| as a fraction of the feature range
  double reverse_probability = 0.5;
};

struct BalanceConfig {
  BalanceMethod method = BalanceMethod::None;
  double minority_factor = 1.5;     // final minority count = round(count * factor)
  double majority_reduction = 0.25; // final quadrotor count = round(count * (1 - reduction))
  std::size_t smote_k = 5;
  AugmentSpec augment;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Minority classes (fixed-wing and hexarotor) are grown together, the
/// majority (quadrotor) is shrunk. All functions below take and return the
/// training split only; originals keep their order and synthetic
/// instances are appended.
Instances random_oversample(std::span<const SampledInstance> train, double factor, std::uint64_t seed);
Instances random_undersample(std::span<const SampledInstance> train, double reduction, std::uint64_t seed);

/// Provenance of one SMOTE sample: base + u * (neighbor - base).
struct SmoteDraw {
  std::size_t base = 0;      // index into `train`
  std::size_t neighbor = 0;  // index into `train`
  double u = 0.0;
};

Eigen::MatrixXd smote_interpolate(const Eigen::MatrixXd& base, const Eigen::MatrixXd& neighbor, double u);

/// `k` is clamped to class size - 1; throws ClassSmallerThanK when a
/// minority class has fewer than two members.
Instances smote_oversample(std::span<const SampledInstance> train, double factor, std::size_t k, std::uint64_t seed,
                           std::vector<SmoteDraw>* trace = nullptr);

/// Indices of the k nearest same-matrix rows of `points` to row `i`
/// (Euclidean, ties by index, `i` excluded).
std::vector<std::size_t> nearest_neighbors(const Eigen::MatrixXd& points, std::size_t i, std::size_t k);

struct KMeansResult {
  Eigen::MatrixXd centroids;  // one row per cluster
  std::vector<std::size_t> assignment;
  std::vector<double> objective_history;  // after every assignment step
  std::size_t iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding over the rows of `points`.
KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed, std::size_t max_iterations = 300,
                    double tolerance = 1e-4);

Instances cluster_centroid_undersample(std::span<const SampledInstance> train, double reduction, std::uint64_t seed,
                                       KMeansResult* trace = nullptr);

/// Crop-and-stretch, drift and reverse applied to one instance.
SampledInstance augment_instance(const SampledInstance& source, const AugmentSpec& spec, std::uint64_t seed);
Instances augment_timeseries(std::span<const SampledInstance> train, double factor, const AugmentSpec& spec,
                             std::uint64_t seed);

/// Dispatches on config.method.
Instances rebalance(std::span<const SampledInstance> train, const BalanceConfig& config);

/// Runs `rebalance` over every instance whose fold differs from `held_out`.
/// Held-out instances are copied through untouched and come first.
Instances rebalance_training_folds(std::span<const SampledInstance> all, int held_out, const BalanceConfig& config);

/// Throws ContaminatedTestFold when the held-out fold contains synthetic
/// instances or its size differs from `expected_count`.
void assert_test_fold_purity(std::span<const SampledInstance> all, int held_out, std::size_t expected_count);

}  // namespace uavtype
