#include "uavtype/rebalance.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "uavtype/error.hpp"

namespace uavtype {

namespace {

constexpr int kMinorityClasses[] = {kFixedWingClass, kHexarotorClass};

std::vector<std::size_t> members_of(std::span<const SampledInstance> train, int cls) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < train.size(); ++i)
    if (class_index(train[i].label) == cls) idx.push_back(i);
  return idx;
}

std::size_t scaled_count(std::size_t n, double factor) {
  return static_cast<std::size_t>(std::llround(static_cast<double>(n) * factor));
}

Eigen::MatrixXd flatten(std::span<const SampledInstance> train, const std::vector<std::size_t>& idx) {
  const Eigen::Index dim = train[idx.front()].values.size();
  Eigen::MatrixXd points(static_cast<Eigen::Index>(idx.size()), dim);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const Eigen::MatrixXd& v = train[idx[r]].values;
    if (v.size() != dim) throw Error(ErrorCode::ShapeMismatch, "instances of one class differ in shape");
    points.row(static_cast<Eigen::Index>(r)) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), dim);
  }
  return points;
}

Eigen::MatrixXd unflatten(const Eigen::RowVectorXd& row, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Eigen::MatrixXd>(row.data(), rows, cols);
}

void require_minorities(std::span<const SampledInstance> train) {
  for (int cls : kMinorityClasses)
    if (members_of(train, cls).empty())
      throw Error(ErrorCode::EmptyClass,
                  fmt::format("training split has no {} instances", kClassNames[static_cast<std::size_t>(cls)]));
}

Instances copy_all(std::span<const SampledInstance> train) { return Instances(train.begin(), train.end()); }

}  // namespace

std::string_view to_string(BalanceMethod method) {
  switch (method) {
    case BalanceMethod::None: return "none";
    case BalanceMethod::RandomOversample: return "random_oversample";
    case BalanceMethod::RandomUndersample: return "random_undersample";
    case BalanceMethod::Smote: return "smote";
    case BalanceMethod::ClusterCentroid: return "cluster_centroid";
    case BalanceMethod::Augmentation: return "augmentation";
  }
  return "none";
}

void BalanceConfig::validate() const {
  if (!(minority_factor >= 1.0) || !std::isfinite(minority_factor))
    throw Error(ErrorCode::InvalidConfig, "minority_factor must be >= 1");
  if (!(majority_reduction >= 0.0 && majority_reduction < 1.0))
    throw Error(ErrorCode::InvalidConfig, "majority_reduction must be in [0, 1)");
  if (smote_k == 0) throw Error(ErrorCode::InvalidConfig, "smote_k must be >= 1");
  if (!(augment.crop_min > 0.0 && augment.crop_min <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "augment.crop_min must be in (0, 1]");
  if (!(augment.drift_max >= 0.0)) throw Error(ErrorCode::InvalidConfig, "augment.drift_max must be >= 0");
  if (!(augment.reverse_probability >= 0.0 && augment.reverse_probability <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "augment.reverse_probability must be in [0, 1]");
}

Instances random_oversample(std::span<const SampledInstance> train, double factor, std::uint64_t seed) {
  require_minorities(train);
  std::mt19937_64 rng(seed);
  Instances out = copy_all(train);
  for (int cls : kMinorityClasses) {
    const auto members = members_of(train, cls);
    const std::size_t target = scaled_count(members.size(), factor);
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    for (std::size_t n = members.size(); n < target; ++n) {
      SampledInstance dup = train[members[pick(rng)]];
      dup.synthetic = true;
      dup.source_id = "dup:" + dup.source_id;
      out.push_back(std::move(dup));
    }
  }
  return out;
}

Instances random_undersample(std::span<const SampledInstance> train, double reduction, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  auto quads = members_of(train, kQuadrotorClass);
  const std::size_t keep = scaled_count(quads.size(), 1.0 - reduction);
  for (std::size_t i = 0; i < keep; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, quads.size() - 1);
    std::swap(quads[i], quads[pick(rng)]);
  }
  std::vector<bool> retained(train.size(), true);
  for (std::size_t i = keep; i < quads.size(); ++i) retained[quads[i]] = false;
  Instances out;
  for (std::size_t i = 0; i < train.size(); ++i)
    if (retained[i]) out.push_back(train[i]);
  return out;
}

Eigen::MatrixXd smote_interpolate(const Eigen::MatrixXd& base, const Eigen::MatrixXd& neighbor, double u) {
  return base + u * (neighbor - base);
}

std::vector<std::size_t> nearest_neighbors(const Eigen::MatrixXd& points, std::size_t i, std::size_t k) {
  const auto n = static_cast<std::size_t>(points.rows());
  std::vector<std::pair<double, std::size_t>> dist;
  dist.reserve(n);
  const Eigen::RowVectorXd x = points.row(static_cast<Eigen::Index>(i));
  for (std::size_t j = 0; j < n; ++j)
    if (j != i) dist.emplace_back((points.row(static_cast<Eigen::Index>(j)) - x).squaredNorm(), j);
  k = std::min(k, dist.size());
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < k; ++j) out.push_back(dist[j].second);
  return out;
}

Instances smote_oversample(std::span<const SampledInstance> train, double factor, std::size_t k, std::uint64_t seed,
                           std::vector<SmoteDraw>* trace) {
  require_minorities(train);
  if (k == 0) throw Error(ErrorCode::InvalidConfig, "smote k must be >= 1");
  std::mt19937_64 rng(seed);
  Instances out = copy_all(train);
  for (int cls : kMinorityClasses) {
    const auto members = members_of(train, cls);
    if (members.size() < 2)
      throw Error(ErrorCode::ClassSmallerThanK,
                  fmt::format("{} has {} member(s); SMOTE needs at least 2",
                              kClassNames[static_cast<std::size_t>(cls)], members.size()));
    const std::size_t target = scaled_count(members.size(), factor);
    if (target <= members.size()) continue;
    const std::size_t k_eff = std::min(k, members.size() - 1);
    const Eigen::MatrixXd points = flatten(train, members);
    std::vector<std::vector<std::size_t>> neighbors(members.size());

    std::uniform_int_distribution<std::size_t> pick_base(0, members.size() - 1);
    std::uniform_int_distribution<std::size_t> pick_neighbor(0, k_eff - 1);
    std::uniform_real_distribution<double> pick_u(0.0, 1.0);
    for (std::size_t n = members.size(); n < target; ++n) {
      const std::size_t b = pick_base(rng);
      if (neighbors[b].empty()) neighbors[b] = nearest_neighbors(points, b, k_eff);
      const std::size_t z = neighbors[b][pick_neighbor(rng)];
      const double u = pick_u(rng);

      const SampledInstance& base = train[members[b]];
      const SampledInstance& other = train[members[z]];
      SampledInstance syn;
      syn.values = smote_interpolate(base.values, other.values, u);
      syn.observed = base.observed.cwiseMax(other.observed);
      syn.label = base.label;
      syn.source_id = "smote:" + base.source_id;
      syn.synthetic = true;
      syn.fold = base.fold;
      out.push_back(std::move(syn));
      if (trace != nullptr) trace->push_back({members[b], members[z], u});
    }
  }
  return out;
}

KMeansResult kmeans(const Eigen::MatrixXd& points, std::size_t k, std::uint64_t seed, std::size_t max_iterations,
                    double tolerance) {
  const auto n = static_cast<std::size_t>(points.rows());
  if (k == 0 || k > n) throw Error(ErrorCode::InvalidConfig, fmt::format("k-means with k={} on {} points", k, n));
  std::mt19937_64 rng(seed);
  const Eigen::Index dim = points.cols();
  auto row = [&](std::size_t i) { return points.row(static_cast<Eigen::Index>(i)); };

  // k-means++ seeding
  KMeansResult res;
  res.centroids.resize(static_cast<Eigen::Index>(k), dim);
  std::vector<bool> chosen(n, false);
  std::vector<double> d2(n, std::numeric_limits<double>::infinity());
  std::size_t first = std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
  res.centroids.row(0) = row(first);
  chosen[first] = true;
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d2[i] = std::min(d2[i], (row(i) - res.centroids.row(static_cast<Eigen::Index>(c - 1))).squaredNorm());
      if (!chosen[i]) total += d2[i];
    }
    std::size_t next = n;
    if (total > 0.0) {
      double target = std::uniform_real_distribution<double>(0.0, total)(rng);
      for (std::size_t i = 0; i < n; ++i) {
        if (chosen[i] || d2[i] <= 0.0) continue;
        next = i;
        target -= d2[i];
        if (target < 0.0) break;
      }
    }
    if (next == n)  // only duplicates of chosen points remain
      for (std::size_t i = 0; i < n && next == n; ++i)
        if (!chosen[i]) next = i;
    chosen[next] = true;
    res.centroids.row(static_cast<Eigen::Index>(c)) = row(next);
  }

  res.assignment.assign(n, 0);
  std::vector<double> dist(n, 0.0);
  for (std::size_t iter = 0; iter < max_iterations; ++iter) {
    double objective = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double best = std::numeric_limits<double>::infinity();
      std::size_t best_c = 0;
      for (std::size_t c = 0; c < k; ++c) {
        const double d = (row(i) - res.centroids.row(static_cast<Eigen::Index>(c))).squaredNorm();
        if (d < best) {
          best = d;
          best_c = c;
        }
      }
      res.assignment[i] = best_c;
      dist[i] = best;
      objective += best;
    }
    res.objective_history.push_back(objective);
    res.iterations = iter + 1;

    Eigen::MatrixXd updated = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(k), dim);
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      updated.row(static_cast<Eigen::Index>(res.assignment[i])) += row(i);
      ++counts[res.assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        updated.row(static_cast<Eigen::Index>(c)) /= static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: move it onto the worst-fitting point of a shared cluster.
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i)
        if (counts[res.assignment[i]] > 1 && (far == n || dist[i] > dist[far])) far = i;
      if (far == n) {
        updated.row(static_cast<Eigen::Index>(c)) = res.centroids.row(static_cast<Eigen::Index>(c));
        continue;
      }
      --counts[res.assignment[far]];
      res.assignment[far] = c;
      counts[c] = 1;
      dist[far] = 0.0;
      updated.row(static_cast<Eigen::Index>(c)) = row(far);
    }
    double shift = 0.0;
    for (std::size_t c = 0; c < k; ++c)
      shift = std::max(shift, (updated.row(static_cast<Eigen::Index>(c)) -
                               res.centroids.row(static_cast<Eigen::Index>(c))).norm());
    res.centroids = std::move(updated);
    if (shift <= tolerance) break;
  }
  return res;
}

Instances cluster_centroid_undersample(std::span<const SampledInstance> train, double reduction, std::uint64_t seed,
                                       KMeansResult* trace) {
  const auto quads = members_of(train, kQuadrotorClass);
  if (quads.empty()) throw Error(ErrorCode::EmptyClass, "training split has no quadrotor instances");
  const std::size_t m = scaled_count(quads.size(), 1.0 - reduction);
  if (m == 0) throw Error(ErrorCode::InvalidConfig, "reduction leaves no quadrotor centroids");

  const Eigen::MatrixXd points = flatten(train, quads);
  KMeansResult km = kmeans(points, m, seed);
  const Eigen::Index rows = train[quads.front()].values.rows();
  const Eigen::Index cols = train[quads.front()].values.cols();

  Instances out;
  for (const SampledInstance& inst : train)
    if (class_index(inst.label) != kQuadrotorClass) out.push_back(inst);
  for (std::size_t c = 0; c < m; ++c) {
    SampledInstance centroid;
    centroid.values = unflatten(km.centroids.row(static_cast<Eigen::Index>(c)), rows, cols);
    centroid.observed = MaskMatrix::Zero(rows, cols);
    for (std::size_t i = 0; i < quads.size(); ++i)
      if (km.assignment[i] == c) centroid.observed = centroid.observed.cwiseMax(train[quads[i]].observed);
    centroid.label = VehicleType::Quadrotor;
    centroid.source_id = fmt::format("centroid:{}", c);
    centroid.synthetic = true;
    out.push_back(std::move(centroid));
  }
  if (trace != nullptr) *trace = std::move(km);
  return out;
}

SampledInstance augment_instance(const SampledInstance& source, const AugmentSpec& spec, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Eigen::Index rows = source.values.rows();
  const Eigen::Index cols = source.values.cols();
  SampledInstance out = source;
  out.synthetic = true;
  out.source_id = "aug:" + source.source_id;

  // crop a contiguous block and stretch it back to `rows` by linear interpolation
  const double fraction =
      spec.crop_min >= 1.0 ? 1.0 : std::uniform_real_distribution<double>(spec.crop_min, 1.0)(rng);
  const Eigen::Index kept =
      std::clamp<Eigen::Index>(std::llround(fraction * static_cast<double>(rows)), std::min<Eigen::Index>(2, rows), rows);
  const Eigen::Index start = std::uniform_int_distribution<Eigen::Index>(0, rows - kept)(rng);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const double pos = rows == 1 ? static_cast<double>(start)
                                 : static_cast<double>(start) + static_cast<double>(i * (kept - 1)) /
                                                                    static_cast<double>(rows - 1);
    const auto lo = static_cast<Eigen::Index>(std::floor(pos));
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0 || lo + 1 >= rows) {
      out.values.row(i) = source.values.row(lo);
      out.observed.row(i) = source.observed.row(lo);
    } else {
      out.values.row(i) = (1.0 - frac) * source.values.row(lo) + frac * source.values.row(lo + 1);
      out.observed.row(i) = source.observed.row(frac < 0.5 ? lo : lo + 1);
    }
  }

  // drift: a Gaussian random walk per feature scaled to d * feature range
  const double d = spec.drift_max > 0.0 ? std::uniform_real_distribution<double>(0.0, spec.drift_max)(rng) : 0.0;
  std::normal_distribution<double> step(0.0, 1.0);
  for (Eigen::Index f = 0; f < cols; ++f) {
    Eigen::VectorXd walk(rows);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < rows; ++i) walk(i) = (acc += step(rng));
    const double peak = walk.cwiseAbs().maxCoeff();
    const double range = out.values.col(f).maxCoeff() - out.values.col(f).minCoeff();
    if (d > 0.0 && peak > 0.0 && range > 0.0) out.values.col(f) += walk * (d * range / peak);
  }

  if (std::bernoulli_distribution(spec.reverse_probability)(rng)) {
    out.values = out.values.colwise().reverse().eval();
    out.observed = out.observed.colwise().reverse().eval();
  }
  return out;
}

Instances augment_timeseries(std::span<const SampledInstance> train, double factor, const AugmentSpec& spec,
                             std::uint64_t seed) {
  require_minorities(train);
  std::mt19937_64 rng(seed);
  Instances out = copy_all(train);
  for (int cls : kMinorityClasses) {
    const auto members = members_of(train, cls);
    const std::size_t target = scaled_count(members.size(), factor);
    std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
    for (std::size_t n = members.size(); n < target; ++n) {
      const std::size_t b = pick(rng);
      out.push_back(augment_instance(train[members[b]], spec, rng()));
    }
  }
  return out;
}

Instances rebalance(std::span<const SampledInstance> train, const BalanceConfig& config) {
  config.validate();
  switch (config.method) {
    case BalanceMethod::None: return copy_all(train);
    case BalanceMethod::RandomOversample: return random_oversample(train, config.minority_factor, config.seed);
    case BalanceMethod::RandomUndersample: return random_undersample(train, config.majority_reduction, config.seed);
    case BalanceMethod::Smote: return smote_oversample(train, config.minority_factor, config.smote_k, config.seed);
    case BalanceMethod::ClusterCentroid:
      return cluster_centroid_undersample(train, config.majority_reduction, config.seed);
    case BalanceMethod::Augmentation:
      return augment_timeseries(train, config.minority_factor, config.augment, config.seed);
  }
  return copy_all(train);
}

Instances rebalance_training_folds(std::span<const SampledInstance> all, int held_out, const BalanceConfig& config) {
  Instances test;
  Instances train;
  for (const SampledInstance& inst : all) (inst.fold == held_out ? test : train).push_back(inst);
  Instances balanced = rebalance(train, config);
  for (SampledInstance& inst : balanced)
    if (inst.fold == held_out) inst.fold = -1;  // unreachable for the shipped methods
  test.insert(test.end(), std::make_move_iterator(balanced.begin()), std::make_move_iterator(balanced.end()));
  return test;
}

void assert_test_fold_purity(std::span<const SampledInstance> all, int held_out, std::size_t expected_count) {
  std::size_t count = 0;
  for (const SampledInstance& inst : all) {
    if (inst.fold != held_out) continue;
    if (inst.synthetic)
      throw Error(ErrorCode::ContaminatedTestFold,
                  fmt::format("synthetic instance '{}' sits in held-out fold {}", inst.source_id, held_out));
    ++count;
  }
  if (count != expected_count)
    throw Error(ErrorCode::ContaminatedTestFold,
                fmt::format("held-out fold {} has {} instances, expected {}", held_out, count, expected_count));
}

}  // namespace uavtype
