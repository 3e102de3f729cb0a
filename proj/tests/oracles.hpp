#pragma once

// Slow, independent reimplementations used to cross-check the library.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "uavtype/features.hpp"
#include "uavtype/lstm.hpp"
#include "uavtype/resample.hpp"

namespace oracle {

using u128 = unsigned __int128;

/// Means per (bin, feature) by scanning every bin for every sample.
/// A window of 0 means "whole bin"; otherwise window_us is compared with
/// the exact rational offset of the sample from the bin start.
inline Eigen::MatrixXd brute_force_bins(const std::vector<uavtype::FeatureSeries>& series, std::size_t n,
                                        std::uint64_t window_us = 0) {
  std::uint64_t t_min = UINT64_MAX, t_max = 0;
  for (const auto& s : series) {
    if (s.timestamps.empty()) continue;
    t_min = std::min(t_min, s.timestamps.front());
    t_max = std::max(t_max, s.timestamps.back());
  }
  const u128 span = t_max - t_min;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(series.size()));
  for (std::size_t f = 0; f < series.size(); ++f) {
    for (std::size_t b = 0; b < n; ++b) {
      double sum = 0.0;
      std::size_t count = 0;
      for (std::size_t i = 0; i < series[f].timestamps.size(); ++i) {
        const u128 off = static_cast<u128>(series[f].timestamps[i] - t_min) * n;
        const u128 lo = static_cast<u128>(b) * span;
        const u128 hi = static_cast<u128>(b + 1) * span;
        const bool last = b + 1 == n;
        const bool in_bin = off >= lo && (off < hi || (last && off == hi));
        if (!in_bin) continue;
        if (window_us != 0 && off - lo > static_cast<u128>(window_us) * n) continue;
        sum += series[f].values[i];
        ++count;
      }
      if (count > 0) out(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(f)) = sum / static_cast<double>(count);
    }
  }
  return out;
}

/// Small flight with 1-4 features, each on its own irregular clock.
inline std::vector<uavtype::FeatureSeries> random_flight(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_features(1, 4), n_points(1, 40);
  std::uniform_int_distribution<std::uint64_t> start(0, 5'000'000), step(1, 900'000);
  std::normal_distribution<double> value(0.0, 3.0);
  std::vector<uavtype::FeatureSeries> out(static_cast<std::size_t>(n_features(rng)));
  for (auto& s : out) {
    std::uint64_t t = start(rng);
    const int pts = n_points(rng);
    for (int i = 0; i < pts; ++i) {
      s.timestamps.push_back(t);
      s.values.push_back(value(rng));
      if (rng() % 5 != 0) t += step(rng);  // repeated timestamps now and then
    }
  }
  return out;
}

inline Eigen::Matrix3d rotation_from_quaternion(double w, double x, double y, double z) {
  const double n = std::sqrt(w * w + x * x + y * y + z * z);
  w /= n, x /= n, y /= n, z /= n;
  Eigen::Matrix3d r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),  //
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),   //
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

/// R = Rz(yaw) Ry(pitch) Rx(roll).
inline Eigen::Matrix3d rotation_from_euler(double roll, double pitch, double yaw) {
  const Eigen::Matrix3d rx = Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitX()).toRotationMatrix();
  const Eigen::Matrix3d ry = Eigen::AngleAxisd(pitch, Eigen::Vector3d::UnitY()).toRotationMatrix();
  const Eigen::Matrix3d rz = Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  return rz * ry * rx;
}

/// Random training split with the given class counts, [rows x cols] each.
inline uavtype::Instances random_instances(std::array<std::size_t, uavtype::kNumClasses> counts, int rows, int cols,
                                           std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  uavtype::Instances out;
  for (int c = 0; c < uavtype::kNumClasses; ++c)
    for (std::size_t i = 0; i < counts[static_cast<std::size_t>(c)]; ++i) {
      uavtype::SampledInstance s;
      s.values = Eigen::MatrixXd::NullaryExpr(rows, cols, [&] { return g(rng) + 3.0 * c; });
      s.observed = uavtype::MaskMatrix::Ones(rows, cols);
      s.label = uavtype::class_vehicle(c);
      s.source_id = std::to_string(c) + "_" + std::to_string(i);
      out.push_back(std::move(s));
    }
  return out;
}

/// Views over the five parameter tensors of a model, in checkpoint order.
inline std::array<Eigen::Map<Eigen::VectorXd>, 5> tensors(uavtype::Model& m) {
  auto view = [](auto& t) { return Eigen::Map<Eigen::VectorXd>(t.data(), t.size()); };
  return {view(m.lstm.wx), view(m.lstm.wh), view(m.lstm.b), view(m.head.w), view(m.head.b)};
}

/// Model with every parameter (biases included) drawn from U(-scale, scale).
inline uavtype::Model random_model(Eigen::Index features, Eigen::Index hidden, std::mt19937_64& rng,
                                   double scale = 0.5) {
  uavtype::Model m = uavtype::Model::zeros(features, hidden);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (auto t : tensors(m))
    for (Eigen::Index i = 0; i < t.size(); ++i) t(i) = u(rng);
  return m;
}

/// Largest relative error between backward() and central differences of
/// the loss, over every parameter. Differences below `floor` are compared
/// against `floor` instead of their own magnitude.
inline double max_gradient_error(const uavtype::Model& model, const Eigen::MatrixXd& input, int label,
                                 double step = 1e-5, double floor = 1e-6) {
  const uavtype::ForwardResult fwd = uavtype::forward(model, input);
  const uavtype::LossResult l = uavtype::loss(fwd.logits.col(0), label);
  uavtype::Model analytic = uavtype::backward(model, fwd.cache, l.grad);
  auto objective = [&](const uavtype::Model& m) { return uavtype::loss(uavtype::forward(m, input).logits.col(0), label).value; };

  double worst = 0.0;
  uavtype::Model probe = model;
  auto grads = tensors(analytic);
  auto params = tensors(probe);
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (Eigen::Index i = 0; i < params[t].size(); ++i) {
      const double saved = params[t](i);
      params[t](i) = saved + step;
      const double up = objective(probe);
      params[t](i) = saved - step;
      const double down = objective(probe);
      params[t](i) = saved;
      const double numeric = (up - down) / (2 * step);
      const double a = grads[t](i);
      const double denom = std::max({std::abs(a), std::abs(numeric), floor});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace oracle
