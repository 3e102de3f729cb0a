#pragma once

#include <Eigen/Core>

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "uavtype/resample.hpp"
#include "uavtype/types.hpp"

namespace uavtype {

/// Gate rows are stacked input, forget, cell-candidate, output.
struct LstmParams {
  Eigen::MatrixXd wx;  // [4H x F]
  Eigen::MatrixXd wh;  // [4H x H]
  Eigen::VectorXd b;   // [4H]
  bool operator==(const LstmParams&) const = default;
};

struct ClassifierParams {
  Eigen::MatrixXd w;  // [3 x H]
  Eigen::VectorXd b;  // [3]
  bool operator==(const ClassifierParams&) const = default;
};

/// Also used to hold gradients and Adam moments, which share the shapes.
struct Model {
  LstmParams lstm;
  ClassifierParams head;

  Eigen::Index hidden() const { return lstm.wh.cols(); }
  Eigen::Index features() const { return lstm.wx.cols(); }

  static Model zeros(Eigen::Index features, Eigen::Index hidden);
  /// Uniform(-1/sqrt(H), 1/sqrt(H)) weights, zero biases, forget bias 1.
  static Model initialize(Eigen::Index features, Eigen::Index hidden, std::uint64_t seed);

  bool same_shape(const Model& other) const;
  bool all_finite() const;
  double squared_norm() const;
  Model& operator+=(const Model& other);
  Model& operator*=(double s);
  bool operator==(const Model&) const = default;
};

/// Activations of one batch; columns are batch members.
struct ForwardCache {
  Eigen::Index steps = 0;
  Eigen::Index batch = 0;
  Eigen::Index hidden = 0;
  Eigen::Index features = 0;
  Eigen::MatrixXd x;      // [F x T*B], step t occupies columns [t*B, (t+1)*B)
  Eigen::MatrixXd gates;  // [4H x T*B] after the nonlinearities
  Eigen::MatrixXd h;      // [H x (T+1)*B], block 0 is h_0 = 0
  Eigen::MatrixXd c;      // [H x (T+1)*B]
  Eigen::MatrixXd tanh_c; // [H x T*B]
};

struct ForwardResult {
  Eigen::MatrixXd logits;  // [3 x B]
  ForwardCache cache;
};

/// Every input is [T x F] with the same T. Throws ShapeMismatch or NonFiniteInput.
ForwardResult forward_batch(const Model& model, std::span<const Eigen::MatrixXd* const> inputs);
ForwardResult forward(const Model& model, const Eigen::MatrixXd& input);

struct LossResult {
  double value = 0.0;
  Eigen::Vector3d grad;  // softmax - onehot
};

/// Softmax cross-entropy via log-sum-exp. Throws InvalidLabel.
LossResult loss(const Eigen::Vector3d& logits, int label);

Eigen::Vector3d softmax(const Eigen::Vector3d& logits);

/// Gradients summed over the batch columns of `dlogits` [3 x B].
/// Throws CacheMismatch when the cache does not fit the model or dlogits.
Model backward(const Model& model, const ForwardCache& cache, const Eigen::MatrixXd& dlogits);

struct AdamState {
  static constexpr double kBeta1 = 0.9;
  static constexpr double kBeta2 = 0.999;
  static constexpr double kEpsilon = 1e-8;

  double lr = 1e-3;
  Model m;
  Model v;
  std::uint64_t step = 0;

  static AdamState for_model(const Model& model, double lr = 1e-3);
};

/// Throws ShapeMismatch when grads, state and params differ in shape.
void adam_step(Model& params, const Model& grads, AdamState& state);

struct TrainConfig {
  std::size_t epochs = 50;
  std::size_t batch_size = 64;
  std::uint64_t seed = 0;
  bool shuffle = true;
  Eigen::Index hidden = 128;
  double learning_rate = 1e-3;
  double clip_norm = 0.0;  // global gradient norm cap, 0 disables

  /// Throws InvalidConfig.
  void validate() const;
};

struct TrainResult {
  Model model;
  std::vector<double> epoch_loss;  // mean training loss of every epoch
};

using EpochCallback = std::function<void(std::size_t epoch, double mean_loss)>;

/// Mini-batch Adam on mean batch loss. Throws EmptySplit, InvalidLabel, DivergedLoss.
TrainResult train(std::span<const SampledInstance> train_split, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

struct Prediction {
  int cls = 0;
  std::array<double, kNumClasses> probabilities{};
};

Prediction predict(const Model& model, const Eigen::MatrixXd& input);
std::vector<Prediction> predict_all(const Model& model, std::span<const SampledInstance> instances);

/// Checkpoint: magic "UAVTLSTM", u32 version, u32 H, u32 F, the five tensors
/// as little-endian f64 in column-major order, then CRC-32 of everything before it.
std::vector<std::uint8_t> encode_model(const Model& model);
Model decode_model(const std::vector<std::uint8_t>& bytes);
void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace uavtype
