#include "uavtype/lstm.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "container.hpp"
#include "uavtype/error.hpp"

namespace uavtype {

namespace {

constexpr char kModelMagic[8] = {'U', 'A', 'V', 'T', 'L', 'S', 'T', 'M'};
constexpr std::uint32_t kModelVersion = 1;
constexpr std::size_t kPredictChunk = 256;

template <typename Fn>
void for_each_tensor(Model& m, Fn&& fn) {
  fn(m.lstm.wx);
  fn(m.lstm.wh);
  fn(m.lstm.b);
  fn(m.head.w);
  fn(m.head.b);
}

template <typename Fn>
void for_each_tensor_pair(Model& a, const Model& b, Fn&& fn) {
  fn(a.lstm.wx, b.lstm.wx);
  fn(a.lstm.wh, b.lstm.wh);
  fn(a.lstm.b, b.lstm.b);
  fn(a.head.w, b.head.w);
  fn(a.head.b, b.head.b);
}

Eigen::MatrixXd sigmoid(const Eigen::MatrixXd& z) { return (1.0 + (-z.array()).exp()).inverse().matrix(); }

}  // namespace

Model Model::zeros(Eigen::Index features, Eigen::Index hidden) {
  Model m;
  m.lstm.wx = Eigen::MatrixXd::Zero(4 * hidden, features);
  m.lstm.wh = Eigen::MatrixXd::Zero(4 * hidden, hidden);
  m.lstm.b = Eigen::VectorXd::Zero(4 * hidden);
  m.head.w = Eigen::MatrixXd::Zero(kNumClasses, hidden);
  m.head.b = Eigen::VectorXd::Zero(kNumClasses);
  return m;
}

Model Model::initialize(Eigen::Index features, Eigen::Index hidden, std::uint64_t seed) {
  if (features < 1 || hidden < 1) throw Error(ErrorCode::InvalidConfig, "model needs F >= 1 and H >= 1");
  Model m = zeros(features, hidden);
  std::mt19937_64 rng(seed);
  const double bound = 1.0 / std::sqrt(static_cast<double>(hidden));
  std::uniform_real_distribution<double> dist(-bound, bound);
  auto fill = [&](Eigen::MatrixXd& w) {
    for (Eigen::Index c = 0; c < w.cols(); ++c)
      for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = dist(rng);
  };
  fill(m.lstm.wx);
  fill(m.lstm.wh);
  fill(m.head.w);
  m.lstm.b.segment(hidden, hidden).setOnes();
  return m;
}

bool Model::same_shape(const Model& o) const {
  return lstm.wx.rows() == o.lstm.wx.rows() && lstm.wx.cols() == o.lstm.wx.cols() &&
         lstm.wh.rows() == o.lstm.wh.rows() && lstm.wh.cols() == o.lstm.wh.cols() &&
         lstm.b.size() == o.lstm.b.size() && head.w.rows() == o.head.w.rows() && head.w.cols() == o.head.w.cols() &&
         head.b.size() == o.head.b.size();
}

bool Model::all_finite() const {
  return lstm.wx.allFinite() && lstm.wh.allFinite() && lstm.b.allFinite() && head.w.allFinite() &&
         head.b.allFinite();
}

double Model::squared_norm() const {
  return lstm.wx.squaredNorm() + lstm.wh.squaredNorm() + lstm.b.squaredNorm() + head.w.squaredNorm() +
         head.b.squaredNorm();
}

Model& Model::operator+=(const Model& other) {
  for_each_tensor_pair(*this, other, [](auto& a, const auto& b) { a += b; });
  return *this;
}

Model& Model::operator*=(double s) {
  for_each_tensor(*this, [s](auto& a) { a *= s; });
  return *this;
}

ForwardResult forward_batch(const Model& model, std::span<const Eigen::MatrixXd* const> inputs) {
  if (inputs.empty()) throw Error(ErrorCode::ShapeMismatch, "empty batch");
  const Eigen::Index H = model.hidden();
  const Eigen::Index F = model.features();
  const Eigen::Index T = inputs.front()->rows();
  const auto B = static_cast<Eigen::Index>(inputs.size());
  if (T < 1) throw Error(ErrorCode::ShapeMismatch, "instance has no time steps");
  for (const Eigen::MatrixXd* in : inputs) {
    if (in->rows() != T || in->cols() != F)
      throw Error(ErrorCode::ShapeMismatch,
                  fmt::format("instance is {}x{}, model expects {}x{}", in->rows(), in->cols(), T, F));
    if (!in->allFinite()) throw Error(ErrorCode::NonFiniteInput, "instance contains non-finite values");
  }

  ForwardResult res;
  ForwardCache& cache = res.cache;
  cache.steps = T;
  cache.batch = B;
  cache.hidden = H;
  cache.features = F;
  cache.x.resize(F, T * B);
  for (Eigen::Index t = 0; t < T; ++t)
    for (Eigen::Index b = 0; b < B; ++b) cache.x.col(t * B + b) = inputs[static_cast<std::size_t>(b)]->row(t).transpose();

  // input projections for all steps in one product
  cache.gates.noalias() = model.lstm.wx * cache.x;
  cache.gates.colwise() += model.lstm.b;
  cache.h = Eigen::MatrixXd::Zero(H, (T + 1) * B);
  cache.c = Eigen::MatrixXd::Zero(H, (T + 1) * B);
  cache.tanh_c.resize(H, T * B);

  for (Eigen::Index t = 0; t < T; ++t) {
    auto z = cache.gates.middleCols(t * B, B);
    z.noalias() += model.lstm.wh * cache.h.middleCols(t * B, B);
    z.topRows(2 * H) = sigmoid(z.topRows(2 * H));
    z.middleRows(2 * H, H) = z.middleRows(2 * H, H).array().tanh().matrix();
    z.bottomRows(H) = sigmoid(z.bottomRows(H));
    const auto i = z.topRows(H).array();
    const auto f = z.middleRows(H, H).array();
    const auto g = z.middleRows(2 * H, H).array();
    const auto o = z.bottomRows(H).array();
    cache.c.middleCols((t + 1) * B, B) = (f * cache.c.middleCols(t * B, B).array() + i * g).matrix();
    cache.tanh_c.middleCols(t * B, B) = cache.c.middleCols((t + 1) * B, B).array().tanh().matrix();
    cache.h.middleCols((t + 1) * B, B) = (o * cache.tanh_c.middleCols(t * B, B).array()).matrix();
  }

  res.logits.noalias() = model.head.w * cache.h.middleCols(T * B, B);
  res.logits.colwise() += model.head.b;
  return res;
}

ForwardResult forward(const Model& model, const Eigen::MatrixXd& input) {
  const Eigen::MatrixXd* one[] = {&input};
  return forward_batch(model, one);
}

Eigen::Vector3d softmax(const Eigen::Vector3d& logits) {
  const Eigen::Vector3d e = (logits.array() - logits.maxCoeff()).exp();
  return e / e.sum();
}

LossResult loss(const Eigen::Vector3d& logits, int label) {
  if (label < 0 || label >= kNumClasses) throw Error(ErrorCode::InvalidLabel, fmt::format("label {}", label));
  const double mx = logits.maxCoeff();
  const double lse = mx + std::log((logits.array() - mx).exp().sum());
  LossResult out;
  out.value = lse - logits(label);
  out.grad = softmax(logits);
  out.grad(label) -= 1.0;
  return out;
}

Model backward(const Model& model, const ForwardCache& cache, const Eigen::MatrixXd& dlogits) {
  const Eigen::Index H = cache.hidden;
  const Eigen::Index T = cache.steps;
  const Eigen::Index B = cache.batch;
  if (H != model.hidden() || cache.features != model.features() || dlogits.rows() != kNumClasses ||
      dlogits.cols() != B || cache.gates.cols() != T * B || cache.h.cols() != (T + 1) * B)
    throw Error(ErrorCode::CacheMismatch, "forward cache does not match the model or upstream gradient");

  Model grad = Model::zeros(cache.features, H);
  grad.head.w.noalias() = dlogits * cache.h.middleCols(T * B, B).transpose();
  grad.head.b = dlogits.rowwise().sum();

  Eigen::MatrixXd dh = model.head.w.transpose() * dlogits;
  Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(H, B);
  Eigen::MatrixXd dz(4 * H, T * B);
  for (Eigen::Index t = T - 1; t >= 0; --t) {
    const auto gates = cache.gates.middleCols(t * B, B);
    const auto i = gates.topRows(H).array();
    const auto f = gates.middleRows(H, H).array();
    const auto g = gates.middleRows(2 * H, H).array();
    const auto o = gates.bottomRows(H).array();
    const auto tc = cache.tanh_c.middleCols(t * B, B).array();
    const auto c_prev = cache.c.middleCols(t * B, B).array();

    dc.array() += dh.array() * o * (1.0 - tc.square());
    auto d = dz.middleCols(t * B, B);
    d.topRows(H) = (dc.array() * g * i * (1.0 - i)).matrix();
    d.middleRows(H, H) = (dc.array() * c_prev * f * (1.0 - f)).matrix();
    d.middleRows(2 * H, H) = (dc.array() * i * (1.0 - g.square())).matrix();
    d.bottomRows(H) = (dh.array() * tc * o * (1.0 - o)).matrix();
    dc.array() *= f;
    dh.noalias() = model.lstm.wh.transpose() * d;
  }

  grad.lstm.wx.noalias() = dz * cache.x.transpose();
  grad.lstm.wh.noalias() = dz * cache.h.leftCols(T * B).transpose();
  grad.lstm.b = dz.rowwise().sum();
  return grad;
}

AdamState AdamState::for_model(const Model& model, double lr) {
  AdamState s;
  s.lr = lr;
  s.m = Model::zeros(model.features(), model.hidden());
  s.v = s.m;
  return s;
}

void adam_step(Model& params, const Model& grads, AdamState& state) {
  if (!params.same_shape(grads) || !params.same_shape(state.m) || !params.same_shape(state.v))
    throw Error(ErrorCode::ShapeMismatch, "parameters, gradients and optimizer state differ in shape");
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double corr1 = 1.0 - std::pow(AdamState::kBeta1, t);
  const double corr2 = 1.0 - std::pow(AdamState::kBeta2, t);
  auto update = [&](auto& p, const auto& g, auto& m, auto& v) {
    m = AdamState::kBeta1 * m + (1.0 - AdamState::kBeta1) * g;
    v = AdamState::kBeta2 * v + (1.0 - AdamState::kBeta2) * g.cwiseProduct(g);
    p.array() -= state.lr * (m.array() / corr1) / ((v.array() / corr2).sqrt() + AdamState::kEpsilon);
  };
  update(params.lstm.wx, grads.lstm.wx, state.m.lstm.wx, state.v.lstm.wx);
  update(params.lstm.wh, grads.lstm.wh, state.m.lstm.wh, state.v.lstm.wh);
  update(params.lstm.b, grads.lstm.b, state.m.lstm.b, state.v.lstm.b);
  update(params.head.w, grads.head.w, state.m.head.w, state.v.head.w);
  update(params.head.b, grads.head.b, state.m.head.b, state.v.head.b);
}

void TrainConfig::validate() const {
  if (epochs < 1) throw Error(ErrorCode::InvalidConfig, "epochs must be >= 1");
  if (batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch size must be >= 1");
  if (hidden < 1) throw Error(ErrorCode::InvalidConfig, "hidden size must be >= 1");
  if (!(learning_rate > 0.0)) throw Error(ErrorCode::InvalidConfig, "learning rate must be > 0");
  if (!(clip_norm >= 0.0)) throw Error(ErrorCode::InvalidConfig, "clip_norm must be >= 0");
}

TrainResult train(std::span<const SampledInstance> train_split, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  if (train_split.empty()) throw Error(ErrorCode::EmptySplit, "training split is empty");
  std::vector<int> labels(train_split.size());
  for (std::size_t i = 0; i < train_split.size(); ++i) {
    const int cls = train_split[i].class_idx();
    if (cls < 0 || cls >= kNumClasses)
      throw Error(ErrorCode::InvalidLabel, fmt::format("instance '{}' has no class", train_split[i].source_id));
    labels[i] = cls;
  }

  TrainResult res;
  res.model = Model::initialize(train_split.front().values.cols(), config.hidden, config.seed);
  AdamState adam = AdamState::for_model(res.model, config.learning_rate);
  std::mt19937_64 shuffle_rng(config.seed ^ 0x5deece66dULL);

  std::vector<std::size_t> order(train_split.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<const Eigen::MatrixXd*> inputs;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      // canonical order inside a batch, so the summed gradient does not depend on the shuffle
      std::vector<std::size_t> members(order.begin() + static_cast<std::ptrdiff_t>(start),
                                       order.begin() + static_cast<std::ptrdiff_t>(end));
      std::sort(members.begin(), members.end());
      inputs.clear();
      for (std::size_t idx : members) inputs.push_back(&train_split[idx].values);

      ForwardResult fwd = forward_batch(res.model, inputs);
      Eigen::MatrixXd dlogits(kNumClasses, static_cast<Eigen::Index>(members.size()));
      double batch_loss = 0.0;
      for (std::size_t b = 0; b < members.size(); ++b) {
        const auto col = static_cast<Eigen::Index>(b);
        const LossResult l = loss(fwd.logits.col(col), labels[members[b]]);
        batch_loss += l.value;
        dlogits.col(col) = l.grad;
      }
      if (!std::isfinite(batch_loss))
        throw Error(ErrorCode::DivergedLoss,
                    fmt::format("non-finite loss at epoch {}, batch starting at {} (lr {}, clip {})", epoch + 1,
                                start, config.learning_rate, config.clip_norm));
      epoch_loss += batch_loss;
      dlogits /= static_cast<double>(members.size());

      Model grad = backward(res.model, fwd.cache, dlogits);
      if (config.clip_norm > 0.0) {
        const double norm = std::sqrt(grad.squared_norm());
        if (norm > config.clip_norm) grad *= config.clip_norm / norm;
      }
      adam_step(res.model, grad, adam);
    }
    epoch_loss /= static_cast<double>(order.size());
    res.epoch_loss.push_back(epoch_loss);
    if (on_epoch) on_epoch(epoch + 1, epoch_loss);
  }
  if (!res.model.all_finite()) throw Error(ErrorCode::DivergedLoss, "parameters became non-finite");
  return res;
}

namespace {

Prediction to_prediction(const Eigen::Vector3d& logits) {
  Prediction p;
  const Eigen::Vector3d probs = softmax(logits);
  for (int c = 0; c < kNumClasses; ++c) {
    p.probabilities[static_cast<std::size_t>(c)] = probs(c);
    if (probs(c) > probs(p.cls)) p.cls = c;
  }
  return p;
}

}  // namespace

Prediction predict(const Model& model, const Eigen::MatrixXd& input) {
  return to_prediction(forward(model, input).logits.col(0));
}

std::vector<Prediction> predict_all(const Model& model, std::span<const SampledInstance> instances) {
  std::vector<Prediction> out;
  out.reserve(instances.size());
  std::vector<const Eigen::MatrixXd*> inputs;
  for (std::size_t start = 0; start < instances.size(); start += kPredictChunk) {
    inputs.clear();
    for (std::size_t i = start; i < std::min(instances.size(), start + kPredictChunk); ++i)
      inputs.push_back(&instances[i].values);
    const ForwardResult fwd = forward_batch(model, inputs);
    for (Eigen::Index b = 0; b < fwd.logits.cols(); ++b) out.push_back(to_prediction(fwd.logits.col(b)));
  }
  return out;
}

std::vector<std::uint8_t> encode_model(const Model& model) {
  std::vector<std::uint8_t> out(std::begin(kModelMagic), std::end(kModelMagic));
  detail::append_le<std::uint32_t>(out, kModelVersion);
  detail::append_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.hidden()));
  detail::append_le<std::uint32_t>(out, static_cast<std::uint32_t>(model.features()));
  Model copy = model;
  for_each_tensor(copy, [&](const auto& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) detail::append_le<double>(out, t.data()[i]);
  });
  detail::append_le<std::uint32_t>(out, detail::crc32_of(out));
  return out;
}

Model decode_model(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 24 || !std::equal(std::begin(kModelMagic), std::end(kModelMagic), bytes.begin()))
    throw Error(ErrorCode::VersionMismatch, "not a model checkpoint");
  const std::vector<std::uint8_t> body(bytes.begin(), bytes.end() - 4);
  detail::Cursor cur(body.data() + 8, body.size() - 8);
  const auto version = cur.get<std::uint32_t>();
  if (version != kModelVersion)
    throw Error(ErrorCode::VersionMismatch, fmt::format("checkpoint version {}, expected {}", version, kModelVersion));
  if (detail::crc32_of(body) != detail::read_le<std::uint32_t>(bytes.data() + bytes.size() - 4))
    throw Error(ErrorCode::ChecksumFailure, "checkpoint checksum mismatch");
  const auto H = cur.get<std::uint32_t>();
  const auto F = cur.get<std::uint32_t>();
  const std::uint64_t expected = 8ULL * (4ULL * H * F + 4ULL * H * H + 4ULL * H + 3ULL * H + 3ULL);
  if (H == 0 || F == 0 || cur.remaining() != expected)
    throw Error(ErrorCode::ChecksumFailure, "checkpoint size does not match its header");
  Model m = Model::zeros(F, H);
  for_each_tensor(m, [&](auto& t) {
    for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = cur.get<double>();
  });
  return m;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  detail::write_file_atomic(path, encode_model(model));
}

Model load_model(const std::filesystem::path& path) { return decode_model(detail::read_file(path)); }

}  // namespace uavtype
