#include "depthlift/net.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>

namespace depthlift {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

namespace {
constexpr std::uint64_t kStreamInit = 21;
constexpr std::uint64_t kStreamTraining = 22;
constexpr double kStdFloor = 1e-8;
}  // namespace

void NetConfig::validate() const {
  if (n_joints != kNumJoints) throw ConfigError("net is defined for the 17-joint skeleton");
  if (hidden_width < 8) throw ConfigError("hidden_width must be >= 8");
  if (n_blocks < 1) throw ConfigError("n_blocks must be >= 1");
  if (!(dropout_rate >= 0.0 && dropout_rate < 1.0)) throw ConfigError("dropout_rate must lie in [0, 1)");
  if (!(bn_epsilon > 0.0)) throw ConfigError("bn_epsilon must be positive");
  if (!(bn_momentum > 0.0 && bn_momentum < 1.0)) throw ConfigError("bn_momentum must lie in (0, 1)");
  if (activation != "relu") throw ConfigError("unsupported activation '" + activation + "'");
}

NetConfig NetConfig::desk_scale() { return NetConfig{}; }

NetConfig NetConfig::full_scale() {
  NetConfig cfg;
  cfg.hidden_width = 1024;
  cfg.n_blocks = 3;
  return cfg;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ConfigError("adam betas must lie in [0, 1)");
  }
  if (!(adam_epsilon > 0.0)) throw ConfigError("adam_epsilon must be positive");
}

long NetParams::parameter_count() const {
  long n = input.weight.size() + input.bias.size() + output.weight.size() + output.bias.size();
  for (const auto& b : blocks) {
    n += b.fc1.weight.size() + b.fc1.bias.size() + b.fc2.weight.size() + b.fc2.bias.size();
    n += b.bn1.gamma.size() + b.bn1.beta.size() + b.bn2.gamma.size() + b.bn2.beta.size();
  }
  return n;
}

namespace {

DenseLayer xavier_dense(int fan_in, int fan_out, Rng& rng) {
  DenseLayer l;
  l.weight.resize(fan_in, fan_out);
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (Eigen::Index i = 0; i < l.weight.size(); ++i) {
    l.weight.data()[i] = rng.uniform(-limit, limit);
  }
  l.bias = VectorXd::Zero(fan_out);
  return l;
}

BatchNormLayer identity_bn(int width) {
  BatchNormLayer bn;
  bn.gamma = VectorXd::Ones(width);
  bn.beta = VectorXd::Zero(width);
  bn.running_mean = VectorXd::Zero(width);
  bn.running_var = VectorXd::Ones(width);
  return bn;
}

}  // namespace

NetParams xavier_init(const NetConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng(seed, kStreamInit);
  NetParams p;
  p.cfg = cfg;
  p.input = xavier_dense(cfg.input_dim(), cfg.hidden_width, rng);
  p.blocks.resize(cfg.n_blocks);
  for (auto& b : p.blocks) {
    b.fc1 = xavier_dense(cfg.hidden_width, cfg.hidden_width, rng);
    b.bn1 = identity_bn(cfg.hidden_width);
    b.fc2 = xavier_dense(cfg.hidden_width, cfg.hidden_width, rng);
    b.bn2 = identity_bn(cfg.hidden_width);
  }
  p.output = xavier_dense(cfg.hidden_width, cfg.output_dim(), rng);
  return p;
}

namespace {

MatrixXd dense_forward(const DenseLayer& l, const MatrixXd& x) {
  MatrixXd y = x * l.weight;
  y.rowwise() += l.bias.transpose();
  return y;
}

// Train-mode BN with biased batch statistics; infer-mode with running stats.
MatrixXd bn_forward(const BatchNormLayer& bn, const MatrixXd& x, double eps, RunMode mode,
                    BnCache* cache) {
  if (mode == RunMode::train) {
    const double b = static_cast<double>(x.rows());
    VectorXd mean = x.colwise().mean();
    MatrixXd centered = x.rowwise() - mean.transpose();
    VectorXd var = centered.array().square().colwise().sum() / b;
    Eigen::ArrayXd inv_std = (var.array() + eps).rsqrt();
    MatrixXd x_hat = centered.array().rowwise() * inv_std.transpose();
    MatrixXd y = (x_hat.array().rowwise() * bn.gamma.array().transpose()).matrix();
    y.rowwise() += bn.beta.transpose();
    if (cache) {
      cache->x_hat = std::move(x_hat);
      cache->inv_std = std::move(inv_std);
      cache->batch_mean = std::move(mean);
      cache->batch_var = std::move(var);
    }
    return y;
  }
  Eigen::ArrayXd inv_std = (bn.running_var.array() + eps).rsqrt();
  MatrixXd y = ((x.rowwise() - bn.running_mean.transpose()).array().rowwise() *
                (inv_std * bn.gamma.array()).transpose())
                   .matrix();
  y.rowwise() += bn.beta.transpose();
  return y;
}

MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  const double keep = 1.0 - rate;
  const double scale = 1.0 / keep;
  MatrixXd mask(rows, cols);
  for (Eigen::Index i = 0; i < mask.size(); ++i) {
    mask.data()[i] = rng.uniform() < keep ? scale : 0.0;
  }
  return mask;
}

}  // namespace

Eigen::MatrixXd forward(const NetParams& params, const MatrixXd& x, RunMode mode, Rng& rng,
                        ForwardCache* cache) {
  const NetConfig& cfg = params.cfg;
  if (x.cols() != cfg.input_dim()) {
    throw DataError("forward: input has " + std::to_string(x.cols()) + " columns, expected " +
                    std::to_string(cfg.input_dim()));
  }
  if (!x.allFinite()) throw NumericError("forward: non-finite input");
  if (mode == RunMode::train && x.rows() < 2) {
    throw NumericError("forward: train mode needs a batch of at least 2 for batch statistics");
  }
  const bool use_dropout = mode == RunMode::train && cfg.dropout_rate > 0.0;

  if (cache) {
    cache->mode = mode;
    cache->x = x;
    cache->blocks.assign(cfg.n_blocks, BlockCache{});
  }

  MatrixXd h = dense_forward(params.input, x);
  for (int bi = 0; bi < cfg.n_blocks; ++bi) {
    const ResidualBlock& blk = params.blocks[bi];
    BlockCache* bc = cache ? &cache->blocks[bi] : nullptr;
    if (bc) bc->in = h;

    MatrixXd z1 = dense_forward(blk.fc1, h);
    MatrixXd a1 = bn_forward(blk.bn1, z1, cfg.bn_epsilon, mode, bc ? &bc->bn1 : nullptr);
    MatrixXd r1 = a1.cwiseMax(0.0);
    if (use_dropout) {
      MatrixXd m1 = dropout_mask(r1.rows(), r1.cols(), cfg.dropout_rate, rng);
      r1 = r1.cwiseProduct(m1);
      if (bc) bc->mask1 = std::move(m1);
    }
    if (bc) {
      bc->a1 = std::move(a1);
      bc->h1 = r1;
    }

    MatrixXd z2 = dense_forward(blk.fc2, r1);
    MatrixXd a2 = bn_forward(blk.bn2, z2, cfg.bn_epsilon, mode, bc ? &bc->bn2 : nullptr);
    MatrixXd r2 = a2.cwiseMax(0.0);
    if (use_dropout) {
      MatrixXd m2 = dropout_mask(r2.rows(), r2.cols(), cfg.dropout_rate, rng);
      r2 = r2.cwiseProduct(m2);
      if (bc) bc->mask2 = std::move(m2);
    }
    if (bc) bc->a2 = std::move(a2);

    h += r2;  // additive skip
  }

  if (cache) cache->trunk_out = h;
  MatrixXd y_hat = dense_forward(params.output, h);
  if (!y_hat.allFinite()) throw NumericError("forward: non-finite activations");
  if (cache) cache->y_hat = y_hat;
  return y_hat;
}

void update_running_stats(NetParams& params, const ForwardCache& cache) {
  if (cache.mode != RunMode::train) throw Error("update_running_stats requires a train-mode cache");
  const double m = params.cfg.bn_momentum;
  for (std::size_t bi = 0; bi < params.blocks.size(); ++bi) {
    auto& blk = params.blocks[bi];
    const auto& bc = cache.blocks[bi];
    blk.bn1.running_mean = m * blk.bn1.running_mean + (1.0 - m) * bc.bn1.batch_mean;
    blk.bn1.running_var = m * blk.bn1.running_var + (1.0 - m) * bc.bn1.batch_var;
    blk.bn2.running_mean = m * blk.bn2.running_mean + (1.0 - m) * bc.bn2.batch_mean;
    blk.bn2.running_var = m * blk.bn2.running_var + (1.0 - m) * bc.bn2.batch_var;
  }
}

double loss_reconstruction(const MatrixXd& y_hat, const MatrixXd& y, int n_joints) {
  if (y_hat.rows() != y.rows() || y_hat.cols() != y.cols()) {
    throw DataError("loss_reconstruction: shape mismatch");
  }
  return (y_hat - y).squaredNorm() /
         (static_cast<double>(y.rows()) * static_cast<double>(n_joints));
}

namespace {

// dX of train-mode batch normalization.
MatrixXd bn_backward(const BnCache& c, const VectorXd& gamma, const MatrixXd& d_out,
                     VectorXd& d_gamma, VectorXd& d_beta) {
  const double b = static_cast<double>(d_out.rows());
  d_gamma = (d_out.cwiseProduct(c.x_hat)).colwise().sum();
  d_beta = d_out.colwise().sum();

  MatrixXd d_xhat = d_out.array().rowwise() * gamma.array().transpose();
  const Eigen::RowVectorXd sum_d = d_xhat.colwise().sum();
  const Eigen::RowVectorXd sum_dx = (d_xhat.cwiseProduct(c.x_hat)).colwise().sum();

  MatrixXd dx = b * d_xhat;
  dx.rowwise() -= sum_d;
  dx -= (c.x_hat.array().rowwise() * sum_dx.array()).matrix();
  dx.array().rowwise() *= (c.inv_std / b).transpose();
  return dx;
}

void dense_backward(const DenseLayer& l, const MatrixXd& x_in, const MatrixXd& d_out,
                    DenseGrad& grad, MatrixXd* d_in) {
  grad.weight.noalias() = x_in.transpose() * d_out;
  grad.bias = d_out.colwise().sum();
  if (d_in) d_in->noalias() = d_out * l.weight.transpose();
}

}  // namespace

NetGrads backward(const NetParams& params, const ForwardCache& cache, const MatrixXd& y) {
  if (cache.mode != RunMode::train) {
    throw Error("backward requires a cache produced by a train-mode forward pass");
  }
  if (cache.y_hat.rows() != y.rows() || cache.y_hat.cols() != y.cols()) {
    throw Error("backward: target shape does not match the cached forward pass");
  }
  const NetConfig& cfg = params.cfg;

  NetGrads g;
  g.blocks.resize(cfg.n_blocks);

  const double scale = 2.0 / (static_cast<double>(y.rows()) * static_cast<double>(cfg.n_joints));
  MatrixXd d = scale * (cache.y_hat - y);

  MatrixXd d_trunk;
  dense_backward(params.output, cache.trunk_out, d, g.output, &d_trunk);

  for (int bi = cfg.n_blocks - 1; bi >= 0; --bi) {
    const ResidualBlock& blk = params.blocks[bi];
    const BlockCache& bc = cache.blocks[bi];
    BlockGrad& bg = g.blocks[bi];

    // Branch: fc1 -> bn1 -> relu -> drop -> fc2 -> bn2 -> relu -> drop.
    MatrixXd d_branch = d_trunk;
    if (bc.mask2.size() > 0) d_branch = d_branch.cwiseProduct(bc.mask2);
    d_branch = d_branch.cwiseProduct((bc.a2.array() > 0.0).cast<double>().matrix());
    MatrixXd d_z2 = bn_backward(bc.bn2, blk.bn2.gamma, d_branch, bg.bn2.gamma, bg.bn2.beta);
    MatrixXd d_h1;
    dense_backward(blk.fc2, bc.h1, d_z2, bg.fc2, &d_h1);

    if (bc.mask1.size() > 0) d_h1 = d_h1.cwiseProduct(bc.mask1);
    d_h1 = d_h1.cwiseProduct((bc.a1.array() > 0.0).cast<double>().matrix());
    MatrixXd d_z1 = bn_backward(bc.bn1, blk.bn1.gamma, d_h1, bg.bn1.gamma, bg.bn1.beta);
    MatrixXd d_in;
    dense_backward(blk.fc1, bc.in, d_z1, bg.fc1, &d_in);

    d_trunk += d_in;  // skip connection
  }

  dense_backward(params.input, cache.x, d_trunk, g.input, nullptr);
  return g;
}

namespace {

template <typename ParamsT, typename Fn>
void for_each_tensor_pair(ParamsT& params, const NetGrads& grads, Fn&& fn) {
  fn(params.input.weight, grads.input.weight);
  fn(params.input.bias, grads.input.bias);
  for (std::size_t bi = 0; bi < params.blocks.size(); ++bi) {
    auto& pb = params.blocks[bi];
    const auto& gb = grads.blocks[bi];
    fn(pb.fc1.weight, gb.fc1.weight);
    fn(pb.fc1.bias, gb.fc1.bias);
    fn(pb.bn1.gamma, gb.bn1.gamma);
    fn(pb.bn1.beta, gb.bn1.beta);
    fn(pb.fc2.weight, gb.fc2.weight);
    fn(pb.fc2.bias, gb.fc2.bias);
    fn(pb.bn2.gamma, gb.bn2.gamma);
    fn(pb.bn2.beta, gb.bn2.beta);
  }
  fn(params.output.weight, grads.output.weight);
  fn(params.output.bias, grads.output.bias);
}

}  // namespace

void adam_step(NetParams& params, const NetGrads& grads, AdamState& state, double learning_rate,
               const TrainConfig& cfg) {
  // Lazily initialize moment slots on the first step.
  if (state.m.empty()) {
    for_each_tensor_pair(params, grads, [&state](auto& p, const auto& /*g*/) {
      state.m.emplace_back(VectorXd::Zero(p.size()));
      state.v.emplace_back(VectorXd::Zero(p.size()));
    });
  }

  bool finite = true;
  for_each_tensor_pair(params, grads, [&finite](auto& /*p*/, const auto& g) {
    if (!g.allFinite()) finite = false;
  });
  if (!finite) throw NumericError("adam_step: non-finite gradients");

  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

  std::size_t slot = 0;
  for_each_tensor_pair(params, grads, [&](auto& p, const auto& g) {
    auto m = state.m[slot].array();
    auto v = state.v[slot].array();
    Eigen::Map<const Eigen::ArrayXd> ga(g.data(), g.size());
    Eigen::Map<Eigen::ArrayXd> pa(p.data(), p.size());
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * ga;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * ga.square();
    pa -= learning_rate * (m / bc1) / ((v / bc2).sqrt() + cfg.adam_epsilon);
    ++slot;
  });
}

// ---- preprocessing ------------------------------------------------------------

NormStats compute_norm_stats(const MatrixXd& x, const MatrixXd& y) {
  if (x.rows() < 1 || x.rows() != y.rows()) throw DataError("compute_norm_stats: bad shapes");
  const double n = static_cast<double>(x.rows());
  NormStats s;
  s.input_mean = x.colwise().mean();
  s.input_std =
      ((x.rowwise() - s.input_mean.transpose()).array().square().colwise().sum() / n).sqrt();
  s.output_mean = y.colwise().mean();
  s.output_std =
      ((y.rowwise() - s.output_mean.transpose()).array().square().colwise().sum() / n).sqrt();
  s.input_std = s.input_std.cwiseMax(kStdFloor);
  s.output_std = s.output_std.cwiseMax(kStdFloor);
  return s;
}

MatrixXd standardize_inputs(const MatrixXd& x, const NormStats& s) {
  return ((x.rowwise() - s.input_mean.transpose()).array().rowwise() /
          s.input_std.transpose().array())
      .matrix();
}

MatrixXd standardize_outputs(const MatrixXd& y, const NormStats& s) {
  return ((y.rowwise() - s.output_mean.transpose()).array().rowwise() /
          s.output_std.transpose().array())
      .matrix();
}

MatrixXd destandardize_outputs(const MatrixXd& y_std, const NormStats& s) {
  return ((y_std.array().rowwise() * s.output_std.transpose().array()).matrix().rowwise() +
          s.output_mean.transpose());
}

// ---- dataset plumbing ---------------------------------------------------------

SampleMatrix build_samples(const Dataset& d, const CameraRig& rig, bool use_depth) {
  if (d.frames.empty()) throw DataError("build_samples: empty dataset");
  const auto n = static_cast<Eigen::Index>(d.frames.size());
  const int per_joint = use_depth ? 3 : 2;

  SampleMatrix sm;
  sm.x.resize(n, per_joint * kNumJoints);
  sm.y.resize(n, 3 * (kNumJoints - 1));
  sm.action_ids.resize(d.frames.size());
  sm.camera_ids.resize(d.frames.size());

  for (Eigen::Index i = 0; i < n; ++i) {
    const FrameRecord& f = d.frames[i];
    const Camera& cam = rig_camera(rig, f.camera_id);
    const Pose3D pose_cam = world_to_camera_pose(f.pose_world, cam.extrinsics);

    std::array<Eigen::Vector2d, kNumJoints> pixels;
    if (f.pixels) {
      pixels = *f.pixels;
    } else {
      pixels = project_pose(pose_cam, cam.intrinsics);
    }
    if (use_depth && !f.depths) {
      throw DataError("build_samples: frame record lacks the depth field (subject " +
                      std::to_string(f.subject_id) + ", action " + std::to_string(f.action_id) +
                      ", frame " + std::to_string(f.frame_index) + ")");
    }

    for (int j = 0; j < kNumJoints; ++j) {
      sm.x(i, per_joint * j) = pixels[j].x();
      sm.x(i, per_joint * j + 1) = pixels[j].y();
      if (use_depth) sm.x(i, per_joint * j + 2) = (*f.depths)[j];
    }
    const Eigen::Vector3d root = pose_cam[JointId::Root];
    for (int j = 1; j < kNumJoints; ++j) {
      sm.y.block<1, 3>(i, 3 * (j - 1)) = (pose_cam.joints[j] - root).transpose();
    }
    sm.action_ids[i] = f.action_id;
    sm.camera_ids[i] = f.camera_id;
  }
  if (!sm.x.allFinite() || !sm.y.allFinite()) throw NumericError("build_samples: non-finite data");
  return sm;
}

// ---- training -------------------------------------------------------------------

FitResult fit(const Dataset& train, const CameraRig& rig, const NetConfig& cfg,
              const TrainConfig& tcfg, const EpochCallback& on_epoch) {
  cfg.validate();
  tcfg.validate();

  const SampleMatrix sm = build_samples(train, rig, cfg.use_depth);
  FitResult result;
  result.stats = compute_norm_stats(sm.x, sm.y);
  const MatrixXd xs = standardize_inputs(sm.x, result.stats);
  const MatrixXd ys = standardize_outputs(sm.y, result.stats);

  result.params = xavier_init(cfg, tcfg.seed);
  AdamState adam;
  Rng rng(tcfg.seed, kStreamTraining);

  const auto n = xs.rows();
  std::vector<Eigen::Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);

  MatrixXd xb, yb;
  ForwardCache cache;
  result.loss_history.reserve(tcfg.epochs);

  for (int epoch = 0; epoch < tcfg.epochs; ++epoch) {
    // Seeded Fisher-Yates shuffle.
    for (auto i = static_cast<std::size_t>(n) - 1; i > 0; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(i)));
      std::swap(perm[i], perm[j]);
    }

    double epoch_loss = 0.0;
    long counted = 0;
    for (Eigen::Index start = 0; start < n; start += tcfg.batch_size) {
      const Eigen::Index bsize = std::min<Eigen::Index>(tcfg.batch_size, n - start);
      if (bsize < 2) continue;  // batch statistics need at least 2 samples

      xb.resize(bsize, xs.cols());
      yb.resize(bsize, ys.cols());
      for (Eigen::Index r = 0; r < bsize; ++r) {
        xb.row(r) = xs.row(perm[static_cast<std::size_t>(start + r)]);
        yb.row(r) = ys.row(perm[static_cast<std::size_t>(start + r)]);
      }

      const MatrixXd y_hat = forward(result.params, xb, RunMode::train, rng, &cache);
      const double loss = loss_reconstruction(y_hat, yb, cfg.n_joints);
      if (!std::isfinite(loss)) throw NumericError("fit: training loss diverged");
      const NetGrads grads = backward(result.params, cache, yb);
      adam_step(result.params, grads, adam, tcfg.learning_rate, tcfg);
      update_running_stats(result.params, cache);

      epoch_loss += loss * static_cast<double>(bsize);
      counted += bsize;
    }
    if (counted == 0) throw DataError("fit: no trainable batches (training set too small)");
    result.loss_history.push_back(epoch_loss / static_cast<double>(counted));
    if (on_epoch) on_epoch(epoch + 1, result.loss_history.back());
  }
  return result;
}

// ---- inference ------------------------------------------------------------------

MatrixXd predict_batch(const NetParams& params, const NormStats& stats, const MatrixXd& x_raw) {
  if (!x_raw.allFinite()) throw NumericError("predict: non-finite input");
  Rng rng(0);  // unused in infer mode
  const MatrixXd y_std = forward(params, standardize_inputs(x_raw, stats), RunMode::infer, rng);
  return destandardize_outputs(y_std, stats);
}

Pose3D predict(const NetParams& params, const NormStats& stats,
               const std::array<Eigen::Vector2d, kNumJoints>& pixels,
               const std::array<double, kNumJoints>* depths) {
  const bool use_depth = params.cfg.use_depth;
  if (use_depth && depths == nullptr) throw DataError("predict: model expects depth inputs");
  const int per_joint = use_depth ? 3 : 2;

  MatrixXd x(1, per_joint * kNumJoints);
  for (int j = 0; j < kNumJoints; ++j) {
    x(0, per_joint * j) = pixels[j].x();
    x(0, per_joint * j + 1) = pixels[j].y();
    if (use_depth) x(0, per_joint * j + 2) = (*depths)[j];
  }
  const MatrixXd y = predict_batch(params, stats, x);

  Pose3D pose;
  pose.frame = FrameKind::camera;
  pose[JointId::Root] = Eigen::Vector3d::Zero();
  for (int j = 1; j < kNumJoints; ++j) {
    pose.joints[j] = y.block<1, 3>(0, 3 * (j - 1)).transpose();
  }
  return pose;
}

// ---- model file -----------------------------------------------------------------

namespace {

json tensor_to_json(const MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
  }
  return json{{"shape", {m.rows(), m.cols()}}, {"data", data}};
}

json tensor_to_json(const VectorXd& v) {
  json data = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) data.push_back(v(i));
  return json{{"shape", {v.size()}}, {"data", data}};
}

MatrixXd matrix_from_json(const json& j) {
  const auto& shape = j.at("shape");
  if (shape.size() != 2) throw DataError("model tensor: expected a 2-d shape");
  MatrixXd m(shape.at(0).get<Eigen::Index>(), shape.at(1).get<Eigen::Index>());
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != m.size()) {
    throw DataError("model tensor: data length does not match shape");
  }
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) m(r, c) = data.at(k++).get<double>();
  }
  return m;
}

VectorXd vector_from_json(const json& j) {
  const auto& shape = j.at("shape");
  if (shape.size() != 1) throw DataError("model tensor: expected a 1-d shape");
  VectorXd v(shape.at(0).get<Eigen::Index>());
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != v.size()) {
    throw DataError("model tensor: data length does not match shape");
  }
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = data.at(i).get<double>();
  return v;
}

json vec_json(const VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

VectorXd vec_from(const json& a) {
  VectorXd v(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) v(static_cast<Eigen::Index>(i)) = a.at(i).get<double>();
  return v;
}

}  // namespace

void save_model(const NetParams& params, const NormStats& stats,
                const std::filesystem::path& path) {
  json j;
  j["schema"] = std::string(kModelSchema);
  j["config"] = {{"n_joints", params.cfg.n_joints},
                 {"use_depth", params.cfg.use_depth},
                 {"hidden_width", params.cfg.hidden_width},
                 {"n_blocks", params.cfg.n_blocks},
                 {"dropout_rate", params.cfg.dropout_rate},
                 {"bn_epsilon", params.cfg.bn_epsilon},
                 {"bn_momentum", params.cfg.bn_momentum},
                 {"activation", params.cfg.activation}};
  j["norm_stats"] = {{"input_mean", vec_json(stats.input_mean)},
                     {"input_std", vec_json(stats.input_std)},
                     {"output_mean", vec_json(stats.output_mean)},
                     {"output_std", vec_json(stats.output_std)}};

  json tensors;
  tensors["input.weight"] = tensor_to_json(params.input.weight);
  tensors["input.bias"] = tensor_to_json(params.input.bias);
  for (std::size_t bi = 0; bi < params.blocks.size(); ++bi) {
    const auto& b = params.blocks[bi];
    const std::string p = "block" + std::to_string(bi) + ".";
    tensors[p + "fc1.weight"] = tensor_to_json(b.fc1.weight);
    tensors[p + "fc1.bias"] = tensor_to_json(b.fc1.bias);
    tensors[p + "bn1.gamma"] = tensor_to_json(b.bn1.gamma);
    tensors[p + "bn1.beta"] = tensor_to_json(b.bn1.beta);
    tensors[p + "bn1.running_mean"] = tensor_to_json(b.bn1.running_mean);
    tensors[p + "bn1.running_var"] = tensor_to_json(b.bn1.running_var);
    tensors[p + "fc2.weight"] = tensor_to_json(b.fc2.weight);
    tensors[p + "fc2.bias"] = tensor_to_json(b.fc2.bias);
    tensors[p + "bn2.gamma"] = tensor_to_json(b.bn2.gamma);
    tensors[p + "bn2.beta"] = tensor_to_json(b.bn2.beta);
    tensors[p + "bn2.running_mean"] = tensor_to_json(b.bn2.running_mean);
    tensors[p + "bn2.running_var"] = tensor_to_json(b.bn2.running_var);
  }
  tensors["output.weight"] = tensor_to_json(params.output.weight);
  tensors["output.bias"] = tensor_to_json(params.output.bias);
  j["tensors"] = std::move(tensors);

  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + tmp);
    os << j.dump();
    if (!os) throw IoError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::pair<NetParams, NormStats> load_model(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open model file: " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw DataError("model file parse error (" + path.string() + "): " + e.what());
  }

  try {
    if (j.at("schema").get<std::string>() != kModelSchema) {
      throw DataError("model file has an unknown schema tag");
    }
    NetConfig cfg;
    const auto& jc = j.at("config");
    cfg.n_joints = jc.at("n_joints").get<int>();
    cfg.use_depth = jc.at("use_depth").get<bool>();
    cfg.hidden_width = jc.at("hidden_width").get<int>();
    cfg.n_blocks = jc.at("n_blocks").get<int>();
    cfg.dropout_rate = jc.at("dropout_rate").get<double>();
    cfg.bn_epsilon = jc.at("bn_epsilon").get<double>();
    cfg.bn_momentum = jc.at("bn_momentum").get<double>();
    cfg.activation = jc.value("activation", std::string("relu"));
    cfg.validate();

    NetParams params;
    params.cfg = cfg;
    const auto& tensors = j.at("tensors");
    params.input.weight = matrix_from_json(tensors.at("input.weight"));
    params.input.bias = vector_from_json(tensors.at("input.bias"));
    params.blocks.resize(cfg.n_blocks);
    for (int bi = 0; bi < cfg.n_blocks; ++bi) {
      auto& b = params.blocks[bi];
      const std::string p = "block" + std::to_string(bi) + ".";
      b.fc1.weight = matrix_from_json(tensors.at(p + "fc1.weight"));
      b.fc1.bias = vector_from_json(tensors.at(p + "fc1.bias"));
      b.bn1.gamma = vector_from_json(tensors.at(p + "bn1.gamma"));
      b.bn1.beta = vector_from_json(tensors.at(p + "bn1.beta"));
      b.bn1.running_mean = vector_from_json(tensors.at(p + "bn1.running_mean"));
      b.bn1.running_var = vector_from_json(tensors.at(p + "bn1.running_var"));
      b.fc2.weight = matrix_from_json(tensors.at(p + "fc2.weight"));
      b.fc2.bias = vector_from_json(tensors.at(p + "fc2.bias"));
      b.bn2.gamma = vector_from_json(tensors.at(p + "bn2.gamma"));
      b.bn2.beta = vector_from_json(tensors.at(p + "bn2.beta"));
      b.bn2.running_mean = vector_from_json(tensors.at(p + "bn2.running_mean"));
      b.bn2.running_var = vector_from_json(tensors.at(p + "bn2.running_var"));
    }
    params.output.weight = matrix_from_json(tensors.at("output.weight"));
    params.output.bias = vector_from_json(tensors.at("output.bias"));

    if (params.input.weight.rows() != cfg.input_dim() ||
        params.output.weight.cols() != cfg.output_dim()) {
      throw DataError("model tensors do not match the config dimensions");
    }

    NormStats stats;
    const auto& js = j.at("norm_stats");
    stats.input_mean = vec_from(js.at("input_mean"));
    stats.input_std = vec_from(js.at("input_std"));
    stats.output_mean = vec_from(js.at("output_mean"));
    stats.output_std = vec_from(js.at("output_std"));
    if (stats.input_mean.size() != cfg.input_dim() || stats.output_mean.size() != cfg.output_dim()) {
      throw DataError("model normalization stats do not match the config dimensions");
    }
    return {std::move(params), std::move(stats)};
  } catch (const json::exception& e) {
    throw DataError("model file schema error (" + path.string() + "): " + e.what());
  }
}

}  // namespace depthlift
