#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <functional>
#include <vector>

#include "depthlift/camera.hpp"
#include "depthlift/skeleton.hpp"

namespace depthlift {

inline constexpr std::string_view kModelSchema = "depthlift-net-v1";

// Residual dense network lifting standardized per-joint (u, v, d) inputs to
// root-centered camera-frame joint positions. Input dense layer to
// hidden_width, then n_blocks x [Dense, BN, ReLU, Dropout] x 2 with an
// additive skip, then the output dense layer. The root is excluded from the
// output (it is zero by construction) and re-inserted on predict.
struct NetConfig {
  int n_joints = kNumJoints;
  bool use_depth = true;  // input per joint: (u, v, d) when true, (u, v) otherwise
  int hidden_width = 256;
  int n_blocks = 2;
  double dropout_rate = 0.5;
  double bn_epsilon = 1e-5;
  double bn_momentum = 0.9;
  std::string activation = "relu";  // the only supported non-linearity

  int input_dim() const { return n_joints * (use_depth ? 3 : 2); }
  int output_dim() const { return 3 * (n_joints - 1); }

  void validate() const;

  static NetConfig desk_scale();  // width 256, 2 blocks (~0.4M params)
  static NetConfig full_scale();  // width 1024, 3 blocks (~7M params)
};

struct TrainConfig {
  int epochs = 70;
  int batch_size = 1024;
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

struct DenseLayer {
  Eigen::MatrixXd weight;  // in x out
  Eigen::VectorXd bias;    // out
};

struct BatchNormLayer {
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
  Eigen::VectorXd running_mean;
  Eigen::VectorXd running_var;
};

struct ResidualBlock {
  DenseLayer fc1;
  BatchNormLayer bn1;
  DenseLayer fc2;
  BatchNormLayer bn2;
};

struct NetParams {
  NetConfig cfg;
  DenseLayer input;
  std::vector<ResidualBlock> blocks;
  DenseLayer output;

  long parameter_count() const;
};

// Gradients for every trainable tensor (BN running stats have none).
struct DenseGrad {
  Eigen::MatrixXd weight;
  Eigen::VectorXd bias;
};

struct BatchNormGrad {
  Eigen::VectorXd gamma;
  Eigen::VectorXd beta;
};

struct BlockGrad {
  DenseGrad fc1;
  BatchNormGrad bn1;
  DenseGrad fc2;
  BatchNormGrad bn2;
};

struct NetGrads {
  DenseGrad input;
  std::vector<BlockGrad> blocks;
  DenseGrad output;
};

struct AdamState {
  std::vector<Eigen::VectorXd> m;  // one flat slot per trainable tensor
  std::vector<Eigen::VectorXd> v;
  long step = 0;
};

enum class RunMode { train, infer };

// Weights ~ U(-L, L) with L = sqrt(6 / (fan_in + fan_out)); biases zero;
// BN gamma 1, beta 0, running mean 0, running var 1. Deterministic in seed.
NetParams xavier_init(const NetConfig& cfg, std::uint64_t seed);

struct BnCache {
  Eigen::MatrixXd x_hat;       // normalized activations
  Eigen::ArrayXd inv_std;      // 1/sqrt(batch_var + eps)
  Eigen::VectorXd batch_mean;
  Eigen::VectorXd batch_var;   // biased (1/B)
};

struct BlockCache {
  Eigen::MatrixXd in;     // block input (skip branch)
  BnCache bn1;
  Eigen::MatrixXd a1;     // bn1 output, pre-activation
  Eigen::MatrixXd mask1;  // inverted-dropout mask; empty when rate == 0
  Eigen::MatrixXd h1;     // fc2 input
  BnCache bn2;
  Eigen::MatrixXd a2;
  Eigen::MatrixXd mask2;
};

struct ForwardCache {
  RunMode mode = RunMode::infer;
  Eigen::MatrixXd x;
  std::vector<BlockCache> blocks;
  Eigen::MatrixXd trunk_out;  // output dense input
  Eigen::MatrixXd y_hat;
};

// Batch-major x (rows are samples). Train mode uses batch BN statistics and
// inverted dropout and requires at least 2 rows; infer mode uses running
// statistics and no dropout. The cache (required for backward) also carries
// the batch BN statistics for update_running_stats.
Eigen::MatrixXd forward(const NetParams& params, const Eigen::MatrixXd& x, RunMode mode, Rng& rng,
                        ForwardCache* cache = nullptr);

// running = momentum * running + (1 - momentum) * batch, per BN layer.
void update_running_stats(NetParams& params, const ForwardCache& cache);

// Mean over the batch of (1/n_joints) * sum of squared residuals.
double loss_reconstruction(const Eigen::MatrixXd& y_hat, const Eigen::MatrixXd& y, int n_joints);

NetGrads backward(const NetParams& params, const ForwardCache& cache, const Eigen::MatrixXd& y);

void adam_step(NetParams& params, const NetGrads& grads, AdamState& state, double learning_rate,
               const TrainConfig& cfg);

// ---- preprocessing ------------------------------------------------------------

struct NormStats {
  Eigen::VectorXd input_mean;
  Eigen::VectorXd input_std;
  Eigen::VectorXd output_mean;
  Eigen::VectorXd output_std;
};

// Per-coordinate mean/std (population) over the training matrices; stds are
// floored at 1e-8 for degenerate coordinates.
NormStats compute_norm_stats(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

Eigen::MatrixXd standardize_inputs(const Eigen::MatrixXd& x, const NormStats& s);
Eigen::MatrixXd standardize_outputs(const Eigen::MatrixXd& y, const NormStats& s);
Eigen::MatrixXd destandardize_outputs(const Eigen::MatrixXd& y_std, const NormStats& s);

// ---- dataset plumbing ---------------------------------------------------------

// Network samples built from a dataset: X rows are per-joint (u, v[, d])
// triples in joint order; Y rows are root-centered camera-frame positions of
// the 16 non-root joints. Pixel coordinates come from the stored uv field
// when present, otherwise they are recomputed by projection.
struct SampleMatrix {
  Eigen::MatrixXd x;
  Eigen::MatrixXd y;
  std::vector<int> action_ids;
  std::vector<int> camera_ids;
};

SampleMatrix build_samples(const Dataset& d, const CameraRig& rig, bool use_depth);

// ---- training / inference ------------------------------------------------------

struct FitResult {
  NetParams params;
  NormStats stats;
  std::vector<double> loss_history;  // mean training loss per epoch
};

using EpochCallback = std::function<void(int epoch, double mean_loss)>;

FitResult fit(const Dataset& train, const CameraRig& rig, const NetConfig& cfg,
              const TrainConfig& tcfg, const EpochCallback& on_epoch = {});

// Single-pose inference: root-centered camera-frame pose with the root at
// the origin. depths must be given iff the model was trained with depth.
Pose3D predict(const NetParams& params, const NormStats& stats,
               const std::array<Eigen::Vector2d, kNumJoints>& pixels,
               const std::array<double, kNumJoints>* depths);

Eigen::MatrixXd predict_batch(const NetParams& params, const NormStats& stats,
                              const Eigen::MatrixXd& x_raw);

// Model file: JSON with the config, normalization stats and all tensors as
// flat arrays with shape headers.
void save_model(const NetParams& params, const NormStats& stats, const std::filesystem::path& path);
std::pair<NetParams, NormStats> load_model(const std::filesystem::path& path);

}  // namespace depthlift
