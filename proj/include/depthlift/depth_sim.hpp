#pragma once

#include <Eigen/Core>
#include <span>

#include "depthlift/camera.hpp"
#include "depthlift/skeleton.hpp"

namespace depthlift {

// Parametric corruption mapping true camera-frame z to a simulated per-joint
// depth value with a controllable rank correlation.
//
// Given the batch-level min-max normalized depth zhat in [0, 1]:
//   base = 0.5 + 9.0 * zhat^gamma          (target >= 0)
//   base = 0.5 + 9.0 * (1 - zhat)^gamma    (target < 0)
//   d    = base + noise_scale * N(0, 1)
// then with probability occlusion_prob the joint is replaced by
// occlusion_depth_factor * d (occluded joints read closer than they are),
// and the result is clamped to be non-negative.
struct DepthModelConfig {
  double target_spearman = 0.6;
  double noise_scale = 0.0;  // absolute noise sd in depth units; solved by calibration
  double gamma = 1.0;
  double occlusion_prob = 0.0;
  double occlusion_depth_factor = 0.5;
  std::uint64_t seed = 0;

  void validate() const;
};

// Min-max normalization context: z range of the batch the simulator is
// embedded in (the whole dataset, across all cameras).
struct DepthContext {
  double z_min = 0.0;
  double z_max = 0.0;
};

DepthContext make_depth_context(std::span<const double> z_values);

// Simulated depths for one camera-frame pose. Deterministic given the rng
// state; requires all joint z > 0.
std::array<double, kNumJoints> simulate_depth(const Pose3D& pose_cam, const DepthModelConfig& cfg,
                                              const DepthContext& ctx, Rng& rng);

// Solves for the noise_scale whose measured Spearman over a held-out
// calibration batch of 10^4 samples (drawn from z_samples, common random
// numbers) hits cfg.target_spearman within 0.02. Bisection; occlusion
// corruption is part of the calibrated forward model.
double calibrate_noise_scale(const DepthModelConfig& cfg, std::span<const double> z_samples,
                             const DepthContext& ctx);

// Spearman rho between simulated depths and true z (delegates to stats).
double measure_correlation(std::span<const double> depths, std::span<const double> zs);

// Depth-image losses. Mean squared per-pixel difference, and the mean
// absolute forward-difference gradient of the residual (zero padding at the
// last row/column; loss_grad needs at least 2x2).
double loss_mse(const Eigen::MatrixXd& y, const Eigen::MatrixXd& y_hat);
double loss_grad(const Eigen::MatrixXd& y, const Eigen::MatrixXd& y_hat);

struct DepthSimInfo {
  double noise_scale = 0.0;
  double measured_spearman = 0.0;
  DepthContext context;
};

// Fills every frame record's depth field from its camera-frame pose:
// context from the pooled z values of the whole dataset, noise calibrated
// to cfg.target_spearman, then per-record simulation in frame order.
DepthSimInfo simulate_dataset_depths(Dataset& d, const CameraRig& rig,
                                     const DepthModelConfig& cfg);

}  // namespace depthlift
