#include "depthlift/depth_sim.hpp"

#include <algorithm>
#include <cmath>

#include "depthlift/stats.hpp"

namespace depthlift {

namespace {

constexpr double kBaseOffset = 0.5;
constexpr double kBaseSpan = 9.0;
constexpr std::uint64_t kStreamCalibration = 11;
constexpr std::uint64_t kStreamSimulate = 12;
constexpr std::size_t kCalibrationBatch = 10000;

double base_depth(double z, const DepthModelConfig& cfg, const DepthContext& ctx) {
  double zhat = (z - ctx.z_min) / (ctx.z_max - ctx.z_min);
  zhat = std::clamp(zhat, 0.0, 1.0);
  if (cfg.target_spearman < 0.0) zhat = 1.0 - zhat;
  return kBaseOffset + kBaseSpan * std::pow(zhat, cfg.gamma);
}

double corrupt(double base, double noise_scale, double noise_u, bool occluded,
               const DepthModelConfig& cfg) {
  double d = base + noise_scale * noise_u;
  if (occluded) d *= cfg.occlusion_depth_factor;
  return std::max(d, 0.0);
}

}  // namespace

void DepthModelConfig::validate() const {
  if (!(target_spearman >= -1.0 && target_spearman <= 1.0)) {
    throw ConfigError("target_spearman must lie in [-1, 1]");
  }
  if (!(noise_scale >= 0.0)) throw ConfigError("noise_scale must be non-negative");
  if (!(gamma > 0.0)) throw ConfigError("gamma must be positive");
  if (!(occlusion_prob >= 0.0 && occlusion_prob < 1.0)) {
    throw ConfigError("occlusion_prob must lie in [0, 1)");
  }
  if (!(occlusion_depth_factor > 0.0 && occlusion_depth_factor < 1.0)) {
    throw ConfigError("occlusion_depth_factor must lie in (0, 1)");
  }
}

DepthContext make_depth_context(std::span<const double> z_values) {
  if (z_values.empty()) throw DataError("depth context needs at least one z value");
  const auto [lo, hi] = std::minmax_element(z_values.begin(), z_values.end());
  if (!(*hi - *lo > 0.0)) throw NumericError("depth context is degenerate: z range is zero");
  return {*lo, *hi};
}

std::array<double, kNumJoints> simulate_depth(const Pose3D& pose_cam, const DepthModelConfig& cfg,
                                              const DepthContext& ctx, Rng& rng) {
  cfg.validate();
  if (pose_cam.frame != FrameKind::camera) throw DataError("simulate_depth expects a camera-frame pose");
  std::array<double, kNumJoints> out;
  for (int j = 0; j < kNumJoints; ++j) {
    const double z = pose_cam.joints[j].z();
    if (!(z > 0.0)) {
      throw NumericError("simulate_depth: joint " + std::string(joint_names()[j]) +
                         " has z <= 0");
    }
    const double u = rng.normal();
    const bool occluded = rng.uniform() < cfg.occlusion_prob;
    out[j] = corrupt(base_depth(z, cfg, ctx), cfg.noise_scale, u, occluded, cfg);
  }
  return out;
}

double calibrate_noise_scale(const DepthModelConfig& cfg, std::span<const double> z_samples,
                             const DepthContext& ctx) {
  cfg.validate();
  if (z_samples.size() < 3) throw DataError("calibration needs at least 3 z samples");

  // Fixed calibration batch: an even stride through the pooled z values.
  std::vector<double> z(kCalibrationBatch);
  for (std::size_t i = 0; i < kCalibrationBatch; ++i) {
    z[i] = z_samples[(i * z_samples.size()) / kCalibrationBatch % z_samples.size()];
  }

  std::vector<double> base(kCalibrationBatch);
  double base_mean = 0.0;
  for (std::size_t i = 0; i < kCalibrationBatch; ++i) {
    base[i] = base_depth(z[i], cfg, ctx);
    base_mean += base[i];
  }
  base_mean /= static_cast<double>(kCalibrationBatch);
  double base_var = 0.0;
  for (double b : base) base_var += (b - base_mean) * (b - base_mean);
  base_var /= static_cast<double>(kCalibrationBatch);
  const double base_sd = std::sqrt(std::max(base_var, 1e-12));

  // Common random numbers make the objective a fixed function of sigma.
  Rng rng(cfg.seed, kStreamCalibration);
  std::vector<double> noise(kCalibrationBatch);
  std::vector<char> occluded(kCalibrationBatch);
  for (std::size_t i = 0; i < kCalibrationBatch; ++i) {
    noise[i] = rng.normal();
    occluded[i] = rng.uniform() < cfg.occlusion_prob ? 1 : 0;
  }

  std::vector<double> d(kCalibrationBatch);
  // Magnitude of the measured correlation, oriented so negative targets
  // (decreasing base map) calibrate exactly like positive ones.
  const double orient = cfg.target_spearman < 0.0 ? -1.0 : 1.0;
  const auto measured = [&](double sigma) {
    for (std::size_t i = 0; i < kCalibrationBatch; ++i) {
      d[i] = corrupt(base[i], sigma, noise[i], occluded[i] != 0, cfg);
    }
    return orient * spearman(d, z).coefficient;
  };

  const double target = std::abs(cfg.target_spearman);
  double lo = 0.0, hi = 1e4 * base_sd;
  const double f_lo = measured(lo);
  if (f_lo <= target) {
    if (target - f_lo > 0.02) {
      throw ConfigError("target correlation unreachable under these corruption settings");
    }
    return lo;
  }
  if (measured(hi) >= target) return hi;  // target indistinguishable from zero

  for (int iter = 0; iter < 80; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (measured(mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double sigma = 0.5 * (lo + hi);
  if (std::abs(measured(sigma) - target) > 0.02) {
    throw NumericError("depth noise calibration did not reach the target correlation");
  }
  return sigma;
}

double measure_correlation(std::span<const double> depths, std::span<const double> zs) {
  if (depths.size() != zs.size()) throw DataError("measure_correlation: length mismatch");
  if (depths.size() < 3) throw DataError("measure_correlation requires n >= 3");
  return spearman(depths, zs).coefficient;
}

double loss_mse(const Eigen::MatrixXd& y, const Eigen::MatrixXd& y_hat) {
  if (y.rows() != y_hat.rows() || y.cols() != y_hat.cols()) {
    throw DataError("loss_mse: image dimensions differ");
  }
  if (y.size() == 0) throw DataError("loss_mse: empty image");
  return (y - y_hat).squaredNorm() / static_cast<double>(y.size());
}

double loss_grad(const Eigen::MatrixXd& y, const Eigen::MatrixXd& y_hat) {
  if (y.rows() != y_hat.rows() || y.cols() != y_hat.cols()) {
    throw DataError("loss_grad: image dimensions differ");
  }
  if (y.rows() < 2 || y.cols() < 2) throw DataError("loss_grad requires at least a 2x2 image");
  const Eigen::MatrixXd r = y - y_hat;
  double total = 0.0;
  for (Eigen::Index i = 0; i < r.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
      if (j + 1 < r.cols()) total += std::abs(r(i, j + 1) - r(i, j));
      if (i + 1 < r.rows()) total += std::abs(r(i + 1, j) - r(i, j));
    }
  }
  return total / static_cast<double>(r.size());
}

DepthSimInfo simulate_dataset_depths(Dataset& d, const CameraRig& rig, const DepthModelConfig& cfg) {
  cfg.validate();
  if (d.frames.empty()) throw DataError("cannot simulate depths for an empty dataset");

  std::vector<Pose3D> cam_poses;
  cam_poses.reserve(d.frames.size());
  std::vector<double> all_z;
  all_z.reserve(d.frames.size() * kNumJoints);
  for (const auto& f : d.frames) {
    const auto& cam = rig_camera(rig, f.camera_id);
    cam_poses.push_back(world_to_camera_pose(f.pose_world, cam.extrinsics));
    for (const auto& joint : cam_poses.back().joints) {
      if (!(joint.z() > 0.0)) throw NumericError("simulate_dataset_depths: joint behind camera");
      all_z.push_back(joint.z());
    }
  }

  DepthSimInfo info;
  info.context = make_depth_context(all_z);

  DepthModelConfig calibrated = cfg;
  calibrated.noise_scale = calibrate_noise_scale(cfg, all_z, info.context);
  info.noise_scale = calibrated.noise_scale;

  Rng rng(cfg.seed, kStreamSimulate);
  std::vector<double> sim_depths;
  sim_depths.reserve(all_z.size());
  for (std::size_t i = 0; i < d.frames.size(); ++i) {
    const auto depths = simulate_depth(cam_poses[i], calibrated, info.context, rng);
    d.frames[i].depths = depths;
    sim_depths.insert(sim_depths.end(), depths.begin(), depths.end());
  }
  info.measured_spearman = measure_correlation(sim_depths, all_z);
  return info;
}

}  // namespace depthlift
