#include <doctest.h>

#include <cmath>

#include "depthlift/depth_sim.hpp"
#include "depthlift/stats.hpp"
#include "helpers.hpp"

using namespace depthlift;

namespace {

// Poses whose joints carry prescribed camera-frame z values.
std::vector<Pose3D> poses_with_z(Rng& rng, int n, double z_lo, double z_hi) {
  std::vector<Pose3D> poses(n);
  for (auto& p : poses) {
    p.frame = FrameKind::camera;
    for (auto& j : p.joints) j = Eigen::Vector3d(0.0, 0.0, rng.uniform(z_lo, z_hi));
  }
  return poses;
}

struct SimRun {
  std::vector<double> depths;
  std::vector<double> zs;
};

SimRun simulate_many(const DepthModelConfig& cfg, const DepthContext& ctx,
                     const std::vector<Pose3D>& poses, std::uint64_t rng_seed) {
  SimRun run;
  Rng rng(rng_seed);
  for (const auto& p : poses) {
    const auto d = simulate_depth(p, cfg, ctx, rng);
    for (int j = 0; j < kNumJoints; ++j) {
      run.depths.push_back(d[j]);
      run.zs.push_back(p.joints[j].z());
    }
  }
  return run;
}

}  // namespace

TEST_SUITE("depth_sim") {

TEST_CASE("config validation") {
  DepthModelConfig c;
  CHECK_NOTHROW(c.validate());
  c.target_spearman = 1.5;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = DepthModelConfig{};
  c.gamma = 0.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = DepthModelConfig{};
  c.occlusion_prob = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
  c = DepthModelConfig{};
  c.occlusion_depth_factor = 1.0;
  CHECK_THROWS_AS(c.validate(), ConfigError);
}

TEST_CASE("noiseless monotone map gives spearman exactly 1") {
  Rng rng(17);
  const auto poses = poses_with_z(rng, 50, 2000.0, 8000.0);
  const DepthContext ctx{2000.0, 8000.0};
  DepthModelConfig cfg;  // target 1 handled by zero noise
  cfg.target_spearman = 1.0;
  cfg.noise_scale = 0.0;

  const auto run = simulate_many(cfg, ctx, poses, 5);
  CHECK(spearman(run.depths, run.zs).coefficient == 1.0);
  for (double d : run.depths) CHECK(d >= 0.0);

  // strictly increasing in z within a frame
  Pose3D p;
  p.frame = FrameKind::camera;
  for (int j = 0; j < kNumJoints; ++j) p.joints[j] = Eigen::Vector3d(0, 0, 2500.0 + 300.0 * j);
  Rng r2(1);
  const auto d = simulate_depth(p, cfg, ctx, r2);
  for (int j = 1; j < kNumJoints; ++j) CHECK(d[j] > d[j - 1]);
}

TEST_CASE("negative target flips the orientation") {
  Rng rng(18);
  const auto poses = poses_with_z(rng, 50, 2000.0, 8000.0);
  const DepthContext ctx{2000.0, 8000.0};
  DepthModelConfig cfg;
  cfg.target_spearman = -1.0;
  cfg.noise_scale = 0.0;
  const auto run = simulate_many(cfg, ctx, poses, 5);
  CHECK(spearman(run.depths, run.zs).coefficient == -1.0);
}

TEST_CASE("simulate_depth contracts") {
  const DepthContext ctx{1000.0, 5000.0};
  DepthModelConfig cfg;
  Rng rng(3);

  Pose3D world_pose;  // wrong frame kind
  world_pose.frame = FrameKind::world;
  CHECK_THROWS_AS(simulate_depth(world_pose, cfg, ctx, rng), DataError);

  Pose3D behind;
  behind.frame = FrameKind::camera;
  for (auto& j : behind.joints) j = Eigen::Vector3d(0, 0, 2000.0);
  behind[JointId::Nose].z() = -1.0;
  CHECK_THROWS_AS(simulate_depth(behind, cfg, ctx, rng), NumericError);

  // deterministic given the rng state
  Pose3D p;
  p.frame = FrameKind::camera;
  Rng pose_rng(9);
  for (auto& j : p.joints) j = Eigen::Vector3d(0, 0, pose_rng.uniform(1500, 4500));
  cfg.noise_scale = 0.7;
  cfg.occlusion_prob = 0.2;
  Rng a(42), b(42);
  CHECK(simulate_depth(p, cfg, ctx, a) == simulate_depth(p, cfg, ctx, b));

  CHECK_THROWS_AS(make_depth_context(std::vector<double>{3.0, 3.0}), NumericError);
}

TEST_CASE("noise calibration hits the target correlation") {
  Rng rng(21);
  const auto poses = poses_with_z(rng, 300, 2000.0, 8000.0);  // 5100 samples
  std::vector<double> all_z;
  for (const auto& p : poses) {
    for (const auto& j : p.joints) all_z.push_back(j.z());
  }
  const DepthContext ctx = make_depth_context(all_z);

  for (double target : {0.0, 0.3, 0.6, 0.9}) {
    DepthModelConfig cfg;
    cfg.target_spearman = target;
    cfg.seed = 77;
    cfg.noise_scale = calibrate_noise_scale(cfg, all_z, ctx);

    const auto run = simulate_many(cfg, ctx, poses, 1234);
    const double measured = measure_correlation(run.depths, run.zs);
    CHECK(std::abs(measured - target) < 0.05);
    for (double d : run.depths) {
      CHECK(d >= 0.0);
      CHECK(std::isfinite(d));
    }
  }
}

TEST_CASE("occlusion strictly lowers the measured correlation at equal noise") {
  Rng rng(22);
  const auto poses = poses_with_z(rng, 300, 2000.0, 8000.0);
  const DepthContext ctx{2000.0, 8000.0};

  DepthModelConfig clean;
  clean.noise_scale = 1.0;
  DepthModelConfig occluded = clean;
  occluded.occlusion_prob = 0.25;

  const auto run_clean = simulate_many(clean, ctx, poses, 5);
  const auto run_occ = simulate_many(occluded, ctx, poses, 5);
  const double rho_clean = measure_correlation(run_clean.depths, run_clean.zs);
  const double rho_occ = measure_correlation(run_occ.depths, run_occ.zs);
  CHECK(rho_occ < rho_clean);
}

TEST_CASE("unreachable targets are reported") {
  Rng rng(23);
  const auto poses = poses_with_z(rng, 100, 2000.0, 8000.0);
  std::vector<double> all_z;
  for (const auto& p : poses) {
    for (const auto& j : p.joints) all_z.push_back(j.z());
  }
  DepthModelConfig cfg;
  cfg.target_spearman = 1.0;
  cfg.occlusion_prob = 0.4;  // heavy corruption caps the achievable correlation
  CHECK_THROWS_AS(calibrate_noise_scale(cfg, all_z, make_depth_context(all_z)), ConfigError);
}

TEST_CASE("measure_correlation endpoints") {
  std::vector<double> z = {1, 2, 3, 4, 5};
  std::vector<double> neg = {5, 4, 3, 2, 1};
  CHECK(measure_correlation(z, z) == 1.0);
  CHECK(measure_correlation(neg, z) == -1.0);
  CHECK_THROWS_AS(measure_correlation(std::vector<double>{1, 2}, std::vector<double>{1, 2}),
                  DataError);

  // worked 4-point example: sum d^2 = 2 -> rho = 0.8
  CHECK(measure_correlation(std::vector<double>{1, 3, 2, 4}, std::vector<double>{1, 2, 3, 4}) ==
        doctest::Approx(0.8).epsilon(1e-12));
}

TEST_CASE("loss_mse") {
  Eigen::MatrixXd y = Eigen::MatrixXd::Constant(3, 4, 2.0);
  CHECK(loss_mse(y, y) == 0.0);
  CHECK(loss_mse(y, Eigen::MatrixXd::Zero(3, 4)) == 4.0);

  Eigen::MatrixXd a(1, 2), b(1, 2);
  a << 0, 0;
  b << 3, 4;
  CHECK(loss_mse(a, b) == doctest::Approx(12.5).epsilon(1e-15));

  CHECK_THROWS_AS(loss_mse(a, Eigen::MatrixXd::Zero(2, 2)), DataError);
}

TEST_CASE("loss_grad") {
  Eigen::MatrixXd y(2, 2), zero = Eigen::MatrixXd::Zero(2, 2);
  y << 0, 1, 0, 1;
  CHECK(loss_grad(y, y) == 0.0);
  // constants vanish under differencing
  CHECK(loss_grad(y, (y.array() + 3.25).matrix()) == doctest::Approx(0.0));
  // hand finite differences: x-gradients (1, 0; 1, 0), y-gradients zero
  CHECK(loss_grad(y, zero) == doctest::Approx(0.5).epsilon(1e-15));

  Eigen::MatrixXd row(1, 2);
  row << 1, 2;
  CHECK_THROWS_AS(loss_grad(row, row), DataError);
  CHECK_THROWS_AS(loss_grad(y, Eigen::MatrixXd::Zero(3, 3)), DataError);

  // non-negative on random residuals
  Rng rng(8);
  for (int t = 0; t < 20; ++t) {
    Eigen::MatrixXd u(4, 5), v(4, 5);
    for (int i = 0; i < u.size(); ++i) {
      u.data()[i] = rng.normal();
      v.data()[i] = rng.normal();
    }
    CHECK(loss_grad(u, v) >= 0.0);
    CHECK(loss_mse(u, v) >= 0.0);
  }
}

TEST_CASE("dataset-level simulation fills every record") {
  auto [d, rig] = test::observed_dataset(1, 2, 31, 0.6, 2);
  for (const auto& f : d.frames) {
    REQUIRE(f.depths.has_value());
    for (double v : *f.depths) {
      CHECK(v >= 0.0);
      CHECK(std::isfinite(v));
    }
  }
}

}  // TEST_SUITE
