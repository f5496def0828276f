#include <doctest.h>

#include <Eigen/Geometry>
#include <cmath>

#include "depthlift/camera.hpp"
#include "helpers.hpp"

using namespace depthlift;

namespace {

Eigen::Matrix3d random_rotation(Rng& rng) {
  Eigen::Quaterniond q(rng.normal(), rng.normal(), rng.normal(), rng.normal());
  q.normalize();
  return q.toRotationMatrix();
}

}  // namespace

TEST_SUITE("camera") {

TEST_CASE("world_to_camera applies R*p + t") {
  CameraExtrinsics e;
  CHECK(world_to_camera({1, 2, 3}, e) == Eigen::Vector3d(1, 2, 3));

  e.R = Eigen::AngleAxisd(M_PI / 2.0, Eigen::Vector3d::UnitZ()).toRotationMatrix();
  const Eigen::Vector3d rotated = world_to_camera({1, 0, 0}, e);
  CHECK(rotated.isApprox(Eigen::Vector3d(0, 1, 0), 1e-12));

  e.R = Eigen::Matrix3d::Identity();
  e.t = Eigen::Vector3d(10, 20, 30);
  CHECK(world_to_camera({1, 2, 3}, e) == Eigen::Vector3d(11, 22, 33));
}

TEST_CASE("project follows the pinhole formula") {
  CameraIntrinsics k;
  k.fx = k.fy = 1000.0;
  k.cx = k.cy = 500.0;

  SUBCASE("optical axis maps to the principal point") {
    for (double z : {1.0, 123.0, 9999.0}) {
      CHECK(project({0, 0, z}, k) == Eigen::Vector2d(500, 500));
    }
  }
  SUBCASE("hand-computed point") {
    CHECK(project({1, 2, 4}, k) == Eigen::Vector2d(750, 1000));
  }
  SUBCASE("z <= 0 is not projectable") {
    CHECK_THROWS_AS(project({1, 2, 0}, k), NumericError);
    CHECK_THROWS_AS(project({1, 2, -5}, k), NumericError);
  }
  SUBCASE("projection is scale-covariant along rays") {
    Rng rng(9);
    for (int i = 0; i < 200; ++i) {
      const Eigen::Vector3d p(rng.uniform(-2000, 2000), rng.uniform(-2000, 2000),
                              rng.uniform(100, 9000));
      const double lambda = rng.uniform(0.1, 10.0);
      const Eigen::Vector2d a = project(p, k);
      const Eigen::Vector2d b = project(lambda * p, k);
      CHECK((a - b).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, a.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("back_project inverts project given the depth") {
  CameraIntrinsics k;
  k.fx = k.fy = 1000.0;
  k.cx = k.cy = 500.0;

  CHECK(back_project({500, 500}, 1000.0, k) == Eigen::Vector3d(0, 0, 1000));
  CHECK(back_project({750, 1000}, 4.0, k) == Eigen::Vector3d(1, 2, 4));
  CHECK_THROWS_AS(back_project({1, 1}, 0.0, k), NumericError);

  SUBCASE("round trip over the working depth range") {
    Rng rng(12);
    double worst = 0.0;
    for (int i = 0; i < 5000; ++i) {
      CameraIntrinsics kk;
      kk.fx = rng.uniform(500, 2000);
      kk.fy = rng.uniform(500, 2000);
      kk.cx = rng.uniform(-100, 1100);
      kk.cy = rng.uniform(-100, 1100);
      const Eigen::Vector3d p(rng.uniform(-5000, 5000), rng.uniform(-5000, 5000),
                              rng.uniform(1.0, 1e5));
      const Eigen::Vector3d q = back_project(project(p, kk), p.z(), kk);
      worst = std::max(worst,
                       (q - p).cwiseAbs().maxCoeff() / std::max(1.0, p.cwiseAbs().maxCoeff()));
    }
    CHECK(worst < 1e-9);
  }
}

TEST_CASE("extrinsic transform preserves pairwise distances") {
  Rng rng(77);
  for (int i = 0; i < 200; ++i) {
    CameraExtrinsics e;
    e.R = random_rotation(rng);
    e.t = Eigen::Vector3d(rng.uniform(-5000, 5000), rng.uniform(-5000, 5000),
                          rng.uniform(-5000, 5000));
    e.validate();
    const Eigen::Vector3d p(rng.normal(0, 1000), rng.normal(0, 1000), rng.normal(0, 1000));
    const Eigen::Vector3d q(rng.normal(0, 1000), rng.normal(0, 1000), rng.normal(0, 1000));
    const double before = (p - q).norm();
    const double after = (world_to_camera(p, e) - world_to_camera(q, e)).norm();
    CHECK(std::abs(after - before) <= 1e-10 * std::max(1.0, before));
  }
}

TEST_CASE("extrinsics validation rejects non-rotations") {
  CameraExtrinsics e;
  e.R(0, 0) = 2.0;
  CHECK_THROWS_AS(e.validate(), DataError);
  e.R = Eigen::Matrix3d::Identity();
  e.R(2, 2) = -1.0;  // reflection
  CHECK_THROWS_AS(e.validate(), DataError);
}

TEST_CASE("intrinsics metadata must be consistent when present") {
  CameraIntrinsics k;
  k.fx = 1000.0;
  k.fy = 1250.0;
  k.physical = CameraIntrinsics::Physical{35.0, 0.035, 0.028};
  CHECK_NOTHROW(k.validate());
  k.physical->s_y = 0.03;
  CHECK_THROWS_AS(k.validate(), DataError);
  k.physical.reset();
  k.fx = 0.0;
  CHECK_THROWS_AS(k.validate(), DataError);
}

TEST_CASE("pose-level broadcasts propagate per-joint errors") {
  auto [d, rig] = test::observed_dataset(1, 1, 4, 1.0, 1);
  const auto& cam = rig[0];
  const Pose3D pose_cam = world_to_camera_pose(d.frames[0].pose_world, cam.extrinsics);
  CHECK(pose_cam.frame == FrameKind::camera);

  const auto pixels = project_pose(pose_cam, cam.intrinsics);
  CHECK(pixels.size() == 17);

  SUBCASE("round trip through back_project_pose") {
    std::array<double, kNumJoints> zs{};
    for (int j = 0; j < kNumJoints; ++j) zs[j] = pose_cam.joints[j].z();
    const Pose3D back = back_project_pose(pixels, zs, cam.intrinsics);
    double worst = 0.0;
    for (int j = 0; j < kNumJoints; ++j) {
      worst = std::max(worst, (back.joints[j] - pose_cam.joints[j]).cwiseAbs().maxCoeff());
    }
    CHECK(worst < 1e-9);
  }

  SUBCASE("a joint behind the camera is named in the error") {
    Pose3D bad = pose_cam;
    bad[JointId::LWrist].z() = -10.0;
    CHECK_THROWS_WITH_AS(project_pose(bad, cam.intrinsics), doctest::Contains("LWrist"),
                         NumericError);
  }

  SUBCASE("world-frame pose is rejected by project_pose") {
    CHECK_THROWS_AS(project_pose(d.frames[0].pose_world, cam.intrinsics), DataError);
  }
}

TEST_CASE("synthetic rig geometry") {
  RigConfig rc;
  const CameraRig rig = make_synthetic_rig(rc, 99);
  REQUIRE(rig.size() == 4);
  const double focal = rig[0].intrinsics.fx;
  CHECK(focal >= 1000.0);
  CHECK(focal <= 1500.0);
  for (const auto& cam : rig) {
    CHECK_NOTHROW(cam.extrinsics.validate());
    CHECK(cam.intrinsics.fx == focal);  // one focal length per rig
    CHECK(cam.intrinsics.fy == focal);
    CHECK(cam.intrinsics.cx == 500.0);
    // the capture volume center sits in front of every camera, near the axis
    const Eigen::Vector3d c = world_to_camera({0, 0, 1000}, cam.extrinsics);
    CHECK(c.z() > 3000.0);
    const Eigen::Vector2d px = project(c, cam.intrinsics);
    CHECK(std::abs(px.x() - 500.0) < 50.0);
    CHECK(std::abs(px.y() - 500.0) < 50.0);
  }
}

TEST_CASE("camera files round trip bitwise") {
  RigConfig rc;
  const CameraRig rig = make_synthetic_rig(rc, 123);
  const auto dir = test::temp_dir("cams");
  save_rig(rig, dir);
  const CameraRig loaded = load_rig(dir);
  REQUIRE(loaded.size() == rig.size());
  for (std::size_t i = 0; i < rig.size(); ++i) {
    CHECK(loaded[i].extrinsics.R == rig[i].extrinsics.R);
    CHECK(loaded[i].extrinsics.t == rig[i].extrinsics.t);
    CHECK(loaded[i].intrinsics.fx == rig[i].intrinsics.fx);
  }
  CHECK_THROWS_AS(load_rig(test::temp_dir("empty_cams")), IoError);
  CHECK_THROWS_AS(rig_camera(rig, 9), DataError);
}

}  // TEST_SUITE
