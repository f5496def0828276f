#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <optional>
#include <vector>

#include "depthlift/skeleton.hpp"

namespace depthlift {

// World -> camera: p_cam = R * p_world + t.
struct CameraExtrinsics {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  // Throws DataError unless R is a proper rotation (R^T R = I, det = +1,
  // both within 1e-10).
  void validate() const;
};

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;

  // Optional physical metadata: focal length f (mm) and effective pixel
  // sizes s_x, s_y (mm/px) with fx = f/s_x, fy = f/s_y. Carried for
  // completeness; never used by the projection math.
  struct Physical {
    double f = 0.0;
    double s_x = 0.0;
    double s_y = 0.0;
  };
  std::optional<Physical> physical;

  void validate() const;
};

Eigen::Vector3d world_to_camera(const Eigen::Vector3d& p_world, const CameraExtrinsics& e);

// Pinhole projection; requires p_cam.z > 0.
//   r = fx * x / z + cx,  s = fy * y / z + cy
Eigen::Vector2d project(const Eigen::Vector3d& p_cam, const CameraIntrinsics& k);

// Depth-conditioned inverse of project(); requires z > 0.
//   x = z * (r - cx) / fx,  y = z * (s - cy) / fy
Eigen::Vector3d back_project(const Eigen::Vector2d& px, double z, const CameraIntrinsics& k);

// Pose-level broadcasts. Errors carry the offending joint's name.
Pose3D world_to_camera_pose(const Pose3D& pose_world, const CameraExtrinsics& e);
std::array<Eigen::Vector2d, kNumJoints> project_pose(const Pose3D& pose_cam,
                                                     const CameraIntrinsics& k);
Pose3D back_project_pose(const std::array<Eigen::Vector2d, kNumJoints>& pixels,
                         const std::array<double, kNumJoints>& depths_mm,
                         const CameraIntrinsics& k);

struct Camera {
  int id = 0;  // 1..4
  CameraExtrinsics extrinsics;
  CameraIntrinsics intrinsics;
};

using CameraRig = std::vector<Camera>;

struct RigConfig {
  int n_cameras = kNumCameras;
  double radius_min_mm = 4000.0;
  double radius_max_mm = 6000.0;
  double height_min_mm = 1000.0;
  double height_max_mm = 1800.0;
  double focal_min_px = 1000.0;
  double focal_max_px = 1500.0;
  double image_size_px = 1000.0;  // principal point at image center
};

// Cameras on a circle around the capture volume, looking at its center.
// All cameras share one focal length drawn from [focal_min, focal_max],
// mirroring a multi-camera studio built from identical units.
CameraRig make_synthetic_rig(const RigConfig& cfg, std::uint64_t seed);

// One JSON file per camera: {"R":[9 row-major],"t":[3],"fx","fy","cx","cy"}.
void save_camera(const Camera& cam, const std::filesystem::path& path);
Camera load_camera(const std::filesystem::path& path, int id);

// Loads cam1.json .. camN.json from a directory.
CameraRig load_rig(const std::filesystem::path& dir);
void save_rig(const CameraRig& rig, const std::filesystem::path& dir);

const Camera& rig_camera(const CameraRig& rig, int id);

}  // namespace depthlift
