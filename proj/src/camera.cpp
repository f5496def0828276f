#include "depthlift/camera.hpp"

#include <Eigen/Geometry>
#include <cmath>
#include <fstream>
#include <json.hpp>

namespace depthlift {

using nlohmann::json;

void CameraExtrinsics::validate() const {
  if (!R.allFinite() || !t.allFinite()) throw DataError("camera extrinsics not finite");
  const double ortho = (R.transpose() * R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (ortho > 1e-10) throw DataError("camera rotation is not orthonormal");
  if (std::abs(R.determinant() - 1.0) > 1e-10) throw DataError("camera rotation has det != +1");
}

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0)) throw DataError("focal lengths must be positive");
  if (!std::isfinite(cx) || !std::isfinite(cy)) throw DataError("principal point not finite");
  if (physical) {
    const auto& p = *physical;
    if (std::abs(fx * p.s_x - p.f) > 1e-9 * std::max(1.0, std::abs(p.f)) ||
        std::abs(fy * p.s_y - p.f) > 1e-9 * std::max(1.0, std::abs(p.f))) {
      throw DataError("intrinsics metadata inconsistent: fx*s_x and fy*s_y must equal f");
    }
  }
}

Eigen::Vector3d world_to_camera(const Eigen::Vector3d& p_world, const CameraExtrinsics& e) {
  return e.R * p_world + e.t;
}

Eigen::Vector2d project(const Eigen::Vector3d& p_cam, const CameraIntrinsics& k) {
  if (!(p_cam.z() > 0.0)) {
    throw NumericError("cannot project point with z <= 0 (z = " + std::to_string(p_cam.z()) + ")");
  }
  return {k.fx * p_cam.x() / p_cam.z() + k.cx, k.fy * p_cam.y() / p_cam.z() + k.cy};
}

Eigen::Vector3d back_project(const Eigen::Vector2d& px, double z, const CameraIntrinsics& k) {
  if (!(z > 0.0)) {
    throw NumericError("cannot back-project with z <= 0 (z = " + std::to_string(z) + ")");
  }
  return {z * (px.x() - k.cx) / k.fx, z * (px.y() - k.cy) / k.fy, z};
}

Pose3D world_to_camera_pose(const Pose3D& pose_world, const CameraExtrinsics& e) {
  if (pose_world.frame != FrameKind::world) {
    throw DataError("world_to_camera_pose expects a world-frame pose");
  }
  Pose3D out;
  out.frame = FrameKind::camera;
  for (int j = 0; j < kNumJoints; ++j) out.joints[j] = world_to_camera(pose_world.joints[j], e);
  return out;
}

std::array<Eigen::Vector2d, kNumJoints> project_pose(const Pose3D& pose_cam,
                                                     const CameraIntrinsics& k) {
  if (pose_cam.frame != FrameKind::camera) throw DataError("project_pose expects a camera-frame pose");
  std::array<Eigen::Vector2d, kNumJoints> out;
  for (int j = 0; j < kNumJoints; ++j) {
    if (!(pose_cam.joints[j].z() > 0.0)) {
      throw NumericError("joint " + std::string(joint_names()[j]) + " has z <= 0, not projectable");
    }
    out[j] = project(pose_cam.joints[j], k);
  }
  return out;
}

Pose3D back_project_pose(const std::array<Eigen::Vector2d, kNumJoints>& pixels,
                         const std::array<double, kNumJoints>& depths_mm,
                         const CameraIntrinsics& k) {
  Pose3D out;
  out.frame = FrameKind::camera;
  for (int j = 0; j < kNumJoints; ++j) {
    if (!(depths_mm[j] > 0.0)) {
      throw NumericError("joint " + std::string(joint_names()[j]) + " has depth <= 0");
    }
    out.joints[j] = back_project(pixels[j], depths_mm[j], k);
  }
  return out;
}

namespace {

// Right-handed camera basis: x right, y down, z along the view direction.
CameraExtrinsics look_at(const Eigen::Vector3d& position, const Eigen::Vector3d& target) {
  const Eigen::Vector3d forward = (target - position).normalized();
  Eigen::Vector3d right = forward.cross(Eigen::Vector3d::UnitZ());
  if (right.norm() < 1e-9) right = Eigen::Vector3d::UnitX();  // looking straight up/down
  right.normalize();
  const Eigen::Vector3d down = forward.cross(right);

  CameraExtrinsics e;
  e.R.row(0) = right;
  e.R.row(1) = down;
  e.R.row(2) = forward;
  e.t = -e.R * position;
  return e;
}

}  // namespace

CameraRig make_synthetic_rig(const RigConfig& cfg, std::uint64_t seed) {
  if (cfg.n_cameras < 1) throw ConfigError("rig needs at least one camera");
  Rng rng(seed, /*stream=*/0xca3ca3);
  const Eigen::Vector3d target(0.0, 0.0, 1000.0);
  const double focal = rng.uniform(cfg.focal_min_px, cfg.focal_max_px);

  CameraRig rig;
  for (int i = 0; i < cfg.n_cameras; ++i) {
    const double azimuth = 2.0 * M_PI * i / cfg.n_cameras + rng.uniform(-0.2, 0.2);
    const double radius = rng.uniform(cfg.radius_min_mm, cfg.radius_max_mm);
    const double height = rng.uniform(cfg.height_min_mm, cfg.height_max_mm);
    const Eigen::Vector3d pos(radius * std::cos(azimuth), radius * std::sin(azimuth), height);

    Camera cam;
    cam.id = i + 1;
    cam.extrinsics = look_at(pos, target);
    cam.intrinsics.fx = focal;
    cam.intrinsics.fy = focal;
    cam.intrinsics.cx = cfg.image_size_px / 2.0;
    cam.intrinsics.cy = cfg.image_size_px / 2.0;
    cam.extrinsics.validate();
    cam.intrinsics.validate();
    rig.push_back(cam);
  }
  return rig;
}

void save_camera(const Camera& cam, const std::filesystem::path& path) {
  json j;
  json r = json::array();
  for (int row = 0; row < 3; ++row)
    for (int col = 0; col < 3; ++col) r.push_back(cam.extrinsics.R(row, col));
  j["R"] = r;
  j["t"] = {cam.extrinsics.t.x(), cam.extrinsics.t.y(), cam.extrinsics.t.z()};
  j["fx"] = cam.intrinsics.fx;
  j["fy"] = cam.intrinsics.fy;
  j["cx"] = cam.intrinsics.cx;
  j["cy"] = cam.intrinsics.cy;

  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + tmp);
    os << j.dump(2) << '\n';
    if (!os) throw IoError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Camera load_camera(const std::filesystem::path& path, int id) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open camera file: " + path.string());
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw DataError("camera file parse error (" + path.string() + "): " + e.what());
  }
  Camera cam;
  cam.id = id;
  try {
    const auto& r = j.at("R");
    if (r.size() != 9) throw DataError("camera R must have 9 entries");
    for (int row = 0; row < 3; ++row)
      for (int col = 0; col < 3; ++col) cam.extrinsics.R(row, col) = r.at(3 * row + col).get<double>();
    const auto& t = j.at("t");
    if (t.size() != 3) throw DataError("camera t must have 3 entries");
    cam.extrinsics.t = Eigen::Vector3d(t.at(0).get<double>(), t.at(1).get<double>(),
                                       t.at(2).get<double>());
    cam.intrinsics.fx = j.at("fx").get<double>();
    cam.intrinsics.fy = j.at("fy").get<double>();
    cam.intrinsics.cx = j.at("cx").get<double>();
    cam.intrinsics.cy = j.at("cy").get<double>();
  } catch (const json::exception& e) {
    throw DataError("camera file schema error (" + path.string() + "): " + e.what());
  }
  cam.extrinsics.validate();
  cam.intrinsics.validate();
  return cam;
}

CameraRig load_rig(const std::filesystem::path& dir) {
  CameraRig rig;
  for (int id = 1;; ++id) {
    const auto path = dir / ("cam" + std::to_string(id) + ".json");
    if (!std::filesystem::exists(path)) break;
    rig.push_back(load_camera(path, id));
  }
  if (rig.empty()) throw IoError("no camera files (cam1.json, ...) found in " + dir.string());
  return rig;
}

void save_rig(const CameraRig& rig, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& cam : rig) save_camera(cam, dir / ("cam" + std::to_string(cam.id) + ".json"));
}

const Camera& rig_camera(const CameraRig& rig, int id) {
  for (const auto& cam : rig) {
    if (cam.id == id) return cam;
  }
  throw DataError("rig has no camera with id " + std::to_string(id));
}

}  // namespace depthlift
