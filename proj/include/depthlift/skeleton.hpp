#pragma once

#include <Eigen/Core>
#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "depthlift/common.hpp"

namespace depthlift {

// 17-joint skeleton. The integer ordering is a toolkit convention and is
// fixed: Root is 0 and the 16 remaining joints follow the per-joint report
// order (right leg, left leg, torso/head, left arm, right arm).
enum class JointId : int {
  Root = 0,
  RHip,
  RKnee,
  RAnkle,
  LHip,
  LKnee,
  LAnkle,
  Thorax,
  Neck,
  Nose,
  Head,
  LShoulder,
  LElbow,
  LWrist,
  RShoulder,
  RElbow,
  RWrist,
};

inline constexpr int kNumJoints = 17;
inline constexpr int kNumActions = 15;
inline constexpr int kNumCameras = 4;

// Canonical joint names as written in dataset file headers.
const std::array<std::string_view, kNumJoints>& joint_names();

// Short names used in per-joint report columns, non-root joints only.
const std::array<std::string_view, kNumJoints - 1>& joint_report_names();

// Action column names in report order, indexed by action_id - 1.
const std::array<std::string_view, kNumActions>& action_names();

// Parses a canonical joint name; returns nullopt if unknown.
std::optional<JointId> joint_from_name(std::string_view name);

enum class FrameKind { world, camera };

struct Pose3D {
  std::array<Eigen::Vector3d, kNumJoints> joints;
  FrameKind frame = FrameKind::world;

  Eigen::Vector3d& operator[](JointId id) { return joints[static_cast<int>(id)]; }
  const Eigen::Vector3d& operator[](JointId id) const { return joints[static_cast<int>(id)]; }

  bool all_finite() const;
};

// One bone of the articulated model. `rest_dir` is the unit direction from
// parent to child in the subject-local frame when all wobble angles are
// zero; the pose generator swings the bone away from it by a polar angle
// limited to [min_angle, max_angle] radians.
struct Bone {
  JointId parent;
  JointId child;
  double length_mm = 0.0;
  double min_angle = 0.0;
  double max_angle = 0.0;
  Eigen::Vector3d rest_dir = Eigen::Vector3d::UnitZ();
};

struct SkeletonModel {
  std::vector<Bone> bones;  // in FK evaluation order (parents before children)

  // Throws DataError unless the bones form a tree rooted at Root covering
  // all 17 joints, lengths lie in [50, 700] mm and angle ranges are sane.
  void validate() const;

  // Bone lookup by child joint; nullptr for Root.
  const Bone* bone_to(JointId child) const;
};

// Humanoid default used by the synthetic generator.
SkeletonModel default_skeleton();

struct FrameRecord {
  int subject_id = 0;
  int action_id = 0;  // 1..15
  int camera_id = 0;  // 1..4
  long frame_index = 0;
  Pose3D pose_world;
  // Populated by the synth pipeline: per-joint pixel coordinates and
  // simulated depth values for this record's camera.
  std::optional<std::array<Eigen::Vector2d, kNumJoints>> pixels;
  std::optional<std::array<double, kNumJoints>> depths;
};

struct Dataset {
  std::vector<FrameRecord> frames;
  SkeletonModel skeleton;
  std::string provenance;
};

}  // namespace depthlift
