#include "depthlift/skeleton.hpp"

#include <cmath>
#include <set>

namespace depthlift {

const std::array<std::string_view, kNumJoints>& joint_names() {
  static const std::array<std::string_view, kNumJoints> names = {
      "Root",  "RHip",      "RKnee",  "RAnkle", "LHip",      "LKnee",
      "LAnkle", "Thorax",    "Neck",   "Nose",   "Head",      "LShoulder",
      "LElbow", "LWrist",    "RShoulder", "RElbow", "RWrist",
  };
  return names;
}

const std::array<std::string_view, kNumJoints - 1>& joint_report_names() {
  static const std::array<std::string_view, kNumJoints - 1> names = {
      "RH", "RK", "RA", "LH", "LK", "LA", "Tho.", "Neck",
      "Nose", "Head", "LS", "LE", "LW", "RS", "RE", "RW",
  };
  return names;
}

const std::array<std::string_view, kNumActions>& action_names() {
  static const std::array<std::string_view, kNumActions> names = {
      "Dir.", "Dis.", "Eat", "Gre.", "Phon.", "Pose", "Pur.", "Sit.",
      "SitD.", "Smo.", "Phot.", "Wait", "Walk", "WalkD.", "WalkP.",
  };
  return names;
}

std::optional<JointId> joint_from_name(std::string_view name) {
  const auto& names = joint_names();
  for (int i = 0; i < kNumJoints; ++i) {
    if (names[i] == name) return static_cast<JointId>(i);
  }
  return std::nullopt;
}

bool Pose3D::all_finite() const {
  for (const auto& j : joints) {
    if (!j.allFinite()) return false;
  }
  return true;
}

void SkeletonModel::validate() const {
  if (bones.size() != kNumJoints - 1) {
    throw DataError("skeleton must have exactly 16 bones, got " + std::to_string(bones.size()));
  }
  std::set<int> reached = {static_cast<int>(JointId::Root)};
  for (const auto& b : bones) {
    const int parent = static_cast<int>(b.parent);
    const int child = static_cast<int>(b.child);
    if (child < 0 || child >= kNumJoints || parent < 0 || parent >= kNumJoints) {
      throw DataError("skeleton bone references an unknown joint");
    }
    if (!reached.count(parent)) {
      throw DataError("skeleton bones are not in parent-first order or do not form a tree");
    }
    if (reached.count(child)) {
      throw DataError("skeleton has two bones ending at the same joint");
    }
    reached.insert(child);
    if (!(b.length_mm >= 50.0 && b.length_mm <= 700.0)) {
      throw DataError("bone length out of range [50, 700] mm");
    }
    if (!(b.min_angle >= 0.0 && b.max_angle <= M_PI && b.min_angle <= b.max_angle)) {
      throw DataError("bone angle range invalid");
    }
    if (std::abs(b.rest_dir.norm() - 1.0) > 1e-9) {
      throw DataError("bone rest direction must be a unit vector");
    }
  }
  if (reached.size() != kNumJoints) {
    throw DataError("skeleton tree does not cover all 17 joints");
  }
}

const Bone* SkeletonModel::bone_to(JointId child) const {
  for (const auto& b : bones) {
    if (b.child == child) return &b;
  }
  return nullptr;
}

namespace {

Eigen::Vector3d unit(double x, double y, double z) { return Eigen::Vector3d(x, y, z).normalized(); }

}  // namespace

SkeletonModel default_skeleton() {
  using J = JointId;
  SkeletonModel m;
  auto add = [&m](J parent, J child, double len, double max_angle, const Eigen::Vector3d& rest) {
    m.bones.push_back(Bone{parent, child, len, 0.0, max_angle, rest});
  };
  // Subject-local frame: x to the subject's left, y forward, z up.
  add(J::Root, J::RHip, 135.0, 0.25, unit(-1.0, 0.0, 0.0));
  add(J::RHip, J::RKnee, 440.0, 1.0, unit(0.0, 0.0, -1.0));
  add(J::RKnee, J::RAnkle, 430.0, 1.3, unit(0.0, 0.0, -1.0));
  add(J::Root, J::LHip, 135.0, 0.25, unit(1.0, 0.0, 0.0));
  add(J::LHip, J::LKnee, 440.0, 1.0, unit(0.0, 0.0, -1.0));
  add(J::LKnee, J::LAnkle, 430.0, 1.3, unit(0.0, 0.0, -1.0));
  add(J::Root, J::Thorax, 450.0, 0.35, unit(0.0, 0.0, 1.0));
  add(J::Thorax, J::Neck, 110.0, 0.30, unit(0.0, 0.0, 1.0));
  add(J::Neck, J::Nose, 115.0, 0.45, unit(0.0, 0.9, 0.6));
  add(J::Nose, J::Head, 115.0, 0.45, unit(0.0, -0.5, 1.0));
  add(J::Thorax, J::LShoulder, 170.0, 0.30, unit(1.0, 0.0, 0.25));
  add(J::LShoulder, J::LElbow, 280.0, 1.3, unit(0.6, 0.0, -1.0));
  add(J::LElbow, J::LWrist, 250.0, 1.4, unit(0.3, 0.3, -1.0));
  add(J::Thorax, J::RShoulder, 170.0, 0.30, unit(-1.0, 0.0, 0.25));
  add(J::RShoulder, J::RElbow, 280.0, 1.3, unit(-0.6, 0.0, -1.0));
  add(J::RElbow, J::RWrist, 250.0, 1.4, unit(-0.3, 0.3, -1.0));
  m.validate();
  return m;
}

}  // namespace depthlift
