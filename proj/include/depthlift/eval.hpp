#pragma once

#include <Eigen/Core>
#include <filesystem>
#include <span>

#include "depthlift/net.hpp"
#include "depthlift/skeleton.hpp"
#include "depthlift/synth.hpp"

namespace depthlift {

// The 16 non-root joints, the default scoring set.
std::span<const JointId> non_root_joints();

// Mean Euclidean distance (mm) over the joint set. Both poses must carry
// the same frame kind.
double mpjpe(const Pose3D& pred, const Pose3D& gt);
double mpjpe(const Pose3D& pred, const Pose3D& gt, std::span<const JointId> joints);

struct AlignmentResult {
  Eigen::Matrix3d rotation;
  Eigen::Vector3d translation;
  Pose3D aligned;
};

// Least-squares optimal rigid transform (Kabsch via SVD of the centered
// cross-covariance, det(R) = +1 enforced, no scaling) superimposing pred
// onto gt. Throws NumericError for collinear or coincident configurations.
AlignmentResult procrustes_align(const Pose3D& pred, const Pose3D& gt);

struct EvalReport {
  double avg_mpjpe = 0.0;                          // frame-weighted, mm
  std::array<double, kNumActions> per_action{};    // NaN where no frames
  std::array<long, kNumActions> action_frames{};
  std::array<double, kNumJoints - 1> per_joint{};  // report order (Root excluded)
  bool aligned = false;
  Protocol protocol = Protocol::P1;
  long n_frames = 0;
};

// Per-frame: build the network input, predict, root-center the ground
// truth, optionally procrustes-align, accumulate per-action and per-joint
// means.
EvalReport evaluate_protocol(const NetParams& params, const NormStats& stats, const Dataset& test,
                             const CameraRig& rig, Protocol protocol, bool aligned);

void emit_report_csv(const EvalReport& r, const std::filesystem::path& path);
void emit_report_json(const EvalReport& r, const std::filesystem::path& path);

}  // namespace depthlift
