#include "depthlift/eval.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>

namespace depthlift {

using nlohmann::json;

std::span<const JointId> non_root_joints() {
  static const std::array<JointId, kNumJoints - 1> joints = [] {
    std::array<JointId, kNumJoints - 1> a{};
    for (int j = 1; j < kNumJoints; ++j) a[j - 1] = static_cast<JointId>(j);
    return a;
  }();
  return joints;
}

double mpjpe(const Pose3D& pred, const Pose3D& gt) { return mpjpe(pred, gt, non_root_joints()); }

double mpjpe(const Pose3D& pred, const Pose3D& gt, std::span<const JointId> joints) {
  if (pred.frame != gt.frame) {
    throw DataError("mpjpe: poses live in different reference frames");
  }
  if (joints.empty()) throw DataError("mpjpe: empty joint set");
  double sum = 0.0;
  for (JointId j : joints) sum += (pred[j] - gt[j]).norm();
  return sum / static_cast<double>(joints.size());
}

AlignmentResult procrustes_align(const Pose3D& pred, const Pose3D& gt) {
  if (pred.frame != gt.frame) {
    throw DataError("procrustes_align: poses live in different reference frames");
  }

  Eigen::Vector3d pc = Eigen::Vector3d::Zero(), gc = Eigen::Vector3d::Zero();
  for (int j = 0; j < kNumJoints; ++j) {
    pc += pred.joints[j];
    gc += gt.joints[j];
  }
  pc /= kNumJoints;
  gc /= kNumJoints;

  Eigen::Matrix3d cross = Eigen::Matrix3d::Zero();
  for (int j = 0; j < kNumJoints; ++j) {
    cross += (pred.joints[j] - pc) * (gt.joints[j] - gc).transpose();
  }

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  if (sv(1) <= 1e-9 * std::max(sv(0), 1.0)) {
    throw NumericError("procrustes_align: rank-deficient (collinear or coincident) configuration");
  }

  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  // Reject reflections: flip the smallest singular direction if needed.
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  const Eigen::Matrix3d rotation = svd.matrixV() * d * svd.matrixU().transpose();
  const Eigen::Vector3d translation = gc - rotation * pc;

  AlignmentResult res;
  res.rotation = rotation;
  res.translation = translation;
  res.aligned.frame = pred.frame;
  for (int j = 0; j < kNumJoints; ++j) {
    res.aligned.joints[j] = rotation * pred.joints[j] + translation;
  }
  return res;
}

EvalReport evaluate_protocol(const NetParams& params, const NormStats& stats, const Dataset& test,
                             const CameraRig& rig, Protocol protocol, bool aligned) {
  if (test.frames.empty()) throw DataError("evaluate_protocol: empty test split");

  const SampleMatrix sm = build_samples(test, rig, params.cfg.use_depth);
  const Eigen::MatrixXd pred = predict_batch(params, stats, sm.x);

  EvalReport rep;
  rep.aligned = aligned;
  rep.protocol = protocol;
  rep.n_frames = static_cast<long>(test.frames.size());
  rep.per_action.fill(std::numeric_limits<double>::quiet_NaN());
  rep.action_frames.fill(0);

  std::array<double, kNumActions> action_sum{};
  std::array<double, kNumJoints - 1> joint_sum{};
  double total = 0.0;

  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    Pose3D pred_pose, gt_pose;
    pred_pose.frame = FrameKind::camera;
    gt_pose.frame = FrameKind::camera;
    pred_pose[JointId::Root] = Eigen::Vector3d::Zero();
    gt_pose[JointId::Root] = Eigen::Vector3d::Zero();
    for (int j = 1; j < kNumJoints; ++j) {
      pred_pose.joints[j] = pred.block<1, 3>(i, 3 * (j - 1)).transpose();
      gt_pose.joints[j] = sm.y.block<1, 3>(i, 3 * (j - 1)).transpose();
    }
    if (aligned) pred_pose = procrustes_align(pred_pose, gt_pose).aligned;

    double frame_sum = 0.0;
    for (int j = 1; j < kNumJoints; ++j) {
      const double err = (pred_pose.joints[j] - gt_pose.joints[j]).norm();
      joint_sum[j - 1] += err;
      frame_sum += err;
    }
    const double frame_mpjpe = frame_sum / (kNumJoints - 1);
    total += frame_mpjpe;
    const int a = sm.action_ids[static_cast<std::size_t>(i)] - 1;
    action_sum[a] += frame_mpjpe;
    rep.action_frames[a] += 1;
  }

  for (int a = 0; a < kNumActions; ++a) {
    if (rep.action_frames[a] > 0) {
      rep.per_action[a] = action_sum[a] / static_cast<double>(rep.action_frames[a]);
    }
  }
  for (int j = 0; j < kNumJoints - 1; ++j) {
    rep.per_joint[j] = joint_sum[j] / static_cast<double>(rep.n_frames);
  }
  rep.avg_mpjpe = total / static_cast<double>(rep.n_frames);
  return rep;
}

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

void emit_report_csv(const EvalReport& r, const std::filesystem::path& path) {
  std::string out;
  out += "protocol," + std::string(to_string(r.protocol)) + "\n";
  out += std::string("aligned,") + (r.aligned ? "true" : "false") + "\n";
  out += "n_frames," + std::to_string(r.n_frames) + "\n";

  out += "action";
  for (auto name : action_names()) out += "," + std::string(name);
  out += ",Avg\nmpjpe_mm";
  for (int a = 0; a < kNumActions; ++a) {
    out += ",";
    if (r.action_frames[a] > 0) out += num(r.per_action[a]);
  }
  out += "," + num(r.avg_mpjpe) + "\nframes";
  for (int a = 0; a < kNumActions; ++a) out += "," + std::to_string(r.action_frames[a]);
  out += "," + std::to_string(r.n_frames) + "\n";

  out += "joint";
  for (auto name : joint_report_names()) out += "," + std::string(name);
  out += "\nmpjpe_mm";
  for (int j = 0; j < kNumJoints - 1; ++j) out += "," + num(r.per_joint[j]);
  out += "\n";

  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + tmp);
    os << out;
    if (!os) throw IoError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

void emit_report_json(const EvalReport& r, const std::filesystem::path& path) {
  json j;
  j["protocol"] = std::string(to_string(r.protocol));
  j["aligned"] = r.aligned;
  j["n_frames"] = r.n_frames;
  j["avg_mpjpe_mm"] = r.avg_mpjpe;
  json per_action = json::object();
  json frames = json::object();
  for (int a = 0; a < kNumActions; ++a) {
    const std::string name(action_names()[a]);
    per_action[name] = r.action_frames[a] > 0 ? json(r.per_action[a]) : json(nullptr);
    frames[name] = r.action_frames[a];
  }
  j["per_action_mpjpe_mm"] = per_action;
  j["per_action_frames"] = frames;
  json per_joint = json::object();
  for (int jj = 0; jj < kNumJoints - 1; ++jj) {
    per_joint[std::string(joint_report_names()[jj])] = r.per_joint[jj];
  }
  j["per_joint_mpjpe_mm"] = per_joint;

  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + tmp);
    os << j.dump(2) << '\n';
    if (!os) throw IoError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace depthlift
