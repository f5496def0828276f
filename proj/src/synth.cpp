#include "depthlift/synth.hpp"

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <set>

namespace depthlift {

namespace {

constexpr std::uint64_t kStreamSubjectScale = 1;
constexpr std::uint64_t kStreamSequence = 2;

constexpr double kRootHeightMm = 940.0;
constexpr double kRootWanderMm = 1200.0;

// Orthonormal complement of a unit vector, deterministic in the input.
void make_basis(const Eigen::Vector3d& axis, Eigen::Vector3d& e1, Eigen::Vector3d& e2) {
  const Eigen::Vector3d helper =
      std::abs(axis.x()) < 0.9 ? Eigen::Vector3d::UnitX() : Eigen::Vector3d::UnitY();
  e1 = axis.cross(helper).normalized();
  e2 = axis.cross(e1);
}

// Swing a bone's rest direction by polar angle theta towards azimuth phi.
Eigen::Vector3d swing(const Eigen::Vector3d& rest, double theta, double phi) {
  Eigen::Vector3d e1, e2;
  make_basis(rest, e1, e2);
  return std::cos(theta) * rest + std::sin(theta) * (std::cos(phi) * e1 + std::sin(phi) * e2);
}

double reflect_into(double v, double lo, double hi) {
  // Bounce a random-walk proposal back into [lo, hi].
  for (int guard = 0; guard < 64 && (v < lo || v > hi); ++guard) {
    if (v > hi) v = 2.0 * hi - v;
    if (v < lo) v = 2.0 * lo - v;
  }
  return std::clamp(v, lo, hi);
}

struct SequenceState {
  std::vector<double> theta;
  std::vector<double> phi;
  double yaw = 0.0;
  Eigen::Vector3d root = Eigen::Vector3d::Zero();
};

}  // namespace

Dataset synth_generate(const SkeletonModel& model, int n_subjects, int n_frames_per,
                       std::uint64_t seed) {
  model.validate();
  if (n_subjects < 1 || n_frames_per < 1) {
    throw ConfigError("synth_generate requires n_subjects >= 1 and n_frames_per >= 1");
  }

  Dataset out;
  out.skeleton = model;
  out.provenance = "synth seed=" + std::to_string(seed);
  out.frames.reserve(static_cast<std::size_t>(n_subjects) * kNumActions * n_frames_per);

  const int n_bones = static_cast<int>(model.bones.size());

  for (int subject = 1; subject <= n_subjects; ++subject) {
    Rng scale_rng(seed, combine_seed(kStreamSubjectScale, static_cast<std::uint64_t>(subject)));
    const double scale = scale_rng.uniform(0.9, 1.1);

    for (int action = 1; action <= kNumActions; ++action) {
      Rng rng(seed, combine_seed(kStreamSequence,
                                 static_cast<std::uint64_t>(subject) * 131 +
                                     static_cast<std::uint64_t>(action)));

      // Larger action ids move faster; gives each action its own dynamics.
      const double ang_step = 0.012 + 0.006 * action;
      const double yaw_step = 0.008 + 0.004 * action;
      const double pos_step = 3.0 + 2.0 * action;

      SequenceState st;
      st.theta.resize(n_bones);
      st.phi.resize(n_bones);
      for (int b = 0; b < n_bones; ++b) {
        st.theta[b] = rng.uniform(model.bones[b].min_angle, model.bones[b].max_angle);
        st.phi[b] = rng.uniform(-M_PI, M_PI);
      }
      st.yaw = rng.uniform(-M_PI, M_PI);
      const double base_height = kRootHeightMm * scale;
      st.root = Eigen::Vector3d(rng.uniform(-1000.0, 1000.0), rng.uniform(-1000.0, 1000.0),
                                base_height + rng.uniform(-100.0, 100.0));

      for (int frame = 0; frame < n_frames_per; ++frame) {
        if (frame > 0) {
          for (int b = 0; b < n_bones; ++b) {
            st.theta[b] = reflect_into(st.theta[b] + ang_step * rng.normal(),
                                       model.bones[b].min_angle, model.bones[b].max_angle);
            st.phi[b] += 2.5 * ang_step * rng.normal();
          }
          st.yaw += yaw_step * rng.normal();
          st.root.x() = reflect_into(st.root.x() + pos_step * rng.normal(), -kRootWanderMm,
                                     kRootWanderMm);
          st.root.y() = reflect_into(st.root.y() + pos_step * rng.normal(), -kRootWanderMm,
                                     kRootWanderMm);
          st.root.z() = reflect_into(st.root.z() + 0.3 * pos_step * rng.normal(),
                                     base_height - 200.0, base_height + 200.0);
        }

        Pose3D pose;
        pose.frame = FrameKind::world;
        pose[JointId::Root] = Eigen::Vector3d::Zero();
        for (int b = 0; b < n_bones; ++b) {
          const Bone& bone = model.bones[b];
          pose[bone.child] =
              pose[bone.parent] + scale * bone.length_mm * swing(bone.rest_dir, st.theta[b], st.phi[b]);
        }
        const Eigen::AngleAxisd yaw_rot(st.yaw, Eigen::Vector3d::UnitZ());
        for (auto& j : pose.joints) j = yaw_rot * j + st.root;

        FrameRecord rec;
        rec.subject_id = subject;
        rec.action_id = action;
        rec.camera_id = 1;
        rec.frame_index = frame;
        rec.pose_world = pose;
        out.frames.push_back(std::move(rec));
      }
    }
  }
  return out;
}

Protocol protocol_from_string(std::string_view s) {
  if (s == "P1" || s == "p1") return Protocol::P1;
  if (s == "P2" || s == "p2") return Protocol::P2;
  throw ConfigError("unknown protocol '" + std::string(s) + "', expected P1 or P2");
}

std::string_view to_string(Protocol p) { return p == Protocol::P1 ? "P1" : "P2"; }

namespace {
const std::array<std::string_view, 7> kRoles = {"S1", "S5", "S6", "S7", "S8", "S9", "S11"};
}

std::string_view subject_role(int subject_id) {
  if (subject_id < 1) throw ConfigError("subject ids are 1-based");
  return kRoles[(subject_id - 1) % kRoles.size()];
}

std::pair<Dataset, Dataset> split_protocol(const Dataset& d, Protocol protocol) {
  std::set<int> subjects;
  for (const auto& f : d.frames) subjects.insert(f.subject_id);
  if (subjects.size() < kRoles.size()) {
    throw ConfigError("protocol splits need at least 7 subjects, dataset has " +
                      std::to_string(subjects.size()));
  }

  const std::set<std::string_view> test_roles =
      protocol == Protocol::P1 ? std::set<std::string_view>{"S11"}
                               : std::set<std::string_view>{"S9", "S11"};

  Dataset train, test;
  train.skeleton = d.skeleton;
  test.skeleton = d.skeleton;
  train.provenance = d.provenance + " | " + std::string(to_string(protocol)) + " train";
  test.provenance = d.provenance + " | " + std::string(to_string(protocol)) + " test";

  for (const auto& f : d.frames) {
    if (test_roles.count(subject_role(f.subject_id))) {
      if (f.frame_index % 64 == 0) test.frames.push_back(f);
    } else {
      train.frames.push_back(f);
    }
  }
  if (train.frames.empty() || test.frames.empty()) {
    throw ConfigError("protocol split produced an empty train or test set");
  }
  return {std::move(train), std::move(test)};
}

}  // namespace depthlift
