#pragma once

#include <filesystem>
#include <string>

#include "depthlift/camera.hpp"
#include "depthlift/depth_sim.hpp"
#include "depthlift/synth.hpp"

namespace depthlift::test {

inline std::filesystem::path temp_dir(const std::string& name) {
  const auto p = std::filesystem::temp_directory_path() / ("depthlift_" + name);
  std::filesystem::remove_all(p);
  std::filesystem::create_directories(p);
  return p;
}

// Synthetic dataset expanded across a rig with pixel and depth observations,
// mirroring what the synth command produces but kept in memory.
inline std::pair<Dataset, CameraRig> observed_dataset(int subjects, int frames_per,
                                                      std::uint64_t seed,
                                                      double target_spearman = 1.0,
                                                      int n_cameras = kNumCameras) {
  Dataset base = synth_generate(default_skeleton(), subjects, frames_per, seed);
  RigConfig rc;
  rc.n_cameras = n_cameras;
  CameraRig rig = make_synthetic_rig(rc, seed);

  Dataset d;
  d.skeleton = base.skeleton;
  d.provenance = base.provenance;
  for (const auto& f : base.frames) {
    for (const auto& cam : rig) {
      FrameRecord rec = f;
      rec.camera_id = cam.id;
      rec.pixels = project_pose(world_to_camera_pose(rec.pose_world, cam.extrinsics),
                                cam.intrinsics);
      d.frames.push_back(std::move(rec));
    }
  }
  DepthModelConfig dm;
  dm.target_spearman = target_spearman;
  dm.seed = seed;
  simulate_dataset_depths(d, rig, dm);
  return {std::move(d), std::move(rig)};
}

}  // namespace depthlift::test

namespace depthlift::test {

// O(n^2) pair-counting Kendall tau-b oracle, independent of the library path.
inline double kendall_oracle(std::span<const double> xs, std::span<const double> ys) {
  const auto n = static_cast<long>(xs.size());
  long long concordant = 0, discordant = 0, ties_x = 0, ties_y = 0;
  for (long i = 0; i < n; ++i) {
    for (long j = i + 1; j < n; ++j) {
      const double dx = xs[i] - xs[j];
      const double dy = ys[i] - ys[j];
      if (dx == 0.0 && dy == 0.0) continue;
      if (dx == 0.0) {
        ++ties_x;
      } else if (dy == 0.0) {
        ++ties_y;
      } else if (dx * dy > 0.0) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const long long n0 = static_cast<long long>(n) * (n - 1) / 2;
  // joint ties count towards both tie totals in the tau-b denominator
  long long joint = n0 - concordant - discordant - ties_x - ties_y;
  const double denom_x = static_cast<double>(n0 - (ties_x + joint));
  const double denom_y = static_cast<double>(n0 - (ties_y + joint));
  return static_cast<double>(concordant - discordant) / std::sqrt(denom_x * denom_y);
}

}  // namespace depthlift::test
