#pragma once

#include <cstdint>
#include <string_view>
#include <utility>

#include "depthlift/skeleton.hpp"

namespace depthlift {

// Generates n_subjects x 15 actions x n_frames_per world-frame poses by
// forward kinematics. Joint angles follow a bounded random walk whose step
// size grows with the action id, so actions have distinct pose dynamics.
// Subjects differ by a single limb-length scale drawn from [0.9, 1.1].
// Deterministic given the seed. Generated records carry camera_id = 1; the
// synth pipeline replicates records per camera when it attaches pixel and
// depth observations.
Dataset synth_generate(const SkeletonModel& model, int n_subjects, int n_frames_per,
                       std::uint64_t seed);

enum class Protocol { P1, P2 };

Protocol protocol_from_string(std::string_view s);
std::string_view to_string(Protocol p);

// Train/test subject roles. Synthetic subject k maps to role
// {S1,S5,S6,S7,S8,S9,S11}[(k-1) mod 7]; at least 7 subjects are required.
// P1 trains on S1,S5,S6,S7,S8,S9 and tests on S11; P2 trains on
// S1,S5,S6,S7,S8 and tests on S9,S11. Test sequences keep every 64th frame.
std::string_view subject_role(int subject_id);
std::pair<Dataset, Dataset> split_protocol(const Dataset& d, Protocol protocol);

}  // namespace depthlift
