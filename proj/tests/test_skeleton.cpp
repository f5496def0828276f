#include <doctest.h>

#include <fstream>
#include <set>
#include <sstream>

#include "depthlift/dataset_io.hpp"
#include "depthlift/synth.hpp"
#include "helpers.hpp"

using namespace depthlift;

TEST_SUITE("skeleton") {

TEST_CASE("joint ordering is fixed with Root first") {
  CHECK(static_cast<int>(JointId::Root) == 0);
  CHECK(joint_names().size() == 17);
  CHECK(joint_names()[0] == "Root");
  CHECK(joint_names()[16] == "RWrist");
  CHECK(joint_from_name("LKnee") == JointId::LKnee);
  CHECK(!joint_from_name("Pelvis"));
  // report names follow the per-joint table order
  CHECK(joint_report_names()[0] == "RH");
  CHECK(joint_report_names()[5] == "LA");
  CHECK(joint_report_names()[15] == "RW");
  CHECK(action_names().size() == 15);
  CHECK(action_names()[0] == "Dir.");
  CHECK(action_names()[14] == "WalkP.");
}

TEST_CASE("default skeleton is a valid 17-joint tree") {
  const SkeletonModel m = default_skeleton();
  CHECK(m.bones.size() == 16);
  CHECK_NOTHROW(m.validate());
  std::set<JointId> children;
  for (const auto& b : m.bones) {
    children.insert(b.child);
    CHECK(b.length_mm >= 50.0);
    CHECK(b.length_mm <= 700.0);
  }
  CHECK(children.size() == 16);
  CHECK(m.bone_to(JointId::Root) == nullptr);
  CHECK(m.bone_to(JointId::LWrist)->parent == JointId::LElbow);
}

TEST_CASE("synth_generate produces the expected frame grid") {
  const auto d = synth_generate(default_skeleton(), 1, 1, 7);
  CHECK(d.frames.size() == 15);  // one frame per action
  for (const auto& f : d.frames) {
    CHECK(f.subject_id == 1);
    CHECK(f.frame_index == 0);
    CHECK(f.pose_world.all_finite());
  }
  // bone lengths land within the [0.9, 1.1] subject scaling band
  for (const auto& f : d.frames) {
    for (const auto& b : d.skeleton.bones) {
      const double len = (f.pose_world[b.child] - f.pose_world[b.parent]).norm();
      CHECK(len >= 0.9 * b.length_mm - 1e-9);
      CHECK(len <= 1.1 * b.length_mm + 1e-9);
    }
  }
}

TEST_CASE("synth_generate is bitwise deterministic in the seed") {
  const auto a = synth_generate(default_skeleton(), 2, 3, 7);
  const auto b = synth_generate(default_skeleton(), 2, 3, 7);
  REQUIRE(a.frames.size() == b.frames.size());
  for (std::size_t i = 0; i < a.frames.size(); ++i) {
    for (int j = 0; j < kNumJoints; ++j) {
      CHECK(a.frames[i].pose_world.joints[j] == b.frames[i].pose_world.joints[j]);
    }
  }
  const auto c = synth_generate(default_skeleton(), 2, 3, 8);
  CHECK(a.frames[0].pose_world[JointId::Head] != c.frames[0].pose_world[JointId::Head]);
}

TEST_CASE("forward kinematics preserves subject-scaled bone lengths to 1e-9 mm") {
  const auto d = synth_generate(default_skeleton(), 2, 100, 1);
  CHECK(d.frames.size() == 3000);
  // the per-subject scale is shared by every bone of every frame
  for (int subject = 1; subject <= 2; ++subject) {
    double scale = 0.0;
    for (const auto& f : d.frames) {
      if (f.subject_id != subject) continue;
      for (const auto& b : d.skeleton.bones) {
        const double len = (f.pose_world[b.child] - f.pose_world[b.parent]).norm();
        const double r = len / b.length_mm;
        if (scale == 0.0) scale = r;
        CHECK(std::abs(len - scale * b.length_mm) < 1e-9);
      }
    }
    CHECK(scale >= 0.9);
    CHECK(scale <= 1.1);
  }
}

TEST_CASE("synth_generate rejects invalid arguments") {
  CHECK_THROWS_AS(synth_generate(default_skeleton(), 0, 1, 1), ConfigError);
  CHECK_THROWS_AS(synth_generate(default_skeleton(), 1, 0, 1), ConfigError);
  SkeletonModel broken = default_skeleton();
  broken.bones.pop_back();
  CHECK_THROWS_AS(synth_generate(broken, 1, 1, 1), DataError);
}

TEST_CASE("subject roles and protocol splits") {
  CHECK(subject_role(1) == "S1");
  CHECK(subject_role(6) == "S9");
  CHECK(subject_role(7) == "S11");
  CHECK(subject_role(8) == "S1");  // roles recycle past 7 subjects

  const auto d = synth_generate(default_skeleton(), 7, 128, 3);

  SUBCASE("P1: six train subjects, one test subject") {
    const auto [train, test] = split_protocol(d, Protocol::P1);
    std::set<int> train_subjects, test_subjects;
    for (const auto& f : train.frames) train_subjects.insert(f.subject_id);
    for (const auto& f : test.frames) test_subjects.insert(f.subject_id);
    CHECK(train_subjects.size() == 6);
    CHECK(test_subjects == std::set<int>{7});
    for (int s : train_subjects) CHECK(!test_subjects.count(s));
    // 128-frame sequences keep exactly frames 0 and 64
    CHECK(test.frames.size() == 15 * 2);
    for (const auto& f : test.frames) CHECK(f.frame_index % 64 == 0);
    CHECK(train.frames.size() == 6ull * 15 * 128);
  }

  SUBCASE("P2: five train subjects, two test subjects") {
    const auto [train, test] = split_protocol(d, Protocol::P2);
    std::set<int> train_subjects, test_subjects;
    for (const auto& f : train.frames) train_subjects.insert(f.subject_id);
    for (const auto& f : test.frames) test_subjects.insert(f.subject_id);
    CHECK(train_subjects.size() == 5);
    CHECK(test_subjects == std::set<int>{6, 7});
  }

  SUBCASE("too few subjects is a configuration error") {
    const auto small = synth_generate(default_skeleton(), 6, 2, 3);
    CHECK_THROWS_AS(split_protocol(small, Protocol::P1), ConfigError);
  }
}

TEST_CASE("dataset save/load round trip") {
  auto [d, rig] = test::observed_dataset(1, 2, 5, 0.9, 2);
  const auto dir = test::temp_dir("io");
  const auto path = dir / "dataset.jsonl";
  save_dataset(d, path);
  const Dataset loaded = load_dataset(path);

  REQUIRE(loaded.frames.size() == d.frames.size());
  CHECK(loaded.provenance == d.provenance);
  CHECK(loaded.skeleton.bones.size() == d.skeleton.bones.size());
  REQUIRE(loaded.frames[0].pixels.has_value());
  REQUIRE(loaded.frames[0].depths.has_value());

  // save(load(f)) reproduces the file byte for byte
  const auto path2 = dir / "dataset2.jsonl";
  save_dataset(loaded, path2);
  std::ifstream f1(path, std::ios::binary), f2(path2, std::ios::binary);
  std::ostringstream s1, s2;
  s1 << f1.rdbuf();
  s2 << f2.rdbuf();
  CHECK(s1.str() == s2.str());

  // loaded coordinates agree with the originals at the declared precision
  for (std::size_t i = 0; i < d.frames.size(); ++i) {
    for (int j = 0; j < kNumJoints; ++j) {
      const auto& a = d.frames[i].pose_world.joints[j];
      const auto& b = loaded.frames[i].pose_world.joints[j];
      for (int c = 0; c < 3; ++c) {
        CHECK(std::abs(a[c] - b[c]) <= 1e-8 * std::max(1.0, std::abs(a[c])));
      }
    }
  }
}

TEST_CASE("dataset loader reports schema and parse errors") {
  auto [d, rig] = test::observed_dataset(1, 1, 5, 0.9, 1);
  const auto dir = test::temp_dir("io_err");
  const auto path = dir / "dataset.jsonl";
  save_dataset(d, path);

  std::ifstream is(path, std::ios::binary);
  std::string header, line1;
  std::getline(is, header);
  std::getline(is, line1);
  is.close();

  SUBCASE("16 joints per frame is a schema error") {
    // drop the last joint triple from the pose array
    std::string broken = line1;
    broken.replace(line1.find("\"pose\":["), std::string::npos,
                   "\"pose\":[[0,0,0],[0,0,0],[0,0,0],[0,0,0],[0,0,0],[0,0,0],[0,0,0],[0,0,0],"
                   "[0,0,0],[0,0,0],[0,0,0],[0,0,0],[0,0,0],[0,0,0],[0,0,0],[0,0,0]]}");
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os << header << "\n" << broken << "\n";
    os.close();
    CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("16 joints"), DataError);
  }

  SUBCASE("truncated last line is a parse error naming the line") {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os << header << "\n" << line1 << "\n" << line1.substr(0, line1.size() / 2) << "\n";
    os.close();
    CHECK_THROWS_WITH_AS(load_dataset(path), doctest::Contains("line 3"), DataError);
  }

  SUBCASE("wrong joint count in the header is a schema error") {
    std::string bad_header = header;
    const auto k = bad_header.find("\"Root\",");
    bad_header.erase(k, 7);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    os << bad_header << "\n" << line1 << "\n";
    os.close();
    CHECK_THROWS_AS(load_dataset(path), DataError);
  }

  SUBCASE("missing file is an i/o error") {
    CHECK_THROWS_AS(load_dataset(dir / "nope.jsonl"), IoError);
  }
}

TEST_CASE("coordinate formatting is canonical") {
  CHECK(format_coord(0.0) == "0");
  CHECK(format_coord(-0.0) == "0");
  CHECK(format_coord(1234.56789) == "1234.56789");
  CHECK_THROWS_AS(format_coord(std::numeric_limits<double>::quiet_NaN()), DataError);
  const std::string nine = format_coord(1.0 / 3.0);
  CHECK(nine == "0.333333333");
}

}  // TEST_SUITE
