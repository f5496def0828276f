#include "depthlift/dataset_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <tuple>
#include <json.hpp>
#include <sstream>

namespace depthlift {

using nlohmann::json;

std::string format_coord(double v) {
  if (!std::isfinite(v)) throw DataError("non-finite coordinate in dataset");
  if (v == 0.0) return "0";  // canonicalizes -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

namespace {

json skeleton_to_json(const SkeletonModel& m) {
  json bones = json::array();
  for (const auto& b : m.bones) {
    bones.push_back(json{{"parent", static_cast<int>(b.parent)},
                         {"child", static_cast<int>(b.child)},
                         {"length_mm", b.length_mm},
                         {"min_angle", b.min_angle},
                         {"max_angle", b.max_angle},
                         {"rest_dir", {b.rest_dir.x(), b.rest_dir.y(), b.rest_dir.z()}}});
  }
  return json{{"bones", bones}};
}

SkeletonModel skeleton_from_json(const json& j) {
  SkeletonModel m;
  for (const auto& jb : j.at("bones")) {
    Bone b;
    b.parent = static_cast<JointId>(jb.at("parent").get<int>());
    b.child = static_cast<JointId>(jb.at("child").get<int>());
    b.length_mm = jb.at("length_mm").get<double>();
    b.min_angle = jb.at("min_angle").get<double>();
    b.max_angle = jb.at("max_angle").get<double>();
    const auto& rd = jb.at("rest_dir");
    b.rest_dir = Eigen::Vector3d(rd.at(0).get<double>(), rd.at(1).get<double>(),
                                 rd.at(2).get<double>());
    m.bones.push_back(b);
  }
  m.validate();
  return m;
}

void append_frame_line(std::string& out, const FrameRecord& f) {
  out += "{\"subject\":" + std::to_string(f.subject_id);
  out += ",\"action\":" + std::to_string(f.action_id);
  out += ",\"camera\":" + std::to_string(f.camera_id);
  out += ",\"frame\":" + std::to_string(f.frame_index);
  out += ",\"pose\":[";
  for (int j = 0; j < kNumJoints; ++j) {
    const auto& p = f.pose_world.joints[j];
    if (j) out += ',';
    out += '[';
    out += format_coord(p.x());
    out += ',';
    out += format_coord(p.y());
    out += ',';
    out += format_coord(p.z());
    out += ']';
  }
  out += ']';
  if (f.pixels) {
    out += ",\"uv\":[";
    for (int j = 0; j < kNumJoints; ++j) {
      if (j) out += ',';
      out += '[';
      out += format_coord((*f.pixels)[j].x());
      out += ',';
      out += format_coord((*f.pixels)[j].y());
      out += ']';
    }
    out += ']';
  }
  if (f.depths) {
    out += ",\"depth\":[";
    for (int j = 0; j < kNumJoints; ++j) {
      if (j) out += ',';
      out += format_coord((*f.depths)[j]);
    }
    out += ']';
  }
  out += "}\n";
}

[[noreturn]] void fail_line(std::size_t line_no, const std::string& what) {
  throw DataError("dataset parse error at line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
  if (d.frames.empty()) throw DataError("refusing to save an empty dataset");

  json header{{"schema", std::string(kDatasetSchema)},
              {"provenance", d.provenance},
              {"skeleton", skeleton_to_json(d.skeleton)}};
  json names = json::array();
  for (const auto& n : joint_names()) names.push_back(std::string(n));
  header["joints"] = names;

  std::string body = header.dump();
  body += '\n';
  for (const auto& f : d.frames) append_frame_line(body, f);

  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open for writing: " + tmp);
    os << body;
    if (!os) throw IoError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

Dataset load_dataset(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open dataset file: " + path.string());

  Dataset d;
  std::string line;
  std::size_t line_no = 0;

  // Header line.
  if (!std::getline(is, line)) throw DataError("dataset file is empty: " + path.string());
  ++line_no;
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    fail_line(line_no, e.what());
  }
  try {
    if (header.at("schema").get<std::string>() != kDatasetSchema) {
      throw DataError("unknown dataset schema tag");
    }
    const auto& names = header.at("joints");
    if (names.size() != kNumJoints) {
      throw DataError("dataset schema error: header lists " + std::to_string(names.size()) +
                      " joints, expected 17");
    }
    for (int j = 0; j < kNumJoints; ++j) {
      if (names.at(j).get<std::string>() != joint_names()[j]) {
        throw DataError("dataset schema error: joint order mismatch at index " +
                        std::to_string(j));
      }
    }
    d.provenance = header.value("provenance", std::string());
    if (header.contains("skeleton")) d.skeleton = skeleton_from_json(header["skeleton"]);
  } catch (const json::exception& e) {
    fail_line(line_no, e.what());
  }

  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      fail_line(line_no, e.what());
    }
    FrameRecord f;
    try {
      f.subject_id = rec.at("subject").get<int>();
      f.action_id = rec.at("action").get<int>();
      f.camera_id = rec.at("camera").get<int>();
      f.frame_index = rec.at("frame").get<long>();
      const auto& pose = rec.at("pose");
      if (pose.size() != kNumJoints) {
        fail_line(line_no, "pose has " + std::to_string(pose.size()) + " joints, expected 17");
      }
      f.pose_world.frame = FrameKind::world;
      for (int j = 0; j < kNumJoints; ++j) {
        const auto& p = pose.at(j);
        if (p.size() != 3) fail_line(line_no, "pose entries must be [x,y,z]");
        f.pose_world.joints[j] =
            Eigen::Vector3d(p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>());
      }
      if (rec.contains("uv")) {
        const auto& uv = rec["uv"];
        if (uv.size() != kNumJoints) fail_line(line_no, "uv must list 17 joints");
        std::array<Eigen::Vector2d, kNumJoints> px;
        for (int j = 0; j < kNumJoints; ++j) {
          px[j] = Eigen::Vector2d(uv.at(j).at(0).get<double>(), uv.at(j).at(1).get<double>());
        }
        f.pixels = px;
      }
      if (rec.contains("depth")) {
        const auto& dep = rec["depth"];
        if (dep.size() != kNumJoints) fail_line(line_no, "depth must list 17 values");
        std::array<double, kNumJoints> ds;
        for (int j = 0; j < kNumJoints; ++j) ds[j] = dep.at(j).get<double>();
        f.depths = ds;
      }
      if (f.action_id < 1 || f.action_id > kNumActions) fail_line(line_no, "action out of range");
      if (f.camera_id < 1 || f.camera_id > kNumCameras) fail_line(line_no, "camera out of range");
      if (f.frame_index < 0) fail_line(line_no, "negative frame index");
    } catch (const json::exception& e) {
      fail_line(line_no, e.what());
    }
    d.frames.push_back(std::move(f));
  }
  if (d.frames.empty()) throw DataError("dataset has no frame records: " + path.string());

  std::set<std::tuple<int, int, int, long>> keys;
  for (const auto& f : d.frames) {
    if (!keys.emplace(f.subject_id, f.action_id, f.camera_id, f.frame_index).second) {
      throw DataError("dataset has duplicate (subject, action, camera, frame) records");
    }
  }
  return d;
}

}  // namespace depthlift
