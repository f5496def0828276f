#pragma once

#include <filesystem>

#include "depthlift/skeleton.hpp"

namespace depthlift {

inline constexpr std::string_view kDatasetSchema = "depthlift-pose-v1";

// JSON-lines dataset file. First line is a header object with the schema
// tag, the 17 joint names in canonical order, the skeleton and free-text
// provenance; every following line is one frame record:
//   {"subject":s,"action":a,"camera":c,"frame":i,"pose":[[x,y,z] x17],
//    "uv":[[r,s] x17],"depth":[d x17]}
// "uv" and "depth" are optional per record. Coordinates are written as
// decimal with 9 significant digits; save(load(f)) reproduces f byte for
// byte for files produced by save.
void save_dataset(const Dataset& d, const std::filesystem::path& path);
Dataset load_dataset(const std::filesystem::path& path);

// Canonical decimal form used for dataset coordinates.
std::string format_coord(double v);

}  // namespace depthlift
