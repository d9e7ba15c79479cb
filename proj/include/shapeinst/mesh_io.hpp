#pragma once

// File formats:
//   OBJ subset   `v x y z [r g b]` and `f i j k` (1-based, triangles only);
//                `#` comments and blank lines are skipped.
//   Contour CSV  one `x,y` row per vertex; an optional `x,y` header line.
//   Manifest     JSON {"version":1,"kind":"mesh_sequence"|"contour_sequence",
//                "frames":[relative paths...],"closed":bool}.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "shapeinst/ssm.hpp"

namespace shapeinst::io {

struct ObjMesh {
  Frame3 vertices;
  std::vector<Triangle> triangles;
};

ObjMesh read_obj(const std::filesystem::path& path);
ObjMesh parse_obj(const std::string& text, const std::string& source = "<string>");

/// Writes vertices and faces. With `scalars`, each vertex also carries a
/// colour from a blue-to-red ramp of the normalized scalar.
void write_obj(const std::filesystem::path& path, const Frame3& vertices,
               const std::vector<Triangle>& triangles,
               const std::optional<Eigen::VectorXd>& scalars = std::nullopt);

Frame2 read_contour_csv(const std::filesystem::path& path);
Frame2 parse_contour_csv(const std::string& text, const std::string& source = "<string>");
void write_contour_csv(const std::filesystem::path& path, const Frame2& contour);

struct Manifest {
  std::string kind;
  std::vector<std::string> frames;
  bool closed = true;
};

Manifest read_manifest(const std::filesystem::path& path);
void write_manifest(const std::filesystem::path& path, const Manifest& m);

/// Frames are resolved relative to the manifest's directory.
ShapeSequence3D read_mesh_sequence(const std::filesystem::path& manifest);
ContourSequence2D read_contour_sequence(const std::filesystem::path& manifest);

/// Writes frame_000.obj ... plus manifest.json into `dir`.
void write_mesh_sequence(const std::filesystem::path& dir, const ShapeSequence3D& seq);
void write_contour_sequence(const std::filesystem::path& dir, const ContourSequence2D& seq);

/// Writes to a sibling temporary and renames over the target.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

}  // namespace shapeinst::io
