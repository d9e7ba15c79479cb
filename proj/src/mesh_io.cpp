#include "shapeinst/mesh_io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string_view>

#include <json.hpp>

namespace shapeinst::io {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& source, std::size_t line,
                             const std::string& msg) {
  throw Error(ErrorKind::parse, source + ":" + std::to_string(line) + ": " + msg);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) out.push_back(s.substr(i, j - i));
    i = j;
  }
  return out;
}

bool to_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

bool to_int(std::string_view s, long& out) {
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::vector<std::string_view> lines_of(const std::string& text) {
  std::vector<std::string_view> out;
  std::string_view v(text);
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto nl = v.find('\n', start);
    if (nl == std::string_view::npos) {
      if (start < v.size()) out.push_back(v.substr(start));
      break;
    }
    out.push_back(v.substr(start, nl - start));
    start = nl + 1;
  }
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::io, "cannot write " + tmp.string());
    out << content;
    if (!out) throw Error(ErrorKind::io, "write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw Error(ErrorKind::io, "cannot rename onto " + path.string() + ": " + ec.message());
}

ObjMesh parse_obj(const std::string& text, const std::string& source) {
  std::vector<Eigen::Vector3d> verts;
  std::vector<Triangle> tris;
  const auto lines = lines_of(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto line = trim(lines[ln]);
    if (line.empty() || line.front() == '#') continue;
    const auto tok = split_ws(line);
    if (tok[0] == "v") {
      if (tok.size() != 4 && tok.size() != 7) {
        parse_fail(source, ln + 1, "vertex line needs 3 coordinates (optionally + rgb)");
      }
      Eigen::Vector3d p;
      for (int c = 0; c < 3; ++c) {
        if (!to_double(tok[c + 1], p[c])) parse_fail(source, ln + 1, "bad coordinate");
      }
      verts.push_back(p);
    } else if (tok[0] == "f") {
      if (tok.size() != 4) parse_fail(source, ln + 1, "only triangular faces are supported");
      Triangle t{};
      for (int c = 0; c < 3; ++c) {
        // Accept `i`, `i/t`, `i//n`; only the position index is used.
        auto field = tok[c + 1];
        field = field.substr(0, field.find('/'));
        long idx = 0;
        if (!to_int(field, idx) || idx < 1) parse_fail(source, ln + 1, "bad face index");
        t[c] = static_cast<int>(idx - 1);
      }
      tris.push_back(t);
    } else if (tok[0] == "vn" || tok[0] == "vt" || tok[0] == "o" || tok[0] == "g" ||
               tok[0] == "s" || tok[0] == "mtllib" || tok[0] == "usemtl") {
      continue;
    } else {
      parse_fail(source, ln + 1, "unsupported record '" + std::string(tok[0]) + "'");
    }
  }
  ObjMesh mesh;
  mesh.vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) {
    mesh.vertices.row(static_cast<Eigen::Index>(i)) = verts[i].transpose();
  }
  for (const auto& t : tris) {
    for (int idx : t) {
      if (idx >= static_cast<int>(verts.size())) {
        throw Error(ErrorKind::parse, source + ": face index " + std::to_string(idx + 1) +
                                          " exceeds vertex count " +
                                          std::to_string(verts.size()));
      }
    }
  }
  mesh.triangles = std::move(tris);
  return mesh;
}

ObjMesh read_obj(const fs::path& path) { return parse_obj(read_file(path), path.string()); }

void write_obj(const fs::path& path, const Frame3& vertices,
               const std::vector<Triangle>& triangles,
               const std::optional<Eigen::VectorXd>& scalars) {
  std::string out;
  out.reserve(static_cast<std::size_t>(vertices.rows()) * 48 + triangles.size() * 24);
  double lo = 0.0, hi = 0.0;
  if (scalars) {
    if (scalars->size() != vertices.rows()) {
      throw Error(ErrorKind::structural, "write_obj: one scalar per vertex required");
    }
    lo = scalars->minCoeff();
    hi = scalars->maxCoeff();
  }
  for (Eigen::Index i = 0; i < vertices.rows(); ++i) {
    out += "v ";
    out += format_double(vertices(i, 0));
    out += ' ';
    out += format_double(vertices(i, 1));
    out += ' ';
    out += format_double(vertices(i, 2));
    if (scalars) {
      const double s = hi > lo ? ((*scalars)(i) - lo) / (hi - lo) : 0.0;
      out += ' ';
      out += format_double(s);
      out += " 0 ";
      out += format_double(1.0 - s);
    }
    out += '\n';
  }
  for (const auto& t : triangles) {
    out += "f " + std::to_string(t[0] + 1) + ' ' + std::to_string(t[1] + 1) + ' ' +
           std::to_string(t[2] + 1) + '\n';
  }
  write_file_atomic(path, out);
}

Frame2 parse_contour_csv(const std::string& text, const std::string& source) {
  std::vector<Eigen::Vector2d> pts;
  const auto lines = lines_of(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const auto line = trim(lines[ln]);
    if (line.empty() || line.front() == '#') continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
      parse_fail(source, ln + 1, "expected exactly two comma-separated fields");
    }
    Eigen::Vector2d p;
    if (!to_double(line.substr(0, comma), p.x()) || !to_double(line.substr(comma + 1), p.y())) {
      if (pts.empty() && trim(line.substr(0, comma)) == "x") continue;  // header
      parse_fail(source, ln + 1, "non-numeric coordinate");
    }
    pts.push_back(p);
  }
  Frame2 out(static_cast<Eigen::Index>(pts.size()), 2);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) = pts[i].transpose();
  }
  return out;
}

Frame2 read_contour_csv(const fs::path& path) {
  return parse_contour_csv(read_file(path), path.string());
}

void write_contour_csv(const fs::path& path, const Frame2& contour) {
  std::string out = "x,y\n";
  for (Eigen::Index i = 0; i < contour.rows(); ++i) {
    out += format_double(contour(i, 0));
    out += ',';
    out += format_double(contour(i, 1));
    out += '\n';
  }
  write_file_atomic(path, out);
}

Manifest read_manifest(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, path.string() + ": " + e.what());
  }
  Manifest m;
  try {
    m.kind = j.at("kind").get<std::string>();
    m.frames = j.at("frames").get<std::vector<std::string>>();
    m.closed = j.value("closed", true);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, path.string() + ": " + e.what());
  }
  return m;
}

void write_manifest(const fs::path& path, const Manifest& m) {
  json j;
  j["version"] = 1;
  j["kind"] = m.kind;
  j["frames"] = m.frames;
  if (m.kind == "contour_sequence") j["closed"] = m.closed;
  write_file_atomic(path, j.dump(2) + "\n");
}

ShapeSequence3D read_mesh_sequence(const fs::path& manifest) {
  const auto m = read_manifest(manifest);
  if (m.kind != "mesh_sequence") {
    throw Error(ErrorKind::parse, manifest.string() + ": kind is '" + m.kind +
                                      "', expected 'mesh_sequence'");
  }
  const auto base = manifest.parent_path();
  std::vector<Frame3> frames;
  std::vector<Triangle> triangles;
  for (std::size_t t = 0; t < m.frames.size(); ++t) {
    auto mesh = read_obj(base / m.frames[t]);
    if (t == 0) {
      triangles = std::move(mesh.triangles);
    } else if (mesh.triangles != triangles) {
      throw Error(ErrorKind::structural,
                  "frame " + m.frames[t] + " does not share the connectivity of frame 0");
    }
    frames.push_back(std::move(mesh.vertices));
  }
  return ShapeSequence3D(std::move(frames), std::move(triangles));
}

ContourSequence2D read_contour_sequence(const fs::path& manifest) {
  const auto m = read_manifest(manifest);
  if (m.kind != "contour_sequence") {
    throw Error(ErrorKind::parse, manifest.string() + ": kind is '" + m.kind +
                                      "', expected 'contour_sequence'");
  }
  const auto base = manifest.parent_path();
  std::vector<Frame2> frames;
  for (const auto& f : m.frames) frames.push_back(read_contour_csv(base / f));
  return ContourSequence2D(std::move(frames), m.closed);
}

namespace {
std::string frame_name(std::size_t t, const char* ext) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%03zu.%s", t, ext);
  return buf;
}
}  // namespace

void write_mesh_sequence(const fs::path& dir, const ShapeSequence3D& seq) {
  Manifest m{"mesh_sequence", {}, true};
  for (std::size_t t = 0; t < seq.num_frames(); ++t) {
    m.frames.push_back(frame_name(t, "obj"));
    write_obj(dir / m.frames.back(), seq.frame(t), seq.triangles());
  }
  write_manifest(dir / "manifest.json", m);
}

void write_contour_sequence(const fs::path& dir, const ContourSequence2D& seq) {
  Manifest m{"contour_sequence", {}, seq.closed()};
  for (std::size_t t = 0; t < seq.num_frames(); ++t) {
    m.frames.push_back(frame_name(t, "csv"));
    write_contour_csv(dir / m.frames.back(), seq.frame(t));
  }
  write_manifest(dir / "manifest.json", m);
}

}  // namespace shapeinst::io
