#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "pointbake/errors.hpp"
#include "pointbake/io.hpp"

namespace pointbake::io {
namespace {

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

double to_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw UnsupportedFormat("malformed number '" + std::string(s) + "' at line " +
                            std::to_string(line));
  return v;
}

// Coordinates are stored at float32 precision, which 9 significant digits reproduce exactly.
double to_coord(std::string_view s, std::size_t line) {
  return to_float32(to_double(s, line));
}

// Resolves a 1-based (or negative, relative) OBJ index into a 0-based one.
std::uint32_t resolve_index(std::string_view s, std::size_t count, std::size_t line) {
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw UnsupportedFormat("malformed index '" + std::string(s) + "' at line " +
                            std::to_string(line));
  const long resolved = v < 0 ? static_cast<long>(count) + v : v - 1;
  if (v == 0 || resolved < 0 || resolved >= static_cast<long>(count))
    throw IndexError("index " + std::to_string(v) + " out of range (" + std::to_string(count) +
                     " available) at line " + std::to_string(line));
  return static_cast<std::uint32_t>(resolved);
}

}  // namespace

TriangleMesh read_mesh(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");

  TriangleMesh mesh;
  std::vector<Vec3> vn;
  std::vector<std::array<double, 3>> vcolor;
  bool any_color = false;
  bool all_uv = true, all_vn = true;
  std::vector<Face> face_vn;

  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto tok = split_ws(line);
    if (tok.empty() || tok[0].front() == '#') continue;
    const auto& kw = tok[0];
    if (kw == "v") {
      if (tok.size() != 4 && tok.size() != 7)
        throw UnsupportedFormat("'v' needs 3 or 6 values at line " + std::to_string(lineno));
      mesh.vertices.emplace_back(to_coord(tok[1], lineno), to_coord(tok[2], lineno),
                                 to_coord(tok[3], lineno));
      if (tok.size() == 7) {
        any_color = true;
        vcolor.push_back({to_double(tok[4], lineno), to_double(tok[5], lineno),
                          to_double(tok[6], lineno)});
      } else {
        vcolor.push_back({-1.0, -1.0, -1.0});
      }
    } else if (kw == "vn") {
      if (tok.size() < 4) throw UnsupportedFormat("'vn' needs 3 values at line " + std::to_string(lineno));
      vn.emplace_back(to_coord(tok[1], lineno), to_coord(tok[2], lineno),
                      to_coord(tok[3], lineno));
    } else if (kw == "vt") {
      if (tok.size() < 3) throw UnsupportedFormat("'vt' needs 2 values at line " + std::to_string(lineno));
      mesh.uvs.emplace_back(to_coord(tok[1], lineno), to_coord(tok[2], lineno));
    } else if (kw == "f") {
      if (tok.size() != 4) throw NonTriangleFace(lineno, tok.size() - 1);
      Face fv{}, ft{}, fn{};
      bool has_t = true, has_n = true;
      for (int k = 0; k < 3; ++k) {
        const std::string_view corner = tok[k + 1];
        const auto s1 = corner.find('/');
        fv[k] = resolve_index(corner.substr(0, s1), mesh.vertices.size(), lineno);
        std::string_view t, n;
        if (s1 != std::string_view::npos) {
          const auto rest = corner.substr(s1 + 1);
          const auto s2 = rest.find('/');
          t = rest.substr(0, s2);
          if (s2 != std::string_view::npos) n = rest.substr(s2 + 1);
        }
        if (t.empty()) has_t = false;
        else ft[k] = resolve_index(t, mesh.uvs.size(), lineno);
        if (n.empty()) has_n = false;
        else fn[k] = resolve_index(n, vn.size(), lineno);
      }
      if (fv[0] == fv[1] || fv[1] == fv[2] || fv[0] == fv[2])
        throw IndexError("face repeats a vertex at line " + std::to_string(lineno));
      mesh.faces.push_back(fv);
      all_uv = all_uv && has_t;
      all_vn = all_vn && has_n;
      mesh.face_uvs.push_back(ft);
      face_vn.push_back(fn);
    }
    // o, g, s, usemtl, mtllib and other statements are not needed here
  }
  if (mesh.faces.empty()) throw ConfigError("OBJ '" + path.string() + "' has no faces");

  if (!all_uv || mesh.uvs.empty()) {
    mesh.uvs.clear();
    mesh.face_uvs.clear();
  }
  if (any_color) {
    mesh.colors.resize(mesh.vertices.size());
    for (std::size_t i = 0; i < vcolor.size(); ++i)
      for (int k = 0; k < 3; ++k)
        mesh.colors[i][k] = static_cast<std::uint8_t>(
            std::clamp(std::lround(std::max(vcolor[i][k], 0.0) * 255.0), 0L, 255L));
  }
  if (all_vn && !vn.empty()) {
    // v and vn indices may differ; accumulate per vertex and renormalize.
    std::vector<Vec3> acc(mesh.vertices.size(), Vec3::Zero());
    std::vector<char> seen(mesh.vertices.size(), 0);
    for (std::size_t f = 0; f < mesh.faces.size(); ++f)
      for (int k = 0; k < 3; ++k) {
        const auto v = mesh.faces[f][k];
        if (!seen[v]) {
          acc[v] = vn[face_vn[f][k]];
          seen[v] = 1;
        } else if (!acc[v].isApprox(vn[face_vn[f][k]])) {
          acc[v] += vn[face_vn[f][k]];
        }
      }
    bool complete = true;
    for (std::size_t v = 0; v < acc.size(); ++v) {
      const double len = acc[v].norm();
      if (!(len > 0.0)) {
        complete = false;
        break;
      }
      acc[v] /= len;
    }
    if (complete) mesh.normals = std::move(acc);
  }
  mesh.validate();
  return mesh;
}

void write_mesh(const TriangleMesh& mesh, const std::filesystem::path& path) {
  mesh.validate();
  std::FILE* fp = std::fopen(path.string().c_str(), "w");
  if (!fp) throw IoError("cannot write '" + path.string() + "'");
  std::fprintf(fp, "# %zu vertices, %zu faces\n", mesh.vertices.size(), mesh.faces.size());
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    const Vec3& v = mesh.vertices[i];
    if (mesh.has_colors()) {
      const Rgb8& c = mesh.colors[i];
      std::fprintf(fp, "v %.9g %.9g %.9g %.9g %.9g %.9g\n", v.x(), v.y(), v.z(), c[0] / 255.0,
                   c[1] / 255.0, c[2] / 255.0);
    } else {
      std::fprintf(fp, "v %.9g %.9g %.9g\n", v.x(), v.y(), v.z());
    }
  }
  for (const Vec2& t : mesh.uvs) std::fprintf(fp, "vt %.9g %.9g\n", t.x(), t.y());
  for (const Vec3& n : mesh.normals) std::fprintf(fp, "vn %.9g %.9g %.9g\n", n.x(), n.y(), n.z());
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    std::fputc('f', fp);
    for (int k = 0; k < 3; ++k) {
      const unsigned v = mesh.faces[f][k] + 1;
      if (mesh.has_uvs() && mesh.has_normals())
        std::fprintf(fp, " %u/%u/%u", v, mesh.face_uvs[f][k] + 1, v);
      else if (mesh.has_uvs())
        std::fprintf(fp, " %u/%u", v, mesh.face_uvs[f][k] + 1);
      else if (mesh.has_normals())
        std::fprintf(fp, " %u//%u", v, v);
      else
        std::fprintf(fp, " %u", v);
    }
    std::fputc('\n', fp);
  }
  const bool ok = std::ferror(fp) == 0;
  std::fclose(fp);
  if (!ok) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace pointbake::io
