#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pointbake/errors.hpp"
#include "pointbake/io.hpp"

static_assert(std::endian::native == std::endian::little, "PLY binary path assumes little endian");

namespace pointbake::io {
namespace {

enum class ScalarType { Int8, UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };

std::optional<ScalarType> parse_type(const std::string& s) {
  if (s == "char" || s == "int8") return ScalarType::Int8;
  if (s == "uchar" || s == "uint8") return ScalarType::UInt8;
  if (s == "short" || s == "int16") return ScalarType::Int16;
  if (s == "ushort" || s == "uint16") return ScalarType::UInt16;
  if (s == "int" || s == "int32") return ScalarType::Int32;
  if (s == "uint" || s == "uint32") return ScalarType::UInt32;
  if (s == "float" || s == "float32") return ScalarType::Float32;
  if (s == "double" || s == "float64") return ScalarType::Float64;
  return std::nullopt;
}

std::size_t size_of(ScalarType t) {
  switch (t) {
    case ScalarType::Int8:
    case ScalarType::UInt8: return 1;
    case ScalarType::Int16:
    case ScalarType::UInt16: return 2;
    case ScalarType::Int32:
    case ScalarType::UInt32:
    case ScalarType::Float32: return 4;
    case ScalarType::Float64: return 8;
  }
  return 0;
}

double load_scalar(const unsigned char* p, ScalarType t) {
  auto as = [p]<typename T>(T) {
    T v;
    std::memcpy(&v, p, sizeof(T));
    return static_cast<double>(v);
  };
  switch (t) {
    case ScalarType::Int8: return as(std::int8_t{});
    case ScalarType::UInt8: return as(std::uint8_t{});
    case ScalarType::Int16: return as(std::int16_t{});
    case ScalarType::UInt16: return as(std::uint16_t{});
    case ScalarType::Int32: return as(std::int32_t{});
    case ScalarType::UInt32: return as(std::uint32_t{});
    case ScalarType::Float32: return as(float{});
    case ScalarType::Float64: return as(double{});
  }
  return 0.0;
}

struct Property {
  std::string name;
  ScalarType type = ScalarType::Float32;
  bool is_list = false;
  std::size_t offset = 0;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;

  bool fixed_size() const {
    for (const auto& p : properties)
      if (p.is_list) return false;
    return true;
  }
  std::size_t record_size() const {
    std::size_t s = 0;
    for (const auto& p : properties) s += size_of(p.type);
    return s;
  }
  const Property* find(const std::string& n) const {
    for (const auto& p : properties)
      if (p.name == n) return &p;
    return nullptr;
  }
};

struct Header {
  bool binary = false;
  std::vector<Element> elements;
};

Header parse_header(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0)
    throw UnsupportedFormat("not a PLY file (missing 'ply' magic)");
  Header h;
  bool have_format = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string kw;
    ls >> kw;
    if (kw == "format") {
      std::string fmt;
      ls >> fmt;
      if (fmt == "ascii") h.binary = false;
      else if (fmt == "binary_little_endian") h.binary = true;
      else throw UnsupportedFormat("PLY format '" + fmt + "' is not supported");
      have_format = true;
    } else if (kw == "element") {
      Element e;
      ls >> e.name >> e.count;
      h.elements.push_back(std::move(e));
    } else if (kw == "property") {
      if (h.elements.empty()) throw UnsupportedFormat("PLY property before any element");
      std::string type;
      ls >> type;
      Property p;
      if (type == "list") {
        std::string count_type, item_type;
        ls >> count_type >> item_type >> p.name;
        p.is_list = true;
      } else {
        auto t = parse_type(type);
        if (!t) throw UnsupportedFormat("PLY property type '" + type + "'");
        p.type = *t;
        ls >> p.name;
      }
      h.elements.back().properties.push_back(std::move(p));
    } else if (kw == "end_header") {
      if (!have_format) throw UnsupportedFormat("PLY header without format line");
      for (auto& e : h.elements) {
        std::size_t off = 0;
        for (auto& p : e.properties) {
          p.offset = off;
          off += size_of(p.type);
        }
      }
      return h;
    }
    // comment / obj_info and unknown keywords are ignored
  }
  throw TruncatedFile("PLY header not terminated by end_header");
}

struct VertexLayout {
  std::array<const Property*, 9> props{};  // x y z nx ny nz red green blue
};

VertexLayout resolve_layout(const Element& e) {
  static const std::array<const char*, 9> names = {"x",  "y",  "z",   "nx",   "ny",
                                                   "nz", "red", "green", "blue"};
  VertexLayout layout;
  for (std::size_t k = 0; k < names.size(); ++k) {
    const Property* p = e.find(names[k]);
    if (!p || p->is_list) throw SchemaError(names[k]);
    const bool real = p->type == ScalarType::Float32 || p->type == ScalarType::Float64;
    if (k < 6 && !real)
      throw UnsupportedFormat(std::string("property '") + names[k] + "' must be float32/float64");
    if (k >= 6 && p->type != ScalarType::UInt8)
      throw UnsupportedFormat(std::string("property '") + names[k] + "' must be uint8");
    layout.props[k] = p;
  }
  return layout;
}

// Returns false when the normal is zero and the point must be dropped.
bool finish_point(const std::array<double, 9>& v, SurfacePoint& out) {
  out.position = Vec3(v[0], v[1], v[2]);
  const Vec3 n(v[3], v[4], v[5]);
  const double len = n.norm();
  if (!(len > 0.0)) return false;
  out.normal = n / len;
  for (int k = 0; k < 3; ++k) out.color[k] = static_cast<std::uint8_t>(std::clamp(v[6 + k], 0.0, 255.0));
  return true;
}

void skip_ascii_lines(std::istream& in, std::size_t n) {
  std::string line;
  for (std::size_t i = 0; i < n; ++i)
    if (!std::getline(in, line)) throw TruncatedFile("PLY ascii element body ended early");
}

}  // namespace

PointCloud read_pointcloud(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  const Header h = parse_header(in);

  std::size_t vertex_element = h.elements.size();
  for (std::size_t i = 0; i < h.elements.size(); ++i)
    if (h.elements[i].name == "vertex") {
      vertex_element = i;
      break;
    }
  if (vertex_element == h.elements.size()) throw SchemaError("vertex");
  const Element& ve = h.elements[vertex_element];
  const VertexLayout layout = resolve_layout(ve);

  for (std::size_t i = 0; i < vertex_element; ++i) {
    const Element& e = h.elements[i];
    if (!h.binary) {
      skip_ascii_lines(in, e.count);
    } else {
      if (!e.fixed_size())
        throw UnsupportedFormat("list-valued element '" + e.name + "' precedes vertex");
      in.seekg(static_cast<std::streamoff>(e.count * e.record_size()), std::ios::cur);
    }
  }

  PointCloud cloud;
  cloud.points.reserve(ve.count);
  SurfacePoint sp;
  std::array<double, 9> vals{};

  if (h.binary) {
    if (!ve.fixed_size()) throw UnsupportedFormat("vertex element with list property");
    const std::size_t rec = ve.record_size();
    constexpr std::size_t kChunk = 1 << 14;
    std::vector<unsigned char> buf(rec * kChunk);
    std::size_t remaining = ve.count;
    while (remaining > 0) {
      const std::size_t n = std::min(remaining, kChunk);
      in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * rec));
      if (static_cast<std::size_t>(in.gcount()) != n * rec)
        throw TruncatedFile("PLY declares " + std::to_string(ve.count) +
                            " vertices but the payload ends early");
      for (std::size_t r = 0; r < n; ++r) {
        const unsigned char* base = buf.data() + r * rec;
        for (std::size_t k = 0; k < 9; ++k)
          vals[k] = load_scalar(base + layout.props[k]->offset, layout.props[k]->type);
        if (finish_point(vals, sp)) cloud.points.push_back(sp);
        else ++cloud.dropped_zero_normals;
      }
      remaining -= n;
    }
  } else {
    std::vector<std::size_t> slot(ve.properties.size(), 9);
    for (std::size_t k = 0; k < 9; ++k)
      slot[static_cast<std::size_t>(layout.props[k] - ve.properties.data())] = k;
    std::string line;
    for (std::size_t i = 0; i < ve.count; ++i) {
      if (!std::getline(in, line)) throw TruncatedFile("PLY ascii vertex list ended early");
      std::istringstream ls(line);
      for (std::size_t j = 0; j < ve.properties.size(); ++j) {
        if (ve.properties[j].is_list) throw UnsupportedFormat("vertex element with list property");
        double v;
        if (!(ls >> v)) throw TruncatedFile("PLY ascii vertex line " + std::to_string(i));
        if (ve.properties[j].type == ScalarType::Float32) v = to_float32(v);
        if (slot[j] < 9) vals[slot[j]] = v;
      }
      if (finish_point(vals, sp)) cloud.points.push_back(sp);
      else ++cloud.dropped_zero_normals;
    }
  }
  cloud.recompute_bounds();
  return cloud;
}

void write_pointcloud(const PointCloud& cloud, const std::filesystem::path& path,
                      PlyEncoding encoding) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  const bool binary = encoding == PlyEncoding::BinaryLittleEndian;
  out << "ply\nformat " << (binary ? "binary_little_endian" : "ascii") << " 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property float nx\nproperty float ny\nproperty float nz\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "end_header\n";
  if (binary) {
    std::vector<unsigned char> buf;
    buf.reserve(cloud.size() * 27);
    auto put = [&buf](float f) {
      unsigned char b[4];
      std::memcpy(b, &f, 4);
      buf.insert(buf.end(), b, b + 4);
    };
    for (const auto& p : cloud.points) {
      for (int k = 0; k < 3; ++k) put(static_cast<float>(p.position[k]));
      for (int k = 0; k < 3; ++k) put(static_cast<float>(p.normal[k]));
      buf.insert(buf.end(), p.color.begin(), p.color.end());
    }
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  } else {
    char line[256];
    for (const auto& p : cloud.points) {
      std::snprintf(line, sizeof line, "%.9g %.9g %.9g %.9g %.9g %.9g %d %d %d\n",
                    static_cast<float>(p.position.x()), static_cast<float>(p.position.y()),
                    static_cast<float>(p.position.z()), static_cast<float>(p.normal.x()),
                    static_cast<float>(p.normal.y()), static_cast<float>(p.normal.z()),
                    p.color[0], p.color[1], p.color[2]);
      out << line;
    }
  }
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace pointbake::io
