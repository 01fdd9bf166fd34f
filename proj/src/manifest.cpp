#include "pointbake/manifest.hpp"

#include <fstream>

#include <json.hpp>

#include "pointbake/errors.hpp"

namespace pointbake {
namespace {

using nlohmann::json;

// Full-size scans the synthetic scenes stand in for.
constexpr double kFullScalePoints = 3.0e7;
constexpr double kFullScaleFaces = 3.0e5;

const json& field(const json& j, const char* name, const std::string& where) {
  if (!j.is_object() || !j.contains(name)) throw ManifestError("missing field '" + where + name + "'");
  return j.at(name);
}

template <class T>
T get(const json& j, const char* name, const std::string& where) {
  try {
    return field(j, name, where).get<T>();
  } catch (const json::exception&) {
    throw ManifestError("field '" + where + name + "' has the wrong type");
  }
}

Vec3 get_vec3(const json& j, const char* name, const std::string& where) {
  const auto v = get<std::vector<double>>(j, name, where);
  if (v.size() != 3) throw ManifestError("field '" + where + name + "' must have 3 numbers");
  return Vec3(v[0], v[1], v[2]);
}

json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path q(p);
  return q.is_absolute() ? q : base / q;
}

std::string relative_to(const std::filesystem::path& base, const std::filesystem::path& p) {
  const auto rel = p.lexically_relative(base);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return p.generic_string();
}

}  // namespace

SceneManifest read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ManifestError(std::string("manifest is not valid JSON: ") + e.what());
  }
  const auto base = path.parent_path();
  SceneManifest m;
  m.cloud = resolve(base, get<std::string>(j, "cloud", ""));
  m.low_mesh = resolve(base, get<std::string>(j, "low_mesh", ""));
  if (j.contains("high_mesh") && !j.at("high_mesh").is_null())
    m.high_mesh = resolve(base, get<std::string>(j, "high_mesh", ""));
  m.reference = get<std::string>(j, "reference", "");
  if (m.reference != "analytic" && m.reference != "dense-render")
    throw ManifestError("field 'reference' must be \"analytic\" or \"dense-render\"");

  const json& cams = field(j, "cameras", "");
  if (!cams.is_array() || cams.empty())
    throw ManifestError("field 'cameras' must list at least one camera");
  for (std::size_t i = 0; i < cams.size(); ++i) {
    const std::string where = "cameras[" + std::to_string(i) + "].";
    const json& c = cams[i];
    Camera cam;
    cam.position = get_vec3(c, "position", where);
    cam.look_at = get_vec3(c, "look_at", where);
    cam.up = get_vec3(c, "up", where);
    cam.vertical_fov_deg = get<double>(c, "vertical_fov", where);
    cam.width = get<int>(c, "width", where);
    cam.height = get<int>(c, "height", where);
    cam.near_plane = get<double>(c, "near", where);
    cam.far_plane = get<double>(c, "far", where);
    m.cameras.push_back(cam);
  }

  const json& cfg = field(j, "cfg", "");
  m.cfg.d_max = get<double>(cfg, "d_max", "cfg.");
  m.cfg.angle_max_deg = get<double>(cfg, "angle_max_deg", "cfg.");
  m.cfg.resolution = get<int>(cfg, "resolution", "cfg.");
  m.cfg.gutter = get<int>(cfg, "gutter", "cfg.");
  m.cfg.bake_normals = get<bool>(cfg, "bake_normals", "cfg.");
  m.cfg.vertex_attr_k = get<int>(cfg, "vertex_attr_k", "cfg.");
  if (cfg.contains("grid_cell_size")) m.cfg.grid_cell_size = get<double>(cfg, "grid_cell_size", "cfg.");

  m.light_dir = get_vec3(j, "light_dir", "");
  if (j.contains("scene") && !j.at("scene").is_null()) {
    const json& s = j.at("scene");
    SceneInfo info;
    try {
      info.kind = parse_scene_kind(get<std::string>(s, "kind", "scene."));
    } catch (const ConfigError& e) {
      throw ManifestError(std::string("field 'scene.kind': ") + e.what());
    }
    info.points = get<std::size_t>(s, "points", "scene.");
    info.noise = get<double>(s, "noise", "scene.");
    info.seed = get<std::uint64_t>(s, "seed", "scene.");
    if (s.contains("mean_spacing")) info.mean_spacing = get<double>(s, "mean_spacing", "scene.");
    m.scene = info;
  }
  if (j.contains("scaling") && j.at("scaling").is_object())
    for (const auto& [k, v] : j.at("scaling").items())
      if (v.is_number()) m.scaling[k] = v.get<double>();
  return m;
}

void write_manifest(const SceneManifest& m, const std::filesystem::path& path) {
  const auto base = path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path();
  json j;
  j["cloud"] = relative_to(base, m.cloud);
  j["low_mesh"] = relative_to(base, m.low_mesh);
  j["high_mesh"] = m.high_mesh ? json(relative_to(base, *m.high_mesh)) : json(nullptr);
  j["reference"] = m.reference;
  j["cameras"] = json::array();
  for (const auto& c : m.cameras)
    j["cameras"].push_back({{"position", vec3_json(c.position)},
                            {"look_at", vec3_json(c.look_at)},
                            {"up", vec3_json(c.up)},
                            {"vertical_fov", c.vertical_fov_deg},
                            {"width", c.width},
                            {"height", c.height},
                            {"near", c.near_plane},
                            {"far", c.far_plane}});
  j["cfg"] = {{"d_max", m.cfg.d_max},
              {"angle_max_deg", m.cfg.angle_max_deg},
              {"resolution", m.cfg.resolution},
              {"gutter", m.cfg.gutter},
              {"bake_normals", m.cfg.bake_normals},
              {"vertex_attr_k", m.cfg.vertex_attr_k},
              {"grid_cell_size", m.cfg.grid_cell_size}};
  j["light_dir"] = vec3_json(m.light_dir);
  if (m.scene)
    j["scene"] = {{"kind", std::string(scene_kind_name(m.scene->kind))},
                  {"points", m.scene->points},
                  {"noise", m.scene->noise},
                  {"seed", m.scene->seed},
                  {"mean_spacing", m.scene->mean_spacing}};
  j["scaling"] = json::object();
  for (const auto& [k, v] : m.scaling) j["scaling"][k] = v;
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing manifest " + path.string());
}

SceneManifest manifest_for(const SyntheticScene& scene, const SceneInfo& info,
                           const std::filesystem::path& dir) {
  SceneManifest m;
  m.cloud = dir / "cloud.ply";
  m.low_mesh = dir / "low.obj";
  m.high_mesh = dir / "high.obj";
  m.cameras = scene.cameras;
  m.reference = "analytic";
  m.cfg = scene.cfg;
  m.light_dir = scene.light_dir;
  m.scene = info;
  m.scaling = {{"full_scale_points", kFullScalePoints},
               {"full_scale_faces", kFullScaleFaces},
               {"point_factor", double(scene.cloud.size()) / kFullScalePoints},
               {"face_factor", double(scene.low.faces.size()) / kFullScaleFaces},
               {"high_to_low_faces", double(scene.high.faces.size()) / double(scene.low.faces.size())}};
  return m;
}

}  // namespace pointbake
