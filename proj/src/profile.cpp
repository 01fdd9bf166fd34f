#include "pointbake/profile.hpp"

#include <sys/resource.h>
#include <sys/wait.h>
#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "pointbake/baselines.hpp"
#include "pointbake/errors.hpp"
#include "pointbake/io.hpp"
#include "pointbake/metrics.hpp"
#include "pointbake/uv_atlas.hpp"

namespace pointbake {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t current_rss_bytes() {
  std::FILE* f = std::fopen("/proc/self/statm", "r");
  if (!f) return 0;
  unsigned long long size = 0, resident = 0;
  const int n = std::fscanf(f, "%llu %llu", &size, &resident);
  std::fclose(f);
  if (n != 2) return 0;
  return resident * static_cast<std::uint64_t>(sysconf(_SC_PAGESIZE));
}

const StageRow& ProfileReport::row(const std::string& method, const std::string& stage) const {
  for (const auto& r : rows)
    if (r.method == method && r.stage == stage) return r;
  throw ConfigError("no profile row for " + method + "/" + stage);
}

double ProfileReport::mean_psnr(const std::string& method) const {
  double sum = 0.0;
  int n = 0;
  for (const auto& f : frames)
    if (f.method == method) {
      sum += f.psnr;
      ++n;
    }
  return n ? sum / n : 0.0;
}

namespace {

using Clock = std::chrono::steady_clock;

class RssSampler {
 public:
  explicit RssSampler(double hz)
      : period_(std::chrono::duration<double>(1.0 / hz)), thread_([this] { run(); }) {}
  ~RssSampler() {
    stop_ = true;
    thread_.join();
  }
  void begin_stage() { stage_peak_ = sample(); }
  std::uint64_t end_stage() {
    sample();
    return stage_peak_;
  }
  std::uint64_t overall() const { return overall_; }
  std::uint64_t samples() const { return samples_; }

 private:
  std::uint64_t sample() {
    const std::uint64_t r = current_rss_bytes();
    raise(stage_peak_, r);
    raise(overall_, r);
    ++samples_;
    return r;
  }
  static void raise(std::atomic<std::uint64_t>& a, std::uint64_t v) {
    std::uint64_t cur = a.load();
    while (v > cur && !a.compare_exchange_weak(cur, v)) {
    }
  }
  void run() {
    while (!stop_) {
      sample();
      std::this_thread::sleep_for(period_);
    }
  }

  std::chrono::duration<double> period_;
  std::atomic<bool> stop_{false};
  std::atomic<std::uint64_t> stage_peak_{0}, overall_{0}, samples_{0};
  std::thread thread_;
};

struct StageClock {
  RssSampler& sampler;
  json& stages;
  template <class Fn>
  void run(const std::string& name, Fn&& fn) {
    sampler.begin_stage();
    const auto t0 = Clock::now();
    fn();
    const double ms = std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
    const std::uint64_t peak = sampler.end_stage();
    json& s = stages[name];
    if (s.is_null()) s = {{"wall_ms", 0.0}, {"peak_rss_bytes", std::uint64_t{0}}};
    s["wall_ms"] = s.value("wall_ms", 0.0) + ms;
    s["peak_rss_bytes"] = std::max<std::uint64_t>(s.value("peak_rss_bytes", std::uint64_t{0}), peak);
  }
};

TriangleMesh unwrap_if_needed(TriangleMesh mesh, const BakeConfig& cfg) {
  if (mesh.has_uvs()) return mesh;
  return with_atlas_uvs(mesh, unwrap_per_triangle(mesh, cfg.resolution, std::max(1, cfg.gutter)));
}

fs::path texture_path(const fs::path& out_dir, const std::string& method, const char* map) {
  return out_dir / "textures" / (method + "_" + map + ".png");
}

// Body of one child process.
json run_method(const std::string& method, const SceneManifest& m, const fs::path& out_dir,
                double hz) {
  json stages = json::object();
  json diag = json::object();
  const auto start = Clock::now();
  std::uint64_t overall = 0, samples = 0;
  {
    RssSampler sampler(hz);
    StageClock clock{sampler, stages};
    TriangleMesh low, high;
    PointCloud cloud;
    TexelGrid albedo, normals;

    clock.run("mesh_load", [&] {
      low = io::read_mesh(m.low_mesh);
      if (method == "remesh") high = io::read_mesh(*m.high_mesh);
    });
    clock.run("unwrap", [&] { low = unwrap_if_needed(std::move(low), m.cfg); });
    if (method != "remesh") clock.run("io", [&] { cloud = io::read_pointcloud(m.cloud); });
    clock.run("bake", [&] {
      if (method == "remesh") {
        MeshBakeResult r = bake_from_mesh(high, low, m.cfg);
        diag["far_texels"] = r.stats.far_texels;
        diag["covered_texels"] = r.stats.covered_texels;
        albedo = std::move(r.texture);
        normals = std::move(r.normal_map);
      } else {
        BakeResult r = method == "ours" ? bake_all(low, cloud, m.cfg) : bake_lpm(low, cloud, m.cfg);
        diag["points_transferred"] = r.stats.points_transferred;
        diag["covered_texels"] = r.stats.covered_texels;
        diag["sliver_texels"] = r.stats.sliver_texels;
        diag["empty_faces"] = r.stats.empty_faces;
        albedo = std::move(r.texture);
        normals = std::move(r.normal_map);
      }
    });
    clock.run("io", [&] {
      io::write_image(albedo, texture_path(out_dir, method, "albedo"));
      io::write_image(normals, texture_path(out_dir, method, "normal"));
    });
    overall = sampler.overall();
    samples = sampler.samples();
  }
  const double total_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
  for (const auto& s : kProfiledStages)
    if (s != "total" && !stages.contains(s)) stages[s] = {{"wall_ms", 0.0}, {"peak_rss_bytes", 0}};
  stages["total"] = {{"wall_ms", total_ms}, {"peak_rss_bytes", overall}};
  return {{"stages", stages}, {"diagnostics", diag}, {"rss_samples", samples}};
}

void write_all(int fd, const std::string& s) {
  std::size_t off = 0;
  while (off < s.size()) {
    const ssize_t n = ::write(fd, s.data() + off, s.size() - off);
    if (n <= 0) return;
    off += static_cast<std::size_t>(n);
  }
}

json run_in_child(const std::string& method, const SceneManifest& m, const fs::path& out_dir,
                  double hz, std::uint64_t& kernel_peak) {
  int fds[2];
  if (::pipe(fds) != 0) throw IoError("pipe() failed");
  std::fflush(nullptr);
  const pid_t pid = ::fork();
  if (pid < 0) throw IoError("fork() failed");
  if (pid == 0) {
    ::close(fds[0]);
    int code = 0;
    json out;
    try {
      out = run_method(method, m, out_dir, hz);
    } catch (const Error& e) {
      out = {{"error", e.what()}, {"category", e.category() == ErrorCategory::Config ? 4 : 3}};
      code = 1;
    } catch (const std::exception& e) {
      out = {{"error", e.what()}, {"category", 3}};
      code = 1;
    }
    write_all(fds[1], out.dump());
    ::close(fds[1]);
    ::_exit(code);
  }
  ::close(fds[1]);
  std::string buf;
  char chunk[4096];
  for (ssize_t n; (n = ::read(fds[0], chunk, sizeof chunk)) > 0;) buf.append(chunk, std::size_t(n));
  ::close(fds[0]);
  int status = 0;
  struct rusage ru {};
  ::wait4(pid, &status, 0, &ru);
  kernel_peak = static_cast<std::uint64_t>(ru.ru_maxrss) * 1024;
  json out = json::parse(buf, nullptr, false);
  if (out.is_discarded())
    throw IoError("profiling child for '" + method + "' exited without a report (status " +
                  std::to_string(status) + ")");
  if (out.contains("error")) {
    const std::string what = "method '" + method + "': " + out["error"].get<std::string>();
    if (out.value("category", 3) == 4) throw ConfigError(what);
    throw IoError(what);
  }
  return out;
}

void require_file(const fs::path& p, const char* field) {
  if (!fs::exists(p))
    throw ManifestError("field '" + std::string(field) + "' names a missing file: " + p.string());
}

json psnr_json(double db) { return std::isinf(db) ? json("identical") : json(db); }

}  // namespace

ProfileReport profile_pipeline(const SceneManifest& m, const fs::path& out_dir,
                               const ProfileOptions& options) {
  if (!(options.sample_hz >= 10.0)) throw ConfigError("RSS sampling rate must be >= 10 Hz");
  require_file(m.cloud, "cloud");
  require_file(m.low_mesh, "low_mesh");
  if (!m.high_mesh) throw ManifestError("missing field 'high_mesh' (needed by the remesh method)");
  require_file(*m.high_mesh, "high_mesh");
  if (m.cameras.empty()) throw ManifestError("field 'cameras' must list at least one camera");
  if (m.reference == "analytic" && !m.scene)
    throw ManifestError("missing field 'scene' (needed by the analytic reference)");
  for (const auto& c : m.cameras) c.validate();
  m.cfg.validate();

  fs::create_directories(out_dir / "textures");
  fs::create_directories(out_dir / "frames");

  ProfileReport report;
  report.reference = m.reference;
  for (const auto& method : kProfiledMethods) {
    std::uint64_t kernel_peak = 0;
    const json out = run_in_child(method, m, out_dir, options.sample_hz, kernel_peak);
    report.kernel_peak_rss_bytes[method] = kernel_peak;
    for (const auto& stage : kProfiledStages) {
      const json& s = out["stages"][stage];
      report.rows.push_back({method, stage, s["wall_ms"].get<double>(),
                             s["peak_rss_bytes"].get<std::uint64_t>()});
    }
    for (const auto& [k, v] : out["diagnostics"].items())
      report.diagnostics[method][k] = v.get<double>();
    report.diagnostics[method]["rss_samples"] = out["rss_samples"].get<double>();
  }

  // Rendering and scoring happen in this process after all timed runs.
  const TriangleMesh low = unwrap_if_needed(io::read_mesh(m.low_mesh), m.cfg);
  std::vector<TexelGrid> reference;
  if (m.reference == "analytic") {
    const SceneKind kind = m.scene->kind;
    const BakeResult truth =
        bake_function(low, [kind](const Vec3& p) { return analytic_surface(kind, p); }, m.cfg);
    for (const auto& cam : m.cameras)
      reference.push_back(render(low, truth.texture, truth.normal_map, cam, m.light_dir).color);
  } else {
    const TriangleMesh high = io::read_mesh(*m.high_mesh);
    for (const auto& cam : m.cameras)
      reference.push_back(render_vertex_colors(high, cam, m.light_dir).color);
  }
  for (std::size_t c = 0; c < reference.size(); ++c)
    io::write_image(reference[c], out_dir / "frames" / ("reference_cam" + std::to_string(c) + ".png"));

  for (const auto& method : kProfiledMethods) {
    const TexelGrid albedo = io::read_image(texture_path(out_dir, method, "albedo"));
    const TexelGrid normals = io::read_image(texture_path(out_dir, method, "normal"));
    for (std::size_t c = 0; c < m.cameras.size(); ++c) {
      const RenderedFrame f = render(low, albedo, normals, m.cameras[c], m.light_dir);
      io::write_image(f.color, out_dir / "frames" / (method + "_cam" + std::to_string(c) + ".png"));
      const double e = rmse(f.color, reference[c]);
      report.frames.push_back({method, static_cast<int>(c), e, psnr_from_rmse(e)});
    }
  }
  write_report_csv(report, out_dir / "report.csv");
  write_report_json(report, out_dir / "summary.json");
  return report;
}

void write_report_csv(const ProfileReport& report, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "method,stage,wall_ms,peak_rss_bytes\n";
  char buf[64];
  for (const auto& r : report.rows) {
    std::snprintf(buf, sizeof buf, "%.3f", r.wall_ms);
    out << r.method << ',' << r.stage << ',' << buf << ',' << r.peak_rss_bytes << '\n';
  }
}

void write_report_json(const ProfileReport& report, const fs::path& path) {
  json j;
  j["reference"] = report.reference;
  j["methods"] = json::object();
  for (const auto& method : kProfiledMethods) {
    json m;
    for (const auto& r : report.rows)
      if (r.method == method)
        m["stages"][r.stage] = {{"wall_ms", r.wall_ms}, {"peak_rss_bytes", r.peak_rss_bytes}};
    if (auto it = report.kernel_peak_rss_bytes.find(method); it != report.kernel_peak_rss_bytes.end())
      m["kernel_peak_rss_bytes"] = it->second;
    m["frames"] = json::array();
    double rmse_sum = 0.0;
    int n = 0;
    for (const auto& f : report.frames)
      if (f.method == method) {
        m["frames"].push_back({{"camera", f.camera}, {"rmse", f.rmse}, {"psnr", psnr_json(f.psnr)}});
        rmse_sum += f.rmse;
        ++n;
      }
    if (n) {
      m["mean_rmse"] = rmse_sum / n;
      m["mean_psnr"] = psnr_json(report.mean_psnr(method));
    }
    if (auto it = report.diagnostics.find(method); it != report.diagnostics.end())
      m["diagnostics"] = it->second;
    j["methods"][method] = m;
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace pointbake
