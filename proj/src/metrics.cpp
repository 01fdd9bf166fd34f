#include "pointbake/metrics.hpp"

#include <cmath>
#include <cstdio>

#include "pointbake/errors.hpp"

namespace pointbake {
namespace {

void require_same_size(const TexelGrid& a, const TexelGrid& b) {
  if (a.width() != b.width() || a.height() != b.height())
    throw DimensionError("image sizes differ: " + std::to_string(a.width()) + "x" +
                         std::to_string(a.height()) + " vs " + std::to_string(b.width()) + "x" +
                         std::to_string(b.height()));
}

}  // namespace

double rmse(const TexelGrid& a, const TexelGrid& b) {
  require_same_size(a, b);
  const auto da = a.data(), db = b.data();
  if (da.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double d = double(da[i]) - double(db[i]);
    sum += d * d;
  }
  return std::sqrt(sum / double(da.size()));
}

double masked_rmse(const TexelGrid& a, const TexelGrid& b, std::span<const std::uint8_t> mask) {
  require_same_size(a, b);
  if (mask.size() != a.texel_count()) throw DimensionError("mask size does not match image");
  const auto da = a.data(), db = b.data();
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t t = 0; t < mask.size(); ++t) {
    if (!mask[t]) continue;
    for (std::size_t c = 0; c < 3; ++c) {
      const double d = double(da[3 * t + c]) - double(db[3 * t + c]);
      sum += d * d;
    }
    n += 3;
  }
  return n ? std::sqrt(sum / double(n)) : 0.0;
}

double psnr(const TexelGrid& a, const TexelGrid& b) { return psnr_from_rmse(rmse(a, b)); }

std::string format_psnr(double db) {
  if (std::isinf(db) && db > 0) return "identical";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", db);
  return buf;
}

}  // namespace pointbake
