#pragma once

#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "pointbake/assets.hpp"

namespace pointbake {

/// Root mean squared difference over all channels. Throws DimensionError when
/// the grids differ in size.
double rmse(const TexelGrid& a, const TexelGrid& b);

/// Same, restricted to texels whose mask entry is nonzero (row-major, one
/// entry per texel). An empty selection gives 0.
double masked_rmse(const TexelGrid& a, const TexelGrid& b, std::span<const std::uint8_t> mask);

/// 20 log10(255 / rmse); +inf for identical images.
inline double psnr_from_rmse(double e) {
  return e == 0.0 ? std::numeric_limits<double>::infinity() : 20.0 * std::log10(255.0 / e);
}
double psnr(const TexelGrid& a, const TexelGrid& b);

/// Decimal text of a PSNR value, "identical" for +inf.
std::string format_psnr(double db);

}  // namespace pointbake
