#include <cstring>
#include <string>
#include <vector>

#include <png.h>

#include "pointbake/errors.hpp"
#include "pointbake/io.hpp"

namespace pointbake::io {

TexelGrid read_image(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw IoError("cannot decode '" + path.string() + "': " + image.message);
  if (image.format != PNG_FORMAT_RGB) {
    png_image_free(&image);
    throw UnsupportedFormat("'" + path.string() + "' is not an 8-bit RGB PNG without alpha");
  }
  TexelGrid grid(static_cast<int>(image.width), static_cast<int>(image.height));
  const auto stride = static_cast<png_int_32>(image.width * 3);
  if (!png_image_finish_read(&image, nullptr, grid.data().data(), stride, nullptr))
    throw IoError("cannot decode '" + path.string() + "': " + image.message);
  std::fill(grid.coverage().begin(), grid.coverage().end(), std::uint8_t{1});
  return grid;
}

void write_image(const TexelGrid& grid, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(grid.width());
  image.height = static_cast<png_uint_32>(grid.height());
  image.format = PNG_FORMAT_RGB;
  const auto stride = static_cast<png_int_32>(grid.width() * 3);
  if (!png_image_write_to_file(&image, path.string().c_str(), 0, grid.data().data(), stride,
                               nullptr))
    throw IoError("cannot write '" + path.string() + "': " + image.message);
}

}  // namespace pointbake::io
