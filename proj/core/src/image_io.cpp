#include "repgeo/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "repgeo/tensor_io.hpp"

namespace repgeo {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

[[noreturn]] void png_fail(png_structp, png_const_charp msg) { throw IoError(msg); }
void png_warn(png_structp, png_const_charp) {}

}  // namespace

Tensor read_png(const std::filesystem::path& file) {
  FilePtr fp(std::fopen(file.c_str(), "rb"));
  if (!fp) throw IoError("cannot open " + file.string());
  png_byte sig[8];
  if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
    throw IoError(file.string() + " is not a PNG file");
  }

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_read_struct(p, i, nullptr); }
  } guard{&png, &info};

  try {
    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_png(png, info,
                 PNG_TRANSFORM_EXPAND | PNG_TRANSFORM_STRIP_ALPHA | PNG_TRANSFORM_PACKING, nullptr);
  } catch (const IoError& e) {
    throw IoError(file.string() + ": " + e.what());
  }

  const std::size_t W = png_get_image_width(png, info);
  const std::size_t H = png_get_image_height(png, info);
  const int depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  const std::size_t C = (color & PNG_COLOR_MASK_COLOR) ? 3 : 1;
  if (depth != 8 && depth != 16) {
    throw IoError(file.string() + ": unsupported bit depth " + std::to_string(depth));
  }
  const double maxv = depth == 16 ? 65535.0 : 255.0;
  png_bytepp rows = png_get_rows(png, info);

  Tensor t({C, H, W});
  for (std::size_t y = 0; y < H; ++y) {
    const png_bytep row = rows[y];
    for (std::size_t x = 0; x < W; ++x) {
      for (std::size_t c = 0; c < C; ++c) {
        const std::size_t k = x * C + c;
        const double v = depth == 16 ? static_cast<double>((row[2 * k] << 8) | row[2 * k + 1])
                                     : static_cast<double>(row[k]);
        t.at(c, y, x) = v / maxv;
      }
    }
  }
  return t;
}

void write_png(const std::filesystem::path& file, const Tensor& image, int bit_depth) {
  if (image.rank() != 3 || (image.channels() != 1 && image.channels() != 3)) {
    throw IoError("write_png: expected a 1- or 3-channel image, got " +
                  shape_to_string(image.shape()));
  }
  if (bit_depth != 8 && bit_depth != 16) throw IoError("write_png: bit depth must be 8 or 16");
  const std::size_t C = image.channels(), H = image.height(), W = image.width();
  const std::size_t bytes = bit_depth / 8;
  const double maxv = bit_depth == 16 ? 65535.0 : 255.0;

  std::vector<png_byte> buffer(H * W * C * bytes);
  for (std::size_t y = 0; y < H; ++y) {
    for (std::size_t x = 0; x < W; ++x) {
      for (std::size_t c = 0; c < C; ++c) {
        const double v = std::clamp(image.at(c, y, x), 0.0, 1.0);
        const auto q = static_cast<unsigned>(std::lround(v * maxv));
        const std::size_t k = ((y * W + x) * C + c) * bytes;
        if (bytes == 2) {
          buffer[k] = static_cast<png_byte>(q >> 8);
          buffer[k + 1] = static_cast<png_byte>(q & 0xff);
        } else {
          buffer[k] = static_cast<png_byte>(q);
        }
      }
    }
  }
  std::vector<png_bytep> rows(H);
  for (std::size_t y = 0; y < H; ++y) rows[y] = buffer.data() + y * W * C * bytes;

  FilePtr fp(std::fopen(file.c_str(), "wb"));
  if (!fp) throw IoError("cannot open " + file.string() + " for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, png_fail, png_warn);
  png_infop info = png_create_info_struct(png);
  struct Guard {
    png_structp* p;
    png_infop* i;
    ~Guard() { png_destroy_write_struct(p, i); }
  } guard{&png, &info};
  try {
    png_init_io(png, fp.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(W), static_cast<png_uint_32>(H), bit_depth,
                 C == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_set_rows(png, info, rows.data());
    png_write_png(png, info, PNG_TRANSFORM_IDENTITY, nullptr);
  } catch (const IoError& e) {
    throw IoError(file.string() + ": " + e.what());
  }
}

Tensor load_image(const std::filesystem::path& file) {
  if (file.extension() == ".tensor") return read_tensor(file);
  return read_png(file);
}

Tensor normalize_for_display(const Tensor& map) {
  Tensor out = map;
  if (out.empty()) return out;
  const auto [lo, hi] = std::minmax_element(out.storage().begin(), out.storage().end());
  const double a = *lo, range = *hi - *lo;
  for (auto& v : out.storage()) v = range > 0.0 ? (v - a) / range : 0.0;
  return out;
}

}  // namespace repgeo
