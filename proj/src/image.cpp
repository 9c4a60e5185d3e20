#include "milscreen/image.hpp"

#include <png.h>
#include <jpeglib.h>

#include <algorithm>
#include <cmath>
#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>

namespace milscreen::featex {

Hsv rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
  const double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double delta = mx - mn;
  Hsv out;
  out.v = mx;
  out.s = mx > 0.0 ? delta / mx : 0.0;
  if (delta <= 0.0) return out;
  double h;
  if (mx == r) h = (g - b) / delta;
  else if (mx == g) h = 2.0 + (b - r) / delta;
  else h = 4.0 + (r - g) / delta;
  h /= 6.0;
  if (h < 0.0) h += 1.0;
  if (h >= 1.0) h -= 1.0;
  out.h = h;
  return out;
}

std::array<std::uint8_t, 3> hsv_to_rgb(double h, double s, double v) {
  h = h - std::floor(h);
  const double c = v * s;
  const double hp = h * 6.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r = c; g = x; break;
    case 1: r = x; g = c; break;
    case 2: g = c; b = x; break;
    case 3: g = x; b = c; break;
    case 4: r = x; b = c; break;
    default: r = c; b = x; break;
  }
  const double m = v - c;
  auto to8 = [](double t) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(t * 255.0), 0L, 255L));
  };
  return {to8(r + m), to8(g + m), to8(b + m)};
}

Hsv hsv_mean(const Image& image) {
  const std::size_t n = image.pixels();
  if (n == 0 || image.rgb.size() != 3 * n) throw Error("hsv_mean: empty or malformed image");
  double h = 0, s = 0, v = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Hsv p = rgb_to_hsv(image.rgb[3 * i], image.rgb[3 * i + 1], image.rgb[3 * i + 2]);
    h += p.h;
    s += p.s;
    v += p.v;
  }
  const double dn = static_cast<double>(n);
  return {h / dn, s / dn, v / dn};
}

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

FilePtr open_file(const std::filesystem::path& path, const char* mode) {
  FilePtr f(std::fopen(path.c_str(), mode));
  if (!f) throw Error("cannot open image '" + path.string() + "'");
  return f;
}

Image decode_png(const std::filesystem::path& path) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&img, path.c_str()))
    throw Error("cannot decode PNG '" + path.string() + "': " + img.message);
  img.format = PNG_FORMAT_RGB;
  Image out;
  out.width = static_cast<int>(img.width);
  out.height = static_cast<int>(img.height);
  out.rgb.resize(PNG_IMAGE_SIZE(img));
  if (!png_image_finish_read(&img, nullptr, out.rgb.data(), 0, nullptr)) {
    const std::string msg = img.message;
    png_image_free(&img);
    throw Error("cannot decode PNG '" + path.string() + "': " + msg);
  }
  return out;
}

struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_fail(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

Image decode_jpeg(const std::filesystem::path& path) {
  FilePtr f = open_file(path, "rb");
  jpeg_decompress_struct cinfo{};
  JpegError err{};
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_fail;
  Image out;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw Error("cannot decode JPEG '" + path.string() + "': " + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_stdio_src(&cinfo, f.get());
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  jpeg_start_decompress(&cinfo);
  out.width = static_cast<int>(cinfo.output_width);
  out.height = static_cast<int>(cinfo.output_height);
  out.rgb.resize(static_cast<std::size_t>(out.width) * out.height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = out.rgb.data() + static_cast<std::size_t>(cinfo.output_scanline) * out.width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return out;
}

}  // namespace

Image decode_image(const std::filesystem::path& path) {
  unsigned char sig[8] = {};
  {
    FilePtr f = open_file(path, "rb");
    if (std::fread(sig, 1, sizeof sig, f.get()) < 3) throw Error("image too short: " + path.string());
  }
  if (png_sig_cmp(sig, 0, 8) == 0) return decode_png(path);
  if (sig[0] == 0xFF && sig[1] == 0xD8 && sig[2] == 0xFF) return decode_jpeg(path);
  throw Error("unsupported image format (PNG/JPEG expected): " + path.string());
}

void encode_png(const std::filesystem::path& path, const Image& image) {
  if (image.pixels() == 0 || image.rgb.size() != 3 * image.pixels())
    throw Error("encode_png: empty or malformed image");
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&img, path.c_str(), 0, image.rgb.data(), 0, nullptr))
    throw Error("cannot write PNG '" + path.string() + "': " + img.message);
}

ImageSource disk_image_source(std::filesystem::path root) {
  return [root = std::move(root)](const corpus::Post& post) -> std::optional<Image> {
    if (!post.image_ref || post.image_ref->empty()) return std::nullopt;
    return decode_image(root / *post.image_ref);
  };
}

}  // namespace milscreen::featex
