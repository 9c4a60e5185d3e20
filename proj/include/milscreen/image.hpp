#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "milscreen/corpus.hpp"

namespace milscreen::featex {

// 8-bit interleaved RGB.
struct Image {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;

  std::size_t pixels() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
};

struct Hsv {
  double h = 0.0;  // [0,1)
  double s = 0.0;
  double v = 0.0;
};

Hsv rgb_to_hsv(std::uint8_t r, std::uint8_t g, std::uint8_t b);
// Inverse for h,s,v in [0,1]; channels rounded to nearest 8-bit value.
std::array<std::uint8_t, 3> hsv_to_rgb(double h, double s, double v);

// Channel-wise arithmetic mean of per-pixel HSV. Hue is averaged linearly.
Hsv hsv_mean(const Image& image);

// PNG or JPEG, detected from the file signature.
Image decode_image(const std::filesystem::path& path);
void encode_png(const std::filesystem::path& path, const Image& image);

// Supplies the decoded picture of a post, or nullopt when the post has none.
using ImageSource = std::function<std::optional<Image>(const corpus::Post&)>;

// Resolves image_ref relative to root and decodes it; a listed but unreadable
// image is an error.
ImageSource disk_image_source(std::filesystem::path root);

}  // namespace milscreen::featex
