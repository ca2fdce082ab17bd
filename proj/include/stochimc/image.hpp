#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace stochimc {

// 8-bit grayscale image, row-major.
class ImageGrid {
 public:
  ImageGrid() = default;
  ImageGrid(std::size_t width, std::size_t height, std::uint8_t fill = 0);
  ImageGrid(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return pixels_.size(); }
  std::uint8_t at(std::size_t x, std::size_t y) const { return pixels_[y * width_ + x]; }
  std::uint8_t& at(std::size_t x, std::size_t y) { return pixels_[y * width_ + x]; }
  double normalized(std::size_t x, std::size_t y) const { return at(x, y) / 255.0; }
  std::span<const std::uint8_t> pixels() const { return pixels_; }

  // Normalized pixels of the size x size window centred on (x, y); edges are clamped.
  std::vector<double> window(std::size_t x, std::size_t y, std::size_t size) const;

  bool operator==(const ImageGrid&) const = default;

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// Binary PGM (P5, maxval <= 255). A byte sequence may hold several concatenated images.
std::vector<ImageGrid> parse_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pgm(const ImageGrid& image);

std::vector<ImageGrid> read_pgm_file(const std::filesystem::path& path);
void write_pgm_file(const std::filesystem::path& path, std::span<const ImageGrid> images);

}  // namespace stochimc
