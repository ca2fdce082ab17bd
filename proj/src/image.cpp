#include "stochimc/image.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <iterator>

#include "stochimc/errors.hpp"

namespace stochimc {

ImageGrid::ImageGrid(std::size_t width, std::size_t height, std::uint8_t fill)
    : ImageGrid(width, height, std::vector<std::uint8_t>(width * height, fill)) {}

ImageGrid::ImageGrid(std::size_t width, std::size_t height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width == 0 || height == 0) throw DomainError("image dimensions must be positive");
  if (pixels_.size() != width * height) throw DomainError("pixel count does not match image dimensions");
}

std::vector<double> ImageGrid::window(std::size_t x, std::size_t y, std::size_t size) const {
  if (size == 0) throw DomainError("window size must be positive");
  std::vector<double> out;
  out.reserve(size * size);
  const auto half = static_cast<std::ptrdiff_t>(size / 2);
  auto clamp = [](std::ptrdiff_t v, std::size_t n) {
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(v, 0, static_cast<std::ptrdiff_t>(n) - 1));
  };
  for (std::size_t dy = 0; dy < size; ++dy)
    for (std::size_t dx = 0; dx < size; ++dx) {
      std::size_t px = clamp(static_cast<std::ptrdiff_t>(x + dx) - half, width_);
      std::size_t py = clamp(static_cast<std::ptrdiff_t>(y + dy) - half, height_);
      out.push_back(normalized(px, py));
    }
  return out;
}

namespace {

class PgmReader {
 public:
  explicit PgmReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool at_end() {
    skip_space();
    return pos_ >= bytes_.size();
  }

  ImageGrid next() {
    skip_space();
    if (pos_ + 2 > bytes_.size() || bytes_[pos_] != 'P' || bytes_[pos_ + 1] != '5')
      throw ParseError("expected P5 magic", pos_);
    pos_ += 2;
    std::size_t width = number("width");
    std::size_t height = number("height");
    std::size_t maxval = number("maxval");
    if (width == 0 || height == 0) throw ParseError("image dimensions must be positive", pos_);
    if (maxval == 0 || maxval > 255) throw ParseError("maxval must be in 1..255", pos_);
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) throw ParseError("expected whitespace after maxval", pos_);
    ++pos_;
    if (bytes_.size() - pos_ < width * height)
      throw ParseError("truncated pixel data", bytes_.size());
    std::vector<std::uint8_t> pixels(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                     bytes_.begin() + static_cast<std::ptrdiff_t>(pos_ + width * height));
    pos_ += width * height;
    if (maxval != 255)
      for (auto& p : pixels) {
        if (p > maxval) throw ParseError("pixel exceeds maxval", pos_);
        p = static_cast<std::uint8_t>((p * 255 + maxval / 2) / maxval);
      }
    return ImageGrid(width, height, std::move(pixels));
  }

 private:
  void skip_space() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::size_t number(const char* what) {
    skip_space();
    const char* first = reinterpret_cast<const char*>(bytes_.data()) + pos_;
    const char* last = reinterpret_cast<const char*>(bytes_.data()) + bytes_.size();
    std::size_t value = 0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr == first) throw ParseError(std::string("expected ") + what, pos_);
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<ImageGrid> parse_pgm(std::span<const std::uint8_t> bytes) {
  PgmReader reader(bytes);
  std::vector<ImageGrid> images;
  do {
    images.push_back(reader.next());
  } while (!reader.at_end());
  return images;
}

std::vector<std::uint8_t> encode_pgm(const ImageGrid& image) {
  std::string header = "P5\n" + std::to_string(image.width()) + " " + std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), image.pixels().begin(), image.pixels().end());
  return out;
}

std::vector<ImageGrid> read_pgm_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_pgm(bytes);
}

void write_pgm_file(const std::filesystem::path& path, std::span<const ImageGrid> images) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DomainError("cannot write " + path.string());
  for (const auto& image : images) {
    auto bytes = encode_pgm(image);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }
}

}  // namespace stochimc
