#include <cmath>
#include <fstream>
#include <iterator>
#include <random>

#include <json.hpp>

#include "stochimc/apps.hpp"
#include "stochimc/errors.hpp"

namespace stochimc {

namespace {

using nlohmann::json;

double probability_field(const json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_number()) throw DomainError(std::string("missing numeric field '") + key + "'");
  double p = j.at(key).get<double>();
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError(std::string("field '") + key + "' must lie in [0,1]");
  return p;
}

OlInput parse_ol(const json& j) {
  OlInput in;
  in.width = j.at("width").get<std::size_t>();
  in.height = j.at("height").get<std::size_t>();
  for (const auto& point : j.at("likelihoods")) {
    if (!point.is_array() || point.size() != 6) throw DomainError("each OL grid point needs six likelihoods");
    std::array<double, 6> p{};
    for (std::size_t k = 0; k < 6; ++k) p[k] = point[k].get<double>();
    in.likelihoods.push_back(p);
  }
  return in;
}

HdpInput parse_hdp(const json& j) {
  HdpInput in;
  for (const auto& c : j.at("cases")) {
    HdpCase hc;
    hc.bp = probability_field(c, "bp");
    hc.cp = probability_field(c, "cp");
    hc.e = probability_field(c, "e");
    hc.d = probability_field(c, "d");
    const auto& t = c.at("hd_given");
    if (!t.is_array() || t.size() != 4) throw DomainError("hd_given needs four entries");
    for (std::size_t k = 0; k < 4; ++k) hc.hd_given[k] = t[k].get<double>();
    in.cases.push_back(hc);
  }
  return in;
}

std::uint8_t to_pixel(double v) { return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L)); }

}  // namespace

AppInput parse_probability_json(std::string_view text, AppKind kind) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
  AppInput input;
  try {
    if (kind == AppKind::Ol)
      input = parse_ol(j);
    else if (kind == AppKind::Hdp)
      input = parse_hdp(j);
    else
      throw DomainError("JSON inputs are defined for OL and HDP only");
  } catch (const json::exception& e) {
    throw DomainError(std::string("malformed probability file: ") + e.what());
  }
  validate(input);
  return input;
}

AppInput load_inputs(const std::filesystem::path& path, AppKind kind) {
  if (kind == AppKind::Lit || kind == AppKind::Kde) {
    auto images = read_pgm_file(path);
    AppInput input;
    if (kind == AppKind::Lit) {
      input = LitInput{images.front(), 9};
    } else {
      if (images.size() < 2) throw DomainError("KDE needs the current frame followed by history frames");
      KdeInput kde;
      kde.current = images.front();
      kde.history.assign(images.begin() + 1, images.end());
      input = std::move(kde);
    }
    validate(input);
    return input;
  }
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path.string());
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return parse_probability_json(text, kind);
}

AppInput synthetic_input(AppKind kind, std::size_t size, std::uint64_t seed, std::size_t history) {
  if (size == 0) throw DomainError("synthetic input size must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double side = static_cast<double>(size);

  switch (kind) {
    case AppKind::Lit: {
      // Smooth shading with texture and a bright blob.
      ImageGrid img(size, size);
      double bx = unit(rng) * side, by = unit(rng) * side;
      for (std::size_t y = 0; y < size; ++y)
        for (std::size_t x = 0; x < size; ++x) {
          double r2 = (x - bx) * (x - bx) + (y - by) * (y - by);
          double v = 90.0 + 50.0 * std::sin(x / 3.0) * std::cos(y / 4.0) + 90.0 * std::exp(-r2 / (side * 2.0)) +
                     18.0 * noise(rng);
          img.at(x, y) = to_pixel(v);
        }
      return LitInput{std::move(img), 9};
    }
    case AppKind::Ol: {
      // Six range sensors around a hidden object; each likelihood is Gaussian in the range residual.
      OlInput in;
      in.width = in.height = size;
      double ox = unit(rng) * side, oy = unit(rng) * side;
      std::array<std::array<double, 3>, 6> sensors{};
      for (auto& s : sensors) s = {unit(rng) * side, unit(rng) * side, side * (0.25 + 0.25 * unit(rng))};
      for (std::size_t y = 0; y < size; ++y)
        for (std::size_t x = 0; x < size; ++x) {
          std::array<double, 6> p{};
          for (std::size_t k = 0; k < 6; ++k) {
            auto [sx, sy, width] = sensors[k];
            double measured = std::hypot(ox - sx, oy - sy);
            double range = std::hypot(x - sx, y - sy);
            double r = (range - measured) / width;
            p[k] = 0.6 + 0.4 * std::exp(-0.5 * r * r);
          }
          in.likelihoods.push_back(p);
        }
      return in;
    }
    case AppKind::Hdp: {
      HdpInput in;
      std::uniform_real_distribution<double> risk(0.5, 0.95);
      std::uniform_real_distribution<double> table(0.3, 0.9);
      for (std::size_t i = 0; i < size; ++i) {
        HdpCase c;
        c.bp = risk(rng);
        c.cp = risk(rng);
        c.e = unit(rng);
        c.d = unit(rng);
        for (double& t : c.hd_given) t = table(rng);
        in.cases.push_back(c);
      }
      return in;
    }
    case AppKind::Kde: {
      // A static background under sensor noise, with an object drifting across the current frame.
      if (history == 0) throw DomainError("KDE history must be positive");
      ImageGrid background(size, size);
      for (std::size_t y = 0; y < size; ++y)
        for (std::size_t x = 0; x < size; ++x) background.at(x, y) = to_pixel(60.0 + 120.0 * (x + y) / (2.0 * side));
      KdeInput in;
      for (std::size_t f = 0; f < history; ++f) {
        ImageGrid frame(size, size);
        for (std::size_t y = 0; y < size; ++y)
          for (std::size_t x = 0; x < size; ++x) frame.at(x, y) = to_pixel(background.at(x, y) + 12.0 * noise(rng));
        in.history.push_back(std::move(frame));
      }
      in.current = ImageGrid(size, size);
      double bx = unit(rng) * side, by = unit(rng) * side;
      for (std::size_t y = 0; y < size; ++y)
        for (std::size_t x = 0; x < size; ++x) {
          bool object = std::hypot(x - bx, y - by) < side / 5.0;
          in.current.at(x, y) = to_pixel((object ? 230.0 : background.at(x, y)) + 12.0 * noise(rng));
        }
      return in;
    }
  }
  throw DomainError("unknown application");
}

}  // namespace stochimc
