#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "swarmclean/cue_field.hpp"
#include "swarmclean/metrics.hpp"

namespace swarmclean {

/// Malformed configuration or command-line values.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Unreadable input or unwritable output.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw std::runtime_error("format_double failed");
  return {buf.data(), end};
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) throw ConfigError("not a number: '" + std::string(s) + "'");
  return v;
}

template <class Int>
Int parse_int(std::string_view s) {
  Int v{};
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || end != s.data() + s.size()) throw ConfigError("not an integer: '" + std::string(s) + "'");
  return v;
}

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.emplace_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Metrics CSV

inline constexpr std::string_view kMetricsHeader = "t,mean_cue,ratio_within_rc,coherency_m";

inline std::string metrics_csv(const MetricsSeries& series) {
  std::string out(kMetricsHeader);
  out += '\n';
  for (const MetricsRecord& r : series) {
    out += std::to_string(r.t);
    out += ',';
    out += format_double(r.mean_cue);
    out += ',';
    out += format_double(r.ratio_within_rc);
    out += ',';
    out += format_double(r.coherency_m);
    out += '\n';
  }
  return out;
}

inline MetricsSeries parse_metrics_csv(std::string_view text) {
  MetricsSeries series;
  std::size_t line_no = 0;
  for (const std::string& raw : split(text, '\n')) {
    ++line_no;
    if (raw.empty()) continue;
    if (line_no == 1) {
      if (raw != kMetricsHeader) throw IoError("unexpected metrics header: " + raw);
      continue;
    }
    const auto cols = split(raw, ',');
    if (cols.size() != 4) throw IoError("metrics line " + std::to_string(line_no) + ": expected 4 columns");
    try {
      series.push_back({parse_int<long>(cols[0]), parse_double(cols[1]), parse_double(cols[2]), parse_double(cols[3])});
    } catch (const ConfigError& e) {
      throw IoError("metrics line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return series;
}

inline MetricsSeries read_metrics_csv(const std::filesystem::path& path) { return parse_metrics_csv(read_file(path)); }

// ---------------------------------------------------------------------------
// Netpbm images

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  ///< row-major

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// One byte per cell, row-major, value = round(intensity).
inline std::string field_to_pgm(const CueField& field) {
  std::string out = "P5\n" + std::to_string(field.cols()) + " " + std::to_string(field.rows()) + "\n255\n";
  out.reserve(out.size() + field.size());
  for (double v : field.cells()) out.push_back(static_cast<char>(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)))));
  return out;
}

inline GrayImage parse_pgm(std::string_view bytes) {
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string_view {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
    const std::size_t start = pos;
    while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
    return bytes.substr(start, pos - start);
  };
  if (next_token() != "P5") throw IoError("not a binary PGM (P5)");
  GrayImage img;
  try {
    img.width = parse_int<int>(next_token());
    img.height = parse_int<int>(next_token());
    if (parse_int<int>(next_token()) != 255) throw IoError("PGM maxval must be 255");
  } catch (const ConfigError& e) {
    throw IoError(std::string("bad PGM header: ") + e.what());
  }
  ++pos;  // single whitespace after maxval
  const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  if (img.width <= 0 || img.height <= 0 || bytes.size() < pos + n) throw IoError("truncated PGM");
  img.pixels.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.begin() + static_cast<std::ptrdiff_t>(pos + n));
  return img;
}

struct Rgb {
  std::uint8_t r, g, b;
};

/// Black-red-yellow-white ramp for intensities 0..255.
inline Rgb heat_color(std::uint8_t v) {
  const double t = v / 255.0;
  auto channel = [](double x) { return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(x, 0.0, 1.0))); };
  return {channel(3.0 * t), channel(3.0 * t - 1.0), channel(3.0 * t - 2.0)};
}

/// Binary PPM (P6) heatmap of a grayscale image, each pixel scaled by `scale`.
inline std::string heatmap_ppm(const GrayImage& img, int scale = 1) {
  if (scale < 1) throw ConfigError("scale must be >= 1");
  const int w = img.width * scale;
  const int h = img.height * scale;
  std::string out = "P6\n" + std::to_string(w) + " " + std::to_string(h) + "\n255\n";
  out.reserve(out.size() + static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Rgb c = heat_color(img.at(x / scale, y / scale));
      out.push_back(static_cast<char>(c.r));
      out.push_back(static_cast<char>(c.g));
      out.push_back(static_cast<char>(c.b));
    }
  }
  return out;
}

}  // namespace swarmclean
