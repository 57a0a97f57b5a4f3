#pragma once

// File writers: binary PPM (P6) images and CSV tables of reals at 17 significant
// digits, which round-trip doubles exactly.

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "fracstab/geometry.hpp"
#include "fracstab/mandelbrot.hpp"
#include "fracstab/stability.hpp"

namespace fracstab {

/// Raised for unreadable or unwritable paths.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Rgb = std::array<std::uint8_t, 3>;

struct Image {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Rgb> pixels;

  Image(std::size_t w, std::size_t h, Rgb fill = {0, 0, 0}) : width(w), height(h), pixels(w * h, fill) {}
  Rgb& at(std::size_t i, std::size_t j) { return pixels[j * width + i]; }
};

inline void write_ppm(const std::filesystem::path& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  for (const Rgb& p : img.pixels) out.write(reinterpret_cast<const char*>(p.data()), 3);
  if (!out) throw IoError("write failed: " + path.string());
}

inline Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string magic;
  std::size_t w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P6" || maxval != 255) throw IoError("not an 8-bit P6 image: " + path.string());
  in.get();
  Image img(w, h);
  for (Rgb& p : img.pixels) in.read(reinterpret_cast<char*>(p.data()), 3);
  if (!in) throw IoError("truncated image: " + path.string());
  return img;
}

inline std::string format_real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row) {
    if (row.size() != header.size()) throw std::invalid_argument("csv: row width does not match header");
    rows.push_back(std::move(row));
  }
};

inline void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  for (std::size_t k = 0; k < table.header.size(); ++k) out << (k ? "," : "") << table.header[k];
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << format_real(row[k]);
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  CsvTable t;
  std::string line;
  auto split = [](const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    return out;
  };
  if (!std::getline(in, line)) throw IoError("empty csv: " + path.string());
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    for (const auto& cell : split(line)) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str() || *end != '\0') throw IoError("bad number '" + cell + "' in " + path.string());
      row.push_back(v);
    }
    if (row.size() != t.header.size()) throw IoError("ragged csv: " + path.string());
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// theta,x,y rows of a parametric curve.
inline CsvTable polyline_table(const Polyline& poly) {
  CsvTable t{{"theta", "x", "y"}, {}};
  for (std::size_t k = 0; k < poly.size(); ++k) {
    t.add_row({poly.parameter_samples[k], poly.points[k].real(), poly.points[k].imag()});
  }
  return t;
}

// Verdict colors.
inline constexpr Rgb color_interior{0, 170, 0};
inline constexpr Rgb color_boundary{220, 0, 0};
inline constexpr Rgb color_matignon{170, 215, 255};
inline constexpr Rgb color_complex_power{255, 255, 255};
inline constexpr Rgb color_unset{40, 40, 40};

/// Color of one classified point. Points outside the Matignon sector whose A_q is
/// complex are painted as the complex-power region.
inline Rgb verdict_color(const StabilityVerdict& v) noexcept {
  using K = StabilityVerdict::Kind;
  switch (v.kind) {
    case K::StableInterior: return color_interior;
    case K::Boundary: return color_boundary;
    case K::UnstableMatignon: return v.a_q_value.is_complex() ? color_complex_power : color_matignon;
    case K::UndefinedComplexPower: return color_complex_power;
    case K::UnstableModulus: return color_unset;
  }
  return color_unset;
}

/// Members black, escaping pixels shaded by escape time.
inline Image raster_image(const RasterGrid& grid) {
  Image img(grid.width, grid.height);
  for (std::size_t j = 0; j < grid.height; ++j) {
    for (std::size_t i = 0; i < grid.width; ++i) {
      const RasterCell& c = grid.at(i, j);
      if (c.member) {
        img.at(i, j) = {0, 0, 0};
        continue;
      }
      const std::uint32_t n = c.escape_index.value_or(0);
      const auto shade = static_cast<std::uint8_t>(255 - std::min<std::uint32_t>(n * 8, 200));
      img.at(i, j) = {shade, shade, 255};
    }
  }
  return img;
}

/// Stability-domain picture: every pixel center classified against S^q.
inline Image domain_image(const Window& window, std::size_t width, std::size_t height, double q,
                          BranchPolicy policy, unsigned threads = 1) {
  const RasterGrid geometry(window, width, height);
  Image img(width, height);
  parallel_for(height, threads, [&](std::size_t j) {
    for (std::size_t i = 0; i < width; ++i) img.at(i, j) = verdict_color(classify(geometry.center(i, j), q, policy));
  });
  return img;
}

/// Paints curve samples that fall inside the raster window.
inline void draw_polyline(Image& img, const RasterGrid& grid, const Polyline& poly, Rgb color) {
  for (const Complex& p : poly.points) {
    if (const auto px = grid.pixel_of(p)) img.at(px->first, px->second) = color;
  }
}

}  // namespace fracstab
