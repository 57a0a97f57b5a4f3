#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "fracstab/numerics.hpp"

namespace fracstab {

/// Axis-aligned rectangle [x0, x1] x [y0, y1] in the complex plane.
struct Window {
  double x0 = -2.0;
  double x1 = 2.0;
  double y0 = -2.0;
  double y1 = 2.0;

  double width() const noexcept { return x1 - x0; }
  double height() const noexcept { return y1 - y0; }
  double area() const noexcept { return width() * height(); }
  Complex center() const noexcept { return {0.5 * (x0 + x1), 0.5 * (y0 + y1)}; }

  bool valid() const noexcept {
    return std::isfinite(x0) && std::isfinite(x1) && std::isfinite(y0) && std::isfinite(y1) &&
           x1 > x0 && y1 > y0;
  }
};

/// Sampled parametric curve.
struct Polyline {
  std::vector<Complex> points;
  bool closed = false;
  std::vector<double> parameter_samples;

  std::size_t size() const noexcept { return points.size(); }
};

/// Shoelace area of the polygon through the polyline points (implicitly closed).
inline double shoelace_area(const Polyline& poly) noexcept {
  const auto& p = poly.points;
  const std::size_t n = p.size();
  double twice = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Complex& a = p[i];
    const Complex& b = p[(i + 1) % n];
    twice += a.real() * b.imag() - b.real() * a.imag();
  }
  return 0.5 * std::abs(twice);
}

/// Winding number of the closed polygon around pt (crossing-number form, half-open
/// edge rule so vertices on the scanline are counted once).
inline int winding_number(const Polyline& poly, Complex pt) noexcept {
  const auto& p = poly.points;
  const std::size_t n = p.size();
  const double px = pt.real();
  const double py = pt.imag();
  int wn = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const Complex& a = p[i];
    const Complex& b = p[(i + 1) % n];
    const double side = (b.real() - a.real()) * (py - a.imag()) - (px - a.real()) * (b.imag() - a.imag());
    if (a.imag() <= py) {
      if (b.imag() > py && side > 0.0) ++wn;
    } else if (b.imag() <= py && side < 0.0) {
      --wn;
    }
  }
  return wn;
}

}  // namespace fracstab
