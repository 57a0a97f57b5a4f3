#pragma once

// Fractional-order Mandelbrot map  Delta^q z(t) = z(t+q-1)^2 + c,  z(0) = 0,
// its escape-time rasters, the fixed points z* = +-i sqrt(c) (roots of z^2 + c),
// their eigenvalues and the c-plane image Gamma(c) of the S^q frontier.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <queue>
#include <stdexcept>
#include <vector>

#include "fracstab/dynamics.hpp"
#include "fracstab/geometry.hpp"
#include "fracstab/numerics.hpp"
#include "fracstab/parallel.hpp"
#include "fracstab/stability.hpp"

namespace fracstab {

inline constexpr double default_fom_escape = 1e3;
inline constexpr std::size_t default_fom_iters = 1000;
inline constexpr Complex default_main_body_seed{-0.05, 0.0};
inline constexpr std::size_t default_gamma_samples = 2048;

/// z^2 + c, written out so every caller rounds identically.
inline Complex mandelbrot_rhs(Complex z, Complex c) noexcept {
  const double x = z.real();
  const double y = z.imag();
  return {x * x - y * y + c.real(), 2.0 * x * y + c.imag()};
}

struct RasterCell {
  bool member = false;
  std::uint32_t iterations_used = 0;
  std::optional<std::uint32_t> escape_index;
};

/// width x height lattice over a window. Row 0 is the top edge (largest imaginary
/// part). Pixel centers are placed symmetrically about the window center so that
/// a window symmetric about the real axis maps row j and row height-1-j onto
/// exact conjugates.
struct RasterGrid {
  Window window;
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<RasterCell> cells;

  RasterGrid() = default;
  RasterGrid(const Window& w, std::size_t width_px, std::size_t height_px)
      : window(w), width(width_px), height(height_px), cells(width_px * height_px) {
    if (!w.valid()) throw std::invalid_argument("raster: invalid window");
    if (width_px == 0 || height_px == 0) throw std::invalid_argument("raster: size must be >= 1x1");
  }

  double dx() const noexcept { return window.width() / static_cast<double>(width); }
  double dy() const noexcept { return window.height() / static_cast<double>(height); }

  Complex center(std::size_t i, std::size_t j) const noexcept {
    const Complex mid = window.center();
    const double u = static_cast<double>(i) + 0.5 - 0.5 * static_cast<double>(width);
    const double v = 0.5 * static_cast<double>(height) - static_cast<double>(j) - 0.5;
    return {mid.real() + u * dx(), mid.imag() + v * dy()};
  }

  /// Inverse of center(); nullopt outside the window.
  std::optional<std::pair<std::size_t, std::size_t>> pixel_of(Complex c) const noexcept {
    const double u = (c.real() - window.x0) / dx();
    const double v = (window.y1 - c.imag()) / dy();
    if (!(u >= 0.0 && v >= 0.0)) return std::nullopt;
    const auto i = static_cast<std::size_t>(u);
    const auto j = static_cast<std::size_t>(v);
    if (i >= width || j >= height) return std::nullopt;
    return std::pair{i, j};
  }

  RasterCell& at(std::size_t i, std::size_t j) noexcept { return cells[j * width + i]; }
  const RasterCell& at(std::size_t i, std::size_t j) const noexcept { return cells[j * width + i]; }

  std::size_t member_count() const noexcept {
    std::size_t n = 0;
    for (const auto& c : cells) n += c.member;
    return n;
  }
};

struct FomPoint {
  bool member;
  OrbitVerdict<Complex> verdict;
  Trajectory<Complex> orbit;
};

/// One parameter c: orbit from z(0) = 0, member iff it does not escape within N steps.
inline FomPoint fom_point(Complex c, double q, std::size_t steps = default_fom_iters,
                          double escape_radius = default_fom_escape, double conv_tol = default_conv_tol,
                          std::size_t tail = default_tail) {
  auto orbit = frac_orbit(
      q, [c](Complex z) { return mandelbrot_rhs(z, c); }, Complex{0.0, 0.0}, steps, escape_radius, "z^2+c");
  auto verdict = classify_orbit(orbit, conv_tol, std::min(tail, orbit.size()));
  return {!orbit.escaped(), verdict, std::move(orbit)};
}

namespace detail {

/// Escape-time evaluation of one pixel; same arithmetic and accumulation order as
/// frac_orbit, without keeping the state history.
inline RasterCell fom_cell(Complex c, const KernelCoefficients& kernel, std::size_t steps, double escape_radius,
                           std::vector<Complex>& forcing) {
  forcing.clear();
  const auto b = kernel.weights();
  Complex z{0.0, 0.0};
  for (std::size_t n = 1; n <= steps; ++n) {
    forcing.push_back(mandelbrot_rhs(z, c));
    const bool finite = std::isfinite(std::abs(forcing.back()));
    Complex acc{0.0, 0.0};
    if (finite) {
      for (std::size_t i = 0; i < n; ++i) acc += b[n - 1 - i] * forcing[i];
    }
    if (!finite || !std::isfinite(std::abs(acc)) || std::abs(acc) > escape_radius) {
      return {false, static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(n)};
    }
    z = acc;
  }
  return {true, static_cast<std::uint32_t>(steps), std::nullopt};
}

}  // namespace detail

/// FOM membership raster; rows are spread over workers, each pixel written once.
inline RasterGrid fom_raster(const Window& window, std::size_t width, std::size_t height, double q,
                             std::size_t steps = default_fom_iters, double escape_radius = default_fom_escape,
                             unsigned threads = 1) {
  RasterGrid grid(window, width, height);
  if (steps == 0) throw std::invalid_argument("fom_raster: N must be >= 1");
  const KernelCoefficients kernel(q, steps);
  parallel_for(height, threads, [&](std::size_t j) {
    std::vector<Complex> forcing;
    forcing.reserve(steps);
    for (std::size_t i = 0; i < width; ++i) {
      grid.at(i, j) = detail::fom_cell(grid.center(i, j), kernel, steps, escape_radius, forcing);
    }
  });
  return grid;
}

/// Classical escape-time Mandelbrot: z <- z^2 + c, escape once |z| > 2.
inline RasterGrid iom_raster(const Window& window, std::size_t width, std::size_t height, std::size_t steps,
                             unsigned threads = 1) {
  RasterGrid grid(window, width, height);
  parallel_for(height, threads, [&](std::size_t j) {
    for (std::size_t i = 0; i < width; ++i) {
      const Complex c = grid.center(i, j);
      Complex z{0.0, 0.0};
      RasterCell cell{true, static_cast<std::uint32_t>(steps), std::nullopt};
      for (std::size_t n = 1; n <= steps; ++n) {
        z = mandelbrot_rhs(z, c);
        if (std::abs(z) > 2.0) {
          cell = {false, static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(n)};
          break;
        }
      }
      grid.at(i, j) = cell;
    }
  });
  return grid;
}

struct FixedPoints {
  Complex z1;
  Complex z2;
};

/// Roots of z^2 + c: z1 = i sqrt(c) with the principal root, z2 = -z1.
inline FixedPoints fixed_points(Complex c) noexcept {
  const Complex z1 = Complex{0.0, 1.0} * std::sqrt(c);
  return {z1, -z1};
}

/// The four sign combinations (+-s, +-t), s = sqrt(2|c| - 2 c_x), t = sqrt(2|c| + 2 c_x).
/// l1, l2 belong to z1*, l3, l4 to z2*.
struct EigenPair {
  Complex l1, l2, l3, l4;
};

inline EigenPair eigenvalues(Complex c) noexcept {
  const double r = std::abs(c);
  const double s = std::sqrt(std::max(0.0, 2.0 * r - 2.0 * c.real()));
  const double t = std::sqrt(std::max(0.0, 2.0 * r + 2.0 * c.real()));
  return {{s, t}, {s, -t}, {-s, t}, {-s, -t}};
}

/// Eigenvalue whose real/imaginary signs match `target` (the branch chosen in
/// verification flows).
inline Complex matching_eigenvalue(Complex c, Complex target) noexcept {
  const EigenPair e = eigenvalues(c);
  const bool re_neg = target.real() < 0.0;
  const bool im_neg = target.imag() < 0.0;
  if (!re_neg) return im_neg ? e.l2 : e.l1;
  return im_neg ? e.l4 : e.l3;
}

/// Jacobian eigenvalue of the map at a fixed point: d/dz (z^2 + c) = 2 z.
inline Complex jacobian_eigenvalue(Complex fixed_point) noexcept { return 2.0 * fixed_point; }

/// Inverts eigenvalues(): with u = Re(l)^2, v = Im(l)^2 one has c_x = (v - u)/4 and
/// |c| = (u + v)/4, hence c_y^2 = |c|^2 - c_x^2 = uv/4. Returns the c_y >= 0 root.
inline Complex eigen_to_c(Complex lambda) noexcept {
  const double u = lambda.real() * lambda.real();
  const double v = lambda.imag() * lambda.imag();
  return {0.25 * (v - u), 0.5 * std::abs(lambda.real() * lambda.imag())};
}

/// Image of the S^q frontier in the c-plane:
///   c_x = -2^{2q-2} cos^{2q}(t) cos(2t(q-2)),
///   c_y =  2^{2q-1} sin(t(2-q)) cos^{2q}(t) cos(t(q-2)),   |t| <= pi/2.
/// For q < 1 the curve winds twice around part of its interior.
inline Polyline gamma_c_curve(double q, std::size_t samples = default_gamma_samples) {
  require_order(q, "gamma_c_curve");
  if (samples < 3) throw std::invalid_argument("gamma_c_curve: samples must be >= 3");
  auto [theta, cosine] = detail::half_turn_samples(samples);
  Polyline out;
  out.closed = true;
  out.points.reserve(samples);
  const double ax = std::pow(2.0, 2.0 * q - 2.0);
  const double ay = std::pow(2.0, 2.0 * q - 1.0);
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = theta[k];
    const double c2q = std::pow(cosine[k], 2.0 * q);
    out.points.emplace_back(-ax * c2q * std::cos(2.0 * t * (q - 2.0)),
                            ay * std::sin(t * (2.0 - q)) * c2q * std::cos(t * (q - 2.0)));
  }
  out.parameter_samples = std::move(theta);
  return out;
}

/// Main cardioid of the classical set, |1 - sqrt(1 - 4c)| = 1:
///   4 c_x = 2 cos t - cos 2t,  4 c_y = 2 sin t - sin 2t,  |t| <= pi.
inline Polyline iom_cardioid(std::size_t samples) {
  if (samples < 3) throw std::invalid_argument("iom_cardioid: samples must be >= 3");
  Polyline out;
  out.closed = true;
  const auto last = static_cast<double>(samples - 1);
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = pi * (2.0 * static_cast<double>(k) - last) / last;
    out.parameter_samples.push_back(t);
    out.points.emplace_back(0.25 * (2.0 * std::cos(t) - std::cos(2.0 * t)),
                            0.25 * (2.0 * std::sin(t) - std::sin(2.0 * t)));
  }
  return out;
}

/// Row-major pixel mask matching a raster's layout.
struct PixelMask {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> bits;

  PixelMask() = default;
  PixelMask(std::size_t w, std::size_t h) : width(w), height(h), bits(w * h, 0) {}

  bool test(std::size_t i, std::size_t j) const noexcept { return bits[j * width + i] != 0; }
  void set(std::size_t i, std::size_t j) noexcept { bits[j * width + i] = 1; }
  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto b : bits) n += b;
    return n;
  }
};

/// 4-connected component of member pixels containing the seed.
inline PixelMask main_body_mask(const RasterGrid& raster, Complex seed = default_main_body_seed) {
  const auto px = raster.pixel_of(seed);
  if (!px || !raster.at(px->first, px->second).member) {
    throw std::invalid_argument("main_body_mask: seed is not a member pixel");
  }
  PixelMask mask(raster.width, raster.height);
  std::queue<std::pair<std::size_t, std::size_t>> frontier;
  mask.set(px->first, px->second);
  frontier.push(*px);
  auto visit = [&](std::size_t i, std::size_t j) {
    if (raster.at(i, j).member && !mask.test(i, j)) {
      mask.set(i, j);
      frontier.emplace(i, j);
    }
  };
  while (!frontier.empty()) {
    const auto [i, j] = frontier.front();
    frontier.pop();
    if (i > 0) visit(i - 1, j);
    if (i + 1 < raster.width) visit(i + 1, j);
    if (j > 0) visit(i, j - 1);
    if (j + 1 < raster.height) visit(i, j + 1);
  }
  return mask;
}

/// Pixels whose center lies inside Gamma(c) (non-zero winding number).
inline PixelMask gamma_region_mask(const RasterGrid& raster, double q, std::size_t samples = default_gamma_samples,
                                   unsigned threads = 1) {
  const Polyline curve = gamma_c_curve(q, samples);
  PixelMask mask(raster.width, raster.height);
  parallel_for(raster.height, threads, [&](std::size_t j) {
    for (std::size_t i = 0; i < raster.width; ++i) {
      if (winding_number(curve, raster.center(i, j)) != 0) mask.set(i, j);
    }
  });
  return mask;
}

/// Pixels whose fixed point z1* or z2* has its Jacobian eigenvalue 2 z* in S^q.
inline PixelMask eigen_region_mask(const RasterGrid& raster, double q, BranchPolicy policy, unsigned threads = 1) {
  PixelMask mask(raster.width, raster.height);
  parallel_for(raster.height, threads, [&](std::size_t j) {
    for (std::size_t i = 0; i < raster.width; ++i) {
      const FixedPoints fp = fixed_points(raster.center(i, j));
      if (classify(jacobian_eigenvalue(fp.z1), q, policy).stable() ||
          classify(jacobian_eigenvalue(fp.z2), q, policy).stable()) {
        mask.set(i, j);
      }
    }
  });
  return mask;
}

struct RasterParams {
  Window window{-2.0, 0.5, -1.25, 1.25};
  std::size_t width = 600;
  std::size_t height = 600;
  std::size_t steps = 300;
  double escape_radius = default_fom_escape;
  Complex seed = default_main_body_seed;
  unsigned threads = 1;
};

struct CoverageReport {
  double q;
  std::size_t main_body_pixels;
  std::size_t stability_region_pixels;
  std::size_t intersection_pixels;
  double ratio;
  /// Same region counted through the eigenvalue classification; agrees with
  /// stability_region_pixels up to pixels straddling the curve.
  std::size_t eigen_region_pixels;
  BranchPolicy policy;
};

/// Fraction of the FOM main body covered by the fixed-point stability region.
inline CoverageReport coverage_report(double q, const RasterParams& params,
                                      BranchPolicy region_policy = BranchPolicy::PrincipalComplex) {
  require_order(q, "coverage_report");
  const RasterGrid raster =
      fom_raster(params.window, params.width, params.height, q, params.steps, params.escape_radius, params.threads);
  const PixelMask body = main_body_mask(raster, params.seed);
  const PixelMask region = gamma_region_mask(raster, q, default_gamma_samples, params.threads);
  const PixelMask eigen = eigen_region_mask(raster, q, region_policy, params.threads);
  std::size_t both = 0;
  for (std::size_t k = 0; k < body.bits.size(); ++k) both += body.bits[k] && region.bits[k];
  const std::size_t main = body.count();
  return {q,
          main,
          region.count(),
          both,
          static_cast<double>(both) / static_cast<double>(main),
          eigen.count(),
          region_policy};
}

}  // namespace fracstab
