#pragma once

// The stability domain S^q of  Delta^q y(n+1-q) = A y(n):
//
//   S^q = { z : |z| < (2 cos((|arg z| - pi) / (2 - q)))^q  and  |arg z| > q pi / 2 }
//
// The first inequality is tracked through the signed membership function A_q,
// whose zero set is the frontier. For |arg z| < q pi / 2 the cosine is negative
// and the power of a negative base has to go through a BranchPolicy.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "fracstab/geometry.hpp"
#include "fracstab/numerics.hpp"
#include "fracstab/parallel.hpp"

namespace fracstab {

inline constexpr double default_boundary_tol = 1e-9;

struct StabilityVerdict {
  enum class Kind { StableInterior, Boundary, UnstableMatignon, UnstableModulus, UndefinedComplexPower };

  Kind kind;
  PowerResult a_q_value;
  bool matignon_ok;

  bool stable() const noexcept { return kind == Kind::StableInterior; }
};

inline constexpr std::string_view to_string(StabilityVerdict::Kind k) noexcept {
  using K = StabilityVerdict::Kind;
  switch (k) {
    case K::StableInterior: return "StableInterior";
    case K::Boundary: return "Boundary";
    case K::UnstableMatignon: return "UnstableMatignon";
    case K::UnstableModulus: return "UnstableModulus";
    case K::UndefinedComplexPower: return "UndefinedComplexPower";
  }
  return "?";
}

/// A_q(z) = |z| - (2 cos((|arg z| - pi) / (2 - q)))^q.
/// Complex and Undefined results of the power propagate unchanged in kind.
inline PowerResult a_q(Complex z, double q, BranchPolicy policy = BranchPolicy::PrincipalComplex) {
  require_order(q, "a_q");
  const double a = std::abs(principal_arg(z));
  const double base = 2.0 * std::cos((a - pi) / (2.0 - q));
  const PowerResult p = real_power(base, q, policy);
  const double mod = std::abs(z);
  switch (p.kind) {
    case PowerResult::Kind::Real: return PowerResult::real(mod - p.real_part);
    case PowerResult::Kind::Complex: return PowerResult::complex(mod - p.real_part, -p.imag_part);
    case PowerResult::Kind::Undefined: break;
  }
  return PowerResult::undefined();
}

inline bool matignon_holds(Complex z, double q) noexcept {
  return std::abs(principal_arg(z)) > 0.5 * q * pi;
}

/// Matignon sector first, then the modulus bound. Points failing the sector
/// condition are UnstableMatignon whatever the power evaluates to, which keeps
/// verdicts identical across branch policies.
inline StabilityVerdict classify(Complex z, double q, BranchPolicy policy = BranchPolicy::PrincipalComplex,
                                 double boundary_tol = default_boundary_tol) {
  if (!(boundary_tol > 0.0)) throw std::invalid_argument("classify: boundary_tol must be positive");
  using K = StabilityVerdict::Kind;
  const PowerResult v = a_q(z, q, policy);
  if (!matignon_holds(z, q)) return {K::UnstableMatignon, v, false};
  switch (v.kind) {
    case PowerResult::Kind::Complex: return {K::UndefinedComplexPower, v, true};
    // unreachable inside the sector: the base 2 cos(E) is positive there
    case PowerResult::Kind::Undefined: return {K::UnstableModulus, v, true};
    case PowerResult::Kind::Real: break;
  }
  if (std::abs(v.real_part) <= boundary_tol) return {K::Boundary, v, true};
  return {v.real_part < 0.0 ? K::StableInterior : K::UnstableModulus, v, true};
}

namespace detail {

/// theta_k uniform on [-pi/2, pi/2] with exact endpoints; also returns cos(theta)
/// computed as sin(pi/2 - |theta|), which vanishes exactly at the ends.
inline std::pair<std::vector<double>, std::vector<double>> half_turn_samples(std::size_t samples) {
  std::vector<double> theta(samples);
  std::vector<double> cosine(samples);
  const double half = 0.5 * pi;
  const auto last = static_cast<double>(samples - 1);
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = half * (2.0 * static_cast<double>(k) - last) / last;
    theta[k] = t;
    cosine[k] = std::sin(half - std::abs(t));
  }
  return {std::move(theta), std::move(cosine)};
}

}  // namespace detail

/// Frontier of S^q:  z(theta) = -2^q cos^q(theta) exp(i (2 - q) theta),  |theta| <= pi/2.
/// Both ends sit at the origin, where the curve is tangent to the rays |arg z| = q pi / 2.
inline Polyline boundary_curve(double q, std::size_t samples) {
  require_order(q, "boundary_curve");
  if (samples < 3) throw std::invalid_argument("boundary_curve: samples must be >= 3");
  auto [theta, cosine] = detail::half_turn_samples(samples);
  Polyline out;
  out.closed = true;
  out.points.reserve(samples);
  const double scale = std::pow(2.0, q);
  for (std::size_t k = 0; k < samples; ++k) {
    const double r = scale * std::pow(cosine[k], q);
    const double phase = (2.0 - q) * theta[k];
    out.points.emplace_back(-r * std::cos(phase), -r * std::sin(phase));
  }
  out.parameter_samples = std::move(theta);
  return out;
}

/// The two Matignon rays |arg z| = q pi / 2 from the origin, each of the given length.
inline std::pair<Polyline, Polyline> matignon_rays(double q, double radius) {
  require_order(q, "matignon_rays");
  if (!(radius > 0.0)) throw std::invalid_argument("matignon_rays: radius must be positive");
  const double angle = 0.5 * q * pi;
  auto ray = [&](double a) {
    Polyline p;
    p.points = {Complex{0.0, 0.0}, std::polar(radius, a)};
    p.parameter_samples = {0.0, radius};
    return p;
  };
  return {ray(angle), ray(-angle)};
}

struct AreaEstimate {
  enum class Method { GridCount, GreenTheorem };

  double value;
  Method method;
  double resolution;  ///< cell edge length (GridCount) or sample count (GreenTheorem)
  BranchPolicy policy;
};

/// Area of S^q by counting StableInterior cell centers on a cells x cells lattice.
/// Rows are counted independently and summed as integers, so the estimate does not
/// depend on the worker count.
inline AreaEstimate region_area_grid(double q, BranchPolicy policy, const Window& window, std::size_t cells,
                                     unsigned threads = 1) {
  require_order(q, "region_area_grid");
  if (!window.valid()) throw std::invalid_argument("region_area_grid: invalid window");
  if (cells == 0) throw std::invalid_argument("region_area_grid: cells must be >= 1");
  const double reach = std::pow(2.0, q);
  if (window.x0 > -reach || window.x1 < reach || window.y0 > -reach || window.y1 < reach) {
    throw std::invalid_argument("region_area_grid: window must contain the disk of radius 2^q");
  }
  const double dx = window.width() / static_cast<double>(cells);
  const double dy = window.height() / static_cast<double>(cells);
  std::vector<std::uint64_t> row_count(cells, 0);
  parallel_for(cells, threads, [&](std::size_t j) {
    const double y = window.y0 + (static_cast<double>(j) + 0.5) * dy;
    std::uint64_t n = 0;
    for (std::size_t i = 0; i < cells; ++i) {
      const double x = window.x0 + (static_cast<double>(i) + 0.5) * dx;
      if (classify({x, y}, q, policy).stable()) ++n;
    }
    row_count[j] = n;
  });
  const std::uint64_t total = std::accumulate(row_count.begin(), row_count.end(), std::uint64_t{0});
  return {static_cast<double>(total) * dx * dy, AreaEstimate::Method::GridCount, dx, policy};
}

/// Area enclosed by the parametric frontier, by the shoelace formula.
inline AreaEstimate region_area_green(double q, std::size_t samples) {
  if (samples < 100) throw std::invalid_argument("region_area_green: samples must be >= 100");
  const Polyline curve = boundary_curve(q, samples);
  return {shoelace_area(curve), AreaEstimate::Method::GreenTheorem, static_cast<double>(samples),
          BranchPolicy::PrincipalComplex};
}

}  // namespace fracstab
