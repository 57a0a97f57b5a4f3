#pragma once

// Scalar building blocks: principal argument, the sign-based atan2 emulation,
// branch-aware real powers of negative bases, the E_a quadrant function and the
// memory-kernel weights of the Caputo convolution.

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fracstab {

using Complex = std::complex<double>;

inline constexpr double pi = std::numbers::pi;

/// How x^y is evaluated when x < 0.
enum class BranchPolicy {
  PrincipalComplex,  ///< exp(y log x) with the principal logarithm
  RealOddRoot,       ///< sign-preserving real root, -(|x|^y)
  RestrictedDomain,  ///< negative base rejected
};

inline constexpr std::string_view to_string(BranchPolicy p) noexcept {
  switch (p) {
    case BranchPolicy::PrincipalComplex: return "principal";
    case BranchPolicy::RealOddRoot: return "oddroot";
    case BranchPolicy::RestrictedDomain: return "restricted";
  }
  return "?";
}

struct PowerResult {
  enum class Kind { Real, Complex, Undefined };

  Kind kind = Kind::Undefined;
  double real_part = 0.0;
  double imag_part = 0.0;

  static constexpr PowerResult real(double v) noexcept { return {Kind::Real, v, 0.0}; }
  static constexpr PowerResult complex(double re, double im) noexcept {
    return {Kind::Complex, re, im};
  }
  static constexpr PowerResult undefined() noexcept { return {}; }

  bool is_real() const noexcept { return kind == Kind::Real; }
  bool is_complex() const noexcept { return kind == Kind::Complex; }
  bool is_undefined() const noexcept { return kind == Kind::Undefined; }
  Complex value() const noexcept { return {real_part, imag_part}; }
};

/// Principal argument in (-pi, pi]. The origin maps to 0 so membership tests stay total.
inline double principal_arg(Complex z) noexcept {
  if (z.real() == 0.0 && z.imag() == 0.0) return 0.0;
  double a = std::atan2(z.imag(), z.real());
  // atan2(-0, x<0) yields -pi; fold it onto the half-open range.
  return a == -pi ? pi : a;
}

namespace detail {
inline constexpr double sign(double v) noexcept { return (v > 0.0) - (v < 0.0); }
}  // namespace detail

struct EmulatedAngle {
  double value;   ///< arctan(y/x) + (pi/2) sign(y) (1 - sign(x))
  double native;  ///< std::atan2(y, x)
  bool mismatch;  ///< the two disagree beyond 1e-12
};

/// Two-argument arctangent rebuilt from the one-argument one using the signs of
/// both inputs. Kept verbatim as a cross-check: it divides by x, and with y = 0,
/// x < 0 it returns 0 where the native function returns pi.
inline EmulatedAngle atan2_emulated(double y, double x) {
  if (x == 0.0) throw std::domain_error("atan2_emulated: x must be non-zero");
  const double v = std::atan(y / x) + 0.5 * pi * detail::sign(y) * (1.0 - detail::sign(x));
  const double n = std::atan2(y, x);
  return {v, n, std::abs(v - n) > 1e-12};
}

/// base^exponent with an explicit rule for negative bases. Non-negative bases
/// always take the real branch; 0^0 is 1.
inline PowerResult real_power(double base, double exponent, BranchPolicy policy) noexcept {
  if (base >= 0.0) return PowerResult::real(std::pow(base, exponent));
  switch (policy) {
    case BranchPolicy::PrincipalComplex: {
      if (exponent == std::trunc(exponent)) return PowerResult::real(std::pow(base, exponent));
      // log(x) = log|x| + i pi for x < 0
      const double mag = std::pow(-base, exponent);
      const double phase = pi * exponent;
      return PowerResult::complex(mag * std::cos(phase), mag * std::sin(phase));
    }
    case BranchPolicy::RealOddRoot:
      return PowerResult::real(-std::pow(-base, exponent));
    case BranchPolicy::RestrictedDomain:
      return PowerResult::undefined();
  }
  return PowerResult::undefined();
}

enum class QuadrantTag { QuadrantIII, QuadrantIV, Boundary };

struct QuadrantValue {
  double value;
  QuadrantTag quadrant;
};

/// E_a(q) = (a - pi) / (2 - q): the angle fed to the cosine in the modulus bound.
/// Quadrant III means the cosine is negative and the power base goes negative.
inline QuadrantValue e_a(double a, double q) {
  if (!(a >= 0.0 && a < pi)) throw std::invalid_argument("e_a: a must lie in [0, pi)");
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("e_a: q must lie in (0, 1)");
  const double v = (a - pi) / (2.0 - q);
  const double d = v + 0.5 * pi;
  QuadrantTag tag = QuadrantTag::Boundary;
  if (std::abs(d) > 1e-12) tag = d < 0.0 ? QuadrantTag::QuadrantIII : QuadrantTag::QuadrantIV;
  return {v, tag};
}

inline void require_order(double q, const char* who) {
  if (!(q > 0.0 && q <= 1.0)) {
    throw std::invalid_argument(std::string(who) + ": order q must lie in (0, 1]");
  }
}

/// Normalized weights b_j = Gamma(j+q) / (Gamma(q) Gamma(j+1)) of the Caputo sum,
/// built with b_j = b_{j-1} (j-1+q) / j. Immutable; share freely between threads.
class KernelCoefficients {
 public:
  KernelCoefficients(double q, std::size_t n) : q_(q) {
    require_order(q, "kernel_coefficients");
    if (n == 0) throw std::invalid_argument("kernel_coefficients: n must be >= 1");
    b_.resize(n);
    b_[0] = 1.0;
    for (std::size_t j = 1; j < n; ++j) {
      b_[j] = b_[j - 1] * (static_cast<double>(j) - 1.0 + q) / static_cast<double>(j);
    }
  }

  double order() const noexcept { return q_; }
  std::size_t size() const noexcept { return b_.size(); }
  double operator[](std::size_t j) const noexcept { return b_[j]; }
  std::span<const double> weights() const noexcept { return b_; }

 private:
  double q_;
  std::vector<double> b_;
};

inline KernelCoefficients kernel_coefficients(double q, std::size_t n) { return {q, n}; }

}  // namespace fracstab
