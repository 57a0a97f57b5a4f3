#pragma once

// Caputo-type fractional difference dynamics. The solution of
//   Delta^q x(t) = f(x(t + q - 1)),  x(0) = x0
// is the full-memory convolution
//   x(n) = x0 + sum_{j=0}^{n-1} b_j f(x(n-1-j)),
// with b_j the normalized Gamma-ratio weights from KernelCoefficients.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fracstab/numerics.hpp"

namespace fracstab {

inline double state_norm(double x) noexcept { return std::abs(x); }
inline double state_norm(const Complex& z) noexcept { return std::abs(z); }
template <class Derived>
double state_norm(const Eigen::MatrixBase<Derived>& v) {
  return v.norm();
}

template <class State>
struct Trajectory {
  double q = 1.0;
  std::vector<State> states;
  std::string rhs_tag;
  /// Set when the orbit left the escape radius (or went non-finite) at this index.
  std::optional<std::size_t> escape_index;

  std::size_t size() const noexcept { return states.size(); }
  bool escaped() const noexcept { return escape_index.has_value(); }
  const State& back() const { return states.back(); }
};

/// Integrates the fractional map for N steps with a shared kernel (kernel.size() >= N).
///
/// The history is accumulated oldest first onto x0. With q = 1 every weight is
/// exactly 1, so the result is bit-identical to x(n+1) = x(n) + f(x(n)).
///
/// Stops at the first n with ||x(n)|| > escape_radius; a finite escaped state is
/// kept as the last entry, a non-finite one is dropped.
template <class State, class Rhs>
Trajectory<State> frac_orbit(const KernelCoefficients& kernel, Rhs&& rhs, const State& x0, std::size_t steps,
                             double escape_radius, std::string rhs_tag = {}) {
  if (steps == 0) throw std::invalid_argument("frac_orbit: N must be >= 1");
  if (kernel.size() < steps) throw std::invalid_argument("frac_orbit: kernel shorter than N");
  if (!(escape_radius > 0.0)) throw std::invalid_argument("frac_orbit: escape_radius must be positive");

  Trajectory<State> traj;
  traj.q = kernel.order();
  traj.rhs_tag = std::move(rhs_tag);
  traj.states.reserve(steps + 1);
  traj.states.push_back(x0);

  std::vector<State> forcing;
  forcing.reserve(steps);
  const auto b = kernel.weights();
  for (std::size_t n = 1; n <= steps; ++n) {
    forcing.push_back(rhs(traj.states.back()));
    if (!std::isfinite(state_norm(forcing.back()))) {
      traj.escape_index = n;
      break;
    }
    State acc = x0;
    for (std::size_t i = 0; i < n; ++i) acc += b[n - 1 - i] * forcing[i];
    const double norm = state_norm(acc);
    if (!std::isfinite(norm)) {
      traj.escape_index = n;
      break;
    }
    traj.states.push_back(std::move(acc));
    if (norm > escape_radius) {
      traj.escape_index = n;
      break;
    }
  }
  return traj;
}

template <class State, class Rhs>
Trajectory<State> frac_orbit(double q, Rhs&& rhs, const State& x0, std::size_t steps, double escape_radius,
                             std::string rhs_tag = {}) {
  return frac_orbit(kernel_coefficients(q, steps), std::forward<Rhs>(rhs), x0, steps, escape_radius,
                    std::move(rhs_tag));
}

inline constexpr double linear_overflow_guard = 1e12;

/// Orbit of Delta^q y(n+1-q) = A y(n).
inline Trajectory<Eigen::VectorXd> linear_orbit(double q, const Eigen::MatrixXd& A, const Eigen::VectorXd& y0,
                                                std::size_t steps) {
  if (!(q > 0.0 && q < 1.0)) throw std::invalid_argument("linear_orbit: q must lie in (0, 1)");
  if (A.rows() == 0 || A.rows() != A.cols() || A.cols() != y0.size()) {
    throw std::invalid_argument("linear_orbit: dimension mismatch");
  }
  return frac_orbit(
      q, [&A](const Eigen::VectorXd& y) -> Eigen::VectorXd { return A * y; }, y0, steps, linear_overflow_guard,
      "linear");
}

struct DecayFit {
  double slope;
  double intercept;
  std::size_t first;  ///< window [first, last], inclusive
  std::size_t last;
  double residual;    ///< rms of the log-log fit
};

/// Least-squares fit of log ||y(n)|| against log n over n in [first, last].
template <class State>
DecayFit decay_exponent(const Trajectory<State>& traj, std::size_t first, std::size_t last) {
  if (first < 1 || last < first || last >= traj.size()) {
    throw std::invalid_argument("decay_exponent: window outside [1, N]");
  }
  if (last - first + 1 < 10) throw std::invalid_argument("decay_exponent: window shorter than 10");
  const std::size_t m = last - first + 1;
  std::vector<double> lx(m), ly(m);
  for (std::size_t k = 0; k < m; ++k) {
    const double norm = state_norm(traj.states[first + k]);
    if (!(norm > 0.0)) throw std::domain_error("decay_exponent: zero state inside the window");
    lx[k] = std::log(static_cast<double>(first + k));
    ly[k] = std::log(norm);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= static_cast<double>(m);
  my /= static_cast<double>(m);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    sxx += (lx[k] - mx) * (lx[k] - mx);
    sxy += (lx[k] - mx) * (ly[k] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double ss = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const double r = ly[k] - (intercept + slope * lx[k]);
    ss += r * r;
  }
  return {slope, intercept, first, last, std::sqrt(ss / static_cast<double>(m))};
}

inline constexpr double default_conv_tol = 1e-3;
inline constexpr std::size_t default_tail = 10;

enum class OrbitFate { ConvergedTo, Diverged, Undecided };

inline constexpr std::string_view to_string(OrbitFate k) noexcept {
  switch (k) {
    case OrbitFate::ConvergedTo: return "ConvergedTo";
    case OrbitFate::Diverged: return "Diverged";
    case OrbitFate::Undecided: return "Undecided";
  }
  return "?";
}

template <class State>
struct OrbitVerdict {
  using Kind = OrbitFate;

  Kind kind = Kind::Undecided;
  State point{};               ///< tail mean, ConvergedTo only
  double achieved_tol = 0.0;   ///< max tail distance to the mean, ConvergedTo only
  std::size_t escape_index = 0;  ///< Diverged only

  bool converged() const noexcept { return kind == Kind::ConvergedTo; }
  bool diverged() const noexcept { return kind == Kind::Diverged; }
};

/// Diverged if the orbit escaped; ConvergedTo(tail mean) if the last `tail`
/// states all sit within conv_tol of their mean; Undecided otherwise.
template <class State>
OrbitVerdict<State> classify_orbit(const Trajectory<State>& traj, double conv_tol = default_conv_tol,
                                   std::size_t tail = default_tail) {
  if (!(conv_tol > 0.0)) throw std::invalid_argument("classify_orbit: conv_tol must be positive");
  OrbitVerdict<State> out;
  if (traj.escaped()) {
    out.kind = OrbitVerdict<State>::Kind::Diverged;
    out.escape_index = *traj.escape_index;
    return out;
  }
  if (tail == 0 || tail > traj.size()) throw std::invalid_argument("classify_orbit: tail exceeds trajectory");
  const std::size_t start = traj.size() - tail;
  State mean = traj.states[start];
  for (std::size_t k = start + 1; k < traj.size(); ++k) mean += traj.states[k];
  mean = mean * (1.0 / static_cast<double>(tail));
  double worst = 0.0;
  for (std::size_t k = start; k < traj.size(); ++k) {
    State d = traj.states[k];
    d -= mean;
    worst = std::max(worst, state_norm(d));
  }
  if (worst <= conv_tol) {
    out.kind = OrbitVerdict<State>::Kind::ConvergedTo;
    out.point = std::move(mean);
    out.achieved_tol = worst;
  }
  return out;
}

}  // namespace fracstab
