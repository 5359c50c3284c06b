#pragma once

// Growth functions phi: [0, inf) -> (0, inf) used by the law of large
// numbers, with a numeric inverse and checks of the three standing
// conditions: strict increase, bounded ratio phi(x+1)/phi(x), and
//   phi(s)^2 * int_s^inf dx / phi(x)^2 <= a s + b.

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "voronoi/error.hpp"
#include "voronoi/expression.hpp"

namespace voronoi {

struct PhiFunction {
  RealFunction f;
  /// Initial upper bracket for bisection; expanded automatically.
  double bracket_hi = 1.0;

  double operator()(double x) const { return f(x); }
  [[nodiscard]] const std::string& label() const { return f.label; }
};

inline PhiFunction make_phi(std::string_view expression) {
  return PhiFunction{parse_function(expression)};
}

inline PhiFunction make_phi(RealFunction f) { return PhiFunction{std::move(f)}; }

/// phi(x) = x + c, with its closed-form inverse.
inline PhiFunction linear_phi(double c = 1.0) {
  RealFunction f;
  f.fn = [c](double x) { return x + c; };
  f.inverse = [c](double y) { return y - c; };
  f.label = "x+" + std::to_string(c);
  return PhiFunction{std::move(f)};
}

/// Returns x with |phi(x) - y| <= tol * max(1, |y|). Values of y below phi(0)
/// map to 0: the inverse is only ever composed with |X| inside an expectation.
inline double phi_inverse(const PhiFunction& phi, double y, double tol = 1e-12) {
  if (!(tol > 0.0)) throw std::invalid_argument("phi_inverse: tol must be positive");
  const double at_zero = phi(0.0);
  if (y <= at_zero) return 0.0;
  if (phi.f.has_inverse()) return std::max(0.0, phi.f.inverse(y));
  const double target_tol = tol * std::max(1.0, std::fabs(y));
  double lo = 0.0;
  double hi = std::max(phi.bracket_hi, 1e-300);
  int expansions = 0;
  while (!(phi(hi) >= y)) {
    lo = hi;
    hi *= 2.0;
    if (++expansions > 2100 || !std::isfinite(hi)) {
      throw evaluation_error("phi_inverse: could not bracket y = " + std::to_string(y));
    }
  }
  for (int iter = 0; iter < 400; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) return mid;  // bracket exhausted at double resolution
    const double fm = phi(mid);
    if (std::fabs(fm - y) <= target_tol) return mid;
    if (fm < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

struct IntegralBound {
  double a = 0.0;
  double b = 0.0;
  bool ok = false;
  std::vector<double> values;       // phi(s)^2 int_s^inf phi^-2 at each grid point
  std::vector<double> tail_bounds;  // truncation bound for each value
};

struct PhiCheckReport {
  bool strict_increase = false;
  double ratio_bound_c = 0.0;
  IntegralBound integral_bound;
};

namespace detail {

struct TailIntegral {
  double value = std::numeric_limits<double>::infinity();
  double tail_bound = std::numeric_limits<double>::infinity();
  bool converged = false;
};

/// int_s^inf dx/phi(x)^2 over dyadic pieces [s + 2^k - 1, s + 2^(k+1) - 1],
/// truncated once the pieces decay geometrically below 1e-15 of the total.
inline TailIntegral inverse_square_tail(const PhiFunction& phi, double s) {
  auto integrand = [&](double x) {
    const double v = phi(x);
    return 1.0 / (v * v);
  };
  using GK = boost::math::quadrature::gauss_kronrod<double, 21>;
  double total = 0.0;
  double prev = std::numeric_limits<double>::quiet_NaN();
  for (int k = 0; k < 200; ++k) {
    const double a = s + std::ldexp(1.0, k) - 1.0;
    const double b = s + std::ldexp(1.0, k + 1) - 1.0;
    const double piece = GK::integrate(integrand, a, b, 15, 1e-12);
    if (!std::isfinite(piece)) return {};
    total += piece;
    if (k >= 4 && std::isfinite(prev) && prev > 0.0) {
      const double ratio = piece / prev;
      if (ratio < 1.0) {
        const double tail = piece * ratio / (1.0 - ratio);
        if (tail <= 1e-15 * total) return {total + tail, tail, true};
      }
    }
    if (piece == 0.0 && k >= 4) return {total, 0.0, true};
    prev = piece;
  }
  return {};
}

}  // namespace detail

inline PhiCheckReport phi_check(const PhiFunction& phi, std::span<const double> s_grid) {
  if (s_grid.empty()) throw std::invalid_argument("phi_check: empty grid");
  PhiCheckReport report;
  report.strict_increase = true;
  for (std::size_t i = 0; i < s_grid.size(); ++i) {
    const double s = s_grid[i];
    if (s < 0.0) throw std::invalid_argument("phi_check: grid point below 0");
    const double v = phi(s);
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw evaluation_error("phi_check: phi is not positive at " + std::to_string(s));
    }
    if (i > 0 && !(v > phi(s_grid[i - 1]))) report.strict_increase = false;
    // Also probe between grid points.
    if (!(phi(s + 0.5) > v) || !(phi(s + 1.0) > phi(s + 0.5))) report.strict_increase = false;
    report.ratio_bound_c = std::max(report.ratio_bound_c, phi(s + 1.0) / v);
  }

  IntegralBound& ib = report.integral_bound;
  ib.ok = true;
  for (double s : s_grid) {
    const auto tail = detail::inverse_square_tail(phi, s);
    const double v = phi(s);
    ib.values.push_back(tail.converged ? v * v * tail.value
                                       : std::numeric_limits<double>::infinity());
    ib.tail_bounds.push_back(v * v * tail.tail_bound);
    if (!tail.converged) ib.ok = false;
  }
  if (!ib.ok) return report;

  // Least-squares slope (clamped at 0), then the smallest intercept that
  // dominates every point.
  const std::size_t m = s_grid.size();
  if (m == 1) {
    ib.a = 0.0;
  } else {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < m; ++i) {
      sx += s_grid[i];
      sy += ib.values[i];
      sxx += s_grid[i] * s_grid[i];
      sxy += s_grid[i] * ib.values[i];
    }
    const double den = static_cast<double>(m) * sxx - sx * sx;
    ib.a = den > 0.0 ? std::max(0.0, (static_cast<double>(m) * sxy - sx * sy) / den) : 0.0;
  }
  ib.b = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) ib.b = std::max(ib.b, ib.values[i] - ib.a * s_grid[i]);
  ib.b = std::max(ib.b, 0.0);
  return report;
}

}  // namespace voronoi
