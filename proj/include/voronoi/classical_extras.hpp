#pragma once

// Two non-regular classical methods: Ingham's (1/x) sum n s_n [x/n] and
// the Riemann methods (R,1) and (R_1).

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "voronoi/limit.hpp"
#include "voronoi/sequence.hpp"

namespace voronoi {

// ------------------------------------------------------------------ Ingham

/// sum_{1 <= n <= x} n s_n floor(x/n); piecewise constant between integers.
inline double ingham_sum(const Sequence& s, double x) {
  if (!(x >= 1.0)) throw std::invalid_argument("ingham: x must be >= 1");
  const auto m = static_cast<std::size_t>(std::floor(x));
  double sum = 0.0;
  for (std::size_t n = 1; n <= m; ++n) {
    const double sn = s(n);
    if (sn == 0.0) continue;
    sum += static_cast<double>(n) * sn * std::floor(x / static_cast<double>(n));
  }
  return sum;
}

/// (1/x) sum_{1 <= n <= x} n s_n floor(x/n).
inline double ingham_transform(const Sequence& s, double x) { return ingham_sum(s, x) / x; }

struct InghamSweep {
  std::vector<double> x;       // 1..X
  std::vector<double> values;  // transform at each x
  LimitVerdict limit;
};

/// The transform at x = 1..X. The sum jumps by sum_{n | x} n s_n at each
/// integer, so a divisor sieve gives every value in O(X log X).
inline InghamSweep ingham_sweep(const Sequence& s, std::size_t X, double tol = 1e-2) {
  if (X < 2) throw std::invalid_argument("ingham_sweep: X must be >= 2");
  const auto terms = s.terms(X);
  std::vector<double> jump(X + 1, 0.0);
  for (std::size_t n = 1; n <= X; ++n) {
    if (terms[n] == 0.0) continue;
    const double w = static_cast<double>(n) * terms[n];
    for (std::size_t k = n; k <= X; k += n) jump[k] += w;
  }
  InghamSweep out;
  double sum = 0.0;
  for (std::size_t x = 1; x <= X; ++x) {
    sum += jump[x];
    out.x.push_back(static_cast<double>(x));
    out.values.push_back(sum / static_cast<double>(x));
  }
  out.limit = detect_limit(out.values, tol);
  return out;
}

// ----------------------------------------------------------------- Riemann

enum class RiemannVariant {
  /// a_0 + sum_{n>=1} a_n sin(nh)/(nh)
  R1_series,
  /// (2/pi) sum_{n>=1} s_n sin(nh)/n
  R1_mean,
  /// (2/pi) sum_{n>=1} s_n sin(nh)/(nh), i.e. R1_mean / h
  R1_mean_scaled
};

struct RiemannValue {
  double h = 0.0;
  double value = 0.0;
  /// Abel-summation bound w_{N+1} max_{N < m <= 2N} |sum_{N<k<=m} c_k sin(kh)|
  /// for the decreasing weight w; a proxy for the discarded tail.
  double tail_estimate = 0.0;
  std::size_t N = 0;
  bool tail_ok = false;
};

/// Truncated at N terms (N = 0 selects ceil(100/h)); tail_ok reports whether
/// the tail estimate is within tol.
inline RiemannValue riemann_transform(const Sequence& seq, double h, RiemannVariant variant, std::size_t N = 0,
                                      double tol = 1e-2) {
  if (!(h > 0.0)) throw std::invalid_argument("riemann_transform: h must be positive");
  if (N == 0) N = static_cast<std::size_t>(std::ceil(100.0 / h));
  const auto c = seq.terms(2 * N);
  const double pre = variant == RiemannVariant::R1_series ? 1.0 : 2.0 / std::numbers::pi;
  auto weight = [h, variant](std::size_t n) {
    const double nn = static_cast<double>(n);
    return variant == RiemannVariant::R1_mean ? 1.0 / nn : 1.0 / (nn * h);
  };

  RiemannValue r;
  r.h = h;
  r.N = N;
  double sum = variant == RiemannVariant::R1_series ? c[0] : 0.0;
  for (std::size_t n = 1; n <= N; ++n) {
    if (c[n] == 0.0) continue;
    sum += c[n] * std::sin(static_cast<double>(n) * h) * weight(n);
  }
  r.value = pre * sum;

  double partial = 0.0;
  double peak = 0.0;
  for (std::size_t k = N + 1; k <= 2 * N; ++k) {
    partial += c[k] * std::sin(static_cast<double>(k) * h);
    peak = std::max(peak, std::fabs(partial));
  }
  r.tail_estimate = pre * weight(N + 1) * peak;
  r.tail_ok = r.tail_estimate <= tol;
  return r;
}

struct RiemannSweep {
  std::vector<RiemannValue> values;  // h = 2^-j, j = j_min..j_max
  LimitVerdict limit;                // detect_limit over the values, window 2
  bool tails_ok = true;
};

inline RiemannSweep riemann_sweep(const Sequence& seq, RiemannVariant variant, int j_min = 1, int j_max = 10,
                                  double tol = 1e-2) {
  if (j_max < j_min + 1) throw std::invalid_argument("riemann_sweep: need at least two grid points");
  RiemannSweep out;
  std::vector<double> v;
  for (int j = j_min; j <= j_max; ++j) {
    out.values.push_back(riemann_transform(seq, std::ldexp(1.0, -j), variant, 0, tol));
    v.push_back(out.values.back().value);
    out.tails_ok = out.tails_ok && out.values.back().tail_ok;
  }
  out.limit = detect_limit(v, tol, 2);
  return out;
}

}  // namespace voronoi
