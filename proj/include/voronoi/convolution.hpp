#pragma once

// Kernel algebra: Cauchy convolution (p*q)_n, the Voronoi convolution
// (p o q)_n = (p*q)_n - (p*q)_{n-1}, difference sequences and the partial-sum
// function U(x) = sum_{k <= x} (p o qs)_k.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "voronoi/error.hpp"
#include "voronoi/sequence.hpp"

namespace voronoi {

/// (p*q)_n = sum_{k=0}^n p_{n-k} q_k for n < min(|p|, |q|), by direct
/// summation in increasing k. O(N^2); this is the reference route.
inline std::vector<double> cauchy_convolve(std::span<const double> p, std::span<const double> q) {
  const std::size_t len = std::min(p.size(), q.size());
  std::vector<double> out(len);
  for (std::size_t n = 0; n < len; ++n) {
    double acc = 0.0;
    for (std::size_t k = 0; k <= n; ++k) acc += p[n - k] * q[k];
    if (!std::isfinite(acc)) {
      throw evaluation_error("cauchy_convolve: non-finite value at n = " + std::to_string(n));
    }
    out[n] = acc;
  }
  return out;
}

/// (p*q)_n for n = 0..N. Uses O(N) or O(N * support) paths when p is the
/// constant 1 or has finite support; those paths perform the same floating
/// point additions as the reference, so results are identical.
inline std::vector<double> cauchy_convolve(const Sequence& p, const Sequence& q, std::size_t N) {
  const std::vector<double> qv = q.terms(N);
  std::vector<double> out(N + 1);
  if (p.is_constant_one()) {
    double acc = 0.0;
    for (std::size_t n = 0; n <= N; ++n) {
      acc += qv[n];
      out[n] = acc;
    }
  } else if (auto sp = p.support(); sp && *sp <= N) {
    const std::vector<double> pv = p.terms(N);
    const std::size_t m = *sp;
    for (std::size_t n = 0; n <= N; ++n) {
      double acc = 0.0;
      const std::size_t k0 = (n + 1 > m) ? n + 1 - m : 0;
      for (std::size_t k = k0; k <= n; ++k) acc += pv[n - k] * qv[k];
      out[n] = acc;
    }
  } else {
    const std::vector<double> pv = p.terms(N);
    return cauchy_convolve(pv, qv);
  }
  for (std::size_t n = 0; n <= N; ++n) {
    if (!std::isfinite(out[n])) {
      throw evaluation_error("cauchy_convolve: non-finite value at n = " + std::to_string(n));
    }
  }
  return out;
}

/// First differences: d_0 = c_0, d_n = c_n - c_{n-1}.
inline std::vector<double> differences(std::span<const double> c) {
  std::vector<double> d(c.size());
  for (std::size_t n = 0; n < c.size(); ++n) d[n] = n == 0 ? c[0] : c[n] - c[n - 1];
  return d;
}

/// (p o q)_n for n = 0..N.
inline std::vector<double> voronoi_convolve(const Sequence& p, const Sequence& q, std::size_t N) {
  return differences(cauchy_convolve(p, q, N));
}

/// (p o qs)_n for n = 0..N, always formed as the Voronoi convolution of p
/// with the pointwise product q_n s_n.
inline std::vector<double> voronoi_convolve_qs(const Sequence& p, const Sequence& q,
                                               const Sequence& s, std::size_t N) {
  return voronoi_convolve(p, times(q, s), N);
}

/// Lazily evaluated (p*q) as a memoised sequence.
inline Sequence cauchy_sequence(const Sequence& p, const Sequence& q) {
  return Sequence::memoized("(" + p.label() + ")*(" + q.label() + ")",
                            [p, q](std::size_t count) { return cauchy_convolve(p, q, count - 1); });
}

/// A base sequence together with its difference sequence: v_n = u_n - u_{n-1}
/// (v_0 = u_0), or m_n = q_n - q_{n-1} (m_0 = q_0).
struct DiffPair {
  Sequence base;
  Sequence diff;
};

inline Sequence difference_sequence(const Sequence& base) {
  if (auto c = base.constant_value()) {
    const double c0 = *c;
    return Sequence::from_function("diff(" + base.label() + ")",
                                   [c0](std::size_t n) { return n == 0 ? c0 : 0.0; });
  }
  return Sequence::from_function("diff(" + base.label() + ")", [base](std::size_t n) {
    return n == 0 ? base(0) : base(n) - base(n - 1);
  });
}

/// Builds the difference sequence and checks it on 0..N (evaluation errors
/// in the base surface here rather than later).
inline DiffPair diff_sequence(const Sequence& base, std::size_t N) {
  DiffPair pair{base, difference_sequence(base)};
  (void)pair.diff.terms(N);
  return pair;
}

/// U(x) = sum_{0 <= k <= x} (p o qs)_k, which telescopes to (p*qs)_{floor(x)}.
inline double partial_sum_U(const Sequence& p, const Sequence& q, const Sequence& s, double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("partial_sum_U: x must be >= 0");
  const auto m = static_cast<std::size_t>(std::floor(x));
  return cauchy_convolve(p, times(q, s), m)[m];
}

/// U(0..N) in one pass.
inline std::vector<double> partial_sums_U(const Sequence& p, const Sequence& q, const Sequence& s,
                                          std::size_t N) {
  return cauchy_convolve(p, times(q, s), N);
}

}  // namespace voronoi
