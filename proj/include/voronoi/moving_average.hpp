#pragma once

// Voronoi moving averages
//   c_n = (1/u(n)) sum_{w_lambda(n) < k <= n} (p o qs)_k,
//   w_lambda(x) = u^{-1}(u(x) / lambda),
// and the verifiers for the moving-average equivalence, uniformity,
// continuous-variable and Pi-class statements.
//
// Window convention: the sum runs over integers k with floor(w) < k <= n.
// A window endpoint within 1e-9 (relative) of an integer is snapped to it
// before the floor is taken. An endpoint below 0 (or below the range of u)
// clamps the window to start at k = 0 and is flagged.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "voronoi/convolution.hpp"
#include "voronoi/error.hpp"
#include "voronoi/expression.hpp"
#include "voronoi/limit.hpp"
#include "voronoi/methods.hpp"
#include "voronoi/report.hpp"
#include "voronoi/voronoi_mean.hpp"

namespace voronoi {

enum class InverseMethod { closed_form, bisection };

struct WindowMap {
  RealFunction u_fn;
  double lambda = 2.0;
  /// Bisection bracket [lo, hi]; hi is expanded automatically, lo is the
  /// start of the working domain.
  double bisect_lo = 0.0;
  double bisect_hi = 1.0;
  double tol = 1e-12;

  [[nodiscard]] InverseMethod inverse_method() const {
    return u_fn.has_inverse() ? InverseMethod::closed_form : InverseMethod::bisection;
  }
};

inline WindowMap make_window_map(RealFunction u_fn, double lambda) {
  if (!(lambda > 1.0)) throw std::invalid_argument("window map: lambda must exceed 1");
  WindowMap m;
  m.u_fn = std::move(u_fn);
  m.lambda = lambda;
  return m;
}

inline WindowMap with_lambda(WindowMap m, double lambda) {
  if (!(lambda > 1.0)) throw std::invalid_argument("window map: lambda must exceed 1");
  m.lambda = lambda;
  return m;
}

namespace detail {

/// u^{-1}(y), or nullopt when y lies below u(bisect_lo) (no preimage in the
/// working domain). u may be increasing or decreasing.
inline std::optional<double> inverse_weight(const WindowMap& m, double y) {
  if (m.u_fn.has_inverse()) {
    const double x = m.u_fn.inverse(y);
    if (!std::isfinite(x)) throw evaluation_error("window map: inverse of u is not finite");
    if (x < m.bisect_lo) return std::nullopt;
    return x;
  }
  double lo = m.bisect_lo;
  double hi = std::max(m.bisect_hi, lo + 1.0);
  const double f_lo = m.u_fn(lo);
  const bool increasing = m.u_fn(hi) >= f_lo;
  auto below = [&](double v) { return increasing ? v < y : v > y; };
  if (increasing ? y < f_lo : y > f_lo) return std::nullopt;
  int expansions = 0;
  while (below(m.u_fn(hi))) {
    lo = hi;
    hi = 2.0 * hi + 1.0;
    if (++expansions > 1100 || !std::isfinite(hi)) {
      throw evaluation_error("window map: bisection bracket failure for y = " + std::to_string(y));
    }
  }
  const double target = m.tol * std::max(1.0, std::fabs(y));
  for (int iter = 0; iter < 300; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) return mid;
    const double fm = m.u_fn(mid);
    if (std::fabs(fm - y) <= target) return mid;
    if (below(fm)) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// floor(w) after snapping near-integers; -1 encodes an empty lower part.
inline long long window_floor(double w) {
  if (w < 0.0) return -1;
  const double r = std::round(w);
  if (std::fabs(w - r) <= 1e-9 * std::max(1.0, std::fabs(w))) return static_cast<long long>(r);
  return static_cast<long long>(std::floor(w));
}

}  // namespace detail

/// w_lambda(x) = u^{-1}(u(x) / lambda).
inline double w_lambda(const WindowMap& m, double x) {
  const double y = m.u_fn(x) / m.lambda;
  auto w = detail::inverse_weight(m, y);
  if (!w) throw evaluation_error("w_lambda: u(x)/lambda lies outside the range of u at x = " + std::to_string(x));
  return *w;
}

struct MovingAverage {
  TransformPrefix c;
  std::vector<double> w;         // w_lambda(n); NaN where clamped
  std::vector<long long> cut;    // floor(w_lambda(n)) after snapping, -1 when clamped
};

/// c_0..c_N. Entries with u(n) = 0 are NaN and flagged.
inline MovingAverage voronoi_moving_average(const WeightTriple& triple, const WindowMap& m, const Sequence& s,
                                            std::size_t N) {
  if (!(m.lambda > 1.0)) throw std::invalid_argument("voronoi_moving_average: lambda must exceed 1");
  const auto U = partial_sums_U(triple.p, triple.q, s, N);
  MovingAverage r;
  r.c.method = triple.label;
  r.c.horizon = N;
  r.c.kind = TransformKind::moving_average;
  r.c.values.assign(N + 1, std::numeric_limits<double>::quiet_NaN());
  r.w.assign(N + 1, std::numeric_limits<double>::quiet_NaN());
  r.cut.assign(N + 1, -1);
  std::size_t clamped = 0;
  std::size_t undefined = 0;
  for (std::size_t n = 0; n <= N; ++n) {
    const double x = static_cast<double>(n);
    const double un = m.u_fn(x);
    if (un == 0.0 || !std::isfinite(un)) {
      ++undefined;
      continue;
    }
    auto w = detail::inverse_weight(m, un / m.lambda);
    long long cut = -1;
    if (w) {
      r.w[n] = *w;
      cut = detail::window_floor(*w);
      if (*w < 0.0) ++clamped;
    } else {
      ++clamped;
    }
    cut = std::min<long long>(cut, static_cast<long long>(n));
    r.cut[n] = cut;
    const double lower = cut >= 0 ? U[static_cast<std::size_t>(cut)] : 0.0;
    r.c.values[n] = (U[n] - lower) / un;
  }
  if (clamped > 0) {
    r.c.flags.push_back("window clamped to start at k = 0 for " + std::to_string(clamped) + " index(es)");
  }
  if (undefined > 0) {
    r.c.flags.push_back("c_n undefined where u(n) = 0 (" + std::to_string(undefined) + " index(es))");
  }
  return r;
}

// ------------------------------------------------------- Lambda evidence

struct LambdaEvidence {
  std::vector<double> x;
  std::vector<double> deviation;  // |u(x)/u(floor x) - 1|
  double last = 0.0;
  bool ok = false;
};

/// u(x) ~ u(floor x): deviations on x = 2^j + 1/2 (2 <= x <= N) shrink and
/// end below tol.
inline LambdaEvidence lambda_membership(const RealFunction& u_fn, std::size_t N, double tol = 1e-2) {
  LambdaEvidence e;
  for (double x = 2.5; x <= static_cast<double>(N); x = 2.0 * x - 0.5) {
    const double base = u_fn(std::floor(x));
    if (base == 0.0) continue;
    e.x.push_back(x);
    e.deviation.push_back(std::fabs(u_fn(x) / base - 1.0));
  }
  if (e.deviation.empty()) return e;
  e.last = e.deviation.back();
  e.ok = e.last <= tol && e.last <= e.deviation.front() + 1e-15;
  return e;
}

namespace detail {

/// t_n with NaN where u_n = 0 (e.g. u(x) = x at n = 0).
inline std::vector<double> mean_allowing_zero(const WeightTriple& triple, const Sequence& s, std::size_t N) {
  const auto U = partial_sums_U(triple.p, triple.q, s, N);
  const auto u = triple.u.terms(N);
  std::vector<double> t(N + 1);
  for (std::size_t n = 0; n <= N; ++n) {
    t[n] = u[n] == 0.0 ? std::numeric_limits<double>::quiet_NaN() : U[n] / u[n];
  }
  return t;
}

}  // namespace detail

// ---------------------------------------------------------- equivalence

struct Thm5Lambda {
  double lambda = 0.0;
  LimitVerdict verdict;
  double target = 0.0;    // (1 - 1/lambda) s
  double deviation_at_N = 0.0;
  double identity_residual = 0.0;
};

struct Thm5Result {
  LimitVerdict mean_limit;
  std::vector<Thm5Lambda> per_lambda;
  double identity_residual = 0.0;  // max over lambda and n <= N
  Report report;
};

inline Thm5Result thm5_equivalence_check(const WeightTriple& triple, const std::vector<WindowMap>& maps,
                                         const Sequence& s, std::size_t N, const VerifyOptions& opts = {}) {
  if (maps.empty()) throw std::invalid_argument("thm5_equivalence_check: empty lambda family");
  Thm5Result r;
  Report& rep = r.report;
  rep.title = "moving-average equivalence for " + triple.label;
  const auto lam = lambda_membership(maps.front().u_fn, N, opts.tol);
  rep.hypothesis("u_in_Lambda", lam.ok, lam.last, "|u(x)/u([x]) - 1| at the top of a log grid");

  const auto u = triple.u.terms(N);
  const auto t = detail::mean_allowing_zero(triple, s, N);
  r.mean_limit = detect_limit(t, opts.tol, opts.window);
  const bool mean_conv = r.mean_limit.converged();
  const double s_lim = r.mean_limit.estimate.value_or(std::nan(""));

  bool all_conv = true;
  bool all_match = true;
  for (const auto& m : maps) {
    const auto ma = voronoi_moving_average(triple, m, s, N);
    Thm5Lambda e;
    e.lambda = m.lambda;
    e.verdict = detect_limit(ma.c.values, opts.tol, opts.window);
    e.target = (1.0 - 1.0 / m.lambda) * s_lim;
    e.deviation_at_N = std::fabs(ma.c.values[N] - e.target);
    // c_n = t_n - (u_[w] / u_n) t_[w]
    for (std::size_t n = 0; n <= N; ++n) {
      if (std::isnan(ma.c.values[n]) || u[n] == 0.0) continue;
      const long long cut = ma.cut[n];
      double rhs = t[n];
      if (cut >= 0) {
        const auto k = static_cast<std::size_t>(cut);
        if (u[k] != 0.0) rhs -= (u[k] / u[n]) * t[k];
      }
      const double scale = std::max(1.0, std::fabs(ma.c.values[n]));
      e.identity_residual = std::max(e.identity_residual, std::fabs(ma.c.values[n] - rhs) / scale);
    }
    r.identity_residual = std::max(r.identity_residual, e.identity_residual);
    all_conv = all_conv && e.verdict.converged();
    if (!(mean_conv && e.verdict.converged_to(e.target, opts.tol))) all_match = false;
    r.per_lambda.push_back(e);
  }
  const bool consistent = (mean_conv && all_match) || (!mean_conv && !all_conv);
  rep.conclusion("mean_iff_moving_average", consistent, s_lim,
                 std::string("mean ") + to_string(r.mean_limit.status));
  for (const auto& e : r.per_lambda) {
    rep.notes.push_back("lambda " + std::to_string(e.lambda) + ": c_n " + to_string(e.verdict.status) +
                        ", |c_N - (1-1/lambda)s| = " + std::to_string(e.deviation_at_N));
  }
  rep.conclusion("identity_c_equals_t_minus_scaled_t", r.identity_residual <= 1e-12, r.identity_residual,
                 "relative, n <= N");
  return r;
}

// ------------------------------------------------------------ uniformity

struct Thm6Result {
  std::vector<double> lambdas;
  double s_limit = 0.0;
  double d_quarter = 0.0;  // max over the grid of |c_n - (1-1/lambda)s| at n = N/4
  double d_half = 0.0;
  double d_N = 0.0;
  bool pointwise_ok = false;
  Report report;
};

/// s_limit: if absent, taken from the mean's limit estimate.
inline Thm6Result thm6_uniformity_check(const WeightTriple& triple, const RealFunction& u_fn, const Sequence& s,
                                        double a, double b, std::size_t grid_size, std::size_t N,
                                        std::optional<double> s_limit = std::nullopt,
                                        const VerifyOptions& opts = {}) {
  if (!(a > 1.0 && b > a)) throw std::invalid_argument("thm6_uniformity_check: need 1 < a < b");
  if (grid_size < 2) throw std::invalid_argument("thm6_uniformity_check: grid_size must be >= 2");
  if (N < 8) throw std::invalid_argument("thm6_uniformity_check: N must be >= 8");
  Thm6Result r;
  if (s_limit) {
    r.s_limit = *s_limit;
  } else {
    const auto v = detect_limit(detail::mean_allowing_zero(triple, s, N), opts.tol, opts.window);
    r.s_limit = v.estimate.value_or(std::nan(""));
  }
  r.pointwise_ok = std::isfinite(r.s_limit);
  for (std::size_t i = 0; i < grid_size; ++i) {
    const double lambda = a + (b - a) * static_cast<double>(i) / static_cast<double>(grid_size - 1);
    r.lambdas.push_back(lambda);
    const auto ma = voronoi_moving_average(triple, make_window_map(u_fn, lambda), s, N);
    const double target = (1.0 - 1.0 / lambda) * r.s_limit;
    if (!tends_to(ma.c.values, target, opts.tol, opts.window)) r.pointwise_ok = false;
    r.d_quarter = std::max(r.d_quarter, std::fabs(ma.c.values[N / 4] - target));
    r.d_half = std::max(r.d_half, std::fabs(ma.c.values[N / 2] - target));
    r.d_N = std::max(r.d_N, std::fabs(ma.c.values[N] - target));
  }
  Report& rep = r.report;
  rep.title = "uniformity of the moving-average limit on [" + std::to_string(a) + ", " + std::to_string(b) + "]";
  rep.hypothesis("pointwise_limits_hold", r.pointwise_ok, r.s_limit, "every sampled lambda");
  const bool decays = r.d_N <= r.d_half + 1e-15 && r.d_half <= r.d_quarter + 1e-15;
  rep.conclusion("sup_deviation_decays", decays, r.d_N,
                 "d at N/4, N/2, N: " + std::to_string(r.d_quarter) + ", " + std::to_string(r.d_half) + ", " +
                     std::to_string(r.d_N));
  return r;
}

// ------------------------------------------------------ Pi-class criterion

struct Thm8Result {
  std::vector<double> alphas;
  /// max over x in [N/2, N] of sup_{lambda in [1, alpha]} (U(x) - U(w_lambda(x))) / u(x).
  std::vector<double> estimates;
  Report report;
};

inline Thm8Result thm8_pi_criterion(const Sequence& p, const Sequence& q, const Sequence& s, const WindowMap& m,
                                    std::vector<double> alpha_grid, std::size_t N) {
  if (alpha_grid.empty()) throw std::invalid_argument("thm8_pi_criterion: empty alpha grid");
  if (N < 4) throw std::invalid_argument("thm8_pi_criterion: N must be >= 4");
  std::sort(alpha_grid.begin(), alpha_grid.end(), std::greater<>());
  const auto U = partial_sums_U(p, q, s, N);
  Thm8Result r;
  r.alphas = alpha_grid;
  Report& rep = r.report;
  rep.title = "Pi-class criterion (ii) surrogate";
  const auto lam = lambda_membership(m.u_fn, N);
  rep.hypothesis("u_in_Lambda", lam.ok, lam.last);
  for (double alpha : alpha_grid) {
    if (!(alpha > 1.0)) throw std::invalid_argument("thm8_pi_criterion: alpha must exceed 1");
    const WindowMap ma = with_lambda(m, alpha);
    double est = -std::numeric_limits<double>::infinity();
    for (std::size_t n = N / 2; n <= N; ++n) {
      const double un = m.u_fn(static_cast<double>(n));
      auto w = detail::inverse_weight(ma, un / alpha);
      const long long lo = w ? detail::window_floor(*w) : -1;
      // lambda in [1, alpha] moves the cut over [floor(w_alpha), n].
      double min_u = U[n];
      for (long long j = std::max<long long>(lo, -1); j <= static_cast<long long>(n); ++j) {
        min_u = std::min(min_u, j >= 0 ? U[static_cast<std::size_t>(j)] : 0.0);
      }
      est = std::max(est, (U[n] - min_u) / un);
    }
    r.estimates.push_back(est);
    rep.notes.push_back("alpha " + std::to_string(alpha) + ": " + std::to_string(est));
  }
  bool finite = true;
  for (double e : r.estimates) finite = finite && std::isfinite(e);
  const bool bounded = finite && r.estimates.back() <= r.estimates.front() + 1e-12;
  rep.conclusion("estimates_bounded_as_alpha_decreases", bounded, r.estimates.back(),
                 "criterion (ii) asks for a finite liminf; no U1/U2 split is constructed");
  return r;
}

// ------------------------------------------ discrete versus continuous mean

struct Cor2Result {
  LimitVerdict discrete;
  LimitVerdict continuous;
  bool agree = false;
  Report report;
};

/// Default x grid: n + 0.37 for n in [N/2, N).
inline std::vector<double> default_continuous_grid(std::size_t N) {
  std::vector<double> g;
  for (std::size_t n = N / 2; n < N; ++n) g.push_back(static_cast<double>(n) + 0.37);
  return g;
}

inline Cor2Result cor2_discrete_continuous_check(const WeightTriple& triple, const RealFunction& u_fn,
                                                 const Sequence& s, std::size_t N, std::span<const double> x_grid,
                                                 const VerifyOptions& opts = {}) {
  Cor2Result r;
  Report& rep = r.report;
  rep.title = "discrete versus continuous mean for " + triple.label;
  const auto lam = lambda_membership(u_fn, N, opts.tol);
  rep.hypothesis("u_in_Lambda", lam.ok, lam.last);
  std::vector<double> discrete(N + 1);
  const auto U = partial_sums_U(triple.p, triple.q, s, N);
  for (std::size_t n = 0; n <= N; ++n) discrete[n] = U[n] / u_fn(static_cast<double>(n));
  r.discrete = detect_limit(discrete, opts.tol, opts.window);
  const auto cont = voronoi_mean_samples(triple, u_fn, s, x_grid);
  r.continuous = detect_limit(cont.values, opts.tol);
  r.agree = r.discrete.status == r.continuous.status &&
            (!r.discrete.converged() || std::fabs(*r.discrete.estimate - *r.continuous.estimate) <= opts.tol);
  rep.conclusion("verdicts_agree", r.agree, r.continuous.estimate.value_or(std::nan("")),
                 std::string("discrete ") + to_string(r.discrete.status) + ", continuous " +
                     to_string(r.continuous.status));
  return r;
}

}  // namespace voronoi
