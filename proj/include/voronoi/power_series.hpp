#pragma once

// The Voronoi power-series method T(x) = N(x)/D(x) with
// N(x) = sum (p o qs)_n x^n and D(x) = sum v_n x^n, and the verifiers that
// relate it to the Voronoi mean.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "voronoi/convolution.hpp"
#include "voronoi/error.hpp"
#include "voronoi/expression.hpp"
#include "voronoi/limit.hpp"
#include "voronoi/methods.hpp"
#include "voronoi/report.hpp"
#include "voronoi/sequence.hpp"
#include "voronoi/voronoi_mean.hpp"

namespace voronoi {

enum class TailBoundMode { geometric, none };

struct PowerSeriesMethod {
  Sequence p;
  Sequence q;
  Sequence v;
  double radius = std::numeric_limits<double>::infinity();
  /// Maximum number of terms. With TailBoundMode::none exactly this many
  /// are summed.
  std::size_t truncation = 1'000'000;
  TailBoundMode tail_bound_mode = TailBoundMode::geometric;
  std::string label;
};

// ------------------------------------------------------------------ radius

struct RadiusEstimate {
  double value = 0.0;
  double root_test = 0.0;   // 1 / max |v_n|^{1/n} over [3N/4, N]
  double ratio_test = 0.0;  // |v_{N-1} / v_N|, NaN when undefined
  bool infinite = false;
};

namespace detail {

/// Least squares of y on (1, log(n+1), n); returns the coefficient of n.
inline double log_linear_slope(std::span<const double> ns, std::span<const double> ys) {
  const std::size_t m = ns.size();
  double mean_l = 0.0;
  double mean_n = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    mean_l += std::log(ns[i] + 1.0);
    mean_n += ns[i];
    mean_y += ys[i];
  }
  mean_l /= m;
  mean_n /= m;
  mean_y /= m;
  double sll = 0.0;
  double sln = 0.0;
  double snn = 0.0;
  double sly = 0.0;
  double sny = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    const double l = std::log(ns[i] + 1.0) - mean_l;
    const double n = ns[i] - mean_n;
    const double y = ys[i] - mean_y;
    sll += l * l;
    sln += l * n;
    snn += n * n;
    sly += l * y;
    sny += n * y;
  }
  const double det = sll * snn - sln * sln;
  if (det == 0.0) return snn == 0.0 ? 0.0 : sny / snn;
  return (sll * sny - sln * sly) / det;
}

}  // namespace detail

/// Root test over the trailing half of 0..N. Returns infinity when the
/// root-test values collapse (zero or shrinking by more than 15% between
/// the third and fourth quarters); otherwise fits
/// log|v_n| = c + b log(n+1) - n log R on [N/2, N], which removes the
/// polynomial factor that biases the plain root test.
inline RadiusEstimate radius_evidence(const Sequence& v, std::size_t N) {
  if (N < 20) throw std::invalid_argument("estimate_radius: N must be >= 20");
  std::vector<LogTerm> lt(N + 1);
  bool any = false;
  for (std::size_t n = 0; n <= N; ++n) {
    lt[n] = v.log_term(n);
    if (lt[n].sign != 0 && !std::isfinite(lt[n].log_abs)) {
      throw evaluation_error("estimate_radius: non-finite coefficient at n = " + std::to_string(n));
    }
    any = any || lt[n].sign != 0;
  }
  if (!any) throw std::invalid_argument("estimate_radius: all coefficients are zero");

  auto root = [&lt](std::size_t n) {
    return lt[n].sign == 0 ? 0.0 : std::exp(lt[n].log_abs / static_cast<double>(n));
  };
  double early = 0.0;
  double late = 0.0;
  for (std::size_t n = N / 2; n < 3 * N / 4; ++n) early = std::max(early, root(n));
  for (std::size_t n = 3 * N / 4; n <= N; ++n) late = std::max(late, root(n));

  RadiusEstimate r;
  r.root_test = late > 0.0 ? 1.0 / late : std::numeric_limits<double>::infinity();
  r.ratio_test = (lt[N].sign != 0 && lt[N - 1].sign != 0) ? std::exp(lt[N - 1].log_abs - lt[N].log_abs)
                                                          : std::nan("");
  if (late == 0.0 || late < 0.85 * early) {
    r.infinite = true;
    r.value = std::numeric_limits<double>::infinity();
    return r;
  }
  std::vector<double> ns;
  std::vector<double> ys;
  for (std::size_t n = N / 2; n <= N; ++n) {
    if (lt[n].sign == 0) continue;
    ns.push_back(static_cast<double>(n));
    ys.push_back(lt[n].log_abs);
  }
  r.value = ns.size() >= 3 ? std::exp(-detail::log_linear_slope(ns, ys)) : r.root_test;
  return r;
}

inline double estimate_radius(const Sequence& v, std::size_t N) { return radius_evidence(v, N).value; }

// ----------------------------------------------------------- construction

/// From a registered method. Mean-type descriptors carry no radius, so it
/// is estimated from v on 0..radius_horizon.
inline PowerSeriesMethod power_series_method(const MethodDescriptor& d, std::size_t radius_horizon = 4000) {
  PowerSeriesMethod m;
  m.p = d.triple.p;
  m.q = d.triple.q;
  m.v = d.v;
  m.label = d.name;
  m.radius = d.kind == MethodKind::power_series ? d.radius : estimate_radius(d.v, radius_horizon);
  return m;
}

/// v = differences of u. Note that u given as partial sums saturates in
/// floating point (e.g. partial sums of 1/n! reach e), after which v is
/// exactly 0; use a descriptor with an explicit v for such methods.
inline PowerSeriesMethod power_series_method(const WeightTriple& triple, std::optional<double> radius = {},
                                             std::size_t radius_horizon = 4000) {
  PowerSeriesMethod m;
  m.p = triple.p;
  m.q = triple.q;
  m.v = difference_sequence(triple.u);
  m.label = triple.label;
  m.radius = radius ? *radius : estimate_radius(m.v, radius_horizon);
  return m;
}

/// x = R(1 - 2^-j), j = 1..12, or x = 2^j, j = 0..12 when R is infinite.
inline std::vector<double> default_x_grid(double radius) {
  std::vector<double> g;
  if (std::isinf(radius)) {
    for (int j = 0; j <= 12; ++j) g.push_back(std::ldexp(1.0, j));
  } else {
    for (int j = 1; j <= 12; ++j) g.push_back(radius * (1.0 - std::ldexp(1.0, -j)));
  }
  return g;
}

// -------------------------------------------------------------- evaluation

struct PowerSeriesValue {
  double x = 0.0;
  double value = 0.0;
  /// Bound on |T - T_truncated| from the geometric tail fit; NaN in
  /// TailBoundMode::none.
  double tail_bound = 0.0;
  std::size_t terms = 0;
};

namespace detail {

inline constexpr std::size_t kTailBlock = 16;
inline constexpr double kTailRel = 1e-12;
/// Beyond this many terms a dense p (infinite support, not constant) makes
/// the O(L^2) convolution impractical.
inline constexpr std::size_t kDenseCap = 1u << 14;

/// Coefficients of N(x) or D(x) as log-magnitudes, grown on demand.
class CoefficientStream {
 public:
  CoefficientStream(std::string what, Sequence seq) : what_(std::move(what)), seq_(std::move(seq)) {}
  CoefficientStream(std::string what, Sequence p, Sequence qs)
      : what_(std::move(what)), p_(std::move(p)), seq_(std::move(qs)), convolve_(true) {}

  void extend(std::size_t L) {
    if (L <= logs_.size()) return;
    const std::size_t old = logs_.size();
    logs_.resize(L);
    if (convolve_) {
      const auto a = voronoi_convolve(p_, seq_, L - 1);
      for (std::size_t n = old; n < L; ++n) logs_[n] = log_term_of(a[n]);
    } else {
      for (std::size_t n = old; n < L; ++n) logs_[n] = seq_.log_term(n);
    }
    for (std::size_t n = old; n < L; ++n) {
      const LogTerm& t = logs_[n];
      if (t.sign != 0 && !std::isfinite(t.log_abs)) {
        throw evaluation_error(what_ + " coefficient is not finite at n = " + std::to_string(n));
      }
    }
  }

  [[nodiscard]] const std::vector<LogTerm>& logs() const { return logs_; }

 private:
  std::string what_;
  Sequence p_;
  Sequence seq_;
  bool convolve_ = false;
  std::vector<LogTerm> logs_;
};

struct ScaledSum {
  double sum = 0.0;   // in units of exp(scale)
  double tail = 0.0;  // same units; infinity when no geometric bound exists yet
};

/// sum_{n<L} a_n x^n / exp(scale), and the geometric tail bound from the
/// last two blocks of kTailBlock terms.
inline ScaledSum scaled_sum(const std::vector<LogTerm>& c, std::size_t L, double log_x, double scale) {
  ScaledSum out;
  double comp = 0.0;
  std::array<double, 2> block_max{-std::numeric_limits<double>::infinity(),
                                  -std::numeric_limits<double>::infinity()};
  for (std::size_t n = 0; n < L; ++n) {
    if (c[n].sign == 0) continue;
    const double g = c[n].log_abs + (n == 0 ? 0.0 : static_cast<double>(n) * log_x);
    const double y = c[n].sign * std::exp(g - scale) - comp;
    const double t = out.sum + y;
    comp = (t - out.sum) - y;
    out.sum = t;
    if (n + kTailBlock >= L) {
      block_max[1] = std::max(block_max[1], g);
    } else if (n + 2 * kTailBlock >= L) {
      block_max[0] = std::max(block_max[0], g);
    }
  }
  if (block_max[1] == -std::numeric_limits<double>::infinity()) {
    out.tail = 0.0;
  } else if (block_max[0] == -std::numeric_limits<double>::infinity()) {
    out.tail = std::numeric_limits<double>::infinity();
  } else {
    const double log_r = (block_max[1] - block_max[0]) / static_cast<double>(kTailBlock);
    if (log_r >= 0.0) {
      out.tail = std::numeric_limits<double>::infinity();
    } else {
      const double r = std::exp(log_r);
      out.tail = std::exp(block_max[1] - scale) * r / (1.0 - r);
    }
  }
  return out;
}

inline double max_scaled_log(const std::vector<LogTerm>& c, std::size_t L, double log_x) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < L; ++n) {
    if (c[n].sign == 0) continue;
    m = std::max(m, c[n].log_abs + (n == 0 ? 0.0 : static_cast<double>(n) * log_x));
  }
  return m;
}

/// A series whose trailing terms are all zero while its last nonzero term
/// sits at the bottom of the double range and was still growing has
/// underflowed, not terminated.
inline void check_underflow(const std::vector<LogTerm>& c, std::size_t L, double log_x, const std::string& what) {
  if (L < 2 * kTailBlock) return;
  for (std::size_t n = L - kTailBlock; n < L; ++n) {
    if (c[n].sign != 0) return;
  }
  std::size_t k = L - kTailBlock;
  while (k > 0 && c[k].sign == 0) --k;
  if (c[k].sign == 0 || c[k].log_abs > -700.0) return;
  std::size_t j = k;
  while (j > 0 && c[j - 1].sign == 0) --j;
  if (j == 0) return;
  const double gk = c[k].log_abs + static_cast<double>(k) * log_x;
  const double gj = c[j - 1].log_abs + static_cast<double>(j - 1) * log_x;
  if (gk >= gj) {
    throw evaluation_error(what + " coefficients underflow after n = " + std::to_string(k) +
                           " while the terms are still growing");
  }
}

inline CoefficientStream numerator_stream(const PowerSeriesMethod& m, const Sequence& s) {
  if (m.p.is_constant_one()) return {"N(x)", times(m.q, s)};
  return {"N(x)", m.p, times(m.q, s)};
}

inline std::size_t term_cap(const PowerSeriesMethod& m) {
  if (!m.p.is_constant_one() && !m.p.support()) return std::min(m.truncation, kDenseCap);
  return m.truncation;
}

}  // namespace detail

/// T(x) = N(x)/D(x) summed in log-scaled form, so terms such as x^n/n! at
/// large x neither overflow nor underflow. The number of terms doubles
/// from 256 until both geometric tail bounds fall below 1e-12 of their
/// partial sums; reaching the cap is an error.
inline PowerSeriesValue eval_T(const PowerSeriesMethod& m, const Sequence& s, double x) {
  if (!(x >= 0.0)) throw std::invalid_argument("eval_T: x must be >= 0");
  if (!(x < m.radius)) throw std::invalid_argument("eval_T: x must lie below the radius of convergence");
  PowerSeriesValue out;
  out.x = x;
  auto num = detail::numerator_stream(m, s);
  detail::CoefficientStream den("D(x)", m.v);
  if (x == 0.0) {
    const double v0 = m.v(0);
    if (v0 == 0.0) throw evaluation_error("eval_T: D(0) = v_0 = 0");
    out.value = voronoi_convolve_qs(m.p, m.q, s, 0)[0] / v0;
    out.terms = 1;
    return out;
  }

  const double log_x = std::log(x);
  const std::size_t cap = detail::term_cap(m);
  const bool fixed = m.tail_bound_mode == TailBoundMode::none;
  std::size_t L = fixed ? cap : std::min<std::size_t>(256, cap);
  for (;;) {
    num.extend(L);
    den.extend(L);
    const double scale = std::max(detail::max_scaled_log(num.logs(), L, log_x),
                                  detail::max_scaled_log(den.logs(), L, log_x));
    if (!std::isfinite(scale)) throw evaluation_error("eval_T: D(x) vanishes identically");
    const auto n_sum = detail::scaled_sum(num.logs(), L, log_x, scale);
    const auto d_sum = detail::scaled_sum(den.logs(), L, log_x, scale);
    const bool done = fixed || (n_sum.tail <= detail::kTailRel * std::fabs(n_sum.sum) &&
                                d_sum.tail <= detail::kTailRel * std::fabs(d_sum.sum));
    if (done) {
      detail::check_underflow(num.logs(), L, log_x, "N(x)");
      detail::check_underflow(den.logs(), L, log_x, "D(x)");
      if (d_sum.sum == 0.0) throw evaluation_error("eval_T: D(x) = 0 at x = " + std::to_string(x));
      out.value = n_sum.sum / d_sum.sum;
      out.tail_bound =
          fixed ? std::nan("") : (n_sum.tail + std::fabs(out.value) * d_sum.tail) / std::fabs(d_sum.sum);
      out.terms = L;
      return out;
    }
    if (L >= cap) {
      throw evaluation_error("eval_T: " + std::to_string(cap) + " terms reached before the tail bound fell below " +
                             "1e-12 at x = " + std::to_string(x));
    }
    L = std::min(2 * L, cap);
  }
}

/// log D(x) = log sum v_n x^n, with the same truncation rule as eval_T.
/// -inf when D(x) = 0; throws when D(x) < 0.
inline double log_eval_D(const PowerSeriesMethod& m, double x) {
  if (!(x > 0.0 && x < m.radius)) throw std::invalid_argument("eval_D: x must lie in (0, R)");
  detail::CoefficientStream den("D(x)", m.v);
  const double log_x = std::log(x);
  std::size_t L = std::min<std::size_t>(256, m.truncation);
  for (;;) {
    den.extend(L);
    const double scale = detail::max_scaled_log(den.logs(), L, log_x);
    if (!std::isfinite(scale)) return -std::numeric_limits<double>::infinity();
    const auto d = detail::scaled_sum(den.logs(), L, log_x, scale);
    if (d.tail <= detail::kTailRel * std::fabs(d.sum)) {
      if (d.sum < 0.0) throw evaluation_error("log_eval_D: D(x) < 0 at x = " + std::to_string(x));
      return std::log(d.sum) + scale;
    }
    if (L >= m.truncation) throw evaluation_error("eval_D: tail not controlled at x = " + std::to_string(x));
    L = std::min(2 * L, m.truncation);
  }
}

/// D(x) = sum v_n x^n on its own, with the same truncation rule as eval_T.
inline double eval_D(const PowerSeriesMethod& m, double x) {
  if (!(x > 0.0 && x < m.radius)) throw std::invalid_argument("eval_D: x must lie in (0, R)");
  detail::CoefficientStream den("D(x)", m.v);
  const double log_x = std::log(x);
  std::size_t L = std::min<std::size_t>(256, m.truncation);
  for (;;) {
    den.extend(L);
    const double scale = detail::max_scaled_log(den.logs(), L, log_x);
    if (!std::isfinite(scale)) return 0.0;
    const auto d = detail::scaled_sum(den.logs(), L, log_x, scale);
    if (d.tail <= detail::kTailRel * std::fabs(d.sum)) return d.sum * std::exp(scale);
    if (L >= m.truncation) throw evaluation_error("eval_D: tail not controlled at x = " + std::to_string(x));
    L = std::min(2 * L, m.truncation);
  }
}

/// T at every grid point; points that cannot be evaluated are returned in
/// `failures` rather than aborting the sweep.
struct PowerSeriesSweep {
  std::vector<PowerSeriesValue> values;
  std::vector<std::string> failures;
};

inline PowerSeriesSweep eval_T_grid(const PowerSeriesMethod& m, const Sequence& s, std::span<const double> grid) {
  PowerSeriesSweep out;
  for (double x : grid) {
    try {
      out.values.push_back(eval_T(m, s, x));
    } catch (const evaluation_error& e) {
      out.failures.push_back(e.what());
    }
  }
  return out;
}

/// The reduced form (P, 1, v, v) applied to r_n = (p o qs)_n / v_n, which
/// has the same T(x) as (P, p, q, v) applied to s.
struct ReducedForm {
  PowerSeriesMethod method;
  Sequence r;
};

inline ReducedForm reduced_form(const PowerSeriesMethod& m, const Sequence& s) {
  ReducedForm out;
  out.method = m;
  out.method.p = builtin::one();
  out.method.q = m.v;
  out.method.label = m.label + " reduced";
  const std::string label = "(p o qs)/v";
  if (m.p.is_constant_one()) {
    const Sequence qs = times(m.q, s);
    const Sequence v = m.v;
    auto log_fn = [qs, v](std::size_t n) -> LogTerm {
      const LogTerm a = qs.log_term(n);
      const LogTerm b = v.log_term(n);
      if (b.sign == 0) throw evaluation_error("reduced form: v_n = 0 at n = " + std::to_string(n));
      if (a.sign == 0) return {};
      return {a.log_abs - b.log_abs, a.sign * b.sign};
    };
    out.r = Sequence::from_function(
        label,
        [log_fn](std::size_t n) {
          const LogTerm t = log_fn(n);
          return t.sign == 0 ? 0.0 : t.sign * std::exp(t.log_abs);
        },
        0, log_fn);
  } else {
    const Sequence p = m.p;
    const Sequence q = m.q;
    const Sequence v = m.v;
    out.r = Sequence::memoized(label, [p, q, s, v](std::size_t count) {
      auto a = voronoi_convolve_qs(p, q, s, count - 1);
      const auto vv = v.terms(count - 1);
      for (std::size_t n = 0; n < count; ++n) a[n] /= vv[n];
      return a;
    });
  }
  return out;
}

// ------------------------------------------------------------ evidence

struct RegularVariationEvidence {
  double rho = 0.0;
  double max_relative_error = 0.0;  // max |v_[lambda n] / v_n / lambda^rho - 1|
  bool ok = false;
};

/// rho from v_{2n}/v_n at n = N/8, then v_{ceil(lambda n)}/v_n against
/// lambda^rho for lambda in {2, 4, 8} and n in [N/16, N/8]; 5% tolerance.
inline RegularVariationEvidence regular_variation_evidence(const Sequence& v, std::size_t N, double tol = 0.05) {
  if (N < 64) throw std::invalid_argument("regular_variation_evidence: N must be >= 64");
  RegularVariationEvidence e;
  const auto terms = v.terms(N);
  const std::size_t n0 = N / 8;
  for (std::size_t n = N / 16; n <= N; ++n) {
    if (!(terms[n] > 0.0)) return e;
  }
  e.rho = std::log(terms[2 * n0] / terms[n0]) / std::log(2.0);
  for (double lam : {2.0, 4.0, 8.0}) {
    for (std::size_t n = N / 16; n <= n0; ++n) {
      const auto k = static_cast<std::size_t>(std::ceil(lam * static_cast<double>(n)));
      const double ratio = terms[k] / terms[n] / std::pow(lam, e.rho);
      e.max_relative_error = std::max(e.max_relative_error, std::fabs(ratio - 1.0));
    }
  }
  e.ok = e.max_relative_error <= tol;
  return e;
}

struct SlowVariationEvidence {
  std::vector<double> deviations;  // max_lambda |l(lambda x)/l(x) - 1| at x = N, N^2, N^4
  bool ok = false;
};

/// Within 5% at the largest x, or shrinking strictly along the x ladder.
inline SlowVariationEvidence slow_variation_evidence(const RealFunction& ell, double N, double tol = 0.05) {
  SlowVariationEvidence e;
  double x = N;
  for (int i = 0; i < 3; ++i) {
    double dev = 0.0;
    for (double lam : {2.0, 4.0, 8.0}) dev = std::max(dev, std::fabs(ell(lam * x) / ell(x) - 1.0));
    e.deviations.push_back(dev);
    x = std::min(x * x, 1e300);
  }
  const auto& d = e.deviations;
  e.ok = d.back() <= tol || (d[2] < d[1] && d[1] < d[0]);
  return e;
}

// ------------------------------------------------------------ verifiers

struct PowerSeriesOptions {
  double tol = 1e-2;
  std::size_t window = 0;
  /// Radius to use instead of the estimate from v.
  std::optional<double> radius;
};

struct PowerSeriesCheck {
  double radius = 0.0;
  LimitVerdict mean_limit;
  LimitVerdict series_limit;  // detect_limit over T along the grid (window 2)
  std::vector<PowerSeriesValue> samples;
  double deviation = std::nan("");  // |T(x_last) - s|
  Report report;
};

namespace detail {

inline PowerSeriesMethod checked_method(const WeightTriple& triple, const PowerSeriesOptions& opts, std::size_t N) {
  return power_series_method(triple, opts.radius, std::max<std::size_t>(N, 20));
}

inline void sweep_into(PowerSeriesCheck& r, const PowerSeriesMethod& m, const Sequence& s,
                       std::vector<double> x_grid, double tol) {
  if (x_grid.empty()) x_grid = default_x_grid(m.radius);
  std::sort(x_grid.begin(), x_grid.end());
  auto sweep = eval_T_grid(m, s, x_grid);
  r.samples = std::move(sweep.values);
  for (auto& f : sweep.failures) r.report.notes.push_back("skipped: " + f);
  std::vector<double> T;
  for (const auto& v : r.samples) T.push_back(v.value);
  if (T.size() >= 2) r.series_limit = detect_limit(T, tol, 2);
}

inline std::vector<double> ratio_r(const PowerSeriesMethod& m, const Sequence& s, std::size_t N) {
  return reduced_form(m, s).r.terms(N);
}

}  // namespace detail

/// Abelian direction: the mean limit s carries over to T(x) -> s as x -> R-.
inline PowerSeriesCheck thm9i_abelian_check(const WeightTriple& triple, const Sequence& s,
                                            std::vector<double> x_grid, std::size_t N,
                                            const PowerSeriesOptions& opts = {}) {
  if (N < 20) throw std::invalid_argument("thm9i_abelian_check: N must be >= 20");
  PowerSeriesCheck r;
  Report& rep = r.report;
  rep.title = "Abelian: mean => power series for " + triple.label;
  const auto m = detail::checked_method(triple, opts, N);
  r.radius = m.radius;

  const auto v = m.v.terms(N);
  double v_min = v[0];
  for (double x : v) v_min = std::min(v_min, x);
  rep.hypothesis("v_positive", v_min > 0.0, v_min, "min v_n, n <= N");
  const auto u = triple.u.terms(N);
  rep.hypothesis("u_diverges", diverges_to_infinity_evidence(u), u[N], "u_N");
  rep.hypothesis("radius_finite", std::isfinite(m.radius) && m.radius > 0.0, m.radius, "R");

  r.mean_limit = detect_limit(voronoi_mean(triple, s, N).values, opts.tol, opts.window);
  rep.hypothesis("mean_converges", r.mean_limit.converged(), r.mean_limit.estimate.value_or(std::nan("")),
                 to_string(r.mean_limit.status));

  detail::sweep_into(r, m, s, std::move(x_grid), opts.tol);
  const bool have = r.mean_limit.converged() && !r.samples.empty();
  if (have) r.deviation = std::fabs(r.samples.back().value - *r.mean_limit.estimate);
  rep.conclusion("T_to_mean_limit", have && r.deviation <= opts.tol, r.deviation,
                 r.samples.empty() ? "no grid point evaluated"
                                   : "|T(x) - s| at x = " + std::to_string(r.samples.back().x));
  return r;
}

struct TauberianPowerCheck : PowerSeriesCheck {
  double lower_bound_C = 0.0;  // max(0, -min r_n)
  RegularVariationEvidence v_variation;
  LimitVerdict conclusion_limit;
};

/// Tauberian direction under the one-sided condition
/// (p o qs)_n / v_n >= -C (O_L(1)).
inline TauberianPowerCheck thm9ii_tauberian_check(const WeightTriple& triple, const Sequence& s,
                                                  std::vector<double> x_grid, std::size_t N,
                                                  const PowerSeriesOptions& opts = {}) {
  if (N < 64) throw std::invalid_argument("thm9ii_tauberian_check: N must be >= 64");
  TauberianPowerCheck r;
  Report& rep = r.report;
  rep.title = "Tauberian O_L(1): power series => mean for " + triple.label;
  const auto m = detail::checked_method(triple, opts, N);
  r.radius = m.radius;

  r.v_variation = regular_variation_evidence(m.v, N);
  rep.hypothesis("v_regularly_varying", r.v_variation.ok, r.v_variation.max_relative_error,
                 "evidence; rho ~ " + std::to_string(r.v_variation.rho));
  rep.hypothesis("rho_at_least_minus_1", r.v_variation.rho >= -1.0 - 0.05, r.v_variation.rho);
  const auto u = triple.u.terms(N);
  rep.hypothesis("u_diverges", diverges_to_infinity_evidence(u), u[N], "u_N");
  rep.hypothesis("radius_is_1", std::fabs(m.radius - 1.0) <= 1e-3, m.radius, "R");

  const auto rn = detail::ratio_r(m, s, N);
  std::vector<double> neg(rn.size());
  for (std::size_t n = 0; n < rn.size(); ++n) neg[n] = std::max(0.0, -rn[n]);
  const auto below = bounded_evidence(neg);
  r.lower_bound_C = *std::max_element(neg.begin(), neg.end());
  rep.hypothesis("ratio_O_L_1", below.bounded, r.lower_bound_C, "(p o qs)_n / v_n >= -C, C over n <= N");

  detail::sweep_into(r, m, s, std::move(x_grid), opts.tol);
  rep.hypothesis("T_converges", r.series_limit.converged(), r.series_limit.estimate.value_or(std::nan("")),
                 "T along the x grid");

  r.mean_limit = detect_limit(voronoi_mean(triple, s, N).values, opts.tol, opts.window);
  r.conclusion_limit = r.mean_limit;
  const double target = r.series_limit.estimate.value_or(std::nan(""));
  rep.conclusion("mean_to_T_limit", r.series_limit.converged() && r.mean_limit.converged_to(target, opts.tol),
                 r.mean_limit.estimate.value_or(std::nan("")), to_string(r.mean_limit.status));
  return r;
}

enum class KaramataForm {
  /// D(x) (-log x)^rho / l(-1/log x) -> 1, which is what the Laplace
  /// transform of u(x) = x^rho l(x) / Gamma(1+rho) gives.
  laplace,
  /// The same ratio with an extra factor (1 - x).
  printed
};

struct KaramataOptions {
  double tol = 1e-2;
  KaramataForm form = KaramataForm::laplace;
  /// u(x) = x^rho l(x) / Gamma(1+rho) when true, x^rho l(x) otherwise (the
  /// normalisation ratio then tends to Gamma(1+rho)).
  bool gamma_in_u = true;
};

struct KaramataCheck {
  std::vector<PowerSeriesValue> samples;
  std::vector<double> normalisation;  // hypothesis ratio along the x grid
  double normalisation_target = 1.0;
  LimitVerdict continuous_mean;
  LimitVerdict series_limit;
  std::vector<double> lambdas;
  std::vector<double> converse_estimates;  // one per lambda
  double laplace_identity_residual = 0.0;
  Report report;
};

/// Hardy-Littlewood-Karamata form. The discrete normalisers are
/// u_n = u(n+1) with u(x) = x^rho l(x) [/ Gamma(1+rho)], so u_0 > 0 and
/// D(x) = sum v_n x^n with v = differences of u_n.
inline KaramataCheck thm9iii_karamata_check(const Sequence& p, const Sequence& q, const Sequence& s, double rho,
                                            const RealFunction& ell, std::vector<double> x_grid,
                                            std::vector<double> lambda_grid, std::size_t N,
                                            const KaramataOptions& opts = {}) {
  if (N < 64) throw std::invalid_argument("thm9iii_karamata_check: N must be >= 64");
  KaramataCheck r;
  Report& rep = r.report;
  rep.title = "Karamata: continuous mean <=> power series";
  const double gamma = std::tgamma(1.0 + rho);
  const double norm = opts.gamma_in_u ? gamma : 1.0;
  RealFunction u_fn{[rho, ell, norm](double x) { return std::pow(x, rho) * ell(x) / norm; }, {}, "x^rho l(x)"};
  Sequence u = Sequence::from_function("u(n+1)", [u_fn](std::size_t n) { return u_fn(static_cast<double>(n) + 1.0); });
  const auto triple = make_triple(p, q, u, "karamata");
  PowerSeriesMethod m = power_series_method(triple, 1.0);
  r.normalisation_target = opts.gamma_in_u ? 1.0 : gamma;

  rep.hypothesis("rho_gt_minus_1", rho > -1.0, rho);
  const auto U = partial_sums_U(p, q, s, N);
  const double U_min = *std::min_element(U.begin(), U.end());
  rep.hypothesis("U_nonnegative", U_min >= 0.0, U_min, "min U(n), n <= N");
  const auto slow = slow_variation_evidence(ell, static_cast<double>(N));
  rep.hypothesis("l_slowly_varying", slow.ok, slow.deviations.back(), "evidence at x = N, N^2, N^4");

  if (x_grid.empty()) x_grid = default_x_grid(1.0);
  std::sort(x_grid.begin(), x_grid.end());
  for (double x : x_grid) {
    const double sigma = -std::log(x);
    const double D = eval_D(m, x);
    double h = D * std::pow(sigma, rho) / ell(1.0 / sigma);
    if (opts.form == KaramataForm::printed) h *= 1.0 - x;
    r.normalisation.push_back(h);
  }
  const double h_last = r.normalisation.back();
  rep.hypothesis("D_normalisation", std::fabs(h_last - r.normalisation_target) <= opts.tol * r.normalisation_target,
                 h_last,
                 std::string(opts.form == KaramataForm::laplace ? "laplace" : "printed") + " form, target " +
                     std::to_string(r.normalisation_target));

  // Continuous mean t_x = U(x)/u(x) at x = n + 1/2 over [N/2, N).
  std::vector<double> tx;
  for (std::size_t n = N / 2; n < N; ++n) tx.push_back(U[n] / u_fn(static_cast<double>(n) + 0.5));
  r.continuous_mean = detect_limit(tx, opts.tol);
  rep.hypothesis("s_nonnegative", !r.continuous_mean.converged() || *r.continuous_mean.estimate >= -opts.tol,
                 r.continuous_mean.estimate.value_or(std::nan("")));

  auto sweep = eval_T_grid(m, s, x_grid);
  r.samples = std::move(sweep.values);
  for (auto& f : sweep.failures) rep.notes.push_back("skipped: " + f);
  std::vector<double> T;
  for (const auto& v : r.samples) T.push_back(v.value);
  if (T.size() >= 2) r.series_limit = detect_limit(T, opts.tol, 2);

  // Laplace-Stieltjes cross-check by direct summation: for the step
  // function U, s int e^{-sx} U(x) dx = (1 - e^{-s}) sum U_n e^{-ns}, which
  // equals sum (p o qs)_n e^{-ns} = N(e^{-s}).
  {
    const auto a = voronoi_convolve_qs(p, q, s, N);
    for (double sig : {0.05, 0.1, 0.5}) {
      double lhs = 0.0;
      double rhs = 0.0;
      double mag = 0.0;
      for (std::size_t n = 0; n <= N; ++n) {
        const double e = std::exp(-sig * static_cast<double>(n));
        lhs += U[n] * e;
        rhs += a[n] * e;
        mag += std::fabs(a[n]) * e;
      }
      lhs *= -std::expm1(-sig);
      r.laplace_identity_residual = std::max(r.laplace_identity_residual, std::fabs(lhs - rhs) / std::max(1.0, mag));
    }
    rep.notes.push_back("truncated at N; the identity carries a tail term U_N e^{-(N+1)s} below the check's scale");
  }
  rep.conclusion("laplace_identity", r.laplace_identity_residual <= 1e-9, r.laplace_identity_residual,
                 "(1-e^-s) sum U_n e^-ns vs sum (p o qs)_n e^-ns");

  if (r.continuous_mean.converged()) {
    const bool ok = r.series_limit.converged_to(*r.continuous_mean.estimate, opts.tol);
    rep.conclusion("forward_T_to_s", ok, r.series_limit.estimate.value_or(std::nan("")), "continuous mean converged");
  }

  // Converse condition: min over x in [N/4, N/lambda] of
  // min_{x <= m <= lambda x} (U_m - U_x) / (x^rho l(x)).
  if (lambda_grid.empty()) lambda_grid = {2.0, 1.5, 1.2, 1.1, 1.05};
  std::sort(lambda_grid.begin(), lambda_grid.end(), std::greater<>());
  for (double lam : lambda_grid) {
    if (!(lam > 1.0)) throw std::invalid_argument("thm9iii_karamata_check: lambda must exceed 1");
    const auto hi = static_cast<std::size_t>(static_cast<double>(N) / lam);
    double est = 0.0;
    const std::size_t step = std::max<std::size_t>(1, (hi - N / 4) / 200);
    for (std::size_t x = std::max<std::size_t>(1, N / 4); x <= hi; x += step) {
      const auto top = std::min(N, static_cast<std::size_t>(std::floor(lam * static_cast<double>(x))));
      double lo = 0.0;
      for (std::size_t k = x; k <= top; ++k) lo = std::min(lo, U[k] - U[x]);
      est = std::min(est, lo / (std::pow(static_cast<double>(x), rho) * ell(static_cast<double>(x))));
    }
    r.lambdas.push_back(lam);
    r.converse_estimates.push_back(est);
  }
  const double cond = r.converse_estimates.back();
  if (r.series_limit.converged()) {
    const bool mean_ok = r.continuous_mean.converged_to(*r.series_limit.estimate, opts.tol);
    const bool cond_ok = cond >= -opts.tol;
    rep.conclusion("converse_iff_condition", mean_ok == cond_ok, cond,
                   "condition at lambda = " + std::to_string(r.lambdas.back()) + (cond_ok ? " holds" : " fails"));
  } else {
    rep.notes.push_back("T did not settle on the grid; converse not assessed");
  }
  return r;
}

enum class RatioMode { iv, v };

struct RatioCheck : PowerSeriesCheck {
  double difference_bound = 0.0;  // C for mode iv, trailing max |d_n|/w_n for mode v
  LimitVerdict ratio_limit;       // r_n = (p o qs)_n / v_n
};

/// Power-series limit => r_n -> s under a difference condition on r_n.
inline RatioCheck thm9iv_v_ratio_check(const WeightTriple& triple, const Sequence& s, RatioMode mode,
                                       std::vector<double> x_grid, std::size_t N,
                                       const PowerSeriesOptions& opts = {}) {
  if (N < 64) throw std::invalid_argument("thm9iv_v_ratio_check: N must be >= 64");
  RatioCheck r;
  Report& rep = r.report;
  rep.title = std::string("ratio Tauberian (") + (mode == RatioMode::iv ? "iv" : "v") + ") for " + triple.label;
  const auto m = detail::checked_method(triple, opts, N);
  r.radius = m.radius;
  const auto v = m.v.terms(N);
  const auto u = triple.u.terms(N);

  if (mode == RatioMode::iv) {
    const auto rv = regular_variation_evidence(m.v, N);
    rep.hypothesis("v_regularly_varying", rv.ok, rv.max_relative_error, "evidence; rho ~ " + std::to_string(rv.rho));
    const double nearest = std::round(rv.rho);
    const bool excluded = nearest >= 0.0 && std::fabs(rv.rho - nearest) <= 0.05;
    rep.hypothesis("rho_admissible", rv.rho >= -1.0 - 0.05 && !excluded, rv.rho, "rho >= -1, rho not in {0,1,...}");
  } else {
    double v_min = v[0];
    for (double x : v) v_min = std::min(v_min, x);
    rep.hypothesis("v_positive", v_min > 0.0, v_min);
    std::vector<double> nv(N + 1);
    for (std::size_t n = 0; n <= N; ++n) nv[n] = static_cast<double>(n) * v[n];
    const auto b = bounded_evidence(nv);
    rep.hypothesis("v_O_1_over_n", b.bounded, nv[N], "n v_n");
  }
  rep.hypothesis("u_diverges", diverges_to_infinity_evidence(u), u[N], "u_N");
  rep.hypothesis("radius_is_1", std::fabs(m.radius - 1.0) <= 1e-3, m.radius, "R");

  const auto rn = detail::ratio_r(m, s, N);
  std::vector<double> scaled(N + 1, 0.0);  // (r_n - r_{n-1}) / (v_n / u_n)
  for (std::size_t n = 1; n <= N; ++n) scaled[n] = (rn[n] - rn[n - 1]) / (v[n] / u[n]);
  if (mode == RatioMode::iv) {
    std::vector<double> neg(N + 1);
    for (std::size_t n = 0; n <= N; ++n) neg[n] = std::max(0.0, -scaled[n]);
    r.difference_bound = *std::max_element(neg.begin(), neg.end());
    rep.hypothesis("difference_O_L", bounded_evidence(neg).bounded, r.difference_bound,
                   "r_n - r_{n-1} >= -C v_n/u_n");
  } else {
    std::vector<double> mag(N + 1);
    for (std::size_t n = 0; n <= N; ++n) mag[n] = std::fabs(scaled[n]);
    r.difference_bound = window_max(mag, N / 2, N);
    rep.hypothesis("difference_o", tends_to(mag, 0.0, opts.tol, opts.window), r.difference_bound,
                   "|r_n - r_{n-1}| / (v_n/u_n) -> 0");
  }

  detail::sweep_into(r, m, s, std::move(x_grid), opts.tol);
  rep.hypothesis("T_converges", r.series_limit.converged(), r.series_limit.estimate.value_or(std::nan("")),
                 "T along the x grid");
  r.ratio_limit = detect_limit(rn, opts.tol, opts.window);
  const double target = r.series_limit.estimate.value_or(std::nan(""));
  rep.conclusion("ratio_to_T_limit", r.series_limit.converged() && r.ratio_limit.converged_to(target, opts.tol),
                 r.ratio_limit.estimate.value_or(std::nan("")), to_string(r.ratio_limit.status));
  return r;
}

}  // namespace voronoi
