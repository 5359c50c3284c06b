#pragma once

// The Voronoi mean t_n = (p*qs)_n / u_n, its continuous variant, and the
// finite-horizon verifiers built on it: regularity, the decomposition and
// limitation theorems, kernel inversion, the Tauberian conditions (TCO),
// Kronecker's lemma and the inclusion theorem.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
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

namespace voronoi {

enum class TransformKind { mean, moving_average, continuous_samples };

struct TransformPrefix {
  std::vector<double> values;
  /// Sample points for continuous_samples; empty for the discrete kinds.
  std::vector<double> abscissae;
  std::string method;
  std::size_t horizon = 0;
  TransformKind kind = TransformKind::mean;
  std::vector<std::string> flags;
};

/// Tolerances shared by the theorem verifiers. window = 0 selects
/// ceil(N/100).
struct VerifyOptions {
  double tol = 1e-2;
  std::size_t window = 0;
};

/// t_0..t_N.
inline TransformPrefix voronoi_mean(const WeightTriple& triple, const Sequence& s, std::size_t N) {
  const auto u = triple.normalisers(N);
  const auto U = partial_sums_U(triple.p, triple.q, s, N);
  TransformPrefix out;
  out.method = triple.label;
  out.horizon = N;
  out.kind = TransformKind::mean;
  out.values.resize(N + 1);
  for (std::size_t n = 0; n <= N; ++n) out.values[n] = U[n] / u[n];
  return out;
}

/// t_n through the rewritten form (1/u_n) sum_{k<=n} (p o qs)_k.
inline std::vector<double> voronoi_mean_via_differences(const WeightTriple& triple, const Sequence& s,
                                                        std::size_t N) {
  const auto u = triple.normalisers(N);
  const auto d = voronoi_convolve_qs(triple.p, triple.q, s, N);
  std::vector<double> t(N + 1);
  double acc = 0.0;
  for (std::size_t n = 0; n <= N; ++n) {
    acc += d[n];
    t[n] = acc / u[n];
  }
  return t;
}

/// t_x = U(x) / u(x).
inline double voronoi_mean_continuous(const WeightTriple& triple, const RealFunction& u_fn,
                                      const Sequence& s, double x) {
  const double ux = u_fn(x);
  if (ux == 0.0 || !std::isfinite(ux)) {
    throw evaluation_error("voronoi_mean_continuous: u(x) = 0 or non-finite at x = " +
                           std::to_string(x));
  }
  return partial_sum_U(triple.p, triple.q, s, x) / ux;
}

/// t_x on a grid of nonnegative points, sharing one evaluation of U.
inline TransformPrefix voronoi_mean_samples(const WeightTriple& triple, const RealFunction& u_fn,
                                            const Sequence& s, std::span<const double> x_grid) {
  TransformPrefix out;
  out.method = triple.label;
  out.kind = TransformKind::continuous_samples;
  if (x_grid.empty()) return out;
  double xmax = 0.0;
  for (double x : x_grid) {
    if (!(x >= 0.0)) throw std::invalid_argument("voronoi_mean_samples: x must be >= 0");
    xmax = std::max(xmax, x);
  }
  const auto M = static_cast<std::size_t>(std::floor(xmax));
  const auto U = partial_sums_U(triple.p, triple.q, s, M);
  out.horizon = M;
  for (double x : x_grid) {
    const double ux = u_fn(x);
    if (ux == 0.0 || !std::isfinite(ux)) {
      throw evaluation_error("voronoi_mean_samples: u(x) = 0 or non-finite at x = " +
                             std::to_string(x));
    }
    out.abscissae.push_back(x);
    out.values.push_back(U[static_cast<std::size_t>(std::floor(x))] / ux);
  }
  return out;
}

/// Largest n <= N such that every nonzero p_k, q_k, u_k (k <= n) has
/// magnitude at least 1e-290, i.e. products of terms stay normal doubles.
inline std::size_t representable_horizon(const WeightTriple& triple, std::size_t N) {
  constexpr double floor_mag = 1e-290;
  for (std::size_t n = 0; n <= N; ++n) {
    for (const Sequence* seq : {&triple.p, &triple.q, &triple.u}) {
      const double v = (*seq)(n);
      if (v != 0.0 && std::fabs(v) < floor_mag) return n == 0 ? 0 : n - 1;
    }
  }
  return N;
}

// ---------------------------------------------------------------- regularity

struct RegularityOptions {
  /// Tolerance on |sum p_{n-k} q_k / u_n - 1| over the trailing window and
  /// on the size of the condition (ii) terms at n = N.
  double tol = 1e-6;
  double cond_ii_tol = 1e-3;
  std::size_t window = 0;
};

struct RegularityReport {
  std::size_t horizon = 0;
  std::vector<double> cond_i_ratio;  // sum |p_{n-k} q_k| / |u_n|
  double cond_i_sup = 0.0;
  bool cond_i_bounded = false;
  std::size_t cond_ii_K = 0;
  double cond_ii_at_N = 0.0;     // max_{k<=K} |p_{N-k} q_k / u_N|
  double cond_ii_at_half = 0.0;  // same at n = N/2
  bool cond_ii_vanishing = false;
  std::vector<double> cond_iii;  // sum p_{n-k} q_k / u_n
  double cond_iii_at_N = 0.0;
  bool cond_iii_ok = false;
  bool regular_evidence = false;
  std::string verdict;
  Report report;
};

namespace detail {

inline Sequence abs_sequence(const Sequence& a) {
  if (auto c = a.constant_value()) return Sequence::constant(std::fabs(*c));
  return Sequence::from_function("|" + a.label() + "|", [a](std::size_t n) { return std::fabs(a(n)); });
}

}  // namespace detail

inline RegularityReport regularity_report(const WeightTriple& triple, std::size_t N,
                                          const RegularityOptions& opts = {}) {
  if (N < 10) throw std::invalid_argument("regularity_report: N must be >= 10");
  RegularityReport r;
  r.horizon = N;
  const auto u = triple.normalisers(N);
  const auto pv = triple.p.terms(N);
  const auto qv = triple.q.terms(N);
  const auto S = cauchy_convolve(triple.p, triple.q, N);
  const auto A = cauchy_convolve(detail::abs_sequence(triple.p), detail::abs_sequence(triple.q), N);

  r.cond_i_ratio.resize(N + 1);
  r.cond_iii.resize(N + 1);
  for (std::size_t n = 0; n <= N; ++n) {
    r.cond_i_ratio[n] = A[n] / std::fabs(u[n]);
    r.cond_iii[n] = S[n] / u[n];
    r.cond_i_sup = std::max(r.cond_i_sup, r.cond_i_ratio[n]);
  }
  r.cond_i_bounded = bounded_evidence(r.cond_i_ratio).bounded;

  r.cond_ii_K = std::min<std::size_t>(20, N / 2);
  auto cond_ii_max = [&](std::size_t n) {
    double m = 0.0;
    for (std::size_t k = 0; k <= r.cond_ii_K && k <= n; ++k) {
      m = std::max(m, std::fabs(pv[n - k] * qv[k] / u[n]));
    }
    return m;
  };
  r.cond_ii_at_N = cond_ii_max(N);
  r.cond_ii_at_half = cond_ii_max(N / 2);
  r.cond_ii_vanishing = r.cond_ii_at_N <= opts.cond_ii_tol || r.cond_ii_at_N < r.cond_ii_at_half;

  r.cond_iii_at_N = r.cond_iii[N];
  r.cond_iii_ok = tends_to(r.cond_iii, 1.0, opts.tol, opts.window);

  r.regular_evidence = r.cond_i_bounded && r.cond_ii_vanishing && r.cond_iii_ok;
  if (r.regular_evidence) {
    r.verdict = "consistent with regular";
  } else {
    r.verdict = "non-regular";
  }

  Report& rep = r.report;
  rep.title = "regularity of " + triple.label + " (finite-horizon evidence, N = " + std::to_string(N) + ")";
  rep.conclusion("cond_i_sum_abs_over_u_bounded", r.cond_i_bounded, r.cond_i_sup, "sup over n <= N");
  rep.conclusion("cond_ii_terms_vanish", r.cond_ii_vanishing, r.cond_ii_at_N,
                 "max_{k<=" + std::to_string(r.cond_ii_K) + "} |p_{N-k} q_k / u_N|");
  rep.conclusion("cond_iii_sum_over_u_to_1", r.cond_iii_ok, r.cond_iii_at_N, "value at n = N");
  rep.notes.push_back("verdict: " + r.verdict + " (evidence, not proof)");
  return r;
}

// ---------------------------------------------------------- decomposition

struct Thm1Result {
  std::vector<double> a;
  std::vector<double> b;
  /// Partial sums of b_n / u_n.
  std::vector<double> b_over_u_sums;
  /// max over 1 <= n <= N of |v_n a_n + b_n - (p o qs)_n|, relative to
  /// max(1, |u_n t_n|, |u_{n-1} t_{n-1}|).
  double max_residual = 0.0;
  LimitVerdict a_limit;
  /// Oscillation (max - min) of the b/u partial sums over [N/2, N].
  double cauchy_tail = 0.0;
  Report report;
};

/// a_n = t_{n-1}, b_n = u_n (t_n - t_{n-1}) for n >= 1, with a_0 = t_0 and
/// b_0 = 0, so that v_n a_n + b_n = (p o qs)_n.
inline Thm1Result thm1_decompose(const WeightTriple& triple, const Sequence& s, std::size_t N,
                                 const VerifyOptions& opts = {}) {
  if (N < 2) throw std::invalid_argument("thm1_decompose: N must be >= 2");
  const auto u = triple.normalisers(N);
  for (std::size_t n = 0; n <= N; ++n) {
    if (!(u[n] > 0.0)) throw std::invalid_argument("thm1_decompose: u is not positive on the horizon");
    if (n > 0 && !(u[n] >= u[n - 1])) {
      throw std::invalid_argument("thm1_decompose: u is not increasing on the horizon");
    }
  }
  const auto t = voronoi_mean(triple, s, N).values;
  const auto d = voronoi_convolve_qs(triple.p, triple.q, s, N);
  const auto v = differences(u);

  Thm1Result r;
  r.a.resize(N + 1);
  r.b.resize(N + 1);
  r.b_over_u_sums.resize(N + 1);
  r.a[0] = t[0];
  r.b[0] = 0.0;
  double acc = 0.0;
  for (std::size_t n = 1; n <= N; ++n) {
    r.a[n] = t[n - 1];
    r.b[n] = u[n] * (t[n] - t[n - 1]);
    const double recon = v[n] * r.a[n] + r.b[n];
    const double scale = std::max({1.0, std::fabs(u[n] * t[n]), std::fabs(u[n - 1] * t[n - 1])});
    r.max_residual = std::max(r.max_residual, std::fabs(recon - d[n]) / scale);
  }
  for (std::size_t n = 0; n <= N; ++n) {
    acc += r.b[n] / u[n];
    r.b_over_u_sums[n] = acc;
  }
  r.a_limit = detect_limit(r.a, opts.tol, opts.window);
  r.cauchy_tail = window_max(r.b_over_u_sums, N / 2, N) - window_min(r.b_over_u_sums, N / 2, N);

  Report& rep = r.report;
  rep.title = "decomposition (p o qs)_n = v_n a_n + b_n for " + triple.label;
  rep.hypothesis("u_positive_increasing", true, u[N]);
  rep.hypothesis("u_diverges_evidence", diverges_to_infinity_evidence(u), u[N], "u_N");
  rep.conclusion("reconstruction_residual", r.max_residual <= 1e-12, r.max_residual, "relative, n <= N");
  rep.conclusion("a_n_converges", r.a_limit.converged(), r.a_limit.estimate.value_or(std::nan("")),
                 to_string(r.a_limit.status));
  rep.conclusion("sum_b_over_u_cauchy_tail", r.cauchy_tail <= opts.tol, r.cauchy_tail,
                 "oscillation over [N/2, N]");
  return r;
}

// ------------------------------------------------------------ limitation

struct Thm2Result {
  /// ((p o qs)_n - s_limit v_n) / u_n for n = 0..N.
  std::vector<double> residual;
  double ratio_bound = 0.0;
  LimitVerdict mean_limit;
  LimitVerdict residual_limit;
  Report report;
};

inline Thm2Result thm2_limitation_check(const WeightTriple& triple, const Sequence& s, double s_limit,
                                        std::size_t N, const VerifyOptions& opts = {}) {
  const auto u = triple.normalisers(N);
  const auto v = differences(u);
  const auto d = voronoi_convolve_qs(triple.p, triple.q, s, N);
  const auto t = voronoi_mean(triple, s, N).values;

  Thm2Result r;
  for (std::size_t n = 1; n <= N; ++n) r.ratio_bound = std::max(r.ratio_bound, std::fabs(u[n] / u[n - 1]));
  r.residual.resize(N + 1);
  for (std::size_t n = 0; n <= N; ++n) r.residual[n] = (d[n] - s_limit * v[n]) / u[n];
  r.mean_limit = detect_limit(t, opts.tol, opts.window);
  r.residual_limit = detect_limit(r.residual, opts.tol, opts.window);

  Report& rep = r.report;
  rep.title = "limitation (p o qs)_n = s v_n + o(u_n) for " + triple.label;
  rep.hypothesis("max_u_ratio", std::isfinite(r.ratio_bound), r.ratio_bound,
                 "max u_n/u_{n-1}, reported without cutoff");
  rep.hypothesis("mean_converges_to_s", r.mean_limit.converged_to(s_limit, opts.tol),
                 r.mean_limit.estimate.value_or(std::nan("")), to_string(r.mean_limit.status));
  rep.conclusion("residual_over_u_to_0", r.residual_limit.converged_to(0.0, opts.tol),
                 trailing_deviation(r.residual, 0.0, opts.window), "trailing max |residual|");
  return r;
}

// -------------------------------------------------------- kernel inversion

struct KernelInversion {
  std::vector<double> h;
  /// |q_n s_n - sum h_{n-k} u_k t_k| / max(|q_n s_n|, sum |h_{n-k} u_k t_k|).
  std::vector<double> residual;
  double max_residual = 0.0;
  /// The cited sufficient condition for h to exist: v positive and non-increasing.
  bool v_positive_nonincreasing = false;
  Report report;
};

/// Solves q_n s_n = sum_{k<=n} h_{n-k} u_k t_k for h by forward substitution.
inline KernelInversion invert_kernel(const WeightTriple& triple, const TransformPrefix& t, const Sequence& s,
                                     std::size_t N) {
  if (t.values.size() < N + 1) throw std::invalid_argument("invert_kernel: transform prefix shorter than N+1");
  const auto u = triple.normalisers(N);
  const auto qs = times(triple.q, s).terms(N);
  std::vector<double> w(N + 1);
  for (std::size_t k = 0; k <= N; ++k) w[k] = u[k] * t.values[k];
  if (w[0] == 0.0) throw evaluation_error("invert_kernel: u_0 t_0 = 0, the system is singular");

  KernelInversion r;
  r.h.resize(N + 1);
  for (std::size_t n = 0; n <= N; ++n) {
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) acc += r.h[j] * w[n - j];
    r.h[n] = (qs[n] - acc) / w[0];
    if (!std::isfinite(r.h[n])) throw evaluation_error("invert_kernel: h is not finite at n = " + std::to_string(n));
  }
  r.residual.resize(N + 1);
  for (std::size_t n = 0; n <= N; ++n) {
    double acc = 0.0;
    double mag = 0.0;
    for (std::size_t k = 0; k <= n; ++k) {
      const double term = r.h[n - k] * w[k];
      acc += term;
      mag += std::fabs(term);
    }
    const double scale = std::max({std::fabs(qs[n]), mag, std::numeric_limits<double>::min()});
    r.residual[n] = std::fabs(qs[n] - acc) / scale;
    r.max_residual = std::max(r.max_residual, r.residual[n]);
  }
  const auto v = differences(u);
  r.v_positive_nonincreasing = true;
  for (std::size_t n = 0; n <= N; ++n) {
    if (!(v[n] > 0.0) || (n > 0 && v[n] > v[n - 1])) {
      r.v_positive_nonincreasing = false;
      break;
    }
  }
  Report& rep = r.report;
  rep.title = "kernel inversion q_n s_n = sum h_{n-k} u_k t_k for " + triple.label;
  rep.conclusion("reconstruction_residual", r.max_residual <= 1e-10, r.max_residual, "relative, n <= N");
  rep.notes.push_back(r.v_positive_nonincreasing
                          ? "v is positive and non-increasing on the horizon"
                          : "v is not positive non-increasing on the horizon; the triangular solve was attempted regardless");
  return r;
}

// -------------------------------------------------------------------- TCO

struct IndexMap {
  std::function<std::size_t(std::size_t)> rule;
  std::string label;
};

/// n -> ceil(lambda n)
inline IndexMap ceil_scale_map(double lambda) {
  std::ostringstream label;
  label << "ceil(" << lambda << "n)";
  return {[lambda](std::size_t n) {
            return static_cast<std::size_t>(std::ceil(lambda * static_cast<double>(n)));
          },
          label.str()};
}

/// n -> floor(n / lambda)
inline IndexMap floor_divide_map(double lambda) {
  std::ostringstream label;
  label << "floor(n/" << lambda << ")";
  return {[lambda](std::size_t n) {
            return static_cast<std::size_t>(std::floor(static_cast<double>(n) / lambda));
          },
          label.str()};
}

struct TcoMaps {
  std::vector<IndexMap> upper;  // alpha (U_q) or gamma (U_u)
  std::vector<IndexMap> lower;  // beta (L_q) or theta (L_u)
};

inline TcoMaps default_tco_maps() {
  TcoMaps maps;
  for (double lambda : {1.5, 2.0, 4.0}) {
    maps.upper.push_back(ceil_scale_map(lambda));
    maps.lower.push_back(floor_divide_map(lambda));
  }
  return maps;
}

enum class TcoDirection { omega_to_V, V_to_omega };
enum class TcoDenominator { u, p };

struct TcoOptions {
  double tol = 1e-9;
  /// Denominator used by the V_to_omega brackets.
  TcoDenominator denominator = TcoDenominator::u;
};

struct TcoMapEstimate {
  std::string condition;
  std::string map;
  double membership_ratio = 0.0;  // liminf proxy of the defining ratio
  double liminf = 0.0;            // min of the bracket over [N/2, N]
};

struct TcoReport {
  TcoDirection direction = TcoDirection::V_to_omega;
  std::vector<TcoMapEstimate> per_map;
  /// sup over maps of the liminf proxies, for the two conditions in play:
  /// (con1, con2) or (con3, con4).
  double first = 0.0;
  double second = 0.0;
  bool holds = false;
  Report report;
};

inline TcoReport tauberian_tco(const WeightTriple& triple, const Sequence& s, const TcoMaps& maps,
                               TcoDirection direction, std::size_t N, const TcoOptions& opts = {}) {
  if (maps.upper.empty() || maps.lower.empty()) throw std::invalid_argument("tauberian_tco: empty map family");
  if (N < 4) throw std::invalid_argument("tauberian_tco: N must be >= 4");
  const std::size_t lo = N / 2;
  std::size_t M = N;
  for (const auto* family : {&maps.upper, &maps.lower}) {
    for (const auto& m : *family) {
      for (std::size_t n = lo; n <= N; ++n) M = std::max(M, m.rule(n));
    }
  }
  const bool omega = direction == TcoDirection::omega_to_V;
  const auto t = voronoi_mean(triple, s, M);
  const auto u = triple.normalisers(M);
  const auto sv = s.terms(M);

  // Membership weights (q or u), bracket cumulants and the denominators.
  std::vector<double> weight;  // q or u
  std::vector<double> denom;   // q, u or p
  std::vector<double> cum;     // (h*ut)_n or (p*qs)_n
  std::vector<double> center;  // t_n or s_n
  if (omega) {
    weight = triple.q.terms(M);
    for (std::size_t n = 0; n <= M; ++n) {
      if (weight[n] == 0.0) throw std::invalid_argument("tauberian_tco: q_n = 0 at n = " + std::to_string(n));
    }
    const auto inv = invert_kernel(triple, t, s, M);
    std::vector<double> w(M + 1);
    for (std::size_t k = 0; k <= M; ++k) w[k] = u[k] * t.values[k];
    cum = cauchy_convolve(inv.h, w);
    denom = weight;
    center = t.values;
  } else {
    weight = u;
    cum = partial_sums_U(triple.p, triple.q, s, M);
    denom = opts.denominator == TcoDenominator::u ? u : triple.p.terms(M);
    center = sv;
  }

  TcoReport r;
  r.direction = direction;
  r.first = -std::numeric_limits<double>::infinity();
  r.second = -std::numeric_limits<double>::infinity();
  const std::string c1 = omega ? "con1" : "con3";
  const std::string c2 = omega ? "con2" : "con4";
  const std::string wname = omega ? "q" : "u";

  auto check_growth = [&](const IndexMap& m) {
    if (!(m.rule(N) > m.rule(lo))) {
      throw std::invalid_argument("tauberian_tco: map " + m.label + " does not grow on the horizon");
    }
  };
  auto membership = [&](const IndexMap& m, bool upper) {
    check_growth(m);
    double ratio = std::numeric_limits<double>::infinity();
    for (std::size_t n = lo; n <= N; ++n) {
      const std::size_t k = m.rule(n);
      ratio = std::min(ratio, upper ? weight[k] / weight[n] : weight[n] / weight[k]);
    }
    if (!(ratio > 1.0)) {
      throw std::invalid_argument("tauberian_tco: map " + m.label + " violates liminf " +
                                  (upper ? wname + "_{map(n)}/" + wname + "_n" : wname + "_n/" + wname + "_{map(n)}") +
                                  " > 1");
    }
    return ratio;
  };
  for (const auto& m : maps.upper) {
    const double ratio = membership(m, true);
    double liminf = std::numeric_limits<double>::infinity();
    for (std::size_t n = lo; n <= N; ++n) {
      const std::size_t a = m.rule(n);
      const double den = denom[a] - denom[n];
      if (den == 0.0) throw evaluation_error("tauberian_tco: zero denominator for map " + m.label);
      // sum_{k=n+1}^{a} [D_k - c_k center_n] via telescoped cumulants.
      const double num = (cum[a] - cum[n]) - center[n] * (weight[a] - weight[n]);
      liminf = std::min(liminf, num / den);
    }
    r.per_map.push_back({c1, m.label, ratio, liminf});
    r.first = std::max(r.first, liminf);
  }
  for (const auto& m : maps.lower) {
    const double ratio = membership(m, false);
    double liminf = std::numeric_limits<double>::infinity();
    for (std::size_t n = lo; n <= N; ++n) {
      const std::size_t b = m.rule(n);
      const double den = denom[n] - denom[b];
      if (den == 0.0) throw evaluation_error("tauberian_tco: zero denominator for map " + m.label);
      const double num = center[n] * (weight[n] - weight[b]) - (cum[n] - cum[b]);
      liminf = std::min(liminf, num / den);
    }
    r.per_map.push_back({c2, m.label, ratio, liminf});
    r.second = std::max(r.second, liminf);
  }
  r.holds = r.first >= -opts.tol && r.second >= -opts.tol;

  Report& rep = r.report;
  rep.title = std::string("Tauberian conditions (") + (omega ? "convergence => mean" : "mean => convergence") +
              ") for " + triple.label;
  for (const auto& e : r.per_map) {
    rep.notes.push_back(e.condition + " via " + e.map + ": liminf proxy " + std::to_string(e.liminf) +
                        ", membership ratio " + std::to_string(e.membership_ratio));
  }
  rep.conclusion(c1 + "_sup_liminf", r.first >= -opts.tol, r.first, "max over maps of min over [N/2, N]");
  rep.conclusion(c2 + "_sup_liminf", r.second >= -opts.tol, r.second, "max over maps of min over [N/2, N]");
  if (!omega && opts.denominator == TcoDenominator::p) rep.notes.push_back("denominators use p (as printed)");
  return r;
}

// ---------------------------------------------------------- Kronecker

struct KroneckerResult {
  std::vector<double> values;  // (1/g_n) sum_{k<=n} g_k q_k s_k
  LimitVerdict series_limit;
  LimitVerdict verdict;
  Report report;
};

inline KroneckerResult kronecker_check(const Sequence& q, const Sequence& s, const Sequence& g, std::size_t N,
                                       const VerifyOptions& opts = {}) {
  const auto gv = g.terms(N);
  const auto qs = times(q, s).terms(N);
  bool g_ok = true;
  for (std::size_t n = 0; n <= N; ++n) {
    if (!(gv[n] > 0.0) || (n > 0 && gv[n] < gv[n - 1])) g_ok = false;
  }
  KroneckerResult r;
  std::vector<double> series(N + 1);
  r.values.resize(N + 1);
  double acc = 0.0;
  double wacc = 0.0;
  for (std::size_t n = 0; n <= N; ++n) {
    acc += qs[n];
    series[n] = acc;
    wacc += gv[n] * qs[n];
    r.values[n] = wacc / gv[n];
  }
  r.series_limit = detect_limit(series, opts.tol, opts.window);
  r.verdict = detect_limit(r.values, opts.tol, opts.window);

  Report& rep = r.report;
  rep.title = "Kronecker lemma with g = " + g.label();
  rep.hypothesis("g_positive_increasing", g_ok, gv[N]);
  rep.hypothesis("series_converges", r.series_limit.converged(), r.series_limit.estimate.value_or(std::nan("")),
                 to_string(r.series_limit.status));
  rep.conclusion("weighted_mean_to_0", r.verdict.converged_to(0.0, opts.tol), r.values[N],
                 to_string(r.verdict.status));
  return r;
}

// ------------------------------------------------------------- inclusion

struct InclusionResult {
  std::vector<double> conclusion_values;  // (1/u~_n) sum q~_k s_k
  LimitVerdict ratio_limit;               // u_{n+1}/u_n -> 1
  bool u_tilde_diverges = false;
  LimitVerdict u_over_q_mean;             // u_n/q_n under (V, 1, q~, u~)
  LimitVerdict s_mean;                    // s under (V, 1, q, u)
  LimitVerdict conclusion;
  Report report;
};

inline InclusionResult thm4_inclusion_check(const Sequence& q, const Sequence& u, const Sequence& q_tilde,
                                            const Sequence& u_tilde, const Sequence& s, std::size_t N,
                                            const VerifyOptions& opts = {}) {
  if (N < 8) throw std::invalid_argument("thm4_inclusion_check: N must be >= 8");
  const auto qv = q.terms(N);
  const auto uv = u.terms(N);
  const auto qt = q_tilde.terms(N);
  const auto ut = u_tilde.terms(N);
  bool positive = true;
  for (std::size_t n = 0; n <= N; ++n) {
    if (!(qv[n] > 0.0 && uv[n] > 0.0 && qt[n] > 0.0 && ut[n] > 0.0)) positive = false;
  }
  InclusionResult r;
  Report& rep = r.report;
  rep.title = "inclusion (V,1,q,u) => (V,1,q~,u~) null";
  rep.hypothesis("sequences_positive", positive, 0.0);

  std::vector<double> ratio(N);
  for (std::size_t n = 0; n < N; ++n) ratio[n] = uv[n + 1] / uv[n];
  r.ratio_limit = detect_limit(ratio, opts.tol, opts.window);
  rep.hypothesis("u_ratio_to_1", r.ratio_limit.converged_to(1.0, opts.tol), ratio.back(),
                 to_string(r.ratio_limit.status));

  r.u_tilde_diverges = diverges_to_infinity_evidence(ut);
  rep.hypothesis("u_tilde_diverges", r.u_tilde_diverges, ut[N], "growth evidence");

  const auto u_over_q = Sequence::from_prefix(
      [&] {
        std::vector<double> x(N + 1);
        for (std::size_t n = 0; n <= N; ++n) x[n] = uv[n] / qv[n];
        return x;
      }(),
      Tail::error);
  const auto tilde = make_triple(builtin::one(), q_tilde, u_tilde, "(V,1,q~,u~)");
  r.u_over_q_mean = detect_limit(voronoi_mean(tilde, u_over_q, N).values, opts.tol, opts.window);
  rep.hypothesis("u_over_q_to_1_under_tilde", r.u_over_q_mean.converged_to(1.0, opts.tol),
                 r.u_over_q_mean.estimate.value_or(std::nan("")), to_string(r.u_over_q_mean.status));

  const auto base = make_triple(builtin::one(), q, u, "(V,1,q,u)");
  r.s_mean = detect_limit(voronoi_mean(base, s, N).values, opts.tol, opts.window);
  rep.hypothesis("s_summable", r.s_mean.converged(), r.s_mean.estimate.value_or(std::nan("")),
                 to_string(r.s_mean.status));

  r.conclusion_values.resize(N + 1);
  double acc = 0.0;
  const auto sv = s.terms(N);
  for (std::size_t n = 0; n <= N; ++n) {
    acc += qt[n] * sv[n];
    r.conclusion_values[n] = acc / ut[n];
  }
  r.conclusion = detect_limit(r.conclusion_values, opts.tol, opts.window);
  rep.conclusion("tilde_mean_to_0", r.conclusion.converged_to(0.0, opts.tol), r.conclusion_values[N],
                 to_string(r.conclusion.status));
  return r;
}

}  // namespace voronoi
