#pragma once

// Monte Carlo laboratory for strong laws under Voronoi means, power-series
// and moving-average methods, and for Baum-Katz type sums.
//
// The truncated means E[X 1{|X| <= phi(k)}] are written mu_k to keep them
// apart from the difference sequence m_n of q.
//
// Sample X_k of seed s is a pure function of (s, stream, k) through the
// counter-based generator, so every method sees the same path.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "voronoi/convolution.hpp"
#include "voronoi/error.hpp"
#include "voronoi/expression.hpp"
#include "voronoi/limit.hpp"
#include "voronoi/methods.hpp"
#include "voronoi/moving_average.hpp"
#include "voronoi/parallel.hpp"
#include "voronoi/phi.hpp"
#include "voronoi/power_series.hpp"
#include "voronoi/report.hpp"
#include "voronoi/rng.hpp"
#include "voronoi/sequence.hpp"

namespace voronoi {

// ------------------------------------------------------------ distributions

enum class Family { normal, cauchy, pareto, two_point, user_table };

inline const char* to_string(Family f) {
  switch (f) {
    case Family::normal:
      return "normal";
    case Family::cauchy:
      return "cauchy";
    case Family::pareto:
      return "pareto";
    case Family::two_point:
      return "two_point";
    case Family::user_table:
      return "user_table";
  }
  return "?";
}

/// Parameters by family:
///   normal(a = mean, b = sd), cauchy(a = location, b = scale),
///   pareto(a = alpha, b = minimum), two_point(P(X = a) = p, else b),
///   user_table(values with probabilities).
struct DistributionSpec {
  Family family = Family::normal;
  double a = 0.0;
  double b = 1.0;
  double p = 0.5;
  std::vector<double> values;
  std::vector<double> probs;
  std::uint64_t seed = 0;
  std::string label = "normal(0,1)";
};

namespace dist {

inline std::string fmt(double x) {
  std::ostringstream o;
  o << x;
  return o.str();
}

inline DistributionSpec normal(double mean = 0.0, double sd = 1.0) {
  if (!(sd > 0.0)) throw std::invalid_argument("normal: sd must be positive");
  return {Family::normal, mean, sd, 0.5, {}, {}, 0, "normal(" + fmt(mean) + "," + fmt(sd) + ")"};
}

inline DistributionSpec cauchy(double loc = 0.0, double scale = 1.0) {
  if (!(scale > 0.0)) throw std::invalid_argument("cauchy: scale must be positive");
  return {Family::cauchy, loc, scale, 0.5, {}, {}, 0, "cauchy(" + fmt(loc) + "," + fmt(scale) + ")"};
}

inline DistributionSpec pareto(double alpha, double minimum = 1.0) {
  if (!(alpha > 0.0) || !(minimum > 0.0)) throw std::invalid_argument("pareto: alpha and minimum must be positive");
  return {Family::pareto, alpha, minimum, 0.5, {}, {}, 0, "pareto(" + fmt(alpha) + "," + fmt(minimum) + ")"};
}

/// P(X = a) = p, P(X = b) = 1 - p.
inline DistributionSpec two_point(double a, double b, double p) {
  if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("two_point: p must lie in [0, 1]");
  return {Family::two_point, a, b, p, {}, {}, 0, "two_point(" + fmt(a) + "," + fmt(b) + "," + fmt(p) + ")"};
}

inline DistributionSpec constant(double c) {
  auto d = two_point(c, c, 1.0);
  d.label = "constant(" + fmt(c) + ")";
  return d;
}

inline DistributionSpec table(std::vector<double> values, std::vector<double> probs) {
  if (values.empty() || values.size() != probs.size()) {
    throw std::invalid_argument("table: values and probabilities must be non-empty and of equal length");
  }
  double total = 0.0;
  for (double q : probs) {
    if (!(q >= 0.0)) throw std::invalid_argument("table: probabilities must be non-negative");
    total += q;
  }
  if (std::fabs(total - 1.0) > 1e-12) throw std::invalid_argument("table: probabilities must sum to 1");
  std::string label = "table(";
  for (std::size_t i = 0; i < values.size(); ++i) label += (i ? ";" : "") + fmt(values[i]) + ":" + fmt(probs[i]);
  label += ")";
  return {Family::user_table, 0.0, 0.0, 0.5, std::move(values), std::move(probs), 0, label};
}

/// The same family with every value multiplied by c > 0.
inline DistributionSpec scaled(const DistributionSpec& d, double c) {
  if (!(c > 0.0)) throw std::invalid_argument("scaled: factor must be positive");
  DistributionSpec out = d;
  switch (d.family) {
    case Family::normal:
      out = normal(c * d.a, c * d.b);
      break;
    case Family::cauchy:
      out = cauchy(c * d.a, c * d.b);
      break;
    case Family::pareto:
      out = pareto(d.a, c * d.b);
      break;
    case Family::two_point:
      out = two_point(c * d.a, c * d.b, d.p);
      break;
    case Family::user_table: {
      auto v = d.values;
      for (auto& x : v) x *= c;
      out = table(std::move(v), d.probs);
      break;
    }
  }
  out.seed = d.seed;
  return out;
}

/// normal(0,1), cauchy(0,1), pareto(1.5), pareto(1.5,2), two_point(1,-1,0.5),
/// constant(0), table(1:0.25;-1:0.75). Bare family names take defaults.
inline DistributionSpec parse(std::string_view text) {
  const std::string t = detail::trim(text);
  const auto open = t.find('(');
  const std::string name = detail::trim(t.substr(0, open));
  std::string body;
  if (open != std::string::npos) {
    if (t.back() != ')') throw parse_error("distribution: missing ')' in '" + t + "'");
    body = t.substr(open + 1, t.size() - open - 2);
  }
  if (name == "table") {
    std::vector<double> v;
    std::vector<double> q;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ';')) {
      const auto colon = item.find(':');
      if (colon == std::string::npos) throw parse_error("distribution: table entries are value:probability");
      try {
        v.push_back(std::stod(item.substr(0, colon)));
        q.push_back(std::stod(item.substr(colon + 1)));
      } catch (const std::exception&) {
        throw parse_error("distribution: bad table entry '" + item + "'");
      }
    }
    try {
      return table(std::move(v), std::move(q));
    } catch (const std::invalid_argument& e) {
      throw parse_error(e.what());
    }
  }
  const auto args = body.empty() ? std::vector<double>{} : detail::parse_number_list(body);
  auto arg = [&](std::size_t i, double fallback) { return i < args.size() ? args[i] : fallback; };
  auto limit = [&](std::size_t n) {
    if (args.size() > n) throw parse_error("distribution: too many parameters in '" + t + "'");
  };
  try {
    if (name == "normal") {
      limit(2);
      return normal(arg(0, 0.0), arg(1, 1.0));
    }
    if (name == "cauchy") {
      limit(2);
      return cauchy(arg(0, 0.0), arg(1, 1.0));
    }
    if (name == "pareto") {
      limit(2);
      if (args.empty()) throw parse_error("distribution: pareto needs alpha");
      return pareto(args[0], arg(1, 1.0));
    }
    if (name == "two_point") {
      limit(3);
      if (args.size() != 3) throw parse_error("distribution: two_point needs a, b, p");
      return two_point(args[0], args[1], args[2]);
    }
    if (name == "constant") {
      limit(1);
      return constant(arg(0, 0.0));
    }
  } catch (const std::invalid_argument& e) {
    throw parse_error(e.what());
  }
  throw parse_error("distribution: unknown family '" + name + "'");
}

}  // namespace dist

/// X_k of the stream (seed, stream); k is the counter index.
inline double sample(const DistributionSpec& d, const CounterStream& s, std::uint64_t k) {
  const auto u = s.uniforms(k);
  switch (d.family) {
    case Family::normal: {
      const double r = std::sqrt(-2.0 * std::log(u[0]));
      return d.a + d.b * r * std::cos(2.0 * std::numbers::pi * u[1]);
    }
    case Family::cauchy:
      return d.a + d.b * std::tan(std::numbers::pi * (u[0] - 0.5));
    case Family::pareto:
      return d.b * std::pow(u[0], -1.0 / d.a);
    case Family::two_point:
      return u[0] < d.p ? d.a : d.b;
    case Family::user_table: {
      double cum = 0.0;
      for (std::size_t i = 0; i + 1 < d.values.size(); ++i) {
        cum += d.probs[i];
        if (u[0] < cum) return d.values[i];
      }
      return d.values.back();
    }
  }
  return 0.0;
}

/// X_0..X_N of (seed, stream).
inline std::vector<double> sample_path(const DistributionSpec& d, std::uint64_t seed, std::uint64_t stream,
                                       std::size_t N) {
  const CounterStream s(seed, stream);
  std::vector<double> x(N + 1);
  for (std::size_t k = 0; k <= N; ++k) x[k] = sample(d, s, k);
  return x;
}

inline constexpr std::uint64_t kPathStream = 0;
inline constexpr std::uint64_t kEmpiricalStream = std::uint64_t{1} << 63;

/// Stream of Baum-Katz replicate r.
inline constexpr std::uint64_t replicate_stream(std::size_t r) { return 1 + r; }

// --------------------------------------------------------- truncated means

enum class TruncatedMeanMethod { closed_form, quadrature, empirical };

inline const char* to_string(TruncatedMeanMethod m) {
  switch (m) {
    case TruncatedMeanMethod::closed_form:
      return "closed_form";
    case TruncatedMeanMethod::quadrature:
      return "quadrature";
    case TruncatedMeanMethod::empirical:
      return "empirical";
  }
  return "?";
}

struct TruncatedMeanTable {
  std::vector<double> values;  // mu_0..mu_N
  TruncatedMeanMethod method = TruncatedMeanMethod::closed_form;
  std::size_t samples = 0;     // empirical only
};

namespace detail {

inline double std_normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }
inline double std_normal_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi); }

}  // namespace detail

/// E[X 1{|X| <= c}] in closed form.
inline double truncated_mean_closed(const DistributionSpec& d, double c) {
  if (c < 0.0) return 0.0;
  switch (d.family) {
    case Family::normal: {
      const double za = (-c - d.a) / d.b;
      const double zb = (c - d.a) / d.b;
      const double mass = d.a == 0.0 ? 0.0 : d.a * (detail::std_normal_cdf(zb) - detail::std_normal_cdf(za));
      return mass + d.b * (detail::std_normal_pdf(za) - detail::std_normal_pdf(zb));
    }
    case Family::cauchy: {
      const double za = (-c - d.a) / d.b;
      const double zb = (c - d.a) / d.b;
      const double mass = d.a == 0.0 ? 0.0 : d.a * (std::atan(zb) - std::atan(za)) / std::numbers::pi;
      return mass + d.b / (2.0 * std::numbers::pi) * std::log((1.0 + zb * zb) / (1.0 + za * za));
    }
    case Family::pareto: {
      const double alpha = d.a;
      const double xm = d.b;
      if (c <= xm) return 0.0;
      if (alpha == 1.0) return xm * std::log(c / xm);
      return alpha * std::pow(xm, alpha) * (std::pow(c, 1.0 - alpha) - std::pow(xm, 1.0 - alpha)) / (1.0 - alpha);
    }
    case Family::two_point: {
      double m = 0.0;
      if (std::fabs(d.a) <= c) m += d.p * d.a;
      if (std::fabs(d.b) <= c) m += (1.0 - d.p) * d.b;
      return m;
    }
    case Family::user_table: {
      double m = 0.0;
      for (std::size_t i = 0; i < d.values.size(); ++i) {
        if (std::fabs(d.values[i]) <= c) m += d.probs[i] * d.values[i];
      }
      return m;
    }
  }
  return 0.0;
}

namespace detail {

inline double density(const DistributionSpec& d, double x) {
  switch (d.family) {
    case Family::normal:
      return std_normal_pdf((x - d.a) / d.b) / d.b;
    case Family::cauchy: {
      const double z = (x - d.a) / d.b;
      return 1.0 / (std::numbers::pi * d.b * (1.0 + z * z));
    }
    case Family::pareto:
      return x < d.b ? 0.0 : d.a * std::pow(d.b, d.a) * std::pow(x, -d.a - 1.0);
    default:
      return 0.0;
  }
}

/// int_lo^hi x f(x) dx to 1e-10 relative to the L1 norm, or 1e-16 absolute
/// for pieces far in a light tail.
inline double first_moment_piece(const DistributionSpec& d, double lo, double hi) {
  if (d.family == Family::pareto) lo = std::max(lo, d.b);
  if (!(hi > lo)) return 0.0;
  using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
  auto f = [&](double x) { return x * density(d, x); };
  auto accept = [](double err, double l1) { return err <= 1e-10 * l1 || err <= 1e-16; };
  double err = 0.0;
  double l1 = 0.0;
  double v = GK::integrate(f, lo, hi, 0, 0.0, &err, &l1);
  if (std::isfinite(v) && accept(err, l1)) return v;
  v = GK::integrate(f, lo, hi, 20, 1e-10, &err, &l1);
  if (!std::isfinite(v) || !accept(err, l1)) {
    throw evaluation_error("truncated_means: quadrature did not converge on [" + std::to_string(lo) + ", " +
                           std::to_string(hi) + "]");
  }
  return v;
}

inline bool discrete(const DistributionSpec& d) {
  return d.family == Family::two_point || d.family == Family::user_table;
}

}  // namespace detail

/// mu_k = E[X 1{|X| <= phi(k)}] for k = 0..N. Quadrature accumulates the
/// pieces between consecutive truncation points, adding each mirrored pair
/// together so symmetric laws give exact zeros. Empirical tables use M
/// samples from a stream separate from the paths.
inline TruncatedMeanTable truncated_means(const DistributionSpec& d, const PhiFunction& phi, std::size_t N,
                                          TruncatedMeanMethod method = TruncatedMeanMethod::closed_form,
                                          std::size_t M = 100000) {
  TruncatedMeanTable t;
  t.method = method;
  t.values.resize(N + 1);
  std::vector<double> c(N + 1);
  for (std::size_t k = 0; k <= N; ++k) c[k] = phi(static_cast<double>(k));
  switch (method) {
    case TruncatedMeanMethod::closed_form:
      for (std::size_t k = 0; k <= N; ++k) t.values[k] = truncated_mean_closed(d, c[k]);
      break;
    case TruncatedMeanMethod::quadrature: {
      if (detail::discrete(d)) throw std::invalid_argument("truncated_means: quadrature needs a continuous family");
      double acc = 0.0;
      double prev = 0.0;
      for (std::size_t k = 0; k <= N; ++k) {
        const double ck = std::max(0.0, c[k]);
        if (ck < prev) throw std::invalid_argument("truncated_means: phi must be non-decreasing");
        if (ck > prev) {
          acc += detail::first_moment_piece(d, prev, ck) + detail::first_moment_piece(d, -ck, -prev);
          prev = ck;
        }
        t.values[k] = acc;
      }
      break;
    }
    case TruncatedMeanMethod::empirical: {
      if (M == 0) throw std::invalid_argument("truncated_means: empirical method needs M > 0");
      t.samples = M;
      const CounterStream s(d.seed, kEmpiricalStream);
      std::vector<double> y(M);
      for (std::size_t j = 0; j < M; ++j) y[j] = sample(d, s, j);
      std::sort(y.begin(), y.end(), [](double l, double r) {
        return std::fabs(l) < std::fabs(r) || (std::fabs(l) == std::fabs(r) && l < r);
      });
      std::vector<double> cum(M + 1, 0.0);
      for (std::size_t j = 0; j < M; ++j) cum[j + 1] = cum[j] + y[j];
      for (std::size_t k = 0; k <= N; ++k) {
        const auto it = std::upper_bound(y.begin(), y.end(), c[k],
                                         [](double ck, double v) { return ck < std::fabs(v); });
        t.values[k] = cum[static_cast<std::size_t>(it - y.begin())] / static_cast<double>(M);
      }
      break;
    }
  }
  return t;
}

// ------------------------------------------------------------ moment flag

struct MomentEvidence {
  bool finite = false;
  double tail_index = std::numeric_limits<double>::infinity();  // P(|X| > y) ~ y^-tail_index
  double inverse_index = 0.0;                                   // phi^<-(y) ~ y^inverse_index
  std::string basis;
};

/// E[phi^<-(|X|)] < inf read off from tail indices: the tail index of the
/// family is known and the index of phi^<- is the log-slope between 1e6 and
/// 1e8. Finite iff inverse_index < tail_index - 0.02; slowly varying
/// corrections at the boundary are not resolved.
inline MomentEvidence phi_inverse_moment(const DistributionSpec& d, const PhiFunction& phi) {
  MomentEvidence e;
  const double y1 = 1e6;
  const double y2 = 1e8;
  const double i1 = phi_inverse(phi, y1);
  const double i2 = phi_inverse(phi, y2);
  e.inverse_index = (i1 > 0.0 && i2 > 0.0) ? std::log(i2 / i1) / std::log(y2 / y1) : 0.0;
  switch (d.family) {
    case Family::cauchy:
      e.tail_index = 1.0;
      break;
    case Family::pareto:
      e.tail_index = d.a;
      break;
    default:
      break;
  }
  if (std::isinf(e.tail_index)) {
    e.finite = true;
    e.basis = "light or bounded tails";
  } else {
    e.finite = e.inverse_index < e.tail_index - 0.02;
    std::ostringstream o;
    o << "tail index " << e.tail_index << " vs phi inverse index " << e.inverse_index;
    e.basis = o.str();
  }
  return e;
}

// --------------------------------------------------------- set membership

enum class PhiSet { Phi_V, Phi_V_tilde, Phi_uq, Phi_D };

inline const char* to_string(PhiSet s) {
  switch (s) {
    case PhiSet::Phi_V:
      return "Phi_V";
    case PhiSet::Phi_V_tilde:
      return "Phi_V_tilde";
    case PhiSet::Phi_uq:
      return "Phi_uq";
    case PhiSet::Phi_D:
      return "Phi_D";
  }
  return "?";
}

/// Extra data for the larger sets. v is the p-sequence for Phi_V_tilde
/// (default 1); d_coeffs are the coefficients of D_u (default diff(u));
/// radius defaults to an estimate from d_coeffs.
struct PhiSetExtras {
  Sequence v = builtin::one();
  std::optional<Sequence> d_coeffs;
  std::optional<double> radius;
  RealFunction h_uq;
  RealFunction u_fn;
};

struct PhiMembership {
  bool member = false;
  double max_violation = 0.0;
  Report report;
};

inline constexpr double kMembershipTol = 1e-9;

namespace detail {

inline void phi_v_checks(Report& r, double& worst, const std::vector<double>& u, const Sequence& q,
                         const PhiFunction& phi) {
  const std::size_t N = u.size() - 1;
  double min_u = u[0];
  double decrease = 0.0;
  bool q_positive = true;
  double ratio = 0.0;
  for (std::size_t n = 0; n <= N; ++n) {
    min_u = std::min(min_u, u[n]);
    if (n > 0) decrease = std::max(decrease, u[n - 1] - u[n]);
    const LogTerm lq = q.log_term(n);
    const double f = phi(static_cast<double>(n));
    if (lq.sign <= 0 || !(u[n] > 0.0) || !(f > 0.0)) {
      q_positive = q_positive && lq.sign > 0;
      ratio = std::numeric_limits<double>::infinity();
      continue;
    }
    ratio = std::max(ratio, std::fabs(std::expm1(std::log(u[n]) - lq.log_abs - std::log(f))));
  }
  r.hypothesis("u_positive", min_u > 0.0, min_u);
  r.hypothesis("u_increasing", decrease <= 0.0, decrease, "largest drop u_{n-1} - u_n");
  r.hypothesis("q_positive", q_positive, q_positive ? 1.0 : 0.0);
  r.hypothesis("u_over_q_equals_phi", ratio <= kMembershipTol, ratio, "max relative |u_n/q_n - phi(n)|");
  worst = std::max({worst, ratio, decrease, min_u > 0.0 ? 0.0 : -min_u});
}

inline double log_phi(const PhiFunction& phi, double x) {
  const double f = phi(x);
  if (!(f > 0.0)) throw evaluation_error("phi must be positive at " + std::to_string(x));
  return std::log(f);
}

}  // namespace detail

/// Checks the defining identities and inequalities of the chosen set on
/// n <= N. Membership is the conjunction of the checks; max_violation is the
/// largest violation among them.
inline PhiMembership phi_set_membership(const Sequence& u, const Sequence& q, const PhiFunction& phi, PhiSet set,
                                        std::size_t N, const PhiSetExtras& extras = {}) {
  if (N < 8) throw std::invalid_argument("phi_set_membership: N must be at least 8");
  PhiMembership m;
  m.report.title = std::string("membership in ") + to_string(set) + "(" + phi.label() + ")";
  const auto uv = u.terms(N);
  detail::phi_v_checks(m.report, m.max_violation, uv, q, phi);

  switch (set) {
    case PhiSet::Phi_V:
      break;
    case PhiSet::Phi_V_tilde: {
      const auto v = extras.v.terms(N);
      const double sigma = *std::min_element(v.begin(), v.end());
      double convex = 0.0;
      for (std::size_t n = 1; n < N; ++n) {
        const double gap = v[n] * v[n] - v[n + 1] * v[n - 1];
        convex = std::max(convex, gap / std::max(1e-300, v[n] * v[n]));
      }
      m.report.hypothesis("v_bounded_below", sigma > 0.0, sigma, "sigma = min v_n");
      m.report.hypothesis("v_log_convex", convex <= kMembershipTol, convex,
                          "max relative (v_n^2 - v_{n+1} v_{n-1})");
      m.max_violation = std::max({m.max_violation, convex, sigma > 0.0 ? 0.0 : -sigma});
      break;
    }
    case PhiSet::Phi_uq: {
      if (!extras.h_uq.fn) throw std::invalid_argument("phi_set_membership: Phi_uq needs h_uq");
      const Sequence coeffs = extras.d_coeffs ? *extras.d_coeffs : difference_sequence(u);
      PowerSeriesMethod dm;
      dm.p = builtin::one();
      dm.q = q;
      dm.v = coeffs;
      dm.radius = extras.radius ? *extras.radius : estimate_radius(coeffs, std::max<std::size_t>(N, 200));
      m.report.hypothesis("u_diverges", diverges_to_infinity_evidence(uv), uv.back());
      double worst_id = 0.0;
      for (std::size_t n = 1; n <= N; ++n) {
        const double x = static_cast<double>(n);
        const double h = extras.h_uq(x);
        if (!(h > 0.0 && h < dm.radius)) {
          worst_id = std::numeric_limits<double>::infinity();
          break;
        }
        const double lhs = log_eval_D(dm, h) - q.log_term(n).log_abs - x * std::log(h);
        worst_id = std::max(worst_id, std::fabs(std::expm1(lhs - detail::log_phi(phi, x))));
      }
      m.report.hypothesis("D_u_identity", worst_id <= kMembershipTol, worst_id,
                          "max relative |D_u(h(n))/(q_n h(n)^n) - phi(n)|");
      // h_uq must run out to the radius: the evaluation points x = h(n)
      // approach R_u (for R_u = 1 this is also R_u^-1).
      const double R = dm.radius;
      const double far = extras.h_uq(std::ldexp(1.0, 20));
      const double mid = extras.h_uq(std::ldexp(1.0, 10));
      bool to_radius = false;
      double gap = 0.0;
      if (std::isinf(R)) {
        gap = 1.0 / far;
        to_radius = far > mid && far >= 1e5;
      } else {
        gap = std::fabs(R - far) / R;
        to_radius = gap <= 1e-4 && std::fabs(R - far) < std::fabs(R - mid);
      }
      m.report.hypothesis("h_uq_to_radius", to_radius, gap, "R_u = " + std::to_string(R));
      m.max_violation = std::max({m.max_violation, worst_id, to_radius ? 0.0 : gap});
      break;
    }
    case PhiSet::Phi_D: {
      if (!extras.u_fn.fn) throw std::invalid_argument("phi_set_membership: Phi_D needs u_fn");
      const auto lam = lambda_membership(extras.u_fn, std::max<std::size_t>(N, 1000));
      m.report.hypothesis("u_in_Lambda", lam.ok, lam.last, "|u(x)/u(floor x) - 1| at the largest dyadic point");
      if (!lam.ok) m.max_violation = std::max(m.max_violation, lam.last);
      break;
    }
  }
  m.member = m.report.hypotheses_hold();
  return m;
}

// ------------------------------------------------------------ experiments

struct ExperimentConfig {
  DistributionSpec distribution = dist::normal();
  PhiFunction phi = linear_phi(1.0);
  /// (V, p, q, u); p = 1 is the (V, 1, q, u) mean.
  WeightTriple triple = make_triple(builtin::one(), builtin::one(), builtin::index_plus(1.0), "cesaro_c1");
  /// Continuous u(x) for moving averages.
  RealFunction u_fn = parse_function("x+1");
  std::size_t horizon = 1000;
  std::vector<std::uint64_t> seeds = {1};
  double threshold = 0.05;
  TruncatedMeanMethod mean_method = TruncatedMeanMethod::closed_form;
  std::size_t empirical_samples = 100000;
  unsigned threads = 0;
};

struct SeedResult {
  std::uint64_t seed = 0;
  double statistic = 0.0;
  bool pass = false;
  /// Fraction of dyadic blocks [2^j, 2^(j+1)) inside [1, N] with at least
  /// one |X_n| > phi(n); NaN where not computed.
  double exceedance = std::numeric_limits<double>::quiet_NaN();
  double lambda = std::numeric_limits<double>::quiet_NaN();  // moving averages only
  double threshold = 0.0;
};

struct LlnReport {
  std::vector<SeedResult> results;
  std::size_t passed = 0;
  bool all_pass = false;
  MomentEvidence moment;
  PhiMembership membership;
  Report report;
};

namespace detail {

inline std::size_t check_horizon(const ExperimentConfig& cfg) {
  if (cfg.horizon < 16) throw std::invalid_argument("lln: horizon must be at least 16");
  if (cfg.seeds.empty()) throw std::invalid_argument("lln: at least one seed is required");
  if (!(cfg.threshold > 0.0)) throw std::invalid_argument("lln: threshold must be positive");
  return cfg.horizon;
}

inline TruncatedMeanTable means_for(const ExperimentConfig& cfg, std::size_t N) {
  auto d = cfg.distribution;
  if (cfg.mean_method == TruncatedMeanMethod::empirical) d.seed = cfg.seeds.front();
  return truncated_means(d, cfg.phi, N, cfg.mean_method, cfg.empirical_samples);
}

inline double dyadic_exceedance(const std::vector<double>& x, const PhiFunction& phi) {
  const std::size_t N = x.size() - 1;
  std::size_t blocks = 0;
  std::size_t hit = 0;
  for (std::size_t lo = 1; 2 * lo - 1 <= N; lo *= 2) {
    ++blocks;
    for (std::size_t n = lo; n < 2 * lo; ++n) {
      if (std::fabs(x[n]) > phi(static_cast<double>(n))) {
        ++hit;
        break;
      }
    }
  }
  return blocks ? static_cast<double>(hit) / static_cast<double>(blocks) : 0.0;
}

inline void finish(LlnReport& r, const std::string& statistic_name) {
  r.passed = static_cast<std::size_t>(std::count_if(r.results.begin(), r.results.end(),
                                                    [](const SeedResult& s) { return s.pass; }));
  r.all_pass = r.passed == r.results.size();
  for (const auto& c : r.membership.report.hypotheses) r.report.hypotheses.push_back(c);
  r.report.hypothesis("moment_flag_known", true, r.moment.finite ? 1.0 : 0.0,
                      std::string("E[phi^<-(|X|)] ") + (r.moment.finite ? "finite" : "infinite") + ": " +
                          r.moment.basis);
  // Both sides of the equivalence: all seeds pass exactly when the moment
  // condition holds.
  const bool consistent = r.all_pass == r.moment.finite;
  std::ostringstream detail;
  detail << r.passed << "/" << r.results.size() << " seeds below threshold (" << statistic_name << ")";
  r.report.conclusion("moment_iff_statistic", consistent, static_cast<double>(r.passed), detail.str());
}

inline std::vector<double> centred(const std::vector<double>& x, const TruncatedMeanTable& mu) {
  std::vector<double> s(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) s[k] = x[k] - mu.values[k];
  return s;
}

}  // namespace detail

/// t_n = (1/u_n) sum_{k<=n} p_{n-k} q_k (X_k - mu_k) on one seed's path.
inline std::vector<double> lln_mean_stream(const ExperimentConfig& cfg, const TruncatedMeanTable& mu,
                                           std::uint64_t seed) {
  const std::size_t N = cfg.horizon;
  const auto x = sample_path(cfg.distribution, seed, kPathStream, N);
  const auto s = detail::centred(x, mu);
  const auto q = cfg.triple.q.terms(N);
  const auto u = cfg.triple.normalisers(N);
  std::vector<double> qs(N + 1);
  for (std::size_t k = 0; k <= N; ++k) qs[k] = q[k] * s[k];
  std::vector<double> conv;
  if (auto c = cfg.triple.p.constant_value()) {
    conv.resize(N + 1);
    double acc = 0.0;
    for (std::size_t k = 0; k <= N; ++k) {
      acc += qs[k];
      conv[k] = *c * acc;
    }
  } else {
    conv = cauchy_convolve(cfg.triple.p, Sequence::from_prefix(qs), N);
  }
  std::vector<double> t(N + 1);
  for (std::size_t n = 0; n <= N; ++n) t[n] = conv[n] / u[n];
  return t;
}

/// Per seed: max |t_n| over [N/2, N] against the threshold, and the dyadic
/// exceedance frequency of |X_n| > phi(n).
inline LlnReport slln_mean_experiment(const ExperimentConfig& cfg) {
  const std::size_t N = detail::check_horizon(cfg);
  LlnReport r;
  r.report.title = "SLLN under (V, " + cfg.triple.label + ") with " + cfg.distribution.label;
  const auto mu = detail::means_for(cfg, N);
  r.moment = phi_inverse_moment(cfg.distribution, cfg.phi);
  PhiSetExtras extras;
  const bool tilde = !cfg.triple.p.is_constant_one();
  if (tilde) extras.v = cfg.triple.p;
  // (V, v, q, u) is read through the pair (u, v q).
  const Sequence q_pair = tilde ? times(cfg.triple.p, cfg.triple.q) : cfg.triple.q;
  r.membership = phi_set_membership(cfg.triple.u, q_pair, cfg.phi, tilde ? PhiSet::Phi_V_tilde : PhiSet::Phi_V,
                                    std::min<std::size_t>(N, 100000), extras);
  r.results.resize(cfg.seeds.size());
  parallel_for(
      cfg.seeds.size(),
      [&](std::size_t i) {
        const auto seed = cfg.seeds[i];
        const auto t = lln_mean_stream(cfg, mu, seed);
        SeedResult& out = r.results[i];
        out.seed = seed;
        out.threshold = cfg.threshold;
        double peak = 0.0;
        for (std::size_t n = N / 2; n <= N; ++n) peak = std::max(peak, std::fabs(t[n]));
        out.statistic = peak;
        out.pass = peak < cfg.threshold;
        out.exceedance = detail::dyadic_exceedance(sample_path(cfg.distribution, seed, kPathStream, N), cfg.phi);
      },
      cfg.threads);
  detail::finish(r, "trailing max |t_n| over [N/2, N]");
  return r;
}

/// A power-series instance for the lab: the method, the evaluation map
/// h_uq and the phi it induces, plus the pair (u, q) and D_u coefficients.
struct LlnPowerInstance {
  std::string name;
  PowerSeriesMethod method;
  Sequence u;
  RealFunction h_uq;
  PhiFunction phi;
  /// T is evaluated at h_uq(m) for these m.
  std::vector<double> m_grid;
};

/// q_n = v_n = 1/n!, D_u = e^x, h_uq(m) = m, phi(m) = e^m m!/m^m.
inline LlnPowerInstance borel_lln_instance(int j_max = 12) {
  LlnPowerInstance in;
  in.name = "borel";
  in.method.p = builtin::one();
  in.method.q = builtin::inv_factorial();
  in.method.v = builtin::inv_factorial();
  in.method.label = "borel";
  in.u = partial_sums(builtin::inv_factorial()).with_label("sum 1/k!");
  in.h_uq.fn = [](double m) { return m; };
  in.h_uq.label = "m";
  RealFunction f;
  // Stirling's series past m = 30 avoids the cancellation in
  // m + log m! - m log m.
  f.fn = [](double m) {
    if (m <= 0.0) return 1.0;
    if (m < 30.0) return std::exp(m + std::lgamma(m + 1.0) - m * std::log(m));
    const double r = 1.0 / m;
    return std::sqrt(2.0 * std::numbers::pi * m) * std::exp(r / 12.0 - r * r * r / 360.0 + std::pow(r, 5) / 1260.0);
  };
  f.label = "e^m m!/m^m";
  in.phi = make_phi(std::move(f));
  for (int j = 2; j <= j_max; ++j) in.m_grid.push_back(std::ldexp(1.0, j));
  return in;
}

/// u_n = n + 1, q = v = 1, D_u = 1/(1 - x), h_uq(m) = m/(m + 1),
/// phi(m) = D(h)/h^m = (m + 1)(1 + 1/m)^m.
inline LlnPowerInstance abel_lln_instance(int j_max = 12) {
  LlnPowerInstance in;
  in.name = "abel";
  in.method.p = builtin::one();
  in.method.q = builtin::one();
  in.method.v = builtin::one();
  in.method.radius = 1.0;
  in.method.label = "abel";
  in.u = builtin::index_plus(1.0);
  in.h_uq.fn = [](double m) { return m / (m + 1.0); };
  in.h_uq.label = "m/(m+1)";
  RealFunction f;
  f.fn = [](double m) { return m <= 0.0 ? 1.0 : (m + 1.0) * std::exp(m * std::log1p(1.0 / m)); };
  f.label = "(m+1)(1+1/m)^m";
  in.phi = make_phi(std::move(f));
  for (int j = 2; j <= j_max; ++j) in.m_grid.push_back(std::ldexp(1.0, j));
  return in;
}

inline LlnPowerInstance lln_power_instance(std::string_view name, int j_max = 12) {
  if (name == "borel") return borel_lln_instance(j_max);
  if (name == "abel") return abel_lln_instance(j_max);
  throw std::invalid_argument("lln: unknown power-series instance '" + std::string(name) + "'");
}

struct SubadditivityEvidence {
  double max_ratio = 0.0;  // max phi^<-(a+b) / (phi^<-(a) + phi^<-(b))
  bool ok = false;
};

/// phi^<- subadditive on a logarithmic grid of a, b in [phi(0), 1e8].
inline SubadditivityEvidence inverse_subadditivity(const PhiFunction& phi) {
  SubadditivityEvidence e;
  std::vector<double> grid;
  for (double y = std::max(phi(0.0), 1e-3) * 1.0001; y <= 1e8; y *= 1.7) grid.push_back(y);
  std::vector<double> inv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) inv[i] = phi_inverse(phi, grid[i]);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    for (std::size_t j = i; j < grid.size(); ++j) {
      const double den = inv[i] + inv[j];
      if (den <= 0.0) continue;
      e.max_ratio = std::max(e.max_ratio, phi_inverse(phi, grid[i] + grid[j]) / den);
    }
  }
  e.ok = e.max_ratio <= 1.0 + 1e-9;
  return e;
}

/// Per seed: max |T(h_uq(m))| over the upper half of the m grid. The
/// distribution and threshold come from cfg; phi, q and v from the
/// instance.
inline LlnReport slln_pseries_experiment(const ExperimentConfig& cfg, const LlnPowerInstance& in) {
  if (cfg.seeds.empty()) throw std::invalid_argument("lln: at least one seed is required");
  if (in.m_grid.size() < 2) throw std::invalid_argument("lln: the m grid needs at least two points");
  LlnReport r;
  r.report.title = "SLLN under (P, 1, q, v) " + in.name + " with " + cfg.distribution.label;
  r.moment = phi_inverse_moment(cfg.distribution, in.phi);
  PhiSetExtras extras;
  extras.d_coeffs = in.method.v;
  extras.radius = in.method.radius;
  extras.h_uq = in.h_uq;
  r.membership = phi_set_membership(in.u, in.method.q, in.phi, PhiSet::Phi_uq, 200, extras);
  const auto sub = inverse_subadditivity(in.phi);
  r.membership.report.hypothesis("phi_inverse_subadditive", sub.ok, sub.max_ratio,
                                 "max phi^<-(a+b)/(phi^<-(a)+phi^<-(b))");
  r.membership.member = r.membership.report.hypotheses_hold();

  const auto dist = cfg.distribution;
  const auto phi = in.phi;
  r.results.resize(cfg.seeds.size());
  parallel_for(
      cfg.seeds.size(),
      [&](std::size_t i) {
        const auto seed = cfg.seeds[i];
        auto batch = [dist, phi, seed](std::size_t count) {
          const CounterStream st(seed, kPathStream);
          std::vector<double> s(count);
          for (std::size_t k = 0; k < count; ++k) {
            s[k] = sample(dist, st, k) - truncated_mean_closed(dist, phi(static_cast<double>(k)));
          }
          return s;
        };
        const Sequence s = Sequence::memoized("X - mu", batch);
        double peak = 0.0;
        for (std::size_t g = in.m_grid.size() / 2; g < in.m_grid.size(); ++g) {
          peak = std::max(peak, std::fabs(eval_T(in.method, s, in.h_uq(in.m_grid[g])).value));
        }
        SeedResult& out = r.results[i];
        out.seed = seed;
        out.threshold = cfg.threshold;
        out.statistic = peak;
        out.pass = peak < cfg.threshold;
      },
      cfg.threads);
  detail::finish(r, "trailing max |T(h_uq(m))|");
  return r;
}

/// Per seed and lambda: max |c_n| over [N/2, N] against
/// threshold (1 - 1/lambda), the window carrying a fraction 1 - 1/lambda of
/// the weight.
inline LlnReport slln_moving_experiment(const ExperimentConfig& cfg, const std::vector<double>& lambda_grid) {
  const std::size_t N = detail::check_horizon(cfg);
  if (lambda_grid.empty()) throw std::invalid_argument("lln: empty lambda grid");
  for (double l : lambda_grid) {
    if (!(l > 1.0)) throw std::invalid_argument("lln: lambda must exceed 1");
  }
  LlnReport r;
  r.report.title = "SLLN under moving (V, " + cfg.triple.label + ") with " + cfg.distribution.label;
  const auto mu = detail::means_for(cfg, N);
  r.moment = phi_inverse_moment(cfg.distribution, cfg.phi);
  PhiSetExtras extras;
  extras.u_fn = cfg.u_fn;
  r.membership = phi_set_membership(cfg.triple.u, cfg.triple.q, cfg.phi, PhiSet::Phi_D,
                                    std::min<std::size_t>(N, 100000), extras);
  const std::size_t L = lambda_grid.size();
  r.results.resize(cfg.seeds.size() * L);
  parallel_for(
      cfg.seeds.size(),
      [&](std::size_t i) {
        const auto seed = cfg.seeds[i];
        const auto s = Sequence::from_prefix(detail::centred(sample_path(cfg.distribution, seed, kPathStream, N), mu));
        for (std::size_t l = 0; l < L; ++l) {
          const auto ma = voronoi_moving_average(cfg.triple, make_window_map(cfg.u_fn, lambda_grid[l]), s, N);
          double peak = 0.0;
          for (std::size_t n = N / 2; n <= N; ++n) peak = std::max(peak, std::fabs(ma.c.values[n]));
          SeedResult& out = r.results[i * L + l];
          out.seed = seed;
          out.lambda = lambda_grid[l];
          out.threshold = cfg.threshold * (1.0 - 1.0 / lambda_grid[l]);
          out.statistic = peak;
          out.pass = peak < out.threshold;
        }
      },
      cfg.threads);
  detail::finish(r, "trailing max |c_n| over [N/2, N]");
  return r;
}

// --------------------------------------------------------------- Baum-Katz

struct BaumKatzOptions {
  double gamma = 2.0;
  std::vector<double> epsilons = {1.0};
  bool max_mode = false;
  std::size_t replicates = 200;
  std::size_t points_per_decade = 10;
  /// Increase over the last decade below which the sum counts as bounded.
  double plateau_tol = 1e-3;
};

struct BaumKatzSeries {
  double epsilon = 0.0;
  std::vector<double> probability;   // P-hat at each grid point
  std::vector<double> partial_sum;   // sum of n^-1 P-hat up to each grid point
  double last_decade_increase = 0.0;
  bool bounded = false;
};

struct BaumKatzReport {
  std::vector<std::size_t> grid;     // geometric n-grid in [1, N]
  std::vector<double> weight;        // H(n_j) - H(n_{j-1})
  std::vector<BaumKatzSeries> series;
  MomentEvidence moment;
  double phi_index = 0.0;
  Report report;
};

/// Index rho of phi from log-slopes at x = 1e4, 1e5, 1e6.
inline double phi_regular_variation_index(const PhiFunction& phi, double* spread = nullptr) {
  std::vector<double> idx;
  for (double x : {1e4, 1e5, 1e6}) idx.push_back(std::log(phi(2.0 * x) / phi(x)) / std::log(2.0));
  if (spread) *spread = *std::max_element(idx.begin(), idx.end()) - *std::min_element(idx.begin(), idx.end());
  return idx.back();
}

/// Geometric grid of distinct integers in [1, N], roughly k points per
/// decade, always ending at N.
inline std::vector<std::size_t> geometric_grid(std::size_t N, std::size_t per_decade) {
  if (N < 1 || per_decade < 1) throw std::invalid_argument("geometric_grid: N and points per decade must be positive");
  std::vector<std::size_t> g;
  const double step = std::pow(10.0, 1.0 / static_cast<double>(per_decade));
  for (double x = 1.0; x < static_cast<double>(N); x *= step) {
    const auto n = static_cast<std::size_t>(std::llround(x));
    if (g.empty() || n > g.back()) g.push_back(n);
  }
  if (g.empty() || g.back() != N) g.push_back(N);
  return g;
}

/// Partial sums of sum n^-1 P[|sum_{i<=n} (X_i - mu_{i+s})| > phi(n/(gamma-1)) eps]
/// with s = ceil(n/(gamma-1)), or of the running maximum over k <= n in
/// max mode. P is the fraction of replicates exceeding; replicate r is the
/// path of (cfg.seeds[0], stream 1 + r) and serves every n. Each grid point
/// stands for the n in (n_{j-1}, n_j] and carries their harmonic weight.
inline BaumKatzReport baum_katz_sums(const ExperimentConfig& cfg, const BaumKatzOptions& opt) {
  const std::size_t N = detail::check_horizon(cfg);
  if (!(opt.gamma > 1.0)) throw std::invalid_argument("baum_katz: gamma must exceed 1");
  if (opt.epsilons.empty()) throw std::invalid_argument("baum_katz: empty epsilon grid");
  if (opt.replicates == 0) throw std::invalid_argument("baum_katz: at least one replicate is required");
  BaumKatzReport r;
  r.report.title = "Baum-Katz sums with " + cfg.distribution.label;
  r.grid = geometric_grid(N, opt.points_per_decade);
  double h_prev = 0.0;
  std::size_t n_prev = 0;
  for (std::size_t n : r.grid) {
    double h = h_prev;
    for (std::size_t k = n_prev + 1; k <= n; ++k) h += 1.0 / static_cast<double>(k);
    r.weight.push_back(h - h_prev);
    h_prev = h;
    n_prev = n;
  }
  const double g1 = opt.gamma - 1.0;
  const auto shift = [g1](std::size_t n) {
    return static_cast<std::size_t>(std::ceil(static_cast<double>(n) / g1 - 1e-12));
  };
  const std::size_t top = N + shift(N);
  const auto mu = detail::means_for(cfg, top);
  std::vector<double> mu_cum(top + 2, 0.0);
  for (std::size_t k = 0; k <= top; ++k) mu_cum[k + 1] = mu_cum[k] + mu.values[k];
  const bool zero_mu = std::all_of(mu.values.begin(), mu.values.end(), [](double v) { return v == 0.0; });

  const std::size_t G = r.grid.size();
  const std::size_t E = opt.epsilons.size();
  std::vector<double> bound(G);
  for (std::size_t j = 0; j < G; ++j) bound[j] = cfg.phi(static_cast<double>(r.grid[j]) / g1);

  // exceed[rep][j * E + e]
  std::vector<std::vector<char>> exceed(opt.replicates, std::vector<char>(G * E, 0));
  const auto seed = cfg.seeds.front();
  parallel_for(
      opt.replicates,
      [&](std::size_t rep) {
        const auto x = sample_path(cfg.distribution, seed, replicate_stream(rep), N);
        std::vector<double> S(N + 1, 0.0);  // S[n] = sum_{1<=i<=n} X_i
        for (std::size_t i = 1; i <= N; ++i) S[i] = S[i - 1] + x[i];
        double running = 0.0;
        std::size_t k_done = 0;
        for (std::size_t j = 0; j < G; ++j) {
          const std::size_t n = r.grid[j];
          const std::size_t s = shift(n);
          double stat = 0.0;
          if (!opt.max_mode) {
            stat = std::fabs(S[n] - (mu_cum[n + s + 1] - mu_cum[1 + s]));
          } else if (zero_mu) {
            for (std::size_t k = k_done + 1; k <= n; ++k) running = std::max(running, std::fabs(S[k]));
            k_done = n;
            stat = running;
          } else {
            for (std::size_t k = 1; k <= n; ++k) {
              stat = std::max(stat, std::fabs(S[k] - (mu_cum[k + s + 1] - mu_cum[1 + s])));
            }
          }
          for (std::size_t e = 0; e < E; ++e) exceed[rep][j * E + e] = stat > bound[j] * opt.epsilons[e] ? 1 : 0;
        }
      },
      cfg.threads);

  std::size_t decade_start = 0;
  for (std::size_t j = 0; j < G; ++j) {
    if (static_cast<double>(r.grid[j]) * 10.0 <= static_cast<double>(N) * (1.0 + 1e-12)) decade_start = j;
  }
  for (std::size_t e = 0; e < E; ++e) {
    BaumKatzSeries bs;
    bs.epsilon = opt.epsilons[e];
    double acc = 0.0;
    for (std::size_t j = 0; j < G; ++j) {
      std::size_t hits = 0;
      for (std::size_t rep = 0; rep < opt.replicates; ++rep) hits += exceed[rep][j * E + e];
      const double p = static_cast<double>(hits) / static_cast<double>(opt.replicates);
      bs.probability.push_back(p);
      acc += p * r.weight[j];
      bs.partial_sum.push_back(acc);
    }
    bs.last_decade_increase = bs.partial_sum.back() - bs.partial_sum[decade_start];
    bs.bounded = bs.last_decade_increase < opt.plateau_tol;
    r.series.push_back(std::move(bs));
  }

  double spread = 0.0;
  r.phi_index = phi_regular_variation_index(cfg.phi, &spread);
  r.moment = phi_inverse_moment(cfg.distribution, cfg.phi);
  r.report.hypothesis("phi_regularly_varying", spread <= 0.01, spread, "spread of log-slope index estimates");
  r.report.hypothesis("rho_positive", r.phi_index > 0.0, r.phi_index);
  r.report.hypothesis("gamma_gt_1", true, opt.gamma);
  r.report.hypothesis("moment_flag_known", true, r.moment.finite ? 1.0 : 0.0, r.moment.basis);
  bool consistent = true;
  for (const auto& bs : r.series) consistent = consistent && bs.bounded == r.moment.finite;
  r.report.conclusion("moment_iff_bounded_sums", consistent, r.series.front().last_decade_increase,
                      std::string(opt.max_mode ? "maximal" : "plain") + " form, increase over the last decade");
  if (static_cast<double>(N) < 10.0) r.report.notes.push_back("grid spans less than a decade");
  return r;
}

}  // namespace voronoi
