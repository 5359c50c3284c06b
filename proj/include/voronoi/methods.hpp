#pragma once

// Weight triples (p, q, u) and the registry of named special cases:
// Euler, Norlund, Cesaro, Riesz, logarithmic, Jajte and Chow-Lai means,
// the Abel, Borel and logarithmic power-series methods, and the deferred
// Cesaro and logarithmic moving averages.

#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "voronoi/convolution.hpp"
#include "voronoi/expression.hpp"
#include "voronoi/sequence.hpp"

namespace voronoi {

/// The triple defining a (V, p_n, q_n, u_n) mean.
struct WeightTriple {
  Sequence p;
  Sequence q;
  Sequence u;
  std::string label;

  /// u_0..u_N, rejecting any zero normaliser.
  [[nodiscard]] std::vector<double> normalisers(std::size_t N) const {
    auto uv = u.terms(N);
    for (std::size_t n = 0; n <= N; ++n) {
      if (uv[n] == 0.0) {
        throw evaluation_error("weight triple '" + label + "': u_n = 0 at n = " + std::to_string(n));
      }
    }
    return uv;
  }
};

inline WeightTriple make_triple(Sequence p, Sequence q, Sequence u, std::string label = {}) {
  if (label.empty()) label = "(" + p.label() + ", " + q.label() + ", " + u.label() + ")";
  return WeightTriple{std::move(p), std::move(q), std::move(u), std::move(label)};
}

enum class MethodKind { mean, power_series, moving_average };

struct MethodParams {
  std::map<std::string, double> numbers;
  std::map<std::string, Sequence> sequences;
};

struct MethodDescriptor {
  std::string name;
  std::map<std::string, double> parameters;
  MethodKind kind = MethodKind::mean;
  WeightTriple triple;
  /// Coefficients of D(x) = sum v_n x^n; for mean kinds v = diff(u).
  Sequence v;
  double radius = std::numeric_limits<double>::infinity();
  /// Continuous weight u(x) with u(n) = u_n, where one is registered.
  RealFunction u_fn;
  double lambda = 0.0;
  std::vector<std::string> notes;
};

inline std::vector<std::string> standard_method_names() {
  return {"euler",     "norlund",  "cesaro",       "riesz",
          "cesaro_c1", "logarithmic_mean",         "jajte",
          "chow_lai",  "abel",     "borel",        "log_power_series",
          "deferred_cesaro",       "log_moving_average"};
}

namespace detail {

inline double number_param(const MethodParams& params, const std::string& key,
                           std::optional<double> fallback = std::nullopt) {
  if (auto it = params.numbers.find(key); it != params.numbers.end()) return it->second;
  if (fallback) return *fallback;
  throw std::invalid_argument("missing numeric parameter '" + key + "'");
}

inline Sequence sequence_param(const MethodParams& params, const std::string& key) {
  if (auto it = params.sequences.find(key); it != params.sequences.end()) return it->second;
  throw std::invalid_argument("missing sequence parameter '" + key + "'");
}

inline RealFunction linear_weight(double shift) {
  RealFunction f;
  f.fn = [shift](double x) { return x + shift; };
  f.inverse = [shift](double y) { return y - shift; };
  std::ostringstream label;
  label << "x+" << shift;
  f.label = label.str();
  return f;
}

inline RealFunction log_weight(double shift) {
  RealFunction f;
  f.fn = [shift](double x) { return std::log(x + shift); };
  f.inverse = [shift](double y) { return std::exp(y) - shift; };
  std::ostringstream label;
  label << "log(x+" << shift << ")";
  f.label = label.str();
  return f;
}

}  // namespace detail

/// Parameters that instantiate a registered method when none are given:
/// euler p = 1/2, cesaro k = 2, norlund p = n+1, riesz q = n+1, jajte
/// (q, u) = (1, n+1), chow_lai (p, u) = (1, n+1).
inline MethodParams default_method_params(std::string_view name) {
  MethodParams m;
  if (name == "euler") m.numbers["p"] = 0.5;
  if (name == "cesaro") m.numbers["k"] = 2.0;
  if (name == "norlund") m.sequences["p"] = builtin::index_plus(1.0);
  if (name == "riesz") m.sequences["q"] = builtin::index_plus(1.0);
  if (name == "jajte") {
    m.sequences["q"] = builtin::one();
    m.sequences["u"] = builtin::index_plus(1.0);
  }
  if (name == "chow_lai") {
    m.sequences["p"] = builtin::one();
    m.sequences["u"] = builtin::index_plus(1.0);
  }
  return m;
}

/// Instantiates a named summability method. Numeric parameters: euler "p",
/// cesaro "k", deferred_cesaro / log_moving_average "lambda". Sequence
/// parameters: norlund "p", riesz "q", jajte "q" and "u", chow_lai "p" and "u".
inline MethodDescriptor make_standard_method(std::string_view name, const MethodParams& params = {}) {
  MethodDescriptor d;
  d.name = std::string(name);
  auto finish_mean = [&d] {
    d.kind = MethodKind::mean;
    d.v = difference_sequence(d.triple.u);
    d.triple.label = d.name;
  };

  if (name == "euler") {
    const double p = detail::number_param(params, "p");
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("euler: p must lie in (0, 1)");
    d.parameters["p"] = p;
    d.triple = make_triple(builtin::power_over_factorial(1.0 - p), builtin::power_over_factorial(p),
                           builtin::inv_factorial());
    d.notes.push_back("u_n = (p*q)_n = 1/n!; terms underflow past n ~ 170");
    finish_mean();
  } else if (name == "norlund") {
    Sequence p = detail::sequence_param(params, "p");
    d.triple = make_triple(p, builtin::one(), partial_sums(p));
    finish_mean();
  } else if (name == "cesaro") {
    const double k = detail::number_param(params, "k");
    if (!(k > 0.0)) throw std::invalid_argument("cesaro: k must be positive");
    d.parameters["k"] = k;
    // (p*1)_n = Gamma(n+k+1)/(Gamma(n+1)Gamma(k+1))
    d.triple = make_triple(builtin::cesaro_weight(k), builtin::one(), builtin::cesaro_weight(k + 1.0));
    finish_mean();
  } else if (name == "riesz") {
    Sequence q = detail::sequence_param(params, "q");
    d.triple = make_triple(builtin::one(), q, partial_sums(q));
    finish_mean();
  } else if (name == "cesaro_c1") {
    d.triple = make_triple(builtin::one(), builtin::one(), builtin::index_plus(1.0));
    d.u_fn = detail::linear_weight(1.0);
    finish_mean();
  } else if (name == "logarithmic_mean") {
    d.triple = make_triple(builtin::one(), builtin::reciprocal(1.0), builtin::harmonic());
    finish_mean();
  } else if (name == "jajte") {
    d.triple = make_triple(builtin::one(), detail::sequence_param(params, "q"),
                           detail::sequence_param(params, "u"));
    finish_mean();
  } else if (name == "chow_lai") {
    d.triple = make_triple(detail::sequence_param(params, "p"), builtin::one(),
                           detail::sequence_param(params, "u"));
    finish_mean();
  } else if (name == "abel") {
    d.kind = MethodKind::power_series;
    d.triple = make_triple(builtin::one(), builtin::one(), builtin::index_plus(1.0), "abel");
    d.v = builtin::one();
    d.radius = 1.0;
    d.notes.push_back("D(x) = 1/(1-x)");
  } else if (name == "borel") {
    d.kind = MethodKind::power_series;
    d.triple = make_triple(builtin::one(), builtin::inv_factorial(), partial_sums(builtin::inv_factorial()),
                           "borel");
    d.v = builtin::inv_factorial();
    d.radius = std::numeric_limits<double>::infinity();
    d.notes.push_back("D(x) = e^x");
  } else if (name == "log_power_series") {
    d.kind = MethodKind::power_series;
    d.triple = make_triple(builtin::one(), builtin::reciprocal(1.0), builtin::harmonic(), "log_power_series");
    d.v = builtin::reciprocal(1.0);
    d.radius = 1.0;
    d.notes.push_back(
        "v_n = 1/(n+1) (differences of u_n = H_{n+1}), so D(x) = -log(1-x)/x; the 1/x factor "
        "tends to 1 as x -> 1- and does not change the limit");
  } else if (name == "deferred_cesaro") {
    const double lambda = detail::number_param(params, "lambda", 2.0);
    if (!(lambda > 1.0)) throw std::invalid_argument("deferred_cesaro: lambda must exceed 1");
    d.kind = MethodKind::moving_average;
    d.parameters["lambda"] = lambda;
    d.lambda = lambda;
    d.triple = make_triple(builtin::one(), builtin::one(), builtin::index_plus(0.0), "deferred_cesaro");
    d.u_fn = detail::linear_weight(0.0);
    d.v = difference_sequence(d.triple.u);
    d.notes.push_back("u(x) = x, so u_0 = 0; c_n is defined for n >= 1");
  } else if (name == "log_moving_average") {
    const double lambda = detail::number_param(params, "lambda", 2.0);
    if (!(lambda > 1.0)) throw std::invalid_argument("log_moving_average: lambda must exceed 1");
    d.kind = MethodKind::moving_average;
    d.parameters["lambda"] = lambda;
    d.lambda = lambda;
    d.triple = make_triple(builtin::one(), builtin::reciprocal(1.0), builtin::log_shift(2.0),
                           "log_moving_average");
    d.u_fn = detail::log_weight(2.0);
    d.v = difference_sequence(d.triple.u);
    d.notes.push_back("u(x) = log(x+2): shifted from log x so that u_0 != 0");
  } else {
    throw std::invalid_argument("unknown method '" + std::string(name) + "'");
  }
  return d;
}

}  // namespace voronoi
