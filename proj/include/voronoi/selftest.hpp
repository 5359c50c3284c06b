#pragma once

// Quick invariant suite behind `voronoi selftest`: one check per module
// property, each a few milliseconds to a second.

#include <cmath>
#include <exception>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "voronoi/classical_extras.hpp"
#include "voronoi/convolution.hpp"
#include "voronoi/csv.hpp"
#include "voronoi/lln.hpp"
#include "voronoi/methods.hpp"
#include "voronoi/moving_average.hpp"
#include "voronoi/power_series.hpp"
#include "voronoi/rng.hpp"
#include "voronoi/voronoi_mean.hpp"

namespace voronoi {

struct SelftestCase {
  std::string name;
  bool ok = false;
  std::string detail;
};

namespace detail {

inline std::string num(double x) { return format_double(x); }

using SelftestFn = std::function<std::pair<bool, std::string>()>;

inline std::vector<std::pair<std::string, SelftestFn>> selftest_registry() {
  std::vector<std::pair<std::string, SelftestFn>> t;

  t.emplace_back("philox_known_answer", [] {
    const auto out = Philox4x32::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0});
    const bool ok = out == Philox4x32::Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1};
    return std::pair{ok, std::string("pi-digit vector")};
  });

  t.emplace_back("convolution_telescoping", [] {
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> num_d(-9, 9);
    std::uniform_int_distribution<int> den_d(1, 8);
    double worst = 0.0;
    for (int rep = 0; rep < 10; ++rep) {
      std::vector<double> p(201);
      std::vector<double> q(201);
      for (auto& x : p) x = static_cast<double>(num_d(rng)) / den_d(rng);
      for (auto& x : q) x = static_cast<double>(num_d(rng)) / den_d(rng);
      const auto P = Sequence::from_prefix(p);
      const auto Q = Sequence::from_prefix(q);
      const auto c = cauchy_convolve(P, Q, 200);
      const auto d = voronoi_convolve(P, Q, 200);
      double acc = 0.0;
      for (std::size_t n = 0; n <= 200; ++n) {
        acc += d[n];
        worst = std::max(worst, std::fabs(acc - c[n]) / std::max(1.0, std::fabs(c[n])));
      }
    }
    return std::pair{worst <= 1e-12, "max relative residual " + num(worst)};
  });

  t.emplace_back("euler_identity", [] {
    const auto p = builtin::power_over_factorial(0.5);
    const auto c = cauchy_convolve(p, p, 150);
    double worst = 0.0;
    for (std::size_t n = 0; n <= 150; ++n) worst = std::max(worst, std::fabs(c[n] * std::tgamma(n + 1.0) - 1.0));
    return std::pair{worst <= 1e-12, "max relative error " + num(worst)};
  });

  t.emplace_back("regularity_cesaro_c1", [] {
    const auto r = regularity_report(make_standard_method("cesaro_c1").triple, 10000);
    const double err = std::fabs(r.cond_iii_at_N - 1.0);
    return std::pair{err <= 1e-12 && r.regular_evidence, "cond (iii) at N minus 1: " + num(err)};
  });

  t.emplace_back("regularity_nonregular", [] {
    const auto r = regularity_report(make_triple(builtin::one(), builtin::one(), parse_sequence("sq(n+1)")), 10000);
    return std::pair{r.report.verdict() == Verdict::violated && r.cond_iii_at_N < 1e-3,
                     "cond (iii) at N = " + num(r.cond_iii_at_N)};
  });

  t.emplace_back("abel_alt01", [] {
    const auto m = power_series_method(make_standard_method("abel"));
    const double v = eval_T(m, builtin::alt01(), 0.999).value;
    const double err = std::fabs(v - 1.0 / 1.999);
    return std::pair{err <= 1e-3, "T(0.999) = " + num(v)};
  });

  t.emplace_back("borel_alt01", [] {
    const auto m = power_series_method(make_standard_method("borel"));
    const double v = eval_T(m, builtin::alt01(), 10.0).value;
    const double err = std::fabs(v - std::exp(-10.0) * std::cosh(10.0));
    return std::pair{err <= 1e-6, "T(10) = " + num(v)};
  });

  t.emplace_back("decomposition_round_trip", [] {
    const auto r = thm1_decompose(make_standard_method("cesaro_c1").triple, builtin::alt01(), 500);
    return std::pair{r.max_residual <= 1e-12, "max residual " + num(r.max_residual)};
  });

  t.emplace_back("moving_average_identity", [] {
    const auto d = make_standard_method("cesaro_c1");
    std::vector<WindowMap> maps;
    for (double l : {1.5, 2.0, 4.0}) maps.push_back(make_window_map(d.u_fn, l));
    const auto r = thm5_equivalence_check(d.triple, maps, builtin::alt01(), 1000);
    return std::pair{r.identity_residual <= 1e-12, "identity residual " + num(r.identity_residual)};
  });

  t.emplace_back("kernel_inversion_registry", [] {
    const auto s = parse_sequence("1+1/(n+1)");
    double worst = 0.0;
    std::string where;
    for (const auto& name : standard_method_names()) {
      const auto d = make_standard_method(name, default_method_params(name));
      if (d.kind != MethodKind::mean) continue;
      const std::size_t N = representable_horizon(d.triple, 200);
      const auto k = invert_kernel(d.triple, voronoi_mean(d.triple, s, N), s, N);
      if (k.max_residual >= worst) {
        worst = k.max_residual;
        where = name;
      }
    }
    return std::pair{worst <= 1e-10, "worst " + num(worst) + " (" + where + ")"};
  });

  t.emplace_back("tco_constant_zero", [] {
    const TcoMaps maps{{ceil_scale_map(2.0)}, {floor_divide_map(2.0)}};
    const auto r = tauberian_tco(make_standard_method("cesaro_c1").triple, Sequence::constant(3.0), maps,
                                 TcoDirection::V_to_omega, 1000);
    return std::pair{r.first == 0.0 && r.second == 0.0, "con3 " + num(r.first) + ", con4 " + num(r.second)};
  });

  t.emplace_back("lln_null_distribution", [] {
    ExperimentConfig cfg;
    cfg.distribution = dist::constant(0.0);
    cfg.horizon = 1000;
    cfg.seeds = {1, 2, 3};
    const auto r = slln_mean_experiment(cfg);
    double worst = 0.0;
    for (const auto& s : r.results) worst = std::max(worst, s.statistic);
    return std::pair{worst == 0.0 && r.all_pass, "max statistic " + num(worst)};
  });

  t.emplace_back("lln_reproducible", [] {
    ExperimentConfig cfg;
    cfg.horizon = 2000;
    cfg.seeds = {4, 5, 6, 7};
    const auto a = slln_mean_experiment(cfg);
    cfg.threads = 1;
    const auto b = slln_mean_experiment(cfg);
    bool same = a.results.size() == b.results.size();
    for (std::size_t i = 0; same && i < a.results.size(); ++i) {
      same = a.results[i].statistic == b.results[i].statistic && a.results[i].exceedance == b.results[i].exceedance;
    }
    return std::pair{same, std::string("bitwise equal across thread counts")};
  });

  t.emplace_back("truncated_means_symmetric", [] {
    bool zero = true;
    for (const auto& d : {dist::normal(), dist::cauchy()}) {
      for (double v : truncated_means(d, linear_phi(1.0), 500).values) zero = zero && v == 0.0;
    }
    return std::pair{zero, std::string("closed forms vanish exactly")};
  });

  t.emplace_back("ingham_riemann_single_term", [] {
    const auto e1 = Sequence::from_prefix({0.0, 1.0});
    bool ok = true;
    for (double x : {10.0, 100.0, 1000.0}) ok = ok && ingham_transform(e1, x) == std::floor(x) / x;
    const double r = riemann_transform(e1, 0.01, RiemannVariant::R1_series).value;
    const double err = std::fabs(r - std::sin(0.01) / 0.01);
    return std::pair{ok && err <= 1e-14, "riemann error " + num(err)};
  });

  t.emplace_back("csv_round_trip", [] {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    bool ok = true;
    for (int i = 0; i < 200; ++i) {
      const double x = d(rng) * std::pow(10.0, i % 30 - 15);
      ok = ok && std::strtod(format_double(x).c_str(), nullptr) == x;
    }
    return std::pair{ok, std::string("shortest round-trip formatting")};
  });

  return t;
}

}  // namespace detail

inline std::vector<SelftestCase> run_selftest() {
  std::vector<SelftestCase> out;
  for (const auto& [name, fn] : detail::selftest_registry()) {
    SelftestCase c;
    c.name = name;
    try {
      auto [ok, detail] = fn();
      c.ok = ok;
      c.detail = std::move(detail);
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace voronoi
