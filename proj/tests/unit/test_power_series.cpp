#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "voronoi/power_series.hpp"

using namespace voronoi;
using Catch::Approx;

namespace {

PowerSeriesMethod abel() { return power_series_method(make_standard_method("abel")); }
PowerSeriesMethod borel() { return power_series_method(make_standard_method("borel")); }

}  // namespace

TEST_CASE("radius estimates") {
  CHECK(estimate_radius(builtin::one(), 200) == 1.0);
  CHECK(std::isinf(estimate_radius(builtin::inv_factorial(), 200)));
  CHECK(estimate_radius(builtin::geometric(2.0), 200) == Approx(0.5).epsilon(1e-12));
  CHECK(estimate_radius(builtin::reciprocal(1.0), 2000) == Approx(1.0).epsilon(1e-4));
  CHECK(estimate_radius(builtin::index_plus(1.0), 2000) == Approx(1.0).epsilon(1e-4));
  CHECK(std::isinf(estimate_radius(Sequence::from_prefix({1.0, 2.0}), 100)));
  CHECK_THROWS_AS(estimate_radius(builtin::zero(), 100), std::invalid_argument);
  CHECK_THROWS_AS(estimate_radius(builtin::one(), 10), std::invalid_argument);
}

TEST_CASE("eval_T examples") {
  for (double x : {0.1, 0.5, 0.9, 0.999}) CHECK(eval_T(abel(), builtin::one(), x).value == Approx(1.0).epsilon(1e-13));
  CHECK(eval_T(abel(), builtin::alt01(), 0.9).value == Approx(1.0 / 1.9).epsilon(1e-13));
  CHECK(eval_T(abel(), builtin::alt01(), 0.999).value == Approx(1.0 / 1.999).epsilon(1e-12));
  const double borel10 = std::exp(-10.0) * std::cosh(10.0);
  CHECK(eval_T(borel(), builtin::alt01(), 10.0).value == Approx(borel10).epsilon(1e-13));
  // Far beyond the double range of x^n/n!.
  CHECK(eval_T(borel(), builtin::alt01(), 4096.0).value == Approx(0.5).epsilon(1e-12));
  CHECK(eval_T(borel(), builtin::one(), 4096.0).value == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("eval_T errors and tail bound") {
  CHECK_THROWS_AS(eval_T(abel(), builtin::one(), 1.0), std::invalid_argument);
  CHECK_THROWS_AS(eval_T(abel(), builtin::one(), -0.1), std::invalid_argument);
  auto capped = abel();
  capped.truncation = 1000;
  CHECK_THROWS_AS(eval_T(capped, builtin::one(), 0.9999), evaluation_error);
  auto fixed = abel();
  fixed.truncation = 50;
  fixed.tail_bound_mode = TailBoundMode::none;
  auto f = eval_T(fixed, builtin::one(), 0.5);
  CHECK(f.terms == 50);
  CHECK(std::isnan(f.tail_bound));
  auto g = eval_T(abel(), builtin::alt01(), 0.99);
  CHECK(g.tail_bound >= 0.0);
  CHECK(g.tail_bound < 1e-11);
  // D(x) = 1 - x vanishes nowhere in (0, 1) but D = 0 for v = (0, 0, ...).
  PowerSeriesMethod zero_d{builtin::one(), builtin::one(), builtin::zero(), 1.0, 1000000, TailBoundMode::geometric, "zero"};
  CHECK_THROWS_AS(eval_T(zero_d, builtin::one(), 0.5), evaluation_error);
}

TEST_CASE("abel special case against the direct formula") {
  const std::vector<Sequence> seqs{builtin::alt01(), parse_sequence("(-1)^n*(n+1)"), parse_sequence("1/(n+1)"),
                                   parse_sequence("sin(n)")};
  for (const auto& s : seqs) {
    for (double x : {0.3, 0.7, 0.95}) {
      double direct = 0.0;
      for (std::size_t n = 0; n < 5000; ++n) direct += s(n) * std::pow(x, static_cast<double>(n));
      direct *= 1.0 - x;
      CHECK(eval_T(abel(), s, x).value == Approx(direct).margin(1e-12));
    }
  }
}

TEST_CASE("borel special case against the direct formula") {
  const std::vector<Sequence> seqs{builtin::alt01(), builtin::alternating(), parse_sequence("1/(n+1)")};
  for (const auto& s : seqs) {
    for (double x : {0.5, 3.0, 10.0, 20.0}) {
      long double term = 1.0L;
      long double direct = 0.0L;
      for (int n = 0; n <= 200; ++n) {
        if (n > 0) term *= static_cast<long double>(x) / n;
        direct += s(n) * term;
      }
      const double oracle = static_cast<double>(std::exp(-static_cast<long double>(x)) * direct);
      CHECK(eval_T(borel(), s, x).value == Approx(oracle).margin(1e-12));
    }
  }
}

TEST_CASE("T(x) tends to the first ratio as x -> 0+") {
  auto m = power_series_method(make_standard_method("logarithmic_mean"), 2000);
  auto s = parse_sequence("n+3");
  CHECK(eval_T(m, s, 0.0).value == 3.0);
  CHECK(eval_T(m, s, 1e-9).value == Approx(3.0).epsilon(1e-8));
}

TEST_CASE("underflowing coefficients are reported") {
  // 1/n! computed in doubles reaches 0 near n = 178 while x^n/n! still grows at x = 1000.
  auto v = Sequence::from_function("1/n!", [](std::size_t n) { return std::exp(-std::lgamma(n + 1.0)); });
  PowerSeriesMethod m{builtin::one(), v, v, std::numeric_limits<double>::infinity(), 1000000,
                      TailBoundMode::geometric, "double borel"};
  CHECK(eval_T(m, builtin::one(), 10.0).value == Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(eval_T(m, builtin::one(), 1000.0), evaluation_error);
}

TEST_CASE("reduced form agrees") {
  for (const char* name : {"abel", "borel", "log_power_series"}) {
    const auto m = power_series_method(make_standard_method(name));
    for (const auto& s : {builtin::alt01(), parse_sequence("(-1)^n*(n+1)")}) {
      const auto red = reduced_form(m, s);
      for (double x : default_x_grid(m.radius)) {
        if (x > 200.0) continue;
        const double a = eval_T(m, s, x).value;
        const double b = eval_T(red.method, red.r, x).value;
        CHECK(std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(a)));
      }
    }
  }
  // Dense p: euler-type Norlund weights.
  auto tri = make_triple(builtin::cesaro_weight(2.0), builtin::one(), builtin::cesaro_weight(3.0));
  const auto m = power_series_method(tri, 1.0);
  const auto red = reduced_form(m, builtin::alt01());
  for (double x : {0.3, 0.6, 0.9}) {
    CHECK(eval_T(m, builtin::alt01(), x).value == Approx(eval_T(red.method, red.r, x).value).epsilon(1e-12));
  }
}

TEST_CASE("default x grids") {
  auto g = default_x_grid(1.0);
  REQUIRE(g.size() == 12);
  CHECK(g.front() == 0.5);
  CHECK(g.back() == 1.0 - 1.0 / 4096.0);
  auto h = default_x_grid(std::numeric_limits<double>::infinity());
  REQUIRE(h.size() == 13);
  CHECK(h.back() == 4096.0);
}

TEST_CASE("abelian check") {
  auto c1 = make_standard_method("cesaro_c1").triple;
  auto r = thm9i_abelian_check(c1, builtin::alt01(), {}, 10000);
  CHECK(r.report.verdict() == Verdict::holds);
  CHECK(r.radius == 1.0);
  CHECK(r.deviation < 1e-3);
  CHECK(*r.mean_limit.estimate == Approx(0.5).margin(1e-3));

  auto c = thm9i_abelian_check(c1, Sequence::constant(3.0), {0.2, 0.5, 0.9}, 1000);
  for (const auto& v : c.samples) CHECK(v.value == Approx(3.0).epsilon(1e-13));

  auto lm = make_standard_method("logarithmic_mean").triple;
  auto l = thm9i_abelian_check(lm, builtin::one(), {}, 5000);
  CHECK(l.samples.back().value == Approx(1.0).epsilon(1e-12));
  CHECK(l.report.find("T_to_mean_limit")->ok);

  // Borel: R infinite, so the hypothesis fails.
  auto b = make_standard_method("borel").triple;
  auto br = thm9i_abelian_check(b, builtin::alt01(), {1.0, 2.0}, 200, {1e-2, 0, std::numeric_limits<double>::infinity()});
  CHECK(br.report.verdict() == Verdict::not_applicable);
}

TEST_CASE("tauberian O_L check") {
  auto c1 = make_standard_method("cesaro_c1").triple;
  auto r = thm9ii_tauberian_check(c1, builtin::alt01(), {}, 10000);
  CHECK(r.report.verdict() == Verdict::holds);
  CHECK(r.lower_bound_C == 0.0);
  CHECK(*r.mean_limit.estimate == Approx(0.5).margin(1e-3));

  auto c = thm9ii_tauberian_check(c1, Sequence::constant(2.0), {}, 2000);
  CHECK(c.report.verdict() == Verdict::holds);

  auto bad = thm9ii_tauberian_check(c1, parse_sequence("(-1)^n*(n+1)"), {}, 10000);
  CHECK_FALSE(bad.report.find("ratio_O_L_1")->ok);
  CHECK(bad.report.verdict() == Verdict::not_applicable);
  // The power series still has limit 0: T(x) = (1-x)/(1+x)^2.
  CHECK(bad.samples.back().value == Approx((1.0 / 4096) / std::pow(2.0 - 1.0 / 4096, 2)).epsilon(1e-9));
}

TEST_CASE("karamata check") {
  RealFunction one_fn{[](double) { return 1.0; }, {}, "1"};
  auto one = builtin::one();
  auto r = thm9iii_karamata_check(one, one, one, 1.0, one_fn, {}, {}, 10000);
  CHECK(r.normalisation.back() == Approx(1.0).margin(1e-3));
  CHECK(r.report.find("D_normalisation")->ok);
  CHECK(r.laplace_identity_residual <= 1e-12);
  CHECK(r.report.verdict() == Verdict::holds);

  // The printed form carries an extra (1-x) and tends to 0 here.
  auto p = thm9iii_karamata_check(one, one, one, 1.0, one_fn, {}, {}, 2000, {1e-2, KaramataForm::printed});
  CHECK(p.normalisation.back() < 1e-3);
  CHECK_FALSE(p.report.find("D_normalisation")->ok);

  auto z = thm9iii_karamata_check(one, one, builtin::zero(), 1.0, one_fn, {}, {}, 2000);
  for (double e : z.converse_estimates) CHECK(e == 0.0);
  for (const auto& v : z.samples) CHECK(v.value == 0.0);

  auto a = thm9iii_karamata_check(one, one, builtin::alt01(), 1.0, one_fn, {}, {}, 10000);
  for (double e : a.converse_estimates) CHECK(e >= 0.0);
  CHECK(a.report.verdict() == Verdict::holds);

  // Without the Gamma factor the ratio tends to Gamma(1 + rho).
  auto g = thm9iii_karamata_check(one, one, one, 0.5, one_fn, {}, {}, 4000, {1e-2, KaramataForm::laplace, false});
  CHECK(g.normalisation_target == Approx(std::tgamma(1.5)));
}

TEST_CASE("ratio checks") {
  auto c1 = make_standard_method("cesaro_c1").triple;
  auto c = thm9iv_v_ratio_check(c1, Sequence::constant(2.0), RatioMode::iv, {}, 2000);
  CHECK(c.difference_bound == 0.0);
  CHECK(c.report.find("ratio_to_T_limit")->ok);
  // v = 1 has index 0, which part (iv) excludes.
  CHECK_FALSE(c.report.find("rho_admissible")->ok);

  auto lm = make_standard_method("logarithmic_mean").triple;
  auto l = thm9iv_v_ratio_check(lm, builtin::one(), RatioMode::v, {}, 5000);
  CHECK(l.report.verdict() == Verdict::holds);
  CHECK(*l.ratio_limit.estimate == Approx(1.0).epsilon(1e-12));

  auto ab = make_standard_method("abel").triple;
  auto bad = thm9iv_v_ratio_check(ab, parse_sequence("1+(-1)^n"), RatioMode::v, {}, 5000);
  CHECK_FALSE(bad.report.find("difference_o")->ok);
  CHECK(bad.report.verdict() == Verdict::not_applicable);
  auto bad_iv = thm9iv_v_ratio_check(ab, parse_sequence("1+(-1)^n"), RatioMode::iv, {}, 5000);
  CHECK_FALSE(bad_iv.report.find("difference_O_L")->ok);
}

TEST_CASE("regular and slow variation evidence") {
  auto e = regular_variation_evidence(parse_sequence("sq(n+1)"), 4000);
  CHECK(e.ok);
  CHECK(e.rho == Approx(2.0).margin(1e-2));
  CHECK_FALSE(regular_variation_evidence(builtin::geometric(1.01), 4000).ok);
  RealFunction logf{[](double x) { return std::log(x); }, {}, "log"};
  CHECK(slow_variation_evidence(logf, 1e4).ok);
  RealFunction sq{[](double x) { return x * x; }, {}, "x^2"};
  CHECK_FALSE(slow_variation_evidence(sq, 1e4).ok);
}
