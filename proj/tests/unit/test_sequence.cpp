#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <thread>
#include <vector>

#include "voronoi/methods.hpp"
#include "voronoi/phi.hpp"
#include "voronoi/sequence.hpp"

using namespace voronoi;
using Catch::Approx;

namespace {

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

double binomial(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

}  // namespace

TEST_CASE("prefix sequences honour their tail rule") {
  auto zero_tail = Sequence::from_prefix({3, 1, 4}, Tail::zero);
  CHECK(zero_tail(1) == 1.0);
  CHECK(zero_tail(5) == 0.0);

  auto const_tail = Sequence::from_prefix({3, 1, 4}, Tail::constant, 2.5);
  CHECK(const_tail(100) == 2.5);

  auto strict = Sequence::from_prefix({3, 1, 4}, Tail::error);
  CHECK(strict(2) == 4.0);
  CHECK_THROWS_AS(strict(3), evaluation_error);
  CHECK_THROWS_AS(strict.terms(3), evaluation_error);
}

TEST_CASE("cesaro weights match factorial ratios") {
  CHECK(builtin::cesaro_weight(1.0)(7) == 1.0);
  // Gamma(6) / (Gamma(5) Gamma(2)) = 120 / 24
  CHECK(builtin::cesaro_weight(2.0)(4) == factorial(5) / (factorial(4) * factorial(1)));
  CHECK(builtin::cesaro_weight(2.0)(4) == 5.0);
  // k = 3: C(n+2, 2)
  auto w3 = builtin::cesaro_weight(3.0);
  for (int n = 0; n <= 20; ++n) CHECK(w3(n) == binomial(n + 2, 2));
  // Non-integer k against extended-precision lgamma, n <= 1000.
  auto w = builtin::cesaro_weight(2.5);
  const auto terms = w.terms(1000);
  for (int n = 0; n <= 1000; n += 37) {
    const long double ln = n;
    const double oracle =
        static_cast<double>(std::exp(std::lgamma(ln + 2.5L) - std::lgamma(ln + 1.0L) - std::lgamma(2.5L)));
    CHECK(terms[n] == Approx(oracle).epsilon(1e-12));
  }
}

TEST_CASE("terms and pointwise evaluation agree bit for bit") {
  for (auto seq : {builtin::cesaro_weight(2.5), builtin::power_over_factorial(0.3), builtin::harmonic(),
                   parse_sequence("1/(n+1)^2")}) {
    const auto terms = seq.terms(300);
    for (std::size_t n = 0; n <= 300; ++n) CHECK(terms[n] == seq(n));
    CHECK(seq.terms(300) == terms);
  }
}

TEST_CASE("sequence parser accepts builtins, prefixes and expressions") {
  CHECK(parse_sequence("alt01")(2) == 1.0);
  CHECK(parse_sequence("alt01")(3) == 0.0);
  CHECK(parse_sequence("geometric(0.5)")(3) == 0.125);
  CHECK(parse_sequence("[3,1,4]:const=7")(10) == 7.0);
  CHECK_THROWS_AS(parse_sequence("[3,1,4]:error")(3), evaluation_error);
  CHECK(parse_sequence("sq(n+1)")(4) == 25.0);
  CHECK(parse_sequence("(-1)^n*(n+1)")(3) == -4.0);
  CHECK(parse_sequence("binom(n+2, 2)")(3) == 10.0);
  CHECK_THROWS_AS(parse_sequence("n +* 2"), parse_error);
  CHECK_THROWS_AS(parse_sequence("1/n")(0), evaluation_error);
}

TEST_CASE("registry: cesaro_c1 and logarithmic_mean") {
  auto c1 = make_standard_method("cesaro_c1");
  for (std::size_t n = 0; n <= 1000; ++n) {
    REQUIRE(c1.triple.p(n) == 1.0);
    REQUIRE(c1.triple.q(n) == 1.0);
    REQUIRE(c1.triple.u(n) == static_cast<double>(n + 1));
  }
  auto lm = make_standard_method("logarithmic_mean");
  double h = 0.0;
  for (std::size_t n = 0; n <= 1000; ++n) {
    h += 1.0 / static_cast<double>(n + 1);
    REQUIRE(lm.triple.q(n) == 1.0 / static_cast<double>(n + 1));
    REQUIRE(lm.triple.u(n) == Approx(h).epsilon(1e-13));
  }
}

TEST_CASE("registry: euler weights satisfy the binomial identity") {
  auto e = make_standard_method("euler", {{{"p", 0.5}}, {}});
  for (int n = 0; n <= 30; ++n) {
    // Direct sum of C(n,k) (1-p)^{n-k} p^k / n! == 1/n!
    double direct = 0.0;
    for (int k = 0; k <= n; ++k) direct += e.triple.p(n - k) * e.triple.q(k);
    CHECK(direct == Approx(1.0 / factorial(n)).epsilon(1e-12));
    CHECK(e.triple.u(n) == Approx(1.0 / factorial(n)).epsilon(1e-14));
    CHECK(e.triple.p(n) == Approx(std::pow(0.5, n) / factorial(n)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(make_standard_method("euler", {{{"p", 1.5}}, {}}), std::invalid_argument);
}

TEST_CASE("registry: cesaro(k) uses u = (p*1)") {
  auto c = make_standard_method("cesaro", {{{"k", 2.0}}, {}});
  double acc = 0.0;
  for (std::size_t n = 0; n <= 1000; ++n) {
    acc += c.triple.p(n);
    REQUIRE(c.triple.u(n) == Approx(acc).epsilon(1e-12));
  }
  CHECK_THROWS_AS(make_standard_method("cesaro", {{{"k", -1.0}}, {}}), std::invalid_argument);
  CHECK_THROWS_AS(make_standard_method("nope"), std::invalid_argument);
}

TEST_CASE("registry: every name instantiates") {
  MethodParams params;
  params.numbers = {{"p", 0.4}, {"k", 1.5}, {"lambda", 2.0}};
  params.sequences = {{"p", builtin::geometric(0.5)}, {"q", builtin::index_plus(1.0)},
                      {"u", builtin::index_plus(1.0)}};
  for (const auto& name : standard_method_names()) {
    auto d = make_standard_method(name, params);
    CHECK(d.name == name);
    CHECK_NOTHROW(d.triple.u.terms(100));
    CHECK_NOTHROW(d.v.terms(100));
  }
  auto lma = make_standard_method("log_moving_average", params);
  CHECK(lma.triple.u(0) == Approx(std::log(2.0)));
  CHECK_FALSE(lma.notes.empty());
}

TEST_CASE("memoised sequences are safe to share across threads") {
  auto h = builtin::harmonic();
  std::vector<std::thread> pool;
  std::vector<double> out(4);
  for (int i = 0; i < 4; ++i) {
    pool.emplace_back([&, i] { out[i] = h(5000 + i); });
  }
  for (auto& t : pool) t.join();
  for (int i = 0; i < 4; ++i) CHECK(out[i] == h.terms(5003)[5000 + i]);
}

TEST_CASE("phi_check on x+1") {
  auto phi = make_phi("x+1");
  const std::vector<double> grid{1, 10, 100};
  auto r = phi_check(phi, grid);
  CHECK(r.strict_increase);
  // (s+1)^2 int_s^inf (x+1)^-2 dx = s+1
  for (std::size_t i = 0; i < grid.size(); ++i) {
    CHECK(r.integral_bound.values[i] == Approx(grid[i] + 1.0).epsilon(1e-9));
  }
  CHECK(r.integral_bound.ok);
  CHECK(r.integral_bound.a == Approx(1.0).epsilon(1e-9));
  CHECK(r.integral_bound.b == Approx(1.0).epsilon(1e-6));

  const std::vector<double> single{5};
  CHECK(phi_check(phi, single).strict_increase);
}

TEST_CASE("phi_check ratio bound for exp") {
  const std::vector<double> grid{1, 2};
  auto r = phi_check(make_phi("exp(x)"), grid);
  CHECK(r.ratio_bound_c == Approx(std::exp(1.0)).epsilon(1e-14));
  CHECK_THROWS_AS(phi_check(make_phi("x-5"), grid), evaluation_error);
}

TEST_CASE("phi_inverse") {
  CHECK(phi_inverse(linear_phi(1.0), 11.0) == 10.0);
  CHECK(phi_inverse(make_phi("sq(x)"), 9.0) == Approx(3.0).epsilon(1e-12));
  auto phi = make_phi("x*log(x+2)");
  const double x = phi_inverse(phi, 100.0, 1e-10);
  CHECK(std::fabs(phi(x) - 100.0) <= 1e-10 * 100.0);
  CHECK(phi_inverse(linear_phi(1.0), 0.5) == 0.0);
  // Round trip on a log grid.
  for (double y = 1.0; y < 1e8; y *= 7.3) {
    const double xi = phi_inverse(phi, phi(y), 1e-12);
    CHECK(std::fabs(phi(xi) - phi(y)) <= 1e-12 * phi(y));
  }
}
