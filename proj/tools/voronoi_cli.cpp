// voronoi: command-line front end.
//
// CSV goes to stdout or --out; verdict blocks go to stderr.
// Exit codes: 0 success (including "hypotheses not met"), 1 usage, config or
// evaluation error, 2 a verifier reported a violated conclusion.

#include <CLI11.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "voronoi/voronoi.hpp"

namespace {

using namespace voronoi;

struct Common {
  std::size_t n = 0;
  double tol = 1e-2;
  std::size_t window = 0;
  std::string out;
  std::vector<std::uint64_t> seeds;
  std::optional<std::uint64_t> seed;
  std::vector<double> lambda;
};

struct MethodArgs {
  std::string method;
  std::vector<std::string> params;
  std::string p;
  std::string q;
  std::string u;
  std::string seq = "alt01";
};

void add_common(CLI::App* sub, Common& c, std::size_t default_n) {
  c.n = default_n;
  sub->add_option("--n", c.n, "Horizon N")->capture_default_str();
  sub->add_option("--tol", c.tol, "Limit-detection tolerance")->capture_default_str();
  sub->add_option("--window", c.window, "Trailing window (0 = automatic)")->capture_default_str();
  sub->add_option("--out", c.out, "CSV output path (default stdout)");
  sub->add_option("--seeds", c.seeds, "Seed list")->delimiter(',');
  sub->add_option("--seed", c.seed, "Single seed");
  sub->add_option("--lambda", c.lambda, "Lambda list")->delimiter(',');
}

void add_method(CLI::App* sub, MethodArgs& m, const std::string& default_method) {
  m.method = default_method;
  sub->add_option("--method", m.method, "Registry method name")->capture_default_str();
  sub->add_option("--param", m.params, "Method parameter key=value (number or sequence)");
  sub->add_option("--p", m.p, "Custom p sequence");
  sub->add_option("--q", m.q, "Custom q sequence");
  sub->add_option("--u", m.u, "Custom u sequence");
  sub->add_option("--seq", m.seq, "Input sequence s")->capture_default_str();
}

class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw std::invalid_argument("cannot open output file '" + path + "'");
  }
  std::ostream& os() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

MethodParams parse_params(const std::string& method, const std::vector<std::string>& items) {
  MethodParams params = default_method_params(method);
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("--param expects key=value, got '" + item + "'");
    const std::string key = detail::trim(std::string_view(item).substr(0, eq));
    const std::string value = detail::trim(std::string_view(item).substr(eq + 1));
    char* end = nullptr;
    const double x = std::strtod(value.c_str(), &end);
    if (!value.empty() && end == value.c_str() + value.size()) {
      params.numbers[key] = x;
      params.sequences.erase(key);
    } else {
      params.sequences[key] = parse_sequence(value);
      params.numbers.erase(key);
    }
  }
  return params;
}

MethodDescriptor resolve_method(const MethodArgs& m) {
  const bool custom = !m.p.empty() || !m.q.empty() || !m.u.empty();
  if (!custom) return make_standard_method(m.method, parse_params(m.method, m.params));
  if (m.p.empty() || m.q.empty() || m.u.empty()) throw std::invalid_argument("--p, --q and --u must be given together");
  MethodDescriptor d;
  d.name = "custom";
  d.kind = MethodKind::mean;
  d.triple = make_triple(parse_sequence(m.p), parse_sequence(m.q), parse_sequence(m.u));
  d.triple.label = "(V, " + d.triple.p.label() + ", " + d.triple.q.label() + ", " + d.triple.u.label() + ")";
  d.v = difference_sequence(d.triple.u);
  return d;
}

std::vector<std::uint64_t> seed_list(const Common& c, std::vector<std::uint64_t> fallback) {
  std::vector<std::uint64_t> s = c.seeds;
  if (c.seed) s.push_back(*c.seed);
  return s.empty() ? fallback : s;
}

int finish(const Report& r) {
  std::cerr << r.render();
  return r.verdict() == Verdict::violated ? 2 : 0;
}

void print_limit(const std::string& what, const LimitVerdict& v) {
  std::cerr << what << ": " << to_string(v.status);
  if (v.estimate) std::cerr << " to " << format_double(*v.estimate);
  std::cerr << "\n";
}

// ------------------------------------------------------------- subcommands

int run_convolve(const Common& c, const std::string& p, const std::string& q, const std::string& kind) {
  const auto P = parse_sequence(p);
  const auto Q = parse_sequence(q);
  std::vector<double> values;
  if (kind == "voronoi") {
    values = voronoi_convolve(P, Q, c.n);
  } else if (kind == "cauchy") {
    values = cauchy_convolve(P, Q, c.n);
  } else {
    throw std::invalid_argument("--kind must be voronoi or cauchy");
  }
  Sink sink(c.out);
  CsvWriter w(sink.os());
  w.header({"n", "value"});
  for (std::size_t n = 0; n < values.size(); ++n) w.row({n, values[n]});
  return 0;
}

int run_mean(const Common& c, const MethodArgs& m) {
  const auto d = resolve_method(m);
  if (d.kind != MethodKind::mean) throw std::invalid_argument("mean: '" + d.name + "' is not a mean");
  const auto s = parse_sequence(m.seq);
  const auto t = voronoi_mean(d.triple, s, c.n);
  Sink sink(c.out);
  CsvWriter w(sink.os());
  w.header({"n", "t_n"});
  for (std::size_t n = 0; n < t.values.size(); ++n) w.row({n, t.values[n]});
  std::cerr << "== mean " << d.triple.label << " of " << s.label() << ", N = " << c.n << "\n";
  for (const auto& f : t.flags) std::cerr << "  flag: " << f << "\n";
  print_limit("limit", detect_limit(t.values, c.tol, c.window));
  return 0;
}

int run_regularity(const Common& c, const MethodArgs& m) {
  const auto d = resolve_method(m);
  const auto r = regularity_report(d.triple, c.n, RegularityOptions{.tol = 1e-6, .cond_ii_tol = 1e-3, .window = c.window});
  Sink sink(c.out);
  CsvWriter w(sink.os());
  w.header({"n", "cond_i", "cond_iii"});
  for (std::size_t n = 0; n < r.cond_iii.size(); ++n) w.row({n, r.cond_i_ratio[n], r.cond_iii[n]});
  return finish(r.report);
}

int run_tauberian(const Common& c, const MethodArgs& m, const std::string& direction) {
  const auto d = resolve_method(m);
  const auto s = parse_sequence(m.seq);
  TcoDirection dir;
  if (direction == "v_to_omega") {
    dir = TcoDirection::V_to_omega;
  } else if (direction == "omega_to_v") {
    dir = TcoDirection::omega_to_V;
  } else {
    throw std::invalid_argument("--direction must be v_to_omega or omega_to_v");
  }
  TcoMaps maps;
  if (c.lambda.empty()) {
    maps = default_tco_maps();
  } else {
    for (double l : c.lambda) {
      maps.upper.push_back(ceil_scale_map(l));
      maps.lower.push_back(floor_divide_map(l));
    }
  }
  const auto r = tauberian_tco(d.triple, s, maps, dir, c.n);
  const auto t = voronoi_mean(d.triple, s, c.n);
  Sink sink(c.out);
  CsvWriter w(sink.os());
  w.header({"n", "t_n"});
  for (std::size_t n = 0; n < t.values.size(); ++n) w.row({n, t.values[n]});
  for (const auto& e : r.per_map) {
    std::cerr << "  " << e.condition << " " << e.map << ": membership_ratio = " << format_double(e.membership_ratio)
              << ", liminf = " << format_double(e.liminf) << "\n";
  }
  return finish(r.report);
}

int run_inclusion(const Common& c, const std::string& q, const std::string& u, const std::string& qt,
                  const std::string& ut, const std::string& seq) {
  const auto r = thm4_inclusion_check(parse_sequence(q), parse_sequence(u), parse_sequence(qt), parse_sequence(ut),
                                      parse_sequence(seq), c.n, VerifyOptions{c.tol, c.window});
  Sink sink(c.out);
  CsvWriter w(sink.os());
  w.header({"n", "t_n"});
  for (std::size_t n = 0; n < r.conclusion_values.size(); ++n) w.row({n, r.conclusion_values[n]});
  return finish(r.report);
}

int run_moving(const Common& c, const MethodArgs& m, const std::string& u_expr) {
  const auto d = resolve_method(m);
  if (d.kind == MethodKind::power_series) throw std::invalid_argument("moving: '" + d.name + "' is a power series");
  RealFunction u_fn = d.u_fn;
  if (!u_expr.empty()) u_fn = parse_function(u_expr);
  if (!u_fn.fn) throw std::invalid_argument("moving: custom triples need --u-fn");
  std::vector<double> lambdas = c.lambda;
  if (lambdas.empty()) lambdas = d.kind == MethodKind::moving_average ? std::vector{d.lambda} : std::vector{1.5, 2.0, 4.0};
  std::vector<WindowMap> maps;
  for (double l : lambdas) maps.push_back(make_window_map(u_fn, l));
  const auto s = parse_sequence(m.seq);
  const auto r = thm5_equivalence_check(d.triple, maps, s, c.n, VerifyOptions{c.tol, c.window});

  std::cerr << "window: c_n sums (p o qs)_k over floor(w) < k <= n, w = u^{-1}(u(n)/lambda), u(x) = " << u_fn.label
            << "\n";
  Sink sink(c.out);
  CsvWriter w(sink.os());
  w.header({"n", "lambda", "c_n", "target"});
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const auto ma = voronoi_moving_average(d.triple, maps[i], s, c.n);
    const double target = r.per_lambda[i].target;
    for (std::size_t n = 0; n < ma.c.values.size(); ++n) w.row({n, lambdas[i], ma.c.values[n], target});
  }
  return finish(r.report);
}

int run_pseries(const Common& c, const MethodArgs& m, std::vector<double> xs, std::size_t trunc) {
  const auto d = resolve_method(m);
  if (d.kind != MethodKind::power_series) throw std::invalid_argument("pseries: '" + d.name + "' is not a power series");
  auto ps = power_series_method(d);
  if (trunc) ps.truncation = trunc;
  if (xs.empty()) xs = default_x_grid(ps.radius);
  const auto s = parse_sequence(m.seq);
  const auto sweep = eval_T_grid(ps, s, xs);
  Sink sink(c.out);
  CsvWriter w(sink.os());
  w.header({"x", "T", "tail_bound"});
  for (const auto& v : sweep.values) w.row({v.x, v.value, v.tail_bound});
  for (const auto& f : sweep.failures) std::cerr << "  skipped: " << f << "\n";
  PowerSeriesOptions opts;
  opts.tol = c.tol;
  opts.window = c.window;
  opts.radius = d.radius;
  const auto r = thm9i_abelian_check(d.triple, s, xs, c.n, opts);
  return finish(r.report);
}

int run_extras(const Common& c, const std::string& kind, const std::string& seq, std::vector<double> hs) {
  const auto s = parse_sequence(seq);
  Sink sink(c.out);
  CsvWriter w(sink.os());
  if (kind == "ingham") {
    const auto r = ingham_sweep(s, c.n, c.tol);
    w.header({"x", "value"});
    for (std::size_t i = 0; i < r.x.size(); ++i) w.row({r.x[i], r.values[i]});
    print_limit("ingham limit", r.limit);
    return 0;
  }
  RiemannVariant variant;
  if (kind == "riemann_series") {
    variant = RiemannVariant::R1_series;
  } else if (kind == "riemann_mean") {
    variant = RiemannVariant::R1_mean;
  } else if (kind == "riemann_mean_scaled") {
    variant = RiemannVariant::R1_mean_scaled;
  } else {
    throw std::invalid_argument("--kind must be ingham, riemann_series, riemann_mean or riemann_mean_scaled");
  }
  if (hs.empty())
    for (int j = 1; j <= 10; ++j) hs.push_back(std::ldexp(1.0, -j));
  w.header({"h", "value", "tail_estimate", "terms", "tail_ok"});
  std::vector<double> values;
  for (double h : hs) {
    const auto v = riemann_transform(s, h, variant, c.n, c.tol);
    w.row({v.h, v.value, v.tail_estimate, v.N, v.tail_ok});
    if (!v.tail_ok) std::cerr << "  flag: truncation tail above tol at h = " << format_double(h) << "\n";
    values.push_back(v.value);
  }
  print_limit("riemann limit", detect_limit(values, c.tol, std::min<std::size_t>(2, values.size())));
  return 0;
}

struct LlnArgs {
  std::string dist = "normal";
  std::string phi;
  std::string mode = "mean";
  std::string instance = "abel";
  std::string u_fn;
  std::string means = "closed_form";
  double threshold = 0.05;
  double gamma = 2.0;
  std::vector<double> eps{1.0};
  bool max_mode = false;
  std::size_t replicates = 200;
  std::size_t per_decade = 10;
  std::size_t samples = 100000;
  int j_max = 12;
};

int run_lln(const Common& c, const MethodArgs& m, const LlnArgs& a) {
  ExperimentConfig cfg;
  cfg.distribution = dist::parse(a.dist);
  if (!a.phi.empty()) cfg.phi = make_phi(a.phi);
  if (!m.p.empty() || !m.q.empty() || !m.u.empty() || m.method != "cesaro_c1") cfg.triple = resolve_method(m).triple;
  if (!a.u_fn.empty()) cfg.u_fn = parse_function(a.u_fn);
  cfg.horizon = c.n;
  cfg.seeds = seed_list(c, {1});
  cfg.threshold = a.threshold;
  cfg.empirical_samples = a.samples;
  if (a.means == "closed_form") {
    cfg.mean_method = TruncatedMeanMethod::closed_form;
  } else if (a.means == "quadrature") {
    cfg.mean_method = TruncatedMeanMethod::quadrature;
  } else if (a.means == "empirical") {
    cfg.mean_method = TruncatedMeanMethod::empirical;
  } else {
    throw std::invalid_argument("--means must be closed_form, quadrature or empirical");
  }

  Sink sink(c.out);
  CsvWriter w(sink.os());
  if (a.mode == "baum_katz") {
    BaumKatzOptions opt;
    opt.gamma = a.gamma;
    opt.epsilons = a.eps;
    opt.max_mode = a.max_mode;
    opt.replicates = a.replicates;
    opt.points_per_decade = a.per_decade;
    const auto r = baum_katz_sums(cfg, opt);
    w.header({"n", "epsilon", "probability", "partial_sum"});
    for (const auto& s : r.series)
      for (std::size_t j = 0; j < r.grid.size(); ++j) w.row({r.grid[j], s.epsilon, s.probability[j], s.partial_sum[j]});
    return finish(r.report);
  }

  LlnReport r;
  if (a.mode == "mean") {
    r = slln_mean_experiment(cfg);
  } else if (a.mode == "moving") {
    r = slln_moving_experiment(cfg, c.lambda.empty() ? std::vector{2.0} : c.lambda);
  } else if (a.mode == "pseries") {
    r = slln_pseries_experiment(cfg, lln_power_instance(a.instance, a.j_max));
  } else {
    throw std::invalid_argument("--mode must be mean, moving, pseries or baum_katz");
  }
  w.header({"seed", "lambda", "statistic", "threshold", "pass", "exceedance"});
  for (const auto& s : r.results) w.row({s.seed, s.lambda, s.statistic, s.threshold, s.pass, s.exceedance});
  std::cerr << "passed " << r.passed << " of " << r.results.size() << "\n";
  return finish(r.report);
}

int run_selftest_cmd() {
  bool all = true;
  for (const auto& t : run_selftest()) {
    std::cout << (t.ok ? "ok   " : "FAIL ") << t.name << ": " << t.detail << "\n";
    all = all && t.ok;
  }
  return all ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Voronoi-means summability toolkit"};
  app.set_config("--config", "", "INI file; [section] keys match subcommand flags", false);
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);

  Common c_convolve, c_mean, c_regularity, c_tauberian, c_inclusion, c_moving, c_pseries, c_extras, c_lln;
  MethodArgs m_mean, m_regularity, m_tauberian, m_moving, m_pseries, m_lln;

  auto* convolve = app.add_subcommand("convolve", "Voronoi or Cauchy convolution of p and q");
  std::string conv_p = "one";
  std::string conv_q = "one";
  std::string conv_kind = "voronoi";
  add_common(convolve, c_convolve, 100);
  convolve->add_option("--p", conv_p, "p sequence")->capture_default_str();
  convolve->add_option("--q", conv_q, "q sequence")->capture_default_str();
  convolve->add_option("--kind", conv_kind, "voronoi or cauchy")->capture_default_str();

  auto* mean = app.add_subcommand("mean", "Voronoi mean t_n of a sequence");
  add_common(mean, c_mean, 1000);
  add_method(mean, m_mean, "cesaro_c1");

  auto* regularity = app.add_subcommand("regularity", "Regularity conditions (i)-(iii) for a triple");
  add_common(regularity, c_regularity, 10000);
  add_method(regularity, m_regularity, "cesaro_c1");

  auto* tauberian = app.add_subcommand("tauberian", "Tauberian conditions with lambda index maps");
  std::string direction = "v_to_omega";
  add_common(tauberian, c_tauberian, 2000);
  add_method(tauberian, m_tauberian, "cesaro_c1");
  tauberian->add_option("--direction", direction, "v_to_omega or omega_to_v")->capture_default_str();

  auto* inclusion = app.add_subcommand("inclusion", "Inclusion (V,1,q,u) into (V,1,q~,u~)");
  std::string inc_q = "n+1";
  std::string inc_u = "n+1";
  std::string inc_qt = "one";
  std::string inc_ut = "n+1";
  std::string inc_seq = "1/(n+1)";
  add_common(inclusion, c_inclusion, 2000);
  inclusion->add_option("--q", inc_q, "q")->capture_default_str();
  inclusion->add_option("--u", inc_u, "u")->capture_default_str();
  inclusion->add_option("--q-tilde", inc_qt, "q~")->capture_default_str();
  inclusion->add_option("--u-tilde", inc_ut, "u~")->capture_default_str();
  inclusion->add_option("--seq", inc_seq, "Input sequence s")->capture_default_str();

  auto* moving = app.add_subcommand("moving", "Voronoi moving averages over a lambda family");
  std::string u_expr;
  add_common(moving, c_moving, 10000);
  add_method(moving, m_moving, "cesaro_c1");
  moving->add_option("--u-fn", u_expr, "Continuous weight u(x)");

  auto* pseries = app.add_subcommand("pseries", "Power-series method T(x) on an x-grid");
  std::vector<double> xs;
  std::size_t trunc = 0;
  add_common(pseries, c_pseries, 1000);
  add_method(pseries, m_pseries, "abel");
  pseries->add_option("--x", xs, "x-grid")->delimiter(',');
  pseries->add_option("--trunc", trunc, "Truncation cap (0 = default)");

  auto* extras = app.add_subcommand("extras", "Ingham and Riemann transforms");
  std::string ex_kind = "ingham";
  std::string ex_seq = "[0,1]";
  std::vector<double> hs;
  add_common(extras, c_extras, 1000);
  extras->add_option("--kind", ex_kind, "ingham, riemann_series, riemann_mean, riemann_mean_scaled")
      ->capture_default_str();
  extras->add_option("--seq", ex_seq, "Input sequence")->capture_default_str();
  extras->add_option("--h-grid", hs, "h-grid for Riemann variants")->delimiter(',');

  auto* lln = app.add_subcommand("lln", "Strong-law Monte Carlo experiments");
  LlnArgs la;
  add_common(lln, c_lln, 1000);
  add_method(lln, m_lln, "cesaro_c1");
  lln->add_option("--dist", la.dist, "Distribution, e.g. normal(0,1), cauchy, pareto(1.5)")->capture_default_str();
  lln->add_option("--phi", la.phi, "phi(x) expression (default x+1)");
  lln->add_option("--mode", la.mode, "mean, moving, pseries or baum_katz")->capture_default_str();
  lln->add_option("--instance", la.instance, "Power-series instance: abel or borel")->capture_default_str();
  lln->add_option("--u-fn", la.u_fn, "Continuous u(x) for moving mode");
  lln->add_option("--means", la.means, "Truncated means: closed_form, quadrature, empirical")->capture_default_str();
  lln->add_option("--samples", la.samples, "Sample size for empirical means")->capture_default_str();
  lln->add_option("--threshold", la.threshold, "Trailing-max threshold")->capture_default_str();
  lln->add_option("--gamma", la.gamma, "Baum-Katz gamma")->capture_default_str();
  lln->add_option("--eps", la.eps, "Baum-Katz epsilons")->delimiter(',');
  lln->add_flag("--max-mode", la.max_mode, "Baum-Katz maximal version");
  lln->add_option("--replicates", la.replicates, "Baum-Katz replicates per grid point")->capture_default_str();
  lln->add_option("--per-decade", la.per_decade, "Baum-Katz grid points per decade")->capture_default_str();
  lln->add_option("--j-max", la.j_max, "Power-series grid m = 2^2..2^j_max")->capture_default_str();

  auto* selftest = app.add_subcommand("selftest", "Run the invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (convolve->parsed()) return run_convolve(c_convolve, conv_p, conv_q, conv_kind);
    if (mean->parsed()) return run_mean(c_mean, m_mean);
    if (regularity->parsed()) return run_regularity(c_regularity, m_regularity);
    if (tauberian->parsed()) return run_tauberian(c_tauberian, m_tauberian, direction);
    if (inclusion->parsed()) return run_inclusion(c_inclusion, inc_q, inc_u, inc_qt, inc_ut, inc_seq);
    if (moving->parsed()) return run_moving(c_moving, m_moving, u_expr);
    if (pseries->parsed()) return run_pseries(c_pseries, m_pseries, xs, trunc);
    if (extras->parsed()) return run_extras(c_extras, ex_kind, ex_seq, hs);
    if (lln->parsed()) return run_lln(c_lln, m_lln, la);
    if (selftest->parsed()) return run_selftest_cmd();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
