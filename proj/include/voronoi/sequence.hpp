#pragma once

// Evaluable real sequences indexed from n = 0.
//
// A Sequence is an immutable, cheaply copyable handle. Three kinds exist:
// built-in families (constants, Cesaro weights, 1/n!, ...), finite prefixes
// with a tail rule, and closed-form expressions in n. Derived sequences
// whose terms cost O(n) each (partial sums, convolutions) are memoised
// behind a mutex so they can be shared across threads.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "voronoi/error.hpp"
#include "voronoi/expression.hpp"

namespace voronoi {

enum class Tail { zero, constant, error };

/// log|a_n| and sign(a_n). Lets power-series code handle terms such as
/// 1/n! that underflow long before the series has converged.
struct LogTerm {
  double log_abs = -std::numeric_limits<double>::infinity();
  int sign = 0;
};

inline LogTerm log_term_of(double v) {
  if (v == 0.0) return {};
  return {std::log(std::fabs(v)), v > 0.0 ? 1 : -1};
}

namespace detail {

class SequenceImpl {
 public:
  virtual ~SequenceImpl() = default;
  virtual double value(std::size_t n) const = 0;
  virtual void fill(std::size_t count, double* out) const {
    for (std::size_t i = 0; i < count; ++i) out[i] = value(i);
  }
  virtual LogTerm log_term(std::size_t n) const { return log_term_of(value(n)); }
  virtual std::optional<double> constant() const { return std::nullopt; }
  /// Number of leading terms that may be nonzero; everything after is 0.
  virtual std::optional<std::size_t> support() const { return std::nullopt; }
};

class ConstantImpl final : public SequenceImpl {
 public:
  explicit ConstantImpl(double c) : c_(c) {}
  double value(std::size_t) const override { return c_; }
  std::optional<double> constant() const override { return c_; }
  std::optional<std::size_t> support() const override {
    return c_ == 0.0 ? std::optional<std::size_t>(0) : std::nullopt;
  }

 private:
  double c_;
};

class PrefixImpl final : public SequenceImpl {
 public:
  PrefixImpl(std::vector<double> values, Tail tail, double tail_value)
      : values_(std::move(values)), tail_(tail), tail_value_(tail_value) {}

  double value(std::size_t n) const override {
    if (n < values_.size()) return values_[n];
    switch (tail_) {
      case Tail::zero:
        return 0.0;
      case Tail::constant:
        return tail_value_;
      case Tail::error:
        break;
    }
    throw evaluation_error("prefix sequence of length " + std::to_string(values_.size()) +
                           " read at index " + std::to_string(n));
  }

  std::optional<std::size_t> support() const override {
    if (tail_ == Tail::zero || (tail_ == Tail::constant && tail_value_ == 0.0)) {
      std::size_t last = values_.size();
      while (last > 0 && values_[last - 1] == 0.0) --last;
      return last;
    }
    return std::nullopt;
  }

 private:
  std::vector<double> values_;
  Tail tail_;
  double tail_value_;
};

class FunctionImpl final : public SequenceImpl {
 public:
  FunctionImpl(std::function<double(std::size_t)> fn, std::function<LogTerm(std::size_t)> log_fn)
      : fn_(std::move(fn)), log_fn_(std::move(log_fn)) {}
  double value(std::size_t n) const override { return fn_(n); }
  LogTerm log_term(std::size_t n) const override {
    return log_fn_ ? log_fn_(n) : log_term_of(fn_(n));
  }

 private:
  std::function<double(std::size_t)> fn_;
  std::function<LogTerm(std::size_t)> log_fn_;
};

/// Terms produced by a batch rule; the prefix is cached and grown geometrically.
class MemoizedImpl final : public SequenceImpl {
 public:
  using Batch = std::function<std::vector<double>(std::size_t count)>;
  explicit MemoizedImpl(Batch batch) : batch_(std::move(batch)) {}

  double value(std::size_t n) const override {
    std::lock_guard lock(mutex_);
    grow(n + 1);
    return cache_[n];
  }

  void fill(std::size_t count, double* out) const override {
    std::lock_guard lock(mutex_);
    grow(count);
    std::copy_n(cache_.begin(), count, out);
  }

 private:
  void grow(std::size_t count) const {
    if (count <= cache_.size()) return;
    const std::size_t target = std::max<std::size_t>(count, 2 * cache_.size());
    cache_ = batch_(target);
    if (cache_.size() < count) throw evaluation_error("memoised sequence produced too few terms");
  }

  Batch batch_;
  mutable std::mutex mutex_;
  mutable std::vector<double> cache_;
};

/// Cesaro weights Gamma(n+k)/(Gamma(n+1)Gamma(k)) = binom(n+k-1, n).
class CesaroWeightImpl final : public SequenceImpl {
 public:
  explicit CesaroWeightImpl(double k) : k_(k) {}

  double value(std::size_t n) const override {
    double w = 1.0;
    for (std::size_t j = 1; j <= n; ++j) w = (w * (static_cast<double>(j) + k_ - 1.0)) / static_cast<double>(j);
    return w;
  }

  void fill(std::size_t count, double* out) const override {
    double w = 1.0;
    for (std::size_t j = 0; j < count; ++j) {
      if (j > 0) w = (w * (static_cast<double>(j) + k_ - 1.0)) / static_cast<double>(j);
      out[j] = w;
    }
  }

  LogTerm log_term(std::size_t n) const override {
    const double nn = static_cast<double>(n);
    return {std::lgamma(nn + k_) - std::lgamma(nn + 1.0) - std::lgamma(k_), 1};
  }

  std::optional<double> constant() const override {
    return k_ == 1.0 ? std::optional<double>(1.0) : std::nullopt;
  }

 private:
  double k_;
};

/// r^n / n!, evaluated as a running product so it is exact to a few ulps.
class PowerOverFactorialImpl final : public SequenceImpl {
 public:
  explicit PowerOverFactorialImpl(double r) : r_(r) {}

  double value(std::size_t n) const override {
    double w = 1.0;
    for (std::size_t j = 1; j <= n; ++j) w *= r_ / static_cast<double>(j);
    return w;
  }

  void fill(std::size_t count, double* out) const override {
    double w = 1.0;
    for (std::size_t j = 0; j < count; ++j) {
      if (j > 0) w *= r_ / static_cast<double>(j);
      out[j] = w;
    }
  }

  LogTerm log_term(std::size_t n) const override {
    if (r_ == 0.0) return n == 0 ? LogTerm{0.0, 1} : LogTerm{};
    const double nn = static_cast<double>(n);
    const int sign = (r_ < 0.0 && n % 2 == 1) ? -1 : 1;
    return {nn * std::log(std::fabs(r_)) - std::lgamma(nn + 1.0), sign};
  }

 private:
  double r_;
};

}  // namespace detail

class Sequence {
 public:
  /// The zero sequence.
  Sequence() : Sequence(std::make_shared<detail::ConstantImpl>(0.0), "zero") {}

  static Sequence constant(double c) {
    std::ostringstream label;
    label << "const(" << c << ")";
    return Sequence(std::make_shared<detail::ConstantImpl>(c), label.str());
  }

  static Sequence from_prefix(std::vector<double> values, Tail tail = Tail::zero,
                              double tail_value = 0.0) {
    std::ostringstream label;
    label << "[";
    for (std::size_t i = 0; i < values.size(); ++i) label << (i ? "," : "") << values[i];
    label << "]";
    return Sequence(std::make_shared<detail::PrefixImpl>(std::move(values), tail, tail_value),
                    label.str());
  }

  static Sequence from_function(std::string label, std::function<double(std::size_t)> fn,
                                std::size_t domain_start = 0,
                                std::function<LogTerm(std::size_t)> log_fn = {}) {
    Sequence s(std::make_shared<detail::FunctionImpl>(std::move(fn), std::move(log_fn)),
               std::move(label));
    s.domain_start_ = domain_start;
    return s;
  }

  /// Closed-form expression in n, e.g. "sq(n+1)" or "(-1)^n*(n+1)".
  static Sequence from_expression(std::string_view text, std::size_t domain_start = 0) {
    RealFunction f = parse_function(text);
    return from_function(
        std::string(text), [fn = f.fn](std::size_t n) { return fn(static_cast<double>(n)); },
        domain_start);
  }

  /// `batch(count)` must return terms 0..count-1.
  static Sequence memoized(std::string label, detail::MemoizedImpl::Batch batch) {
    return Sequence(std::make_shared<detail::MemoizedImpl>(std::move(batch)), std::move(label));
  }

  static Sequence from_impl(std::shared_ptr<const detail::SequenceImpl> impl, std::string label) {
    return Sequence(std::move(impl), std::move(label));
  }

  /// Term n. Throws evaluation_error below the domain start or on a
  /// non-finite value.
  double operator()(std::size_t n) const {
    if (n < domain_start_) {
      throw evaluation_error("sequence '" + label_ + "' evaluated at " + std::to_string(n) +
                             " below its domain start " + std::to_string(domain_start_));
    }
    const double v = impl_->value(n);
    if (!std::isfinite(v)) {
      throw evaluation_error("sequence '" + label_ + "' is not finite at n = " + std::to_string(n));
    }
    return v;
  }

  /// Terms 0..N inclusive.
  [[nodiscard]] std::vector<double> terms(std::size_t N) const {
    if (domain_start_ > 0) {
      throw evaluation_error("sequence '" + label_ + "' starts at index " +
                             std::to_string(domain_start_));
    }
    std::vector<double> out(N + 1);
    impl_->fill(N + 1, out.data());
    for (std::size_t n = 0; n <= N; ++n) {
      if (!std::isfinite(out[n])) {
        throw evaluation_error("sequence '" + label_ + "' is not finite at n = " +
                               std::to_string(n));
      }
    }
    return out;
  }

  [[nodiscard]] LogTerm log_term(std::size_t n) const { return impl_->log_term(n); }
  [[nodiscard]] std::optional<double> constant_value() const { return impl_->constant(); }
  [[nodiscard]] std::optional<std::size_t> support() const { return impl_->support(); }
  [[nodiscard]] bool is_constant_one() const {
    auto c = constant_value();
    return c && *c == 1.0;
  }
  [[nodiscard]] const std::string& label() const { return label_; }
  [[nodiscard]] std::size_t domain_start() const { return domain_start_; }
  [[nodiscard]] const std::shared_ptr<const detail::SequenceImpl>& impl() const { return impl_; }

  [[nodiscard]] Sequence with_label(std::string label) const {
    Sequence s = *this;
    s.label_ = std::move(label);
    return s;
  }

 private:
  Sequence(std::shared_ptr<const detail::SequenceImpl> impl, std::string label)
      : impl_(std::move(impl)), label_(std::move(label)) {}

  std::shared_ptr<const detail::SequenceImpl> impl_;
  std::string label_;
  std::size_t domain_start_ = 0;
};

/// Pointwise product a_n b_n.
inline Sequence times(const Sequence& a, const Sequence& b) {
  class ProductImpl final : public detail::SequenceImpl {
   public:
    ProductImpl(Sequence a, Sequence b) : a_(std::move(a)), b_(std::move(b)) {}
    double value(std::size_t n) const override { return a_.impl()->value(n) * b_.impl()->value(n); }
    void fill(std::size_t count, double* out) const override {
      std::vector<double> tmp(count);
      a_.impl()->fill(count, out);
      b_.impl()->fill(count, tmp.data());
      for (std::size_t i = 0; i < count; ++i) out[i] *= tmp[i];
    }
    LogTerm log_term(std::size_t n) const override {
      const LogTerm la = a_.log_term(n);
      const LogTerm lb = b_.log_term(n);
      if (la.sign == 0 || lb.sign == 0) return {};
      return {la.log_abs + lb.log_abs, la.sign * lb.sign};
    }
    std::optional<double> constant() const override {
      auto ca = a_.constant_value();
      auto cb = b_.constant_value();
      if (ca && cb) return *ca * *cb;
      if ((ca && *ca == 0.0) || (cb && *cb == 0.0)) return 0.0;
      return std::nullopt;
    }
    std::optional<std::size_t> support() const override {
      auto sa = a_.support();
      auto sb = b_.support();
      if (sa && sb) return std::min(*sa, *sb);
      return sa ? sa : sb;
    }

   private:
    Sequence a_;
    Sequence b_;
  };
  if (a.is_constant_one()) return b;
  if (b.is_constant_one()) return a;
  return Sequence::from_impl(std::make_shared<ProductImpl>(a, b),
                             "(" + a.label() + ")*(" + b.label() + ")");
}

/// Partial sums S_n = a_0 + ... + a_n (compensated summation), memoised.
inline Sequence partial_sums(const Sequence& a) {
  return Sequence::memoized("cumsum(" + a.label() + ")", [a](std::size_t count) {
    std::vector<double> out(count);
    a.impl()->fill(count, out.data());
    double sum = 0.0;
    double comp = 0.0;
    for (auto& v : out) {
      const double y = v - comp;
      const double t = sum + y;
      comp = (t - sum) - y;
      sum = t;
      v = sum;
    }
    return out;
  });
}

namespace builtin {

inline Sequence one() { return Sequence::constant(1.0).with_label("one"); }
inline Sequence zero() { return Sequence::constant(0.0).with_label("zero"); }
inline Sequence impulse() { return Sequence::from_prefix({1.0}).with_label("impulse"); }

/// (1, 0, 1, 0, ...)
inline Sequence alt01() {
  return Sequence::from_function("alt01", [](std::size_t n) { return n % 2 == 0 ? 1.0 : 0.0; });
}

/// (-1)^n
inline Sequence alternating() {
  return Sequence::from_function("alt", [](std::size_t n) { return n % 2 == 0 ? 1.0 : -1.0; });
}

/// n + a
inline Sequence index_plus(double a) {
  std::ostringstream label;
  label << "n+" << a;
  return Sequence::from_function(label.str(),
                                 [a](std::size_t n) { return static_cast<double>(n) + a; });
}

/// 1 / (n + a)
inline Sequence reciprocal(double a) {
  std::ostringstream label;
  label << "1/(n+" << a << ")";
  return Sequence::from_function(label.str(),
                                 [a](std::size_t n) { return 1.0 / (static_cast<double>(n) + a); });
}

/// log(n + c)
inline Sequence log_shift(double c) {
  std::ostringstream label;
  label << "log(n+" << c << ")";
  return Sequence::from_function(label.str(),
                                 [c](std::size_t n) { return std::log(static_cast<double>(n) + c); });
}

/// r^n
inline Sequence geometric(double r) {
  std::ostringstream label;
  label << "geometric(" << r << ")";
  return Sequence::from_function(
      label.str(), [r](std::size_t n) { return std::pow(r, static_cast<double>(n)); }, 0,
      [r](std::size_t n) {
        if (r == 0.0) return n == 0 ? LogTerm{0.0, 1} : LogTerm{};
        const int sign = (r < 0.0 && n % 2 == 1) ? -1 : 1;
        return LogTerm{static_cast<double>(n) * std::log(std::fabs(r)), sign};
      });
}

/// r^n / n!
inline Sequence power_over_factorial(double r) {
  std::ostringstream label;
  label << "power_over_factorial(" << r << ")";
  return Sequence::from_impl(std::make_shared<detail::PowerOverFactorialImpl>(r), label.str());
}

inline Sequence inv_factorial() { return power_over_factorial(1.0).with_label("inv_factorial"); }

/// Gamma(n+k) / (Gamma(n+1) Gamma(k)), k > 0.
inline Sequence cesaro_weight(double k) {
  if (!(k > 0.0)) throw std::invalid_argument("cesaro_weight: k must be positive");
  std::ostringstream label;
  label << "cesaro_weight(" << k << ")";
  return Sequence::from_impl(std::make_shared<detail::CesaroWeightImpl>(k), label.str());
}

/// H_{n+1} = sum_{k<=n} 1/(k+1)
inline Sequence harmonic() { return partial_sums(reciprocal(1.0)).with_label("harmonic"); }

/// Built-in lookup by name with positional numeric arguments.
inline std::optional<Sequence> by_name(std::string_view name, const std::vector<double>& args) {
  auto arg = [&](std::size_t i) {
    if (i >= args.size()) {
      throw std::invalid_argument("builtin '" + std::string(name) + "' needs " +
                                  std::to_string(i + 1) + " argument(s)");
    }
    return args[i];
  };
  if (name == "one") return one();
  if (name == "zero") return zero();
  if (name == "impulse") return impulse();
  if (name == "alt01") return alt01();
  if (name == "alt") return alternating();
  if (name == "harmonic") return harmonic();
  if (name == "inv_factorial") return inv_factorial();
  if (name == "const") return Sequence::constant(arg(0));
  if (name == "index_plus") return index_plus(arg(0));
  if (name == "reciprocal") return reciprocal(arg(0));
  if (name == "log_shift") return log_shift(arg(0));
  if (name == "geometric") return geometric(arg(0));
  if (name == "power_over_factorial") return power_over_factorial(arg(0));
  if (name == "cesaro_weight") return cesaro_weight(arg(0));
  return std::nullopt;
}

}  // namespace builtin

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

inline std::vector<double> parse_number_list(std::string_view body) {
  std::vector<double> values;
  std::string item;
  std::istringstream in{std::string(body)};
  while (std::getline(in, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(t, &used);
    } catch (const std::exception&) {
      throw parse_error("not a number: '" + t + "'");
    }
    if (used != t.size()) throw parse_error("not a number: '" + t + "'");
    values.push_back(v);
  }
  return values;
}

}  // namespace detail

/// Parses the textual sequence syntax shared by the CLI and config files:
///   builtin        one, alt01, cesaro_weight(2), geometric(0.5), ...
///   prefix         [3,1,4]  [3,1,4]:zero  [3,1,4]:error  [3,1,4]:const=2
///   expression     sq(n+1), 1/(n+1), (-1)^n*(n+1)
inline Sequence parse_sequence(std::string_view text) {
  const std::string t = detail::trim(text);
  if (t.empty()) throw parse_error("empty sequence specification");
  if (t.front() == '[') {
    const auto close = t.find(']');
    if (close == std::string::npos) throw parse_error("unterminated prefix: " + t);
    auto values = detail::parse_number_list(std::string_view(t).substr(1, close - 1));
    std::string rest = detail::trim(std::string_view(t).substr(close + 1));
    Tail tail = Tail::zero;
    double tail_value = 0.0;
    if (!rest.empty()) {
      if (rest.front() != ':') throw parse_error("expected ':tail' after prefix: " + t);
      rest = detail::trim(std::string_view(rest).substr(1));
      if (rest == "zero") {
        tail = Tail::zero;
      } else if (rest == "error") {
        tail = Tail::error;
      } else if (rest.rfind("const=", 0) == 0) {
        tail = Tail::constant;
        tail_value = std::stod(rest.substr(6));
      } else {
        throw parse_error("unknown tail rule '" + rest + "'");
      }
    }
    return Sequence::from_prefix(std::move(values), tail, tail_value).with_label(t);
  }
  // builtin name, optionally with a parenthesised argument list
  std::size_t i = 0;
  while (i < t.size() && (std::isalnum(static_cast<unsigned char>(t[i])) || t[i] == '_')) ++i;
  const std::string name = t.substr(0, i);
  if (!name.empty() && !std::isdigit(static_cast<unsigned char>(name.front()))) {
    std::vector<double> args;
    bool whole = false;
    if (i == t.size()) {
      whole = true;
    } else if (t[i] == '(' && t.back() == ')' && t.find(')') == t.size() - 1) {
      try {
        args = detail::parse_number_list(std::string_view(t).substr(i + 1, t.size() - i - 2));
        whole = true;
      } catch (const parse_error&) {
        whole = false;
      }
    }
    if (whole) {
      if (auto s = builtin::by_name(name, args)) return s->with_label(t);
    }
  }
  return Sequence::from_expression(t);
}

}  // namespace voronoi
