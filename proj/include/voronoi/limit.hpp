#pragma once

// Finite-horizon stand-ins for asymptotic statements: limit detection on a
// trailing window, liminf/limsup proxies, boundedness and divergence
// evidence. Every verdict here is evidence, never proof.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>

namespace voronoi {

enum class LimitStatus { converged, diverged, undecided };

inline const char* to_string(LimitStatus s) {
  switch (s) {
    case LimitStatus::converged:
      return "converged";
    case LimitStatus::diverged:
      return "diverged";
    case LimitStatus::undecided:
      return "undecided";
  }
  return "?";
}

struct LimitVerdict {
  LimitStatus status = LimitStatus::undecided;
  std::optional<double> estimate;
  std::size_t window = 0;
  double tol = 0.0;

  [[nodiscard]] bool converged() const { return status == LimitStatus::converged; }
  /// Converged, with the estimate within tol of `target`.
  [[nodiscard]] bool converged_to(double target, double within) const {
    return converged() && std::fabs(*estimate - target) <= within;
  }
};

inline constexpr double kDefaultLimitTol = 1e-6;
inline constexpr double kDefaultBlowup = 1e12;

/// ceil(len / 100), at least 2.
inline std::size_t default_window(std::size_t len) {
  return std::max<std::size_t>(2, (len + 99) / 100);
}

/// Converged iff the last `window` values span at most `tol` (estimate =
/// their mean). Diverged iff |values| is nondecreasing over the window and
/// ends above `blowup`. Otherwise undecided. window = 0 selects the default.
inline LimitVerdict detect_limit(std::span<const double> values, double tol = kDefaultLimitTol,
                                 std::size_t window = 0, double blowup = kDefaultBlowup) {
  if (window == 0) window = default_window(values.size());
  if (window < 2) throw std::invalid_argument("detect_limit: window must be >= 2");
  if (!(tol > 0.0)) throw std::invalid_argument("detect_limit: tol must be positive");
  if (values.size() < window) throw std::invalid_argument("detect_limit: fewer values than window");

  LimitVerdict verdict;
  verdict.window = window;
  verdict.tol = tol;
  const auto tail = values.subspan(values.size() - window);
  const auto [lo, hi] = std::minmax_element(tail.begin(), tail.end());
  if (std::isfinite(*lo) && std::isfinite(*hi) && *hi - *lo <= tol) {
    double sum = 0.0;
    for (double v : tail) sum += v;
    verdict.status = LimitStatus::converged;
    verdict.estimate = sum / static_cast<double>(window);
    return verdict;
  }
  bool monotone = true;
  for (std::size_t i = 1; i < tail.size(); ++i) {
    if (!(std::fabs(tail[i]) >= std::fabs(tail[i - 1]))) {
      monotone = false;
      break;
    }
  }
  if (monotone && std::fabs(tail.back()) > blowup) verdict.status = LimitStatus::diverged;
  return verdict;
}

/// max |x_n - target| over the last `window` values.
inline double trailing_deviation(std::span<const double> values, double target,
                                 std::size_t window = 0) {
  if (values.empty()) return std::numeric_limits<double>::infinity();
  if (window == 0) window = default_window(values.size());
  window = std::min(window, values.size());
  double dev = 0.0;
  for (std::size_t i = values.size() - window; i < values.size(); ++i) {
    dev = std::max(dev, std::fabs(values[i] - target));
  }
  return dev;
}

/// Trailing deviation from `target` is at most `tol`.
inline bool tends_to(std::span<const double> values, double target, double tol,
                     std::size_t window = 0) {
  return trailing_deviation(values, target, window) <= tol;
}

/// Minimum over indices [lo, hi] (liminf proxy when [lo, hi] = [N/2, N]).
inline double window_min(std::span<const double> values, std::size_t lo, std::size_t hi) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = lo; i <= hi && i < values.size(); ++i) m = std::min(m, values[i]);
  return m;
}

inline double window_max(std::span<const double> values, std::size_t lo, std::size_t hi) {
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = lo; i <= hi && i < values.size(); ++i) m = std::max(m, values[i]);
  return m;
}

struct GrowthEvidence {
  double early = 0.0;  // max |x| over [N/4, N/2)
  double late = 0.0;   // max |x| over [N/2, N]
  bool bounded = false;
};

/// Boundedness evidence: the trailing maximum of |x| does not outgrow the
/// maximum over the preceding quarter by more than 25%.
inline GrowthEvidence bounded_evidence(std::span<const double> values) {
  GrowthEvidence g;
  const std::size_t N = values.empty() ? 0 : values.size() - 1;
  for (std::size_t i = N / 4; i < N / 2; ++i) g.early = std::max(g.early, std::fabs(values[i]));
  for (std::size_t i = N / 2; i <= N && i < values.size(); ++i) {
    g.late = std::max(g.late, std::fabs(values[i]));
  }
  g.bounded = std::isfinite(g.late) && g.late <= 1.25 * g.early + 1e-12;
  return g;
}

/// Evidence that an increasing sequence tends to infinity: strictly
/// increasing on [N/4, N] and its increments do not shrink like those of a
/// convergent series (increment over [N/2, N] at least 0.75 of the
/// increment over [N/4, N/2]).
inline bool diverges_to_infinity_evidence(std::span<const double> values) {
  if (values.size() < 8) return false;
  const std::size_t N = values.size() - 1;
  for (std::size_t i = N / 4 + 1; i <= N; ++i) {
    if (!(values[i] > values[i - 1])) return false;
  }
  const double late = values[N] - values[N / 2];
  const double early = values[N / 2] - values[N / 4];
  return late >= 0.75 * early && late > 0.0;
}

}  // namespace voronoi
