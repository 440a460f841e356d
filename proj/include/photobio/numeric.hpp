#pragma once

// Small scalar root finders and minimizers shared by the solvers.
// Bracketed root finding is delegated to Boost.Math's TOMS 748 solver.

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "photobio/error.hpp"

namespace photobio::numeric {

struct RootResult {
  double x;
  double fx;
  int evaluations;
};

/// Root of `f` in [lo, hi] given f(lo), f(hi) of opposite sign. Stops when
/// the bracket width drops below `rel_tol * |x|` (plus a tiny absolute floor).
template <std::invocable<double> F>
RootResult bracketed_root(F&& f, double lo, double hi, double f_lo, double f_hi,
                          double rel_tol, int max_iter = 200) {
  if (f_lo == 0.0) return {lo, 0.0, 0};
  if (f_hi == 0.0) return {hi, 0.0, 0};
  if ((f_lo > 0) == (f_hi > 0)) {
    fail(ErrorKind::bracket_failure, "bracketed_root: endpoints do not bracket a sign change");
  }
  std::uintmax_t iters = static_cast<std::uintmax_t>(max_iter);
  double last = 0.0;
  auto wrapped = [&](double x) {
    last = f(x);
    return last;
  };
  auto tol = [rel_tol](double a, double b) {
    return std::abs(b - a) <= rel_tol * std::max(std::abs(a), std::abs(b)) + 1e-15;
  };
  auto [a, b] = boost::math::tools::toms748_solve(wrapped, lo, hi, f_lo, f_hi, tol, iters);
  if (static_cast<int>(iters) >= max_iter && !tol(a, b)) {
    fail(ErrorKind::non_convergence, "bracketed_root: iteration limit reached");
  }
  const double x = 0.5 * (a + b);
  return {x, last, static_cast<int>(iters)};
}

template <std::invocable<double> F>
RootResult bracketed_root(F&& f, double lo, double hi, double rel_tol, int max_iter = 200) {
  const double f_lo = f(lo);
  const double f_hi = f(hi);
  return bracketed_root(f, lo, hi, f_lo, f_hi, rel_tol, max_iter);
}

/// First sign change of `f` over the ordered sample points `xs`. Returns the
/// bracketing pair together with the function values at its ends.
struct Bracket {
  double lo, hi, f_lo, f_hi;
};

template <std::invocable<double> F>
std::optional<Bracket> first_sign_change(F&& f, const std::vector<double>& xs) {
  if (xs.empty()) return std::nullopt;
  double x_prev = xs.front();
  double f_prev = f(x_prev);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double fx = f(xs[i]);
    if (f_prev == 0.0) return Bracket{x_prev, x_prev, 0.0, 0.0};
    if ((f_prev > 0) != (fx > 0)) return Bracket{x_prev, xs[i], f_prev, fx};
    x_prev = xs[i];
    f_prev = fx;
  }
  return std::nullopt;
}

inline std::vector<double> geomspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  const double r = std::log(hi / lo);
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = lo * std::exp(r * i / std::max(1, n - 1));
  }
  return out;
}

inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / std::max(1, n - 1);
  }
  return out;
}

struct MinimumResult {
  double x;
  double fx;
};

/// Minimizer of `f` on [lo, hi] by Brent's golden-section/parabolic search.
template <std::invocable<double> F>
MinimumResult minimize(F&& f, double lo, double hi, int bits = 30, int max_iter = 100) {
  std::uintmax_t iters = static_cast<std::uintmax_t>(max_iter);
  auto [x, fx] = boost::math::tools::brent_find_minima(f, lo, hi, bits, iters);
  return {x, fx};
}

}  // namespace photobio::numeric
