#pragma once

// Motionless equilibrium of the suspension under collimated light from above.
//
// With tau(x3) = int_1^x3 n_b ds the (non-positive) absorption depth, the
// total intensity is G_b = I0 exp(hbar tau) and the cell balance reduces to
//   d tau / dx3 = n_b,   d n_b / dx3 = U_s T(G_b) n_b,
// with tau(1) = 0. The unit-mean constraint on n_b is tau(0) = -1, which fixes
// the unknown top concentration n_b(1) by shooting from the top down.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "photobio/error.hpp"
#include "photobio/numeric.hpp"
#include "photobio/params.hpp"
#include "photobio/taxis.hpp"

namespace photobio {

/// Coefficients the perturbation equations need at one height.
struct BasicProfiles {
  double n = 0.0;         // n_b
  double dn = 0.0;        // d n_b / dx3
  double lambda = 0.0;    // n_b G_b dT/dG at G_b
  double dlambda = 0.0;   // d lambda / dx3
  double taxis = 0.0;     // T(G_b)
  double intensity = 0.0; // G_b
};

class BasicState {
 public:
  BasicState() = default;

  int intervals() const { return static_cast<int>(x_.size()) - 1; }
  const std::vector<double>& x() const { return x_; }
  const std::vector<double>& n() const { return n_; }
  const std::vector<double>& tau() const { return tau_; }
  const std::vector<double>& intensity() const { return G_; }
  const std::vector<double>& taxis_values() const { return T_; }
  std::vector<double> temperature() const {
    std::vector<double> out(x_.size());
    std::transform(x_.begin(), x_.end(), out.begin(), [](double x) { return x - 1.0; });
    return out;
  }

  double hbar() const { return hbar_; }
  double U_s() const { return U_s_; }
  double I0() const { return I0_; }
  const TaxisFn& taxis() const { return taxis_; }
  double top_concentration() const { return n_.back(); }

  /// Interpolated (tau, n_b) by cubic Hermite on the RK4 grid, using the ODE
  /// right-hand side as the node derivatives.
  std::array<double, 2> interpolate(double x3) const {
    if (!(x3 >= -1e-12 && x3 <= 1.0 + 1e-12)) {
      fail(ErrorKind::out_of_domain, "basic state evaluated outside [0,1]: x3 = " + std::to_string(x3));
    }
    const int m = intervals();
    const double s = std::clamp(x3, 0.0, 1.0) * m;
    const int i = std::min(static_cast<int>(s), m - 1);
    const double t = s - i;
    const double h = 1.0 / m;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    const double h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t);
    const double h11 = t * t * (t - 1);
    const auto i0 = static_cast<std::size_t>(i);
    const auto i1 = i0 + 1;
    const double dn0 = U_s_ * T_[i0] * n_[i0];
    const double dn1 = U_s_ * T_[i1] * n_[i1];
    const double tau = h00 * tau_[i0] + h10 * h * n_[i0] + h01 * tau_[i1] + h11 * h * n_[i1];
    const double n = h00 * n_[i0] + h10 * h * dn0 + h01 * n_[i1] + h11 * h * dn1;
    return {tau, n};
  }

  BasicProfiles profiles_at(double x3) const {
    const auto [tau, n] = interpolate(x3);
    return profiles_from(tau, n);
  }

  /// Builds the coefficient bundle from (tau, n_b) using the analytic chain
  /// rule: dn/dx = U_s T n and dG/dx = hbar n G.
  BasicProfiles profiles_from(double tau, double n) const {
    BasicProfiles p;
    const double G = I0_ * std::exp(hbar_ * tau);
    const double T = taxis_.value(G);
    const double dT = taxis_.derivative(G);
    const double d2T = taxis_.second_derivative(G);
    const double dG = hbar_ * n * G;
    p.n = n;
    p.dn = U_s_ * T * n;
    p.intensity = G;
    p.taxis = T;
    p.lambda = n * G * dT;
    p.dlambda = p.dn * G * dT + n * dG * dT + n * G * d2T * dG;
    return p;
  }

  friend BasicState solve_basic_state(const Params& p, int M);

 private:
  std::vector<double> x_, n_, tau_, G_, T_;
  double hbar_ = 0.0;
  double U_s_ = 0.0;
  double I0_ = 0.0;
  TaxisFn taxis_{};
};

namespace detail {

struct TopDownShot {
  std::vector<double> tau;  // indexed from the top: k = 0 is x3 = 1
  std::vector<double> n;
};

inline TopDownShot shoot_basic_state(const Params& p, const TaxisFn& f, int M, double n_top,
                                     bool keep_profile) {
  const double h = -1.0 / M;
  auto rhs = [&](double tau, double n) -> std::array<double, 2> {
    const double G = p.I0 * std::exp(p.hbar * tau);
    return {n, p.U_s * f.value(G) * n};
  };
  TopDownShot out;
  if (keep_profile) {
    out.tau.reserve(static_cast<std::size_t>(M) + 1);
    out.n.reserve(static_cast<std::size_t>(M) + 1);
  }
  double tau = 0.0;
  double n = n_top;
  if (keep_profile) {
    out.tau.push_back(tau);
    out.n.push_back(n);
  }
  for (int k = 0; k < M; ++k) {
    const auto k1 = rhs(tau, n);
    const auto k2 = rhs(tau + 0.5 * h * k1[0], n + 0.5 * h * k1[1]);
    const auto k3 = rhs(tau + 0.5 * h * k2[0], n + 0.5 * h * k2[1]);
    const auto k4 = rhs(tau + h * k3[0], n + h * k3[1]);
    tau += h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    n += h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
    if (!std::isfinite(n) || !std::isfinite(tau)) {
      fail(ErrorKind::integration_overflow, "basic state integration overflowed");
    }
    if (keep_profile) {
      out.tau.push_back(tau);
      out.n.push_back(n);
    }
  }
  if (!keep_profile) {
    out.tau.push_back(tau);
    out.n.push_back(n);
  }
  return out;
}

}  // namespace detail

/// Solves the equilibrium on a uniform grid of M intervals (RK4 from the top,
/// top concentration found by a bracketed secant-type search).
inline BasicState solve_basic_state(const Params& p, int M = 2000) {
  p.validate();
  if (M < 200) fail(ErrorKind::invalid_parameter, "basic state grid needs M >= 200");
  const TaxisFn f = p.taxis();

  auto mismatch = [&](double n_top) {
    return detail::shoot_basic_state(p, f, M, n_top, false).tau.back() + 1.0;
  };
  constexpr double kLo = 1e-6;
  constexpr double kHi = 1e3;
  const double f_lo = mismatch(kLo);
  const double f_hi = mismatch(kHi);
  if ((f_lo > 0) == (f_hi > 0)) {
    fail(ErrorKind::bracket_failure, "basic state: no top concentration in [1e-6, 1e3] gives unit mean");
  }
  const auto root = numeric::bracketed_root(mismatch, kLo, kHi, f_lo, f_hi, 1e-13, 100);

  const auto shot = detail::shoot_basic_state(p, f, M, root.x, true);
  BasicState b;
  const auto size = static_cast<std::size_t>(M) + 1;
  b.x_.resize(size);
  b.n_.resize(size);
  b.tau_.resize(size);
  b.G_.resize(size);
  b.T_.resize(size);
  for (std::size_t i = 0; i < size; ++i) {
    const std::size_t k = size - 1 - i;  // top-down index
    b.x_[i] = static_cast<double>(i) / M;
    b.n_[i] = shot.n[k];
    b.tau_[i] = shot.tau[k];
    b.G_[i] = p.I0 * std::exp(p.hbar * b.tau_[i]);
    b.T_[i] = f.value(b.G_[i]);
  }
  b.hbar_ = p.hbar;
  b.U_s_ = p.U_s;
  b.I0_ = p.I0;
  b.taxis_ = f;
  return b;
}

struct Sublayer {
  double x3 = 1.0;
  double n_max = 1.0;
};

/// Location and value of the concentration maximum. An interior maximum sits
/// where T(G_b) changes sign, i.e. G_b = G_c; it is refined off-grid there.
inline Sublayer sublayer_location(const BasicState& b) {
  const auto& n = b.n();
  const auto& x = b.x();
  std::size_t imax = 0;
  for (std::size_t i = 1; i < n.size(); ++i) {
    if (n[i] >= n[imax]) imax = i;  // ties resolve to the upper node
  }
  if (imax == 0 || imax + 1 == n.size()) return {x[imax], n[imax]};

  const auto& T = b.taxis_values();
  std::size_t lo = imax - 1;
  std::size_t hi = imax + 1;
  if (T[imax] == 0.0) return {x[imax], n[imax]};
  if ((T[lo] > 0) != (T[imax] > 0)) hi = imax;
  else lo = imax;
  if ((T[lo] > 0) == (T[hi] > 0)) return {x[imax], n[imax]};

  auto taxis_at = [&](double xs) { return b.profiles_at(xs).taxis; };
  const double xs = numeric::bracketed_root(taxis_at, x[lo], x[hi], T[lo], T[hi], 1e-14).x;
  return {xs, b.profiles_at(xs).n};
}

inline BasicProfiles basic_profiles_at(const BasicState& b, double x3) { return b.profiles_at(x3); }

/// Composite Simpson integral of n_b over the grid (M must be even for the
/// pure rule; an odd M falls back to a 3/8 panel at the end).
inline double concentration_integral(const BasicState& b) {
  const auto& n = b.n();
  const int m = b.intervals();
  const double h = 1.0 / m;
  const int even = (m % 2 == 0) ? m : m - 3;
  double s = 0.0;
  for (int i = 0; i < even; i += 2) {
    const auto k = static_cast<std::size_t>(i);
    s += h / 3.0 * (n[k] + 4 * n[k + 1] + n[k + 2]);
  }
  if (even != m) {
    const auto k = static_cast<std::size_t>(even);
    s += 3.0 * h / 8.0 * (n[k] + 3 * n[k + 1] + 3 * n[k + 2] + n[k + 3]);
  }
  return s;
}

}  // namespace photobio
