#pragma once

// Normal-mode stability problem for the equilibrium of a phototactic
// suspension in a layer heated from above.
//
// Perturbations ~ exp(gamma t + i a x1) reduce to a ninth-order complex
// linear system for w (vertical velocity), Theta (temperature) and
// N(x3) = int_x3^1 n dx (integrated cell concentration):
//
//   w''''  = (2a^2 + gamma/Pr) w'' - a^2 (a^2 + gamma/Pr) w + a^2 Ra N' + a^2 R_T Theta
//   Theta'' = (gamma + a^2) Theta - w
//   N'''   = U_s T N'' + (c gamma + a^2 + 2 hbar U_s L) N' + hbar U_s L' N - Le n_b' w
//
// where L = n_b G_b dT/dG and c is the cell-rate coefficient (see Params).
// Rigid bottom: w = w' = Theta = 0 and hbar U_s L N + U_s T N' - N'' = 0.
// Stress-free top: w = w'' = Theta = N = 0 and U_s T N' - N'' = 0.
//
// Solutions are found by shooting five independent solutions up from the
// bottom and requiring the 5x5 matrix of top conditions to be singular.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "photobio/basic_state.hpp"
#include "photobio/error.hpp"
#include "photobio/numeric.hpp"
#include "photobio/params.hpp"

namespace photobio {

using cplx = std::complex<double>;

/// (w, w', w'', w''', Theta, Theta', N, N', N'') at one height.
using StateVector = Eigen::Matrix<cplx, 9, 1>;
using Basis = Eigen::Matrix<cplx, 9, 5>;
using BoundaryMatrix = Eigen::Matrix<cplx, 5, 5>;

namespace sv {
inline constexpr int w = 0, dw = 1, d2w = 2, d3w = 3, theta = 4, dtheta = 5, N = 6, dN = 7, d2N = 8;
}

/// Wavenumber, trial Rayleigh number and growth rate of one normal mode.
struct ModeProblem {
  double a = 1.0;
  double Ra = 0.0;
  cplx gamma{0.0, 0.0};
};

struct ShootingOptions {
  int steps = 2000;        // RK4 steps across [0, 1]
  int reorthonormalize = 50;  // Gram-Schmidt every this many steps
};

/// Determinant of the top-boundary matrix, stored as a well-scaled mantissa
/// times exp(log_scale). The log scale collects the Gram-Schmidt
/// normalisation factors, so value() equals the determinant obtained by
/// propagating the raw bottom basis.
struct DispersionValue {
  cplx mantissa{0.0, 0.0};
  double log_scale = 0.0;
  double condition = 0.0;  // 2-norm condition number of the 5x5 boundary matrix

  cplx value() const { return mantissa * std::exp(log_scale); }
};

/// Boundary-matrix coefficients sampled on the RK4 half-step grid.
class CoefficientTable {
 public:
  CoefficientTable(const BasicState& b, int steps) : steps_(steps) {
    if (steps < 10) fail(ErrorKind::invalid_parameter, "shooting needs at least 10 steps");
    rows_.resize(static_cast<std::size_t>(2 * steps + 1));
    for (int k = 0; k <= 2 * steps; ++k) {
      rows_[static_cast<std::size_t>(k)] = b.profiles_at(static_cast<double>(k) / (2 * steps));
    }
  }
  int steps() const { return steps_; }
  /// Profiles at x3 = k / (2 steps).
  const BasicProfiles& half(int k) const { return rows_[static_cast<std::size_t>(k)]; }

 private:
  int steps_;
  std::vector<BasicProfiles> rows_;
};

/// Output of one shooting pass. `path` (if requested) holds the propagated
/// basis at each step node in the current orthonormal frame; `frames` records
/// the Gram-Schmidt R factors so that one coefficient vector can be carried
/// back through every re-orthonormalisation.
struct ShootingResult {
  DispersionValue det;
  BoundaryMatrix boundary;
  Basis top;
  std::vector<Basis> path;
  std::vector<int> frame_start;            // first node index of each frame
  std::vector<BoundaryMatrix> frame_r;     // R applied at the start of frame j+1
};

/// Fixed (Params, BasicState) context for repeated determinant evaluations.
/// Reentrant: all methods are const.
class StabilityProblem {
 public:
  StabilityProblem(const Params& p, const BasicState& b, ShootingOptions opt = {})
      : p_(p), opt_(opt), table_(std::make_shared<CoefficientTable>(b, opt.steps)) {
    p_.validate();
    if (opt.reorthonormalize < 1) fail(ErrorKind::invalid_parameter, "reorthonormalize must be >= 1");
  }

  const Params& params() const { return p_; }
  const ShootingOptions& options() const { return opt_; }
  const CoefficientTable& table() const { return *table_; }

  /// y' for a single state at a point whose basic profiles are `c`.
  StateVector rhs(const ModeProblem& m, const BasicProfiles& c, const StateVector& y) const {
    StateVector d;
    apply(m, c, y, d);
    return d;
  }

  /// Bottom basis: five independent states satisfying the four bottom
  /// conditions.
  Basis bottom_basis(const ModeProblem&) const {
    const BasicProfiles& c = table_->half(0);
    Basis y = Basis::Zero();
    y(sv::d2w, 0) = 1.0;
    y(sv::d3w, 1) = 1.0;
    y(sv::dtheta, 2) = 1.0;
    y(sv::N, 3) = 1.0;
    y(sv::d2N, 3) = p_.hbar * p_.U_s * c.lambda;
    y(sv::dN, 4) = 1.0;
    y(sv::d2N, 4) = p_.U_s * c.taxis;
    return y;
  }

  /// Rows of the five top conditions applied to a basis at x3 = 1.
  BoundaryMatrix top_conditions(const Basis& y) const {
    const BasicProfiles& c = table_->half(2 * table_->steps());
    BoundaryMatrix m;
    m.row(0) = y.row(sv::w);
    m.row(1) = y.row(sv::d2w);
    m.row(2) = y.row(sv::theta);
    m.row(3) = y.row(sv::N);
    m.row(4) = p_.U_s * c.taxis * y.row(sv::dN) - y.row(sv::d2N);
    return m;
  }

  /// Residuals of the four bottom conditions for a single state.
  std::array<cplx, 4> bottom_residuals(const StateVector& y) const {
    const BasicProfiles& c = table_->half(0);
    return {y(sv::w), y(sv::dw), y(sv::theta),
            p_.hbar * p_.U_s * c.lambda * y(sv::N) + p_.U_s * c.taxis * y(sv::dN) - y(sv::d2N)};
  }

  ShootingResult shoot(const ModeProblem& m, bool keep_path = false) const {
    if (!(m.a > 0.0)) fail(ErrorKind::invalid_parameter, "wavenumber a must be positive");
    const int n = table_->steps();
    const double h = 1.0 / n;
    ShootingResult out;
    Basis y = bottom_basis(m);
    double log_scale = 0.0;
    // Normalise the initial basis too, so the mantissa is O(1) from the start.
    {
      BoundaryMatrix r;
      orthonormalize(y, r);
      log_scale += log_det(r);
      if (keep_path) {
        out.frame_start.push_back(0);
      }
    }
    if (keep_path) {
      out.path.reserve(static_cast<std::size_t>(n) + 1);
      out.path.push_back(y);
    }
    Basis k1, k2, k3, k4, tmp;
    for (int s = 0; s < n; ++s) {
      const BasicProfiles& c0 = table_->half(2 * s);
      const BasicProfiles& cm = table_->half(2 * s + 1);
      const BasicProfiles& c1 = table_->half(2 * s + 2);
      apply(m, c0, y, k1);
      tmp = y + (0.5 * h) * k1;
      apply(m, cm, tmp, k2);
      tmp = y + (0.5 * h) * k2;
      apply(m, cm, tmp, k3);
      tmp = y + h * k3;
      apply(m, c1, tmp, k4);
      y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

      const bool last = (s + 1 == n);
      if ((s + 1) % opt_.reorthonormalize == 0 && !last) {
        if (!y.allFinite()) {
          fail(ErrorKind::integration_overflow, "shooting overflow before re-orthonormalisation at x3 = " +
                                                    std::to_string((s + 1) * h));
        }
        BoundaryMatrix r;
        orthonormalize(y, r);
        log_scale += log_det(r);
        if (keep_path) {
          out.frame_r.push_back(r);
          out.frame_start.push_back(s + 1);
        }
      }
      if (keep_path) out.path.push_back(y);
    }
    if (!y.allFinite()) fail(ErrorKind::integration_overflow, "shooting overflow at x3 = 1");

    // Final normalisation so that the boundary matrix is well scaled.
    BoundaryMatrix r;
    Basis q = y;
    orthonormalize(q, r);
    out.boundary = top_conditions(q);
    out.top = q;
    out.det.mantissa = out.boundary.determinant();
    out.det.log_scale = log_scale + log_det(r);
    Eigen::JacobiSVD<BoundaryMatrix> svd(out.boundary);
    const auto& sing = svd.singularValues();
    out.det.condition = sing(4) > 0.0 ? sing(0) / sing(4) : std::numeric_limits<double>::infinity();
    if (keep_path) {
      out.frame_r.push_back(r);  // maps the last frame onto `top`
    }
    return out;
  }

  DispersionValue determinant(const ModeProblem& m) const { return shoot(m, false).det; }

 private:
  static double log_det(const BoundaryMatrix& r) {
    double s = 0.0;
    for (int i = 0; i < 5; ++i) s += std::log(std::abs(r(i, i)));
    return s;
  }

  /// Modified Gram-Schmidt in place; y_in = q * r with positive real diag(r).
  static void orthonormalize(Basis& y, BoundaryMatrix& r) {
    r.setZero();
    for (int j = 0; j < 5; ++j) {
      for (int i = 0; i < j; ++i) {
        const cplx proj = y.col(i).dot(y.col(j));  // conj(q_i) . y_j
        r(i, j) = proj;
        y.col(j) -= proj * y.col(i);
      }
      const double nrm = y.col(j).norm();
      if (!(nrm > 0.0) || !std::isfinite(nrm)) {
        fail(ErrorKind::integration_overflow, "basis lost rank or overflowed during shooting");
      }
      r(j, j) = nrm;
      y.col(j) /= nrm;
    }
  }

  template <typename In, typename Out>
  void apply(const ModeProblem& m, const BasicProfiles& c, const In& y, Out& d) const {
    const double a2 = m.a * m.a;
    const cplx g = m.gamma;
    const cplx gp = g / p_.Pr;
    const cplx c_w2 = 2.0 * a2 + gp;
    const cplx c_w0 = -a2 * (a2 + gp);
    const double c_N1_ra = a2 * m.Ra;
    const double c_th = a2 * p_.R_T;
    const cplx c_t0 = g + a2;
    const double us_t = p_.U_s * c.taxis;
    const cplx c_N1 = p_.cell_rate_coefficient() * g + a2 + 2.0 * p_.hbar * p_.U_s * c.lambda;
    const double c_N0 = p_.hbar * p_.U_s * c.dlambda;
    const double c_Nw = -p_.Le * c.dn;
    for (int j = 0; j < y.cols(); ++j) {
      d(0, j) = y(1, j);
      d(1, j) = y(2, j);
      d(2, j) = y(3, j);
      d(3, j) = c_w2 * y(2, j) + c_w0 * y(0, j) + c_N1_ra * y(7, j) + c_th * y(4, j);
      d(4, j) = y(5, j);
      d(5, j) = c_t0 * y(4, j) - y(0, j);
      d(6, j) = y(7, j);
      d(7, j) = y(8, j);
      d(8, j) = us_t * y(8, j) + c_N1 * y(7, j) + c_N0 * y(6, j) + c_Nw * y(0, j);
    }
  }

  Params p_;
  ShootingOptions opt_;
  std::shared_ptr<const CoefficientTable> table_;
};

/// Convenience wrapper: determinant at one (a, Ra, gamma).
inline DispersionValue boundary_determinant(const ModeProblem& m, const Params& p, const BasicState& b,
                                            ShootingOptions opt = {}) {
  return StabilityProblem(p, b, opt).determinant(m);
}

// ---------------------------------------------------------------------------
// Stationary neutral Rayleigh number
// ---------------------------------------------------------------------------

struct StationaryOptions {
  double rel_tol = 1e-8;
  double ra_max = 1e6;
  int points_per_decade = 12;
};

namespace detail {

inline double stationary_residual(const StabilityProblem& sp, double a, double Ra) {
  return sp.determinant({a, Ra, cplx{0.0, 0.0}}).mantissa.real();
}

}  // namespace detail

/// Smallest positive Ra in (0, ra_max] at which a stationary (gamma = 0) mode
/// is neutral. Returns nullopt when no sign change exists.
inline std::optional<double> find_stationary_Ra(const StabilityProblem& sp, double a,
                                                std::optional<double> Ra_guess = std::nullopt,
                                                StationaryOptions opt = {}) {
  auto f = [&](double Ra) { return detail::stationary_residual(sp, a, Ra); };

  if (Ra_guess && *Ra_guess > 0.0) {
    // Expand symmetrically (in log Ra) around the guess; take the closest
    // sign change.
    const double g = *Ra_guess;
    const double f_g = f(g);
    double lo = g, hi = g, f_lo = f_g, f_hi = f_g;
    for (double step = 0.02; step < 4.0; step *= 1.6) {
      const double nlo = g / (1.0 + step);
      const double nhi = std::min(g * (1.0 + step), opt.ra_max);
      const double f_nlo = f(nlo);
      if ((f_nlo > 0) != (f_lo > 0)) {
        return numeric::bracketed_root(f, nlo, lo, f_nlo, f_lo, opt.rel_tol).x;
      }
      const double f_nhi = f(nhi);
      if ((f_nhi > 0) != (f_hi > 0)) {
        return numeric::bracketed_root(f, hi, nhi, f_hi, f_nhi, opt.rel_tol).x;
      }
      lo = nlo;
      hi = nhi;
      f_lo = f_nlo;
      f_hi = f_nhi;
    }
    // Fall through to the global scan.
  }

  const int decades = static_cast<int>(std::ceil(std::log10(opt.ra_max / 0.1)));
  auto xs = numeric::geomspace(0.1, opt.ra_max, decades * opt.points_per_decade + 1);
  xs.insert(xs.begin(), 1e-6);
  const auto br = numeric::first_sign_change(f, xs);
  if (!br) return std::nullopt;
  if (br->lo == br->hi) return br->lo;
  return numeric::bracketed_root(f, br->lo, br->hi, br->f_lo, br->f_hi, opt.rel_tol).x;
}

inline double solve_stationary_Ra(double a, const Params& p, const BasicState& b,
                                  std::optional<double> Ra_guess = std::nullopt,
                                  ShootingOptions shoot = {}, StationaryOptions opt = {}) {
  const StabilityProblem sp(p, b, shoot);
  const auto r = find_stationary_Ra(sp, a, Ra_guess, opt);
  if (!r) {
    fail(ErrorKind::no_root, "no stationary neutral Ra in (0, " + std::to_string(opt.ra_max) +
                                 "] at a = " + std::to_string(a));
  }
  return *r;
}

// ---------------------------------------------------------------------------
// Two-dimensional Newton on the complex determinant
// ---------------------------------------------------------------------------

struct NewtonOptions {
  int max_iter = 50;
  double step_tol = 1e-8;      // relative step size
  double residual_drop = 1e-8;  // |F| relative to its initial value
};

namespace detail {

struct Newton2Result {
  double u = 0.0, v = 0.0;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;
};

/// Newton's method for F(u, v) = 0 with F complex-valued (two real
/// equations), forward-difference Jacobian and residual-halving damping.
template <typename F>
Newton2Result newton2(F&& fun, double u, double v, double hu, double hv, NewtonOptions opt,
                      auto&& stop_early) {
  Newton2Result res;
  cplx f = fun(u, v);
  const double f0 = std::abs(f);
  for (int it = 0; it < opt.max_iter; ++it) {
    res.iterations = it + 1;
    const cplx fu = (fun(u + hu, v) - f) / hu;
    const cplx fv = (fun(u, v + hv) - f) / hv;
    Eigen::Matrix2d J;
    J << fu.real(), fv.real(), fu.imag(), fv.imag();
    const double detJ = J.determinant();
    if (detJ == 0.0 || !std::isfinite(detJ)) break;
    const Eigen::Vector2d step = J.partialPivLu().solve(Eigen::Vector2d(-f.real(), -f.imag()));
    double lam = 1.0;
    double nu = u + step(0), nv = v + step(1);
    cplx nf = fun(nu, nv);
    for (int k = 0; k < 8 && std::abs(nf) > std::abs(f) && std::isfinite(std::abs(f)); ++k) {
      lam *= 0.5;
      nu = u + lam * step(0);
      nv = v + lam * step(1);
      nf = fun(nu, nv);
    }
    const double rel_step = std::max(std::abs(nu - u) / std::max(std::abs(nu), 1.0),
                                     std::abs(nv - v) / std::max(std::abs(nv), 1.0));
    u = nu;
    v = nv;
    f = nf;
    res.residual = std::abs(f);
    if (stop_early(u, v)) break;
    const bool small_residual = std::abs(f) <= opt.residual_drop * f0 || std::abs(f) < 1e-14;
    if ((small_residual && rel_step < opt.step_tol) || rel_step < 1e-3 * opt.step_tol) {
      res.converged = true;
      break;
    }
    // Scale finite-difference steps with the iterate.
    hu = 1e-7 * std::max(std::abs(u), 1.0);
    hv = 1e-7 * std::max(std::abs(v), 1.0);
  }
  res.u = u;
  res.v = v;
  return res;
}

}  // namespace detail

enum class OscillatoryOutcome { converged, merged_with_stationary };

struct OscillatorySolution {
  double Ra = 0.0;
  double omega = 0.0;
  OscillatoryOutcome outcome = OscillatoryOutcome::converged;
  int iterations = 0;
};

/// Neutral oscillatory mode gamma = i omega at wavenumber a. The sign of the
/// returned omega follows the guess; omega collapsing towards zero is
/// reported as a merge with the stationary branch.
inline OscillatorySolution find_oscillatory(const StabilityProblem& sp, double a, double Ra_guess,
                                            double omega_guess, NewtonOptions opt = {}) {
  if (omega_guess == 0.0) fail(ErrorKind::invalid_parameter, "omega guess must be nonzero");
  const double sign = omega_guess > 0 ? 1.0 : -1.0;
  const double w_floor = 1e-6 * std::max(1.0, std::abs(omega_guess));
  auto fun = [&](double Ra, double w) { return sp.determinant({a, Ra, cplx{0.0, w}}).mantissa; };
  auto collapsed = [&](double, double w) { return sign * w < w_floor; };
  const auto r = detail::newton2(fun, Ra_guess, omega_guess, 1e-7 * std::abs(Ra_guess) + 1e-9,
                                 1e-7 * std::max(std::abs(omega_guess), 1.0), opt, collapsed);
  OscillatorySolution out{r.u, r.v, OscillatoryOutcome::converged, r.iterations};
  if (sign * r.v < w_floor) {
    out.outcome = OscillatoryOutcome::merged_with_stationary;
    return out;
  }
  if (!r.converged) {
    fail(ErrorKind::non_convergence, "oscillatory Newton did not converge at a = " + std::to_string(a));
  }
  return out;
}

inline OscillatorySolution solve_oscillatory(double a, const Params& p, const BasicState& b, double Ra_guess,
                                             double omega_guess, ShootingOptions shoot = {},
                                             NewtonOptions opt = {}) {
  return find_oscillatory(StabilityProblem(p, b, shoot), a, Ra_guess, omega_guess, opt);
}

/// Root gamma of the dispersion relation at fixed (a, Ra) nearest to `seed`.
inline std::optional<cplx> polish_growth_rate(const StabilityProblem& sp, double a, double Ra, cplx seed,
                                              NewtonOptions opt = {}) {
  auto fun = [&](double re, double im) { return sp.determinant({a, Ra, cplx{re, im}}).mantissa; };
  const double scale = std::max(std::abs(seed), 1.0);
  const auto r = detail::newton2(fun, seed.real(), seed.imag(), 1e-7 * scale, 1e-7 * scale, opt,
                                 [](double, double) { return false; });
  if (!r.converged || !std::isfinite(r.u) || !std::isfinite(r.v)) return std::nullopt;
  return cplx{r.u, r.v};
}

/// Polishes each seed and returns the root with the largest real part.
/// Roots closer than 1e-6 are treated as one.
inline cplx solve_growth_rate(const StabilityProblem& sp, double a, double Ra, const std::vector<cplx>& seeds,
                              NewtonOptions opt = {}) {
  std::vector<cplx> roots;
  for (const cplx& s : seeds) {
    const auto r = polish_growth_rate(sp, a, Ra, s, opt);
    if (!r) continue;
    const bool dup = std::any_of(roots.begin(), roots.end(),
                                 [&](const cplx& q) { return std::abs(q - *r) < 1e-6 * std::max(1.0, std::abs(q)); });
    if (!dup) roots.push_back(*r);
  }
  if (roots.empty()) fail(ErrorKind::no_root, "growth-rate Newton diverged from every seed");
  return *std::max_element(roots.begin(), roots.end(),
                           [](const cplx& x, const cplx& y) { return x.real() < y.real(); });
}

inline cplx solve_growth_rate(double a, double Ra, const Params& p, const BasicState& b,
                              const std::vector<cplx>& seeds, ShootingOptions shoot = {}) {
  return solve_growth_rate(StabilityProblem(p, b, shoot), a, Ra, seeds);
}

}  // namespace photobio
