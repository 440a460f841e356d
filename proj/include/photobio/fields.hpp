#pragma once

// Physical-space perturbation fields from a converged normal mode:
// eigenfunction recovery from the shooting path, roll snapshots, the fastest
// growing wavenumber at fixed Ra, and probe time series.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "photobio/basic_state.hpp"
#include "photobio/error.hpp"
#include "photobio/numeric.hpp"
#include "photobio/oracle.hpp"
#include "photobio/params.hpp"
#include "photobio/stability.hpp"

namespace photobio {

/// Complex profiles on the shooting grid, x3 = k / steps. Normalised so that
/// max |w| = 1 and w is real positive at the node of largest magnitude.
struct Eigenmode {
  double a = 0.0;
  double Ra = 0.0;
  cplx gamma{0.0, 0.0};
  std::vector<double> x;
  std::vector<StateVector> state;  // (w, w', w'', w''', Theta, Theta', N, N', N'')
  double singular_ratio = 0.0;     // smallest / largest singular value of the boundary matrix

  double wavelength() const { return 2.0 * std::numbers::pi / a; }

  /// Values of w, Theta and n-hat = -N' at x3 by cubic Hermite interpolation.
  struct Point {
    cplx w, theta, n;
  };

  Point at(double x3) const {
    if (!(x3 >= -1e-12 && x3 <= 1.0 + 1e-12)) {
      fail(ErrorKind::out_of_domain, "eigenmode evaluated outside [0,1]: x3 = " + std::to_string(x3));
    }
    const int m = static_cast<int>(x.size()) - 1;
    const double s = std::clamp(x3, 0.0, 1.0) * m;
    const int i = std::min(static_cast<int>(s), m - 1);
    const double t = s - i;
    const double h = 1.0 / m;
    const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
    const double h10 = t * (1 - t) * (1 - t);
    const double h01 = t * t * (3 - 2 * t);
    const double h11 = t * t * (t - 1);
    const auto& y0 = state[static_cast<std::size_t>(i)];
    const auto& y1 = state[static_cast<std::size_t>(i) + 1];
    auto herm = [&](int f, int df, double sign) {
      return sign * (h00 * y0(f) + h10 * h * y0(df) + h01 * y1(f) + h11 * h * y1(df));
    };
    return {herm(sv::w, sv::dw, 1.0), herm(sv::theta, sv::dtheta, 1.0), herm(sv::dN, sv::d2N, -1.0)};
  }
};

/// Recovers the eigenfunction at a converged (a, Ra, gamma): the null vector
/// of the top boundary matrix recombines the five bottom solutions, and is
/// carried back through every Gram-Schmidt frame.
inline Eigenmode extract_eigenmode(const StabilityProblem& sp, const ModeProblem& mp, double max_singular_ratio = 1e-6) {
  const ShootingResult sh = sp.shoot(mp, true);
  Eigen::JacobiSVD<BoundaryMatrix> svd(sh.boundary, Eigen::ComputeFullV);
  const auto& sing = svd.singularValues();
  const double ratio = sing(4) / sing(0);
  if (!(ratio < max_singular_ratio)) {
    fail(ErrorKind::not_converged_point, "boundary matrix is not rank deficient (sigma_min/sigma_max = " +
                                             std::to_string(ratio) + ")");
  }
  Eigen::Matrix<cplx, 5, 1> c = svd.matrixV().col(4);

  const int frames = static_cast<int>(sh.frame_start.size());
  std::vector<Eigen::Matrix<cplx, 5, 1>> coeff(static_cast<std::size_t>(frames));
  // frame_r[j] maps frame j onto frame j + 1 (the last one onto the top basis).
  for (int j = frames - 1; j >= 0; --j) {
    const auto& r = sh.frame_r[static_cast<std::size_t>(j)];
    c = r.triangularView<Eigen::Upper>().solve(c);
    coeff[static_cast<std::size_t>(j)] = c;
  }

  Eigenmode m;
  m.a = mp.a;
  m.Ra = mp.Ra;
  m.gamma = mp.gamma;
  m.singular_ratio = ratio;
  const int n = static_cast<int>(sh.path.size()) - 1;
  m.x.resize(sh.path.size());
  m.state.resize(sh.path.size());
  int frame = 0;
  for (int k = 0; k <= n; ++k) {
    while (frame + 1 < frames && sh.frame_start[static_cast<std::size_t>(frame) + 1] <= k) ++frame;
    m.x[static_cast<std::size_t>(k)] = static_cast<double>(k) / n;
    m.state[static_cast<std::size_t>(k)] = sh.path[static_cast<std::size_t>(k)] * coeff[static_cast<std::size_t>(frame)];
  }

  std::size_t kmax = 0;
  for (std::size_t k = 1; k < m.state.size(); ++k) {
    if (std::abs(m.state[k](sv::w)) > std::abs(m.state[kmax](sv::w))) kmax = k;
  }
  const cplx pivot = m.state[kmax](sv::w);
  if (std::abs(pivot) == 0.0) fail(ErrorKind::not_converged_point, "eigenmode has identically zero w");
  const cplx scale = std::conj(pivot) / (std::abs(pivot) * std::abs(pivot));
  for (auto& y : m.state) y *= scale;
  return m;
}

inline Eigenmode extract_eigenmode(const ModeProblem& mp, const Params& p, const BasicState& b,
                                   ShootingOptions opt = {}) {
  return extract_eigenmode(StabilityProblem(p, b, opt), mp);
}

/// Boundary residuals |w(0)|, |w'(0)|, |Theta(0)|, |w(1)|, |w''(1)|,
/// |Theta(1)|, |N(1)| of a normalised mode.
inline std::array<double, 7> boundary_residuals(const Eigenmode& m) {
  const auto& y0 = m.state.front();
  const auto& y1 = m.state.back();
  return {std::abs(y0(sv::w)), std::abs(y0(sv::dw)), std::abs(y0(sv::theta)), std::abs(y1(sv::w)),
          std::abs(y1(sv::d2w)), std::abs(y1(sv::theta)), std::abs(y1(sv::N))};
}

// ---------------------------------------------------------------------------
// Frames
// ---------------------------------------------------------------------------

/// Fields on an nz x nx grid; rows are heights x3 = j / (nz - 1), columns
/// are x1 = i lambda / nx over one wavelength (periodic, right end excluded).
struct FieldFrame {
  double t = 0.0;
  double lambda = 0.0;
  Eigen::VectorXd x1, x3;
  Eigen::MatrixXd psi, w, n, T;
};

namespace detail {

/// exp(gamma t). For oscillatory factors the cycle fraction is reduced and
/// quantised to 2^-40 so that t and t + 2 pi / omega give identical frames.
inline cplx time_factor(cplx gamma, double t) {
  const double amp = std::exp(gamma.real() * t);
  if (gamma.imag() == 0.0) return {amp, 0.0};
  const double cycles = gamma.imag() * t / (2.0 * std::numbers::pi);
  // Centred reduction keeps the factor of the conjugate mode an exact mirror.
  double frac = cycles - std::round(cycles);
  constexpr double q = 1099511627776.0;  // 2^40
  frac = std::round(frac * q) / q;
  const double ph = 2.0 * std::numbers::pi * frac;
  return {amp * std::cos(ph), amp * std::sin(ph)};
}

}  // namespace detail

/// Real fields at time t: w* = Re[w e^{i a x1 + gamma t}], likewise n* and T',
/// and psi = Re[(w / (i a)) e^{...}] so that d psi / d x1 = w*.
inline FieldFrame render_frame(const Eigenmode& m, double t, int nx, int nz) {
  if (nx < 16 || nz < 16) fail(ErrorKind::invalid_parameter, "render_frame needs nx, nz >= 16");
  FieldFrame f;
  f.t = t;
  f.lambda = m.wavelength();
  f.x1.resize(nx);
  f.x3.resize(nz);
  for (int i = 0; i < nx; ++i) f.x1(i) = f.lambda * i / nx;
  for (int j = 0; j < nz; ++j) f.x3(j) = static_cast<double>(j) / (nz - 1);
  f.psi.resize(nz, nx);
  f.w.resize(nz, nx);
  f.n.resize(nz, nx);
  f.T.resize(nz, nx);

  const cplx g = detail::time_factor(m.gamma, t);
  std::vector<cplx> horiz(static_cast<std::size_t>(nx));
  for (int i = 0; i < nx; ++i) {
    // a x1 = 2 pi k / nx with k centred on 0, so columns i and nx - i are
    // exact mirrors.
    const int k = 2 * i <= nx ? i : i - nx;
    const double ph = 2.0 * std::numbers::pi * k / nx;
    const cplx h = 2 * k == nx ? cplx{-1.0, 0.0} : cplx{std::cos(ph), std::sin(ph)};
    horiz[static_cast<std::size_t>(i)] = h * g;
  }
  const cplx inv_ia = 1.0 / cplx{0.0, m.a};
  for (int j = 0; j < nz; ++j) {
    const auto pt = m.at(f.x3(j));
    for (int i = 0; i < nx; ++i) {
      const cplx e = horiz[static_cast<std::size_t>(i)];
      f.w(j, i) = (pt.w * e).real();
      f.psi(j, i) = (pt.w * inv_ia * e).real();
      f.n(j, i) = (pt.n * e).real();
      f.T(j, i) = (pt.theta * e).real();
    }
  }
  return f;
}

/// Complex-conjugate partner of a mode (gamma -> conj(gamma)).
inline Eigenmode conjugate_mode(const Eigenmode& m) {
  Eigenmode c = m;
  c.gamma = std::conj(m.gamma);
  for (auto& y : c.state) y = y.conjugate();
  return c;
}

// ---------------------------------------------------------------------------
// Fastest growing wavenumber
// ---------------------------------------------------------------------------

struct GrowthPoint {
  double a = 0.0;
  cplx gamma{0.0, 0.0};
};

/// Leading growth rate at (a, Ra): the rightmost few collocation eigenvalues
/// seed Newton on the shooting determinant.
inline std::optional<cplx> leading_growth_rate(const StabilityProblem& sp, const BasicState& b, double a, double Ra,
                                               int oracle_nodes = 64, int seeds = 4,
                                               const std::vector<cplx>& extra_seeds = {}) {
  auto guesses = spectrum(build_operator(a, Ra, sp.params(), b, oracle_nodes), seeds);
  guesses.insert(guesses.end(), extra_seeds.begin(), extra_seeds.end());
  try {
    return solve_growth_rate(sp, a, Ra, guesses);
  } catch (const Error&) {
    return std::nullopt;
  }
}

struct MostUnstable {
  double a = 0.0;
  cplx gamma{0.0, 0.0};
  bool unstable = false;  // false: every sampled growth rate is negative
  double wavelength() const { return 2.0 * std::numbers::pi / a; }
};

/// Maximises Re gamma over a in [a_lo, a_hi]: coarse log scan, then Brent
/// on the bracketing interval.
inline MostUnstable most_unstable_wavenumber(const StabilityProblem& sp, const BasicState& b, double Ra, double a_lo,
                                             double a_hi, int scan_points = 24, int oracle_nodes = 64) {
  if (!(a_lo > 0.0 && a_hi > a_lo)) fail(ErrorKind::invalid_parameter, "need 0 < a_lo < a_hi");
  const auto as = numeric::geomspace(a_lo, a_hi, scan_points);
  std::vector<std::optional<cplx>> g(as.size());
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < as.size(); ++i) {
    g[i] = leading_growth_rate(sp, b, as[i], Ra, oracle_nodes);
    if (g[i] && (!best || g[i]->real() > g[*best]->real())) best = i;
  }
  if (!best) fail(ErrorKind::non_convergence, "no growth rate converged over the wavenumber range");

  MostUnstable out{as[*best], *g[*best], false};
  const std::size_t lo = *best == 0 ? 0 : *best - 1;
  const std::size_t hi = std::min(*best + 1, as.size() - 1);
  if (hi > lo) {
    cplx last = *g[*best];
    auto neg_growth = [&](double a) {
      const auto r = leading_growth_rate(sp, b, a, Ra, oracle_nodes, 4, {last});
      if (!r) return std::numeric_limits<double>::infinity();
      last = *r;
      return -r->real();
    };
    const auto m = numeric::minimize(neg_growth, as[lo], as[hi], 30);
    if (std::isfinite(m.fx) && -m.fx >= out.gamma.real()) {
      const auto r = leading_growth_rate(sp, b, m.x, Ra, oracle_nodes, 4, {last});
      if (r) out = {m.x, *r, false};
    }
  }
  out.unstable = out.gamma.real() > 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Time series and phase portraits
// ---------------------------------------------------------------------------

struct SeriesPoint {
  double t = 0.0;
  double T = 0.0;
  double dTdt = 0.0;
};

/// T'(t) = Re[Theta(x3) e^{i a x1 + gamma t}] and its exact time derivative
/// at a fixed probe.
inline std::vector<SeriesPoint> time_series(const Eigenmode& m, double x1, double x3, const std::vector<double>& ts) {
  const cplx theta = m.at(x3).theta;
  const cplx e1{std::cos(m.a * x1), std::sin(m.a * x1)};
  std::vector<SeriesPoint> out;
  out.reserve(ts.size());
  for (double t : ts) {
    const cplx v = theta * e1 * std::exp(m.gamma * t);
    out.push_back({t, v.real(), (m.gamma * v).real()});
  }
  return out;
}

/// Default probe: a quarter wavelength across, mid-depth.
inline std::pair<double, double> default_probe(const Eigenmode& m) { return {0.25 * m.wavelength(), 0.5}; }

}  // namespace photobio
