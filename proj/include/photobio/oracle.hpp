#pragma once

// Chebyshev collocation of the normal-mode equations: an independent route
// to the spectrum gamma at fixed (a, Ra). The unknowns are the values of
// (w, Theta, N) on Gauss-Lobatto nodes mapped onto [0, 1]; the nine boundary
// conditions replace the rows nearest each wall, which makes B singular and
// produces spurious infinite eigenvalues that are filtered out.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <vector>

#include "photobio/basic_state.hpp"
#include "photobio/error.hpp"
#include "photobio/numeric.hpp"
#include "photobio/params.hpp"
#include "photobio/stability.hpp"

namespace photobio {

/// Chebyshev differentiation matrix on x_j = cos(pi j / n), j = 0..n.
inline Eigen::MatrixXd chebyshev_differentiation(int n, Eigen::VectorXd& nodes) {
  nodes.resize(n + 1);
  for (int j = 0; j <= n; ++j) nodes(j) = std::cos(std::numbers::pi * j / n);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n + 1, n + 1);
  auto c = [n](int j) { return (j == 0 || j == n) ? 2.0 : 1.0; };
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      if (i == j) continue;
      const double sgn = ((i + j) % 2 == 0) ? 1.0 : -1.0;
      D(i, j) = c(i) / c(j) * sgn / (nodes(i) - nodes(j));
    }
  }
  for (int i = 0; i <= n; ++i) D(i, i) = -D.row(i).sum();
  return D;
}

/// Dense pencil A v = gamma B v. Blocks are ordered (w, Theta, N); within a
/// block, index 0 is the top wall x3 = 1 and index n the bottom x3 = 0.
struct CollocationOperator {
  int nodes = 0;                  // Chebyshev degree n (n + 1 points)
  double Ra = 0.0;
  Eigen::VectorXd z;              // collocation heights in [0, 1]
  Eigen::MatrixXd A;
  Eigen::MatrixXd B;
  Eigen::MatrixXd A_rayleigh;     // dA / dRa (used for the stationary pencil)

  int block() const { return nodes + 1; }
};

struct OracleOptions {
  int nodes = 80;
  double infinite_cutoff = 1e8;
};

inline CollocationOperator build_operator(double a, double Ra, const Params& p, const BasicState& b,
                                          int n = 80) {
  if (n < 32) fail(ErrorKind::invalid_parameter, "collocation needs at least 32 nodes");
  if (!(a > 0.0)) fail(ErrorKind::invalid_parameter, "wavenumber a must be positive");
  using Eigen::MatrixXd;
  CollocationOperator op;
  op.nodes = n;
  op.Ra = Ra;
  Eigen::VectorXd x;
  const MatrixXd D = 2.0 * chebyshev_differentiation(n, x);
  op.z = 0.5 * (x.array() + 1.0);
  const MatrixXd D2 = D * D;
  const MatrixXd D3 = D2 * D;
  const MatrixXd D4 = D3 * D;
  const int m = n + 1;
  const MatrixXd I = MatrixXd::Identity(m, m);
  const double a2 = a * a;

  Eigen::VectorXd taxis(m), lambda(m), dlambda(m), dn(m);
  for (int i = 0; i < m; ++i) {
    const BasicProfiles c = b.profiles_at(op.z(i));
    taxis(i) = c.taxis;
    lambda(i) = c.lambda;
    dlambda(i) = c.dlambda;
    dn(i) = c.dn;
  }
  const double hu = p.hbar * p.U_s;

  op.A = MatrixXd::Zero(3 * m, 3 * m);
  op.B = MatrixXd::Zero(3 * m, 3 * m);
  op.A_rayleigh = MatrixXd::Zero(3 * m, 3 * m);
  auto blk = [m](MatrixXd& M, int r, int c) { return M.block(r * m, c * m, m, m); };

  // w: w'''' - 2a^2 w'' + a^4 w - a^2 Ra N' - a^2 R_T Theta = (gamma/Pr)(w'' - a^2 w)
  blk(op.A, 0, 0) = D4 - 2.0 * a2 * D2 + a2 * a2 * I;
  blk(op.A, 0, 1) = -a2 * p.R_T * I;
  blk(op.A_rayleigh, 0, 2) = -a2 * D;
  blk(op.A, 0, 2) = Ra * blk(op.A_rayleigh, 0, 2);
  blk(op.B, 0, 0) = (D2 - a2 * I) / p.Pr;
  // Theta: Theta'' - a^2 Theta + w = gamma Theta
  blk(op.A, 1, 0) = I;
  blk(op.A, 1, 1) = D2 - a2 * I;
  blk(op.B, 1, 1) = I;
  // N: N''' - U_s T N'' - (a^2 + 2 hbar U_s L) N' - hbar U_s L' N + Le n_b' w = c gamma N'
  blk(op.A, 2, 0) = (p.Le * dn).asDiagonal();
  blk(op.A, 2, 2) = D3 - (p.U_s * taxis).asDiagonal() * D2 -
                    (a2 + 2.0 * hu * lambda.array()).matrix().asDiagonal() * D -
                    (hu * dlambda).asDiagonal() * I;
  blk(op.B, 2, 2) = p.cell_rate_coefficient() * D;

  auto set_row = [&](int row, int block_col, const Eigen::RowVectorXd& coeffs) {
    op.A.row(row).setZero();
    op.B.row(row).setZero();
    op.A_rayleigh.row(row).setZero();
    op.A.block(row, block_col * m, 1, m) = coeffs;
  };
  const int top = 0;
  const int bot = n;
  // w: w(1) = w''(1) = 0, w(0) = w'(0) = 0
  set_row(top, 0, I.row(top));
  set_row(top + 1, 0, D2.row(top));
  set_row(bot, 0, I.row(bot));
  set_row(bot - 1, 0, D.row(bot));
  // Theta(1) = Theta(0) = 0
  set_row(m + top, 1, I.row(top));
  set_row(m + bot, 1, I.row(bot));
  // N(1) = 0, U_s T N' - N'' = 0 at the top, hbar U_s L N + U_s T N' - N'' = 0 at the bottom
  set_row(2 * m + top, 2, I.row(top));
  set_row(2 * m + top + 1, 2, p.U_s * taxis(top) * D.row(top) - D2.row(top));
  set_row(2 * m + bot, 2, hu * lambda(bot) * I.row(bot) + p.U_s * taxis(bot) * D.row(bot) - D2.row(bot));
  return op;
}

namespace detail {

inline std::vector<cplx> finite_generalized_eigenvalues(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                                                        double cutoff) {
  Eigen::GeneralizedEigenSolver<Eigen::MatrixXd> ges;
  ges.compute(A, B, false);
  if (ges.info() != Eigen::Success) fail(ErrorKind::eigensolver_failure, "QZ iteration failed");
  const auto alphas = ges.alphas();
  const auto betas = ges.betas();
  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(alphas.size()));
  for (Eigen::Index i = 0; i < alphas.size(); ++i) {
    const double beta = betas(i);
    if (beta == 0.0) continue;
    const cplx g = alphas(i) / beta;
    if (!std::isfinite(g.real()) || !std::isfinite(g.imag()) || std::abs(g) > cutoff) continue;
    out.push_back(g);
  }
  return out;
}

}  // namespace detail

/// All finite eigenvalues sorted by decreasing real part.
inline std::vector<cplx> full_spectrum(const CollocationOperator& op, double cutoff = 1e8) {
  auto ev = detail::finite_generalized_eigenvalues(op.A, op.B, cutoff);
  std::sort(ev.begin(), ev.end(), [](const cplx& x, const cplx& y) {
    if (x.real() != y.real()) return x.real() > y.real();
    return x.imag() > y.imag();
  });
  return ev;
}

/// The k eigenvalues with largest real part.
inline std::vector<cplx> spectrum(const CollocationOperator& op, int k, double cutoff = 1e8) {
  if (k < 1) fail(ErrorKind::invalid_parameter, "spectrum: k must be >= 1");
  auto ev = full_spectrum(op, cutoff);
  if (static_cast<int>(ev.size()) > k) ev.resize(static_cast<std::size_t>(k));
  return ev;
}

/// Stationary neutral Rayleigh numbers: (A0 + Ra A1) v = 0 at gamma = 0 as a
/// pencil in Ra. Returns the positive real values, ascending.
inline std::vector<double> stationary_rayleigh_numbers(const CollocationOperator& op, double cutoff = 1e8) {
  const Eigen::MatrixXd& A1 = op.A_rayleigh;
  const Eigen::MatrixXd A0 = op.A - op.Ra * A1;
  const auto ev = detail::finite_generalized_eigenvalues(A0, -A1, cutoff);
  std::vector<double> out;
  for (const cplx& r : ev) {
    if (r.real() > 0.0 && std::abs(r.imag()) <= 1e-8 * std::max(1.0, std::abs(r.real()))) out.push_back(r.real());
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Null vector of (A - gamma B) by inverse iteration, normalised so that the
/// w block has unit max-norm with its largest entry real positive.
inline Eigen::VectorXcd collocation_eigenvector(const CollocationOperator& op, cplx gamma, int iterations = 4) {
  const Eigen::MatrixXcd M = op.A.cast<cplx>() - gamma * op.B.cast<cplx>();
  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
  Eigen::VectorXcd v = Eigen::VectorXcd::Ones(M.rows());
  for (int it = 0; it < iterations; ++it) {
    v = lu.solve(v);
    v /= v.norm();
  }
  const int m = op.block();
  Eigen::Index imax = 0;
  v.head(m).cwiseAbs().maxCoeff(&imax);
  v /= v(imax);
  return v;
}

/// Largest real part among the non-real eigenvalues, with the matching
/// imaginary part, or nullopt when the retained spectrum is real.
inline std::optional<cplx> leading_complex_eigenvalue(const std::vector<cplx>& ev, double imag_floor = 1e-6) {
  std::optional<cplx> best;
  for (const cplx& g : ev) {
    if (std::abs(g.imag()) < imag_floor) continue;
    if (!best || g.real() > best->real()) best = cplx{g.real(), std::abs(g.imag())};
  }
  return best;
}

/// Oscillatory neutral point at wavenumber a from the collocation spectrum:
/// the Ra in [ra_lo, ra_hi] where the leading complex pair crosses the
/// imaginary axis. Returns (Ra, omega > 0).
struct OracleNeutral {
  double Ra = 0.0;
  double omega = 0.0;
};

inline std::optional<OracleNeutral> oracle_oscillatory_neutral(double a, const Params& p, const BasicState& b,
                                                               double ra_lo, double ra_hi, int n = 80,
                                                               int scan_points = 24, double rel_tol = 1e-10) {
  auto growth = [&](double Ra) {
    const auto ev = full_spectrum(build_operator(a, Ra, p, b, n));
    const auto lead = leading_complex_eigenvalue(ev);
    return lead ? lead->real() : -1e300;
  };
  const auto xs = numeric::geomspace(ra_lo, ra_hi, scan_points);
  double x_prev = xs.front();
  double f_prev = growth(x_prev);
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const double f = growth(xs[i]);
    if (f_prev < 0.0 && f >= 0.0 && f_prev > -1e299) {
      // The complex-pair growth can jump when pairs collide on the real
      // axis; plain bisection keeps the bracket honest.
      double lo = x_prev, hi = xs[i];
      for (int it = 0; it < 60 && (hi - lo) > rel_tol * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (growth(mid) < 0.0 ? lo : hi) = mid;
      }
      const double ra = 0.5 * (lo + hi);
      const auto lead = leading_complex_eigenvalue(full_spectrum(build_operator(a, ra, p, b, n)));
      if (!lead) return std::nullopt;
      return OracleNeutral{ra, lead->imag()};
    }
    x_prev = xs[i];
    f_prev = f;
  }
  return std::nullopt;
}

}  // namespace photobio
