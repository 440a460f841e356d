#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "photobio/fields.hpp"
#include "photobio/oracle.hpp"

using photobio::BasicState;
using photobio::cplx;
using photobio::Eigenmode;
using photobio::Params;
using photobio::StabilityProblem;
namespace sv = photobio::sv;

namespace {

constexpr double pi = std::numbers::pi;

Params fig9_params() {
  Params p;
  p.hbar = 1.0;
  p.U_s = 15.0;
  p.set_chi(-0.485);
  p.R_T = -500.0;
  return p;
}

struct Fig9 {
  Params p = fig9_params();
  BasicState b = photobio::solve_basic_state(p);
  StabilityProblem sp{p, b};
  photobio::OscillatorySolution neutral = photobio::find_oscillatory(sp, 1.95, 80.0, 13.2);
  Eigenmode mode = photobio::extract_eigenmode(sp, {1.95, neutral.Ra, cplx{0.0, neutral.omega}});
};

const Fig9& fig9() {
  static const Fig9 f;
  return f;
}

// Shooting profiles on the collocation nodes, as one (w, Theta, N) vector.
Eigen::VectorXcd sample_on_nodes(const Eigenmode& m, const Eigen::VectorXd& z) {
  const int k = static_cast<int>(z.size());
  Eigen::VectorXcd v(3 * k);
  const int steps = static_cast<int>(m.x.size()) - 1;
  for (int i = 0; i < k; ++i) {
    const auto p = m.at(z(i));
    const double s = std::clamp(z(i), 0.0, 1.0) * steps;
    const int j = std::min(static_cast<int>(s), steps - 1);
    const double t = s - j, h = 1.0 / steps;
    const auto& y0 = m.state[static_cast<std::size_t>(j)];
    const auto& y1 = m.state[static_cast<std::size_t>(j) + 1];
    const cplx N = (1 + 2 * t) * (1 - t) * (1 - t) * y0(sv::N) + t * (1 - t) * (1 - t) * h * y0(sv::dN) +
                   t * t * (3 - 2 * t) * y1(sv::N) + t * t * (t - 1) * h * y1(sv::dN);
    v(i) = p.w;
    v(k + i) = p.theta;
    v(2 * k + i) = N;
  }
  return v;
}

int sign_changes(const std::vector<double>& v, double floor) {
  int n = 0;
  double last = 0.0;
  for (double x : v) {
    if (std::abs(x) < floor) continue;
    if (last != 0.0 && (x > 0) != (last > 0)) ++n;
    last = x;
  }
  return n;
}

}  // namespace

TEST(Eigenmode, SatisfiesBoundaryConditions) {
  const auto& f = fig9();
  EXPECT_LT(f.mode.singular_ratio, 1e-10);
  for (double r : photobio::boundary_residuals(f.mode)) EXPECT_LT(r, 1e-6);
}

TEST(Eigenmode, NormalisedRealPositivePeak) {
  const auto& f = fig9();
  double peak = 0.0;
  cplx at_peak;
  for (const auto& y : f.mode.state) {
    if (std::abs(y(sv::w)) > peak) {
      peak = std::abs(y(sv::w));
      at_peak = y(sv::w);
    }
  }
  EXPECT_NEAR(peak, 1.0, 1e-14);
  EXPECT_NEAR(at_peak.imag(), 0.0, 1e-14);
  EXPECT_GT(at_peak.real(), 0.0);
}

TEST(Eigenmode, MatchesCollocationEigenvector) {
  const auto& f = fig9();
  const auto op = photobio::build_operator(f.mode.a, f.mode.Ra, f.p, f.b);
  const cplx g = f.mode.gamma;
  Eigen::VectorXcd col = photobio::collocation_eigenvector(op, g);
  Eigen::VectorXcd sh = sample_on_nodes(f.mode, op.z);
  // Same gauge for both: unit, real w at the collocation node of largest |w|.
  Eigen::Index imax = 0;
  col.head(op.block()).cwiseAbs().maxCoeff(&imax);
  sh /= sh(imax);
  col /= col(imax);
  const int m = op.block();
  EXPECT_LT((sh.head(2 * m) - col.head(2 * m)).cwiseAbs().maxCoeff(), 1e-3);

  const Eigen::VectorXcd r = op.A.cast<cplx>() * sh - g * (op.B.cast<cplx>() * sh);
  // Boundary rows hold exact conditions; interior rows carry the ODE residual.
  EXPECT_LT(r.norm() / (op.A.norm() * sh.norm()), 1e-4);
}

TEST(Eigenmode, RejectsPointOffTheDispersionRelation) {
  const auto& f = fig9();
  try {
    photobio::extract_eigenmode(f.sp, {1.95, f.neutral.Ra * 1.1, cplx{0.0, f.neutral.omega}});
    FAIL();
  } catch (const photobio::Error& e) {
    EXPECT_EQ(e.kind(), photobio::ErrorKind::not_converged_point);
  }
}

TEST(Eigenmode, OutOfDomain) {
  EXPECT_THROW(fig9().mode.at(1.5), photobio::Error);
}

TEST(Eigenmode, SingleCellNearMarginalOscillation) {
  Params p;
  p.hbar = 0.5;
  p.U_s = 15.0;
  p.set_Gc(0.65);
  const BasicState b = photobio::solve_basic_state(p);
  const StabilityProblem sp(p, b);
  const auto s = photobio::find_oscillatory(sp, 2.24, 87.7, 7.4);
  const Eigenmode m = photobio::extract_eigenmode(sp, {2.24, s.Ra, cplx{0.0, s.omega}});
  const auto op = photobio::build_operator(2.24, s.Ra, p, b);
  const Eigen::VectorXcd col = photobio::collocation_eigenvector(op, cplx{0.0, s.omega});
  std::vector<double> re_shoot, re_col;
  for (int i = 1; i < op.nodes; ++i) {
    re_col.push_back(col(i).real());
    re_shoot.push_back(m.at(op.z(i)).w.real());
  }
  EXPECT_EQ(sign_changes(re_shoot, 1e-6), sign_changes(re_col, 1e-6));
  EXPECT_EQ(sign_changes(re_shoot, 1e-6), 0);
}

TEST(Render, PeriodicInTime) {
  const auto& m = fig9().mode;
  const double period = 2.0 * pi / m.gamma.imag();
  for (double t : {0.0, 0.16, 0.32}) {
    const auto a = photobio::render_frame(m, t, 64, 33);
    const auto b = photobio::render_frame(m, t + period, 64, 33);
    EXPECT_TRUE(a.psi == b.psi);
    EXPECT_TRUE(a.n == b.n);
    EXPECT_TRUE(a.T == b.T);
  }
}

TEST(Render, StreamFunctionVanishesOnWalls) {
  const auto f = photobio::render_frame(fig9().mode, 0.1, 64, 33);
  EXPECT_LT(f.psi.row(0).cwiseAbs().maxCoeff(), 1e-9);
  EXPECT_LT(f.psi.row(f.psi.rows() - 1).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Render, StreamFunctionSlopeIsVerticalVelocity) {
  const int nx = 128;
  const auto f = photobio::render_frame(fig9().mode, 0.2, nx, 33);
  const double dx = f.lambda / nx;
  const double scale = f.w.cwiseAbs().maxCoeff();
  double worst = 0.0;
  for (int j = 0; j < f.psi.rows(); ++j) {
    for (int i = 0; i < nx; ++i) {
      const double d = (f.psi(j, (i + 1) % nx) - f.psi(j, (i + nx - 1) % nx)) / (2 * dx);
      worst = std::max(worst, std::abs(d - f.w(j, i)));
    }
  }
  EXPECT_LT(worst / scale, 1e-2);
}

TEST(Render, ConjugateModeIsMirrorImage) {
  const auto& m = fig9().mode;
  const Eigenmode c = photobio::conjugate_mode(m);
  const int nx = 64;
  for (double t : {0.0, 0.13, 0.4}) {
    const auto a = photobio::render_frame(m, t, nx, 17);
    const auto b = photobio::render_frame(c, t, nx, 17);
    for (int j = 0; j < a.psi.rows(); ++j) {
      for (int i = 0; i < nx; ++i) {
        const int k = (nx - i) % nx;
        ASSERT_EQ(b.w(j, k), a.w(j, i));
        ASSERT_EQ(b.T(j, k), a.T(j, i));
        ASSERT_EQ(b.psi(j, k), -a.psi(j, i));
      }
    }
  }
}

TEST(Render, PatternTravelsTowardsNegativeX) {
  const auto& m = fig9().mode;
  const int nx = 64;
  auto phase = [&](double t) {
    const auto f = photobio::render_frame(m, t, nx, 17);
    cplx c{0.0, 0.0};
    for (int i = 0; i < nx; ++i) c += f.psi(8, i) * std::exp(cplx{0.0, -2.0 * pi * i / nx});
    return std::arg(c);
  };
  const double dt = 0.01;
  double d = phase(dt) - phase(0.0);
  d = std::remainder(d, 2.0 * pi);
  EXPECT_NEAR(d, m.gamma.imag() * dt, 1e-6);
  EXPECT_GT(d, 0.0);  // crest at a x1 + phase = const moves to smaller x1
}

TEST(Render, RejectsCoarseGrid) {
  EXPECT_THROW(photobio::render_frame(fig9().mode, 0.0, 8, 33), photobio::Error);
}

TEST(TimeSeries, NeutralOrbitIsClosedEllipse) {
  const auto& m = fig9().mode;
  const auto [x1, x3] = photobio::default_probe(m);
  std::vector<double> ts;
  for (int i = 0; i < 400; ++i) ts.push_back(0.01 * i);
  const auto s = photobio::time_series(m, x1, x3, ts);
  Eigen::MatrixXd A(static_cast<Eigen::Index>(s.size()), 5);
  Eigen::VectorXd one = Eigen::VectorXd::Ones(A.rows());
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double x = s[i].T, y = s[i].dTdt;
    A.row(static_cast<Eigen::Index>(i)) << x * x, x * y, y * y, x, y;
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(one);
  EXPECT_LT((A * c - one).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(TimeSeries, PeriodNearHalfUnitAtCriticalPoint) {
  const auto& m = fig9().mode;
  const auto [x1, x3] = photobio::default_probe(m);
  const int n = 512;
  const double dt = 4.0 / n;
  std::vector<double> ts;
  for (int i = 0; i < n; ++i) ts.push_back(i * dt);
  const auto s = photobio::time_series(m, x1, x3, ts);
  std::vector<double> ups;
  for (int i = 1; i < n; ++i) {
    if (s[i - 1].T < 0 && s[i].T >= 0) ups.push_back(ts[i - 1] + dt * s[i - 1].T / (s[i - 1].T - s[i].T));
  }
  ASSERT_GE(ups.size(), 3u);
  const double period = (ups.back() - ups.front()) / static_cast<double>(ups.size() - 1);
  EXPECT_NEAR(period, 0.48, 0.05 * 0.48);

  int best = 0;
  double best_mag = 0.0;
  for (int k = 1; k < n / 2; ++k) {
    cplx c{0.0, 0.0};
    for (int i = 0; i < n; ++i) c += s[i].T * std::exp(cplx{0.0, -2.0 * pi * k * i / n});
    if (std::abs(c) > best_mag) {
      best_mag = std::abs(c);
      best = k;
    }
  }
  const double f_expected = m.gamma.imag() / (2.0 * pi);
  EXPECT_LE(std::abs(best / (n * dt) - f_expected), 1.0 / (n * dt));
}

TEST(TimeSeries, DampedOrbitShrinksByGrowthFactorPerPeriod) {
  const auto& f = fig9();
  const double Ra = 70.0;
  const auto g = photobio::leading_growth_rate(f.sp, f.b, 1.95, Ra);
  ASSERT_TRUE(g.has_value());
  ASSERT_LT(g->real(), 0.0);
  ASSERT_GT(std::abs(g->imag()), 1.0);
  const Eigenmode m = photobio::extract_eigenmode(f.sp, {1.95, Ra, *g});
  const double period = 2.0 * pi / std::abs(g->imag());
  const auto [x1, x3] = photobio::default_probe(m);
  const auto s = photobio::time_series(m, x1, x3, {0.1, 0.1 + period});
  EXPECT_NEAR(s[1].T / s[0].T, std::exp(g->real() * period), 1e-10);
}

TEST(Wavelength, FastestModeIsInteriorMaximum) {
  Params p;
  p.hbar = 0.5;
  p.U_s = 10.0;
  p.set_Gc(0.68);
  const BasicState b = photobio::solve_basic_state(p);
  const StabilityProblem sp(p, b);
  const auto best = photobio::most_unstable_wavenumber(sp, b, 70.0, 0.5, 8.0);
  EXPECT_TRUE(best.unstable);
  EXPECT_GT(best.a, 0.5);
  EXPECT_LT(best.a, 8.0);
  for (double s : {0.9, 1.1}) {
    const auto g = photobio::leading_growth_rate(sp, b, best.a * s, 70.0);
    ASSERT_TRUE(g.has_value());
    EXPECT_LT(g->real(), best.gamma.real());
  }
  EXPECT_NEAR(best.wavelength(), 2.0 * pi / best.a, 1e-15);
}

TEST(Wavelength, StableBelowThreshold) {
  Params p;
  p.hbar = 0.5;
  p.U_s = 10.0;
  p.set_Gc(0.68);
  const BasicState b = photobio::solve_basic_state(p);
  const StabilityProblem sp(p, b);
  EXPECT_FALSE(photobio::most_unstable_wavenumber(sp, b, 20.0, 0.5, 8.0, 12).unstable);
}
