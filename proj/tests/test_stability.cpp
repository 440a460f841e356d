#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "photobio/oracle.hpp"
#include "photobio/stability.hpp"

using photobio::BasicState;
using photobio::cplx;
using photobio::ModeProblem;
using photobio::Params;
using photobio::StabilityProblem;
namespace sv = photobio::sv;

namespace {

Params fig9_params() {
  Params p;
  p.hbar = 1.0;
  p.U_s = 15.0;
  p.set_chi(-0.485);
  p.R_T = -500.0;
  return p;
}

Params shallow_params(double Gc = 0.68, double U_s = 10.0, double R_T = 0.0) {
  Params p;
  p.hbar = 0.5;
  p.U_s = U_s;
  p.set_Gc(Gc);
  p.R_T = R_T;
  return p;
}

struct Case {
  Params p;
  BasicState b;
  explicit Case(const Params& q) : p(q), b(photobio::solve_basic_state(q)) {}
};

const Case& fig9() {
  static const Case c(fig9_params());
  return c;
}

const Case& shallow() {
  static const Case c(shallow_params());
  return c;
}

// Stationary (w, N) system with the temperature block removed; real
// arithmetic, four bottom solutions, QR every 40 steps. Returns the sign of
// the 4x4 top determinant.
double reduced_stationary_sign(const Params& p, const BasicState& b, double a, double Ra, int steps = 2000) {
  using Vec = Eigen::Matrix<double, 7, 1>;  // w, w', w'', w''', N, N', N''
  using Mat = Eigen::Matrix<double, 7, 4>;
  auto f = [&](double x, const Mat& y) {
    const auto c = b.profiles_at(x);
    const double a2 = a * a;
    Mat d;
    for (int j = 0; j < 4; ++j) {
      const Vec v = y.col(j);
      Vec r;
      r << v(1), v(2), v(3), 2 * a2 * v(2) - a2 * a2 * v(0) + a2 * Ra * v(5), v(5), v(6),
          p.U_s * c.taxis * v(6) + (a2 + 2 * p.hbar * p.U_s * c.lambda) * v(5) + p.hbar * p.U_s * c.dlambda * v(4) -
              p.Le * c.dn * v(0);
      d.col(j) = r;
    }
    return d;
  };
  const auto c0 = b.profiles_at(0.0);
  Mat y = Mat::Zero();
  y(2, 0) = 1;
  y(3, 1) = 1;
  y(4, 2) = 1;
  y(6, 2) = p.hbar * p.U_s * c0.lambda;
  y(5, 3) = 1;
  y(6, 3) = p.U_s * c0.taxis;
  double sign = 1.0;
  const double h = 1.0 / steps;
  for (int s = 0; s < steps; ++s) {
    const double x = s * h;
    const Mat k1 = f(x, y);
    const Mat k2 = f(x + h / 2, y + h / 2 * k1);
    const Mat k3 = f(x + h / 2, y + h / 2 * k2);
    const Mat k4 = f(x + h, y + h * k3);
    y += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
    if ((s + 1) % 40 == 0) {
      Eigen::HouseholderQR<Mat> qr(y);
      const Eigen::Matrix4d r = qr.matrixQR().topRows<4>().triangularView<Eigen::Upper>();
      for (int i = 0; i < 4; ++i) sign *= r(i, i) > 0 ? 1.0 : -1.0;
      y = qr.householderQ() * Mat::Identity();
    }
  }
  const auto c1 = b.profiles_at(1.0);
  Eigen::Matrix4d m;
  m.row(0) = y.row(0);
  m.row(1) = y.row(2);
  m.row(2) = y.row(4);
  m.row(3) = p.U_s * c1.taxis * y.row(5) - y.row(6);
  return sign * (m.determinant() > 0 ? 1.0 : -1.0);
}

}  // namespace

TEST(Rhs, MatchesDirectEvaluation) {
  const auto& c = fig9();
  const StabilityProblem sp(c.p, c.b);
  std::mt19937 rng(7);
  std::normal_distribution<double> nd;
  photobio::StateVector y;
  for (int i = 0; i < 9; ++i) y(i) = cplx{nd(rng), nd(rng)};
  const ModeProblem m{1.7, 83.0, cplx{-0.3, 4.1}};
  const auto k = c.b.profiles_at(0.5);
  const auto d = sp.rhs(m, k, y);

  const double a2 = m.a * m.a;
  const cplx g = m.gamma;
  const cplx w4 = (2.0 * a2 + g / c.p.Pr) * y(sv::d2w) - a2 * (a2 + g / c.p.Pr) * y(sv::w) +
                  a2 * m.Ra * y(sv::dN) + a2 * c.p.R_T * y(sv::theta);
  const cplx th2 = (g + a2) * y(sv::theta) - y(sv::w);
  const cplx n3 = c.p.U_s * k.taxis * y(sv::d2N) +
                  (g * c.p.cell_rate_coefficient() + a2 + 2.0 * c.p.hbar * c.p.U_s * k.lambda) * y(sv::dN) +
                  c.p.hbar * c.p.U_s * k.dlambda * y(sv::N) - c.p.Le * k.dn * y(sv::w);
  EXPECT_LT(std::abs(d(sv::d3w) - w4), 1e-12 * std::abs(w4));
  EXPECT_LT(std::abs(d(sv::dtheta) - th2), 1e-12 * std::abs(th2));
  EXPECT_LT(std::abs(d(sv::d2N) - n3), 1e-12 * std::abs(n3));
  for (int i : {sv::w, sv::dw, sv::d2w, sv::theta, sv::N, sv::dN}) EXPECT_EQ(d(i), y(i + 1));
}

TEST(Rhs, NoThermalCouplingWithoutThermalRayleigh) {
  Params p = shallow().p;
  p.R_T = 0.0;
  const StabilityProblem sp(p, shallow().b);
  photobio::StateVector y = photobio::StateVector::Zero();
  y(sv::theta) = 3.0;
  const auto d = sp.rhs({2.0, 50.0, cplx{0.1, 0.2}}, shallow().b.profiles_at(0.3), y);
  EXPECT_EQ(d(sv::d3w), cplx(0.0));
}

TEST(Rhs, StationaryIsPrandtlFree) {
  Params p1 = shallow().p, p2 = shallow().p;
  p2.Pr = 50.0;
  const StabilityProblem s1(p1, shallow().b), s2(p2, shallow().b);
  photobio::StateVector y;
  for (int i = 0; i < 9; ++i) y(i) = cplx{0.1 * i, -0.2 * i + 1.0};
  const auto k = shallow().b.profiles_at(0.4);
  EXPECT_EQ(s1.rhs({2.0, 70.0, 0.0}, k, y), s2.rhs({2.0, 70.0, 0.0}, k, y));
}

TEST(Determinant, ConjugationSymmetry) {
  const auto& c = fig9();
  const StabilityProblem sp(c.p, c.b);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> ra(10.0, 400.0), gr(-3.0, 3.0), gi(0.5, 20.0), aa(0.5, 5.0);
  for (int t = 0; t < 5; ++t) {
    const double a = aa(rng), Ra = ra(rng);
    const cplx g{gr(rng), gi(rng)};
    const auto d1 = sp.determinant({a, Ra, g});
    const auto d2 = sp.determinant({a, Ra, std::conj(g)});
    EXPECT_NEAR(d1.log_scale, d2.log_scale, 1e-10 * std::abs(d1.log_scale));
    EXPECT_LT(std::abs(d2.mantissa - std::conj(d1.mantissa)), 1e-10 * std::abs(d1.mantissa));
  }
}

TEST(Determinant, RealForRealGrowthRate) {
  const auto& c = fig9();
  const StabilityProblem sp(c.p, c.b);
  for (double g : {-2.0, 0.0, 1.5}) {
    const auto d = sp.determinant({2.0, 120.0, cplx{g, 0.0}});
    EXPECT_LE(std::abs(d.mantissa.imag()), 1e-10 * std::abs(d.mantissa));
    EXPECT_GT(d.condition, 1.0);
  }
}

TEST(Determinant, ChangesSignAcrossCollocationRoot) {
  const auto& c = shallow();
  const StabilityProblem sp(c.p, c.b);
  const double a = 2.0;
  const auto roots = photobio::stationary_rayleigh_numbers(photobio::build_operator(a, 0.0, c.p, c.b));
  ASSERT_FALSE(roots.empty());
  const double r = roots.front();
  const double lo = photobio::detail::stationary_residual(sp, a, 0.99 * r);
  const double hi = photobio::detail::stationary_residual(sp, a, 1.01 * r);
  EXPECT_LT(lo * hi, 0.0);
}

TEST(Stationary, MatchesCollocation) {
  const auto& c = shallow();
  for (double a : {1.5, 2.0, 3.0}) {
    const double shoot = photobio::solve_stationary_Ra(a, c.p, c.b);
    const auto col = photobio::stationary_rayleigh_numbers(photobio::build_operator(a, 0.0, c.p, c.b));
    ASSERT_FALSE(col.empty());
    EXPECT_NEAR(shoot, col.front(), 5e-3 * shoot) << "a=" << a;
  }
}

TEST(Stationary, NoRootWithoutSwimmingWhenHeatedFromAbove) {
  Params p = shallow_params(0.68, 0.0, -500.0);
  const BasicState b = photobio::solve_basic_state(p);
  const StabilityProblem sp(p, b);
  EXPECT_FALSE(photobio::find_stationary_Ra(sp, 2.0).has_value());
  try {
    photobio::solve_stationary_Ra(2.0, p, b);
    FAIL();
  } catch (const photobio::Error& e) {
    EXPECT_EQ(e.kind(), photobio::ErrorKind::no_root);
  }
}

TEST(Stationary, PrandtlInvariant) {
  const auto& c = shallow();
  double ref = 0.0;
  for (double pr : {1.0, 5.0, 50.0}) {
    Params p = c.p;
    p.Pr = pr;
    const double r = photobio::solve_stationary_Ra(2.0, p, c.b);
    if (ref == 0.0) ref = r;
    EXPECT_NEAR(r, ref, 1e-8 * ref);
  }
}

TEST(Stationary, IndependentOfOrthonormalisationInterval) {
  const auto& c = shallow();
  const double r50 = photobio::solve_stationary_Ra(2.5, c.p, c.b, std::nullopt, {2000, 50}, {1e-12});
  const double r20 = photobio::solve_stationary_Ra(2.5, c.p, c.b, std::nullopt, {2000, 20}, {1e-12});
  EXPECT_NEAR(r20, r50, 1e-8 * r50);
}

TEST(Stationary, StepHalvingConverged) {
  const auto& c = shallow();
  const double fine = photobio::solve_stationary_Ra(2.5, c.p, c.b, std::nullopt, {2000, 50});
  const double coarse = photobio::solve_stationary_Ra(2.5, c.p, c.b, std::nullopt, {1000, 50});
  EXPECT_LT(std::abs(fine - coarse) / fine, 5e-4);
}

TEST(Stationary, ThermalBlockDecouplesWithoutThermalRayleigh) {
  const auto& c = shallow();
  ASSERT_EQ(c.p.R_T, 0.0);
  const double a = 2.0;
  const double r = photobio::solve_stationary_Ra(a, c.p, c.b, std::nullopt, {}, {1e-12});
  const double below = reduced_stationary_sign(c.p, c.b, a, r * (1 - 1e-8));
  const double above = reduced_stationary_sign(c.p, c.b, a, r * (1 + 1e-8));
  EXPECT_NE(below, above);
}

TEST(Stationary, WarmStartFindsNearbyRoot) {
  const auto& c = shallow();
  const StabilityProblem sp(c.p, c.b);
  const auto cold = photobio::find_stationary_Ra(sp, 2.2);
  const auto warm = photobio::find_stationary_Ra(sp, 2.2, cold.value() * 1.2);
  ASSERT_TRUE(warm.has_value());
  EXPECT_NEAR(*warm, *cold, 1e-7 * *cold);
}

TEST(Oscillatory, DeepLayerNeutralPointNearReference) {
  const auto& c = fig9();
  const auto r = photobio::solve_oscillatory(1.9, c.p, c.b, 85.0, 12.0);
  ASSERT_EQ(r.outcome, photobio::OscillatoryOutcome::converged);
  EXPECT_NEAR(r.Ra, 79.78, 0.02 * 79.78);
  EXPECT_NEAR(r.omega, 12.98, 0.05 * 12.98);
}

TEST(Oscillatory, ConjugateGuessGivesConjugateRoot) {
  const auto& c = fig9();
  const StabilityProblem sp(c.p, c.b);
  const auto up = photobio::find_oscillatory(sp, 1.9, 85.0, 12.0);
  const auto down = photobio::find_oscillatory(sp, 1.9, 85.0, -12.0);
  EXPECT_NEAR(down.Ra, up.Ra, 1e-7 * up.Ra);
  EXPECT_NEAR(down.omega, -up.omega, 1e-7 * up.omega);
}

TEST(Oscillatory, RejectsZeroFrequencyGuess) {
  const auto& c = fig9();
  EXPECT_THROW(photobio::solve_oscillatory(1.9, c.p, c.b, 85.0, 0.0), photobio::Error);
}

TEST(GrowthRate, VanishesAtStationaryNeutralPoint) {
  const Params p = [] {
    Params q;
    q.hbar = 0.5;
    q.U_s = 15.0;
    q.set_Gc(0.63);
    return q;
  }();
  const BasicState b = photobio::solve_basic_state(p);
  const StabilityProblem sp(p, b);
  const double a = 3.25;
  const double ra = photobio::find_stationary_Ra(sp, a).value();
  const auto seeds = photobio::spectrum(photobio::build_operator(a, ra, p, b), 4);
  const cplx g = photobio::solve_growth_rate(sp, a, ra, seeds);
  EXPECT_LT(std::abs(g), 1e-6);
}

TEST(GrowthRate, PureImaginaryAtOscillatoryNeutralPoint) {
  const auto& c = fig9();
  const StabilityProblem sp(c.p, c.b);
  const auto r = photobio::find_oscillatory(sp, 1.9, 80.0, 13.0);
  const auto seeds = photobio::spectrum(photobio::build_operator(1.9, r.Ra, c.p, c.b), 4);
  const cplx g = photobio::solve_growth_rate(sp, 1.9, r.Ra, seeds);
  EXPECT_LT(std::abs(g.real()), 1e-6);
  EXPECT_NEAR(std::abs(g.imag()), r.omega, 1e-6);
}

TEST(GrowthRate, MatchesCollocationLeadingEigenvalue) {
  const auto& c = fig9();
  const StabilityProblem sp(c.p, c.b);
  for (auto [a, ra] : {std::pair{1.0, 150.0}, std::pair{1.9, 70.0}, std::pair{3.0, 120.0}}) {
    const auto ev = photobio::spectrum(photobio::build_operator(a, ra, c.p, c.b), 4);
    const cplx g = photobio::solve_growth_rate(sp, a, ra, ev);
    EXPECT_LT(std::abs(g.real() - ev.front().real()), 1e-4) << "a=" << a;
    EXPECT_LT(std::abs(std::abs(g.imag()) - std::abs(ev.front().imag())), 1e-4) << "a=" << a;
  }
}

TEST(GrowthRate, AllSeedsDivergingIsNoRoot) {
  const auto& c = fig9();
  const StabilityProblem sp(c.p, c.b);
  try {
    photobio::solve_growth_rate(sp, 1.9, 80.0, {});
    FAIL();
  } catch (const photobio::Error& e) {
    EXPECT_EQ(e.kind(), photobio::ErrorKind::no_root);
  }
}
