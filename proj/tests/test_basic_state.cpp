#include <gtest/gtest.h>

#include <cmath>

#include "photobio/basic_state.hpp"

using photobio::BasicState;
using photobio::ErrorKind;
using photobio::Params;

namespace {

Params layer(double Gc, double U_s = 15.0, double hbar = 0.5) {
  Params p;
  p.hbar = hbar;
  p.U_s = U_s;
  p.set_Gc(Gc);
  return p;
}

}  // namespace

TEST(BasicState, NoSwimmingGivesUniformSuspension) {
  Params p = layer(0.68, 0.0);
  const BasicState b = photobio::solve_basic_state(p);
  for (std::size_t i = 0; i < b.x().size(); i += 97) {
    EXPECT_NEAR(b.n()[i], 1.0, 1e-12);
    EXPECT_NEAR(b.intensity()[i], p.I0 * std::exp(p.hbar * (b.x()[i] - 1.0)), 1e-12);
  }
  const auto s = photobio::sublayer_location(b);
  EXPECT_NEAR(s.n_max, 1.0, 1e-12);
  EXPECT_EQ(s.x3, 1.0);
}

TEST(BasicState, TopHeavyProfile) {
  const BasicState b = photobio::solve_basic_state(layer(0.8));
  const auto s = photobio::sublayer_location(b);
  EXPECT_NEAR(s.n_max, 8.61, 0.02 * 8.61);
  EXPECT_EQ(s.x3, 1.0);
}

TEST(BasicState, MidDepthSublayer) {
  const BasicState b = photobio::solve_basic_state(layer(0.63));
  const auto s = photobio::sublayer_location(b);
  EXPECT_NEAR(s.n_max, 2.24, 0.02 * 2.24);
  EXPECT_NEAR(s.x3, 0.52, 0.02);
}

TEST(BasicState, EndpointsAndMonotoneIntensity) {
  const Params p = layer(0.65);
  const BasicState b = photobio::solve_basic_state(p);
  EXPECT_EQ(b.tau().back(), 0.0);
  EXPECT_NEAR(b.tau().front(), -1.0, 1e-12);
  EXPECT_NEAR(b.intensity().back(), p.I0, 1e-15);
  const auto temp = b.temperature();
  EXPECT_EQ(temp.front(), -1.0);
  EXPECT_EQ(temp.back(), 0.0);
  for (std::size_t i = 1; i < b.x().size(); ++i) {
    EXPECT_GT(b.intensity()[i], b.intensity()[i - 1]);
    EXPECT_GT(b.n()[i], 0.0);
  }
}

TEST(BasicState, UnitMean) {
  for (double g : {0.8, 0.68, 0.65, 0.63, 0.51}) {
    const BasicState b = photobio::solve_basic_state(layer(g));
    EXPECT_NEAR(photobio::concentration_integral(b), 1.0, 1e-8) << "G_c=" << g;
  }
}

TEST(BasicState, SatisfiesCellBalance) {
  const Params p = layer(0.68);
  const BasicState b = photobio::solve_basic_state(p);
  const auto& n = b.n();
  const double h = 1.0 / b.intervals();
  double nmax = 0.0, worst = 0.0;
  for (std::size_t i = 2; i + 2 < n.size(); ++i) {
    const double dn = (n[i - 2] - 8 * n[i - 1] + 8 * n[i + 1] - n[i + 2]) / (12 * h);
    worst = std::max(worst, std::abs(dn - p.U_s * b.taxis_values()[i] * n[i]));
    nmax = std::max(nmax, n[i]);
  }
  EXPECT_LT(worst, 1e-6 * nmax);
}

TEST(BasicState, ShootingMismatchDecreasesWithTopConcentration) {
  const Params p = layer(0.65);
  const auto f = p.taxis();
  double prev = 1.0;
  for (double top = 0.01; top < 50.0; top *= 1.5) {
    const double tau0 = photobio::detail::shoot_basic_state(p, f, 400, top, false).tau.back();
    EXPECT_LT(tau0, prev);
    prev = tau0;
  }
}

TEST(BasicState, GridConvergence) {
  for (double g : {0.8, 0.65}) {
    const double coarse = photobio::sublayer_location(photobio::solve_basic_state(layer(g), 2000)).n_max;
    const double fine = photobio::sublayer_location(photobio::solve_basic_state(layer(g), 4000)).n_max;
    EXPECT_LT(std::abs(fine - coarse) / fine, 5e-4);
  }
}

TEST(BasicState, SublayerDescendsWithCriticalIntensity) {
  double prev = 2.0;
  for (double g : {0.8, 0.68, 0.65, 0.63}) {
    const double x = photobio::sublayer_location(photobio::solve_basic_state(layer(g))).x3;
    EXPECT_LT(x, prev) << "G_c=" << g;
    prev = x;
  }
}

TEST(BasicState, InteriorSublayerSitsAtCriticalIntensity) {
  const Params p = layer(0.65);
  const BasicState b = photobio::solve_basic_state(p);
  const auto s = photobio::sublayer_location(b);
  ASSERT_LT(s.x3, 1.0);
  const auto c = photobio::basic_profiles_at(b, s.x3);
  EXPECT_NEAR(c.intensity, p.Gc, 1e-10);
  EXPECT_NEAR(c.taxis, 0.0, 1e-10);
}

TEST(BasicProfiles, NoSwimmingCoefficients) {
  const Params p = layer(0.68, 0.0);
  const BasicState b = photobio::solve_basic_state(p);
  const auto f = p.taxis();
  for (double x : {0.0, 0.3, 0.77, 1.0}) {
    const auto c = photobio::basic_profiles_at(b, x);
    const double G = p.I0 * std::exp(p.hbar * (x - 1.0));
    EXPECT_EQ(c.dn, 0.0);
    EXPECT_NEAR(c.lambda, G * f.derivative(G), 1e-12);
  }
}

TEST(BasicProfiles, SpotValueIsGridConverged) {
  const Params p = layer(0.68);
  const auto coarse = photobio::basic_profiles_at(photobio::solve_basic_state(p, 2000), 0.5);
  const auto fine = photobio::basic_profiles_at(photobio::solve_basic_state(p, 20000), 0.5);
  EXPECT_NEAR(coarse.n, fine.n, 1e-6 * std::abs(fine.n));
  EXPECT_NEAR(coarse.dn, fine.dn, 1e-6 * std::abs(fine.dn));
  EXPECT_NEAR(coarse.lambda, fine.lambda, 1e-6 * std::abs(fine.lambda));
  EXPECT_NEAR(coarse.dlambda, fine.dlambda, 1e-6 * std::abs(fine.dlambda));
}

TEST(BasicProfiles, ChainRuleMatchesFiniteDifference) {
  const BasicState b = photobio::solve_basic_state(layer(0.65), 8000);
  for (double x : {0.1, 0.4, 0.6, 0.9}) {
    const double h = 1e-4;
    const auto c = photobio::basic_profiles_at(b, x);
    const double fd_l = (photobio::basic_profiles_at(b, x + h).lambda - photobio::basic_profiles_at(b, x - h).lambda) / (2 * h);
    const double fd_n = (photobio::basic_profiles_at(b, x + h).n - photobio::basic_profiles_at(b, x - h).n) / (2 * h);
    EXPECT_NEAR(c.dlambda, fd_l, 1e-5 * std::max(1.0, std::abs(fd_l)));
    EXPECT_NEAR(c.dn, fd_n, 1e-5 * std::max(1.0, std::abs(fd_n)));
  }
}

TEST(BasicState, Errors) {
  const Params p = layer(0.65);
  try {
    photobio::solve_basic_state(p, 100);
    FAIL();
  } catch (const photobio::Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_parameter);
  }
  const BasicState b = photobio::solve_basic_state(p);
  try {
    b.profiles_at(1.5);
    FAIL();
  } catch (const photobio::Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::out_of_domain);
  }
}
