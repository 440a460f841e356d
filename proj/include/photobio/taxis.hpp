#pragma once

// Phototaxis response T(G): mean vertical swimming orientation of a cell as a
// function of the total light intensity G it sees.
//
//   T(G) = 0.8 sin(3 pi phi / 2) - 0.1 sin(pi phi / 2),  phi = G exp(chi (G - 1))
//
// T >= 0 (swim towards the light) below the critical intensity G_c and T < 0
// above it. chi shifts G_c; chi in [-1.1, 1.1] covers G_c in [0.3, 0.8].

#include <cmath>
#include <numbers>
#include <string>

#include "photobio/error.hpp"
#include "photobio/numeric.hpp"

namespace photobio {

/// The taxis response. This is the single place a different species'
/// response curve would plug in: everything downstream only calls
/// value/derivative/second_derivative.
struct TaxisFn {
  double chi = 0.0;

  static constexpr double kChiMin = -1.1;
  static constexpr double kChiMax = 1.1;

  bool in_calibrated_range() const { return chi >= kChiMin && chi <= kChiMax; }

  double phi(double G) const { return G * std::exp(chi * (G - 1.0)); }
  double dphi(double G) const { return std::exp(chi * (G - 1.0)) * (1.0 + chi * G); }
  double d2phi(double G) const { return chi * std::exp(chi * (G - 1.0)) * (2.0 + chi * G); }

  double value(double G) const {
    using std::numbers::pi;
    const double p = phi(G);
    return 0.8 * std::sin(1.5 * pi * p) - 0.1 * std::sin(0.5 * pi * p);
  }

  /// dT/dG
  double derivative(double G) const {
    using std::numbers::pi;
    const double p = phi(G);
    const double df = 1.2 * pi * std::cos(1.5 * pi * p) - 0.05 * pi * std::cos(0.5 * pi * p);
    return df * dphi(G);
  }

  /// d2T/dG2, needed for the vertical derivative of n_b G_b dT/dG.
  double second_derivative(double G) const {
    using std::numbers::pi;
    const double p = phi(G);
    const double df = 1.2 * pi * std::cos(1.5 * pi * p) - 0.05 * pi * std::cos(0.5 * pi * p);
    const double d2f = -1.8 * pi * pi * std::sin(1.5 * pi * p) + 0.025 * pi * pi * std::sin(0.5 * pi * p);
    const double dp = dphi(G);
    return d2f * dp * dp + df * d2phi(G);
  }
};

inline double taxis_value(double G, const TaxisFn& f) { return f.value(G); }
inline double taxis_derivative(double G, const TaxisFn& f) { return f.derivative(G); }

/// Smallest G in (0, 1] where T changes sign from + to -.
inline double critical_intensity(double chi) {
  const TaxisFn f{chi};
  constexpr int kScan = 2000;
  double g_prev = 1e-9;
  double t_prev = f.value(g_prev);
  for (int i = 1; i <= kScan; ++i) {
    const double g = static_cast<double>(i) / kScan;
    const double t = f.value(g);
    if (t_prev > 0.0 && t <= 0.0) {
      if (t == 0.0) return g;
      return numeric::bracketed_root([&](double x) { return f.value(x); }, g_prev, g, t_prev, t,
                                     1e-14)
          .x;
    }
    g_prev = g;
    t_prev = t;
  }
  fail(ErrorKind::no_root, "critical_intensity: T(G) has no +/- sign change in (0,1] for chi = " +
                               std::to_string(chi));
}

/// Inverse of critical_intensity over chi in [-1.1, 1.1].
inline double chi_from_Gc(double Gc) {
  const double lo = TaxisFn::kChiMin;
  const double hi = TaxisFn::kChiMax;
  const double f_lo = critical_intensity(lo) - Gc;
  const double f_hi = critical_intensity(hi) - Gc;
  if (std::abs(f_lo) <= 1e-14) return lo;
  if (std::abs(f_hi) <= 1e-14) return hi;
  if ((f_lo > 0) == (f_hi > 0)) {
    fail(ErrorKind::no_root, "chi_from_Gc: G_c = " + std::to_string(Gc) +
                                 " is outside the range reachable with chi in [-1.1, 1.1]");
  }
  return numeric::bracketed_root([&](double c) { return critical_intensity(c) - Gc; }, lo, hi,
                                 f_lo, f_hi, 1e-13)
      .x;
}

}  // namespace photobio
