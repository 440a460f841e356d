#pragma once

// Dimensionless groups for a phototactic suspension in a layer heated from
// above, and their construction from dimensional (CGS + Kelvin) inputs.

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "photobio/error.hpp"
#include "photobio/taxis.hpp"

namespace photobio {

struct DimensionalParams {
  double depth = 0.5;                   // H, cm
  double kinematic_viscosity = 1e-2;    // nu, cm^2/s
  double cell_diffusivity = 5e-4;       // D, cm^2/s
  double thermal_diffusivity = 2e-3;    // alpha_f, cm^2/s
  double mean_concentration = 1e6;      // n-bar, cm^-3
  double swimming_speed = 1e-2;         // U_c, cm/s
  double cell_volume = 5e-10;           // cm^3
  double density_ratio = 5e-2;          // (rho_cell - rho) / rho
  double thermal_expansion = 3.4e-3;    // beta, 1/K
  double temperature_difference = -1.0; // Delta T = T_lower - T_upper, K (< 0 when heated from above)
  double gravity = 981.0;               // cm/s^2
  double absorption_per_cell = 1e-6;    // iota, cm^2
};

/// How the growth rate enters the cell-conservation equation.
///   unit:  gamma N'      (reproduces the published neutral-curve frequencies)
///   lewis: gamma Le N'   (cell equation written on the thermal time scale)
enum class CellRateScaling { unit, lewis };

inline std::string_view to_string(CellRateScaling s) {
  return s == CellRateScaling::unit ? "unit" : "lewis";
}

struct Params {
  double Ra = 0.0;    // bioconvection Rayleigh number
  double R_T = 0.0;   // thermal Rayleigh number (< 0 when heated from above)
  double R_m = 0.0;   // basic-density Rayleigh number; only shifts the basic pressure
  double Le = 4.0;    // Lewis number alpha_f / D
  double Pr = 5.0;    // Prandtl number nu / alpha_f
  double U_s = 10.0;  // scaled swimming speed U_c H / D
  double hbar = 0.5;  // optical depth iota n-bar H
  double I0 = 0.8;    // incident collimated intensity
  double chi = 0.0;   // taxis steepness
  double Gc = 0.0;    // critical total intensity implied by chi
  CellRateScaling cell_rate = CellRateScaling::unit;

  TaxisFn taxis() const { return TaxisFn{chi}; }

  /// Coefficient multiplying gamma in the cell-conservation equation.
  double cell_rate_coefficient() const { return cell_rate == CellRateScaling::lewis ? Le : 1.0; }

  /// Sets chi and the matching G_c.
  Params& set_chi(double c) {
    chi = c;
    Gc = critical_intensity(c);
    return *this;
  }

  /// Sets G_c and solves for chi.
  Params& set_Gc(double g) {
    chi = chi_from_Gc(g);
    Gc = g;
    return *this;
  }

  void validate() const {
    auto require = [](bool ok, const char* what) {
      if (!ok) fail(ErrorKind::invalid_parameter, what);
    };
    require(std::isfinite(Ra) && std::isfinite(R_T) && std::isfinite(R_m), "Rayleigh numbers must be finite");
    require(Le > 0.0, "Le must be positive");
    require(Pr > 0.0, "Pr must be positive");
    require(U_s >= 0.0, "U_s must be non-negative");
    require(hbar > 0.0, "hbar must be positive");
    require(I0 > 0.0, "I0 must be positive");
    require(Gc > 0.0 && Gc < 1.0, "G_c must lie in (0, 1); set chi or G_c");
  }
};

/// Converts Table-style dimensional inputs into the dimensionless groups.
/// The taxis parameter is taken from chi.
inline Params dimensionless_from_dimensional(const DimensionalParams& d, double I0, double chi) {
  if (!(d.mean_concentration > 0.0)) fail(ErrorKind::invalid_parameter, "mean concentration must be positive");
  if (!(d.depth > 0.0)) fail(ErrorKind::invalid_parameter, "depth H must be positive");
  if (!(d.cell_diffusivity > 0.0)) fail(ErrorKind::invalid_parameter, "cell diffusivity D must be positive");
  if (!(d.thermal_diffusivity > 0.0)) fail(ErrorKind::invalid_parameter, "thermal diffusivity must be positive");
  if (!(d.kinematic_viscosity > 0.0)) fail(ErrorKind::invalid_parameter, "kinematic viscosity must be positive");

  const double H3 = d.depth * d.depth * d.depth;
  // mu alpha_f / rho = nu alpha_f
  const double visc = d.kinematic_viscosity * d.thermal_diffusivity;

  Params p;
  p.Ra = d.mean_concentration * d.cell_volume * d.density_ratio * d.gravity * H3 / visc;
  p.R_T = d.thermal_expansion * d.temperature_difference * d.gravity * H3 / visc;
  p.R_m = d.gravity * H3 / visc;
  p.Le = d.thermal_diffusivity / d.cell_diffusivity;
  p.Pr = d.kinematic_viscosity / d.thermal_diffusivity;
  p.U_s = d.swimming_speed * d.depth / d.cell_diffusivity;
  p.hbar = d.absorption_per_cell * d.mean_concentration * d.depth;
  p.I0 = I0;
  p.set_chi(chi);
  return p;
}

/// Same, with the mean concentration replaced by `n_ref` (cm^-3).
inline Params dimensionless_from_dimensional(const DimensionalParams& d, double n_ref, double I0, double chi) {
  DimensionalParams q = d;
  q.mean_concentration = n_ref;
  return dimensionless_from_dimensional(q, I0, chi);
}

/// Applies one flat `key = value` entry to `p`. Returns false for keys that
/// are not Params fields; throws on malformed values.
inline bool apply_param_key(Params& p, std::string_view key, const std::string& value) {
  auto num = [&]() {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(value, &used);
    } catch (const std::exception&) {
      fail(ErrorKind::invalid_parameter, "not a number for key '" + std::string(key) + "': " + value);
    }
    if (used != value.size()) {
      fail(ErrorKind::invalid_parameter, "trailing characters for key '" + std::string(key) + "': " + value);
    }
    return v;
  };
  if (key == "Ra") p.Ra = num();
  else if (key == "R_T") p.R_T = num();
  else if (key == "R_m") p.R_m = num();
  else if (key == "Le") p.Le = num();
  else if (key == "Pr") p.Pr = num();
  else if (key == "U_s") p.U_s = num();
  else if (key == "hbar") p.hbar = num();
  else if (key == "I0") p.I0 = num();
  else if (key == "chi") p.set_chi(num());
  else if (key == "G_c") p.set_Gc(num());
  else if (key == "cell_rate") {
    if (value == "unit") p.cell_rate = CellRateScaling::unit;
    else if (value == "lewis") p.cell_rate = CellRateScaling::lewis;
    else fail(ErrorKind::invalid_parameter, "cell_rate must be 'unit' or 'lewis', got " + value);
  } else {
    return false;
  }
  return true;
}

}  // namespace photobio
