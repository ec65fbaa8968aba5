#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "sgbp/error.hpp"

namespace sgbp {

/// SI inputs. Energies carried as eV are converted with `electron_charge`.
struct PhysicalConstants {
  double hbar = 1.0546e-34;                // J s
  double k_boltzmann = 1.3805e-23;         // J/K
  double electron_charge = 1.60218e-19;    // C
  double electron_mass = 9.10938e-31;      // kg
  double effective_mass_ratio = 0.32;      // m*/m_e, conduction band silicon
  double lattice_temperature = 300.0;      // K
  double phonon_energy_ev = 0.063;         // eV
  double relative_permittivity = 11.7;
  double vacuum_permittivity = 8.8541878128e-12;  // F/m
  double optical_coupling = 0.0;           // K, J m^3 / s; 0 selects the silicon default
  double acoustic_coupling = 0.0;          // K0, J m^3 / s; 0 selects the silicon default

  double effective_mass() const { return effective_mass_ratio * electron_mass; }
};

/// Deformation-potential data used to derive default K and K0.
struct SiliconPhononParameters {
  double acoustic_deformation_ev = 9.0;
  double sound_velocity = 9040.0;        // m/s
  double mass_density = 2330.0;          // kg/m^3
  double optical_deformation_ev_per_m = 11.4e10;
};

/// K0 = kB T Xi_d^2 / (4 pi^2 hbar v_s^2 rho), in J m^3 / s.
inline double silicon_acoustic_coupling(const PhysicalConstants& c,
                                        const SiliconPhononParameters& si = {}) {
  const double xi = si.acoustic_deformation_ev * c.electron_charge;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return c.k_boltzmann * c.lattice_temperature * xi * xi /
         (4.0 * pi2 * c.hbar * si.sound_velocity * si.sound_velocity * si.mass_density);
}

/// K = (D_t K)^2 / (8 pi^2 rho omega_p), in J m^3 / s.
inline double silicon_optical_coupling(const PhysicalConstants& c,
                                       const SiliconPhononParameters& si = {}) {
  const double dtk = si.optical_deformation_ev_per_m * c.electron_charge;
  const double omega = c.phonon_energy_ev * c.electron_charge / c.hbar;
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return dtk * dtk / (8.0 * pi2 * si.mass_density * omega);
}

struct ScalingOverrides {
  double N = 30.0;               // random interval divisor: beta + z, |z| <= beta/N
  double r_max = 36.0;           // energy cutoff in units of kB T_L
  double length_scale = 1e-6;    // m
  double time_scale = 1e-12;     // s
  double potential_scale = 1.0;  // V
  std::optional<double> c_E;
  std::optional<double> c_P;
  /// Significant digits kept in beta before forming A; 0 keeps full precision.
  /// The default of 8 matches the published constant chain.
  int beta_rounding_digits = 8;
};

struct ScalingContext {
  PhysicalConstants constants;
  double beta = 0.0;               // 1/J
  double thermal_energy = 0.0;     // J
  double thermal_energy_ev = 0.0;  // eV
  double phonon_energy = 0.0;      // J
  double A = 0.0;                  // beta * hbar omega_p
  double N = 0.0;
  double B = 0.0;                  // A / N
  double n_q = 0.0;
  double k_scale = 0.0;            // 1/m
  double velocity_scale = 0.0;     // m/s
  double density_scale = 0.0;      // k_scale^3, 1/m^3
  double length_scale = 0.0;
  double time_scale = 0.0;
  double potential_scale = 0.0;
  double c_v = 0.0;                // x-advection coefficient
  double c_E = 0.0;                // force coefficient
  double c_P = 0.0;                // Poisson coefficient
  double relative_permittivity = 0.0;
  double r_max = 0.0;
  double optical_rate = 0.0;       // dimensionless K
  double acoustic_rate = 0.0;      // dimensionless K0
  std::string audit;
};

/// Bose-Einstein occupation 1/(e^A - 1).
inline double phonon_occupation(double a_effective) {
  if (!(a_effective > 0.0))
    throw DomainError("phonon_occupation: argument must be positive (Bose singularity at 0)");
  return 1.0 / std::expm1(a_effective);
}

inline double round_significant(double value, int digits) {
  if (digits <= 0 || value == 0.0) return value;
  const double exponent = std::floor(std::log10(std::abs(value)));
  const double scale = std::pow(10.0, digits - 1 - exponent);
  return std::round(value * scale) / scale;
}

namespace detail {
inline void require_positive(double v, const char* name) {
  if (!(v > 0.0) || !std::isfinite(v))
    throw ConfigError(std::string("scaling: '") + name + "' must be positive and finite");
}
}  // namespace detail

inline ScalingContext build_scaling(const PhysicalConstants& constants,
                                    const ScalingOverrides& overrides = {}) {
  using detail::require_positive;
  const PhysicalConstants& c = constants;
  require_positive(c.hbar, "hbar");
  require_positive(c.k_boltzmann, "k_boltzmann");
  require_positive(c.electron_charge, "electron_charge");
  require_positive(c.electron_mass, "electron_mass");
  require_positive(c.effective_mass_ratio, "effective_mass_ratio");
  require_positive(c.lattice_temperature, "lattice_temperature");
  require_positive(c.phonon_energy_ev, "phonon_energy_ev");
  require_positive(c.relative_permittivity, "relative_permittivity");
  require_positive(c.vacuum_permittivity, "vacuum_permittivity");
  if (c.optical_coupling < 0.0 || c.acoustic_coupling < 0.0)
    throw ConfigError("scaling: coupling constants must be positive");
  require_positive(overrides.N, "N");
  require_positive(overrides.r_max, "r_max");
  require_positive(overrides.length_scale, "length_scale");
  require_positive(overrides.time_scale, "time_scale");
  require_positive(overrides.potential_scale, "potential_scale");
  if (overrides.c_E) require_positive(*overrides.c_E, "c_E");
  if (overrides.c_P) require_positive(*overrides.c_P, "c_P");

  ScalingContext s;
  s.constants = c;
  if (s.constants.optical_coupling == 0.0) s.constants.optical_coupling = silicon_optical_coupling(c);
  if (s.constants.acoustic_coupling == 0.0) s.constants.acoustic_coupling = silicon_acoustic_coupling(c);

  s.thermal_energy = c.k_boltzmann * c.lattice_temperature;
  s.thermal_energy_ev = s.thermal_energy / c.electron_charge;
  s.beta = round_significant(1.0 / s.thermal_energy, overrides.beta_rounding_digits);
  s.phonon_energy = c.phonon_energy_ev * c.electron_charge;
  s.A = s.beta * s.phonon_energy;
  s.N = overrides.N;
  s.B = s.A / s.N;
  s.n_q = phonon_occupation(s.A);

  const double m = c.effective_mass();
  s.k_scale = std::sqrt(2.0 * m * s.thermal_energy) / c.hbar;
  s.velocity_scale = c.hbar * s.k_scale / m;
  s.density_scale = s.k_scale * s.k_scale * s.k_scale;
  s.length_scale = overrides.length_scale;
  s.time_scale = overrides.time_scale;
  s.potential_scale = overrides.potential_scale;
  s.relative_permittivity = c.relative_permittivity;
  s.r_max = overrides.r_max;

  s.c_v = s.velocity_scale * s.time_scale / s.length_scale;
  const double field_scale = s.potential_scale / s.length_scale;
  s.c_E = overrides.c_E.value_or(c.electron_charge * field_scale * s.time_scale / (c.hbar * s.k_scale));
  s.c_P = overrides.c_P.value_or(c.electron_charge * s.density_scale * s.length_scale * s.length_scale /
                                 (c.vacuum_permittivity * s.potential_scale));

  // delta(energy) -> delta(r) / (kB T), dk -> k_scale^3 dk_hat, t -> t* t_hat.
  const double rate_factor = s.time_scale * s.density_scale / s.thermal_energy;
  s.optical_rate = s.constants.optical_coupling * rate_factor;
  s.acoustic_rate = s.constants.acoustic_coupling * rate_factor;

  if (!(s.r_max > s.A))
    throw ConfigError("scaling: r_max must exceed A so that one phonon shell fits in the domain");

  std::ostringstream a;
  a.precision(12);
  a << "# scaling audit\n";
  a << "kB*T_L            = " << c.k_boltzmann << " * " << c.lattice_temperature << " = " << s.thermal_energy
    << " J = " << s.thermal_energy_ev << " eV\n";
  a << "beta              = 1/(kB*T_L) = " << 1.0 / s.thermal_energy << " 1/J";
  if (overrides.beta_rounding_digits > 0)
    a << " -> " << s.beta << " (rounded to " << overrides.beta_rounding_digits << " significant digits)";
  a << "\n";
  a << "hbar*omega_p      = " << c.phonon_energy_ev << " eV = " << s.phonon_energy << " J\n";
  a << "A                 = beta*hbar*omega_p = " << s.A << "\n";
  a << "N                 = " << s.N << "\n";
  a << "B                 = A/N = " << s.B << "\n";
  a << "n_q               = 1/(exp(A)-1) = " << s.n_q << "\n";
  a << "m*                = " << c.effective_mass_ratio << " * " << c.electron_mass << " = " << m << " kg\n";
  a << "k_scale           = sqrt(2 m* kB T_L)/hbar = " << s.k_scale << " 1/m\n";
  a << "density_scale     = k_scale^3 = " << s.density_scale << " 1/m^3\n";
  a << "velocity_scale    = hbar k_scale/m* = " << s.velocity_scale << " m/s\n";
  a << "length_scale      = " << s.length_scale << " m\n";
  a << "time_scale        = " << s.time_scale << " s\n";
  a << "potential_scale   = " << s.potential_scale << " V\n";
  a << "c_v               = velocity_scale*t*/l* = " << s.c_v << "\n";
  a << "c_E               = q (V*/l*) t* / (hbar k_scale) = " << s.c_E << (overrides.c_E ? " (override)" : "")
    << "\n";
  a << "c_P               = q k_scale^3 l*^2 / (eps0 V*) = " << s.c_P << (overrides.c_P ? " (override)" : "")
    << "\n";
  a << "eps_r             = " << s.relative_permittivity << "\n";
  a << "K  (optical)      = " << s.constants.optical_coupling << " J m^3/s -> " << s.optical_rate << "\n";
  a << "K0 (acoustic)     = " << s.constants.acoustic_coupling << " J m^3/s -> " << s.acoustic_rate << "\n";
  a << "r_max             = " << s.r_max << "\n";
  s.audit = a.str();
  return s;
}

}  // namespace sgbp
