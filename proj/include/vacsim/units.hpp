#pragma once

// Unit handling. Internally everything is Heaviside-Lorentz with hbar = c = eps0 = 1,
// lengths measured in lambda_ref / (2 pi) and field strengths in units of the
// critical field m^2 c^3 / (e hbar). Public inputs and outputs stay SI-facing.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

#include "vacsim/error.hpp"

namespace vacsim {

namespace constants {
// CODATA 2018
inline constexpr double c = 299792458.0;                  // m/s
inline constexpr double hbar = 1.054571817e-34;           // J s
inline constexpr double eps0 = 8.8541878128e-12;          // F/m
inline constexpr double electron_mass = 9.1093837015e-31; // kg
inline constexpr double elementary_charge = 1.602176634e-19;
inline constexpr double alpha = 7.2973525693e-3;
inline constexpr double reduced_compton_wavelength = hbar / (electron_mass * c);
inline constexpr double critical_field =
    electron_mass * electron_mass * c * c * c / (elementary_charge * hbar); // V/m
} // namespace constants

enum class Dimension {
  length,
  time,
  angular_frequency,
  electric_field,
  magnetic_field,
  energy,
  energy_density,
  intensity,
  dimensionless,
};

/// A unit is a dimension plus the factor that takes one of it to SI.
struct Unit {
  Dimension dimension;
  double to_si;
  std::string_view symbol;
};

namespace units {
inline constexpr Unit metre{Dimension::length, 1.0, "m"};
inline constexpr Unit nanometre{Dimension::length, 1e-9, "nm"};
inline constexpr Unit micrometre{Dimension::length, 1e-6, "um"};
inline constexpr Unit second{Dimension::time, 1.0, "s"};
inline constexpr Unit femtosecond{Dimension::time, 1e-15, "fs"};
inline constexpr Unit radian_per_second{Dimension::angular_frequency, 1.0, "rad/s"};
inline constexpr Unit volt_per_metre{Dimension::electric_field, 1.0, "V/m"};
inline constexpr Unit tesla{Dimension::magnetic_field, 1.0, "T"};
inline constexpr Unit joule{Dimension::energy, 1.0, "J"};
inline constexpr Unit joule_per_m3{Dimension::energy_density, 1.0, "J/m^3"};
inline constexpr Unit watt_per_m2{Dimension::intensity, 1.0, "W/m^2"};
inline constexpr Unit watt_per_cm2{Dimension::intensity, 1e4, "W/cm^2"};
} // namespace units

inline std::string_view to_string(Dimension d) {
  switch (d) {
  case Dimension::length: return "length";
  case Dimension::time: return "time";
  case Dimension::angular_frequency: return "angular_frequency";
  case Dimension::electric_field: return "electric_field";
  case Dimension::magnetic_field: return "magnetic_field";
  case Dimension::energy: return "energy";
  case Dimension::energy_density: return "energy_density";
  case Dimension::intensity: return "intensity";
  case Dimension::dimensionless: return "dimensionless";
  }
  return "?";
}

/// Scales tied to one reference wavelength. Internal length unit is
/// lambda_ref / (2 pi), so a pulse at lambda_ref has k = omega = 1.
class UnitSystem {
public:
  explicit UnitSystem(double reference_wavelength_m = 800e-9)
      : lambda_ref_(reference_wavelength_m) {
    if (!(reference_wavelength_m > 0.0) || !std::isfinite(reference_wavelength_m))
      throw ValidationError("reference wavelength must be positive");
  }

  double reference_wavelength() const { return lambda_ref_; }
  double length_unit() const { return lambda_ref_ / (2.0 * std::numbers::pi); }
  double time_unit() const { return length_unit() / constants::c; }
  double frequency_unit() const { return 1.0 / time_unit(); }
  double field_unit() const { return constants::critical_field; }
  double magnetic_unit() const { return constants::critical_field / constants::c; }
  /// Energy of a region of unit internal volume with internal u = 1.
  double energy_unit() const {
    const double l = length_unit();
    return constants::eps0 * field_unit() * field_unit() * l * l * l;
  }
  double energy_density_unit() const {
    return constants::eps0 * field_unit() * field_unit();
  }
  /// Intensity corresponding to internal energy density 1 moving at c.
  double intensity_unit() const { return constants::c * energy_density_unit(); }
  /// Electron mass in inverse internal length units.
  double electron_mass() const {
    return length_unit() / constants::reduced_compton_wavelength;
  }
  /// hbar * (internal frequency unit), in joules.
  double photon_energy_unit() const { return constants::hbar * frequency_unit(); }

  /// Internal unit of a dimension, expressed in SI.
  double internal_to_si(Dimension d) const {
    switch (d) {
    case Dimension::length: return length_unit();
    case Dimension::time: return time_unit();
    case Dimension::angular_frequency: return frequency_unit();
    case Dimension::electric_field: return field_unit();
    case Dimension::magnetic_field: return magnetic_unit();
    case Dimension::energy: return energy_unit();
    case Dimension::energy_density: return energy_density_unit();
    case Dimension::intensity: return intensity_unit();
    case Dimension::dimensionless: return 1.0;
    }
    return 1.0;
  }

  Unit internal(Dimension d) const { return Unit{d, internal_to_si(d), "internal"}; }

  double to_internal(double value, Unit from) const {
    return value * from.to_si / internal_to_si(from.dimension);
  }
  double from_internal(double value, Unit to) const {
    return value * internal_to_si(to.dimension) / to.to_si;
  }

  double wavelength_to_omega(double wavelength_m) const {
    return lambda_ref_ / wavelength_m;
  }

private:
  double lambda_ref_;
};

/// Converts between two units of the same dimension.
inline double convert_units(double value, Unit from, Unit to) {
  if (from.dimension != to.dimension)
    throw ValidationError("cannot convert " + std::string(to_string(from.dimension)) +
                          " to " + std::string(to_string(to.dimension)));
  return value * from.to_si / to.to_si;
}

/// Number of photons carried by energy W at wavelength lambda: W lambda / (2 pi hbar c).
inline double photon_count(double energy_J, double wavelength_m) {
  return energy_J * wavelength_m / (2.0 * std::numbers::pi * constants::hbar * constants::c);
}

/// 1/e^2 intensity duration from the intensity FWHM.
inline double fwhm_to_e2_duration(double fwhm) {
  return std::sqrt(2.0 / std::numbers::ln2) * fwhm;
}

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

} // namespace vacsim
