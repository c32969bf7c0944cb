#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vacsim/geometry.hpp"
#include "vacsim/units.hpp"

namespace vacsim {

enum class PulseKind { gaussian, dipole_e, dipole_b, plane_wave };
enum class Precision { f32, f64 };
enum class FieldSource { maxwell, analytic };
enum class WindowCheck { error, warn, off };

inline std::string to_string(PulseKind k) {
  switch (k) {
  case PulseKind::gaussian: return "gaussian";
  case PulseKind::dipole_e: return "dipole_e";
  case PulseKind::dipole_b: return "dipole_b";
  case PulseKind::plane_wave: return "plane_wave";
  }
  return "?";
}
inline std::string to_string(Precision p) { return p == Precision::f32 ? "f32" : "f64"; }
inline std::string to_string(FieldSource s) {
  return s == FieldSource::maxwell ? "maxwell" : "analytic";
}
inline std::string to_string(WindowCheck w) {
  switch (w) {
  case WindowCheck::error: return "error";
  case WindowCheck::warn: return "warn";
  case WindowCheck::off: return "off";
  }
  return "?";
}

inline bool is_dipole(PulseKind k) { return k == PulseKind::dipole_e || k == PulseKind::dipole_b; }

/// One background pulse, SI-facing. Angles in degrees, wavelength in nm,
/// durations in fs (intensity FWHM), waist and offsets in units of the pulse wavelength.
struct PulseSpec {
  PulseKind kind = PulseKind::gaussian;
  std::string label;
  double energy = 1.0;      // J
  double wavelength = 800;  // nm
  double duration = 20;     // fs, intensity FWHM; 0 means continuous (plane wave only)
  double theta = 0;         // propagation direction
  double phi = 0;
  double waist = 2;         // units of wavelength
  double beta = 0;          // polarization angle
  double dipole_theta = 0;  // dipole axis
  double dipole_phi = 0;
  double phase = 0;         // carrier-envelope phase, degrees
  double delay = 0;         // focus time, fs
  std::array<double, 3> offset{0, 0, 0}; // focus position, units of wavelength
  double peak_intensity = 0; // W/cm^2, plane wave amplitude

  /// Internal 1/e^2 intensity duration in fs.
  double duration_e2() const { return fwhm_to_e2_duration(duration); }

  bool operator==(const PulseSpec&) const = default;
};

struct GridSpec {
  std::array<double, 3> extent{16, 16, 8}; // full box length per axis, units of lambda_ref
  std::array<int, 3> points{64, 64, 32};
  std::optional<double> t_min; // fs; default -window_factor * tau_max
  std::optional<double> t_max;
  double dt = 0;               // fs; 0 picks ten steps per shortest period
  double window_factor = 0.8;  // default half window in units of the longest 1/e^2 duration
  FieldSource field_source = FieldSource::maxwell;
  double background_points_per_lambda = 4;
  double background_extent = 0; // cube edge in lambda_ref; 0 sizes it from the pulses

  bool operator==(const GridSpec&) const = default;
};

/// Directional grid the amplitude is sampled on. Frequencies are relative to the
/// highest pulse frequency.
struct SignalSpec {
  int n_omega = 64;
  double omega_min = 0.5;
  double omega_max = 1.5;
  double angular_resolution = 1.0; // degrees, used when n_theta/n_phi are zero
  int n_theta = 0;
  int n_phi = 0;
  int padding = 2;
  WindowCheck window_check = WindowCheck::error;

  int theta_count() const {
    return n_theta > 0 ? n_theta : std::max(2, int(std::lround(180.0 / angular_resolution)));
  }
  int phi_count() const {
    return n_phi > 0 ? n_phi : std::max(4, int(std::lround(360.0 / angular_resolution)));
  }

  bool operator==(const SignalSpec&) const = default;
};

/// Angular box on the sphere, degrees.
struct DetectorRegion {
  std::string name;
  double theta = 90;
  double phi = 180;
  double half_theta = 5;
  double half_phi = 5;

  /// Exact solid angle of the box.
  double solid_angle() const {
    const double t0 = deg2rad(theta - half_theta), t1 = deg2rad(theta + half_theta);
    return deg2rad(2 * half_phi) * (std::cos(t0) - std::cos(t1));
  }

  bool operator==(const DetectorRegion&) const = default;
};

struct OutputSpec {
  bool total = true;
  bool channels = false;
  std::vector<std::string> channel_list; // empty selects all multisets
  bool background = false;
  bool discernibility = false;
  bool csv = false;

  bool operator==(const OutputSpec&) const = default;
};

struct ScenarioConfig {
  std::string name;
  std::vector<PulseSpec> pulses;
  GridSpec grid;
  SignalSpec signal;
  std::vector<DetectorRegion> detectors;
  OutputSpec outputs;
  Precision precision = Precision::f64;

  double reference_wavelength_nm() const {
    double l = 0;
    for (const auto& p : pulses) l = std::max(l, p.wavelength);
    return l > 0 ? l : 800.0;
  }
  UnitSystem unit_system() const { return UnitSystem(reference_wavelength_nm() * 1e-9); }

  /// Highest pulse angular frequency in internal units.
  double max_omega() const {
    double w = 0;
    const double lref = reference_wavelength_nm();
    for (const auto& p : pulses) w = std::max(w, lref / p.wavelength);
    return w > 0 ? w : 1.0;
  }
  /// Longest 1/e^2 duration in fs.
  double max_duration_e2() const {
    double t = 0;
    for (const auto& p : pulses) t = std::max(t, p.duration_e2());
    return t;
  }
  double max_delay() const {
    double t = 0;
    for (const auto& p : pulses) t = std::max(t, std::abs(p.delay));
    return t;
  }
  double t_min_fs() const {
    return grid.t_min ? *grid.t_min : -grid.window_factor * max_duration_e2() - max_delay();
  }
  double t_max_fs() const {
    return grid.t_max ? *grid.t_max : grid.window_factor * max_duration_e2() + max_delay();
  }
  /// Time step in fs.
  double dt_fs() const {
    if (grid.dt > 0) return grid.dt;
    double lmin = 1e300;
    for (const auto& p : pulses) lmin = std::min(lmin, p.wavelength);
    if (pulses.empty()) lmin = 800;
    return lmin * 1e-9 / constants::c / 10.0 * 1e15;
  }

  bool operator==(const ScenarioConfig&) const = default;
};

enum class Severity { error, warning };

struct Diagnostic {
  Severity severity;
  std::string path;
  std::string message;
};

inline std::string to_string(const Diagnostic& d) {
  return std::string(d.severity == Severity::error ? "error" : "warning") + ": " + d.path + ": " +
         d.message;
}

inline bool has_errors(const std::vector<Diagnostic>& ds) {
  return std::any_of(ds.begin(), ds.end(), [](const Diagnostic& d) { return d.severity == Severity::error; });
}

namespace detail {
inline bool finite_all(std::initializer_list<double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}
inline std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}
} // namespace detail

/// Half-extent (units of lambda_ref) a pulse needs along each axis so that it stays
/// clear of the periodic boundary over [t_min, t_max]. Gaussian and plane-wave pulses
/// need c (T + tau) along the propagation axis and three waists across it; dipoles
/// need a sphere of radius c (T + tau).
inline std::array<double, 3> required_half_extent(const PulseSpec& p, double lref_nm, double t_min_fs,
                                                  double t_max_fs) {
  const double reach_fs =
      std::max(std::abs(t_min_fs - p.delay), std::abs(t_max_fs - p.delay)) + p.duration_e2();
  const double along = reach_fs * 1e-15 * constants::c / (lref_nm * 1e-9);
  const double lam = p.wavelength / lref_nm;
  std::array<double, 3> r{};
  if (is_dipole(p.kind)) {
    for (int a = 0; a < 3; ++a) r[a] = along + std::abs(p.offset[a]) * lam;
    return r;
  }
  const Vec3 k = unit_vector(deg2rad(p.theta), deg2rad(p.phi));
  const double across = 3.0 * p.waist * lam;
  for (int a = 0; a < 3; ++a)
    r[a] = std::abs(k[a]) * along + std::sqrt(std::max(0.0, 1.0 - k[a] * k[a])) * across +
           std::abs(p.offset[a]) * lam;
  return r;
}

/// Checks every invariant of a scenario. Empty result means valid.
inline std::vector<Diagnostic> validate_scenario(const ScenarioConfig& cfg) {
  std::vector<Diagnostic> out;
  auto err = [&](std::string path, std::string msg) {
    out.push_back({Severity::error, std::move(path), std::move(msg)});
  };
  auto warn = [&](std::string path, std::string msg) {
    out.push_back({Severity::warning, std::move(path), std::move(msg)});
  };

  if (cfg.pulses.empty()) err("pulses", "at least one pulse is required");

  for (std::size_t i = 0; i < cfg.pulses.size(); ++i) {
    const auto& p = cfg.pulses[i];
    const std::string at = "pulses[" + std::to_string(i) + "]";
    if (!detail::finite_all({p.energy, p.wavelength, p.duration, p.theta, p.phi, p.waist, p.beta,
                             p.dipole_theta, p.dipole_phi, p.phase, p.delay, p.offset[0], p.offset[1],
                             p.offset[2], p.peak_intensity}))
      err(at, "non-finite value");
    if (p.kind == PulseKind::plane_wave) {
      if (!(p.peak_intensity > 0)) err(at + ".peak_intensity", "plane wave needs a positive peak intensity");
      if (p.duration < 0) err(at + ".duration", "duration must be non-negative");
    } else {
      if (!(p.energy >= 0)) err(at + ".energy", "energy must be non-negative");
      else if (p.energy == 0) warn(at + ".energy", "pulse carries no energy and contributes nothing");
      if (!(p.duration > 0)) err(at + ".duration", "duration must be positive");
    }
    if (!(p.wavelength > 0)) err(at + ".wavelength", "wavelength must be positive");
    if (p.kind == PulseKind::gaussian && !(p.waist > 0)) err(at + ".waist", "waist must be positive");
    if (p.theta < 0 || p.theta > 180) err(at + ".theta", "polar angle outside [0, 180]");
    if (p.dipole_theta < 0 || p.dipole_theta > 180) err(at + ".dipole_theta", "polar angle outside [0, 180]");
    if (p.kind == PulseKind::gaussian && p.waist > 0 && p.waist < 1.0)
      warn(at + ".waist", "waist below one wavelength; paraxial model is inaccurate");
  }

  if (!cfg.pulses.empty() && std::none_of(cfg.pulses.begin(), cfg.pulses.end(), [](const PulseSpec& p) {
        return p.kind == PulseKind::plane_wave ? p.peak_intensity > 0 : p.energy > 0;
      }))
    err("pulses", "every pulse is empty");

  const auto& g = cfg.grid;
  const double lref = cfg.reference_wavelength_nm();
  double lmin = lref;
  for (const auto& p : cfg.pulses)
    if (p.wavelength > 0) lmin = std::min(lmin, p.wavelength);
  for (int a = 0; a < 3; ++a) {
    const std::string at = "grid.points[" + std::to_string(a) + "]";
    if (g.points[a] < 2 || g.points[a] % 2 != 0) err(at, "point counts must be even and at least 2");
    if (!(g.extent[a] > 0)) err("grid.extent[" + std::to_string(a) + "]", "extent must be positive");
  }
  bool grid_ok = !has_errors(out);
  double min_ppl = 1e300;
  if (grid_ok) {
    for (int a = 0; a < 3; ++a) min_ppl = std::min(min_ppl, g.points[a] / g.extent[a] * lmin / lref);
    if (min_ppl < 8)
      warn("grid.points", "under-resolved wavelength: " + detail::fmt(min_ppl) + " points per wavelength (< 8)");
  }
  const double t0 = cfg.t_min_fs(), t1 = cfg.t_max_fs();
  if (!(t1 > t0)) err("grid.t_max", "time window is empty");
  if (g.dt < 0) err("grid.dt", "time step must be positive");
  if (!(g.window_factor > 0)) err("grid.window_factor", "window factor must be positive");
  {
    const double period_fs = lmin * 1e-9 / constants::c * 1e15;
    const double steps = period_fs / cfg.dt_fs();
    if (steps < 8)
      warn("grid.dt", "under-resolved time step: " + detail::fmt(steps) + " steps per period (< 8)");
  }
  if (!(g.background_points_per_lambda > 0))
    err("grid.background_points_per_lambda", "must be positive");
  if (g.background_extent < 0) err("grid.background_extent", "must be non-negative");

  const auto& s = cfg.signal;
  if (s.n_omega < 2) err("signal.n_omega", "need at least two frequency nodes");
  if (!(s.omega_min > 0) || !(s.omega_max > s.omega_min))
    err("signal.omega_range", "frequency range must satisfy 0 < min < max");
  if (!(s.angular_resolution > 0)) err("signal.angular_resolution", "must be positive");
  if (s.padding < 1) err("signal.padding", "padding must be at least 1");
  if (s.n_theta < 0 || s.n_phi < 0) err("signal.n_theta", "negative angular counts");
  if (!cfg.pulses.empty() && s.omega_max > s.omega_min) {
    const double wmax = cfg.max_omega();
    for (std::size_t i = 0; i < cfg.pulses.size(); ++i) {
      const double w = lref / cfg.pulses[i].wavelength / wmax;
      if (w < s.omega_min || w > s.omega_max)
        err("signal.omega_range", "pulse " + std::to_string(i) + " frequency outside the signal range");
    }
    if (grid_ok) {
      // Interpolation needs one extra cell beyond the top frequency.
      for (int a = 0; a < 3; ++a) {
        const double dx = g.extent[a] * 2 * std::numbers::pi / g.points[a];
        const double kny = std::numbers::pi / dx;
        const double dk = 2 * std::numbers::pi / (g.extent[a] * 2 * std::numbers::pi * s.padding);
        if (s.omega_max * wmax + 2 * dk >= kny) {
          err("signal.omega_range", "signal frequency range exceeds grid Nyquist along axis " + std::to_string(a));
          break;
        }
      }
    }
  }

  for (std::size_t i = 0; i < cfg.detectors.size(); ++i) {
    const auto& d = cfg.detectors[i];
    const std::string at = "detectors[" + std::to_string(i) + "]";
    if (!(d.half_theta > 0) || !(d.half_phi > 0)) err(at, "half-widths must be positive");
    if (d.theta - d.half_theta < 0 || d.theta + d.half_theta > 180)
      err(at + ".theta", "region leaves [0, 180] in theta");
    if (d.phi < 0 || d.phi >= 360) err(at + ".phi", "center phi outside [0, 360)");
    if (d.half_phi > 180) err(at + ".half_phi", "region wider than the full circle");
  }

  if (cfg.outputs.discernibility && !cfg.outputs.background)
    warn("outputs.discernibility", "discernibility implies background; it will be computed");

  if (g.field_source == FieldSource::maxwell && grid_ok && t1 > t0) {
    for (std::size_t i = 0; i < cfg.pulses.size(); ++i) {
      const auto& p = cfg.pulses[i];
      if (p.kind == PulseKind::plane_wave) continue;
      const auto need = required_half_extent(p, lref, t0, t1);
      for (int a = 0; a < 3; ++a) {
        if (need[a] > g.extent[a] / 2 * (1 + 1e-9)) {
          err("grid.extent[" + std::to_string(a) + "]",
              "maxwell field source needs half-extent " + detail::fmt(need[a]) +
                  " lambda for pulse " + std::to_string(i) + " to avoid wrap-around");
          break;
        }
      }
    }
  }
  return out;
}

} // namespace vacsim
