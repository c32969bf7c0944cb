#pragma once

// Closed-form background fields in internal units: leading-order paraxial Gaussian,
// e- and b-type dipole pulses, plane waves. Physical fields are real parts of the
// complex closed forms; the carrier-envelope phase enters through the phase of g.

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "vacsim/error.hpp"
#include "vacsim/geometry.hpp"
#include "vacsim/grid.hpp"
#include "vacsim/parallel.hpp"
#include "vacsim/scenario.hpp"
#include "vacsim/units.hpp"

namespace vacsim {

using cplx = std::complex<double>;

/// g(t) = exp(-4 t^2 / tau^2) exp(-i omega t + i phase) and its time derivatives.
struct Envelope {
  double tau = 1;   // 1/e^2 intensity duration; zero means no envelope
  double omega = 1;
  double phase = 0;

  /// Fills d[0..nmax] with g^(n)(t) using g^(n+1) = h' g^(n) + n h'' g^(n-1).
  void derivatives(double t, int nmax, cplx* d) const {
    const double h2 = tau > 0 ? -8.0 / (tau * tau) : 0.0;
    const cplx h1(h2 * t, -omega);
    const double env = tau > 0 ? std::exp(-4.0 * t * t / (tau * tau)) : 1.0;
    d[0] = env * std::polar(1.0, phase - omega * t);
    if (nmax >= 1) d[1] = h1 * d[0];
    for (int n = 1; n < nmax; ++n) d[n + 1] = h1 * d[n] + double(n) * h2 * d[n - 1];
  }
  cplx value(double t) const {
    cplx d[1];
    derivatives(t, 0, d);
    return d[0];
  }
};

/// A pulse converted to internal units with its amplitude fixed.
struct PulseModel {
  PulseKind kind = PulseKind::gaussian;
  double amplitude = 1;
  double omega = 1;
  double tau = 0;     // 1/e^2 duration, internal
  double t0 = 0;      // focus time
  Vec3 x0 = Vec3::Zero();
  double phase = 0;   // radians
  // Gaussian / plane wave
  Vec3 k = Vec3::UnitZ();
  Vec3 e1 = Vec3::UnitX();
  Vec3 e2 = Vec3::UnitY();
  Vec3 pol = Vec3::UnitX();
  Vec3 bpol = Vec3::UnitY();
  double w0 = 1;
  double zr = 1;
  // Dipole
  Vec3 d = Vec3::UnitZ();

  Envelope envelope() const { return {tau, omega, phase}; }

  /// Fields of the pulse at one spacetime point.
  void eval(const Vec3& x, double t, Vec3& E, Vec3& B) const {
    switch (kind) {
    case PulseKind::plane_wave: eval_plane(x, t, E, B); return;
    case PulseKind::gaussian: eval_gauss(x, t, E, B); return;
    case PulseKind::dipole_e: eval_dip(x, t, E, B); return;
    case PulseKind::dipole_b: {
      Vec3 Ee, Be;
      eval_dip(x, t, Ee, Be);
      E = -Be;
      B = Ee;
      return;
    }
    }
  }

  /// Dipole pulses in their e-type form, before the duality map.
  void eval_e_dipole(const Vec3& x, double t, Vec3& E, Vec3& B) const { eval_dip(x, t, E, B); }

private:
  void eval_plane(const Vec3& x, double t, Vec3& E, Vec3& B) const {
    const double s = t - t0;
    const double z = k.dot(x - x0);
    const double u = s - z;
    const double env = tau > 0 ? std::exp(-4.0 * u * u / (tau * tau)) : 1.0;
    const double f = amplitude * env * std::cos(omega * (z - s) + phase);
    E = f * pol;
    B = f * bpol;
  }

  void eval_gauss(const Vec3& x, double t, Vec3& E, Vec3& B) const {
    const Vec3 r = x - x0;
    const double s = t - t0;
    const double z = k.dot(r);
    const double px = e1.dot(r), py = e2.dot(r);
    const double rho2 = px * px + py * py;
    const cplx q(1.0, z / zr);
    const double u = s - z;
    const cplx psi = std::exp(-rho2 / (w0 * w0 * q) + cplx(-4.0 * u * u / (tau * tau), omega * (z - s) + phase)) / q;
    const double f = amplitude * psi.real();
    E = f * pol;
    B = f * bpol;
  }

  // Fields of the e-dipole with virtual moment d; near the focus the 0/0 forms
  // are replaced by their Taylor series in r.
  void eval_dip(const Vec3& x, double t, Vec3& E, Vec3& B) const {
    const Vec3 rv = x - x0;
    const double s = t - t0;
    const double r = rv.norm();
    const Envelope g = envelope();
    cplx A, Bq, C;
    const double r_switch = 1e-3 * 2 * std::numbers::pi / omega;
    if (r < r_switch) {
      cplx dg[9];
      g.derivatives(s, 8, dg);
      const double r2 = r * r, r4 = r2 * r2;
      A = -2.0 * (dg[3] + dg[5] * r2 / 6.0 + dg[7] * r4 / 120.0);
      Bq = (2.0 / 3.0) * dg[3] + dg[5] * r2 / 15.0 + dg[7] * r4 * (12.0 / 5040.0);
      C = (2.0 / 3.0) * r * dg[4] + dg[6] * r * r2 / 15.0 + dg[8] * r * r4 * (12.0 / 5040.0);
    } else {
      cplx gm[3], gp[3];
      g.derivatives(s - r, 2, gm);
      g.derivatives(s + r, 2, gp);
      const cplx g0m = gm[0] - gp[0], g1p = gm[1] + gp[1], g1m = gm[1] - gp[1];
      const cplx g2p = gm[2] + gp[2], g2m = gm[2] - gp[2];
      A = g2m / r;
      Bq = (r * g1p + g0m) / (r * r * r);
      C = g2p / r + g1m / (r * r);
    }
    const Vec3 n = r > 0 ? Vec3(rv / r) : Vec3::Zero();
    const double nd = n.dot(d);
    E = amplitude * ((n * nd - d) * A.real() + (3.0 * n * nd - d) * Bq.real());
    B = -amplitude * n.cross(d) * C.real();
  }
};

namespace fields_detail {

inline double simpson_weight(int i, int n) {
  if (i == 0 || i == n - 1) return 1.0 / 3.0;
  return (i % 2) ? 4.0 / 3.0 : 2.0 / 3.0;
}

// Energy at t = t0 of a unit-amplitude Gaussian inside a cylinder of radius R and
// half-length Z about the focus. Axisymmetric, so a 2D Simpson rule suffices.
inline double gaussian_unit_energy(const PulseModel& m, double R, double Z, int nr, int nz) {
  PulseModel u = m;
  u.amplitude = 1;
  u.x0 = Vec3::Zero();
  u.t0 = 0;
  const double hr = R / (nr - 1), hz = 2 * Z / (nz - 1);
  double total = 0;
  for (int iz = 0; iz < nz; ++iz) {
    const double z = -Z + iz * hz;
    double ring = 0;
    for (int ir = 0; ir < nr; ++ir) {
      const double rho = ir * hr;
      Vec3 E, B;
      u.eval(z * u.k + rho * u.e1, 0.0, E, B);
      ring += simpson_weight(ir, nr) * 0.5 * (E.squaredNorm() + B.squaredNorm()) * rho;
    }
    total += simpson_weight(iz, nz) * ring * hr;
  }
  return total * hz * 2 * std::numbers::pi;
}

// Energy at t = t0 of a unit-amplitude dipole within radius R; axisymmetric about d.
inline double dipole_unit_energy(const PulseModel& m, double R, int nr, int nth) {
  PulseModel u = m;
  u.amplitude = 1;
  u.x0 = Vec3::Zero();
  u.t0 = 0;
  const PolarizationBasis b = polarization_basis(u.d);
  const double hr = R / (nr - 1), ht = std::numbers::pi / (nth - 1);
  double total = 0;
  for (int ir = 0; ir < nr; ++ir) {
    const double r = ir * hr;
    double shell = 0;
    for (int it = 0; it < nth; ++it) {
      const double th = it * ht;
      const Vec3 n = std::cos(th) * b.k + std::sin(th) * b.e1;
      Vec3 E, B;
      u.eval(r * n, 0.0, E, B);
      shell += simpson_weight(it, nth) * 0.5 * (E.squaredNorm() + B.squaredNorm()) * std::sin(th);
    }
    total += simpson_weight(ir, nr) * shell * ht * r * r;
  }
  return total * hr * 2 * std::numbers::pi;
}

inline PulseModel geometry_model(const PulseSpec& spec, const UnitSystem& units) {
  PulseModel m;
  m.kind = spec.kind;
  const double lref = units.reference_wavelength();
  const double lam_int = spec.wavelength * 1e-9 / lref * 2 * std::numbers::pi;
  m.omega = units.wavelength_to_omega(spec.wavelength * 1e-9);
  m.tau = spec.duration > 0 ? units.to_internal(spec.duration_e2(), units::femtosecond) : 0.0;
  m.t0 = units.to_internal(spec.delay, units::femtosecond);
  m.x0 = Vec3(spec.offset[0], spec.offset[1], spec.offset[2]) * lam_int;
  m.phase = deg2rad(spec.phase);
  const PolarizationBasis b = polarization_basis(deg2rad(spec.theta), deg2rad(spec.phi));
  m.k = b.k;
  m.e1 = b.e1;
  m.e2 = b.e2;
  const double beta = deg2rad(spec.beta);
  m.pol = std::cos(beta) * b.e1 + std::sin(beta) * b.e2;
  m.bpol = m.k.cross(m.pol);
  m.w0 = spec.waist * lam_int;
  m.zr = m.omega * m.w0 * m.w0 / 2;
  m.d = unit_vector(deg2rad(spec.dipole_theta), deg2rad(spec.dipole_phi));
  return m;
}

} // namespace fields_detail

/// Energy of the unit-amplitude pulse at its focus time, internal units. The
/// quadrature box is enlarged once; disagreement beyond 1e-6 is a ConvergenceError.
inline double unit_energy(const PulseSpec& spec, const UnitSystem& units) {
  using namespace fields_detail;
  PulseModel m = geometry_model(spec, units);
  const double per_period = 24.0;
  if (spec.kind == PulseKind::gaussian) {
    auto run = [&](double scale) {
      const double Z = scale * 1.5 * m.tau;
      const double wz = m.w0 * std::sqrt(1 + Z * Z / (m.zr * m.zr));
      const double R = scale * 3.5 * wz;
      const int nz = 2 * int(std::ceil(Z * m.omega / (2 * std::numbers::pi) * per_period)) + 1;
      const int nr = 2 * int(std::ceil(R / m.w0 * 20)) + 1;
      return gaussian_unit_energy(m, R, Z, nr, nz);
    };
    const double a = run(1.0), b = run(1.4);
    if (!(std::abs(a - b) <= 1e-6 * std::abs(b)))
      throw ConvergenceError("Gaussian energy quadrature did not converge");
    return b;
  }
  if (is_dipole(spec.kind)) {
    auto run = [&](double scale) {
      const double R = scale * 1.6 * m.tau;
      const int nr = 2 * int(std::ceil(R * m.omega / (2 * std::numbers::pi) * per_period)) + 1;
      return dipole_unit_energy(m, R, nr, 161);
    };
    const double a = run(1.0), b = run(1.4);
    if (!(std::abs(a - b) <= 1e-6 * std::abs(b)))
      throw ConvergenceError("dipole energy quadrature did not converge");
    return b;
  }
  throw ValidationError("plane waves carry no finite energy; set peak_intensity instead");
}

/// Field amplitude (critical-field units) that gives the pulse its energy W, or
/// for plane waves the requested peak intensity I = u c / 2.
inline double normalize_energy(const PulseSpec& spec, const UnitSystem& units) {
  if (spec.kind == PulseKind::plane_wave) {
    const double I = spec.peak_intensity * units::watt_per_cm2.to_si;
    return std::sqrt(2 * I / units.intensity_unit());
  }
  const double W = units.to_internal(spec.energy, units::joule);
  return std::sqrt(W / unit_energy(spec, units));
}

/// Builds the internal model of a pulse with its normalized amplitude.
inline PulseModel make_pulse_model(const PulseSpec& spec, const UnitSystem& units) {
  PulseModel m = fields_detail::geometry_model(spec, units);
  m.amplitude = normalize_energy(spec, units);
  return m;
}

inline std::vector<PulseModel> make_pulse_models(const ScenarioConfig& cfg) {
  const UnitSystem units = cfg.unit_system();
  std::vector<PulseModel> out;
  for (const auto& p : cfg.pulses) out.push_back(make_pulse_model(p, units));
  return out;
}

/// Adds the fields of one pulse at time t to a sample.
template <class T>
void add_pulse_fields(const PulseModel& m, double t, FieldSample<T>& f) {
  const Grid3& g = f.grid;
  parallel_for(g.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      Vec3 E, B;
      m.eval(g.point(i), t, E, B);
      for (int c = 0; c < 3; ++c) {
        f.E[c][i] += T(E[c]);
        f.B[c][i] += T(B[c]);
      }
    }
  });
}

template <class T = double>
FieldSample<T> sample_pulse(const PulseModel& m, double t, const Grid3& grid) {
  FieldSample<T> f(grid, t);
  add_pulse_fields(m, t, f);
  return f;
}

namespace fields_detail {
inline void require_kind(const PulseSpec& s, std::initializer_list<PulseKind> ok, const char* what) {
  for (auto k : ok)
    if (s.kind == k) return;
  throw ValidationError(std::string(what) + " called with a " + to_string(s.kind) + " pulse");
}
} // namespace fields_detail

template <class T = double>
FieldSample<T> eval_plane_wave(const PulseSpec& spec, const UnitSystem& units, double t, const Grid3& grid) {
  fields_detail::require_kind(spec, {PulseKind::plane_wave}, "eval_plane_wave");
  return sample_pulse<T>(make_pulse_model(spec, units), t, grid);
}

template <class T = double>
FieldSample<T> eval_gaussian(const PulseSpec& spec, const UnitSystem& units, double t, const Grid3& grid) {
  fields_detail::require_kind(spec, {PulseKind::gaussian}, "eval_gaussian");
  return sample_pulse<T>(make_pulse_model(spec, units), t, grid);
}

template <class T = double>
FieldSample<T> eval_dipole(const PulseSpec& spec, const UnitSystem& units, double t, const Grid3& grid) {
  fields_detail::require_kind(spec, {PulseKind::dipole_e, PulseKind::dipole_b}, "eval_dipole");
  return sample_pulse<T>(make_pulse_model(spec, units), t, grid);
}

/// Pointwise u = (E^2 + B^2) / 2.
template <class T>
std::vector<double> energy_density(const FieldSample<T>& f) {
  std::vector<double> u(f.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    double s = 0;
    for (int c = 0; c < 3; ++c) s += double(f.E[c][i]) * f.E[c][i] + double(f.B[c][i]) * f.B[c][i];
    u[i] = 0.5 * s;
  }
  return u;
}

/// Total field energy on the grid, internal units.
template <class T>
double grid_energy(const FieldSample<T>& f) {
  const auto u = energy_density(f);
  double s = 0;
  for (double x : u) s += x;
  return s * f.grid.cell_volume();
}

/// Time (relative to t0) and value of the maximum energy density at the focus.
struct FocalPeak {
  double time;
  double u_max;
};

inline FocalPeak focal_peak(const PulseModel& m) {
  const double span = m.tau > 0 ? m.tau : 2 * std::numbers::pi / m.omega;
  const int n = 20001;
  FocalPeak best{0, -1};
  auto u_at = [&](double s) {
    Vec3 E, B;
    m.eval(m.x0, m.t0 + s, E, B);
    return 0.5 * (E.squaredNorm() + B.squaredNorm());
  };
  for (int i = 0; i < n; ++i) {
    const double s = -span + 2 * span * i / (n - 1);
    const double u = u_at(s);
    if (u > best.u_max) best = {s, u};
  }
  // Golden-section polish around the best sample.
  double a = best.time - 2 * span / (n - 1), b = best.time + 2 * span / (n - 1);
  const double gr = (std::sqrt(5.0) - 1) / 2;
  for (int it = 0; it < 60; ++it) {
    const double c = b - gr * (b - a), d = a + gr * (b - a);
    if (u_at(c) > u_at(d)) b = d;
    else a = c;
  }
  const double s = 0.5 * (a + b);
  return {s, std::max(best.u_max, u_at(s))};
}

/// Peak intensity I_max = c u_max / 2 in W/cm^2.
inline double peak_intensity(const PulseModel& m, const UnitSystem& units) {
  const FocalPeak p = focal_peak(m);
  return 0.5 * p.u_max * units.intensity_unit() / units::watt_per_cm2.to_si;
}

} // namespace vacsim
