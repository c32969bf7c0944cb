#pragma once

// Background photons. Each Fourier mode of the free field is split into the
// parts travelling along +k and -k,
//   E+ = (E - k^ x B)/2,  E- = (E + k^ x B)/2,
// and its energy is converted to a photon number by dividing by hbar |k|.
// The map d2N/dOmega = int dk k^2 rho(k) uses the photon density
// rho = n / (dkx dky dkz) interpolated trilinearly between lattice nodes.

#include <cmath>
#include <complex>
#include <vector>

#include "vacsim/emission.hpp"
#include "vacsim/maxwell.hpp"
#include "vacsim/scenario.hpp"

namespace vacsim {

/// Photon numbers on the stored half-spectrum: plus[m] travels along k_m,
/// minus[m] along -k_m. Bins on the kz = 0 plane are stored twice, once per sign
/// of k, and carry half the weight of the others.
struct PhotonMap {
  Grid3 grid;
  std::vector<double> plus;
  std::vector<double> minus;

  int nzh() const { return grid.n[2] / 2 + 1; }
  std::array<double, 3> dk() const {
    const auto L = grid.length();
    return {2 * std::numbers::pi / L[0], 2 * std::numbers::pi / L[1], 2 * std::numbers::pi / L[2]};
  }
  double total() const {
    double s = 0;
    for (std::size_t m = 0; m < plus.size(); ++m) s += plus[m] + minus[m];
    return s;
  }
};

/// Photon numbers per mode; photons_per_energy converts internal energy at unit
/// frequency into photons (energy_unit / photon_energy_unit).
template <class T>
PhotonMap photon_map(const SpectralState<T>& s, double photons_per_energy) {
  PhotonMap pm;
  pm.grid = s.grid;
  pm.plus.assign(s.size(), 0.0);
  pm.minus.assign(s.size(), 0.0);
  const double scale = s.grid.cell_volume() / double(s.grid.size()) * photons_per_energy;
  parallel_for(s.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t m = b; m < e; ++m) {
      const Vec3 kv = s.wave_vector(m);
      const double kk = kv.norm();
      if (kk == 0) continue;
      const Vec3 kh = kv / kk;
      double np = 0, nm = 0;
      for (int c = 0; c < 3; ++c) {
        const int c1 = (c + 1) % 3, c2 = (c + 2) % 3;
        const std::complex<double> kxb =
            kh[c1] * std::complex<double>(s.B[c2][m]) - kh[c2] * std::complex<double>(s.B[c1][m]);
        const std::complex<double> E(s.E[c][m]);
        np += std::norm(0.5 * (E - kxb));
        nm += std::norm(0.5 * (E + kxb));
      }
      const double w = s.weight(m) * scale / kk;
      pm.plus[m] = w * np;
      pm.minus[m] = w * nm;
    }
  });
  return pm;
}

/// Photon density d3N/d3k at an arbitrary wave vector.
inline double photon_density_at(const PhotonMap& pm, const Vec3& k) {
  const auto dk = pm.dk();
  const auto& n = pm.grid.n;
  const bool upper = k[2] >= 0;
  const Vec3 q = upper ? k : Vec3(-k);
  double u[3];
  int i0[3];
  for (int a = 0; a < 3; ++a) {
    u[a] = q[a] / dk[a];
    i0[a] = int(std::floor(u[a]));
    u[a] -= i0[a];
  }
  const double cell = dk[0] * dk[1] * dk[2];
  double rho = 0;
  for (int corner = 0; corner < 8; ++corner) {
    int idx[3];
    double wgt = 1;
    for (int a = 0; a < 3; ++a) {
      const int bit = (corner >> a) & 1;
      idx[a] = i0[a] + bit;
      wgt *= bit ? u[a] : 1 - u[a];
    }
    if (wgt == 0) continue;
    if (std::abs(idx[0]) > n[0] / 2 || std::abs(idx[1]) > n[1] / 2 || idx[2] >= pm.nzh()) continue;
    const int bi = ((idx[0] % n[0]) + n[0]) % n[0], bj = ((idx[1] % n[1]) + n[1]) % n[1];
    const std::size_t flat = (std::size_t(bi) * n[1] + bj) * pm.nzh() + idx[2];
    // kz = 0 nodes hold half weight but appear for both signs of k.
    const double plane = idx[2] == 0 ? 2.0 : 1.0;
    rho += wgt * plane * (upper ? pm.plus[flat] : pm.minus[flat]);
  }
  return rho / cell;
}

struct BackgroundOptions {
  int n_theta = 180;
  int n_phi = 360;
  double omega_min = 0;  // 0: lowest lattice frequency
  double omega_max = 0;  // 0: just below the lattice Nyquist limit
  int n_omega = 0;       // 0: two nodes per lattice spacing
};

/// Background photon density per steradian on a (theta, phi) grid.
inline AngularMap background_angular_density(const PhotonMap& pm, BackgroundOptions opt = {}) {
  const auto dk = pm.dk();
  const double dkmin = std::min({dk[0], dk[1], dk[2]});
  const double dkmax = std::max({dk[0], dk[1], dk[2]});
  double knyq = 1e300;
  for (int a = 0; a < 3; ++a) knyq = std::min(knyq, dk[a] * (pm.grid.n[a] / 2));
  const double w0 = opt.omega_min > 0 ? opt.omega_min : 0.0;
  const double w1 = opt.omega_max > 0 ? opt.omega_max : knyq - 2 * dkmax;
  if (!(w1 > w0)) throw ValidationError("empty background frequency range");
  const int nw = opt.n_omega > 1 ? opt.n_omega : std::max(2, int(std::ceil((w1 - w0) / (0.5 * dkmin))) + 1);
  const double h = (w1 - w0) / (nw - 1);
  AngularMap m(opt.n_theta, opt.n_phi, MapKind::background_density);
  parallel_for(
      m.values.size(),
      [&](std::size_t b, std::size_t e) {
        for (std::size_t c = b; c < e; ++c) {
          const int j = int(c / m.n_phi), kp = int(c % m.n_phi);
          const Vec3 kh = unit_vector(m.theta(j), m.phi(kp));
          double s = 0;
          for (int i = 0; i < nw; ++i) {
            const double w = w0 + i * h;
            const double q = (i == 0 || i == nw - 1) ? 0.5 : 1.0;
            s += q * w * w * photon_density_at(pm, w * kh);
          }
          m.values[c] = s * h;
        }
      },
      64);
  return m;
}

/// Width (in lambda_ref) of the band at the box faces over which background fields
/// are tapered to zero.
inline constexpr double background_taper_width = 6.0;
/// Half-length of the untapered core along each axis, in e^-2 durations.
inline constexpr double background_core_factor = 2.0;

/// Cubic box for the background spectrum, unless an explicit extent is configured.
/// Every pulse at its focus must fit inside the untapered core out to twice its
/// e^-2 duration along the axis, where the amplitude has fallen to 1e-7.
inline Grid3 background_grid(const ScenarioConfig& cfg) {
  double edge = cfg.grid.background_extent;
  const double lref = cfg.reference_wavelength_nm();
  if (!(edge > 0)) {
    double core = 0;
    for (const auto& p : cfg.pulses) {
      double h = (background_core_factor * p.duration_e2() + std::abs(p.delay)) * 1e-15 * constants::c / (lref * 1e-9);
      if (p.kind == PulseKind::gaussian) h = std::max(h, 3.5 * p.waist * p.wavelength / lref);
      double off = 0;
      for (double o : p.offset) off = std::max(off, std::abs(o) * p.wavelength / lref);
      core = std::max(core, h + off);
    }
    edge = 2 * (core + background_taper_width + 0.5);
  }
  double lmin = lref;
  for (const auto& p : cfg.pulses) lmin = std::min(lmin, p.wavelength);
  const double ppl = cfg.grid.background_points_per_lambda * lref / lmin;
  int n = int(std::ceil(edge * ppl));
  n += n % 2;
  const double L = edge * 2 * std::numbers::pi;
  return Grid3::centered({L, L, L}, {n, n, n});
}

/// Background photon map of all pulses superposed at t = 0 on the background box,
/// each windowed smoothly towards the faces.
template <class T = double>
PhotonMap background_photons(const ScenarioConfig& cfg) {
  const UnitSystem units = cfg.unit_system();
  const Grid3 g = background_grid(cfg);
  std::vector<PulseModel> models;
  std::vector<double> expected;
  for (const auto& p : cfg.pulses) {
    models.push_back(make_pulse_model(p, units));
    expected.push_back(p.kind == PulseKind::plane_wave ? 0.0 : units.to_internal(p.energy, units::joule));
  }
  const double half = 0.5 * g.length()[0] / (2 * std::numbers::pi);
  const double taper = std::min(0.5, background_taper_width / half);
  const SpectralState<T> s = init_from_focus<T>(models, g, expected, taper);
  return photon_map(s, units.energy_unit() / units.photon_energy_unit());
}

} // namespace vacsim
