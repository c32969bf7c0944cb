#pragma once

// Linear pseudo-spectral Maxwell propagation on a periodic box. Each Fourier mode
// of a transverse field rotates in closed form, so any time step is exact.

#include <array>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <vector>

#include "vacsim/error.hpp"
#include "vacsim/fft.hpp"
#include "vacsim/fields.hpp"
#include "vacsim/grid.hpp"
#include "vacsim/parallel.hpp"

namespace vacsim {

/// Half-spectrum of E and B (FFTW r2c layout) at time t.
template <class T>
struct SpectralState {
  Grid3 grid;
  double t = 0;
  std::array<std::vector<std::complex<T>>, 3> E;
  std::array<std::vector<std::complex<T>>, 3> B;

  int nzh() const { return grid.n[2] / 2 + 1; }
  std::size_t size() const { return std::size_t(grid.n[0]) * grid.n[1] * nzh(); }

  /// Wave vector of half-spectrum bin (i, j, k).
  Vec3 wave_vector(int i, int j, int k) const {
    const auto L = grid.length();
    return {2 * std::numbers::pi * fft_index(i, grid.n[0]) / L[0],
            2 * std::numbers::pi * fft_index(j, grid.n[1]) / L[1], 2 * std::numbers::pi * k / L[2]};
  }
  Vec3 wave_vector(std::size_t flat) const {
    const int k = int(flat % nzh());
    const std::size_t r = flat / nzh();
    return wave_vector(int(r / grid.n[1]), int(r % grid.n[1]), k);
  }
  /// Multiplicity of a half-spectrum bin in the full spectrum.
  double weight(std::size_t flat) const {
    const int k = int(flat % nzh());
    return (k == 0 || (grid.n[2] % 2 == 0 && k == grid.n[2] / 2)) ? 1.0 : 2.0;
  }
  bool is_nyquist(std::size_t flat) const {
    const int k = int(flat % nzh());
    const std::size_t r = flat / nzh();
    const int i = int(r / grid.n[1]), j = int(r % grid.n[1]);
    auto nyq = [](int idx, int n) { return n % 2 == 0 && idx == n / 2; };
    return nyq(i, grid.n[0]) || nyq(j, grid.n[1]) || nyq(k, grid.n[2]);
  }
};

namespace maxwell_detail {

template <class T>
void forward_components(const RealFFT3<T>& fft, const std::array<std::vector<T>, 3>& in,
                        std::array<std::vector<std::complex<T>>, 3>& out) {
  for (int c = 0; c < 3; ++c) {
    out[c].resize(fft.complex_size());
    fft.forward(in[c].data(), out[c].data());
  }
}

// Projects onto the transverse subspace and clears Nyquist planes.
template <class T>
void project_transverse(SpectralState<T>& s) {
  parallel_for(s.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t m = b; m < e; ++m) {
      if (s.is_nyquist(m)) {
        for (int c = 0; c < 3; ++c) s.E[c][m] = s.B[c][m] = 0;
        continue;
      }
      const Vec3 kv = s.wave_vector(m);
      const double kk = kv.norm();
      if (kk == 0) continue;
      const Vec3 kh = kv / kk;
      for (auto* F : {&s.E, &s.B}) {
        std::complex<double> dot = 0;
        for (int c = 0; c < 3; ++c) dot += kh[c] * std::complex<double>((*F)[c][m]);
        for (int c = 0; c < 3; ++c) (*F)[c][m] = std::complex<T>(std::complex<double>((*F)[c][m]) - kh[c] * dot);
      }
    }
  });
}

} // namespace maxwell_detail

/// Transverse spectral state of given real fields.
template <class T>
SpectralState<T> spectral_from_fields(const FieldSample<T>& f) {
  SpectralState<T> s;
  s.grid = f.grid;
  s.t = f.t;
  RealFFT3<T> fft(f.grid.n);
  maxwell_detail::forward_components(fft, f.E, s.E);
  maxwell_detail::forward_components(fft, f.B, s.B);
  maxwell_detail::project_transverse(s);
  return s;
}

/// Transverse state of a pulse known to travel along k0: only E is used, and every
/// mode is sent forward (B = sign(k.k0) k^ x E). Paraxial models are not exact
/// Maxwell fields, and splitting their E and B into counter-propagating parts would
/// leave a spurious backward wave at the level of the model error.
template <class T>
SpectralState<T> spectral_from_directed(const FieldSample<T>& f, const Vec3& k0) {
  SpectralState<T> s;
  s.grid = f.grid;
  s.t = f.t;
  RealFFT3<T> fft(f.grid.n);
  maxwell_detail::forward_components(fft, f.E, s.E);
  maxwell_detail::forward_components(fft, f.B, s.B);
  maxwell_detail::project_transverse(s);
  parallel_for(s.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t m = b; m < e; ++m) {
      const Vec3 kv = s.wave_vector(m);
      const double kk = kv.norm();
      const double along = kv.dot(k0);
      if (kk == 0 || along == 0) continue; // no preferred direction: keep the model's B
      const Vec3 kh = (along > 0 ? 1.0 : -1.0) * kv / kk;
      const std::complex<double> E0(s.E[0][m]), E1(s.E[1][m]), E2(s.E[2][m]);
      s.B[0][m] = std::complex<T>(kh[1] * E2 - kh[2] * E1);
      s.B[1][m] = std::complex<T>(kh[2] * E0 - kh[0] * E2);
      s.B[2][m] = std::complex<T>(kh[0] * E1 - kh[1] * E0);
    }
  });
  return s;
}

/// Multiplies the fields by a smooth (C-infinity) window that is 1 in the interior
/// and falls to 0 at the box faces over the outer `fraction` of each half-width.
/// A hard cut at the faces leaks power into every direction of k-space.
template <class T>
void apply_edge_taper(FieldSample<T>& f, double fraction) {
  if (!(fraction > 0)) return;
  const Grid3& g = f.grid;
  auto step = [](double v) { // 0 -> 1 smoothly on [0, 1]
    if (v <= 0) return 0.0;
    if (v >= 1) return 1.0;
    const double a = std::exp(-1 / v), b = std::exp(-1 / (1 - v));
    return a / (a + b);
  };
  std::array<std::vector<double>, 3> w;
  for (int a = 0; a < 3; ++a) {
    w[a].resize(std::size_t(g.n[a]));
    const double half = 0.5 * g.n[a] * g.dx[a];
    const double centre = g.origin[a] + half;
    for (int j = 0; j < g.n[a]; ++j) {
      const double u = std::abs(g.coord(a, j) - centre) / half;
      w[a][std::size_t(j)] = 1 - step((u - (1 - fraction)) / fraction);
    }
  }
  parallel_for(std::size_t(g.n[0]), [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i)
      for (int j = 0; j < g.n[1]; ++j)
        for (int k = 0; k < g.n[2]; ++k) {
          const double v = w[0][i] * w[1][std::size_t(j)] * w[2][std::size_t(k)];
          const std::size_t n = g.index(int(i), j, k);
          for (int c = 0; c < 3; ++c) {
            f.E[c][n] = T(f.E[c][n] * v);
            f.B[c][n] = T(f.B[c][n] * v);
          }
        }
  });
}

/// Evaluates each model at t = 0, transforms, projects onto transverse modes and
/// superposes. Gaussian pulses go through the forward-only construction. If
/// expected energies are given, a pulse whose grid energy falls below 99% of it is
/// reported as truncated. A nonzero edge_taper windows each pulse before the
/// transform (see apply_edge_taper).
template <class T>
SpectralState<T> init_from_focus(const std::vector<PulseModel>& pulses, const Grid3& grid,
                                 const std::vector<double>& expected_energy = {}, double edge_taper = 0) {
  SpectralState<T> total;
  total.grid = grid;
  total.t = 0;
  for (int c = 0; c < 3; ++c) {
    total.E[c].assign(total.size(), 0);
    total.B[c].assign(total.size(), 0);
  }
  for (std::size_t p = 0; p < pulses.size(); ++p) {
    FieldSample<T> f = sample_pulse<T>(pulses[p], 0.0, grid);
    if (p < expected_energy.size() && expected_energy[p] > 0) {
      const double captured = grid_energy(f) / expected_energy[p];
      if (captured < 0.99)
        throw ValidationError("pulse " + std::to_string(p) + " truncated by the grid: " +
                              std::to_string(100 * captured) + "% of its energy captured");
    }
    apply_edge_taper(f, edge_taper);
    const SpectralState<T> s = pulses[p].kind == PulseKind::gaussian ? spectral_from_directed(f, pulses[p].k)
                                                                      : spectral_from_fields(f);
    for (int c = 0; c < 3; ++c)
      for (std::size_t m = 0; m < total.size(); ++m) {
        total.E[c][m] += s.E[c][m];
        total.B[c][m] += s.B[c][m];
      }
  }
  return total;
}

/// Spec-level entry point: builds models, checks energy capture, initializes.
template <class T>
SpectralState<T> init_from_focus(const std::vector<PulseSpec>& specs, const UnitSystem& units, const Grid3& grid) {
  std::vector<PulseModel> models;
  std::vector<double> expected;
  for (const auto& s : specs) {
    models.push_back(make_pulse_model(s, units));
    expected.push_back(s.kind == PulseKind::plane_wave ? 0.0 : units.to_internal(s.energy, units::joule));
  }
  return init_from_focus<T>(models, grid, expected);
}

/// Exact free evolution by dt: per mode with w = |k|,
///   E <- cos(w dt) E + i sin(w dt) k^ x B,   B <- cos(w dt) B - i sin(w dt) k^ x E.
template <class T>
SpectralState<T> propagate(const SpectralState<T>& s, double dt) {
  SpectralState<T> out = s;
  out.t = s.t + dt;
  if (dt == 0) return out;
  parallel_for(s.size(), [&](std::size_t b, std::size_t e) {
    for (std::size_t m = b; m < e; ++m) {
      const Vec3 kv = s.wave_vector(m);
      const double kk = kv.norm();
      if (kk == 0) continue;
      const Vec3 kh = kv / kk;
      const double cw = std::cos(kk * dt), sw = std::sin(kk * dt);
      std::complex<double> e0[3], b0[3];
      for (int c = 0; c < 3; ++c) {
        e0[c] = s.E[c][m];
        b0[c] = s.B[c][m];
      }
      const std::complex<double> kxb[3] = {kh[1] * b0[2] - kh[2] * b0[1], kh[2] * b0[0] - kh[0] * b0[2],
                                           kh[0] * b0[1] - kh[1] * b0[0]};
      const std::complex<double> kxe[3] = {kh[1] * e0[2] - kh[2] * e0[1], kh[2] * e0[0] - kh[0] * e0[2],
                                           kh[0] * e0[1] - kh[1] * e0[0]};
      const std::complex<double> is(0, sw);
      for (int c = 0; c < 3; ++c) {
        out.E[c][m] = std::complex<T>(cw * e0[c] + is * kxb[c]);
        out.B[c][m] = std::complex<T>(cw * b0[c] - is * kxe[c]);
      }
    }
  });
  return out;
}

/// Field energy (E^2 + B^2)/2 integrated over the box, from the spectrum.
template <class T>
double spectral_energy(const SpectralState<T>& s) {
  const double n = double(s.grid.size());
  const double sum = parallel_sum<double>(s.size(), [&](std::size_t m) {
    double a = 0;
    for (int c = 0; c < 3; ++c) a += std::norm(std::complex<double>(s.E[c][m])) + std::norm(std::complex<double>(s.B[c][m]));
    return s.weight(m) * a;
  });
  return 0.5 * sum * s.grid.cell_volume() / n;
}

/// Largest |k.F| / (|k| |F|) over modes, for E and B.
template <class T>
double transversality_residual(const SpectralState<T>& s) {
  double worst = 0;
  for (std::size_t m = 0; m < s.size(); ++m) {
    const Vec3 kv = s.wave_vector(m);
    const double kk = kv.norm();
    if (kk == 0) continue;
    for (const auto* F : {&s.E, &s.B}) {
      std::complex<double> dot = 0;
      double nrm = 0;
      for (int c = 0; c < 3; ++c) {
        dot += kv[c] * std::complex<double>((*F)[c][m]);
        nrm += std::norm(std::complex<double>((*F)[c][m]));
      }
      if (nrm > 0) worst = std::max(worst, std::abs(dot) / (kk * std::sqrt(nrm)));
    }
  }
  return worst;
}

/// Reusable inverse transform for repeated field reconstruction.
template <class T>
class FieldReconstructor {
public:
  explicit FieldReconstructor(const Grid3& grid) : fft_(grid.n), scratch_(fft_.complex_size()) {}

  /// Writes the real fields of s advanced to time t into out (which must live on s.grid).
  void fields_at(const SpectralState<T>& s, double t, FieldSample<T>& out) {
    const double dt = t - s.t;
    const double inv_n = 1.0 / double(s.grid.size());
    out.t = t;
    for (int which = 0; which < 2; ++which) {
      for (int c = 0; c < 3; ++c) {
        rotate_component(s, dt, which, c);
        auto& dst = which == 0 ? out.E[c] : out.B[c];
        dst.resize(s.grid.size());
        fft_.backward(scratch_.data(), dst.data());
        for (auto& v : dst) v = T(v * inv_n);
      }
    }
  }

private:
  // scratch <- component c of E (which = 0) or B (which = 1) after evolving by dt.
  void rotate_component(const SpectralState<T>& s, double dt, int which, int c) {
    const auto& F = which == 0 ? s.E : s.B;
    const auto& G = which == 0 ? s.B : s.E;
    const double sign = which == 0 ? 1.0 : -1.0;
    if (dt == 0) {
      std::copy(F[c].begin(), F[c].end(), scratch_.begin());
      return;
    }
    const int c1 = (c + 1) % 3, c2 = (c + 2) % 3;
    parallel_for(s.size(), [&](std::size_t b, std::size_t e) {
      for (std::size_t m = b; m < e; ++m) {
        const Vec3 kv = s.wave_vector(m);
        const double kk = kv.norm();
        if (kk == 0) {
          scratch_[m] = F[c][m];
          continue;
        }
        const double cw = std::cos(kk * dt), sw = std::sin(kk * dt);
        const std::complex<double> cross =
            (kv[c1] * std::complex<double>(G[c2][m]) - kv[c2] * std::complex<double>(G[c1][m])) / kk;
        scratch_[m] = std::complex<T>(cw * std::complex<double>(F[c][m]) + std::complex<double>(0, sign * sw) * cross);
      }
    });
  }

  RealFFT3<T> fft_;
  std::vector<std::complex<T>> scratch_;
};

/// Real fields of the propagated state at time t.
template <class T>
FieldSample<T> fields_at_time(const SpectralState<T>& s, double t) {
  FieldSample<T> out(s.grid, t);
  FieldReconstructor<T> rec(s.grid);
  rec.fields_at(s, t, out);
  return out;
}

} // namespace vacsim
