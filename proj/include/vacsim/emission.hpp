#pragma once

// Vacuum emission amplitude and the observables built from it.
//
// With F = (B^2 - E^2)/2 and G = -E.B the weak-field current reduces to two
// vector densities V_E = 4F E + 7G B and V_B = 4F B - 7G E. For a photon with
// wave vector k and polarization e_p,
//   S_p(k) = i C sqrt(w/2) e_p . (A_E + k^ x A_B),   C = e m^2 / (180 pi^2),
//   A(k)   = sum_t dt e^{i|k|t} sum_x dV e^{-ik.x} V(x, t),
// with fields in units of the critical field.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "vacsim/error.hpp"
#include "vacsim/fft.hpp"
#include "vacsim/geometry.hpp"
#include "vacsim/grid.hpp"
#include "vacsim/parallel.hpp"
#include "vacsim/providers.hpp"
#include "vacsim/scenario.hpp"
#include "vacsim/units.hpp"

namespace vacsim {

// ---------------------------------------------------------------------------
// Field invariants and emission densities

template <class T>
struct InvariantFields {
  std::vector<T> F;
  std::vector<T> G;
};

template <class T>
InvariantFields<T> compute_invariants(const FieldSample<T>& f) {
  InvariantFields<T> inv;
  inv.F.resize(f.size());
  inv.G.resize(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    double e2 = 0, b2 = 0, eb = 0;
    for (int c = 0; c < 3; ++c) {
      e2 += double(f.E[c][i]) * f.E[c][i];
      b2 += double(f.B[c][i]) * f.B[c][i];
      eb += double(f.E[c][i]) * f.B[c][i];
    }
    inv.F[i] = T(0.5 * (b2 - e2));
    inv.G[i] = T(-eb);
  }
  return inv;
}

template <class T>
using VectorGrid = std::array<std::vector<T>, 3>;

template <class T>
struct EmissionDensities {
  VectorGrid<T> VE;
  VectorGrid<T> VB;

  void resize(std::size_t n) {
    for (int c = 0; c < 3; ++c) {
      VE[c].assign(n, T(0));
      VB[c].assign(n, T(0));
    }
  }
};

/// V_E = 4F E + 7G B and V_B = 4F B - 7G E at every grid point.
template <class T>
void emission_densities(const FieldSample<T>& f, EmissionDensities<T>& out) {
  const std::size_t n = f.size();
  out.resize(n);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      double E[3], B[3], e2 = 0, b2 = 0, eb = 0;
      for (int c = 0; c < 3; ++c) {
        E[c] = f.E[c][i];
        B[c] = f.B[c][i];
        e2 += E[c] * E[c];
        b2 += B[c] * B[c];
        eb += E[c] * B[c];
      }
      const double F4 = 2.0 * (b2 - e2), G7 = -7.0 * eb;
      for (int c = 0; c < 3; ++c) {
        out.VE[c][i] = T(F4 * E[c] + G7 * B[c]);
        out.VB[c][i] = T(F4 * B[c] - G7 * E[c]);
      }
    }
  });
}

/// Spatial integrand for one direction and polarization (photon frequency set to 1):
/// e_p . V_E - (k^ x e_p) . V_B.
template <class T>
std::vector<std::complex<double>> emission_integrand(const FieldSample<T>& f, const Vec3& khat, int p) {
  if (p != 1 && p != 2) throw ValidationError("polarization index must be 1 or 2");
  const PolarizationBasis b = polarization_basis(khat);
  const Vec3 ep = p == 1 ? b.e1 : b.e2;
  const Vec3 kxe = b.k.cross(ep);
  EmissionDensities<T> d;
  emission_densities(f, d);
  std::vector<std::complex<double>> out(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) {
    double s = 0;
    for (int c = 0; c < 3; ++c) s += ep[c] * d.VE[c][i] - kxe[c] * d.VB[c][i];
    out[i] = s;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Channels

/// Multiset of three pulse labels (0-based), kept sorted.
struct ChannelIndex {
  std::array<int, 3> labels{0, 0, 0};

  ChannelIndex() = default;
  ChannelIndex(int a, int b, int c) : labels{a, b, c} { std::sort(labels.begin(), labels.end()); }

  /// Number of distinct orderings of the multiset.
  int multiplicity() const {
    if (labels[0] == labels[2]) return 1;
    if (labels[0] == labels[1] || labels[1] == labels[2]) return 3;
    return 6;
  }
  /// Exponent of pulse p in the channel.
  int count(int p) const { return int(std::count(labels.begin(), labels.end(), p)); }

  /// One-based digits, e.g. "122"; comma separated when a label exceeds 9.
  std::string name() const {
    std::ostringstream os;
    const bool wide = labels[2] >= 9;
    for (int i = 0; i < 3; ++i) {
      if (wide && i) os << ',';
      os << labels[i] + 1;
    }
    return os.str();
  }

  static ChannelIndex parse(const std::string& s, int n_pulses) {
    std::vector<int> v;
    if (s.find(',') != std::string::npos) {
      std::stringstream ss(s);
      std::string tok;
      while (std::getline(ss, tok, ',')) {
        try {
          v.push_back(std::stoi(tok));
        } catch (...) {
          throw ValidationError("invalid channel label '" + s + "'");
        }
      }
    } else {
      for (char c : s) {
        if (c < '1' || c > '9') throw ValidationError("invalid channel label '" + s + "'");
        v.push_back(c - '0');
      }
    }
    if (v.size() != 3) throw ValidationError("channel '" + s + "' must name three pulses");
    for (int x : v)
      if (x < 1 || x > n_pulses) throw ValidationError("channel '" + s + "' refers to a missing pulse");
    return ChannelIndex(v[0] - 1, v[1] - 1, v[2] - 1);
  }

  bool operator==(const ChannelIndex&) const = default;
};

/// All multisets of size three over n pulses, lexicographic.
inline std::vector<ChannelIndex> enumerate_channels(int n) {
  std::vector<ChannelIndex> out;
  for (int a = 0; a < n; ++a)
    for (int b = a; b < n; ++b)
      for (int c = b; c < n; ++c) out.emplace_back(a, b, c);
  return out;
}

/// Densities of one channel: the trilinear form summed over the distinct
/// orderings (i, j, k) of the multiset, 4 F(i,j) F_k + 7 G(i,j) *F_k with
/// F(a,b) = (B_a.B_b - E_a.E_b)/2 and G(a,b) = -(E_a.B_b + E_b.B_a)/2.
template <class T>
void channel_densities(const std::vector<const FieldSample<T>*>& pulses, const ChannelIndex& ch,
                       EmissionDensities<T>& out) {
  for (int l : ch.labels)
    if (l < 0 || l >= int(pulses.size())) throw ValidationError("channel refers to a missing pulse");
  std::vector<std::array<int, 3>> perms;
  std::array<int, 3> p = ch.labels;
  do perms.push_back(p);
  while (std::next_permutation(p.begin(), p.end()));
  const std::size_t n = pulses.front()->size();
  out.resize(n);
  parallel_for(n, [&](std::size_t b, std::size_t e) {
    for (std::size_t x = b; x < e; ++x) {
      double ve[3] = {0, 0, 0}, vb[3] = {0, 0, 0};
      for (const auto& q : perms) {
        const auto& fi = *pulses[q[0]];
        const auto& fj = *pulses[q[1]];
        const auto& fk = *pulses[q[2]];
        double bb = 0, ee = 0, eb = 0;
        for (int c = 0; c < 3; ++c) {
          bb += double(fi.B[c][x]) * fj.B[c][x];
          ee += double(fi.E[c][x]) * fj.E[c][x];
          eb += double(fi.E[c][x]) * fj.B[c][x] + double(fj.E[c][x]) * fi.B[c][x];
        }
        const double F4 = 2.0 * (bb - ee), G7 = -3.5 * eb;
        for (int c = 0; c < 3; ++c) {
          ve[c] += F4 * fk.E[c][x] + G7 * fk.B[c][x];
          vb[c] += F4 * fk.B[c][x] - G7 * fk.E[c][x];
        }
      }
      for (int c = 0; c < 3; ++c) {
        out.VE[c][x] = T(ve[c]);
        out.VB[c][x] = T(vb[c]);
      }
    }
  });
}

// ---------------------------------------------------------------------------
// Directional grid, amplitude and angular maps

/// Nodes (omega, theta, phi): omega uniform including both ends, theta and phi
/// cell-centered over [0, pi] and [0, 2 pi).
struct SignalGrid {
  int n_omega = 2, n_theta = 2, n_phi = 4;
  double omega_min = 0.5, omega_max = 1.5;

  double d_omega() const { return (omega_max - omega_min) / (n_omega - 1); }
  double d_theta() const { return std::numbers::pi / n_theta; }
  double d_phi() const { return 2 * std::numbers::pi / n_phi; }
  double omega(int i) const { return omega_min + i * d_omega(); }
  double theta(int j) const { return (j + 0.5) * d_theta(); }
  double phi(int k) const { return (k + 0.5) * d_phi(); }
  std::size_t size() const { return std::size_t(n_omega) * n_theta * n_phi; }
  std::size_t angular_size() const { return std::size_t(n_theta) * n_phi; }
  std::size_t index(int i, int j, int k) const { return (std::size_t(i) * n_theta + j) * n_phi + k; }
  /// Trapezoid weight of omega node i.
  double omega_weight(int i) const { return (i == 0 || i == n_omega - 1 ? 0.5 : 1.0) * d_omega(); }

  static SignalGrid from(const ScenarioConfig& cfg) {
    SignalGrid g;
    const double w = cfg.max_omega();
    g.n_omega = cfg.signal.n_omega;
    g.n_theta = cfg.signal.theta_count();
    g.n_phi = cfg.signal.phi_count();
    g.omega_min = cfg.signal.omega_min * w;
    g.omega_max = cfg.signal.omega_max * w;
    return g;
  }

  bool operator==(const SignalGrid&) const = default;
};

/// S_p on the directional grid, p = 1, 2.
struct SignalAmplitude {
  SignalGrid grid;
  std::string scenario_hash;
  std::string channel = "total";
  std::array<std::vector<std::complex<double>>, 2> S;

  SignalAmplitude() = default;
  explicit SignalAmplitude(const SignalGrid& g) : grid(g) {
    S[0].assign(g.size(), 0);
    S[1].assign(g.size(), 0);
  }
};

enum class MapKind { signal_density, background_density, discernible_mask };

inline std::string to_string(MapKind k) {
  switch (k) {
  case MapKind::signal_density: return "signal_density";
  case MapKind::background_density: return "background_density";
  case MapKind::discernible_mask: return "discernible_mask";
  }
  return "?";
}

/// Scalar over the (theta, phi) cells of a signal grid; densities are per steradian.
struct AngularMap {
  int n_theta = 0, n_phi = 0;
  MapKind kind = MapKind::signal_density;
  std::vector<double> values;

  AngularMap() = default;
  AngularMap(int nt, int np, MapKind k) : n_theta(nt), n_phi(np), kind(k), values(std::size_t(nt) * np, 0.0) {}

  double d_theta() const { return std::numbers::pi / n_theta; }
  double d_phi() const { return 2 * std::numbers::pi / n_phi; }
  double theta(int j) const { return (j + 0.5) * d_theta(); }
  double phi(int k) const { return (k + 0.5) * d_phi(); }
  double& at(int j, int k) { return values[std::size_t(j) * n_phi + k]; }
  double at(int j, int k) const { return values[std::size_t(j) * n_phi + k]; }
  /// Exact solid angle of cell row j.
  double cell_solid_angle(int j) const {
    return (std::cos(j * d_theta()) - std::cos((j + 1) * d_theta())) * d_phi();
  }
  /// Integral over the sphere with exact cell solid angles.
  double integral() const {
    double s = 0;
    for (int j = 0; j < n_theta; ++j) {
      double row = 0;
      for (int k = 0; k < n_phi; ++k) row += at(j, k);
      s += row * cell_solid_angle(j);
    }
    return s;
  }
  bool same_grid(const AngularMap& o) const { return n_theta == o.n_theta && n_phi == o.n_phi; }
};

/// Cell with the largest value: (theta, phi) in degrees.
inline std::pair<double, double> argmax_direction(const AngularMap& m) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < m.values.size(); ++i)
    if (m.values[i] > m.values[best]) best = i;
  return {rad2deg(m.theta(int(best / m.n_phi))), rad2deg(m.phi(int(best % m.n_phi)))};
}

/// Prefactor C = e m^2 / (180 pi^2) with e = sqrt(4 pi alpha) and m in internal units.
inline double amplitude_prefactor(const UnitSystem& units) {
  const double e = std::sqrt(4 * std::numbers::pi * constants::alpha);
  const double m = units.electron_mass();
  return e * m * m / (180 * std::numbers::pi * std::numbers::pi);
}

// ---------------------------------------------------------------------------
// FFT amplitude accumulation

/// Padded transform shared by every accumulator in one run.
template <class T>
class FFTWorkspace {
public:
  FFTWorkspace(const Grid3& grid, int padding)
      : grid_(grid), padded_{grid.n[0] * padding, grid.n[1] * padding, grid.n[2] * padding}, fft_(padded_),
        real_(fft_.real_size(), T(0)), spec_(fft_.complex_size()) {
    if (padding < 1) throw ValidationError("padding must be at least 1");
    for (int a = 0; a < 3; ++a) dk_[a] = 2 * std::numbers::pi / (padded_[a] * grid.dx[a]);
  }

  const Grid3& grid() const { return grid_; }
  const std::array<int, 3>& padded() const { return padded_; }
  const std::array<double, 3>& dk() const { return dk_; }
  int nzh() const { return padded_[2] / 2 + 1; }
  std::size_t half_size() const { return fft_.complex_size(); }

  /// Transforms one density component zero-padded into the larger box.
  const std::vector<std::complex<T>>& transform(const std::vector<T>& v) {
    const auto& n = grid_.n;
    for (int i = 0; i < n[0]; ++i)
      for (int j = 0; j < n[1]; ++j) {
        const T* src = v.data() + grid_.index(i, j, 0);
        T* dst = real_.data() + (std::size_t(i) * padded_[1] + j) * padded_[2];
        std::copy(src, src + n[2], dst);
      }
    fft_.forward(real_.data(), spec_.data());
    return spec_;
  }

  /// Wave vector of half-spectrum bin (i, j, k).
  Vec3 wave_vector(int i, int j, int k) const {
    return {dk_[0] * fft_index(i, padded_[0]), dk_[1] * fft_index(j, padded_[1]), dk_[2] * k};
  }

private:
  Grid3 grid_;
  std::array<int, 3> padded_;
  std::array<double, 3> dk_{};
  RealFFT3<T> fft_;
  std::vector<T> real_;
  std::vector<std::complex<T>> spec_;
};

/// Accumulates A_E, A_B on every lattice node with |k| inside a shell, for both
/// k (stored half) and -k (through conjugation of the real-input transform).
template <class T>
class AmplitudeAccumulator {
public:
  AmplitudeAccumulator(FFTWorkspace<T>& ws, double kmin, double kmax) : ws_(&ws) {
    const auto& P = ws.padded();
    const auto& dk = ws.dk();
    const double margin = 2.0 * std::sqrt(dk[0] * dk[0] + dk[1] * dk[1] + dk[2] * dk[2]);
    const double lo = std::max(0.0, kmin - margin), hi = kmax + margin;
    for (int a = 0; a < 3; ++a)
      if (hi >= std::numbers::pi / ws.grid().dx[a])
        throw ValidationError("signal frequency range exceeds grid Nyquist");
    lookup_.assign(ws.half_size(), -1);
    for (int i = 0; i < P[0]; ++i)
      for (int j = 0; j < P[1]; ++j)
        for (int k = 0; k < ws.nzh(); ++k) {
          const Vec3 kv = ws.wave_vector(i, j, k);
          const double kk = kv.norm();
          if (kk < lo || kk > hi) continue;
          const std::size_t flat = (std::size_t(i) * P[1] + j) * ws.nzh() + k;
          lookup_[flat] = int(nodes_.size());
          nodes_.push_back(flat);
          knorm_.push_back(kk);
          kvec_.push_back(kv);
        }
    acc_.assign(nodes_.size() * 12, 0);
  }

  std::size_t node_count() const { return nodes_.size(); }

  /// Adds w e^{i|k|t} V^(k) for one time node. Step indices run 0..count-1 and
  /// drive the end-segment bookkeeping of the window check.
  void add_step(const EmissionDensities<T>& d, double t, double w, int step, int count) {
    const int seg = std::max(1, int(std::lround(0.1 * count)));
    if (step == count - seg) snapshot_ = acc_;
    for (int which = 0; which < 2; ++which)
      for (int c = 0; c < 3; ++c) {
        const auto& spec = ws_->transform(which == 0 ? d.VE[c] : d.VB[c]);
        const int slot = which * 3 + c;
        parallel_for(nodes_.size(), [&](std::size_t b, std::size_t e) {
          for (std::size_t n = b; n < e; ++n) {
            const std::complex<double> ph = std::polar(w, knorm_[n] * t);
            const std::complex<double> v(spec[nodes_[n]]);
            acc_[n * 12 + slot] += ph * v;
            acc_[n * 12 + 6 + slot] += ph * std::conj(v);
          }
        });
      }
    if (step == seg - 1) first_norm_ = norm(acc_);
    if (step == count - 1) {
      double d2 = 0;
      if (snapshot_.size() == acc_.size())
        for (std::size_t i = 0; i < acc_.size(); ++i) d2 += std::norm(acc_[i] - snapshot_[i]);
      last_norm_ = std::sqrt(d2);
      snapshot_.clear();
      snapshot_.shrink_to_fit();
    }
  }

  /// Amplitude share of the first and last 10% of the window.
  double window_residual() const {
    const double total = norm(acc_);
    return total > 0 ? (first_norm_ + last_norm_) / total : 0.0;
  }

  /// A_E and A_B (centered at the spatial origin) at an arbitrary wave vector,
  /// trilinear in the lattice.
  void amplitude_at(const Vec3& k, std::complex<double> AE[3], std::complex<double> AB[3]) const {
    const bool upper = k[2] >= 0;
    const Vec3 q = upper ? k : Vec3(-k);
    const auto& dk = ws_->dk();
    const auto& P = ws_->padded();
    double u[3];
    int i0[3];
    for (int a = 0; a < 3; ++a) {
      u[a] = q[a] / dk[a];
      i0[a] = int(std::floor(u[a]));
      u[a] -= i0[a];
    }
    for (int c = 0; c < 3; ++c) AE[c] = AB[c] = 0;
    const Vec3 origin(ws_->grid().origin[0], ws_->grid().origin[1], ws_->grid().origin[2]);
    const double dV = ws_->grid().cell_volume();
    for (int corner = 0; corner < 8; ++corner) {
      int idx[3];
      double wgt = 1;
      for (int a = 0; a < 3; ++a) {
        const int bit = (corner >> a) & 1;
        idx[a] = i0[a] + bit;
        wgt *= bit ? u[a] : 1 - u[a];
      }
      if (wgt == 0) continue;
      // Corners below the kz = 0 plane are read from the mirrored branch.
      bool mirrored = idx[2] < 0;
      int ii = idx[0], jj = idx[1], kk = idx[2];
      if (mirrored) {
        ii = -ii;
        jj = -jj;
        kk = -kk;
      }
      const int bi = ((ii % P[0]) + P[0]) % P[0], bj = ((jj % P[1]) + P[1]) % P[1];
      if (kk >= ws_->nzh()) throw ConvergenceError("interpolation left the stored spectrum");
      const std::size_t flat = (std::size_t(bi) * P[1] + bj) * ws_->nzh() + kk;
      const int slot = lookup_[flat];
      if (slot < 0) throw ConvergenceError("interpolation left the accumulated shell");
      // Branch at the stored node: + gives A(kv), - gives A(-kv).
      const bool use_minus = upper == mirrored;
      const Vec3& kv = kvec_[slot];
      const double phase = (use_minus ? 1.0 : -1.0) * kv.dot(origin);
      const std::complex<double> ph = std::polar(dV, phase);
      const std::size_t base = std::size_t(slot) * 12 + (use_minus ? 6 : 0);
      for (int c = 0; c < 3; ++c) {
        AE[c] += wgt * ph * acc_[base + c];
        AB[c] += wgt * ph * acc_[base + 3 + c];
      }
    }
  }

  /// Signal amplitude on the directional grid.
  SignalAmplitude finalize(const SignalGrid& g, double prefactor) const {
    SignalAmplitude out(g);
    const std::size_t nang = g.angular_size();
    parallel_for(
        g.size(),
        [&](std::size_t b, std::size_t e) {
          for (std::size_t n = b; n < e; ++n) {
            const int iw = int(n / nang);
            const int j = int((n % nang) / g.n_phi), kphi = int(n % g.n_phi);
            const PolarizationBasis pb = polarization_basis(g.theta(j), g.phi(kphi));
            const double w = g.omega(iw);
            std::complex<double> AE[3], AB[3];
            amplitude_at(w * pb.k, AE, AB);
            // e_p . (A_E + k^ x A_B)
            std::complex<double> V[3];
            for (int c = 0; c < 3; ++c) {
              const int c1 = (c + 1) % 3, c2 = (c + 2) % 3;
              V[c] = AE[c] + pb.k[c1] * AB[c2] - pb.k[c2] * AB[c1];
            }
            const std::complex<double> pre(0, prefactor * std::sqrt(w / 2));
            std::complex<double> s1 = 0, s2 = 0;
            for (int c = 0; c < 3; ++c) {
              s1 += pb.e1[c] * V[c];
              s2 += pb.e2[c] * V[c];
            }
            out.S[0][n] = pre * s1;
            out.S[1][n] = pre * s2;
          }
        },
        256);
    return out;
  }

private:
  static double norm(const std::vector<std::complex<double>>& v) {
    double s = 0;
    for (const auto& x : v) s += std::norm(x);
    return std::sqrt(s);
  }

  FFTWorkspace<T>* ws_;
  std::vector<int> lookup_;
  std::vector<std::size_t> nodes_;
  std::vector<double> knorm_;
  std::vector<Vec3> kvec_;
  // Per node: A_E+ (3), A_B+ (3), A_E- (3), A_B- (3).
  std::vector<std::complex<double>> acc_;
  std::vector<std::complex<double>> snapshot_;
  double first_norm_ = 0, last_norm_ = 0;
};

/// Time quadrature nodes: trapezoid over [t0, t1] with step no larger than dt.
struct TimeWindow {
  double t_min = 0, t_max = 0, dt = 1;

  int steps() const { return std::max(1, int(std::ceil((t_max - t_min) / dt - 1e-9))); }
  int count() const { return steps() + 1; }
  double step() const { return (t_max - t_min) / steps(); }
  double time(int i) const { return t_min + i * step(); }
  double weight(int i) const { return (i == 0 || i == steps() ? 0.5 : 1.0) * step(); }

  static TimeWindow from(const ScenarioConfig& cfg) {
    const UnitSystem u = cfg.unit_system();
    return {u.to_internal(cfg.t_min_fs(), units::femtosecond), u.to_internal(cfg.t_max_fs(), units::femtosecond),
            u.to_internal(cfg.dt_fs(), units::femtosecond)};
  }
};

struct AmplitudeRequest {
  bool total = true;
  std::vector<ChannelIndex> channels;
};

struct AmplitudeResult {
  std::optional<SignalAmplitude> total;
  std::vector<SignalAmplitude> channels;
  double window_residual = 0;                // of the total (or first channel)
  std::vector<std::string> warnings;
};

/// Runs the time loop once and fills every requested amplitude.
template <class T>
AmplitudeResult compute_amplitudes(FieldProvider<T>& fields, const TimeWindow& window, const SignalGrid& sg,
                                   int padding, double prefactor, const AmplitudeRequest& req,
                                   WindowCheck check = WindowCheck::error, const std::string& hash = "") {
  const Grid3& grid = fields.grid();
  FFTWorkspace<T> ws(grid, padding);
  std::vector<AmplitudeAccumulator<T>> accs;
  if (req.total) accs.emplace_back(ws, sg.omega_min, sg.omega_max);
  for (std::size_t c = 0; c < req.channels.size(); ++c) accs.emplace_back(ws, sg.omega_min, sg.omega_max);

  const bool need_pulses = !req.channels.empty();
  FieldSample<T> total(grid);
  std::vector<FieldSample<T>> per;
  std::vector<const FieldSample<T>*> ptrs;
  if (need_pulses) {
    per.assign(fields.pulse_count(), FieldSample<T>(grid));
    for (auto& f : per) ptrs.push_back(&f);
  }
  EmissionDensities<T> dens;
  const int count = window.count();
  for (int s = 0; s < count; ++s) {
    const double t = window.time(s), w = window.weight(s);
    std::size_t a = 0;
    if (need_pulses) {
      for (std::size_t p = 0; p < per.size(); ++p) fields.pulse_fields(p, t, per[p]);
      if (req.total) {
        total.zero();
        for (const auto& f : per) total += f;
      }
    } else {
      fields.total_fields(t, total);
    }
    if (req.total) {
      emission_densities(total, dens);
      accs[a++].add_step(dens, t, w, s, count);
    }
    for (const auto& ch : req.channels) {
      channel_densities(ptrs, ch, dens);
      accs[a++].add_step(dens, t, w, s, count);
    }
  }

  AmplitudeResult res;
  std::size_t a = 0;
  if (!accs.empty()) res.window_residual = accs.front().window_residual();
  if (check != WindowCheck::off && res.window_residual > 1e-3) {
    std::ostringstream os;
    os << "time window not converged: end segments carry " << res.window_residual * 100
       << "% of the amplitude (limit 0.1%)";
    if (check == WindowCheck::error) throw ConvergenceError(os.str());
    res.warnings.push_back(os.str());
  }
  if (req.total) {
    res.total = accs[a++].finalize(sg, prefactor);
    res.total->scenario_hash = hash;
  }
  for (const auto& ch : req.channels) {
    res.channels.push_back(accs[a++].finalize(sg, prefactor));
    res.channels.back().channel = ch.name();
    res.channels.back().scenario_hash = hash;
  }
  return res;
}

// ---------------------------------------------------------------------------
// Observables

/// d^3N per node: sum_p |S_p|^2 w^2 sin(theta) dw dtheta dphi / (2 pi)^3, with
/// trapezoid weights in omega and midpoint cells in angle.
inline std::vector<double> photon_spectrum(const SignalAmplitude& s) {
  const SignalGrid& g = s.grid;
  std::vector<double> out(g.size());
  const double norm = 1.0 / std::pow(2 * std::numbers::pi, 3);
  for (int i = 0; i < g.n_omega; ++i) {
    const double w = g.omega(i);
    for (int j = 0; j < g.n_theta; ++j) {
      const double dOmega = (std::cos(j * g.d_theta()) - std::cos((j + 1) * g.d_theta())) * g.d_phi();
      for (int k = 0; k < g.n_phi; ++k) {
        const std::size_t n = g.index(i, j, k);
        out[n] = (std::norm(s.S[0][n]) + std::norm(s.S[1][n])) * w * w * g.omega_weight(i) * dOmega * norm;
      }
    }
  }
  return out;
}

inline double total_photons(const SignalAmplitude& s) {
  const auto d = photon_spectrum(s);
  double n = 0;
  for (double x : d) n += x;
  return n;
}

/// dN/dw summed over directions, per omega node.
inline std::vector<double> omega_marginal(const SignalAmplitude& s) {
  const auto d = photon_spectrum(s);
  const SignalGrid& g = s.grid;
  std::vector<double> out(g.n_omega, 0.0);
  for (int i = 0; i < g.n_omega; ++i) {
    for (std::size_t a = 0; a < g.angular_size(); ++a) out[i] += d[i * g.angular_size() + a];
    out[i] /= g.omega_weight(i);
  }
  return out;
}

/// d^2N/dOmega = int dw w^2 / (2 pi)^3 sum_p |S_p|^2. When check_support is set, a
/// map whose two boundary frequencies carry more than 1% of the total is rejected.
inline AngularMap angular_density(const SignalAmplitude& s, bool check_support = true) {
  const SignalGrid& g = s.grid;
  AngularMap m(g.n_theta, g.n_phi, MapKind::signal_density);
  const double norm = 1.0 / std::pow(2 * std::numbers::pi, 3);
  double edge = 0, all = 0;
  for (int i = 0; i < g.n_omega; ++i) {
    const double w = g.omega(i);
    const double f = w * w * g.omega_weight(i) * norm;
    double slice = 0;
    for (std::size_t a = 0; a < g.angular_size(); ++a) {
      const std::size_t n = i * g.angular_size() + a;
      const double v = f * (std::norm(s.S[0][n]) + std::norm(s.S[1][n]));
      m.values[a] += v;
      slice += v * m.cell_solid_angle(int(a / g.n_phi));
    }
    all += slice;
    if (i == 0 || i == g.n_omega - 1) edge += slice;
  }
  if (check_support && all > 0 && edge > 0.01 * all)
    throw ConvergenceError("signal support clipped by the frequency range: boundary bins carry " +
                           std::to_string(100 * edge / all) + "% of the integral");
  return m;
}

/// Mask of cells where signal exceeds background, and the signal integrated over it.
struct Discernibility {
  AngularMap mask;
  double n_disc = 0;
};

inline Discernibility discernibility(const AngularMap& signal, const AngularMap& background) {
  if (!signal.same_grid(background)) throw ValidationError("signal and background maps use different grids");
  Discernibility d;
  d.mask = AngularMap(signal.n_theta, signal.n_phi, MapKind::discernible_mask);
  for (int j = 0; j < signal.n_theta; ++j) {
    const double dO = signal.cell_solid_angle(j);
    for (int k = 0; k < signal.n_phi; ++k) {
      if (signal.at(j, k) > background.at(j, k)) {
        d.mask.at(j, k) = 1;
        d.n_disc += signal.at(j, k) * dO;
      }
    }
  }
  return d;
}

/// Integral of a density over a detector box. Cells are constant-valued; cells cut
/// by the box edge contribute their exact overlapping solid angle.
inline double detector_count(const AngularMap& m, const DetectorRegion& r) {
  const double t0 = deg2rad(r.theta - r.half_theta), t1 = deg2rad(r.theta + r.half_theta);
  if (t0 < -1e-12 || t1 > std::numbers::pi + 1e-12 || !(r.half_theta > 0) || !(r.half_phi > 0))
    throw ValidationError("detector region '" + r.name + "' lies outside the angular grid");
  const double p0 = deg2rad(r.phi - r.half_phi), p1 = deg2rad(r.phi + r.half_phi);
  const double two_pi = 2 * std::numbers::pi;
  std::vector<double> wphi(m.n_phi, 0.0);
  for (int k = 0; k < m.n_phi; ++k) {
    const double a = k * m.d_phi(), b = (k + 1) * m.d_phi();
    for (int shift = -1; shift <= 1; ++shift) {
      const double lo = std::max(a, p0 + shift * two_pi), hi = std::min(b, p1 + shift * two_pi);
      if (hi > lo) wphi[k] += hi - lo;
    }
  }
  double total = 0;
  for (int j = 0; j < m.n_theta; ++j) {
    const double a = std::max(j * m.d_theta(), t0), b = std::min((j + 1) * m.d_theta(), t1);
    if (b <= a) continue;
    const double wt = std::cos(a) - std::cos(b);
    for (int k = 0; k < m.n_phi; ++k)
      if (wphi[k] > 0) total += m.at(j, k) * wt * wphi[k];
  }
  return total;
}

} // namespace vacsim
