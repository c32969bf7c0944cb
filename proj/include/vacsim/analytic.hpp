#pragma once

// Plane-wave estimates: four-wave-mixing kinematics and the polarization factor of
// the back-reflected amplitude in the planar three-beam geometry (two
// counter-propagating pump beams, probe at collision angle theta_c).

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "vacsim/error.hpp"
#include "vacsim/geometry.hpp"
#include "vacsim/units.hpp"

namespace vacsim {

// ---------------------------------------------------------------------------
// Mixing kinematics

struct MixingTerm {
  int sign = +1; // +1 absorbs a photon of the pulse, -1 emits one
  int pulse = 0;
};

struct MixingCombination {
  std::vector<MixingTerm> terms;

  std::string name() const {
    std::string s;
    for (const auto& t : terms) s += (t.sign > 0 ? "+" : "-") + std::to_string(t.pulse + 1);
    return s;
  }
};

/// One pulse as seen by the kinematics: unit propagation direction and frequency.
struct Beam {
  Vec3 direction = Vec3::UnitZ();
  double omega = 1;
};

struct MixingResult {
  double theta_deg = 0, phi_deg = 0;
  double k_norm = 0;    // |k_signal|
  double omega = 0;     // signed frequency sum
  double mismatch = 0;  // | |k| - omega |
  bool on_shell(double tol = 1e-9) const { return mismatch <= tol * std::max(1.0, std::abs(omega)); }
};

/// k_signal = sum of signed wave vectors; a mismatch with the frequency sum is
/// reported rather than thrown.
inline MixingResult mixing_direction(const MixingCombination& c, const std::vector<Beam>& beams) {
  if (c.terms.size() != 3) throw ValidationError("a mixing combination has three terms");
  Vec3 k = Vec3::Zero();
  double w = 0;
  for (const auto& t : c.terms) {
    if (t.pulse < 0 || t.pulse >= int(beams.size())) throw ValidationError("mixing term refers to a missing pulse");
    const Beam& b = beams[t.pulse];
    k += t.sign * b.omega * b.direction.normalized();
    w += t.sign * b.omega;
  }
  MixingResult r;
  r.k_norm = k.norm();
  r.omega = w;
  r.mismatch = std::abs(r.k_norm - w);
  if (r.k_norm > 0) {
    const auto a = to_angles(k);
    r.theta_deg = rad2deg(a.theta);
    r.phi_deg = rad2deg(a.phi);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Polarization factor

/// P(beta_1, beta_2, beta_probe, theta_c), all angles in degrees.
inline double polarization_prefactor(double b1_deg, double b2_deg, double bp_deg, double thc_deg) {
  const double b1 = deg2rad(b1_deg), b2 = deg2rad(b2_deg), bp = deg2rad(bp_deg), th = deg2rad(thc_deg);
  using std::cos;
  using std::sin;
  const double c2 = cos(2 * th), c4 = cos(4 * th);
  const double sum_plus = cos(2 * (b1 + bp)) + cos(2 * (b2 + bp));
  const double s = sin(th);
  return -2838 * sum_plus + 4 * (484 * cos(2 * (b1 - bp)) + 973) * c2 + 5808 * cos(2 * (b1 - bp)) +
         1936 * cos(2 * (b2 - bp)) * (c2 + 3) - 1056 * cos(2 * (b1 + b2)) * (c2 + 7) - 66 * sum_plus * (20 * c2 + c4) +
         968 * cos(2 * (b1 - b2)) * s * s * s * s -
         176 * sin(b1 - b2) *
             (88 * sin(b1 + b2 - 2 * bp) * cos(th) + 3 * sin(b1 + b2 + 2 * bp) * (15 * cos(th) + cos(3 * th))) +
         139 * c4 + 13761;
}

struct PrefactorOptimum {
  double beta1 = 0, beta2 = 0; // degrees in [0, 180)
  double value = 0;
};

namespace analytic_detail {

inline double wrap180(double a) {
  a = std::fmod(a, 180.0);
  return a < 0 ? a + 180.0 : a;
}

// Nelder-Mead on a 2D function; enough for polishing a grid maximum.
template <class F>
std::pair<double, double> polish(F&& f, double x, double y, double step) {
  std::array<std::array<double, 2>, 3> p{{{x, y}, {x + step, y}, {x, y + step}}};
  std::array<double, 3> v{};
  for (int i = 0; i < 3; ++i) v[i] = -f(p[i][0], p[i][1]);
  for (int it = 0; it < 400; ++it) {
    std::array<int, 3> o{0, 1, 2};
    std::sort(o.begin(), o.end(), [&](int a, int b) { return v[a] < v[b]; });
    const auto best = p[o[0]], mid = p[o[1]], worst = p[o[2]];
    const double vb = v[o[0]], vm = v[o[1]], vw = v[o[2]];
    if (std::abs(vw - vb) <= 1e-13 * (1 + std::abs(vb)) &&
        std::hypot(worst[0] - best[0], worst[1] - best[1]) < 1e-9)
      break;
    const std::array<double, 2> c{(best[0] + mid[0]) / 2, (best[1] + mid[1]) / 2};
    auto at = [&](double t) { return std::array<double, 2>{c[0] + t * (worst[0] - c[0]), c[1] + t * (worst[1] - c[1])}; };
    const auto r = at(-1);
    const double vr = -f(r[0], r[1]);
    if (vr < vb) {
      const auto e = at(-2);
      const double ve = -f(e[0], e[1]);
      if (ve < vr) p[o[2]] = e, v[o[2]] = ve;
      else p[o[2]] = r, v[o[2]] = vr;
    } else if (vr < vm) {
      p[o[2]] = r, v[o[2]] = vr;
    } else {
      const auto k = at(vr < vw ? -0.5 : 0.5);
      const double vk = -f(k[0], k[1]);
      if (vk < std::min(vr, vw)) {
        p[o[2]] = k, v[o[2]] = vk;
      } else {
        for (int i : {o[1], o[2]}) {
          p[i] = {(p[i][0] + best[0]) / 2, (p[i][1] + best[1]) / 2};
          v[i] = -f(p[i][0], p[i][1]);
        }
      }
    }
  }
  int b = int(std::min_element(v.begin(), v.end()) - v.begin());
  return {p[b][0], p[b][1]};
}

} // namespace analytic_detail

/// Maximizers of P over (beta_1, beta_2) in [0, 180)^2 for fixed beta_probe and
/// theta_c: 0.5 degree grid search, then local refinement of every grid maximum
/// within a relative tolerance of the best. Ties are returned sorted.
inline std::vector<PrefactorOptimum> prefactor_optimum(double bp_deg, double thc_deg, double step_deg = 0.5,
                                                      double tie_tol = 1e-9) {
  const int n = int(std::lround(180.0 / step_deg));
  std::vector<double> grid(std::size_t(n) * n);
  auto P = [&](double a, double b) { return polarization_prefactor(a, b, bp_deg, thc_deg); };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) grid[std::size_t(i) * n + j] = P(i * step_deg, j * step_deg);
  // periodic local maxima of the grid
  std::vector<PrefactorOptimum> cand;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double v = grid[std::size_t(i) * n + j];
      bool peak = true;
      for (int di = -1; di <= 1 && peak; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          if (!di && !dj) continue;
          const int a = (i + di + n) % n, b = (j + dj + n) % n;
          const double w = grid[std::size_t(a) * n + b];
          if (w > v || (w == v && (a < i || (a == i && b < j)))) {
            peak = false;
            break;
          }
        }
      if (peak) cand.push_back({i * step_deg, j * step_deg, v});
    }
  double best = -1e300;
  for (auto& c : cand) {
    const auto [x, y] = analytic_detail::polish(P, c.beta1, c.beta2, step_deg);
    c.beta1 = analytic_detail::wrap180(x);
    c.beta2 = analytic_detail::wrap180(y);
    c.value = P(c.beta1, c.beta2);
    best = std::max(best, c.value);
  }
  std::vector<PrefactorOptimum> out;
  for (const auto& c : cand) {
    if (c.value < best - tie_tol * std::abs(best) - 1e-9) continue;
    bool dup = false;
    for (const auto& o : out) {
      const double d1 = std::abs(o.beta1 - c.beta1), d2 = std::abs(o.beta2 - c.beta2);
      if (std::min(d1, 180 - d1) < 1e-4 && std::min(d2, 180 - d2) < 1e-4) dup = true;
    }
    if (!dup) out.push_back(c);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.beta1 != b.beta1 ? a.beta1 < b.beta1 : a.beta2 < b.beta2;
  });
  return out;
}

/// P on a (beta_1, beta_2) grid with the given step, row index beta_1.
struct PrefactorGrid {
  double step = 1;
  int n = 0;
  std::vector<double> values; // raw P
  double max_value = 0;

  double at(int i, int j) const { return values[std::size_t(i) * n + j]; }
};

inline PrefactorGrid prefactor_grid(double bp_deg, double thc_deg, double step_deg) {
  if (!(step_deg > 0) || step_deg > 90) throw ValidationError("prefactor grid step must lie in (0, 90]");
  PrefactorGrid g;
  g.step = step_deg;
  g.n = int(std::lround(180.0 / step_deg)) + 1;
  g.values.resize(std::size_t(g.n) * g.n);
  g.max_value = -1e300;
  for (int i = 0; i < g.n; ++i)
    for (int j = 0; j < g.n; ++j) {
      const double v = polarization_prefactor(i * step_deg, j * step_deg, bp_deg, thc_deg);
      g.values[std::size_t(i) * g.n + j] = v;
      g.max_value = std::max(g.max_value, v);
    }
  return g;
}

/// Probe polarizations shown side by side when normalizing P.
inline std::vector<double> default_probe_panels() { return {0, 30, 60, 90, 120, 150}; }

/// Largest P over continuous (beta_1, beta_2) and the listed probe polarizations.
inline double prefactor_normalization(double thc_deg, const std::vector<double>& probe_panels = default_probe_panels()) {
  double best = -1e300;
  for (double bp : probe_panels)
    for (const auto& o : prefactor_optimum(bp, thc_deg)) best = std::max(best, o.value);
  return best;
}

} // namespace vacsim
