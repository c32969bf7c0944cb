// Acceptance gate. Each criterion prints one line:
//   C<n> PASS|FAIL  <measured values against their gates>  (<seconds> s)
// Usage: vacsim_acceptance [C1 ... C12 | all]. Exit status is nonzero if any
// selected criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "vacsim/analytic.hpp"
#include "vacsim/background.hpp"
#include "vacsim/emission.hpp"
#include "vacsim/maxwell.hpp"
#include "vacsim/optimizer.hpp"
#include "vacsim/providers.hpp"
#include "vacsim/scenario_io.hpp"
#include "vacsim/simulation.hpp"

#ifndef VACSIM_SCENARIO_DIR
#define VACSIM_SCENARIO_DIR "scenarios"
#endif

using namespace vacsim;

namespace {

const UnitSystem kUnits(800e-9);
constexpr double kTwoPi = 2 * std::numbers::pi;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  // Records a gated quantity; the line shows every value and its gate.
  void gate(const std::string& what, bool ok, const std::string& shown) {
    pass = pass && ok;
    if (detail.tellp() > 0) detail << "; ";
    detail << what << ' ' << shown << (ok ? "" : " [miss]");
  }
  void note(const std::string& text) {
    if (detail.tellp() > 0) detail << "; ";
    detail << text;
  }
};

std::string num(double x, int prec = 4) {
  std::ostringstream os;
  os.precision(prec);
  os << x;
  return os.str();
}

void below(Outcome& o, const std::string& what, double v, double limit) {
  o.gate(what, v < limit, num(v) + " < " + num(limit));
}

void within_rel(Outcome& o, const std::string& what, double v, double target, double rel) {
  o.gate(what, std::abs(v / target - 1) <= rel, num(v, 6) + " vs " + num(target, 6) + " +-" + num(100 * rel) + "%");
}

void within_factor(Outcome& o, const std::string& what, double v, double target, double factor) {
  const bool ok = v > 0 && v <= target * factor && v >= target / factor;
  o.gate(what, ok, num(v) + " vs " + num(target) + " (x" + num(factor) + ")");
}

ScenarioConfig scenario(const std::string& file) { return load_scenario(std::string(VACSIM_SCENARIO_DIR) + "/" + file); }

PulseSpec gaussian_spec(double energy = 20) {
  PulseSpec p;
  p.kind = PulseKind::gaussian;
  p.energy = energy;
  p.waist = 2;
  p.duration = 20;
  p.theta = 90;
  p.phi = 0;
  return p;
}

PulseSpec dipole_spec(PulseKind kind, double theta = 0, double phi = 0) {
  PulseSpec p;
  p.kind = kind;
  p.energy = 40;
  p.duration = 20;
  p.dipole_theta = theta;
  p.dipole_phi = phi;
  return p;
}

double wrap_phi_gap(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 360.0);
  return std::min(d, 360 - d);
}

struct Peak {
  double theta = 0, phi = 0, value = 0;
};

/// Largest cell of a map within radius_deg (box) of a direction, in degrees.
Peak local_peak(const AngularMap& m, double th0, double ph0, double radius_deg) {
  Peak p;
  p.value = -1;
  for (int j = 0; j < m.n_theta; ++j)
    for (int k = 0; k < m.n_phi; ++k) {
      const double th = rad2deg(m.theta(j)), ph = rad2deg(m.phi(k));
      if (std::abs(th - th0) > radius_deg || wrap_phi_gap(ph, ph0) > radius_deg) continue;
      if (m.at(j, k) > p.value) p = {th, ph, m.at(j, k)};
    }
  return p;
}

/// Photons per omega node from cells whose centers lie in the region.
std::vector<double> detector_spectrum(const SignalAmplitude& s, const DetectorRegion& r) {
  const auto d = photon_spectrum(s);
  const SignalGrid& g = s.grid;
  std::vector<double> out(std::size_t(g.n_omega), 0.0);
  for (int i = 0; i < g.n_omega; ++i)
    for (int j = 0; j < g.n_theta; ++j)
      for (int k = 0; k < g.n_phi; ++k) {
        const double th = rad2deg(g.theta(j)), ph = rad2deg(g.phi(k));
        if (std::abs(th - r.theta) > r.half_theta || wrap_phi_gap(ph, r.phi) > r.half_phi) continue;
        out[std::size_t(i)] += d[g.index(i, j, k)];
      }
  return out;
}

double relative_l2(const SignalAmplitude& a, const SignalAmplitude& b) {
  double num = 0, den = 0;
  for (int p = 0; p < 2; ++p)
    for (std::size_t i = 0; i < a.S[p].size(); ++i) {
      num += std::norm(a.S[p][i] - b.S[p][i]);
      den += std::norm(b.S[p][i]);
    }
  return std::sqrt(num / den);
}

SignalGrid mini_signal_grid() {
  SignalGrid sg;
  sg.n_omega = 5;
  sg.n_theta = 8;
  sg.n_phi = 16;
  sg.omega_min = 0.6;
  sg.omega_max = 1.4;
  return sg;
}

PulseModel mini_gaussian(double phi, double beta) {
  PulseSpec p;
  p.kind = PulseKind::gaussian;
  p.energy = 1;
  p.duration = 3;
  p.waist = 1;
  p.theta = 90;
  p.phi = phi;
  p.beta = beta;
  return make_pulse_model(p, kUnits);
}

// ---------------------------------------------------------------------------

Outcome c1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  PulseSpec plane;
  plane.kind = PulseKind::plane_wave;
  plane.peak_intensity = 1e22;
  plane.theta = 40;
  plane.phi = 80;
  plane.beta = 25;
  const std::vector<std::pair<std::string, PulseSpec>> exact = {
      {"plane", plane},
      {"e-dipole", dipole_spec(PulseKind::dipole_e, 63, 17)},
      {"b-dipole", dipole_spec(PulseKind::dipole_b, 63, 17)}};
  std::uint64_t seed = 11;
  for (const auto& [name, spec] : exact) {
    const auto m = make_pulse_model(spec, kUnits);
    const double R = spec.kind == PulseKind::plane_wave ? 10 : 2 * kTwoPi;
    const auto r = oracle::random_maxwell_residual(m, 100, R, m.tau, seed++);
    below(o, name + " residual", r.worst(), 1e-6);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  below(o, "runtime s", secs, 30);
  // informational: the paraxial beam is an approximate solution
  const auto g = make_pulse_model(gaussian_spec(), kUnits);
  const auto rg = oracle::random_maxwell_residual(g, 100, g.w0, g.tau / 2, 5);
  o.note("paraxial gaussian residual " + num(rg.worst()) + " (not gated)");
  return o;
}

Outcome c2() {
  Outcome o;
  {
    PulseSpec p;
    p.kind = PulseKind::plane_wave;
    p.peak_intensity = 1e22;
    p.duration = 0;
    p.theta = 90;
    const Grid3 g = Grid3::centered({2 * kTwoPi, 2 * kTwoPi, 2 * kTwoPi}, {16, 16, 16});
    const auto s0 = init_from_focus<double>({make_pulse_model(p, kUnits)}, g);
    const auto s1 = propagate(s0, kTwoPi);
    double num2 = 0, den = 0;
    for (int c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < s0.size(); ++i) {
        num2 += std::norm(s1.E[c][i] - s0.E[c][i]) + std::norm(s1.B[c][i] - s0.B[c][i]);
        den += std::norm(s0.E[c][i]) + std::norm(s0.B[c][i]);
      }
    below(o, "period return", std::sqrt(num2 / den), 1e-10);
  }
  {
    PulseSpec p;
    p.kind = PulseKind::gaussian;
    p.energy = 1;
    p.duration = 4;
    p.waist = 1.5;
    p.theta = 40;
    p.phi = 70;
    const Grid3 g = Grid3::centered({4 * kTwoPi, 4 * kTwoPi, 4 * kTwoPi}, {24, 24, 24});
    auto s = init_from_focus<double>({make_pulse_model(p, kUnits)}, g);
    const double e0 = spectral_energy(s);
    for (int i = 0; i < 1000; ++i) s = propagate(s, 0.37);
    below(o, "energy drift (1000 steps)", std::abs(spectral_energy(s) / e0 - 1), 1e-12);
    below(o, "transversality", transversality_residual(s), 1e-12);
  }
  return o;
}

Outcome c3() {
  Outcome o;
  {
    PulseSpec p;
    p.kind = PulseKind::plane_wave;
    p.peak_intensity = 1e22;
    p.theta = 50;
    p.phi = 30;
    p.beta = 40;
    const auto m = make_pulse_model(p, kUnits);
    const Grid3 g = Grid3::centered({3 * kTwoPi, 3 * kTwoPi, 3 * kTwoPi}, {24, 24, 24});
    double worst = 0;
    for (double t : {-20.0, -3.0, 0.0, 5.0}) {
      const auto f = sample_pulse<double>(m, t, g);
      EmissionDensities<double> d;
      emission_densities(f, d);
      for (int c = 0; c < 3; ++c)
        for (std::size_t i = 0; i < f.size(); ++i)
          worst = std::max({worst, std::abs(d.VE[c][i]), std::abs(d.VB[c][i])});
    }
    // scale: the size of either term for a field of this amplitude
    const double scale = 4 * m.amplitude * m.amplitude * m.amplitude;
    below(o, "plane-wave integrand / |E|^3", worst / scale, 1e-12);
  }
  {
    // Single probe through the spectral solver at desk resolution.
    ScenarioConfig cfg;
    cfg.pulses.push_back(gaussian_spec());
    cfg.grid.field_source = FieldSource::maxwell;
    cfg.grid.extent = {46, 13, 13};
    cfg.grid.points = {184, 52, 52};
    cfg.signal.n_omega = 32;
    cfg.signal.omega_min = 0.5;
    cfg.signal.omega_max = 1.5;
    cfg.signal.angular_resolution = 3;
    cfg.signal.window_check = WindowCheck::warn;
    SimulationRequest req;
    req.check_support = false;
    const auto r = simulate(cfg, req);
    below(o, "single gaussian N_tot", r.n_tot, 1e-3);
  }
  return o;
}

Outcome c4() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const Grid3 g = Grid3::centered({3 * kTwoPi, 3 * kTwoPi, 3 * kTwoPi}, {16, 16, 16});
  AnalyticProvider<double> prov({mini_gaussian(0, 20), mini_gaussian(135, 70)}, g);
  const TimeWindow w{-8, 8, 0.5};
  AmplitudeRequest req;
  req.channels = enumerate_channels(2);
  const auto r = compute_amplitudes(prov, w, mini_signal_grid(), 2, 1.0, req, WindowCheck::off);
  SignalAmplitude sum(r.total->grid);
  for (const auto& ch : r.channels)
    for (int p = 0; p < 2; ++p)
      for (std::size_t i = 0; i < sum.S[p].size(); ++i) sum.S[p][i] += ch.S[p][i];
  o.note(std::to_string(w.steps()) + " steps on 16^3");
  below(o, "channel-sum residual", relative_l2(sum, *r.total), 1e-10);
  below(o, "runtime s", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 120);
  return o;
}

Outcome c5() {
  Outcome o;
  const Grid3 g = Grid3::centered({2.0, 2.0, 2.0}, {8, 8, 8});
  fixture::NoiseProvider prov(g, 99);
  const TimeWindow w{-1.0, 1.0, 0.25}; // 8 steps
  FFTWorkspace<double> ws(g, 1);
  AmplitudeAccumulator<double> acc(ws, 0.5, 1.0);
  FieldSample<double> f(g);
  EmissionDensities<double> d;
  std::vector<double> times, weights;
  std::vector<EmissionDensities<double>> history;
  for (int s = 0; s < w.count(); ++s) {
    prov.total_fields(w.time(s), f);
    emission_densities(f, d);
    acc.add_step(d, w.time(s), w.weight(s), s, w.count());
    times.push_back(w.time(s));
    weights.push_back(w.weight(s));
    history.push_back(d);
  }
  const auto dk = ws.dk();
  double worst = 0, peak = 0;
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b)
      for (int c = -2; c <= 2; ++c) {
        const Vec3 k(dk[0] * a, dk[1] * b, dk[2] * c);
        std::complex<double> AE[3], AB[3];
        acc.amplitude_at(k, AE, AB);
        for (int q = 0; q < 3; ++q) {
          const auto refE =
              oracle::direct_sum(g, times, weights, [&](std::size_t x, int it) { return history[it].VE[q][x]; }, k);
          const auto refB =
              oracle::direct_sum(g, times, weights, [&](std::size_t x, int it) { return history[it].VB[q][x]; }, k);
          worst = std::max({worst, std::abs(AE[q] - refE), std::abs(AB[q] - refB)});
          peak = std::max({peak, std::abs(refE), std::abs(refB)});
        }
      }
  below(o, "FFT vs direct 4D sum (8^3 x 8, 125 k)", worst / peak, 1e-10);
  return o;
}

Outcome c6() {
  Outcome o;
  const Grid3 g = Grid3::centered({3 * kTwoPi, 3 * kTwoPi, 3 * kTwoPi}, {16, 16, 16});
  auto run = [&](double a1, double a2) {
    auto m1 = mini_gaussian(0, 0), m2 = mini_gaussian(180, 0);
    m1.amplitude *= a1;
    m2.amplitude *= a2;
    AnalyticProvider<double> prov({m1, m2}, g);
    AmplitudeRequest req;
    req.total = false;
    req.channels = enumerate_channels(2);
    const auto r =
        compute_amplitudes(prov, TimeWindow{-6, 6, 0.5}, mini_signal_grid(), 1, 1.0, req, WindowCheck::off);
    std::vector<double> n;
    for (const auto& ch : r.channels) n.push_back(total_photons(ch));
    return n;
  };
  const auto base = run(1, 1), s1 = run(1.7, 1), s2 = run(1, 0.6);
  const auto chs = enumerate_channels(2);
  const double biggest = *std::max_element(base.begin(), base.end());
  double worst = 0, probe_power = 0, pump_power = 0;
  int measured = 0;
  for (std::size_t c = 0; c < chs.size(); ++c) {
    if (base[c] < 1e-12 * biggest) continue; // self channels of a paraxial beam vanish
    ++measured;
    const double e1 = std::log(s1[c] / base[c]) / std::log(1.7 * 1.7);
    const double e2 = std::log(s2[c] / base[c]) / std::log(0.6 * 0.6);
    worst = std::max({worst, std::abs(e1 - chs[c].count(0)), std::abs(e2 - chs[c].count(1))});
    if (chs[c].count(0) == 1 && chs[c].count(1) == 2) {
      probe_power = e1;
      pump_power = e2;
    }
  }
  o.gate("channels measured", measured == 2, std::to_string(measured) + " == 2");
  below(o, "exponent error", worst, 1e-6);
  // photons in the probe-linear channel at fixed total energy: W_p^e1 (W0 - W_p)^e2
  const double share = probe_power > 0 && pump_power > 0 ? optimal_energy_share(probe_power, pump_power) : -1;
  o.gate("optimal W_probe/W0", std::abs(share - 1.0 / 3) <= 0.01, num(share, 6) + " vs 1/3 +-0.01");
  return o;
}

Outcome c7() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const double n45 = prefactor_normalization(45), n60 = prefactor_normalization(60);
  o.gate("norm(45)", std::abs(n45 - 38072) <= 1, num(n45, 8) + " vs 38072 +-1");
  o.gate("norm(60)", std::abs(n60 - 32329) <= 1, num(n60, 8) + " vs 32329 +-1");
  // The exact optimum drifts a few degrees off the stated structure, so the gate
  // takes the structure to within 5 deg (beta1) and 3 deg (sum) and asks that the
  // structural point itself reach 99% of the optimum.
  int bad = 0, checked = 0;
  double worst_b1 = 0, worst_sum = 0, worst_ratio = 1;
  for (double thc : {45.0, 60.0})
    for (double bp : {0.0, 20.0, 45.0, 70.0, 110.0, 135.0, 160.0}) {
      ++checked;
      const int n = bp < 90 ? 0 : 1;
      const auto opts = prefactor_optimum(bp, thc);
      double best_b1 = 1e9, best_sum = 1e9;
      for (const auto& opt : opts) {
        const double g1 = angle_distance180(opt.beta1, bp);
        if (g1 >= best_b1) continue;
        best_b1 = g1;
        best_sum = std::abs(opt.beta1 + opt.beta2 - (90 + 180 * n)); // both angles in [0, 180)
      }
      const double ratio = polarization_prefactor(bp, 90 + 180 * n - bp, bp, thc) / opts.front().value;
      worst_b1 = std::max(worst_b1, best_b1);
      worst_sum = std::max(worst_sum, best_sum);
      worst_ratio = std::min(worst_ratio, ratio);
      bad += !(best_b1 <= 5 && best_sum <= 3 && ratio >= 0.99);
    }
  o.gate("optimum structure", bad == 0,
         std::to_string(checked - bad) + "/" + std::to_string(checked) + " probe angles; |b1-bp| " + num(worst_b1) +
             " <= 5, |b1+b2-90-180n| " + num(worst_sum) + " <= 3, P(structure)/P* " + num(worst_ratio) + " >= 0.99");
  below(o, "runtime s", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(), 10);
  return o;
}

Outcome c8() {
  Outcome o;
  const auto cfg = scenario("belt.json");
  const auto r = simulate(cfg);
  const double bin = cfg.signal.angular_resolution;
  struct Spot {
    const char* region;
    double th, ph;
  };
  for (const Spot s : {Spot{"back", 135, 180}, Spot{"forward-angle", 45, 180}}) {
    const Peak p = local_peak(*r.signal_map, s.th, s.ph, 8);
    const bool near = std::abs(p.theta - s.th) <= bin && wrap_phi_gap(p.phi, s.ph) <= bin;
    o.gate(std::string(s.region) + " peak", near,
           "(" + num(p.theta) + ", " + num(p.phi) + ") within " + num(bin) + " deg");
    const auto& m = r.discernible->mask;
    const int j = int(deg2rad(p.theta) / m.d_theta()), k = int(deg2rad(p.phi) / m.d_phi());
    o.gate(std::string(s.region) + " discernible", m.at(j, k) > 0, m.at(j, k) > 0 ? "yes" : "no");
  }
  const double nb = r.detector("back")->n_det, nf = r.detector("forward-angle")->n_det,
               na = r.detector("back-angle")->n_det;
  o.gate("ranking back > forward-angle > back-angle", nb > nf && nf > na,
         num(nb) + " > " + num(nf) + " > " + num(na));
  below(o, "back-angle / back", na / nb, 0.01);
  return o;
}

Outcome c9() {
  Outcome o;
  const auto base = scenario("three_pulse.json");
  const DetectorRegion back = base.detectors.at(0);
  std::vector<double> ndet;
  SimulationResult finest;
  for (int ppl : {4, 5, 6}) {
    ScenarioConfig cfg = base;
    for (int a = 0; a < 3; ++a) cfg.grid.points[a] = int(std::lround(cfg.grid.extent[a] * ppl));
    cfg.outputs.background = cfg.outputs.discernibility = false;
    auto r = simulate(cfg);
    ndet.push_back(r.detector("back")->n_det);
    if (ppl == 6) finest = std::move(r);
  }
  o.note("N_det at 4/5/6 points per wavelength " + num(ndet[0]) + ", " + num(ndet[1]) + ", " + num(ndet[2]));
  const double d1 = ndet[1] - ndet[0], d2 = ndet[2] - ndet[1];
  o.gate("monotone convergence", d1 * d2 >= 0 && std::abs(d2) < std::abs(d1),
         "steps " + num(d1) + ", " + num(d2));
  within_factor(o, "three-pulse N_det (6 ppl)", ndet[2], 1.5, 3);
  const Peak p = local_peak(*finest.signal_map, 90, 180, 8);
  const double bin = base.signal.angular_resolution;
  o.gate("peak near (90, 180)", std::abs(p.theta - 90) <= bin && wrap_phi_gap(p.phi, 180) <= bin,
         "(" + num(p.theta) + ", " + num(p.phi) + ")");
  const auto spec = detector_spectrum(*finest.total, back);
  const auto imax = std::max_element(spec.begin(), spec.end()) - spec.begin();
  const double wpk = finest.signal_grid.omega(int(imax));
  o.gate("quasi-elastic omega peak", std::abs(wpk - 1) <= 0.05, num(wpk) + " vs 1 +-0.05");

  // remaining reference counts under the same desk-scale policy
  const auto belt = simulate(scenario("belt.json"), SimulationRequest{});
  within_factor(o, "belt back N_det", belt.detector("back")->n_det, 1.2, 3);
  within_factor(o, "belt forward-angle N_det", belt.detector("forward-angle")->n_det, 0.26, 3);
  auto dip = scenario("gaussian_dipole.json");
  dip.outputs.background = dip.outputs.discernibility = false;
  const std::vector<std::tuple<const char*, double, double, double>> orient = {
      {"d||x", 90, 0, 0.25}, {"d||y", 90, 90, 7.2}, {"d||z", 0, 0, 2.8}};
  for (const auto& [name, th, ph, target] : orient) {
    dip.pulses[1].dipole_theta = th;
    dip.pulses[1].dipole_phi = ph;
    SimulationRequest req;
    const bool channels = std::string(name) == "d||y";
    if (channels) req.channels = {ChannelIndex::parse("222", 2), ChannelIndex::parse("122", 2), ChannelIndex::parse("112", 2)};
    const auto r = simulate(dip, req);
    within_factor(o, std::string("dipole ") + name + " N_det", r.detector("back")->n_det, target, 3);
    if (channels) {
      const std::map<std::string, double> reference = {{"222", 1.15}, {"122", 1.62}, {"112", 0.13}};
      for (std::size_t i = 0; i < r.channels.size(); ++i) {
        const std::string& c = r.channels[i].channel;
        within_factor(o, "channel " + c + " N_det", r.detector("back", c)->n_det, reference.at(c), 10);
        if (c != "122") continue;
        const double bk = local_peak(r.channel_maps[i], 90, 180, 10).value;
        const double fw = local_peak(r.channel_maps[i], 90, 0, 10).value;
        o.gate("channel 122 back peak above forward peak", bk > fw, num(bk) + " vs " + num(fw));
      }
    }
  }
  return o;
}

Outcome c10() {
  Outcome o;
  {
    ScenarioConfig cfg;
    cfg.pulses.push_back(gaussian_spec());
    const auto pm = background_photons(cfg);
    within_rel(o, "gaussian background photons", pm.total(), photon_count(20, 800e-9), 0.02);
  }
  {
    const auto cfg = scenario("gaussian_dipole.json");
    const auto r = simulate(cfg);
    const auto* row = r.detector("back");
    o.note("dipole detector signal " + num(row->n_det) + ", background " + num(row->background));
    // reference value ~5e-20; an order of magnitude either way counts
    o.gate("dipole S/B", row->ratio <= 5e-19, num(row->ratio) + " <= 5e-19");
  }
  return o;
}

Outcome c11() {
  Outcome o;
  const auto g = make_pulse_model(gaussian_spec(), kUnits);
  within_rel(o, "20 J gaussian I_max W/cm2", peak_intensity(g, kUnits), 2.3e22, 0.05);
  const auto d = make_pulse_model(dipole_spec(PulseKind::dipole_b), kUnits);
  within_rel(o, "40 J dipole I_max W/cm2", peak_intensity(d, kUnits), 1.2e24, 0.05);
  const double tp = focal_peak(d).time;
  const auto b = polarization_basis(d.d);
  auto fwhm = [&](const Vec3& dir) {
    auto u = [&](double s) {
      Vec3 E, B;
      d.eval(s * dir, tp, E, B);
      return 0.5 * (E.squaredNorm() + B.squaredNorm());
    };
    const double peak = u(0);
    auto edge = [&](double sign) {
      double a = 0, c = sign * kTwoPi;
      for (int i = 0; i < 80; ++i) {
        const double m = 0.5 * (a + c);
        (u(m) > 0.5 * peak ? a : c) = m;
      }
      return std::abs(a);
    };
    return (edge(1) + edge(-1)) / kTwoPi;
  };
  within_rel(o, "dipole FWHM across (lambda)", fwhm(b.e1), 0.4, 0.10);
  within_rel(o, "dipole FWHM along (lambda)", fwhm(b.k), 0.6, 0.10);
  return o;
}

Outcome c12() {
  Outcome o;
  const auto space = polarization_space();
  const auto f = prefactor_objective(0, 55);
  int hit = 0, monotone = 0;
  std::size_t most = 0;
  std::vector<Trial> first;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CampaignOptions opt;
    opt.budget = 60;
    opt.n_init = 10;
    opt.seed = seed;
    const auto r = run_campaign(space, f, opt);
    most = std::max(most, r.history.size());
    if (r.best && angle_distance180(r.best->x[0], 0) <= 5 && angle_distance180(r.best->x[1], 90) <= 5) ++hit;
    bool mono = true;
    for (std::size_t i = 1; i < r.incumbent.size(); ++i) mono = mono && !(r.incumbent[i] < r.incumbent[i - 1]);
    monotone += mono;
    if (seed == 0) first = r.history;
  }
  o.gate("seeds recovering (0, 90) within 5 deg", hit == 10, std::to_string(hit) + "/10");
  o.gate("evaluations", most <= 60, std::to_string(most) + " <= 60");
  o.gate("monotone incumbent", monotone == 10, std::to_string(monotone) + "/10");
  CampaignOptions opt;
  opt.budget = 60;
  opt.n_init = 10;
  opt.seed = 0;
  const auto again = run_campaign(space, f, opt);
  bool same = again.history.size() == first.size();
  for (std::size_t i = 0; same && i < first.size(); ++i)
    same = again.history[i].x == first[i].x && again.history[i].objective == first[i].objective;
  o.gate("deterministic replay", same, same ? "identical" : "differs");
  return o;
}

} // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> all = {
      {"C1", c1}, {"C2", c2}, {"C3", c3}, {"C4", c4},   {"C5", c5},   {"C6", c6},
      {"C7", c7}, {"C8", c8}, {"C9", c9}, {"C10", c10}, {"C11", c11}, {"C12", c12}};
  std::vector<std::string> want;
  for (int i = 1; i < argc; ++i) want.emplace_back(argv[i]);
  if (want.empty() || (want.size() == 1 && want[0] == "all")) {
    want.clear();
    for (const auto& [id, fn] : all) want.push_back(id);
  }
  int failures = 0;
  for (const auto& id : want) {
    auto it = std::find_if(all.begin(), all.end(), [&](const auto& c) { return c.first == id; });
    if (it == all.end()) {
      std::cerr << "unknown criterion " << id << '\n';
      return 2;
    }
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = it->second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.note(std::string("error: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("%-4s %s  %s  (%.1f s)\n", id.c_str(), o.pass ? "PASS" : "FAIL", o.detail.str().c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures == 0 ? 0 : 1;
}
