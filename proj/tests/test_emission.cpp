#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "vacsim/background.hpp"
#include "vacsim/emission.hpp"

using namespace vacsim;

namespace {

const UnitSystem kUnits(800e-9);
constexpr double kTwoPi = 2 * std::numbers::pi;

PulseModel gaussian_model(double theta, double phi, double beta = 0, double energy = 1, double fwhm = 3) {
  PulseSpec p;
  p.kind = PulseKind::gaussian;
  p.energy = energy;
  p.duration = fwhm;
  p.waist = 1;
  p.theta = theta;
  p.phi = phi;
  p.beta = beta;
  return make_pulse_model(p, kUnits);
}

SignalGrid small_signal_grid() {
  SignalGrid sg;
  sg.n_omega = 5;
  sg.n_theta = 8;
  sg.n_phi = 16;
  sg.omega_min = 0.6;
  sg.omega_max = 1.4;
  return sg;
}

double rel_diff(const SignalAmplitude& a, const SignalAmplitude& b) {
  double num = 0, den = 0;
  for (int p = 0; p < 2; ++p)
    for (std::size_t i = 0; i < a.S[p].size(); ++i) {
      num += std::norm(a.S[p][i] - b.S[p][i]);
      den += std::norm(b.S[p][i]);
    }
  return std::sqrt(num / den);
}

} // namespace

TEST(Integrand, PlaneWaveVanishes) {
  PulseSpec p;
  p.kind = PulseKind::plane_wave;
  p.peak_intensity = 1e23;
  p.duration = 10;
  p.theta = 30;
  const Grid3 g = Grid3::centered({20, 20, 20}, {8, 8, 8});
  const auto f = eval_plane_wave(p, kUnits, 0.5, g);
  const auto inv = compute_invariants(f);
  double scale = 0;
  for (std::size_t i = 0; i < f.size(); ++i) scale = std::max(scale, f.e_at(i).squaredNorm());
  for (std::size_t i = 0; i < f.size(); ++i) {
    EXPECT_LE(std::abs(inv.F[i]), 1e-14 * scale);
    EXPECT_LE(std::abs(inv.G[i]), 1e-14 * scale);
  }
  for (int pol : {1, 2})
    for (auto v : emission_integrand(f, unit_vector(1.0, 2.0), pol)) EXPECT_LE(std::abs(v), 1e-14 * scale);
}

TEST(Integrand, MatchesTensorContraction) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1, 1);
  const Grid3 g = Grid3::centered({1, 1, 1}, {2, 2, 2});
  for (int trial = 0; trial < 200; ++trial) {
    FieldSample<double> f(g);
    for (int c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < g.size(); ++i) {
        f.E[c][i] = u(rng);
        f.B[c][i] = u(rng);
      }
    const Vec3 kh = unit_vector(std::acos(u(rng)), 3 * (u(rng) + 1));
    const auto basis = polarization_basis(kh);
    for (int pol : {1, 2}) {
      const auto got = emission_integrand(f, kh, pol);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double ref = oracle::tensor_integrand(f.e_at(i), f.b_at(i), basis.k, pol == 1 ? basis.e1 : basis.e2);
        EXPECT_NEAR(got[i].real(), ref, 1e-12 * (1 + std::abs(ref)));
        EXPECT_EQ(got[i].imag(), 0.0);
      }
    }
  }
}

TEST(Integrand, CrossedStaticFieldsOnlyPseudoscalar) {
  const Grid3 g = Grid3::centered({1, 1, 1}, {2, 2, 2});
  FieldSample<double> f(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    f.E[0][i] = 0.3;
    f.B[1][i] = 0.3;
  }
  const auto inv = compute_invariants(f);
  EXPECT_DOUBLE_EQ(inv.F[0], 0.0);
  EXPECT_DOUBLE_EQ(inv.G[0], 0.0); // perpendicular: E.B = 0, so both vanish

  for (std::size_t i = 0; i < g.size(); ++i) f.B[0][i] = 0.2; // now E.B != 0
  EmissionDensities<double> d;
  emission_densities(f, d);
  const auto inv2 = compute_invariants(f);
  const double F = inv2.F[0], G = inv2.G[0];
  EXPECT_NEAR(G, -0.06, 1e-15);
  EXPECT_NEAR(d.VE[0][0], 4 * F * 0.3 + 7 * G * 0.2, 1e-15);
  EXPECT_NEAR(d.VB[1][0], 4 * F * 0.3 - 7 * G * 0.0, 1e-15);
}

TEST(Channels, EnumerationAndNames) {
  const auto chs = enumerate_channels(2);
  ASSERT_EQ(chs.size(), 4u);
  EXPECT_EQ(chs[0].name(), "111");
  EXPECT_EQ(chs[1].name(), "112");
  EXPECT_EQ(chs[2].name(), "122");
  EXPECT_EQ(chs[3].name(), "222");
  EXPECT_EQ(enumerate_channels(3).size(), 10u);
  EXPECT_EQ(ChannelIndex::parse("221", 2), ChannelIndex(0, 1, 1));
  EXPECT_EQ(ChannelIndex::parse("1,2,12", 12).name(), "1,2,12");
  EXPECT_THROW(ChannelIndex::parse("123", 2), ValidationError);
  EXPECT_THROW(ChannelIndex::parse("12", 2), ValidationError);
  EXPECT_EQ(ChannelIndex(0, 1, 1).multiplicity(), 3);
  EXPECT_EQ(ChannelIndex(0, 1, 2).multiplicity(), 6);
}

TEST(Amplitude, ZeroFieldsGiveZero) {
  const Grid3 g = Grid3::centered({3 * kTwoPi, 3 * kTwoPi, 3 * kTwoPi}, {16, 16, 16});
  AnalyticProvider<double> prov({}, g);
  TimeWindow w{-5, 5, 0.5};
  const auto r = compute_amplitudes(prov, w, small_signal_grid(), 2, 1.0, {}, WindowCheck::off);
  for (int p = 0; p < 2; ++p)
    for (auto s : r.total->S[p]) EXPECT_EQ(s, std::complex<double>(0));
  EXPECT_EQ(total_photons(*r.total), 0.0);
}

// The FFT path evaluated on lattice wave vectors equals the direct space-time sum.
class DirectSum : public ::testing::TestWithParam<int> {};

TEST_P(DirectSum, LatticeNodesMatchDirectSummation) {
  const int padding = GetParam();
  const Grid3 g = Grid3::centered({2.0, 2.0, 2.0}, {8, 8, 8});
  fixture::NoiseProvider prov(g, 99);
  const TimeWindow w{-1.0, 1.0, 0.25}; // eight steps
  ASSERT_EQ(w.steps(), 8);
  FFTWorkspace<double> ws(g, padding);
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
  std::mt19937_64 rng(5);
  const auto dk = ws.dk();
  double worst = 0, peak = 0;
  for (int trial = 0; trial < 40; ++trial) {
    std::uniform_int_distribution<int> pick(-2, 2);
    const Vec3 k(dk[0] * pick(rng), dk[1] * pick(rng), dk[2] * pick(rng));
    std::complex<double> AE[3], AB[3];
    acc.amplitude_at(k, AE, AB);
    for (int c = 0; c < 3; ++c) {
      const auto refE = oracle::direct_sum(g, times, weights, [&](std::size_t x, int it) { return history[it].VE[c][x]; }, k);
      const auto refB = oracle::direct_sum(g, times, weights, [&](std::size_t x, int it) { return history[it].VB[c][x]; }, k);
      worst = std::max({worst, std::abs(AE[c] - refE), std::abs(AB[c] - refB)});
      peak = std::max({peak, std::abs(refE), std::abs(refB)});
    }
  }
  EXPECT_LT(worst / peak, 1e-10);
}

INSTANTIATE_TEST_SUITE_P(Padding, DirectSum, ::testing::Values(1, 2, 3));

TEST(Amplitude, PaddingReducesInterpolationError) {
  // Smooth localized density: off-lattice values converge toward the direct sum.
  const Grid3 g = Grid3::centered({12.0, 12.0, 12.0}, {16, 16, 16});
  auto blob = [&](std::size_t x) {
    const Vec3 p = g.point(x);
    return std::exp(-p.squaredNorm() / 4.0) * std::cos(p[0]);
  };
  const TimeWindow w{0, 0, 1};
  const Vec3 k(0.83, -0.41, 0.27);
  const auto ref = oracle::direct_sum(g, {0.0}, {1.0}, [&](std::size_t x, int) { return blob(x); }, k);
  double prev = 1e300;
  for (int pad : {1, 2, 4}) {
    FFTWorkspace<double> ws(g, pad);
    AmplitudeAccumulator<double> acc(ws, 0.5, 1.5);
    EmissionDensities<double> d;
    d.resize(g.size());
    for (std::size_t x = 0; x < g.size(); ++x) d.VE[0][x] = blob(x);
    acc.add_step(d, 0.0, 1.0, 0, 1);
    std::complex<double> AE[3], AB[3];
    acc.amplitude_at(k, AE, AB);
    const double err = std::abs(AE[0] - ref) / std::abs(ref);
    EXPECT_LT(err, prev);
    prev = err;
  }
  EXPECT_LT(prev, 0.02);
  (void)w;
}

TEST(Amplitude, ChannelSumEqualsTotal) {
  const Grid3 g = Grid3::centered({3 * kTwoPi, 3 * kTwoPi, 3 * kTwoPi}, {16, 16, 16});
  AnalyticProvider<double> prov({gaussian_model(90, 0, 20), gaussian_model(90, 135, 70)}, g);
  TimeWindow w{-8, 8, 0.5};
  ASSERT_EQ(w.count(), 33);
  AmplitudeRequest req;
  req.channels = enumerate_channels(2);
  const auto r = compute_amplitudes(prov, w, small_signal_grid(), 2, 1.0, req, WindowCheck::off);
  SignalAmplitude sum(r.total->grid);
  for (const auto& ch : r.channels)
    for (int p = 0; p < 2; ++p)
      for (std::size_t i = 0; i < sum.S[p].size(); ++i) sum.S[p][i] += ch.S[p][i];
  EXPECT_LT(rel_diff(sum, *r.total), 1e-10);
}

TEST(Amplitude, ChannelScalingExponents) {
  const Grid3 g = Grid3::centered({3 * kTwoPi, 3 * kTwoPi, 3 * kTwoPi}, {16, 16, 16});
  auto run = [&](double a1, double a2) {
    auto m1 = gaussian_model(90, 0), m2 = gaussian_model(90, 180);
    m1.amplitude *= a1;
    m2.amplitude *= a2;
    AnalyticProvider<double> prov({m1, m2}, g);
    AmplitudeRequest req;
    req.total = false;
    req.channels = enumerate_channels(2);
    const auto r = compute_amplitudes(prov, TimeWindow{-6, 6, 0.5}, small_signal_grid(), 1, 1.0, req,
                                      WindowCheck::off);
    std::vector<double> n;
    for (const auto& ch : r.channels) n.push_back(total_photons(ch));
    return n;
  };
  const auto base = run(1, 1), s1 = run(1.7, 1), s2 = run(1, 0.6);
  const auto chs = enumerate_channels(2);
  const double biggest = *std::max_element(base.begin(), base.end());
  int measured = 0;
  for (std::size_t c = 0; c < chs.size(); ++c) {
    // Self channels of a paraxial beam vanish identically (|E| = |B|, E.B = 0) and
    // carry only rounding noise.
    if (base[c] < 1e-12 * biggest) continue;
    ++measured;
    // slope of log N against log energy (energy goes like amplitude squared)
    const double slope1 = std::log(s1[c] / base[c]) / std::log(1.7 * 1.7);
    const double slope2 = std::log(s2[c] / base[c]) / std::log(0.6 * 0.6);
    EXPECT_NEAR(slope1, chs[c].count(0), 1e-6) << chs[c].name();
    EXPECT_NEAR(slope2, chs[c].count(1), 1e-6) << chs[c].name();
  }
  EXPECT_EQ(measured, 2);
}

TEST(Amplitude, CubicInOverallScale) {
  const Grid3 g = Grid3::centered({3 * kTwoPi, 3 * kTwoPi, 3 * kTwoPi}, {16, 16, 16});
  auto m1 = gaussian_model(90, 0), m2 = gaussian_model(90, 120);
  AnalyticProvider<double> a({m1, m2}, g);
  m1.amplitude *= 2;
  m2.amplitude *= 2;
  AnalyticProvider<double> b({m1, m2}, g);
  const TimeWindow w{-6, 6, 0.5};
  const auto ra = compute_amplitudes(a, w, small_signal_grid(), 1, 1.0, {}, WindowCheck::off);
  const auto rb = compute_amplitudes(b, w, small_signal_grid(), 1, 1.0, {}, WindowCheck::off);
  EXPECT_NEAR(total_photons(*rb.total) / total_photons(*ra.total), 64.0, 1e-9);
}

TEST(Amplitude, WindowCheckFlagsTruncation) {
  const Grid3 g = Grid3::centered({3 * kTwoPi, 3 * kTwoPi, 3 * kTwoPi}, {16, 16, 16});
  AnalyticProvider<double> prov({gaussian_model(90, 0), gaussian_model(90, 180)}, g);
  const TimeWindow narrow{-1, 1, 0.25};
  EXPECT_THROW(compute_amplitudes(prov, narrow, small_signal_grid(), 1, 1.0, {}, WindowCheck::error),
               ConvergenceError);
  const auto warned = compute_amplitudes(prov, narrow, small_signal_grid(), 1, 1.0, {}, WindowCheck::warn);
  EXPECT_FALSE(warned.warnings.empty());
  const TimeWindow wide{-14, 14, 0.5};
  const auto ok = compute_amplitudes(prov, wide, small_signal_grid(), 1, 1.0, {}, WindowCheck::error);
  EXPECT_LT(ok.window_residual, 1e-3);
}

TEST(Amplitude, NyquistViolationRejected) {
  const Grid3 g = Grid3::centered({kTwoPi, kTwoPi, kTwoPi}, {6, 6, 6});
  FFTWorkspace<double> ws(g, 1);
  EXPECT_THROW(AmplitudeAccumulator<double>(ws, 0.5, 2.5), ValidationError);
}

TEST(Observables, UniformAmplitudeQuadrature) {
  SignalGrid sg = small_signal_grid();
  sg.n_omega = 41;
  SignalAmplitude s(sg);
  for (int p = 0; p < 2; ++p) std::fill(s.S[p].begin(), s.S[p].end(), std::complex<double>(1.0, 0));
  const auto m = angular_density(s, false);
  const double w0 = sg.omega_min, w1 = sg.omega_max;
  const double exact = 2 * (w1 * w1 * w1 - w0 * w0 * w0) / 3 / std::pow(kTwoPi, 3);
  const double h = sg.d_omega();
  // trapezoid error of int w^2 is (w1 - w0) h^2 / 6
  for (double v : m.values) EXPECT_NEAR(v, exact + 2 * (w1 - w0) * h * h / 6 / std::pow(kTwoPi, 3), 1e-14);
  EXPECT_NEAR(m.integral(), 4 * std::numbers::pi * m.values[0], 1e-12);
  EXPECT_NEAR(total_photons(s), m.integral(), 1e-12);
}

TEST(Observables, BoundaryClippingRejected) {
  SignalGrid sg = small_signal_grid();
  SignalAmplitude s(sg);
  for (int p = 0; p < 2; ++p) std::fill(s.S[p].begin(), s.S[p].end(), std::complex<double>(1.0, 0));
  EXPECT_THROW(angular_density(s, true), ConvergenceError);
}

TEST(Observables, SixthPowerScaling) {
  SignalAmplitude s(small_signal_grid());
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n;
  for (int p = 0; p < 2; ++p)
    for (auto& v : s.S[p]) v = {n(rng), n(rng)};
  SignalAmplitude t = s;
  for (int p = 0; p < 2; ++p)
    for (auto& v : t.S[p]) v *= 8.0; // amplitude a^3 with a = 2
  EXPECT_NEAR(total_photons(t) / total_photons(s), 64.0, 1e-12);
}

TEST(Observables, DetectorOnUniformDensity) {
  AngularMap m(180, 360, MapKind::signal_density);
  std::fill(m.values.begin(), m.values.end(), 2.5);
  for (const DetectorRegion& r : {DetectorRegion{"a", 90, 180, 5, 5}, DetectorRegion{"b", 33.3, 2, 4.1, 7.7},
                                  DetectorRegion{"c", 170, 359, 5, 5}}) {
    EXPECT_NEAR(detector_count(m, r), 2.5 * r.solid_angle(), 1e-12) << r.name;
  }
  EXPECT_THROW(detector_count(m, DetectorRegion{"x", 178, 0, 5, 5}), ValidationError);
}

TEST(Observables, DiscernibilityWithoutBackground) {
  AngularMap s(18, 36, MapKind::signal_density), b(18, 36, MapKind::background_density);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0, 1);
  for (auto& v : s.values) v = u(rng);
  const auto d = discernibility(s, b);
  EXPECT_NEAR(d.n_disc, s.integral(), 1e-12);
  for (int j = 0; j < 18; ++j)
    for (int k = 0; k < 36; ++k) b.at(j, k) = (j < 9) ? 1e9 : 0;
  const auto d2 = discernibility(s, b);
  EXPECT_LT(d2.n_disc, d.n_disc);
  for (int k = 0; k < 36; ++k) EXPECT_EQ(d2.mask.at(0, k), 0.0);
  EXPECT_THROW(discernibility(s, AngularMap(9, 18, MapKind::background_density)), ValidationError);
}

TEST(Background, ZeroFieldGivesZeroMap) {
  SpectralState<double> s;
  s.grid = Grid3::centered({10, 10, 10}, {8, 8, 8});
  for (int c = 0; c < 3; ++c) {
    s.E[c].assign(s.size(), 0);
    s.B[c].assign(s.size(), 0);
  }
  const auto pm = photon_map(s, 1.0);
  EXPECT_EQ(pm.total(), 0.0);
  BackgroundOptions o;
  o.n_theta = 10;
  o.n_phi = 20;
  for (double v : background_angular_density(pm, o).values) EXPECT_EQ(v, 0.0);
}

TEST(Background, PhotonNumberOfNarrowbandGaussian) {
  ScenarioConfig cfg;
  PulseSpec p;
  p.kind = PulseKind::gaussian;
  p.energy = 20;
  p.duration = 20;
  p.waist = 2;
  cfg.pulses.push_back(p);
  const auto pm = background_photons(cfg);
  const double expected = photon_count(20, 800e-9);
  EXPECT_NEAR(pm.total() / expected, 1.0, 0.02);
  BackgroundOptions o;
  o.n_theta = 90;
  o.n_phi = 180;
  const auto map = background_angular_density(pm, o);
  EXPECT_NEAR(map.integral() / pm.total(), 1.0, 0.02);
  // photons travel along +z
  const auto [th, ph] = argmax_direction(map);
  EXPECT_LT(th, 3.0);
}

TEST(Background, DirectionOfTravelSeparated) {
  // Counter-propagating pair: equal photon numbers in the two hemispheres.
  ScenarioConfig cfg;
  PulseSpec p;
  p.kind = PulseKind::gaussian;
  p.energy = 10;
  p.duration = 10;
  p.waist = 2;
  p.theta = 90;
  p.phi = 0;
  cfg.pulses.push_back(p);
  p.energy = 5;
  p.phi = 180;
  cfg.pulses.push_back(p);
  const auto pm = background_photons(cfg);
  BackgroundOptions o;
  o.n_theta = 36;
  o.n_phi = 72;
  const auto map = background_angular_density(pm, o);
  double east = 0, west = 0;
  for (int j = 0; j < map.n_theta; ++j)
    for (int k = 0; k < map.n_phi; ++k) {
      const double v = map.at(j, k) * map.cell_solid_angle(j);
      (std::cos(map.phi(k)) > 0 ? east : west) += v;
    }
  EXPECT_NEAR(east / west, 2.0, 0.03);
}
