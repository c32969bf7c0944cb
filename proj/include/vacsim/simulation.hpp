#pragma once

// Scenario-level pipeline: fields -> amplitudes -> angular maps -> background,
// discernibility and detector counts.

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vacsim/background.hpp"
#include "vacsim/emission.hpp"
#include "vacsim/providers.hpp"
#include "vacsim/scenario.hpp"
#include "vacsim/scenario_io.hpp"

namespace vacsim {

struct SimulationRequest {
  bool total = true;
  std::vector<ChannelIndex> channels;
  bool background = false;
  bool check_support = true;
};

/// Channels named in the outputs block (all multisets if the list is empty).
inline std::vector<ChannelIndex> requested_channels(const ScenarioConfig& cfg) {
  const int n = int(cfg.pulses.size());
  if (cfg.outputs.channel_list.empty()) return enumerate_channels(n);
  std::vector<ChannelIndex> out;
  for (const auto& s : cfg.outputs.channel_list) {
    if (s == "all") return enumerate_channels(n);
    out.push_back(ChannelIndex::parse(s, n));
  }
  return out;
}

inline SimulationRequest request_from(const ScenarioConfig& cfg) {
  SimulationRequest r;
  r.total = cfg.outputs.total;
  if (cfg.outputs.channels) r.channels = requested_channels(cfg);
  r.background = cfg.outputs.background || cfg.outputs.discernibility;
  return r;
}

struct DetectorRow {
  std::string region;
  std::string channel; // "total" or a channel name
  double n_det = 0;
  double background = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN(); // signal / background
};

struct SimulationResult {
  std::string scenario_hash;
  SignalGrid signal_grid;
  Grid3 field_grid;
  TimeWindow window;
  double window_residual = 0;
  std::vector<std::string> warnings;

  std::optional<SignalAmplitude> total;
  std::optional<AngularMap> signal_map;
  double n_tot = 0;

  std::vector<SignalAmplitude> channels;
  std::vector<AngularMap> channel_maps;
  std::vector<double> channel_n_tot;
  std::optional<double> channel_residual; // |sum of channels - total| / |total|

  std::optional<AngularMap> background_map;
  double background_total = 0;
  std::optional<Discernibility> discernible;

  std::vector<DetectorRow> detectors;
  double wall_time = 0;

  const DetectorRow* detector(const std::string& region, const std::string& channel = "total") const {
    for (const auto& d : detectors)
      if (d.region == region && d.channel == channel) return &d;
    return nullptr;
  }
};

/// Throws ValidationError listing every error diagnostic; returns the warnings.
inline std::vector<std::string> require_valid(const ScenarioConfig& cfg) {
  const auto ds = validate_scenario(cfg);
  std::string errs;
  std::vector<std::string> warns;
  for (const auto& d : ds) {
    if (d.severity == Severity::error) errs += (errs.empty() ? "" : "; ") + d.path + ": " + d.message;
    else warns.push_back(to_string(d));
  }
  if (!errs.empty()) throw ValidationError(errs);
  return warns;
}

inline Grid3 field_grid(const ScenarioConfig& cfg) {
  const double two_pi = 2 * std::numbers::pi;
  return Grid3::centered({cfg.grid.extent[0] * two_pi, cfg.grid.extent[1] * two_pi, cfg.grid.extent[2] * two_pi},
                         cfg.grid.points);
}

namespace sim_detail {

/// Relative L2 distance between a channel sum and the total amplitude.
inline double channel_sum_residual(const SignalAmplitude& total, const std::vector<SignalAmplitude>& ch) {
  double num = 0, den = 0;
  for (int p = 0; p < 2; ++p)
    for (std::size_t n = 0; n < total.S[p].size(); ++n) {
      std::complex<double> s = 0;
      for (const auto& c : ch) s += c.S[p][n];
      num += std::norm(s - total.S[p][n]);
      den += std::norm(total.S[p][n]);
    }
  return den > 0 ? std::sqrt(num / den) : std::sqrt(num);
}

template <class T>
AmplitudeResult amplitudes(const ScenarioConfig& cfg, const SimulationRequest& req, const std::string& hash,
                           Grid3& g, TimeWindow& win, SignalGrid& sg) {
  const UnitSystem units = cfg.unit_system();
  g = field_grid(cfg);
  win = TimeWindow::from(cfg);
  sg = SignalGrid::from(cfg);
  std::vector<PulseModel> models;
  std::vector<double> expected;
  for (const auto& p : cfg.pulses) {
    models.push_back(make_pulse_model(p, units));
    expected.push_back(p.kind == PulseKind::plane_wave ? 0.0 : units.to_internal(p.energy, units::joule));
  }
  std::unique_ptr<FieldProvider<T>> prov;
  if (cfg.grid.field_source == FieldSource::analytic) prov = std::make_unique<AnalyticProvider<T>>(models, g);
  else prov = std::make_unique<MaxwellProvider<T>>(models, g, expected);
  AmplitudeRequest ar;
  ar.total = req.total;
  ar.channels = req.channels;
  return compute_amplitudes(*prov, win, sg, cfg.signal.padding, amplitude_prefactor(units), ar,
                            cfg.signal.window_check, hash);
}

} // namespace sim_detail

inline SimulationResult simulate(const ScenarioConfig& cfg, const SimulationRequest& req) {
  const auto t0 = std::chrono::steady_clock::now();
  SimulationResult r;
  r.warnings = require_valid(cfg);
  r.scenario_hash = scenario_hash(cfg);

  if (req.total || !req.channels.empty()) {
    AmplitudeResult ar = cfg.precision == Precision::f32
                             ? sim_detail::amplitudes<float>(cfg, req, r.scenario_hash, r.field_grid, r.window,
                                                             r.signal_grid)
                             : sim_detail::amplitudes<double>(cfg, req, r.scenario_hash, r.field_grid, r.window,
                                                              r.signal_grid);
    r.window_residual = ar.window_residual;
    r.warnings.insert(r.warnings.end(), ar.warnings.begin(), ar.warnings.end());
    if (ar.total) {
      r.total = std::move(ar.total);
      r.signal_map = angular_density(*r.total, req.check_support);
      r.n_tot = r.signal_map->integral();
    }
    r.channels = std::move(ar.channels);
    for (const auto& c : r.channels) {
      r.channel_maps.push_back(angular_density(c, false));
      r.channel_n_tot.push_back(r.channel_maps.back().integral());
    }
    if (r.total && !r.channels.empty() && req.channels.size() == enumerate_channels(int(cfg.pulses.size())).size())
      r.channel_residual = sim_detail::channel_sum_residual(*r.total, r.channels);
  } else {
    r.signal_grid = SignalGrid::from(cfg);
  }

  if (req.background) {
    const PhotonMap pm = cfg.precision == Precision::f32 ? background_photons<float>(cfg) : background_photons<double>(cfg);
    BackgroundOptions bo;
    bo.n_theta = r.signal_grid.n_theta;
    bo.n_phi = r.signal_grid.n_phi;
    r.background_map = background_angular_density(pm, bo);
    r.background_total = pm.total();
    if (r.signal_map) r.discernible = discernibility(*r.signal_map, *r.background_map);
  }

  for (const auto& reg : cfg.detectors) {
    auto row = [&](const AngularMap& m, const std::string& ch) {
      DetectorRow d;
      d.region = reg.name;
      d.channel = ch;
      d.n_det = detector_count(m, reg);
      if (r.background_map) {
        d.background = detector_count(*r.background_map, reg);
        d.ratio = d.background > 0 ? d.n_det / d.background : std::numeric_limits<double>::infinity();
      }
      r.detectors.push_back(d);
    };
    if (r.signal_map) row(*r.signal_map, "total");
    for (std::size_t c = 0; c < r.channels.size(); ++c) row(r.channel_maps[c], r.channels[c].channel);
    if (!r.signal_map && r.channels.empty() && r.background_map) {
      DetectorRow d;
      d.region = reg.name;
      d.channel = "none";
      d.n_det = 0;
      d.background = detector_count(*r.background_map, reg);
      d.ratio = 0;
      r.detectors.push_back(d);
    }
  }
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

inline SimulationResult simulate(const ScenarioConfig& cfg) { return simulate(cfg, request_from(cfg)); }

} // namespace vacsim
