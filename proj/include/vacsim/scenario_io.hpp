#pragma once

// Scenario files are JSON. Every object rejects keys it does not know, so a typo
// fails loudly instead of silently falling back to a default.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include "json.hpp"

#include "vacsim/error.hpp"
#include "vacsim/scenario.hpp"

namespace vacsim {

using json = nlohmann::json;

namespace io_detail {

inline void check_keys(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ValidationError(path + ": expected an object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!ok.count(it.key()))
      throw ValidationError("unknown key '" + it.key() + "' in " + (path.empty() ? "scenario" : path));
}

template <class T>
void get(const json& j, const char* key, T& out, const std::string& path) {
  auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->template get<T>();
  } catch (const json::exception&) {
    throw ValidationError(path + "." + key + ": wrong type");
  }
}

inline PulseKind parse_kind(const std::string& s, const std::string& path) {
  if (s == "gaussian") return PulseKind::gaussian;
  if (s == "dipole_e") return PulseKind::dipole_e;
  if (s == "dipole_b") return PulseKind::dipole_b;
  if (s == "plane_wave") return PulseKind::plane_wave;
  throw ValidationError(path + ".kind: unknown pulse kind '" + s + "'");
}

inline PulseSpec parse_pulse(const json& j, const std::string& path) {
  check_keys(j, path,
             {"kind", "label", "energy_J", "wavelength_nm", "duration_fs", "theta_deg", "phi_deg",
              "waist_lambda", "beta_deg", "dipole_theta_deg", "dipole_phi_deg", "phase_deg", "delay_fs",
              "offset_lambda", "peak_intensity_Wcm2"});
  PulseSpec p;
  if (!j.contains("kind")) throw ValidationError(path + ": missing 'kind'");
  std::string kind;
  get(j, "kind", kind, path);
  p.kind = parse_kind(kind, path);
  get(j, "label", p.label, path);
  get(j, "energy_J", p.energy, path);
  get(j, "wavelength_nm", p.wavelength, path);
  get(j, "duration_fs", p.duration, path);
  get(j, "theta_deg", p.theta, path);
  get(j, "phi_deg", p.phi, path);
  get(j, "waist_lambda", p.waist, path);
  get(j, "beta_deg", p.beta, path);
  get(j, "dipole_theta_deg", p.dipole_theta, path);
  get(j, "dipole_phi_deg", p.dipole_phi, path);
  get(j, "phase_deg", p.phase, path);
  get(j, "delay_fs", p.delay, path);
  get(j, "offset_lambda", p.offset, path);
  get(j, "peak_intensity_Wcm2", p.peak_intensity, path);
  return p;
}

inline json dump_pulse(const PulseSpec& p) {
  json j;
  j["kind"] = to_string(p.kind);
  if (!p.label.empty()) j["label"] = p.label;
  j["energy_J"] = p.energy;
  j["wavelength_nm"] = p.wavelength;
  j["duration_fs"] = p.duration;
  j["theta_deg"] = p.theta;
  j["phi_deg"] = p.phi;
  j["waist_lambda"] = p.waist;
  j["beta_deg"] = p.beta;
  j["dipole_theta_deg"] = p.dipole_theta;
  j["dipole_phi_deg"] = p.dipole_phi;
  j["phase_deg"] = p.phase;
  j["delay_fs"] = p.delay;
  j["offset_lambda"] = p.offset;
  j["peak_intensity_Wcm2"] = p.peak_intensity;
  return j;
}

inline FieldSource parse_source(const std::string& s) {
  if (s == "maxwell") return FieldSource::maxwell;
  if (s == "analytic") return FieldSource::analytic;
  throw ValidationError("grid.field_source: expected 'maxwell' or 'analytic'");
}

inline WindowCheck parse_window_check(const std::string& s) {
  if (s == "error") return WindowCheck::error;
  if (s == "warn") return WindowCheck::warn;
  if (s == "off") return WindowCheck::off;
  throw ValidationError("signal.window_check: expected 'error', 'warn' or 'off'");
}

inline GridSpec parse_grid(const json& j) {
  check_keys(j, "grid",
             {"extent_lambda", "points", "t_min_fs", "t_max_fs", "dt_fs", "window_factor", "field_source",
              "background_points_per_lambda", "background_extent_lambda"});
  GridSpec g;
  get(j, "extent_lambda", g.extent, "grid");
  get(j, "points", g.points, "grid");
  if (j.contains("t_min_fs") && !j["t_min_fs"].is_null()) {
    double v = 0;
    get(j, "t_min_fs", v, "grid");
    g.t_min = v;
  }
  if (j.contains("t_max_fs") && !j["t_max_fs"].is_null()) {
    double v = 0;
    get(j, "t_max_fs", v, "grid");
    g.t_max = v;
  }
  get(j, "dt_fs", g.dt, "grid");
  get(j, "window_factor", g.window_factor, "grid");
  std::string src = to_string(g.field_source);
  get(j, "field_source", src, "grid");
  g.field_source = parse_source(src);
  get(j, "background_points_per_lambda", g.background_points_per_lambda, "grid");
  get(j, "background_extent_lambda", g.background_extent, "grid");
  return g;
}

inline json dump_grid(const GridSpec& g) {
  json j;
  j["extent_lambda"] = g.extent;
  j["points"] = g.points;
  j["t_min_fs"] = g.t_min ? json(*g.t_min) : json(nullptr);
  j["t_max_fs"] = g.t_max ? json(*g.t_max) : json(nullptr);
  j["dt_fs"] = g.dt;
  j["window_factor"] = g.window_factor;
  j["field_source"] = to_string(g.field_source);
  j["background_points_per_lambda"] = g.background_points_per_lambda;
  j["background_extent_lambda"] = g.background_extent;
  return j;
}

inline SignalSpec parse_signal(const json& j) {
  check_keys(j, "signal",
             {"n_omega", "omega_range", "angular_resolution_deg", "n_theta", "n_phi", "padding", "window_check"});
  SignalSpec s;
  get(j, "n_omega", s.n_omega, "signal");
  if (j.contains("omega_range")) {
    std::array<double, 2> r{s.omega_min, s.omega_max};
    get(j, "omega_range", r, "signal");
    s.omega_min = r[0];
    s.omega_max = r[1];
  }
  get(j, "angular_resolution_deg", s.angular_resolution, "signal");
  get(j, "n_theta", s.n_theta, "signal");
  get(j, "n_phi", s.n_phi, "signal");
  get(j, "padding", s.padding, "signal");
  std::string wc = to_string(s.window_check);
  get(j, "window_check", wc, "signal");
  s.window_check = parse_window_check(wc);
  return s;
}

inline json dump_signal(const SignalSpec& s) {
  json j;
  j["n_omega"] = s.n_omega;
  j["omega_range"] = {s.omega_min, s.omega_max};
  j["angular_resolution_deg"] = s.angular_resolution;
  j["n_theta"] = s.n_theta;
  j["n_phi"] = s.n_phi;
  j["padding"] = s.padding;
  j["window_check"] = to_string(s.window_check);
  return j;
}

inline DetectorRegion parse_detector(const json& j, const std::string& path) {
  check_keys(j, path, {"name", "theta_deg", "phi_deg", "half_theta_deg", "half_phi_deg"});
  DetectorRegion d;
  get(j, "name", d.name, path);
  get(j, "theta_deg", d.theta, path);
  get(j, "phi_deg", d.phi, path);
  get(j, "half_theta_deg", d.half_theta, path);
  get(j, "half_phi_deg", d.half_phi, path);
  return d;
}

inline json dump_detector(const DetectorRegion& d) {
  return json{{"name", d.name},
              {"theta_deg", d.theta},
              {"phi_deg", d.phi},
              {"half_theta_deg", d.half_theta},
              {"half_phi_deg", d.half_phi}};
}

inline OutputSpec parse_outputs(const json& j) {
  check_keys(j, "outputs", {"total", "channels", "channel_list", "background", "discernibility", "csv"});
  OutputSpec o;
  get(j, "total", o.total, "outputs");
  get(j, "channels", o.channels, "outputs");
  get(j, "channel_list", o.channel_list, "outputs");
  get(j, "background", o.background, "outputs");
  get(j, "discernibility", o.discernibility, "outputs");
  get(j, "csv", o.csv, "outputs");
  return o;
}

inline json dump_outputs(const OutputSpec& o) {
  return json{{"total", o.total},           {"channels", o.channels},
              {"channel_list", o.channel_list}, {"background", o.background},
              {"discernibility", o.discernibility}, {"csv", o.csv}};
}

} // namespace io_detail

inline ScenarioConfig scenario_from_json(const json& j) {
  using namespace io_detail;
  check_keys(j, "", {"name", "pulses", "grid", "signal", "detectors", "outputs", "precision"});
  ScenarioConfig cfg;
  get(j, "name", cfg.name, "scenario");
  if (j.contains("pulses")) {
    if (!j["pulses"].is_array()) throw ValidationError("pulses: expected a list");
    for (std::size_t i = 0; i < j["pulses"].size(); ++i)
      cfg.pulses.push_back(parse_pulse(j["pulses"][i], "pulses[" + std::to_string(i) + "]"));
  }
  if (j.contains("grid")) cfg.grid = parse_grid(j["grid"]);
  if (j.contains("signal")) cfg.signal = parse_signal(j["signal"]);
  if (j.contains("detectors")) {
    if (!j["detectors"].is_array()) throw ValidationError("detectors: expected a list");
    for (std::size_t i = 0; i < j["detectors"].size(); ++i)
      cfg.detectors.push_back(parse_detector(j["detectors"][i], "detectors[" + std::to_string(i) + "]"));
  }
  if (j.contains("outputs")) cfg.outputs = parse_outputs(j["outputs"]);
  if (j.contains("precision")) {
    std::string p;
    get(j, "precision", p, "scenario");
    if (p == "f32") cfg.precision = Precision::f32;
    else if (p == "f64") cfg.precision = Precision::f64;
    else throw ValidationError("precision: expected 'f32' or 'f64'");
  }
  return cfg;
}

inline json scenario_to_json(const ScenarioConfig& cfg) {
  using namespace io_detail;
  json j;
  j["name"] = cfg.name;
  j["pulses"] = json::array();
  for (const auto& p : cfg.pulses) j["pulses"].push_back(dump_pulse(p));
  j["grid"] = dump_grid(cfg.grid);
  j["signal"] = dump_signal(cfg.signal);
  j["detectors"] = json::array();
  for (const auto& d : cfg.detectors) j["detectors"].push_back(dump_detector(d));
  j["outputs"] = dump_outputs(cfg.outputs);
  j["precision"] = to_string(cfg.precision);
  return j;
}

inline ScenarioConfig parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("scenario is not valid JSON: ") + e.what());
  }
  return scenario_from_json(j);
}

inline std::string serialize_scenario(const ScenarioConfig& cfg) { return scenario_to_json(cfg).dump(2); }

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline ScenarioConfig load_scenario(const std::string& path) { return parse_scenario(read_text_file(path)); }

/// 64-bit FNV-1a over bytes, as 16 hex digits.
inline std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

/// Identity of a scenario: hash of its canonical (key-sorted, compact) JSON form.
inline std::string scenario_hash(const ScenarioConfig& cfg) { return fnv1a_hex(scenario_to_json(cfg).dump()); }

} // namespace vacsim
