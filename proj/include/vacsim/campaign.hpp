#pragma once

// Campaign files: a parameter space, an objective and the loop settings.
//
// {
//   "name": "belt-energy",
//   "scenario": "belt.json",                 // relative to the campaign file
//   "objective": {"kind": "detector", "region": "back", "channel": "total"},
//   "parameters": [{"name": "w1", "lower": 0, "upper": 1, "target": "pulses[1].energy", "scale": 40}],
//   "constraints": [{"coeff": [1, 1, 1], "bound": 1}],
//   "remainders": [{"target": "pulses[4].energy", "scale": 40, "minus": ["w1", "w2", "w3"]}],
//   "budget": 40, "n_init": 10, "batch_size": 1, "seed": 0,
//   "slices": [{"x": "w1", "y": "w3", "n": 41}]
// }
//
// Objective kinds: "detector" (N_det in a named region), "discernible" (N_disc),
// "prefactor" (beta_probe, theta_c; no scenario), "energy_split" (analytic stand-in).

#include <filesystem>
#include <regex>
#include <string>
#include <vector>

#include "json.hpp"
#include "vacsim/optimizer.hpp"
#include "vacsim/scenario_io.hpp"
#include "vacsim/simulation.hpp"

namespace vacsim {

struct ParameterBinding {
  std::vector<std::string> targets; // "pulses[i].key"
  double scale = 1;
};

struct Remainder {
  std::string target;
  double scale = 1;
  std::vector<int> minus; // parameter indices
};

struct SliceRequest {
  std::string x, y;
  int n = 41;
};

struct CampaignSpec {
  std::string name;
  ParameterSpace space;
  std::vector<ParameterBinding> bindings;
  std::vector<Remainder> remainders;
  std::string objective = "prefactor";
  std::string region, channel = "total";
  double beta_probe = 0, theta_c = 45;
  std::optional<ScenarioConfig> scenario;
  int budget = 60, n_init = 10, batch_size = 1;
  std::uint64_t seed = 0;
  std::vector<SliceRequest> slices;
};

namespace campaign_detail {

using nlohmann::json;

inline double& pulse_field(PulseSpec& p, const std::string& key) {
  if (key == "energy") return p.energy;
  if (key == "wavelength") return p.wavelength;
  if (key == "duration") return p.duration;
  if (key == "theta") return p.theta;
  if (key == "phi") return p.phi;
  if (key == "waist") return p.waist;
  if (key == "beta") return p.beta;
  if (key == "dipole_theta") return p.dipole_theta;
  if (key == "dipole_phi") return p.dipole_phi;
  if (key == "phase") return p.phase;
  if (key == "delay") return p.delay;
  throw ValidationError("unknown pulse parameter '" + key + "'");
}

inline void set_target(ScenarioConfig& cfg, const std::string& target, double v) {
  static const std::regex re(R"(pulses\[(\d+)\]\.([a-z_]+))");
  std::smatch m;
  if (!std::regex_match(target, m, re)) throw ValidationError("bad parameter target '" + target + "'");
  const std::size_t i = std::stoul(m[1]);
  if (i >= cfg.pulses.size()) throw ValidationError("parameter target '" + target + "' refers to a missing pulse");
  pulse_field(cfg.pulses[i], m[2]) = v;
}

template <class T>
void opt_get(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

} // namespace campaign_detail

/// Base scenario with the parameter point applied.
inline ScenarioConfig apply_point(const CampaignSpec& c, const std::vector<double>& x) {
  if (!c.scenario) throw ValidationError("campaign has no base scenario");
  ScenarioConfig cfg = *c.scenario;
  for (std::size_t i = 0; i < c.bindings.size(); ++i)
    for (const auto& t : c.bindings[i].targets) campaign_detail::set_target(cfg, t, c.bindings[i].scale * x.at(i));
  for (const auto& r : c.remainders) {
    double s = 1;
    for (int i : r.minus) s -= x.at(std::size_t(i));
    campaign_detail::set_target(cfg, r.target, r.scale * std::max(0.0, s));
  }
  return cfg;
}

inline CampaignSpec parse_campaign(const nlohmann::json& j, const std::string& base_dir = ".") {
  using namespace campaign_detail;
  io_detail::check_keys(j, "campaign",
                        {"name", "scenario", "objective", "parameters", "constraints", "remainders", "budget",
                         "n_init", "batch_size", "seed", "slices"});
  CampaignSpec c;
  try {
    opt_get(j, "name", c.name);
    if (!j.contains("parameters") || !j["parameters"].is_array() || j["parameters"].empty())
      throw ValidationError("campaign needs a non-empty parameters list");
    for (const auto& p : j["parameters"]) {
      io_detail::check_keys(p, "parameters[]", {"name", "lower", "upper", "target", "scale"});
      Parameter par{p.at("name").get<std::string>(), p.at("lower").get<double>(), p.at("upper").get<double>()};
      ParameterBinding b;
      if (p.contains("target")) {
        if (p["target"].is_array()) b.targets = p["target"].get<std::vector<std::string>>();
        else b.targets.push_back(p["target"].get<std::string>());
      }
      opt_get(p, "scale", b.scale);
      c.space.params.push_back(par);
      c.bindings.push_back(b);
    }
    if (j.contains("constraints"))
      for (const auto& k : j["constraints"]) {
        io_detail::check_keys(k, "constraints[]", {"coeff", "bound"});
        c.space.constraints.push_back({k.at("coeff").get<std::vector<double>>(), k.at("bound").get<double>()});
      }
    if (j.contains("remainders"))
      for (const auto& r : j["remainders"]) {
        io_detail::check_keys(r, "remainders[]", {"target", "scale", "minus"});
        Remainder rem;
        rem.target = r.at("target").get<std::string>();
        opt_get(r, "scale", rem.scale);
        for (const auto& n : r.at("minus").get<std::vector<std::string>>()) {
          const int i = c.space.index(n);
          if (i < 0) throw ValidationError("remainder refers to unknown parameter '" + n + "'");
          rem.minus.push_back(i);
        }
        c.remainders.push_back(rem);
      }
    const json& o = j.at("objective");
    io_detail::check_keys(o, "objective", {"kind", "region", "channel", "beta_probe", "theta_c"});
    c.objective = o.at("kind").get<std::string>();
    opt_get(o, "region", c.region);
    opt_get(o, "channel", c.channel);
    opt_get(o, "beta_probe", c.beta_probe);
    opt_get(o, "theta_c", c.theta_c);
    opt_get(j, "budget", c.budget);
    opt_get(j, "n_init", c.n_init);
    opt_get(j, "batch_size", c.batch_size);
    opt_get(j, "seed", c.seed);
    if (j.contains("slices"))
      for (const auto& s : j["slices"]) {
        io_detail::check_keys(s, "slices[]", {"x", "y", "n"});
        SliceRequest r{s.at("x").get<std::string>(), s.at("y").get<std::string>()};
        opt_get(s, "n", r.n);
        c.slices.push_back(r);
      }
    if (j.contains("scenario")) {
      std::filesystem::path p = j["scenario"].get<std::string>();
      if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
      c.scenario = load_scenario(p.string());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("campaign: ") + e.what());
  }
  c.space.validate();
  if (c.objective == "prefactor" || c.objective == "energy_split") {
    const std::size_t want = c.objective == "prefactor" ? 2 : 3;
    if (c.space.dim() != want)
      throw ValidationError("objective '" + c.objective + "' takes " + std::to_string(want) + " parameters");
  } else if (c.objective == "detector" || c.objective == "discernible") {
    if (!c.scenario) throw ValidationError("objective '" + c.objective + "' needs a base scenario");
    for (const auto& b : c.bindings)
      if (b.targets.empty()) throw ValidationError("scenario campaigns need a target for every parameter");
    if (c.objective == "detector") {
      bool found = false;
      for (const auto& d : c.scenario->detectors) found = found || d.name == c.region;
      if (!found) throw ValidationError("objective region '" + c.region + "' is not a detector of the scenario");
    }
    // every point of the space must give a valid scenario; check the initial design
    for (const auto& x : suggest_initial(c.space, std::clamp(c.n_init, 1, 15), c.seed, false)) {
      const auto ds = validate_scenario(apply_point(c, x));
      if (has_errors(ds)) throw ValidationError("campaign point produces an invalid scenario");
    }
  } else {
    throw ValidationError("unknown objective kind '" + c.objective + "'");
  }
  for (const auto& s : c.slices)
    if (c.space.index(s.x) < 0 || c.space.index(s.y) < 0)
      throw ValidationError("slice dimension not in the parameter space");
  return c;
}

/// Scenario hash of a campaign point; empty for analytic objectives.
inline std::string point_hash(const CampaignSpec& c, const std::vector<double>& x) {
  return c.scenario ? scenario_hash(apply_point(c, x)) : std::string();
}

inline CampaignSpec load_campaign(const std::string& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(std::string("campaign is not valid JSON: ") + e.what());
  }
  return parse_campaign(j, std::filesystem::path(path).parent_path().string());
}

/// Objective callable for a campaign.
inline Objective campaign_objective(const CampaignSpec& c) {
  if (c.objective == "prefactor") return prefactor_objective(c.beta_probe, c.theta_c);
  if (c.objective == "energy_split") return energy_split_objective();
  const bool disc = c.objective == "discernible";
  return [c, disc](const std::vector<double>& x) {
    ScenarioConfig cfg = apply_point(c, x);
    SimulationRequest req;
    req.total = c.channel == "total" || disc;
    if (!disc && c.channel != "total") req.channels.push_back(ChannelIndex::parse(c.channel, int(cfg.pulses.size())));
    req.background = disc;
    const auto r = simulate(cfg, req);
    if (disc) return r.discernible ? r.discernible->n_disc : 0.0;
    const auto* row = r.detector(c.region, c.channel);
    if (!row) throw ValidationError("objective region '" + c.region + "' produced no detector row");
    return row->n_det;
  };
}

} // namespace vacsim
