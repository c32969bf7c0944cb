// vacsim command-line tool.

#include <openssl/evp.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vacsim/analytic.hpp"
#include "vacsim/array_io.hpp"
#include "vacsim/campaign.hpp"
#include "vacsim/optimizer.hpp"
#include "vacsim/parallel.hpp"
#include "vacsim/scenario_io.hpp"
#include "vacsim/simulation.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vacsim;

namespace {

enum Exit { kOk = 0, kValidation = 2, kRuntime = 3, kIo = 4 };

struct Globals {
  int threads = 0;
  std::string precision;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "vacsim-out";
};

std::string sha256_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot read " + p.string() + " for hashing");
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), std::streamsize(buf.size()));
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), std::size_t(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
  return os.str();
}

/// Collects written files and emits manifest.json at the end of a command.
class Outputs {
public:
  Outputs(const Globals& g, std::string command) : dir_(g.out_dir), command_(std::move(command)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
    start_ = std::chrono::steady_clock::now();
  }

  fs::path path(const std::string& name) const { return dir_ / name; }

  void array(const ArrayFile& a, bool csv) {
    const std::string base = a.name;
    write_array(path(base + ".vsa").string(), a);
    files_.push_back(base + ".vsa");
    if (csv) {
      write_csv(path(base + ".csv").string(), a);
      files_.push_back(base + ".csv");
    }
  }

  void text(const std::string& name, const std::string& content) {
    std::ofstream out(path(name), std::ios::trunc);
    if (!out) throw IoError("cannot write " + path(name).string());
    out << content;
    if (!out) throw IoError("failed while writing " + path(name).string());
    files_.push_back(name);
  }

  /// Registers a file written by someone else (e.g. a trial log).
  void adopt(const std::string& name) { files_.push_back(name); }

  json info = json::object();

  void finish() {
    json m = info;
    m["command"] = command_;
    m["code_version"] = VACSIM_VERSION;
    m["wall_time_s"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    m["outputs"] = json::array();
    for (const auto& f : files_)
      m["outputs"].push_back({{"file", f}, {"sha256", sha256_file(path(f))}, {"bytes", fs::file_size(path(f))}});
    std::ofstream out(path("manifest.json"), std::ios::trunc);
    if (!out) throw IoError("cannot write manifest");
    out << m.dump(2) << '\n';
  }

private:
  fs::path dir_;
  std::string command_;
  std::vector<std::string> files_;
  std::chrono::steady_clock::time_point start_;
};

ScenarioConfig load_with_overrides(const std::string& path, const Globals& g) {
  ScenarioConfig cfg = load_scenario(path);
  if (g.precision == "f32") cfg.precision = Precision::f32;
  else if (g.precision == "f64") cfg.precision = Precision::f64;
  return cfg;
}

void describe_run(Outputs& out, const ScenarioConfig& cfg, const SimulationResult& r) {
  out.info["scenario"] = cfg.name;
  out.info["scenario_hash"] = r.scenario_hash;
  out.info["precision"] = to_string(cfg.precision);
  out.info["grid"] = {{"points", cfg.grid.points},
                      {"extent_lambda", cfg.grid.extent},
                      {"field_source", to_string(cfg.grid.field_source)},
                      {"time_steps", r.window.count()},
                      {"signal_grid", {r.signal_grid.n_omega, r.signal_grid.n_theta, r.signal_grid.n_phi}}};
}

std::string fmt(double x) {
  std::ostringstream os;
  os << std::setprecision(6) << x;
  return os.str();
}

std::string detector_table(const ScenarioConfig& cfg, const SimulationResult& r) {
  std::ostringstream os;
  os << "region\tchannel\ttheta_deg\tphi_deg\tN_det\tN_background\tsignal_to_background\n";
  for (const auto& d : r.detectors) {
    const DetectorRegion* reg = nullptr;
    for (const auto& x : cfg.detectors)
      if (x.name == d.region) reg = &x;
    os << d.region << '\t' << d.channel << '\t' << (reg ? reg->theta : 0) << '\t' << (reg ? reg->phi : 0) << '\t'
       << std::setprecision(8) << d.n_det << '\t' << d.background << '\t' << d.ratio << '\n';
  }
  return os.str();
}

json summary_json(const SimulationResult& r) {
  json s;
  s["scenario_hash"] = r.scenario_hash;
  s["integration_domain"] = {{"omega_min", r.signal_grid.omega_min},
                             {"omega_max", r.signal_grid.omega_max},
                             {"omega_unit", "reference frequency"},
                             {"solid_angle", "full sphere"}};
  if (r.total) s["N_tot"] = r.n_tot;
  s["window_residual"] = r.window_residual;
  if (!r.channels.empty()) {
    s["channels"] = json::object();
    for (std::size_t c = 0; c < r.channels.size(); ++c) s["channels"][r.channels[c].channel] = r.channel_n_tot[c];
  }
  if (r.channel_residual) s["channel_sum_residual"] = *r.channel_residual;
  if (r.background_map) s["background_total"] = r.background_total;
  if (r.discernible) s["N_disc"] = r.discernible->n_disc;
  s["warnings"] = r.warnings;
  s["detectors"] = json::array();
  for (const auto& d : r.detectors)
    s["detectors"].push_back({{"region", d.region},
                              {"channel", d.channel},
                              {"N_det", d.n_det},
                              {"background", std::isfinite(d.background) ? json(d.background) : json(nullptr)},
                              {"ratio", std::isfinite(d.ratio) ? json(d.ratio) : json(nullptr)}});
  s["wall_time_s"] = r.wall_time;
  return s;
}

void print_warnings(const SimulationResult& r) {
  for (const auto& w : r.warnings) std::cerr << (w.rfind("warning:", 0) == 0 ? "" : "warning: ") << w << '\n';
}

void write_simulation(Outputs& out, const ScenarioConfig& cfg, const SimulationResult& r, bool csv) {
  if (r.total) {
    out.array(to_array(*r.total, "amplitude_total"), false);
    out.array(omega_spectrum_array(*r.total, "omega_spectrum_total"), csv);
    out.array(to_array(*r.signal_map, "signal_density", r.scenario_hash), csv);
  }
  for (std::size_t c = 0; c < r.channels.size(); ++c) {
    const std::string n = r.channels[c].channel;
    out.array(to_array(r.channels[c], "amplitude_" + n), false);
    out.array(to_array(r.channel_maps[c], "signal_density_" + n, r.scenario_hash), csv);
  }
  if (r.background_map) out.array(to_array(*r.background_map, "background_density", r.scenario_hash), csv);
  if (r.discernible) out.array(to_array(r.discernible->mask, "discernible_mask", r.scenario_hash), csv);
  out.text("detectors.tsv", detector_table(cfg, r));
  out.text("summary.json", summary_json(r).dump(2) + "\n");
  describe_run(out, cfg, r);
}

// ---------------------------------------------------------------------------

int cmd_simulate(const Globals& g, const std::string& file, bool csv) {
  const auto cfg = load_with_overrides(file, g);
  const auto r = simulate(cfg);
  print_warnings(r);
  Outputs out(g, "simulate");
  write_simulation(out, cfg, r, csv || cfg.outputs.csv);
  out.finish();
  std::cout << detector_table(cfg, r);
  if (r.total) std::cout << "N_tot\t" << fmt(r.n_tot) << '\n';
  return kOk;
}

int cmd_channels(const Globals& g, const std::string& file, const std::string& list, bool csv) {
  auto cfg = load_with_overrides(file, g);
  cfg.outputs.channels = true;
  cfg.outputs.channel_list.clear();
  std::stringstream ss(list);
  for (std::string tok; std::getline(ss, tok, ';');)
    if (!tok.empty()) cfg.outputs.channel_list.push_back(tok);
  SimulationRequest req = request_from(cfg);
  req.total = true;
  req.check_support = false;
  const auto r = simulate(cfg, req);
  print_warnings(r);
  Outputs out(g, "channels");
  write_simulation(out, cfg, r, csv || cfg.outputs.csv);
  std::ostringstream tab;
  tab << "channel\tmultiplicity\tN_tot\n";
  for (std::size_t c = 0; c < r.channels.size(); ++c)
    tab << r.channels[c].channel << '\t' << ChannelIndex::parse(r.channels[c].channel, int(cfg.pulses.size())).multiplicity()
        << '\t' << std::setprecision(8) << r.channel_n_tot[c] << '\n';
  if (r.channel_residual) tab << "# channel_sum_residual " << *r.channel_residual << '\n';
  else tab << "# channel_sum_residual n/a (subset of channels)\n";
  out.text("channels.tsv", tab.str());
  out.finish();
  std::cout << tab.str();
  return kOk;
}

int cmd_background(const Globals& g, const std::string& file, bool csv) {
  const auto cfg = load_with_overrides(file, g);
  SimulationRequest req;
  req.total = false;
  req.background = true;
  const auto r = simulate(cfg, req);
  print_warnings(r);
  Outputs out(g, "background");
  write_simulation(out, cfg, r, csv || cfg.outputs.csv);
  out.finish();
  std::cout << "background_total\t" << fmt(r.background_total) << '\n' << detector_table(cfg, r);
  return kOk;
}

int cmd_discern(const Globals& g, const std::string& file, bool csv) {
  const auto cfg = load_with_overrides(file, g);
  SimulationRequest req = request_from(cfg);
  req.total = true;
  req.background = true;
  const auto r = simulate(cfg, req);
  print_warnings(r);
  Outputs out(g, "discern");
  write_simulation(out, cfg, r, csv || cfg.outputs.csv);
  out.finish();
  std::cout << "N_tot\t" << fmt(r.n_tot) << "\nN_disc\t" << fmt(r.discernible->n_disc) << '\n'
            << detector_table(cfg, r);
  return kOk;
}

int cmd_optimize(const Globals& g, const std::string& file, const std::string& resume, int budget) {
  CampaignSpec c = load_campaign(file);
  if (g.seed) c.seed = *g.seed;
  if (budget > 0) c.budget = budget;
  if (c.scenario) {
    if (g.precision == "f32") c.scenario->precision = Precision::f32;
    if (g.precision == "f64") c.scenario->precision = Precision::f64;
  }
  Outputs out(g, "optimize");
  CampaignOptions o;
  o.budget = c.budget;
  o.n_init = c.n_init;
  o.batch_size = c.batch_size;
  o.seed = c.seed;
  o.eval_threads = c.scenario ? 1 : std::max(1, g.threads);
  o.point_hash = [&c](const std::vector<double>& x) { return point_hash(c, x); };
  if (!resume.empty()) {
    // continue in place, then mirror the log into the output directory
    o.log_path = resume;
    o.resume = true;
  } else {
    o.log_path = out.path("trials.jsonl").string();
  }
  const auto r = run_campaign(c.space, campaign_objective(c), o);
  if (!resume.empty() && fs::absolute(resume) != fs::absolute(out.path("trials.jsonl")))
    fs::copy_file(resume, out.path("trials.jsonl"), fs::copy_options::overwrite_existing);
  out.adopt("trials.jsonl");

  json rep;
  rep["campaign"] = c.name;
  rep["objective"] = c.objective;
  rep["seed"] = c.seed;
  rep["trials"] = r.history.size();
  int failed = 0;
  for (const auto& t : r.history) failed += !t.ok();
  rep["failed"] = failed;
  auto point = [&](const Trial& t) {
    json p = json::object();
    for (std::size_t i = 0; i < c.space.dim(); ++i) p[c.space.params[i].name] = t.x[i];
    return json{{"index", t.index}, {"params", p}, {"objective", t.objective}, {"scenario_hash", t.scenario_hash}};
  };
  if (r.best) rep["best"] = point(*r.best);
  rep["ties"] = json::array();
  for (const auto& t : r.ties) rep["ties"].push_back(point(t));
  rep["incumbent"] = r.incumbent;

  int n_ok = 0;
  for (const auto& t : r.history) n_ok += t.ok();
  if (n_ok >= 2 && r.best) {
    const auto gp = fit_surrogate(c.space, r.history, c.seed);
    for (const auto& s : c.slices) {
      const auto sl = surrogate_map(gp, c.space, s.x, s.y, r.best->x, s.n, s.n);
      for (int which = 0; which < 2; ++which) {
        ArrayFile a;
        a.name = "surrogate_" + std::string(which ? "variance" : "mean") + "_" + s.x + "_" + s.y;
        a.kind = which ? "surrogate_variance" : "surrogate_mean";
        a.units = "objective";
        a.shape = {std::size_t(s.n), std::size_t(s.n)};
        const auto& px = c.space.params[std::size_t(c.space.index(s.x))];
        const auto& py = c.space.params[std::size_t(c.space.index(s.y))];
        a.axes = {{s.y, "param", py.lower, (py.upper - py.lower) / (s.n - 1), std::size_t(s.n)},
                  {s.x, "param", px.lower, (px.upper - px.lower) / (s.n - 1), std::size_t(s.n)}};
        a.data = which ? sl.variance : sl.mean;
        out.array(a, false);
      }
    }
  }
  out.text("report.json", rep.dump(2) + "\n");
  out.info["campaign"] = c.name;
  if (c.scenario) out.info["scenario_hash"] = scenario_hash(*c.scenario);
  out.finish();
  if (r.best) {
    std::cout << "best";
    for (std::size_t i = 0; i < c.space.dim(); ++i) std::cout << '\t' << c.space.params[i].name << '=' << fmt(r.best->x[i]);
    std::cout << "\tobjective=" << fmt(r.best->objective) << '\n';
  } else {
    std::cout << "no successful trials\n";
    return kRuntime;
  }
  return kOk;
}

int cmd_prefactor(const Globals& g, double bp, double thc, double step) {
  const auto grid = prefactor_grid(bp, thc, step);
  const double norm = prefactor_normalization(thc);
  const auto opt = prefactor_optimum(bp, thc);
  Outputs out(g, "prefactor");
  ArrayFile a;
  a.name = "prefactor";
  a.kind = "polarization_prefactor";
  a.units = "normalized";
  a.shape = {std::size_t(grid.n), std::size_t(grid.n)};
  a.axes = {{"beta1", "deg", 0, step, std::size_t(grid.n)}, {"beta2", "deg", 0, step, std::size_t(grid.n)}};
  for (double v : grid.values) a.data.push_back(v / norm);
  a.attrs["normalization"] = fmt(norm);
  a.attrs["beta_probe_deg"] = fmt(bp);
  a.attrs["theta_c_deg"] = fmt(thc);
  out.array(a, true);
  json rep;
  rep["beta_probe_deg"] = bp;
  rep["theta_c_deg"] = thc;
  rep["normalization"] = norm;
  rep["normalization_panels_deg"] = default_probe_panels();
  rep["grid_max"] = grid.max_value;
  rep["optima"] = json::array();
  for (const auto& o : opt) rep["optima"].push_back({{"beta1", o.beta1}, {"beta2", o.beta2}, {"value", o.value}});
  out.text("prefactor.json", rep.dump(2) + "\n");
  out.finish();
  std::cout << "normalization\t" << std::setprecision(10) << norm << '\n';
  for (const auto& o : opt) std::cout << "optimum\tbeta1=" << fmt(o.beta1) << "\tbeta2=" << fmt(o.beta2) << "\tP=" << fmt(o.value) << "\tP/norm=" << fmt(o.value / norm) << '\n';
  return kOk;
}

int cmd_validate(const std::string& file) {
  ScenarioConfig cfg;
  try {
    cfg = load_scenario(file);
  } catch (const ValidationError& e) {
    std::cout << "error: " << e.what() << '\n';
    return kValidation;
  }
  const auto ds = validate_scenario(cfg);
  for (const auto& d : ds) std::cout << to_string(d) << '\n';
  if (has_errors(ds)) return kValidation;
  if (ds.empty()) std::cout << "OK\n";
  else std::cout << "OK with " << ds.size() << " warning(s)\n";
  return kOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"vacsim: quantum-vacuum signal photons from multi-pulse laser collisions"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--threads", g.threads, "worker threads (default: VACSIM_THREADS or hardware)")
      ->check(CLI::NonNegativeNumber);
  app.add_option("--precision", g.precision, "field precision override")->check(CLI::IsMember({"f32", "f64"}));
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "random seed for optimization campaigns");
  app.add_option("--out-dir", g.out_dir, "directory for outputs")->capture_default_str();

  std::string file, channels = "all", resume;
  bool csv = false;
  int budget = 0;
  double bp = 0, thc = 45, step = 1;

  auto* sim = app.add_subcommand("simulate", "signal amplitude, angular spectra and detector table");
  sim->add_option("scenario", file, "scenario JSON")->required();
  sim->add_flag("--csv", csv, "also write CSV exports");
  auto* chn = app.add_subcommand("channels", "per-channel decomposition of the signal");
  chn->add_option("scenario", file, "scenario JSON")->required();
  chn->add_option("--channels", channels, "'all' or labels separated by ';' (e.g. 122;112)")->capture_default_str();
  chn->add_flag("--csv", csv, "also write CSV exports");
  auto* bg = app.add_subcommand("background", "background photon angular density");
  bg->add_option("scenario", file, "scenario JSON")->required();
  bg->add_flag("--csv", csv, "also write CSV exports");
  auto* dis = app.add_subcommand("discern", "signal, background, discernible mask and N_disc");
  dis->add_option("scenario", file, "scenario JSON")->required();
  dis->add_flag("--csv", csv, "also write CSV exports");
  auto* opt = app.add_subcommand("optimize", "Bayesian optimization campaign");
  opt->add_option("campaign", file, "campaign JSON")->required();
  opt->add_option("--resume", resume, "trial log to continue");
  opt->add_option("--budget", budget, "override the total number of evaluations")->check(CLI::NonNegativeNumber);
  auto* pre = app.add_subcommand("prefactor", "polarization prefactor grid and optimum");
  pre->add_option("--beta-probe", bp, "probe polarization, degrees")->capture_default_str();
  pre->add_option("--theta-c", thc, "collision angle, degrees")->capture_default_str();
  pre->add_option("--step", step, "grid step, degrees")->capture_default_str();
  auto* val = app.add_subcommand("validate", "check a scenario file");
  val->add_option("scenario", file, "scenario JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }
  if (*seed_opt) g.seed = seed;
  if (g.threads > 0) set_thread_count(g.threads);

  try {
    if (*sim) return cmd_simulate(g, file, csv);
    if (*chn) return cmd_channels(g, file, channels, csv);
    if (*bg) return cmd_background(g, file, csv);
    if (*dis) return cmd_discern(g, file, csv);
    if (*opt) return cmd_optimize(g, file, resume, budget);
    if (*pre) return cmd_prefactor(g, bp, thc, step);
    if (*val) return cmd_validate(file);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << '\n';
    return kRuntime;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
  return kValidation;
}
