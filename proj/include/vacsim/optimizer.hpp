#pragma once

// Bayesian optimization of scenario parameters: Latin-hypercube initialization,
// GP surrogate, expected-improvement acquisition with constant-liar batches, and an
// append-only JSON-lines trial log that a later run can resume from.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <ctime>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_min.h>

#include "json.hpp"
#include "vacsim/analytic.hpp"
#include "vacsim/error.hpp"
#include "vacsim/gp.hpp"

namespace vacsim {

// ---------------------------------------------------------------------------
// Parameter space

struct Parameter {
  std::string name;
  double lower = 0, upper = 1;
};

/// sum_i coeff[i] * x[i] <= bound, indices into the parameter list.
struct LinearConstraint {
  std::vector<double> coeff;
  double bound = 0;
};

struct ParameterSpace {
  std::vector<Parameter> params;
  std::vector<LinearConstraint> constraints;

  std::size_t dim() const { return params.size(); }
  std::vector<double> lower() const {
    std::vector<double> v;
    for (const auto& p : params) v.push_back(p.lower);
    return v;
  }
  std::vector<double> upper() const {
    std::vector<double> v;
    for (const auto& p : params) v.push_back(p.upper);
    return v;
  }
  int index(const std::string& name) const {
    for (std::size_t i = 0; i < params.size(); ++i)
      if (params[i].name == name) return int(i);
    return -1;
  }

  bool in_bounds(const std::vector<double>& x, double tol = 1e-12) const {
    if (x.size() != dim()) return false;
    for (std::size_t i = 0; i < dim(); ++i) {
      const double w = params[i].upper - params[i].lower;
      if (x[i] < params[i].lower - tol * w || x[i] > params[i].upper + tol * w) return false;
    }
    return true;
  }
  double violation(const std::vector<double>& x) const {
    double v = 0;
    for (const auto& c : constraints) {
      double s = 0;
      for (std::size_t i = 0; i < dim(); ++i) s += c.coeff[i] * x[i];
      v = std::max(v, s - c.bound);
    }
    return v;
  }
  bool feasible(const std::vector<double>& x, double tol = 1e-12) const {
    return in_bounds(x, tol) && violation(x) <= tol;
  }
  std::vector<double> clamp(std::vector<double> x) const {
    for (std::size_t i = 0; i < dim(); ++i) x[i] = std::clamp(x[i], params[i].lower, params[i].upper);
    return x;
  }

  /// Throws ValidationError unless bounds are finite and some point is feasible.
  void validate() const {
    if (params.empty()) throw ValidationError("parameter space has no parameters");
    for (std::size_t i = 0; i < dim(); ++i) {
      const auto& p = params[i];
      if (!std::isfinite(p.lower) || !std::isfinite(p.upper) || !(p.upper > p.lower))
        throw ValidationError("parameter '" + p.name + "' needs finite bounds with lower < upper");
      for (std::size_t j = 0; j < i; ++j)
        if (params[j].name == p.name) throw ValidationError("duplicate parameter '" + p.name + "'");
    }
    for (const auto& c : constraints) {
      if (c.coeff.size() != dim()) throw ValidationError("constraint length does not match the parameter count");
      double lo = 0;
      for (std::size_t i = 0; i < dim(); ++i) lo += c.coeff[i] * (c.coeff[i] > 0 ? params[i].lower : params[i].upper);
      if (lo > c.bound + 1e-12) throw ValidationError("constraint region is empty");
    }
    if (!constraints.empty() && !find_feasible(0xfeed)) throw ValidationError("constraint region is empty");
  }

  std::optional<std::vector<double>> find_feasible(std::uint64_t seed, int tries = 200000) const {
    std::mt19937_64 rng(seed);
    for (int t = 0; t < tries; ++t) {
      auto x = uniform(rng);
      if (feasible(x)) return x;
    }
    return std::nullopt;
  }

  std::vector<double> uniform(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> x(dim());
    for (std::size_t i = 0; i < dim(); ++i) x[i] = params[i].lower + u(rng) * (params[i].upper - params[i].lower);
    return x;
  }
};

/// Latin-hypercube design of n feasible points; infeasible design points are
/// replaced by uniform rejection samples. Deterministic per seed.
inline std::vector<std::vector<double>> suggest_initial(const ParameterSpace& space, int n, std::uint64_t seed,
                                                        bool enforce_range = true) {
  space.validate();
  if (enforce_range && (n < 5 || n > 15)) throw ValidationError("initial design size must lie in [5, 15]");
  if (n < 1) throw ValidationError("initial design needs at least one point");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  const std::size_t d = space.dim();
  std::vector<std::vector<double>> pts(static_cast<std::size_t>(n), std::vector<double>(d));
  for (std::size_t j = 0; j < d; ++j) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[std::size_t(i)] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    const auto& p = space.params[j];
    for (int i = 0; i < n; ++i) pts[std::size_t(i)][j] = p.lower + (perm[std::size_t(i)] + u(rng)) / n * (p.upper - p.lower);
  }
  for (auto& x : pts) {
    if (space.feasible(x)) continue;
    bool ok = false;
    for (int t = 0; t < 200000 && !ok; ++t) {
      x = space.uniform(rng);
      ok = space.feasible(x);
    }
    if (!ok) throw ValidationError("constraint region is empty");
  }
  return pts;
}

// ---------------------------------------------------------------------------
// Trials and surrogate

enum class TrialStatus { ok, failed };

struct Trial {
  int index = 0;
  std::vector<double> x;
  double objective = std::numeric_limits<double>::quiet_NaN();
  TrialStatus status = TrialStatus::failed;
  std::string phase; // "init" or "bayes"
  std::string message;
  std::string scenario_hash;
  double wall_time = 0; // seconds
  std::string started, finished;

  bool ok() const { return status == TrialStatus::ok; }
};

/// Fits a GP to the successful trials.
inline GaussianProcess fit_surrogate(const ParameterSpace& space, const std::vector<Trial>& trials, std::uint64_t seed) {
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (const auto& t : trials)
    if (t.ok()) X.push_back(t.x), y.push_back(t.objective);
  if (X.size() < 2) throw ValidationError("surrogate fit needs at least two completed trials");
  GaussianProcess gp(space.lower(), space.upper());
  gp.fit(X, y, seed);
  return gp;
}

struct AcquireOptions {
  int random_candidates = 2000;
  int local_starts = 8;
  double xi = 0.0; // exploration margin in units of the output scale
};

namespace opt_detail {

inline double sqdist_unit(const ParameterSpace& s, const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0;
  for (std::size_t i = 0; i < s.dim(); ++i) {
    const double w = (a[i] - b[i]) / (s.params[i].upper - s.params[i].lower);
    d += w * w;
  }
  return d;
}

inline std::vector<double> maximize_ei(const ParameterSpace& space, const GaussianProcess& gp, double best,
                                       const std::vector<std::vector<double>>& avoid, std::mt19937_64& rng,
                                       const AcquireOptions& opt) {
  const double xi = opt.xi * gp.y_scale();
  auto ei = [&](const std::vector<double>& x) { return expected_improvement(gp.predict(x), best, xi); };
  // scored candidates: random feasible points plus jitter around the best observations
  std::vector<std::pair<double, std::vector<double>>> cand;
  std::normal_distribution<double> nd(0, 0.05);
  for (int i = 0; i < opt.random_candidates; ++i) {
    std::vector<double> x = space.uniform(rng);
    if (!space.feasible(x)) continue;
    cand.push_back({ei(x), x});
  }
  for (const auto& a : avoid)
    for (int r = 0; r < 10; ++r) {
      auto x = a;
      for (std::size_t j = 0; j < x.size(); ++j) x[j] += nd(rng) * (space.params[j].upper - space.params[j].lower);
      x = space.clamp(x);
      if (space.feasible(x)) cand.push_back({ei(x), x});
    }
  if (cand.empty()) throw ValidationError("no feasible acquisition candidates");
  std::stable_sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  const int starts = std::min<int>(opt.local_starts, int(cand.size()));
  // local search in unit coordinates; leaving the feasible set costs EI
  const auto lo = space.lower(), hi = space.upper();
  auto to_x = [&](const std::vector<double>& z) {
    std::vector<double> x(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) x[i] = lo[i] + z[i] * (hi[i] - lo[i]);
    return x;
  };
  auto neg = [&](const std::vector<double>& z) {
    auto x = to_x(z);
    const auto c = space.clamp(x);
    double pen = 0;
    for (std::size_t i = 0; i < x.size(); ++i) pen += std::abs(x[i] - c[i]) / (hi[i] - lo[i]);
    pen += std::max(0.0, space.violation(c));
    if (pen > 0) return 1e3 * pen;
    return -ei(c);
  };
  double best_v = -1;
  std::vector<double> best_x = cand.front().second;
  for (int s = 0; s < starts; ++s) {
    std::vector<double> z(space.dim());
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = (cand[s].second[i] - lo[i]) / (hi[i] - lo[i]);
    auto x = space.clamp(to_x(nelder_mead(neg, z, 0.02, 200, 1e-7)));
    if (!space.feasible(x)) x = cand[s].second;
    double v = ei(x);
    if (v < cand[s].first) v = cand[s].first, x = cand[s].second;
    bool dup = false;
    for (const auto& a : avoid) dup = dup || sqdist_unit(space, a, x) < 1e-12;
    if (!dup && v > best_v) best_v = v, best_x = x;
  }
  for (const auto& a : avoid)
    if (sqdist_unit(space, a, best_x) < 1e-12) {
      // every local optimum coincides with data: take the best distinct candidate
      for (const auto& c : cand) {
        bool dup = false;
        for (const auto& b : avoid) dup = dup || sqdist_unit(space, b, c.second) < 1e-12;
        if (!dup) return c.second;
      }
    }
  return best_x;
}

} // namespace opt_detail

/// Batch of points maximizing EI; later members see earlier ones as fantasized
/// observations at the incumbent value.
inline std::vector<std::vector<double>> acquire(const ParameterSpace& space, const GaussianProcess& gp,
                                                const std::vector<Trial>& trials, int batch_size, std::uint64_t seed,
                                                const AcquireOptions& opt = {}) {
  if (batch_size < 1) throw ValidationError("batch size must be positive");
  std::vector<std::vector<double>> X;
  std::vector<double> y;
  for (const auto& t : trials)
    if (t.ok()) X.push_back(t.x), y.push_back(t.objective);
  if (X.empty()) throw ValidationError("acquisition needs at least one completed trial");
  const double best = *std::max_element(y.begin(), y.end());
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> avoid;
  for (const auto& t : trials) avoid.push_back(t.x);
  std::vector<std::vector<double>> out;
  GaussianProcess model = gp;
  for (int b = 0; b < batch_size; ++b) {
    auto x = opt_detail::maximize_ei(space, model, best, avoid, rng, opt);
    out.push_back(x);
    avoid.push_back(x);
    if (b + 1 < batch_size) {
      X.push_back(x);
      y.push_back(best);
      if (!gp.degenerate()) model.condition(X, y, gp.hyper());
      else model.fit(X, y, seed + std::uint64_t(b) + 1);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Surrogate slices

struct SurrogateSlice {
  std::string x_name, y_name;
  std::vector<double> xs, ys;
  std::vector<double> mean, variance; // row-major, index = iy * nx + ix
};

inline SurrogateSlice surrogate_map(const GaussianProcess& gp, const ParameterSpace& space, const std::string& xname,
                                    const std::string& yname, const std::vector<double>& fixed, int nx, int ny) {
  const int ix = space.index(xname), iy = space.index(yname);
  if (ix < 0 || iy < 0) throw ValidationError("slice dimension not in the parameter space");
  if (ix == iy) throw ValidationError("slice dimensions must differ");
  if (nx < 2 || ny < 2) throw ValidationError("slice grid needs at least two points per axis");
  if (fixed.size() != space.dim()) throw ValidationError("fixed point has the wrong dimension");
  SurrogateSlice s;
  s.x_name = xname;
  s.y_name = yname;
  const auto& px = space.params[ix];
  const auto& py = space.params[iy];
  for (int i = 0; i < nx; ++i) s.xs.push_back(px.lower + (px.upper - px.lower) * i / (nx - 1));
  for (int j = 0; j < ny; ++j) s.ys.push_back(py.lower + (py.upper - py.lower) * j / (ny - 1));
  auto x = fixed;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      x[ix] = s.xs[i];
      x[iy] = s.ys[j];
      const auto p = gp.predict(x);
      s.mean.push_back(p.mean);
      s.variance.push_back(p.variance);
    }
  return s;
}

// ---------------------------------------------------------------------------
// Campaign

using Objective = std::function<double(const std::vector<double>&)>;

struct CampaignOptions {
  int budget = 60;  // total evaluations including the initial design
  int n_init = 10;
  int batch_size = 1;
  int eval_threads = 1;
  std::uint64_t seed = 0;
  std::string log_path;    // empty disables persistence
  bool resume = false;     // replay log_path before continuing
  std::string scenario_hash;
  std::function<std::string(const std::vector<double>&)> point_hash; // overrides scenario_hash per trial
  AcquireOptions acquire;
};

struct CampaignResult {
  std::vector<Trial> history;
  std::optional<Trial> best;
  std::vector<Trial> ties;         // trials within 1e-9 relative of the best
  std::vector<double> incumbent;   // best-so-far objective after each trial (NaN before the first success)
};

namespace opt_detail {

using nlohmann::json;

inline std::string now_iso() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline json space_json(const ParameterSpace& s) {
  json j;
  j["parameters"] = json::array();
  for (const auto& p : s.params) j["parameters"].push_back({{"name", p.name}, {"lower", p.lower}, {"upper", p.upper}});
  j["constraints"] = json::array();
  for (const auto& c : s.constraints) j["constraints"].push_back({{"coeff", c.coeff}, {"bound", c.bound}});
  return j;
}

inline json header_json(const ParameterSpace& s, const CampaignOptions& o) {
  return {{"record", "campaign"}, {"space", space_json(s)},  {"seed", o.seed},
          {"n_init", o.n_init},   {"batch_size", o.batch_size}};
}

inline json trial_json(const ParameterSpace& s, const Trial& t) {
  json p = json::object();
  for (std::size_t i = 0; i < s.dim(); ++i) p[s.params[i].name] = t.x[i];
  json j = {{"record", "trial"},         {"index", t.index},           {"params", p},
            {"x", t.x},                  {"status", t.ok() ? "ok" : "failed"},
            {"phase", t.phase},          {"scenario_hash", t.scenario_hash},
            {"started", t.started},      {"finished", t.finished},     {"wall_time", t.wall_time}};
  j["objective"] = t.ok() ? json(t.objective) : json(nullptr);
  if (!t.message.empty()) j["message"] = t.message;
  return j;
}

inline Trial trial_from_json(const json& j, std::size_t dim) {
  Trial t;
  t.index = j.at("index").get<int>();
  t.x = j.at("x").get<std::vector<double>>();
  if (t.x.size() != dim) throw ValidationError("trial log entry has the wrong dimension");
  t.status = j.at("status").get<std::string>() == "ok" ? TrialStatus::ok : TrialStatus::failed;
  if (t.ok()) t.objective = j.at("objective").get<double>();
  t.phase = j.value("phase", "");
  t.message = j.value("message", "");
  t.scenario_hash = j.value("scenario_hash", "");
  t.started = j.value("started", "");
  t.finished = j.value("finished", "");
  t.wall_time = j.value("wall_time", 0.0);
  return t;
}

inline std::uint64_t mix(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

} // namespace opt_detail

/// Reads the trials of a campaign log. A truncated final line is ignored.
inline std::vector<Trial> read_trial_log(const std::string& path, const ParameterSpace& space,
                                         const CampaignOptions* expect = nullptr) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trial log " + path);
  std::vector<Trial> out;
  std::string line;
  bool header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error&) {
      if (in.peek() == EOF) break; // interrupted mid-write
      throw IoError("corrupt trial log line in " + path);
    }
    const std::string rec = j.value("record", "");
    if (rec == "campaign") {
      header = true;
      if (j.at("space") != opt_detail::space_json(space))
        throw ValidationError("trial log was written for a different parameter space");
      if (expect && j.at("seed").get<std::uint64_t>() != expect->seed)
        throw ValidationError("trial log was written with a different seed");
    } else if (rec == "trial") {
      out.push_back(opt_detail::trial_from_json(j, space.dim()));
    }
  }
  if (!header) throw IoError("trial log " + path + " has no campaign header");
  for (std::size_t i = 0; i < out.size(); ++i)
    if (out[i].index != int(i)) throw IoError("trial log indices are not consecutive");
  return out;
}

inline Trial evaluate_trial(const Objective& f, const std::vector<double>& x, int index, const std::string& phase,
                            const std::string& hash) {
  Trial t;
  t.index = index;
  t.x = x;
  t.phase = phase;
  t.scenario_hash = hash;
  t.started = opt_detail::now_iso();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const double v = f(x);
    if (!std::isfinite(v) || v < 0) {
      t.message = "objective returned a non-finite or negative value";
    } else {
      t.objective = v;
      t.status = TrialStatus::ok;
    }
  } catch (const std::exception& e) {
    t.message = e.what();
  }
  t.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  t.finished = opt_detail::now_iso();
  return t;
}

/// Runs (or resumes) a campaign until `budget` trials exist. Every random choice is
/// seeded from (seed, trial count), so a resumed run repeats an uninterrupted one.
inline CampaignResult run_campaign(const ParameterSpace& space, const Objective& f, const CampaignOptions& opt) {
  space.validate();
  if (opt.budget < 0) throw ValidationError("budget must be non-negative");
  if (opt.batch_size < 1) throw ValidationError("batch size must be positive");
  std::vector<Trial> hist;
  if (opt.resume) {
    if (opt.log_path.empty()) throw ValidationError("resume needs a trial log path");
    hist = read_trial_log(opt.log_path, space, &opt);
  }
  std::ofstream log;
  if (!opt.log_path.empty()) {
    const bool fresh = !opt.resume;
    log.open(opt.log_path, fresh ? std::ios::trunc : std::ios::app);
    if (!log) throw IoError("cannot write trial log " + opt.log_path);
    if (fresh) log << opt_detail::header_json(space, opt).dump() << '\n' << std::flush;
  }
  auto record = [&](const Trial& t) {
    hist.push_back(t);
    if (log.is_open()) log << opt_detail::trial_json(space, t).dump() << '\n' << std::flush;
  };
  auto hash_of = [&](const std::vector<double>& x) { return opt.point_hash ? opt.point_hash(x) : opt.scenario_hash; };
  auto run_batch = [&](const std::vector<std::vector<double>>& xs, const std::string& phase) {
    const int base = int(hist.size());
    std::vector<Trial> done(xs.size());
    if (opt.eval_threads > 1 && xs.size() > 1) {
      for (std::size_t s = 0; s < xs.size(); s += std::size_t(opt.eval_threads)) {
        std::vector<std::future<Trial>> fut;
        for (std::size_t i = s; i < std::min(xs.size(), s + std::size_t(opt.eval_threads)); ++i)
          fut.push_back(std::async(std::launch::async, evaluate_trial, std::cref(f), xs[i], base + int(i), phase,
                                   hash_of(xs[i])));
        for (std::size_t i = 0; i < fut.size(); ++i) done[s + i] = fut[i].get();
      }
    } else {
      for (std::size_t i = 0; i < xs.size(); ++i)
        done[i] = evaluate_trial(f, xs[i], base + int(i), phase, hash_of(xs[i]));
    }
    for (const auto& t : done) record(t);
  };

  const int n_init = std::min(opt.n_init, opt.budget);
  if (int(hist.size()) < n_init) {
    const auto init = suggest_initial(space, opt.n_init, opt.seed, false);
    std::vector<std::vector<double>> todo(init.begin() + hist.size(), init.begin() + n_init);
    run_batch(todo, "init");
  }
  while (int(hist.size()) < opt.budget) {
    const int left = opt.budget - int(hist.size());
    const std::uint64_t step_seed = opt_detail::mix(opt.seed, hist.size());
    int n_ok = 0;
    for (const auto& t : hist) n_ok += t.ok();
    std::vector<std::vector<double>> xs;
    if (n_ok < 2) {
      // not enough data for a surrogate: keep sampling the space
      std::mt19937_64 rng(step_seed);
      for (int b = 0; b < std::min(opt.batch_size, left); ++b) {
        std::vector<double> x;
        do x = space.uniform(rng);
        while (!space.feasible(x));
        xs.push_back(x);
      }
    } else {
      const auto gp = fit_surrogate(space, hist, step_seed);
      xs = acquire(space, gp, hist, std::min(opt.batch_size, left), step_seed ^ 0x5bd1e995ULL, opt.acquire);
    }
    run_batch(xs, "bayes");
  }

  CampaignResult r;
  r.history = hist;
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& t : hist) {
    if (t.ok() && t.objective > best) {
      best = t.objective;
      r.best = t;
    }
    r.incumbent.push_back(std::isfinite(best) ? best : std::numeric_limits<double>::quiet_NaN());
  }
  if (r.best)
    for (const auto& t : hist)
      if (t.ok() && t.objective >= best - 1e-9 * std::abs(best)) r.ties.push_back(t);
  return r;
}

// ---------------------------------------------------------------------------
// Analytic objectives

/// Two polarization angles in degrees, bounded to one period.
inline ParameterSpace polarization_space() { return {{{"beta1", 0, 180}, {"beta2", 0, 180}}, {}}; }

/// Polarization factor at fixed probe polarization and collision angle.
inline Objective prefactor_objective(double bp_deg, double thc_deg) {
  return [=](const std::vector<double>& x) { return polarization_prefactor(x.at(0), x.at(1), bp_deg, thc_deg); };
}

/// Energy fractions of three belt pulses; the fourth takes the remainder.
inline ParameterSpace energy_fraction_space() {
  ParameterSpace s{{{"w1", 0, 1}, {"w2", 0, 1}, {"w3", 0, 1}}, {}};
  s.constraints.push_back({{1, 1, 1}, 1});
  return s;
}

/// Back-reflected signal of a belt at fixed probe energy: the two opposite-pair
/// channels add incoherently, each scaling as the product of the pair energies.
inline Objective energy_split_objective(double scale = 1) {
  return [=](const std::vector<double>& x) {
    const double w4 = std::max(0.0, 1 - x.at(0) - x.at(1) - x.at(2));
    return scale * (x[0] * x[2] + x[1] * w4);
  };
}

/// Probe share of a fixed energy budget maximizing W_p^m1 (W0 - W_p)^m2, found
/// numerically with a bracketing minimizer.
inline double optimal_energy_share(double probe_power, double pump_power) {
  if (!(probe_power > 0) || !(pump_power > 0)) throw ValidationError("scaling powers must be positive");
  struct P {
    double a, b;
  } par{probe_power, pump_power};
  gsl_function fn;
  fn.params = &par;
  fn.function = [](double s, void* v) {
    const auto* p = static_cast<P*>(v);
    return -(p->a * std::log(s) + p->b * std::log1p(-s));
  };
  gsl_set_error_handler_off();
  gsl_min_fminimizer* m = gsl_min_fminimizer_alloc(gsl_min_fminimizer_brent);
  // any interior point beats the ends, which diverge
  const double guess = 0.5;
  gsl_min_fminimizer_set(m, &fn, guess, 1e-9, 1 - 1e-9);
  double s = guess;
  for (int it = 0; it < 200; ++it) {
    gsl_min_fminimizer_iterate(m);
    s = gsl_min_fminimizer_x_minimum(m);
    if (gsl_min_test_interval(gsl_min_fminimizer_x_lower(m), gsl_min_fminimizer_x_upper(m), 1e-12, 0) == GSL_SUCCESS)
      break;
  }
  gsl_min_fminimizer_free(m);
  return s;
}

/// Angular distance modulo 180 degrees.
inline double angle_distance180(double a, double b) {
  double d = std::fmod(std::abs(a - b), 180.0);
  return std::min(d, 180 - d);
}

} // namespace vacsim
