#pragma once

// Gaussian-process regression with a Matern-5/2 ARD kernel. Inputs are mapped to
// the unit cube by fixed bounds, outputs standardized. Hyperparameters (length
// scales, signal variance) maximize the log marginal likelihood.

#include <gsl/gsl_multimin.h>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <vector>

#include "vacsim/error.hpp"

namespace vacsim {

/// Minimizes f from x0 with the GSL simplex; returns the best point found.
inline std::vector<double> nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                       std::vector<double> x0, double step, int max_iter = 400,
                                       double size_tol = 1e-6) {
  const std::size_t n = x0.size();
  if (n == 0) return x0;
  struct Ctx {
    const std::function<double(const std::vector<double>&)>* f;
    std::vector<double> buf;
  } ctx{&f, std::vector<double>(n)};
  gsl_multimin_function fn;
  fn.n = n;
  fn.params = &ctx;
  fn.f = [](const gsl_vector* v, void* p) -> double {
    auto* c = static_cast<Ctx*>(p);
    for (std::size_t i = 0; i < c->buf.size(); ++i) c->buf[i] = gsl_vector_get(v, i);
    const double y = (*c->f)(c->buf);
    return std::isfinite(y) ? y : 1e300;
  };
  gsl_vector* x = gsl_vector_alloc(n);
  gsl_vector* s = gsl_vector_alloc(n);
  for (std::size_t i = 0; i < n; ++i) gsl_vector_set(x, i, x0[i]);
  gsl_vector_set_all(s, step);
  gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
  gsl_multimin_fminimizer_set(m, &fn, x, s);
  for (int it = 0; it < max_iter; ++it) {
    if (gsl_multimin_fminimizer_iterate(m)) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), size_tol) == GSL_SUCCESS) break;
  }
  for (std::size_t i = 0; i < n; ++i) x0[i] = gsl_vector_get(m->x, i);
  gsl_multimin_fminimizer_free(m);
  gsl_vector_free(s);
  gsl_vector_free(x);
  return x0;
}

struct GPHyper {
  std::vector<double> length; // unit-cube length scales
  double signal_var = 1;      // standardized units
  double noise_var = 1e-6;    // standardized units, fixed floor
};

struct Posterior {
  double mean = 0;
  double variance = 0; // latent function, original units squared
};

class GaussianProcess {
public:
  GaussianProcess() = default;
  GaussianProcess(std::vector<double> lower, std::vector<double> upper) : lo_(std::move(lower)), hi_(std::move(upper)) {
    if (lo_.size() != hi_.size() || lo_.empty()) throw ValidationError("GP bounds must be non-empty and matched");
    for (std::size_t i = 0; i < lo_.size(); ++i)
      if (!(hi_[i] > lo_[i]) || !std::isfinite(lo_[i]) || !std::isfinite(hi_[i]))
        throw ValidationError("GP bounds must be finite with lower < upper");
  }

  std::size_t dim() const { return lo_.size(); }
  std::size_t size() const { return y_.size(); }
  const GPHyper& hyper() const { return hyp_; }
  bool degenerate() const { return degenerate_; }
  double y_mean() const { return ym_; }
  double y_scale() const { return ys_; }
  double noise_floor() const { return hyp_.noise_var * ys_ * ys_; }

  /// Fits hyperparameters from several starts and conditions on the data.
  void fit(const std::vector<std::vector<double>>& X, const std::vector<double>& y, std::uint64_t seed,
           int restarts = 4) {
    set_data(X, y);
    if (degenerate_) return;
    const std::size_t d = dim();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(std::log(0.05), std::log(2.0));
    std::vector<std::vector<double>> starts;
    starts.push_back(std::vector<double>(d + 1, std::log(0.3)));
    starts.back()[d] = 0;
    for (int r = 0; r < restarts; ++r) {
      std::vector<double> s(d + 1);
      for (std::size_t i = 0; i < d; ++i) s[i] = u(rng);
      s[d] = std::log(0.5) + (u(rng) - std::log(0.05)) * 0.5;
      starts.push_back(s);
    }
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> arg = starts.front();
    auto obj = [&](const std::vector<double>& th) { return neg_log_likelihood(th); };
    for (const auto& s : starts) {
      const auto th = nelder_mead(obj, s, 0.5, 300, 1e-4);
      const double v = obj(th);
      if (v < best) best = v, arg = th;
    }
    apply(arg);
  }

  /// Conditions on the data with fixed hyperparameters.
  void condition(const std::vector<std::vector<double>>& X, const std::vector<double>& y, const GPHyper& h) {
    set_data(X, y);
    if (degenerate_) return;
    hyp_ = h;
    factorize();
  }

  Posterior predict(const std::vector<double>& x) const {
    if (degenerate_) return {ym_, ys_ * ys_ * hyp_.signal_var};
    const Eigen::VectorXd z = normalize(x);
    Eigen::VectorXd k(size());
    for (std::size_t i = 0; i < size(); ++i) k[i] = kernel(z, Z_.row(i).transpose());
    const double mu = k.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(k);
    const double var = std::max(0.0, hyp_.signal_var - v.squaredNorm());
    return {ym_ + ys_ * mu, ys_ * ys_ * var};
  }

  double log_marginal_likelihood() const { return degenerate_ ? 0 : -nll_at_current(); }

  double kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
    double r2 = 0;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      const double d = (a[i] - b[i]) / hyp_.length[i];
      r2 += d * d;
    }
    return hyp_.signal_var * matern52(std::sqrt(r2));
  }

  static double matern52(double r) {
    const double s = std::sqrt(5.0) * r;
    return (1 + s + s * s / 3) * std::exp(-s);
  }

  Eigen::VectorXd normalize(const std::vector<double>& x) const {
    Eigen::VectorXd z(dim());
    for (std::size_t i = 0; i < dim(); ++i) z[i] = (x[i] - lo_[i]) / (hi_[i] - lo_[i]);
    return z;
  }

private:
  void set_data(const std::vector<std::vector<double>>& X, const std::vector<double>& y) {
    if (X.size() != y.size() || X.size() < 2) throw ValidationError("GP needs at least two observations");
    Z_.resize(Eigen::Index(X.size()), Eigen::Index(dim()));
    for (std::size_t i = 0; i < X.size(); ++i) {
      if (X[i].size() != dim()) throw ValidationError("GP observation has the wrong dimension");
      Z_.row(i) = normalize(X[i]).transpose();
    }
    ym_ = 0;
    for (double v : y) ym_ += v;
    ym_ /= double(y.size());
    double var = 0;
    for (double v : y) var += (v - ym_) * (v - ym_);
    var /= double(y.size());
    y_.resize(Eigen::Index(y.size()));
    hyp_.length.assign(dim(), 0.3);
    hyp_.signal_var = 1;
    const double spread = std::max(std::abs(ym_), 1.0);
    degenerate_ = !(std::sqrt(var) > 1e-12 * spread);
    ys_ = degenerate_ ? std::max(std::abs(ym_), 1.0) : std::sqrt(var);
    for (std::size_t i = 0; i < y.size(); ++i) y_[Eigen::Index(i)] = (y[i] - ym_) / ys_;
  }

  static double clamp_log(double v, double lo, double hi) { return std::clamp(v, lo, hi); }

  // theta = (log lengths, log signal variance), clamped to a sane box.
  void unpack(const std::vector<double>& th, GPHyper& h) const {
    h.length.resize(dim());
    for (std::size_t i = 0; i < dim(); ++i) h.length[i] = std::exp(clamp_log(th[i], std::log(0.01), std::log(10.0)));
    h.signal_var = std::exp(clamp_log(th[dim()], std::log(0.01), std::log(100.0)));
  }

  double penalty(const std::vector<double>& th) const {
    double p = 0;
    auto out = [](double v, double lo, double hi) { return v < lo ? lo - v : v > hi ? v - hi : 0.0; };
    for (std::size_t i = 0; i < dim(); ++i) p += out(th[i], std::log(0.01), std::log(10.0));
    p += out(th[dim()], std::log(0.01), std::log(100.0));
    return 10 * p * p;
  }

  double neg_log_likelihood(const std::vector<double>& th) {
    unpack(th, hyp_);
    if (!factorize()) return 1e300;
    return nll_at_current() + penalty(th);
  }

  double nll_at_current() const {
    const Eigen::MatrixXd L = llt_.matrixL();
    const double logdet = 2 * L.diagonal().array().log().sum();
    return 0.5 * y_.dot(alpha_) + 0.5 * logdet + 0.5 * double(size()) * std::log(2 * std::numbers::pi);
  }

  void apply(const std::vector<double>& th) {
    unpack(th, hyp_);
    if (!factorize()) {
      hyp_.noise_var = 1e-4;
      factorize();
    }
  }

  bool factorize() {
    const auto n = Eigen::Index(size());
    Eigen::MatrixXd K(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j <= i; ++j) K(i, j) = K(j, i) = kernel(Z_.row(i).transpose(), Z_.row(j).transpose());
    K.diagonal().array() += hyp_.noise_var;
    llt_.compute(K);
    if (llt_.info() != Eigen::Success) return false;
    alpha_ = llt_.solve(y_);
    return alpha_.allFinite();
  }

  std::vector<double> lo_, hi_;
  Eigen::MatrixXd Z_;
  Eigen::VectorXd y_, alpha_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  GPHyper hyp_;
  double ym_ = 0, ys_ = 1;
  bool degenerate_ = false;
};

/// Expected improvement over `best` for maximization.
inline double expected_improvement(const Posterior& p, double best, double xi = 0) {
  const double s = std::sqrt(p.variance);
  const double d = p.mean - best - xi;
  if (!(s > 1e-300)) return std::max(d, 0.0);
  const double z = d / s;
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2 * std::numbers::pi);
  return std::max(0.0, d * cdf + s * pdf);
}

} // namespace vacsim
