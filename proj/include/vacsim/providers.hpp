#pragma once

// Sources of background fields for the emission integral. Analytic providers
// evaluate the closed forms at every step; Maxwell providers propagate transverse
// spectral states initialized at t = 0.

#include <memory>
#include <vector>

#include "vacsim/fields.hpp"
#include "vacsim/maxwell.hpp"

namespace vacsim {

template <class T>
class FieldProvider {
public:
  virtual ~FieldProvider() = default;
  virtual const Grid3& grid() const = 0;
  virtual std::size_t pulse_count() const = 0;
  /// Overwrites out with the fields of pulse p at time t.
  virtual void pulse_fields(std::size_t p, double t, FieldSample<T>& out) = 0;
  /// Overwrites out with the superposed fields at time t.
  virtual void total_fields(double t, FieldSample<T>& out) {
    out.zero();
    out.t = t;
    FieldSample<T> one(grid(), t);
    for (std::size_t p = 0; p < pulse_count(); ++p) {
      pulse_fields(p, t, one);
      out += one;
    }
  }
};

template <class T>
class AnalyticProvider final : public FieldProvider<T> {
public:
  AnalyticProvider(std::vector<PulseModel> pulses, const Grid3& grid) : pulses_(std::move(pulses)), grid_(grid) {}

  const Grid3& grid() const override { return grid_; }
  std::size_t pulse_count() const override { return pulses_.size(); }
  void pulse_fields(std::size_t p, double t, FieldSample<T>& out) override {
    out.zero();
    out.t = t;
    add_pulse_fields(pulses_.at(p), t, out);
  }
  void total_fields(double t, FieldSample<T>& out) override {
    out.zero();
    out.t = t;
    for (const auto& m : pulses_) add_pulse_fields(m, t, out);
  }

private:
  std::vector<PulseModel> pulses_;
  Grid3 grid_;
};

template <class T>
class MaxwellProvider final : public FieldProvider<T> {
public:
  MaxwellProvider(const std::vector<PulseModel>& pulses, const Grid3& grid,
                  const std::vector<double>& expected_energy = {})
      : grid_(grid), rec_(grid) {
    for (std::size_t p = 0; p < pulses.size(); ++p) {
      std::vector<double> e;
      if (p < expected_energy.size()) e.push_back(expected_energy[p]);
      states_.push_back(init_from_focus<T>(std::vector<PulseModel>{pulses[p]}, grid, e));
    }
    total_ = states_.empty() ? SpectralState<T>{} : states_.front();
    for (std::size_t p = 1; p < states_.size(); ++p)
      for (int c = 0; c < 3; ++c)
        for (std::size_t m = 0; m < total_.size(); ++m) {
          total_.E[c][m] += states_[p].E[c][m];
          total_.B[c][m] += states_[p].B[c][m];
        }
  }

  const Grid3& grid() const override { return grid_; }
  std::size_t pulse_count() const override { return states_.size(); }
  void pulse_fields(std::size_t p, double t, FieldSample<T>& out) override { rec_.fields_at(states_.at(p), t, out); }
  void total_fields(double t, FieldSample<T>& out) override {
    if (states_.empty()) {
      out.zero();
      return;
    }
    rec_.fields_at(total_, t, out);
  }
  const SpectralState<T>& total_state() const { return total_; }
  const SpectralState<T>& pulse_state(std::size_t p) const { return states_.at(p); }

private:
  Grid3 grid_;
  FieldReconstructor<T> rec_;
  std::vector<SpectralState<T>> states_;
  SpectralState<T> total_;
};

} // namespace vacsim
