#pragma once

// Synthetic field providers shared by the tests and the acceptance binary.

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "vacsim/providers.hpp"

namespace fixture {

using namespace vacsim;

// Fields with arbitrary space-time structure, for checking the transform path.
class NoiseProvider final : public FieldProvider<double> {
public:
  NoiseProvider(const Grid3& g, std::uint64_t seed) : grid_(g) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int c = 0; c < 6; ++c) {
      amp_[c].resize(g.size());
      phase_[c].resize(g.size());
      for (std::size_t i = 0; i < g.size(); ++i) {
        amp_[c][i] = u(rng);
        phase_[c][i] = 3 * u(rng);
      }
    }
  }
  const Grid3& grid() const override { return grid_; }
  std::size_t pulse_count() const override { return 1; }
  void pulse_fields(std::size_t, double t, FieldSample<double>& out) override {
    out.t = t;
    for (int c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < grid_.size(); ++i) {
        out.E[c][i] = value(c, i, t);
        out.B[c][i] = value(c + 3, i, t);
      }
  }
  double value(int c, std::size_t i, double t) const { return amp_[c][i] * std::cos(1.3 * t + phase_[c][i]); }

private:
  Grid3 grid_;
  std::array<std::vector<double>, 6> amp_, phase_;
};

} // namespace fixture
