#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "vacsim/error.hpp"
#include "vacsim/geometry.hpp"

namespace vacsim {

/// Uniform Cartesian grid in internal units. Row-major with the last axis
/// fastest, the layout FFTW expects.
struct Grid3 {
  std::array<int, 3> n{0, 0, 0};
  std::array<double, 3> dx{1, 1, 1};
  std::array<double, 3> origin{0, 0, 0};

  /// Grid of n points per axis covering [-L/2, L/2) with node j at -L/2 + j dx.
  static Grid3 centered(std::array<double, 3> length, std::array<int, 3> points) {
    Grid3 g;
    for (int a = 0; a < 3; ++a) {
      if (points[a] < 1 || !(length[a] > 0)) throw ValidationError("grid needs positive size");
      g.n[a] = points[a];
      g.dx[a] = length[a] / points[a];
      g.origin[a] = -0.5 * length[a];
    }
    return g;
  }

  std::size_t size() const { return std::size_t(n[0]) * n[1] * n[2]; }
  std::size_t index(int i, int j, int k) const { return (std::size_t(i) * n[1] + j) * n[2] + k; }
  double cell_volume() const { return dx[0] * dx[1] * dx[2]; }
  std::array<double, 3> length() const { return {n[0] * dx[0], n[1] * dx[1], n[2] * dx[2]}; }
  double coord(int axis, int j) const { return origin[axis] + j * dx[axis]; }
  Vec3 point(int i, int j, int k) const { return {coord(0, i), coord(1, j), coord(2, k)}; }
  Vec3 point(std::size_t flat) const {
    const int k = int(flat % n[2]);
    const std::size_t r = flat / n[2];
    return point(int(r / n[1]), int(r % n[1]), k);
  }

  bool operator==(const Grid3&) const = default;
};

/// Electric and magnetic field on a grid at one time, structure-of-arrays.
template <class T>
struct FieldSample {
  Grid3 grid;
  double t = 0;
  std::array<std::vector<T>, 3> E;
  std::array<std::vector<T>, 3> B;

  FieldSample() = default;
  explicit FieldSample(const Grid3& g, double time = 0) : grid(g), t(time) {
    for (int c = 0; c < 3; ++c) {
      E[c].assign(g.size(), T(0));
      B[c].assign(g.size(), T(0));
    }
  }

  std::size_t size() const { return grid.size(); }
  void zero() {
    for (int c = 0; c < 3; ++c) {
      std::fill(E[c].begin(), E[c].end(), T(0));
      std::fill(B[c].begin(), B[c].end(), T(0));
    }
  }
  Vec3 e_at(std::size_t i) const { return {double(E[0][i]), double(E[1][i]), double(E[2][i])}; }
  Vec3 b_at(std::size_t i) const { return {double(B[0][i]), double(B[1][i]), double(B[2][i])}; }

  FieldSample& operator+=(const FieldSample& o) {
    if (!(o.grid == grid)) throw ValidationError("field samples live on different grids");
    for (int c = 0; c < 3; ++c)
      for (std::size_t i = 0; i < size(); ++i) {
        E[c][i] += o.E[c][i];
        B[c][i] += o.B[c][i];
      }
    return *this;
  }
};

} // namespace vacsim
