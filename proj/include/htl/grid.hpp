#pragma once

#include <cstddef>
#include <memory>
#include <vector>

#include "htl/common.hpp"

namespace htl {

// Uniform cell-centered grid on [-X, X)^n. Midpoint sums over it converge
// spectrally for smooth integrands that decay at the boundary, so it doubles
// as the integration lattice for modulars and L^2 cross-checks.
struct BoxGrid {
  int dimension = 1;
  double halfwidth = 8.0;
  int points_per_axis = 512;
  std::vector<double> axis;   // cell centers, ascending
  double cell_weight = 0.0;   // h^n, h = 2X/P

  std::size_t size() const {
    const auto p = static_cast<std::size_t>(points_per_axis);
    return dimension == 1 ? p : p * p;
  }
  // Row-major: flat = i*P + j for n = 2.
  Point point(std::size_t flat) const {
    if (dimension == 1) return {axis[flat], 0.0};
    const auto p = static_cast<std::size_t>(points_per_axis);
    return {axis[flat / p], axis[flat % p]};
  }
};

std::shared_ptr<const BoxGrid> make_box_grid(int dimension, double halfwidth,
                                             int points_per_axis);

// Samples of a function over a shared BoxGrid.
struct GridFunction {
  std::shared_ptr<const BoxGrid> grid;
  std::vector<double> value;

  GridFunction() = default;
  explicit GridFunction(std::shared_ptr<const BoxGrid> g)
      : grid(std::move(g)), value(grid->size(), 0.0) {}

  // sum of value^2 * cell_weight, then sqrt
  double l2() const;
  double max_abs() const;
};

// Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> node;
  std::vector<double> weight;
  static GaussLegendreRule make(int size);
};

// Gauss-Legendre nodes in log t per dyadic octave [2^{-j-1}, 2^{-j}),
// j = 0..levels-1, covering (2^{-levels}, 1). Weights integrate dt/t.
// Nodes are stored ascending in t; level(i) recovers the octave.
struct TimeGrid {
  std::vector<double> node;
  std::vector<double> weight;
  std::vector<int> level;
  int levels = 0;
  int per_level = 0;

  static TimeGrid make(int levels, int per_level);

  // Indices of the octave [2^{-j-1}, 2^{-j}), ascending in t.
  std::vector<std::size_t> octave(int j) const;
};

}  // namespace htl
