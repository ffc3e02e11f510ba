#include "htl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace htl {

std::shared_ptr<const BoxGrid> make_box_grid(int dimension, double halfwidth,
                                             int points_per_axis) {
  if (dimension != 1 && dimension != 2)
    throw std::invalid_argument("make_box_grid: dimension must be 1 or 2");
  if (!(halfwidth > 0.0))
    throw std::invalid_argument("make_box_grid: halfwidth must be positive");
  if (points_per_axis < 2)
    throw std::invalid_argument("make_box_grid: need at least 2 points per axis");
  auto g = std::make_shared<BoxGrid>();
  g->dimension = dimension;
  g->halfwidth = halfwidth;
  g->points_per_axis = points_per_axis;
  const double h = 2.0 * halfwidth / points_per_axis;
  g->axis.resize(points_per_axis);
  for (int i = 0; i < points_per_axis; ++i)
    g->axis[i] = -halfwidth + (i + 0.5) * h;
  g->cell_weight = dimension == 1 ? h : h * h;
  return g;
}

double GridFunction::l2() const {
  double s = 0.0;
  for (double v : value) s += v * v;
  return std::sqrt(s * grid->cell_weight);
}

double GridFunction::max_abs() const {
  double m = 0.0;
  for (double v : value) m = std::max(m, std::abs(v));
  return m;
}

GaussLegendreRule GaussLegendreRule::make(int size) {
  if (size < 1) throw std::invalid_argument("GaussLegendreRule: size must be >= 1");
  GaussLegendreRule r;
  r.node.resize(size);
  r.weight.resize(size);
  const int half = (size + 1) / 2;
  for (int j = 0; j < half; ++j) {
    // Chebyshev-angle initial guess, then Newton on P_size.
    double x = std::cos(M_PI * (j + 0.75) / (size + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int m = 2; m <= size; ++m) {
        const double p2 = ((2.0 * m - 1.0) * x * p1 - (m - 1.0) * p0) / m;
        p0 = p1;
        p1 = p2;
      }
      pp = size * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.node[j] = -x;
    r.node[size - 1 - j] = x;
    const double w = 2.0 / ((1.0 - x * x) * pp * pp);
    r.weight[j] = w;
    r.weight[size - 1 - j] = w;
  }
  return r;
}

TimeGrid TimeGrid::make(int levels, int per_level) {
  if (levels < 1 || per_level < 1)
    throw std::invalid_argument("TimeGrid: levels and per_level must be >= 1");
  const auto gl = GaussLegendreRule::make(per_level);
  TimeGrid t;
  t.levels = levels;
  t.per_level = per_level;
  const double log2v = std::log(2.0);
  // Octave j = [2^{-j-1}, 2^{-j}); substitute t = 2^{-j-1} e^u, u in [0, ln 2],
  // so the weight integrates dt/t = du. Ascending order: deepest octave first.
  for (int j = levels - 1; j >= 0; --j) {
    const double lo = std::ldexp(1.0, -j - 1);
    for (int g = 0; g < per_level; ++g) {
      const double u = 0.5 * log2v * (gl.node[g] + 1.0);
      t.node.push_back(lo * std::exp(u));
      t.weight.push_back(0.5 * log2v * gl.weight[g]);
      t.level.push_back(j);
    }
  }
  return t;
}

std::vector<std::size_t> TimeGrid::octave(int j) const {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < node.size(); ++i)
    if (level[i] == j) idx.push_back(i);
  return idx;
}

}  // namespace htl
