#include "htl/tlspace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "htl/errors.hpp"
#include "htl/semigroup.hpp"

namespace htl {

CoefficientSet::CoefficientSet(const SamplingScheme& scheme, int v_max)
    : scheme_(scheme), v_max_(v_max) {
  scheme_.validate();
  if (v_max < 0) throw std::invalid_argument("coefficient set: v_max < 0");
}

void CoefficientSet::set(const DyadicCube& q, double s) {
  if (q.v < 0 || q.v > v_max_)
    throw std::out_of_range("coefficient set: level outside 0..v_max");
  const double X = scheme_.box_halfwidth;
  const double side = q.side();
  auto inside = [&](long k) {
    return side * k >= -X && side * (k + 1) <= X;
  };
  if (!inside(q.k1) || (scheme_.dimension == 2 && !inside(q.k2)))
    throw std::out_of_range("coefficient set: cube outside the box");
  if (!std::isfinite(s))
    throw std::invalid_argument("coefficient set: non-finite value");
  const auto key = std::make_tuple(q.v, q.k1, scheme_.dimension == 2 ? q.k2 : 0L);
  const auto it = index_.find(key);
  if (it != index_.end()) {
    items_[it->second].second = s;
  } else {
    index_.emplace(key, items_.size());
    items_.emplace_back(q, s);
  }
}

double CoefficientSet::at(const DyadicCube& q) const {
  const auto it = index_.find(
      std::make_tuple(q.v, q.k1, scheme_.dimension == 2 ? q.k2 : 0L));
  return it == index_.end() ? 0.0 : items_[it->second].second;
}

namespace {

std::vector<double> sample_field(const ExponentField& f, const BoxGrid& g) {
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = f(g.point(i));
  return out;
}

// Worst boundary-to-peak ratio of |g| (box truncation diagnostic).
double edge_ratio(const GridFunction& g) {
  const auto& grid = *g.grid;
  const double peak = g.max_abs();
  if (peak == 0.0) return 0.0;
  double edge = 0.0;
  const auto p = static_cast<std::size_t>(grid.points_per_axis);
  if (grid.dimension == 1) {
    edge = std::max(std::abs(g.value.front()), std::abs(g.value.back()));
  } else {
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j : {std::size_t{0}, p - 1}) {
        edge = std::max(edge, std::abs(g.value[i * p + j]));
        edge = std::max(edge, std::abs(g.value[j * p + i]));
      }
    }
  }
  return edge / peak;
}

}  // namespace

NormBreakdown tl_norm(const HermiteExpansion& f, const ExponentField& alpha,
                      const ExponentField& p, const ExponentField& q, int m,
                      const SchemeContext& ctx) {
  if (m < 0) throw std::domain_error("tl_norm: m must be >= 0");
  const auto& grid = *ctx.grid();
  const int n = grid.dimension;

  NormBreakdown out;
  {
    const FieldMeta am = field_meta(alpha, grid);
    const double tau = std::min({1.0, p.min(), q.min()});
    const double clog = std::max(am.clog_local, am.clog_infty);
    out.m_threshold = std::max(am.p_plus, 0.0) + n +
                      std::floor(n / tau - n) + 1.0 + clog;
    out.m_ok = m > out.m_threshold;
  }

  auto low = synthesize_on_grid(apply_poisson(f, 1.0, 0), ctx);
  for (auto& v : low.value) v = std::abs(v);
  out.term_lowpass = luxemburg_norm(low, p);

  const auto& times = ctx.times();
  const auto ax = sample_field(alpha, grid);
  LevelFamily fam;
  fam.weight = times.weight;
  fam.member.assign(times.node.size(), GridFunction(ctx.grid()));
  for (std::size_t i = 0; i < times.node.size(); ++i) {
    const double t = times.node[i];
    auto u = synthesize_on_grid(apply_poisson(f, t, m), ctx);
    auto& g = fam.member[i];
    parallel_for(grid.size(), [&](std::size_t j) {
      g.value[j] = std::pow(t, -ax[j]) * std::abs(u.value[j]);
    });
  }
  out.term_squarefn = mixed_norm(fam, p, q);
  out.total = out.term_lowpass + out.term_squarefn;

  // Neglected (0, 2^{-J}) share of the inner integral: extrapolate the
  // integrand below the smallest node by its t^{(m-alpha)q} power law.
  const auto qx = sample_field(q, grid);
  const double t0 = times.node.front();
  const double cut = std::exp2(-times.levels);
  std::vector<double> share(grid.size(), 0.0);
  parallel_for(grid.size(), [&](std::size_t j) {
    double s = 0.0;
    for (std::size_t i = 0; i < fam.member.size(); ++i) {
      const double a = fam.member[i].value[j];
      if (a != 0.0) s += fam.weight[i] * std::pow(a, qx[j]);
    }
    const double sigma = (m - ax[j]) * qx[j];
    if (s == 0.0 || sigma <= 0.0) {
      share[j] = s == 0.0 ? 0.0 : 1.0;
      return;
    }
    const double a0 = std::pow(fam.member.front().value[j], qx[j]);
    const double tail = a0 * std::pow(cut / t0, sigma) / sigma;
    share[j] = tail / (s + tail);
  });
  for (double s : share) out.tail_time = std::max(out.tail_time, s);
  for (const auto& g : fam.member)
    out.tail_space = std::max(out.tail_space, edge_ratio(g));
  return out;
}

NormBreakdown tl_norm(const HermiteExpansion& f, const ExponentField& alpha,
                      const ExponentField& p, const ExponentField& q, int m,
                      const SamplingScheme& scheme) {
  return tl_norm(f, alpha, p, q, m, SchemeContext(scheme));
}

double seq_norm(const CoefficientSet& s, const ExponentField& alpha,
                const ExponentField& p, const ExponentField& q) {
  const auto& sc = s.scheme();
  const auto grid =
      make_box_grid(sc.dimension, sc.box_halfwidth, sc.points_per_axis);

  // Per-level cube lookup tables keyed by flattened cube index.
  struct Level {
    bool used = false;
    long per_axis = 0;
    long k0 = 0;
    std::vector<double> value;  // |s_Q|, dense over cubes in the box
  };
  std::vector<Level> levels(s.v_max() + 1);
  for (const auto& [cube, val] : s.items()) {
    auto& L = levels[cube.v];
    if (!L.used) {
      L.used = true;
      L.per_axis = std::lround(2.0 * sc.box_halfwidth * std::exp2(cube.v));
      L.k0 = -L.per_axis / 2;
      L.value.assign(sc.dimension == 1
                         ? L.per_axis
                         : L.per_axis * L.per_axis,
                     0.0);
    }
    std::size_t flat = static_cast<std::size_t>(cube.k1 - L.k0);
    if (sc.dimension == 2)
      flat = flat * L.per_axis + static_cast<std::size_t>(cube.k2 - L.k0);
    L.value[flat] = std::abs(val);
  }

  const auto ax = sample_field(alpha, *grid);
  LevelFamily fam;
  for (int v = 0; v <= s.v_max(); ++v) {
    const auto& L = levels[v];
    if (!L.used) continue;
    GridFunction g(grid);
    const double side = std::exp2(-v);
    const double scale = std::pow(std::exp2(v), 0.5 * sc.dimension);  // |Q|^{-1/2}
    parallel_for(grid->size(), [&](std::size_t i) {
      const Point x = grid->point(i);
      const long a = std::lround(std::floor(x[0] / side)) - L.k0;
      const long b = sc.dimension == 2
                         ? std::lround(std::floor(x[1] / side)) - L.k0
                         : 0;
      if (a < 0 || a >= L.per_axis || b < 0 || b >= L.per_axis) return;
      const std::size_t flat =
          sc.dimension == 1
              ? static_cast<std::size_t>(a)
              : static_cast<std::size_t>(a) * L.per_axis +
                    static_cast<std::size_t>(b);
      const double sq = L.value[flat];
      g.value[i] = sq == 0.0 ? 0.0 : std::exp2(v * ax[i]) * scale * sq;
    });
    fam.weight.push_back(1.0);
    fam.member.push_back(std::move(g));
  }
  if (fam.member.empty()) return 0.0;
  return mixed_norm(fam, p, q);
}

}  // namespace htl
