#include "htl/hermite.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "htl/errors.hpp"

namespace htl {

namespace {
// pi^{-1/4}
constexpr double kH0Scale = 0.7511255444649425;
}  // namespace

void hermite_column(int cap, double t, double* out) {
  if (cap < 0 || cap > kOrderCap)
    throw std::out_of_range("hermite_column: order cap outside [0, " +
                            std::to_string(kOrderCap) + "]");
  if (!(t * t < 1416.0))
    throw std::domain_error(
        "hermite_column: |x| too large, exp(-x^2/2) underflows");
  out[0] = kH0Scale * std::exp(-0.5 * t * t);
  if (cap == 0) return;
  out[1] = t * std::sqrt(2.0) * out[0];
  for (int m = 1; m < cap; ++m)
    out[m + 1] = t * std::sqrt(2.0 / (m + 1)) * out[m] -
                 std::sqrt(static_cast<double>(m) / (m + 1)) * out[m - 1];
}

double eval_hermite_1d(int order, double t) {
  if (order < 0 || order > kOrderCap)
    throw std::out_of_range("eval_hermite_1d: order outside [0, " +
                            std::to_string(kOrderCap) + "]");
  std::vector<double> col(order + 1);
  hermite_column(order, t, col.data());
  return col[order];
}

double eval_hermite(const MultiIndex& alpha, Point x) {
  double v = eval_hermite_1d(alpha[0], x[0]);
  if (alpha.dimension() == 2) v *= eval_hermite_1d(alpha[1], x[1]);
  return v;
}

GaussHermiteRule GaussHermiteRule::make(int size) {
  if (size < 1 || size > kOrderCap)
    throw std::invalid_argument("GaussHermiteRule: size outside [1, cap]");
  GaussHermiteRule r;
  r.node.resize(size);
  r.weight.resize(size);
  std::vector<double> col(size + 1);
  const int half = (size + 1) / 2;
  std::vector<double> zs(half);
  for (int j = 0; j < half; ++j) {
    // Initial guess for the j-th largest root (Stroud-Secrest asymptotics,
    // then linear extrapolation from earlier roots), Newton refinement with
    // h_size'(t) = sqrt(2 size) h_{size-1}(t) - t h_size(t).
    double z;
    if (j == 0) {
      z = std::sqrt(2.0 * size + 1.0) -
          1.85575 * std::pow(2.0 * size + 1.0, -1.0 / 6.0);
    } else if (j == 1) {
      z = zs[0] - 1.14 * std::pow(static_cast<double>(size), 0.426) / zs[0];
    } else if (j == 2) {
      z = 1.86 * zs[1] - 0.86 * zs[0];
    } else if (j == 3) {
      z = 1.91 * zs[2] - 0.91 * zs[1];
    } else {
      z = 2.0 * zs[j - 1] - zs[j - 2];
    }
    bool done = false;
    for (int it = 0; it < 200; ++it) {
      hermite_column(size, z, col.data());
      const double dp = std::sqrt(2.0 * size) * col[size - 1] - z * col[size];
      const double dz = col[size] / dp;
      z -= dz;
      if (std::abs(dz) <= 1e-15 * std::max(1.0, std::abs(z))) {
        done = true;
        break;
      }
    }
    if (!done) throw accuracy_error("GaussHermiteRule: Newton stalled");
    if (size % 2 == 1 && j == half - 1) z = 0.0;
    zs[j] = z;
    hermite_column(size, z, col.data());
    const double w = 1.0 / (size * col[size - 1] * col[size - 1]);
    r.node[size - 1 - j] = z;
    r.node[j] = -z;
    r.weight[size - 1 - j] = w;
    r.weight[j] = w;
  }
  return r;
}

double HermiteExpansion::l2_norm() const {
  double s = 0.0;
  for (double v : c_) s += v * v;
  return std::sqrt(s);
}

HermiteExpansion HermiteExpansion::mapped(
    const std::function<double(double)>& factor) const {
  HermiteExpansion out(dimension(), degree_cap());
  for (std::size_t i = 0; i < c_.size(); ++i)
    out.c_[i] = factor(eigenvalue(table_.at(i))) * c_[i];
  return out;
}

HermiteExpansion& HermiteExpansion::operator+=(const HermiteExpansion& other) {
  if (other.dimension() != dimension() || other.degree_cap() != degree_cap())
    throw std::invalid_argument("HermiteExpansion: shape mismatch");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += other.c_[i];
  return *this;
}

HermiteExpansion& HermiteExpansion::operator-=(const HermiteExpansion& other) {
  if (other.dimension() != dimension() || other.degree_cap() != degree_cap())
    throw std::invalid_argument("HermiteExpansion: shape mismatch");
  for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= other.c_[i];
  return *this;
}

HermiteExpansion& HermiteExpansion::operator*=(double s) {
  for (double& v : c_) v *= s;
  return *this;
}

SamplingScheme SamplingScheme::defaults(int dimension) {
  SamplingScheme s;
  s.dimension = dimension;
  if (dimension == 2) {
    s.degree_cap = 64;
    s.points_per_axis = 128;
  }
  return s;
}

SamplingScheme SamplingScheme::refined(double factor) const {
  if (!(factor >= 1.0))
    throw std::invalid_argument("SamplingScheme: refine factor must be >= 1");
  SamplingScheme s = *this;
  auto scale = [factor](int v) {
    return static_cast<int>(std::lround(v * factor));
  };
  s.points_per_axis = scale(points_per_axis);
  s.quadrature_size = scale(quadrature_size == 0 ? degree_cap + 1 : quadrature_size);
  s.nodes_per_level = scale(nodes_per_level);
  s.sup_samples_per_axis = scale(sup_samples_per_axis);
  return s;
}

void SamplingScheme::validate() const {
  if (dimension != 1 && dimension != 2)
    throw std::invalid_argument("SamplingScheme: dimension must be 1 or 2");
  if (degree_cap < 0 || degree_cap > kOrderCap)
    throw std::invalid_argument("SamplingScheme: degree_cap outside [0, cap]");
  if (!(box_halfwidth > 0.0))
    throw std::invalid_argument("SamplingScheme: box_halfwidth must be positive");
  if (points_per_axis < 2)
    throw std::invalid_argument("SamplingScheme: points_per_axis must be >= 2");
  if (quadrature_size != 0 && quadrature_size <= degree_cap)
    throw std::invalid_argument(
        "SamplingScheme: quadrature_size must exceed degree_cap (or be 0 = auto)");
  if (time_levels < 1 || nodes_per_level < 1)
    throw std::invalid_argument("SamplingScheme: time grid must be nonempty");
  if (sup_samples_per_axis < 1)
    throw std::invalid_argument("SamplingScheme: sup_samples_per_axis must be >= 1");
}

namespace {
std::vector<double> axis_table(const std::vector<double>& points, int cap) {
  std::vector<double> h(points.size() * (cap + 1));
  parallel_for(points.size(), [&](std::size_t i) {
    hermite_column(cap, points[i], h.data() + i * (cap + 1));
  });
  return h;
}
}  // namespace

SchemeContext::SchemeContext(const SamplingScheme& s) : scheme_(s) {
  scheme_.validate();
  grid_ = make_box_grid(s.dimension, s.box_halfwidth, s.points_per_axis);
  const int q = s.quadrature_size == 0 ? s.degree_cap + 1 : s.quadrature_size;
  rule_ = GaussHermiteRule::make(q);
  times_ = TimeGrid::make(s.time_levels, s.nodes_per_level);
  h_grid_ = axis_table(grid_->axis, s.degree_cap);
  h_rule_ = axis_table(rule_.node, s.degree_cap);
}

HermiteExpansion expand(const std::function<double(Point)>& f,
                        const SchemeContext& ctx) {
  const auto& rule = ctx.rule();
  const int cap = ctx.degree_cap();
  const int dim = ctx.scheme().dimension;
  const std::size_t q = rule.node.size();
  const std::size_t w = static_cast<std::size_t>(cap) + 1;
  const auto& h = ctx.axis_values_at_rule();
  HermiteExpansion e(dim, cap);

  if (dim == 1) {
    std::vector<double> sample(q);
    for (std::size_t j = 0; j < q; ++j) {
      sample[j] = f({rule.node[j], 0.0});
      if (!std::isfinite(sample[j]))
        throw std::invalid_argument("expand: non-finite sample");
      sample[j] *= rule.weight[j];
    }
    for (std::size_t m = 0; m < w; ++m) {
      double s = 0.0;
      for (std::size_t j = 0; j < q; ++j) s += sample[j] * h[j * w + m];
      e.slot(m) = s;
    }
    return e;
  }

  // Separable contraction: first over the second axis, then the first.
  std::vector<double> partial(q * w, 0.0);
  parallel_for(q, [&](std::size_t j) {
    std::vector<double> row(q);
    for (std::size_t k = 0; k < q; ++k) {
      row[k] = f({rule.node[j], rule.node[k]});
      if (!std::isfinite(row[k]))
        throw std::invalid_argument("expand: non-finite sample");
      row[k] *= rule.weight[k];
    }
    for (std::size_t b = 0; b < w; ++b) {
      double s = 0.0;
      for (std::size_t k = 0; k < q; ++k) s += row[k] * h[k * w + b];
      partial[j * w + b] = s;
    }
  });
  for (std::size_t i = 0; i < e.size(); ++i) {
    const MultiIndex a = e.index_at(i);
    double s = 0.0;
    for (std::size_t j = 0; j < q; ++j)
      s += rule.weight[j] * h[j * w + a[0]] * partial[j * w + a[1]];
    e.slot(i) = s;
  }
  return e;
}

std::vector<double> synthesize(const HermiteExpansion& e,
                               std::span<const Point> points) {
  const int cap = e.degree_cap();
  const std::size_t w = static_cast<std::size_t>(cap) + 1;
  std::vector<double> out(points.size(), 0.0);
  parallel_for(points.size(), [&](std::size_t i) {
    std::vector<double> cx(w), cy;
    hermite_column(cap, points[i][0], cx.data());
    double s = 0.0;
    if (e.dimension() == 1) {
      for (std::size_t m = 0; m < w; ++m) s += e.slot(m) * cx[m];
    } else {
      cy.resize(w);
      hermite_column(cap, points[i][1], cy.data());
      for (std::size_t k = 0; k < e.size(); ++k) {
        const MultiIndex a = e.index_at(k);
        s += e.slot(k) * cx[a[0]] * cy[a[1]];
      }
    }
    out[i] = s;
  });
  return out;
}

GridFunction synthesize_on_grid(const HermiteExpansion& e,
                                const SchemeContext& ctx) {
  if (e.dimension() != ctx.scheme().dimension ||
      e.degree_cap() != ctx.degree_cap())
    throw std::invalid_argument("synthesize_on_grid: expansion does not match scheme");
  const auto& grid = *ctx.grid();
  const auto& h = ctx.axis_values_at_grid();
  const std::size_t p = grid.axis.size();
  const std::size_t w = static_cast<std::size_t>(ctx.degree_cap()) + 1;
  GridFunction out(ctx.grid());

  if (e.dimension() == 1) {
    parallel_for(p, [&](std::size_t i) {
      double s = 0.0;
      for (std::size_t m = 0; m < w; ++m) s += e.slot(m) * h[i * w + m];
      out.value[i] = s;
    });
    return out;
  }

  // f(x_i, y_j) = sum_a h_{a0}(x_i) [sum computed once per (a0, j)].
  std::vector<double> partial(w * p, 0.0);
  for (std::size_t k = 0; k < e.size(); ++k) {
    const MultiIndex a = e.index_at(k);
    const double c = e.slot(k);
    if (c == 0.0) continue;
    double* row = partial.data() + static_cast<std::size_t>(a[0]) * p;
    const double* hy = h.data();
    for (std::size_t j = 0; j < p; ++j)
      row[j] += c * hy[j * w + a[1]];
  }
  parallel_for(p, [&](std::size_t i) {
    for (std::size_t j = 0; j < p; ++j) {
      double s = 0.0;
      for (std::size_t a0 = 0; a0 < w; ++a0)
        s += h[i * w + a0] * partial[a0 * p + j];
      out.value[i * p + j] = s;
    }
  });
  return out;
}

}  // namespace htl
