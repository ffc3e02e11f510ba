#include "htl/varexp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "htl/errors.hpp"

namespace htl {

namespace {

bool same_geometry(const BoxGrid& a, const BoxGrid& b) {
  return a.dimension == b.dimension && a.halfwidth == b.halfwidth &&
         a.points_per_axis == b.points_per_axis;
}

double norm2(int dim, Point z) {
  double r2 = z[0] * z[0];
  if (dim == 2) r2 += z[1] * z[1];
  return std::sqrt(r2);
}

// (1+u)^{-R}; the audits use small integer R in hot loops
double decay_pow(double one_plus_u, double R) {
  if (R == 2.0) return 1.0 / (one_plus_u * one_plus_u);
  if (R == 3.0) return 1.0 / (one_plus_u * one_plus_u * one_plus_u);
  return std::pow(one_plus_u, -R);
}

}  // namespace

ExponentField ExponentField::constant(double c) {
  if (!std::isfinite(c)) throw std::invalid_argument("exponent: non-finite");
  ExponentField f;
  f.kind_ = Kind::kConstant;
  f.a_ = c;
  f.min_ = f.max_ = c;
  return f;
}

ExponentField ExponentField::affine_clamped(double a, double b, double lo,
                                            double hi) {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(lo) ||
      !std::isfinite(hi) || lo > hi)
    throw std::invalid_argument("exponent: bad affine parameters");
  ExponentField f;
  f.kind_ = Kind::kAffineClamped;
  f.a_ = a;
  f.b_ = b;
  f.lo_ = lo;
  f.hi_ = hi;
  if (b == 0.0) {
    f.min_ = f.max_ = std::clamp(a, lo, hi);
  } else {
    f.min_ = lo;
    f.max_ = hi;
  }
  return f;
}

ExponentField ExponentField::grid_sampled(std::shared_ptr<const BoxGrid> grid,
                                          std::vector<double> values) {
  if (!grid || values.size() != grid->size())
    throw std::invalid_argument("exponent: sample count mismatch");
  for (double v : values)
    if (!std::isfinite(v))
      throw std::invalid_argument("exponent: non-finite sample");
  ExponentField f;
  f.kind_ = Kind::kGridSampled;
  f.grid_ = std::move(grid);
  f.values_ = std::move(values);
  const auto [lo, hi] =
      std::minmax_element(f.values_.begin(), f.values_.end());
  f.min_ = *lo;
  f.max_ = *hi;
  return f;
}

double ExponentField::operator()(Point x) const {
  switch (kind_) {
    case Kind::kConstant:
      return a_;
    case Kind::kAffineClamped:
      return std::clamp(a_ + b_ * x[0], lo_, hi_);
    case Kind::kGridSampled: {
      const auto& g = *grid_;
      const double h = 2.0 * g.halfwidth / g.points_per_axis;
      auto cell = [&](double c) {
        const auto i =
            static_cast<long>(std::floor((c + g.halfwidth) / h));
        return static_cast<std::size_t>(
            std::clamp<long>(i, 0, g.points_per_axis - 1));
      };
      std::size_t flat = cell(x[0]);
      if (g.dimension == 2)
        flat = flat * static_cast<std::size_t>(g.points_per_axis) + cell(x[1]);
      return values_[flat];
    }
  }
  return a_;
}

FieldMeta field_meta(const ExponentField& f, const BoxGrid& reference) {
  FieldMeta meta;
  meta.p_minus = f.min();
  meta.p_plus = f.max();

  // Decimated sample lattice; endpoints kept so the boundary shell is real.
  const int P = reference.points_per_axis;
  const int target = reference.dimension == 1 ? 4096 : 64;
  const int stride = std::max(1, P / target);
  std::vector<int> idx;
  for (int i = 0; i < P; i += stride) idx.push_back(i);
  if (idx.back() != P - 1) idx.push_back(P - 1);

  std::vector<Point> pts;
  std::vector<double> val;
  std::vector<bool> boundary;
  if (reference.dimension == 1) {
    for (int i : idx) {
      pts.push_back({reference.axis[i], 0.0});
      val.push_back(f(pts.back()));
      boundary.push_back(i == idx.front() || i == idx.back());
    }
  } else {
    for (int i : idx)
      for (int j : idx) {
        pts.push_back({reference.axis[i], reference.axis[j]});
        val.push_back(f(pts.back()));
        boundary.push_back(i == idx.front() || i == idx.back() ||
                           j == idx.front() || j == idx.back());
      }
  }

  double bsum = 0.0;
  int bcount = 0;
  for (std::size_t i = 0; i < val.size(); ++i)
    if (boundary[i]) {
      bsum += val[i];
      ++bcount;
    }
  meta.p_infinity = bsum / bcount;

  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double r = norm2(reference.dimension, pts[i]);
    meta.clog_infty = std::max(
        meta.clog_infty, std::abs(val[i] - meta.p_infinity) * std::log(M_E + r));
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      const double d = norm2(reference.dimension,
                             {pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]});
      if (d <= 0.0 || d > 2.0) continue;
      meta.clog_local =
          std::max(meta.clog_local,
                   std::abs(val[i] - val[j]) * std::log(M_E + 1.0 / d));
    }
  }
  return meta;
}

namespace {

// Modular with exponent samples precomputed; fixed summation order.
double modular_with(const GridFunction& f, const std::vector<double>& p,
                    double lambda) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.value.size(); ++i) {
    const double a = std::abs(f.value[i]);
    if (a != 0.0) s += std::pow(a / lambda, p[i]);
  }
  return s * f.grid->cell_weight;
}

std::vector<double> sample_exponent(const ExponentField& p, const BoxGrid& g) {
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = p(g.point(i));
  return out;
}

}  // namespace

double luxemburg_modular(const GridFunction& f, const ExponentField& p,
                         double lambda) {
  if (!(lambda > 0.0))
    throw std::domain_error("luxemburg_modular: lambda must be positive");
  return modular_with(f, sample_exponent(p, *f.grid), lambda);
}

double luxemburg_norm(const GridFunction& f, const ExponentField& p) {
  if (!(p.min() > 0.0))
    throw std::domain_error("luxemburg_norm: exponent must be positive");
  bool all_zero = true;
  for (double v : f.value) {
    if (!std::isfinite(v))
      throw std::invalid_argument("luxemburg_norm: non-finite sample");
    if (v != 0.0) all_zero = false;
  }
  if (all_zero) return 0.0;

  const auto pe = sample_exponent(p, *f.grid);
  double la = std::log(1e-12), lb = std::log(1e12);
  if (modular_with(f, pe, std::exp(lb)) > 1.0)
    throw accuracy_error("luxemburg_norm: norm exceeds the upper bracket");
  if (modular_with(f, pe, std::exp(la)) < 1.0)
    throw accuracy_error("luxemburg_norm: norm below the lower bracket");
  for (int it = 0; it < 80 && lb - la > 1e-10; ++it) {
    const double lm = 0.5 * (la + lb);
    (modular_with(f, pe, std::exp(lm)) > 1.0 ? la : lb) = lm;
  }
  return std::exp(0.5 * (la + lb));
}

double mixed_norm(const LevelFamily& fam, const ExponentField& p,
                  const ExponentField& q) {
  if (fam.member.empty())
    throw std::invalid_argument("mixed_norm: empty family");
  if (fam.weight.size() != fam.member.size())
    throw std::invalid_argument("mixed_norm: weight count mismatch");
  for (double w : fam.weight)
    if (!(w > 0.0)) throw std::invalid_argument("mixed_norm: weights must be positive");
  const auto& g = *fam.member.front().grid;
  for (const auto& m : fam.member)
    if (!same_geometry(*m.grid, g))
      throw std::invalid_argument("mixed_norm: members on different grids");
  if (!(q.min() > 0.0))
    throw std::domain_error("mixed_norm: inner exponent must be positive");

  GridFunction inner(fam.member.front().grid);
  parallel_for(g.size(), [&](std::size_t i) {
    const double qx = q(g.point(i));
    double s = 0.0;
    for (std::size_t v = 0; v < fam.member.size(); ++v) {
      const double a = std::abs(fam.member[v].value[i]);
      if (a != 0.0) s += fam.weight[v] * std::pow(a, qx);
    }
    inner.value[i] = s == 0.0 ? 0.0 : std::pow(s, 1.0 / qx);
  });
  return luxemburg_norm(inner, p);
}

double eta_kernel(int dimension, int v, double R, Point z) {
  if (dimension != 1 && dimension != 2)
    throw std::invalid_argument("eta_kernel: dimension must be 1 or 2");
  if (!(R > dimension))
    throw std::domain_error("eta_kernel: need R > n for integrability");
  const double scale = std::exp2(v);
  return std::pow(scale, dimension) *
         std::pow(1.0 + scale * norm2(dimension, z), -R);
}

GridFunction eta_convolve(int v, double R, const GridFunction& f) {
  const auto& g = *f.grid;
  if (!(R > g.dimension))
    throw std::domain_error("eta_convolve: need R > n for integrability");
  const double scale = std::exp2(v);
  const double amp = std::pow(scale, g.dimension);
  GridFunction out(f.grid);
  parallel_for(g.size(), [&](std::size_t i) {
    const Point xi = g.point(i);
    double s = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const Point xj = g.point(j);
      const double d =
          norm2(g.dimension, {xi[0] - xj[0], xi[1] - xj[1]});
      s += decay_pow(1.0 + scale * d, R) * f.value[j];
    }
    out.value[i] = amp * s * g.cell_weight;
  });
  return out;
}

double eta_convolve_at(int v, double R, const GridFunction& f, Point x) {
  const auto& g = *f.grid;
  if (!(R > g.dimension))
    throw std::domain_error("eta_convolve_at: need R > n for integrability");
  const double scale = std::exp2(v);
  const double amp = std::pow(scale, g.dimension);
  double s = 0.0;
  for (std::size_t j = 0; j < g.size(); ++j) {
    const Point xj = g.point(j);
    const double d = norm2(g.dimension, {x[0] - xj[0], x[1] - xj[1]});
    s += decay_pow(1.0 + scale * d, R) * f.value[j];
  }
  return amp * s * g.cell_weight;
}

double eta_tail_mass(int dimension, int v, double R, double dist) {
  if (!(R > dimension))
    throw std::domain_error("eta_tail_mass: need R > n");
  if (dist < 0.0) throw std::domain_error("eta_tail_mass: negative radius");
  const double U = std::exp2(v) * dist;
  if (dimension == 1) return 2.0 * std::pow(1.0 + U, 1.0 - R) / (R - 1.0);
  return 2.0 * M_PI * (std::pow(1.0 + U, 2.0 - R) / (R - 2.0) -
                       std::pow(1.0 + U, 1.0 - R) / (R - 1.0));
}

namespace {

double bump_value(int dim, Point x, const std::vector<double>& par) {
  // par packs 5 bumps of (c, mu..., sigma)
  const int stride = 2 + dim;
  double s = 0.0;
  for (int b = 0; b < 5; ++b) {
    const double c = par[b * stride];
    double e = 0.0;
    for (int i = 0; i < dim; ++i) {
      const double d = x[i] - par[b * stride + 1 + i];
      e += d * d;
    }
    const double sigma = par[b * stride + 1 + dim];
    s += c * std::exp(-e / (2.0 * sigma * sigma));
  }
  return s;
}

}  // namespace

ConvolutionAuditReport convolution_inequality_audit(int dimension, int trials,
                                                    unsigned seed) {
  if (dimension != 1 && dimension != 2)
    throw std::invalid_argument("convolution audit: dimension must be 1 or 2");
  if (trials < 2)
    throw std::invalid_argument("convolution audit: need at least 2 trials");
  const auto grid = dimension == 1 ? make_box_grid(1, 8.0, 512)
                                   : make_box_grid(2, 6.0, 48);
  const double R = dimension + 1.0;
  const int levels = 4;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  auto draw_field = [&]() {
    const double lo = 1.2 + 0.4 * u01(rng);
    const double hi = 2.0 + 1.5 * u01(rng);
    const double a = lo + (hi - lo) * u01(rng);
    const double b = 0.6 * (u01(rng) - 0.5);
    return ExponentField::affine_clamped(a, b, lo, hi);
  };

  ConvolutionAuditReport rep;
  for (int trial = 0; trial < trials; ++trial) {
    const ExponentField p = draw_field();
    const ExponentField q = draw_field();
    LevelFamily base, smoothed;
    for (int v = 0; v < levels; ++v) {
      std::vector<double> par;
      for (int b = 0; b < 5; ++b) {
        par.push_back(2.0 * u01(rng) - 1.0);
        for (int i = 0; i < dimension; ++i)
          par.push_back(10.0 * u01(rng) - 5.0);
        par.push_back(0.3 + 1.2 * u01(rng));
      }
      GridFunction f(grid);
      for (std::size_t i = 0; i < f.value.size(); ++i)
        f.value[i] = bump_value(dimension, grid->point(i), par);
      base.weight.push_back(1.0);
      base.member.push_back(f);
      smoothed.weight.push_back(1.0);
      smoothed.member.push_back(eta_convolve(v, R, f));
    }
    const double den = mixed_norm(base, p, q);
    const double num = mixed_norm(smoothed, p, q);
    rep.ratio.push_back(num / den);
  }
  rep.c_emp = *std::max_element(rep.ratio.begin(), rep.ratio.end());
  rep.c_emp_half = *std::max_element(
      rep.ratio.begin(), rep.ratio.begin() + (rep.ratio.size() + 1) / 2);
  rep.stable = std::abs(rep.c_emp - rep.c_emp_half) <= 0.1 * rep.c_emp;
  return rep;
}

DiscreteKernelAuditReport discrete_kernel_audit(int dimension, int trials,
                                                unsigned seed) {
  if (dimension != 1 && dimension != 2)
    throw std::invalid_argument("discrete kernel audit: dimension must be 1 or 2");
  if (trials < 1)
    throw std::invalid_argument("discrete kernel audit: need at least 1 trial");
  const auto grid = dimension == 1 ? make_box_grid(1, 8.0, 512)
                                   : make_box_grid(2, 4.0, 64);
  const double R = dimension + 1.0;
  const std::vector<int> vs = dimension == 1 ? std::vector<int>{2, 3, 4}
                                             : std::vector<int>{1, 2};
  const std::vector<int> js = dimension == 1 ? std::vector<int>{0, 2, 4, 6}
                                             : std::vector<int>{0, 3};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> amp(0.1, 1.0);

  DiscreteKernelAuditReport rep;
  for (int v : vs) {
    // cubes 2^{-v}([0,1)+k) covering [-X, X); corner x_Q = 2^{-v} k
    const double side = std::exp2(-v);
    const long per_axis = std::lround(2.0 * grid->halfwidth / side);
    const long k0 = -per_axis / 2;
    for (int j : js) {
      double c_emp = 0.0;
      for (int trial = 0; trial < trials; ++trial) {
        const std::size_t cube_count =
            dimension == 1 ? per_axis : per_axis * per_axis;
        std::vector<double> s(cube_count);
        for (auto& x : s) x = amp(rng);

        auto cube_of = [&](Point x) {
          const long a = std::lround(std::floor(x[0] / side)) - k0;
          if (dimension == 1) return static_cast<std::size_t>(a);
          const long b = std::lround(std::floor(x[1] / side)) - k0;
          return static_cast<std::size_t>(a * per_axis + b);
        };
        GridFunction g(grid);
        for (std::size_t i = 0; i < g.value.size(); ++i)
          g.value[i] = s[cube_of(grid->point(i))];

        const auto conv = eta_convolve(v, R, g);
        const double factor =
            std::max(1.0, std::pow(2.0, static_cast<double>(v - j) * R));
        const double fine = std::exp2(std::min(v, j));

        std::vector<double> lhs(grid->size(), 0.0);
        parallel_for(grid->size(), [&](std::size_t i) {
          const Point x = grid->point(i);
          double acc = 0.0;
          for (std::size_t c = 0; c < cube_count; ++c) {
            Point xq;
            if (dimension == 1) {
              xq = {side * (k0 + static_cast<long>(c)), 0.0};
            } else {
              const long a = static_cast<long>(c) / per_axis;
              const long b = static_cast<long>(c) % per_axis;
              xq = {side * (k0 + a), side * (k0 + b)};
            }
            const double d =
                norm2(dimension, {x[0] - xq[0], x[1] - xq[1]});
            acc += s[c] * decay_pow(1.0 + fine * d, R);
          }
          lhs[i] = acc;
        });
        for (std::size_t i = 0; i < lhs.size(); ++i)
          c_emp = std::max(c_emp, lhs[i] / (factor * conv.value[i]));
      }
      rep.rows.push_back({v, j, c_emp});
      rep.sup_c = std::max(rep.sup_c, c_emp);
    }
  }
  return rep;
}

}  // namespace htl
