#include "htl/atoms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

#include "htl/errors.hpp"

namespace htl {

namespace {

// Dense polynomials on [-1, 1], ascending coefficients.

double horner(const std::vector<double>& c, double u) {
  double v = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) v = v * u + c[i];
  return v;
}

std::vector<double> poly_mul(const std::vector<double>& a,
                             const std::vector<double>& b) {
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

std::vector<double> poly_diff(const std::vector<double>& a) {
  if (a.size() <= 1) return {0.0};
  std::vector<double> out(a.size() - 1);
  for (std::size_t i = 1; i < a.size(); ++i) out[i - 1] = i * a[i];
  return out;
}

// int_{-1}^{1} u^r du
double plain_moment(std::size_t r) {
  return r % 2 == 1 ? 0.0 : 2.0 / static_cast<double>(r + 1);
}

// int_{-1}^{1} u^r (1-u^2)^s du, a beta ratio for even r.
double bump_moment(int r, int s) {
  if (r % 2 == 1) return 0.0;
  const double t = 0.5 * r;
  return std::exp(std::lgamma(t + 0.5) + std::lgamma(s + 1.0) -
                  std::lgamma(t + s + 1.5));
}

double dot_weighted(const std::vector<double>& f, const std::vector<double>& g,
                    int s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f[i] == 0.0) continue;
    for (std::size_t j = 0; j < g.size(); ++j)
      acc += f[i] * g[j] * bump_moment(static_cast<int>(i + j), s);
  }
  return acc;
}

// The monomial u^{K+1} minus its projection, under the weight (1-u^2)^s,
// onto span{1, ..., u^K}: all weighted moments of order <= K vanish.
std::vector<double> top_orthogonal_monomial(int K, int s) {
  std::vector<std::vector<double>> basis;
  for (int r = 0; r <= K + 1; ++r) {
    std::vector<double> v(static_cast<std::size_t>(r) + 1, 0.0);
    v[static_cast<std::size_t>(r)] = 1.0;
    const double before = dot_weighted(v, v, s);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& e : basis) {
        const double c = dot_weighted(v, e, s);
        for (std::size_t i = 0; i < e.size(); ++i) v[i] -= c * e[i];
      }
    }
    const double after = dot_weighted(v, v, s);
    if (!(after > 1e-24 * before))
      throw accuracy_error(
          "make_smooth_atom: moment orthogonalization degenerated");
    if (r == K + 1) return v;
    const double inv = 1.0 / std::sqrt(after);
    for (auto& x : v) x *= inv;
    basis.push_back(std::move(v));
  }
  return {};
}

// Nodes resolving h_cap over an interval of the given width; the local
// wavelength is bounded below by 2 pi / sqrt(2 cap + n).
int support_rule_size(double width, int cap, int dim) {
  const double waves = 0.8 * width * std::sqrt(2.0 * cap + dim);
  return std::max(6, static_cast<int>(std::ceil(waves)) + 6);
}

// 2^{|gamma| v} |Q|^{1/2} eta_{v,R}(x - x_Q) for |x - x_Q| = dist.
double decay_envelope(int order, int v, int dim, int R, double dist) {
  const double pref = std::exp2(order * v + 0.5 * dim * v);
  return pref * std::pow(1.0 + std::exp2(v) * dist, -static_cast<double>(R));
}

// Centered finite-difference stencils of fourth order, offsets and weights.
struct Stencil {
  std::vector<int> offset;
  std::vector<double> coeff;
};

const Stencil& fd_stencil(int k) {
  static const std::vector<Stencil> table = {
      {{0}, {1.0}},
      {{-2, -1, 1, 2}, {1.0 / 12, -2.0 / 3, 2.0 / 3, -1.0 / 12}},
      {{-2, -1, 0, 1, 2},
       {-1.0 / 12, 4.0 / 3, -5.0 / 2, 4.0 / 3, -1.0 / 12}},
      {{-3, -2, -1, 1, 2, 3},
       {1.0 / 8, -1.0, 13.0 / 8, -13.0 / 8, 1.0, -1.0 / 8}},
      {{-3, -2, -1, 0, 1, 2, 3},
       {-1.0 / 6, 2.0, -13.0 / 2, 28.0 / 3, -13.0 / 2, 2.0, -1.0 / 6}}};
  return table.at(static_cast<std::size_t>(k));
}

}  // namespace

double SmoothAtom::operator()(Point x) const {
  double prod = amplitude_;
  for (int a = 0; a < dim_; ++a) {
    const double u = (x[static_cast<std::size_t>(a)] - center_[a]) / halfwidth_;
    if (std::abs(u) >= 1.0) return 0.0;
    prod *= horner(poly_, u);
  }
  return prod;
}

double SmoothAtom::operator()(double x) const { return (*this)(Point{x, 0.0}); }

HermiteExpansion SmoothAtom::expanded(const SchemeContext& ctx,
                                      double* leak) const {
  const SamplingScheme& sc = ctx.scheme();
  if (sc.dimension != dim_)
    throw std::invalid_argument("SmoothAtom::expanded: dimension mismatch");
  const int cap = sc.degree_cap;
  const int g = support_rule_size(2.0 * halfwidth_, cap, dim_);
  const GaussLegendreRule gl = GaussLegendreRule::make(g);

  std::vector<double> col(static_cast<std::size_t>(cap) + 1);
  std::vector<std::vector<double>> axis_dot(
      static_cast<std::size_t>(dim_),
      std::vector<double>(static_cast<std::size_t>(cap) + 1, 0.0));
  for (int a = 0; a < dim_; ++a) {
    for (int i = 0; i < g; ++i) {
      const double xi = gl.node[static_cast<std::size_t>(i)];
      const double x = center_[a] + halfwidth_ * xi;
      const double w = gl.weight[static_cast<std::size_t>(i)] * halfwidth_;
      const double qv = horner(poly_, xi);
      hermite_column(cap, x, col.data());
      for (int d = 0; d <= cap; ++d)
        axis_dot[static_cast<std::size_t>(a)][static_cast<std::size_t>(d)] +=
            w * qv * col[static_cast<std::size_t>(d)];
    }
  }

  HermiteExpansion e(dim_, cap);
  for (std::size_t i = 0; i < e.size(); ++i) {
    const MultiIndex idx = e.index_at(i);
    double c = amplitude_ * axis_dot[0][static_cast<std::size_t>(idx[0])];
    if (dim_ == 2) c *= axis_dot[1][static_cast<std::size_t>(idx[1])];
    e.slot(i) = c;
  }

  if (leak) {
    const auto qq = poly_mul(poly_, poly_);
    double axis_mass = 0.0;
    for (std::size_t r = 0; r < qq.size(); ++r)
      axis_mass += qq[r] * plain_moment(r);
    axis_mass *= halfwidth_;
    const double total = amplitude_ * amplitude_ *
                         (dim_ == 1 ? axis_mass : axis_mass * axis_mass);
    const double captured = e.l2_norm() * e.l2_norm();
    *leak = total > 0.0 ? std::max(0.0, 1.0 - captured / total) : 0.0;
  }
  return e;
}

SmoothAtom make_smooth_atom(const DyadicCube& cube, int K, int L,
                            const SamplingScheme& scheme, int decay_exponent) {
  scheme.validate();
  if (K < 0 || L < 0)
    throw std::domain_error("make_smooth_atom: orders must be nonnegative");
  if (L > 4)
    throw std::invalid_argument(
        "make_smooth_atom: smoothness order above 4 is not supported");
  if (cube.v < 0)
    throw std::domain_error("make_smooth_atom: level must be nonnegative");
  if (decay_exponent < 0)
    throw std::domain_error(
        "make_smooth_atom: decay exponent must be positive");

  SmoothAtom a;
  a.cube_ = cube;
  a.dim_ = scheme.dimension;
  a.K_ = K;
  a.L_ = L;
  a.m_tilde_ =
      decay_exponent == 0 ? K + 2 * scheme.dimension + 1 : decay_exponent;
  const double side = cube.side();
  const Point corner = cube.corner();
  for (int i = 0; i < a.dim_; ++i)
    a.center_[i] = corner[static_cast<std::size_t>(i)] + 0.5 * side;
  a.halfwidth_ = 1.5 * side;

  // bump (1-u^2)^{L+3}: L+2 continuous derivatives across the support edge
  const int s = L + 3;
  std::vector<double> bump(static_cast<std::size_t>(2 * s) + 1, 0.0);
  double binom = 1.0;
  for (int j = 0; j <= s; ++j) {
    bump[static_cast<std::size_t>(2 * j)] = (j % 2 == 0 ? 1.0 : -1.0) * binom;
    binom = binom * (s - j) / (j + 1.0);
  }
  a.poly_ = cube.v >= 1 ? poly_mul(bump, top_orthogonal_monomial(K, s)) : bump;

  // largest derivative-to-envelope ratio of the unscaled profile
  std::vector<std::vector<double>> deriv(static_cast<std::size_t>(L) + 1);
  deriv[0] = a.poly_;
  for (int k = 1; k <= L; ++k)
    deriv[static_cast<std::size_t>(k)] =
        poly_diff(deriv[static_cast<std::size_t>(k) - 1]);

  double worst = 0.0;
  if (a.dim_ == 1) {
    const int n_scan = 4001;
    for (int i = 0; i < n_scan; ++i) {
      const double u = -1.0 + 2.0 * i / (n_scan - 1.0);
      const double x = a.center_[0] + a.halfwidth_ * u;
      const double dist = std::abs(x - corner[0]);
      for (int k = 0; k <= L; ++k) {
        const double val =
            std::abs(horner(deriv[static_cast<std::size_t>(k)], u)) *
            std::pow(a.halfwidth_, -k);
        worst = std::max(
            val / decay_envelope(k, cube.v, 1, a.m_tilde_, dist), worst);
      }
    }
  } else {
    const int n_scan = 201;
    std::vector<double> u(n_scan), dv(static_cast<std::size_t>(L) + 1);
    for (int i = 0; i < n_scan; ++i) u[i] = -1.0 + 2.0 * i / (n_scan - 1.0);
    for (int i = 0; i < n_scan; ++i) {
      const double x0 = a.center_[0] + a.halfwidth_ * u[i];
      for (int j = 0; j < n_scan; ++j) {
        const double x1 = a.center_[1] + a.halfwidth_ * u[j];
        const double dist = std::hypot(x0 - corner[0], x1 - corner[1]);
        for (int k1 = 0; k1 <= L; ++k1) {
          const double f1 =
              horner(deriv[static_cast<std::size_t>(k1)], u[i]) *
              std::pow(a.halfwidth_, -k1);
          for (int k2 = 0; k1 + k2 <= L; ++k2) {
            const double f2 =
                horner(deriv[static_cast<std::size_t>(k2)], u[j]) *
                std::pow(a.halfwidth_, -k2);
            worst = std::max(std::abs(f1 * f2) /
                                 decay_envelope(k1 + k2, cube.v, 2,
                                                a.m_tilde_, dist),
                             worst);
          }
        }
      }
    }
  }
  if (!(worst > 0.0))
    throw accuracy_error("make_smooth_atom: profile vanished identically");
  a.amplitude_ = 1.0 / worst;

  const auto grid =
      make_box_grid(a.dim_, scheme.box_halfwidth, scheme.points_per_axis);
  a.values_.resize(grid->size());
  for (std::size_t flat = 0; flat < grid->size(); ++flat)
    a.values_[flat] = a(grid->point(flat));
  return a;
}

AtomCheckReport validate_atom(const SmoothAtom& atom) {
  AtomCheckReport rep;
  const int dim = atom.dimension();
  const int K = atom.moment_order();
  const int L = atom.smoothness_order();
  const DyadicCube& cube = atom.cube();
  const double side = cube.side();
  const Point corner = cube.corner();
  Point center = corner;
  for (int i = 0; i < dim; ++i) center[static_cast<std::size_t>(i)] += 0.5 * side;
  const double hw = 1.5 * side;

  // support: nothing may survive outside 3Q
  for (const double f : {1.0 + 1.0 / 64, 1.25, 2.0, 4.0}) {
    if (dim == 1) {
      for (const double sgn : {-1.0, 1.0})
        rep.support_spill = std::max(
            rep.support_spill, std::abs(atom(center[0] + sgn * f * hw)));
    } else {
      for (int sx = -1; sx <= 1; ++sx) {
        for (int sy = -1; sy <= 1; ++sy) {
          if (sx == 0 && sy == 0) continue;
          Point x = center;
          if (sx != 0) x[0] += sx * f * hw;
          if (sy != 0) x[1] += sy * f * hw;
          rep.support_spill = std::max(rep.support_spill, std::abs(atom(x)));
        }
      }
    }
  }

  // moments by quadrature over the support
  if (cube.v >= 1) {
    const int g = K + 2 * L + 12;
    const GaussLegendreRule gl = GaussLegendreRule::make(g);
    if (dim == 1) {
      for (int j = 0; j <= K; ++j) {
        double acc = 0.0;
        for (int i = 0; i < g; ++i) {
          const double x = center[0] + hw * gl.node[static_cast<std::size_t>(i)];
          acc += gl.weight[static_cast<std::size_t>(i)] * hw * atom(x) *
                 std::pow(x, j);
        }
        rep.moment_worst = std::max(rep.moment_worst, std::abs(acc));
      }
    } else {
      std::vector<double> vals(static_cast<std::size_t>(g) *
                               static_cast<std::size_t>(g));
      for (int i1 = 0; i1 < g; ++i1)
        for (int i2 = 0; i2 < g; ++i2)
          vals[static_cast<std::size_t>(i1) * g + i2] =
              atom(Point{center[0] + hw * gl.node[static_cast<std::size_t>(i1)],
                         center[1] + hw * gl.node[static_cast<std::size_t>(i2)]});
      for (int j1 = 0; j1 <= K; ++j1) {
        for (int j2 = 0; j1 + j2 <= K; ++j2) {
          double acc = 0.0;
          for (int i1 = 0; i1 < g; ++i1) {
            const double x0 = center[0] + hw * gl.node[static_cast<std::size_t>(i1)];
            double inner = 0.0;
            for (int i2 = 0; i2 < g; ++i2) {
              const double x1 =
                  center[1] + hw * gl.node[static_cast<std::size_t>(i2)];
              inner += gl.weight[static_cast<std::size_t>(i2)] *
                       vals[static_cast<std::size_t>(i1) * g + i2] *
                       std::pow(x1, j2);
            }
            acc += gl.weight[static_cast<std::size_t>(i1)] * std::pow(x0, j1) *
                   inner;
          }
          acc *= hw * hw;
          rep.moment_worst = std::max(rep.moment_worst, std::abs(acc));
        }
      }
    }
  }

  // decay by centered finite differences at step side/64
  std::vector<std::pair<int, int>> gammas;
  for (int k1 = 0; k1 <= L; ++k1) {
    if (dim == 1)
      gammas.emplace_back(k1, 0);
    else
      for (int k2 = 0; k1 + k2 <= L; ++k2) gammas.emplace_back(k1, k2);
  }
  const double h = side / 64.0;
  const int n_check = dim == 1 ? 201 : 41;
  for (int i = 0; i < n_check; ++i) {
    for (int j = 0; j < (dim == 1 ? 1 : n_check); ++j) {
      Point x = center;
      x[0] += hw * (-1.05 + 2.1 * i / (n_check - 1.0));
      if (dim == 2) x[1] += hw * (-1.05 + 2.1 * j / (n_check - 1.0));
      const double dist =
          dim == 1 ? std::abs(x[0] - corner[0])
                   : std::hypot(x[0] - corner[0], x[1] - corner[1]);
      for (const auto& [k1, k2] : gammas) {
        const Stencil& s1 = fd_stencil(k1);
        double fd = 0.0;
        if (dim == 1) {
          for (std::size_t t = 0; t < s1.offset.size(); ++t)
            fd += s1.coeff[t] * atom(x[0] + s1.offset[t] * h);
        } else {
          const Stencil& s2 = fd_stencil(k2);
          for (std::size_t t1 = 0; t1 < s1.offset.size(); ++t1)
            for (std::size_t t2 = 0; t2 < s2.offset.size(); ++t2)
              fd += s1.coeff[t1] * s2.coeff[t2] *
                    atom(Point{x[0] + s1.offset[t1] * h,
                               x[1] + s2.offset[t2] * h});
        }
        fd = std::abs(fd) / std::pow(h, k1 + k2);
        const double env =
            decay_envelope(k1 + k2, cube.v, dim, atom.decay_exponent(), dist);
        rep.decay_worst = std::max(rep.decay_worst, fd / env);
      }
    }
  }

  rep.pass = rep.support_spill == 0.0 && rep.moment_worst <= 1e-10 &&
             rep.decay_worst <= 1.005;
  return rep;
}

std::string AtomHeatAuditReport::csv() const {
  std::string out = "t,regime,ratio\n";
  char buf[96];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g\n", r.t, r.regime, r.ratio);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "supremum,0,%.17g\n", sup_small);
  out += buf;
  std::snprintf(buf, sizeof buf, "supremum,1,%.17g\n", sup_large);
  out += buf;
  return out;
}

AtomHeatAuditReport atom_heat_decay_audit(const SmoothAtom& atom, int m,
                                          const SchemeContext& ctx,
                                          int refine) {
  const SamplingScheme& sc = ctx.scheme();
  if (atom.dimension() != sc.dimension)
    throw std::invalid_argument(
        "atom_heat_decay_audit: atom does not match the scheme");
  if (m < 1) throw std::domain_error("atom_heat_decay_audit: m must be >= 1");
  if (refine < 1)
    throw std::domain_error("atom_heat_decay_audit: refine must be >= 1");

  AtomHeatAuditReport rep;
  const HermiteExpansion e = atom.expanded(ctx, &rep.expansion_leak);
  const int dim = sc.dimension;
  const int K = atom.moment_order();
  const int L = atom.smoothness_order();
  const double side = atom.cube().side();
  const Point xq = atom.cube().corner();
  const double qhalf = std::pow(side, -0.5 * dim);

  // Endpoint-anchored log grids shared across refinement levels, matching
  // the molecule audit.
  std::vector<std::pair<double, int>> ts;
  const int ns = 8 * refine, nl = 8 * refine;
  for (int j = 0; j < ns; ++j)
    ts.emplace_back(side * std::pow(16.0, -static_cast<double>(j) /
                                              std::max(1, ns - 1)),
                    0);
  for (int j = 0; j < nl; ++j)
    ts.emplace_back(
        side * std::pow(8.0, static_cast<double>(j) / std::max(1, nl - 1)), 1);

  const BoxGrid& grid = *ctx.grid();
  for (const auto& [t, regime] : ts) {
    const auto g = e.mapped([&](double lam) {
      const double tr = t * std::sqrt(lam);
      return std::pow(tr, m) * std::exp(-tr);
    });
    const GridFunction vals = synthesize_on_grid(g, ctx);
    const double scale = regime == 0 ? 1.0 : std::pow(side / t, L);
    const double span = regime == 0 ? side : t;
    double sup = 0.0;
    for (std::size_t flat = 0; flat < grid.size(); ++flat) {
      const Point x = grid.point(flat);
      const double dist = dim == 1 ? std::abs(x[0] - xq[0])
                                   : std::hypot(x[0] - xq[0], x[1] - xq[1]);
      const double env =
          qhalf * scale * std::pow(1.0 + dist / span, -(dim + K));
      sup = std::max(sup, std::abs(vals.value[flat]) / env);
    }
    rep.rows.push_back({t, regime, sup});
    if (regime == 0)
      rep.sup_small = std::max(rep.sup_small, sup);
    else
      rep.sup_large = std::max(rep.sup_large, sup);
  }
  return rep;
}

EmbeddingReport embedding_check(const CoefficientSet& s,
                                const std::vector<SmoothAtom>& atoms,
                                const ExponentField& alpha,
                                const ExponentField& p, const ExponentField& q,
                                int m, const SamplingScheme& scheme,
                                double stability_tol) {
  scheme.validate();
  const auto& items = s.items();
  if (items.size() != atoms.size())
    throw std::invalid_argument(
        "embedding_check: one atom per coefficient required");
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (!(atoms[i].cube() == items[i].first))
      throw std::invalid_argument(
          "embedding_check: atom " + std::to_string(i) +
          " is not aligned with its coefficient cube");
    if (atoms[i].dimension() != scheme.dimension)
      throw std::invalid_argument("embedding_check: atom dimension mismatch");
  }

  EmbeddingReport rep;
  const SchemeContext ctx(scheme);
  rep.alpha_negative = field_meta(alpha, *ctx.grid()).p_plus < 0.0;
  if (!rep.alpha_negative)
    rep.note = "regularity exponent is not negative everywhere";
  rep.seq = seq_norm(s, alpha, p, q);
  if (rep.seq == 0.0) {
    rep.skipped = true;
    rep.note = "zero sequence norm";
    return rep;
  }

  const auto func_norm = [&](const SchemeContext& c, double* leak) {
    HermiteExpansion f(scheme.dimension, scheme.degree_cap);
    GridFunction samples(c.grid());
    for (std::size_t i = 0; i < atoms.size(); ++i) {
      const double si = items[i].second;
      if (si == 0.0) continue;
      HermiteExpansion ai = atoms[i].expanded(c);
      ai *= si;
      f += ai;
      for (std::size_t flat = 0; flat < samples.value.size(); ++flat)
        samples.value[flat] += si * atoms[i](c.grid()->point(flat));
    }
    if (leak) {
      const double grid_mass = samples.l2() * samples.l2();
      const double captured = f.l2_norm() * f.l2_norm();
      *leak = grid_mass > 0.0 ? std::max(0.0, 1.0 - captured / grid_mass) : 0.0;
    }
    return tl_norm(f, alpha, p, q, m, c).total;
  };

  rep.func = func_norm(ctx, &rep.expansion_leak);
  rep.ratio = rep.func / rep.seq;
  const SchemeContext refined_ctx(scheme.refined(2.0));
  rep.ratio_refined = func_norm(refined_ctx, nullptr) / rep.seq;
  rep.stable = std::abs(rep.ratio - rep.ratio_refined) <=
               stability_tol * std::max(std::abs(rep.ratio),
                                        std::abs(rep.ratio_refined));
  return rep;
}

}  // namespace htl
