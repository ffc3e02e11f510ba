#include "htl/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "htl/errors.hpp"
#include "htl/special.hpp"

namespace htl {

namespace {

using CubeKey = std::tuple<int, long, long>;

CubeKey key_of(const DyadicCube& q) { return {q.v, q.k1, q.k2}; }

std::string cube_label(const DyadicCube& q) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "(%d,%ld,%ld)", q.v, q.k1, q.k2);
  return buf;
}

// log(2^l / (l-1)!)
double log_prefactor(int l) {
  return l * std::numbers::ln2 - std::lgamma(static_cast<double>(l));
}

// sum_{k<l} x^k / k!
double exp_partial_sum(int l, double x) {
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < l; ++k) {
    term *= x / k;
    sum += term;
  }
  return sum;
}

// Nodes per axis resolving h_cap over a cube of the given side: the local
// wavelength is bounded below by 2pi/sqrt(2 cap + n), so ~0.8 side sqrt(..)
// GL nodes track every oscillation with margin.
int cube_rule_size(double side, int cap, int dim) {
  const double waves = 0.8 * side * std::sqrt(2.0 * cap + dim);
  return std::max(6, static_cast<int>(std::ceil(waves)) + 6);
}

// out[d] = sum_{|alpha|=d} c_alpha h_alpha(x) from per-axis value rows.
void degree_partials(const HermiteExpansion& e, const double* hx,
                     const double* hy, double* out) {
  const int cap = e.degree_cap();
  const auto c = e.raw();
  if (e.dimension() == 1) {
    for (int d = 0; d <= cap; ++d) out[d] = c[d] * hx[d];
    return;
  }
  std::size_t i = 0;
  for (int d = 0; d <= cap; ++d) {
    double acc = 0.0;
    for (int a1 = 0; a1 <= d; ++a1, ++i) acc += c[i] * hx[d - a1] * hy[a1];
    out[d] = acc;
  }
}

double dot_degrees(int cap, const double* fac, const double* part) {
  double acc = 0.0;
  for (int d = 0; d <= cap; ++d) acc += fac[d] * part[d];
  return acc;
}

// Value of the series at x given per-axis columns.
double eval_with_columns(const HermiteExpansion& e, const double* hx,
                         const double* hy) {
  const int cap = e.degree_cap();
  const auto c = e.raw();
  if (e.dimension() == 1) {
    double acc = 0.0;
    for (int d = 0; d <= cap; ++d) acc += c[d] * hx[d];
    return acc;
  }
  double acc = 0.0;
  std::size_t i = 0;
  for (int d = 0; d <= cap; ++d)
    for (int a1 = 0; a1 <= d; ++a1, ++i) acc += c[i] * hx[d - a1] * hy[a1];
  return acc;
}

struct LevelGeometry {
  int v = 0;
  double side = 1.0;
  long per_axis = 0;
  long k0 = 0;
  std::size_t count = 0;
};

LevelGeometry level_geometry(int v, double halfwidth, int dim) {
  LevelGeometry g;
  g.v = v;
  g.side = std::ldexp(1.0, -v);
  g.per_axis = std::llround(2.0 * halfwidth / g.side);
  g.k0 = -g.per_axis / 2;
  const auto p = static_cast<std::size_t>(g.per_axis);
  g.count = dim == 1 ? p : p * p;
  return g;
}

DyadicCube cube_at(const LevelGeometry& g, std::size_t flat, int dim) {
  if (dim == 1) return {g.v, g.k0 + static_cast<long>(flat), 0};
  const auto p = static_cast<std::size_t>(g.per_axis);
  return {g.v, g.k0 + static_cast<long>(flat / p),
          g.k0 + static_cast<long>(flat % p)};
}

}  // namespace

HermiteExpansion calderon_reconstruct(const HermiteExpansion& f, int l,
                                      const SamplingScheme& scheme) {
  scheme.validate();
  if (l < 1) throw std::domain_error("calderon_reconstruct: l must be >= 1");
  if (f.dimension() != scheme.dimension ||
      f.degree_cap() != scheme.degree_cap)
    throw std::invalid_argument(
        "calderon_reconstruct: expansion does not match the scheme");
  const TimeGrid tg = TimeGrid::make(scheme.time_levels, scheme.nodes_per_level);
  const double lp = log_prefactor(l);
  const int cap = scheme.degree_cap;
  std::vector<double> factor(cap + 1);
  for (int d = 0; d <= cap; ++d) {
    const double r = std::sqrt(2.0 * d + scheme.dimension);
    double quad = 0.0;
    for (std::size_t i = 0; i < tg.node.size(); ++i)
      quad += tg.weight[i] *
              std::exp(lp + l * std::log(tg.node[i] * r) - 2.0 * tg.node[i] * r);
    const double head = reg_gamma_lower(l, std::ldexp(2.0 * r, -tg.levels));
    factor[d] = quad + head + reg_gamma_upper(l, 2.0 * r);
  }
  const int dim = scheme.dimension;
  return f.mapped([&](double lambda) {
    return factor[static_cast<int>(std::lround((lambda - dim) / 2.0))];
  });
}

AdmissibilityReport check_admissibility(int m, int M, int N,
                                        const ExponentField& alpha,
                                        const ExponentField& p,
                                        const ExponentField& q,
                                        const BoxGrid& reference) {
  if (p.min() <= 0.0 || q.min() <= 0.0)
    throw std::domain_error("check_admissibility: p and q must be positive");
  const FieldMeta am = field_meta(alpha, reference);
  const int n = reference.dimension;
  AdmissibilityReport r;
  r.tau = std::min({1.0, p.min(), q.min()});
  r.clog = std::max(am.clog_local, am.clog_infty);
  r.n_floor = n / r.tau - n + r.clog;
  r.m_floor = std::max(am.p_plus, 0.0) + N + n;
  r.cap_floor = n + N + std::abs(am.p_minus);
  r.n_ok = N > r.n_floor;
  r.m_ok = m > r.m_floor;
  r.cap_ok = M > r.cap_floor;
  r.all_ok = r.n_ok && r.m_ok && r.cap_ok;
  return r;
}

DecompositionResult molecular_decompose(const HermiteExpansion& f, int m,
                                        int M, int N, int v_max,
                                        const ExponentField& alpha,
                                        const ExponentField& p,
                                        const ExponentField& q,
                                        const SchemeContext& ctx) {
  const SamplingScheme& sc = ctx.scheme();
  const int dim = sc.dimension;
  const int cap = sc.degree_cap;
  if (f.dimension() != dim || f.degree_cap() != cap)
    throw std::invalid_argument(
        "molecular_decompose: expansion does not match the scheme");
  if (m < 1 || M < 1 || N < 1)
    throw std::domain_error("molecular_decompose: m, M, N must be positive");
  if (v_max < 1) throw std::domain_error("molecular_decompose: v_max must be >= 1");
  if (v_max >= sc.time_levels)
    throw std::invalid_argument(
        "molecular_decompose: time grid has no octave at level v_max");
  const double X = sc.box_halfwidth;
  if (std::floor(X) != X)
    throw std::invalid_argument(
        "molecular_decompose: box halfwidth must be an integer to tile with "
        "unit cubes");

  const int l = m + M + N;
  const double lp = log_prefactor(l);
  const TimeGrid& tg = ctx.times();

  // The per-eigenvalue factor assembled from bands 0..v_max, the lowpass
  // series, and the analytic remainder below 2^{-v_max-1} must reproduce 1;
  // otherwise the time quadrature cannot carry the decomposition.
  {
    double worst = 0.0;
    for (int d = 0; d <= cap; ++d) {
      const double r = std::sqrt(2.0 * d + dim);
      double s = reg_gamma_upper(l, 2.0 * r) +
                 reg_gamma_lower(l, std::ldexp(r, -v_max));
      for (int v = 0; v <= v_max; ++v)
        for (const std::size_t i : tg.octave(v))
          s += tg.weight[i] *
               std::exp(lp + l * std::log(tg.node[i] * r) - 2.0 * tg.node[i] * r);
      worst = std::max(worst, std::abs(s - 1.0));
    }
    if (worst > 1e-6)
      throw accuracy_error(
          "molecular_decompose: band quadrature misses the reproducing "
          "identity by " +
          std::to_string(worst));
  }

  DecompositionResult res{CoefficientSet(sc, v_max)};
  res.m = m;
  res.M = M;
  res.N = N;
  res.v_max = v_max;
  res.admissibility = check_admissibility(m, M, N, alpha, p, q, *ctx.grid());

  const double nf = f.l2_norm();
  if (nf == 0.0) return res;

  // Band data: g_i = (t_i sqrt(H))^m e^{-t_i sqrt(H)} f per octave node, plus
  // the lowpass u = e^{-sqrt(H)} f feeding the zero-level series.
  struct BandNode {
    double t = 0.0, w = 0.0;
    HermiteExpansion g;
    std::vector<double> bfac;  // per-degree quadrature factor for b_Q
  };
  std::vector<std::vector<BandNode>> band(v_max + 1);
  for (int v = 0; v <= v_max; ++v) {
    for (const std::size_t i : tg.octave(v)) {
      BandNode node{tg.node[i], tg.weight[i],
                    f.mapped([&](double lambda) {
                      const double tr = tg.node[i] * std::sqrt(lambda);
                      return std::pow(tr, m) * std::exp(-tr);
                    }),
                    {}};
      node.bfac.resize(cap + 1);
      for (int d = 0; d <= cap; ++d) {
        const double r = std::sqrt(2.0 * d + dim);
        node.bfac[d] = std::exp(lp) * node.w * std::pow(node.t, M) *
                       std::pow(node.t * r, N) * std::exp(-node.t * r);
      }
      band[v].push_back(std::move(node));
    }
  }
  const HermiteExpansion u =
      f.mapped([](double lambda) { return std::exp(-std::sqrt(lambda)); });
  std::vector<double> sfac(cap + 1);  // zero-level series factor on b
  for (int d = 0; d <= cap; ++d) {
    const double lam = 2.0 * d + dim;
    const double r = std::sqrt(lam);
    sfac[d] = std::pow(lam, -0.5 * M) * std::exp(-r) * exp_partial_sum(l, 2.0 * r);
  }

  // Pass A: sampled sup per cube.
  const int S = std::max(1, sc.sup_samples_per_axis);
  std::vector<LevelGeometry> geom(v_max + 1);
  std::vector<std::vector<double>> sraw(v_max + 1);
  for (int v = 0; v <= v_max; ++v) {
    const LevelGeometry g = geom[v] = level_geometry(v, X, dim);
    sraw[v].assign(g.count, 0.0);
    const double qhalf = std::pow(g.side, 0.5 * dim);
    parallel_for(g.count, [&, v, g, qhalf](std::size_t c) {
      const DyadicCube Q = cube_at(g, c, dim);
      const Point corner = Q.corner();
      std::vector<double> colx(cap + 1), coly(cap + 1);
      double best = 0.0;
      const int sy = dim == 2 ? S : 1;
      for (int jx = 0; jx < S; ++jx) {
        const double x0 = corner[0] + g.side * (jx + 0.5) / S;
        hermite_column(cap, x0, colx.data());
        for (int jy = 0; jy < sy; ++jy) {
          if (dim == 2)
            hermite_column(cap, corner[1] + g.side * (jy + 0.5) / S,
                           coly.data());
          if (v == 0) {
            best = std::max(best,
                            std::abs(eval_with_columns(u, colx.data(), coly.data())));
          } else {
            for (const BandNode& node : band[v])
              best = std::max(best, std::abs(eval_with_columns(
                                        node.g, colx.data(), coly.data())));
          }
        }
      }
      sraw[v][c] = qhalf * best;
    });
  }

  double smax = 0.0;
  for (int v = 0; v <= v_max; ++v)
    for (const double s : sraw[v]) smax = std::max(smax, s);
  if (smax == 0.0) return res;
  const double thr = 1e-14 * smax;
  res.drop_threshold = thr;
  for (int v = 0; v <= v_max; ++v)
    for (const double s : sraw[v])
      if (s > 0.0 && s < thr) ++res.dropped;

  // Pass B: localized band quadrature per kept cube.
  HermiteExpansion recon(dim, cap);
  std::vector<double> lamM(cap + 1);
  for (int d = 0; d <= cap; ++d) lamM[d] = std::pow(2.0 * d + dim, 0.5 * M);
  for (int v = 0; v <= v_max; ++v) {
    const LevelGeometry& g = geom[v];
    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < g.count; ++c)
      if (sraw[v][c] >= thr) kept.push_back(c);
    if (kept.empty()) continue;

    const int pq = cube_rule_size(g.side, cap, dim);
    const GaussLegendreRule gl = GaussLegendreRule::make(pq);
    std::vector<HermiteExpansion> bq(kept.size(), HermiteExpansion(dim, cap));
    std::vector<double> leak(kept.size(), 0.0);

    parallel_for(kept.size(), [&, v](std::size_t slot) {
      const std::size_t c = kept[slot];
      const DyadicCube Q = cube_at(g, c, dim);
      const Point corner = Q.corner();
      const double half = 0.5 * g.side;
      // per-axis nodes, weights, and Hermite columns over the cube
      std::vector<double> yx(pq), wx(pq), cols_x(static_cast<std::size_t>(pq) * (cap + 1));
      std::vector<double> yy, wy, cols_y;
      for (int j = 0; j < pq; ++j) {
        yx[j] = corner[0] + half * (gl.node[j] + 1.0);
        wx[j] = gl.weight[j] * half;
        hermite_column(cap, yx[j], &cols_x[static_cast<std::size_t>(j) * (cap + 1)]);
      }
      if (dim == 2) {
        yy.resize(pq);
        wy.resize(pq);
        cols_y.resize(static_cast<std::size_t>(pq) * (cap + 1));
        for (int j = 0; j < pq; ++j) {
          yy[j] = corner[1] + half * (gl.node[j] + 1.0);
          wy[j] = gl.weight[j] * half;
          hermite_column(cap, yy[j], &cols_y[static_cast<std::size_t>(j) * (cap + 1)]);
        }
      }
      const std::size_t nodes =
          dim == 1 ? static_cast<std::size_t>(pq)
                   : static_cast<std::size_t>(pq) * static_cast<std::size_t>(pq);
      std::vector<double> gv(nodes), wv(nodes);
      std::vector<double> e(f.size());
      HermiteExpansion& acc = bq[slot];
      double worst_leak = 0.0;

      const auto localize = [&](const HermiteExpansion& src, const double* fac) {
        // sample src on the cube rule, expand against the basis over Q
        double m2 = 0.0;
        for (std::size_t jx = 0; jx < static_cast<std::size_t>(pq); ++jx) {
          const double* hx = &cols_x[jx * (cap + 1)];
          if (dim == 1) {
            gv[jx] = eval_with_columns(src, hx, nullptr);
            wv[jx] = wx[jx];
            m2 += wv[jx] * gv[jx] * gv[jx];
          } else {
            for (std::size_t jy = 0; jy < static_cast<std::size_t>(pq); ++jy) {
              const double* hy = &cols_y[jy * (cap + 1)];
              const std::size_t at = jx * pq + jy;
              gv[at] = eval_with_columns(src, hx, hy);
              wv[at] = wx[jx] * wy[jy];
              m2 += wv[at] * gv[at] * gv[at];
            }
          }
        }
        double en2 = 0.0;
        if (dim == 1) {
          for (int d = 0; d <= cap; ++d) {
            double cd = 0.0;
            for (std::size_t j = 0; j < static_cast<std::size_t>(pq); ++j)
              cd += wv[j] * gv[j] * cols_x[j * (cap + 1) + d];
            e[d] = cd;
            en2 += cd * cd;
          }
        } else {
          std::size_t i = 0;
          for (int d = 0; d <= cap; ++d) {
            for (int a1 = 0; a1 <= d; ++a1, ++i) {
              double cd = 0.0;
              for (std::size_t jx = 0; jx < static_cast<std::size_t>(pq); ++jx)
                for (std::size_t jy = 0; jy < static_cast<std::size_t>(pq); ++jy)
                  cd += wv[jx * pq + jy] * gv[jx * pq + jy] *
                        cols_x[jx * (cap + 1) + d - a1] *
                        cols_y[jy * (cap + 1) + a1];
              e[i] = cd;
              en2 += cd * cd;
            }
          }
        }
        if (m2 > 0.0) worst_leak = std::max(worst_leak, std::max(0.0, 1.0 - en2 / m2));
        if (dim == 1) {
          for (int d = 0; d <= cap; ++d) acc.slot(d) += fac[d] * e[d];
        } else {
          std::size_t i = 0;
          for (int d = 0; d <= cap; ++d)
            for (int a1 = 0; a1 <= d; ++a1, ++i) acc.slot(i) += fac[d] * e[i];
        }
      };

      if (v == 0) localize(u, sfac.data());
      for (const BandNode& node : band[v]) localize(node.g, node.bfac.data());
      acc *= 1.0 / sraw[v][c];
      leak[slot] = worst_leak;
    });

    for (std::size_t slot = 0; slot < kept.size(); ++slot) {
      const std::size_t c = kept[slot];
      const DyadicCube Q = cube_at(g, c, dim);
      const double s = sraw[v][c];
      res.coefficients.set(Q, s);
      for (std::size_t i = 0; i < f.size(); ++i) {
        const int d = f.index_at(i).order();
        recon.slot(i) += s * lamM[d] * bq[slot].slot(i);
      }
      res.molecules.push_back(
          {Q, M, N, std::move(bq[slot]), v == 0, 0.0});
      res.leakage.push_back(leak[slot]);
      res.leakage_max = std::max(res.leakage_max, leak[slot]);
    }
  }

  // Audit every emitted molecule to pin its size constant.
  parallel_for(res.molecules.size(), [&](std::size_t i) {
    res.molecules[i].size_constant = validate_molecule(res.molecules[i], ctx).sup_ratio;
  });

  HermiteExpansion diff = recon;
  diff -= f;
  res.residual_l2 = diff.l2_norm() / nf;

  // Gaussian-decay bound on the analyzed data outside the box, calibrated at
  // the outermost cell centers.
  {
    const BoxGrid& grid = *ctx.grid();
    std::vector<Point> edges;
    const double lo = grid.axis.front(), hi = grid.axis.back();
    if (dim == 1) {
      edges.push_back({lo, 0.0});
      edges.push_back({hi, 0.0});
    } else {
      for (int j = 0; j < 9; ++j) {
        const double s = lo + (hi - lo) * j / 8.0;
        edges.push_back({lo, s});
        edges.push_back({hi, s});
        edges.push_back({s, lo});
        edges.push_back({s, hi});
      }
    }
    double emax = 0.0;
    std::vector<double> colx(cap + 1), coly(cap + 1);
    for (const Point& pt : edges) {
      hermite_column(cap, pt[0], colx.data());
      if (dim == 2) hermite_column(cap, pt[1], coly.data());
      emax = std::max(emax, std::abs(eval_with_columns(u, colx.data(), coly.data())));
      for (int v = 0; v <= v_max; ++v)
        for (const BandNode& node : band[v])
          emax = std::max(emax, std::abs(eval_with_columns(node.g, colx.data(),
                                                           coly.data())));
    }
    const double slab =
        std::sqrt(std::numbers::pi / 2.0) * std::erfc(X / std::sqrt(2.0));
    res.excluded_mass_rel = emax * emax * std::exp(0.5 * X * X) * 2.0 * dim *
                            std::pow(2.0 * std::numbers::pi, 0.5 * (dim - 1)) *
                            slab / (nf * nf);
  }
  return res;
}

DecompositionResult molecular_decompose(const HermiteExpansion& f, int m,
                                        int M, int N, int v_max,
                                        const ExponentField& alpha,
                                        const ExponentField& p,
                                        const ExponentField& q,
                                        const SamplingScheme& scheme) {
  const SchemeContext ctx(scheme);
  return molecular_decompose(f, m, M, N, v_max, alpha, p, q, ctx);
}

MoleculeAuditReport validate_molecule(const MoleculeDescriptor& mol,
                                      const SchemeContext& ctx) {
  const SamplingScheme& sc = ctx.scheme();
  const int dim = sc.dimension;
  const int cap = sc.degree_cap;
  if (mol.b.dimension() != dim || mol.b.degree_cap() != cap)
    throw std::invalid_argument(
        "validate_molecule: molecule does not match the scheme");
  if (mol.M < 1 || mol.N < 1)
    throw std::invalid_argument("validate_molecule: M and N must be positive");

  const int kmin = mol.zero_level ? mol.M : 0;
  const int kmax = 2 * mol.M;
  const double side = mol.cube.side();
  const Point xq = mol.cube.corner();
  const double qhalf = std::pow(side, -0.5 * dim);  // |Q|^{-1/2}

  std::vector<std::vector<double>> lam_pow(kmax - kmin + 1,
                                           std::vector<double>(cap + 1));
  std::vector<double> env_side(kmax - kmin + 1);
  for (int k = kmin; k <= kmax; ++k) {
    env_side[k - kmin] = std::pow(side, mol.M - k) * qhalf;
    for (int d = 0; d <= cap; ++d)
      lam_pow[k - kmin][d] = std::pow(2.0 * d + dim, 0.5 * k);
  }

  const BoxGrid& grid = *ctx.grid();
  const auto& hg = ctx.axis_values_at_grid();
  const std::size_t stride = static_cast<std::size_t>(cap) + 1;
  const std::size_t pts = grid.size();
  const auto per = static_cast<std::size_t>(grid.points_per_axis);

  MoleculeAuditReport rep;
  rep.rows.resize(kmax - kmin + 1);
  for (int k = kmin; k <= kmax; ++k) rep.rows[k - kmin] = {k, 0.0};

  std::vector<double> part(cap + 1);
  for (std::size_t flat = 0; flat < pts; ++flat) {
    const Point x = grid.point(flat);
    const double* hx =
        &hg[(dim == 1 ? flat : flat / per) * stride];
    const double* hy = dim == 2 ? &hg[(flat % per) * stride] : nullptr;
    degree_partials(mol.b, hx, hy, part.data());
    const double dist = dim == 1 ? std::abs(x[0] - xq[0])
                                 : std::hypot(x[0] - xq[0], x[1] - xq[1]);
    const double decay = std::pow(1.0 + dist / side, -(dim + mol.N));
    for (int k = kmin; k <= kmax; ++k) {
      const double val =
          dot_degrees(cap, lam_pow[k - kmin].data(), part.data());
      const double ratio = std::abs(val) / (env_side[k - kmin] * decay);
      rep.rows[k - kmin].ratio = std::max(rep.rows[k - kmin].ratio, ratio);
    }
  }
  for (const auto& row : rep.rows) rep.sup_ratio = std::max(rep.sup_ratio, row.ratio);
  rep.pass = true;
  for (const auto& row : rep.rows)
    if (!(row.ratio <= mol.size_constant)) rep.pass = false;
  return rep;
}

MoleculeAuditReport validate_molecule(const MoleculeDescriptor& mol) {
  SamplingScheme sc = SamplingScheme::defaults(mol.b.dimension());
  sc.degree_cap = mol.b.degree_cap();
  sc.quadrature_size = 0;
  const SchemeContext ctx(sc);
  return validate_molecule(mol, ctx);
}

std::string MoleculeHeatAuditReport::csv() const {
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

MoleculeHeatAuditReport molecule_heat_audit(const MoleculeDescriptor& mol,
                                            int m, const SchemeContext& ctx,
                                            int refine) {
  const SamplingScheme& sc = ctx.scheme();
  const int dim = sc.dimension;
  const int cap = sc.degree_cap;
  if (mol.b.dimension() != dim || mol.b.degree_cap() != cap)
    throw std::invalid_argument(
        "molecule_heat_audit: molecule does not match the scheme");
  if (m < 1) throw std::domain_error("molecule_heat_audit: m must be >= 1");
  if (refine < 1) throw std::domain_error("molecule_heat_audit: refine must be >= 1");

  const double side = mol.cube.side();
  const Point xq = mol.cube.corner();
  const double qhalf = std::pow(side, -0.5 * dim);

  // Endpoint-anchored log grids: both refinement levels share t = side/16,
  // side, and 8*side, so refining only inserts interior samples.
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
  const auto& hg = ctx.axis_values_at_grid();
  const std::size_t stride = static_cast<std::size_t>(cap) + 1;
  const auto per = static_cast<std::size_t>(grid.points_per_axis);

  MoleculeHeatAuditReport rep;
  std::vector<double> fac(cap + 1), part(cap + 1);
  for (const auto& [t, regime] : ts) {
    for (int d = 0; d <= cap; ++d) {
      const double lam = 2.0 * d + dim;
      const double tr = t * std::sqrt(lam);
      fac[d] = std::pow(tr, m) * std::exp(-tr) * std::pow(lam, 0.5 * mol.M);
    }
    const double scale = regime == 0 ? std::pow(t / side, m - mol.N - dim)
                                     : std::pow(side / t, mol.M);
    const double span = regime == 0 ? side : t;
    double sup = 0.0;
    for (std::size_t flat = 0; flat < grid.size(); ++flat) {
      const Point x = grid.point(flat);
      const double* hx = &hg[(dim == 1 ? flat : flat / per) * stride];
      const double* hy = dim == 2 ? &hg[(flat % per) * stride] : nullptr;
      degree_partials(mol.b, hx, hy, part.data());
      const double val = dot_degrees(cap, fac.data(), part.data());
      const double dist = dim == 1 ? std::abs(x[0] - xq[0])
                                   : std::hypot(x[0] - xq[0], x[1] - xq[1]);
      const double env =
          qhalf * scale * std::pow(1.0 + dist / span, -(dim + mol.N));
      sup = std::max(sup, std::abs(val) / env);
    }
    rep.rows.push_back({t, regime, sup});
    if (regime == 0)
      rep.sup_small = std::max(rep.sup_small, sup);
    else
      rep.sup_large = std::max(rep.sup_large, sup);
  }
  return rep;
}

HermiteExpansion synthesize_molecules(
    const CoefficientSet& s, const std::vector<MoleculeDescriptor>& mols) {
  const SamplingScheme& sc = s.scheme();
  const int dim = sc.dimension;
  const int cap = sc.degree_cap;
  HermiteExpansion out(dim, cap);

  std::map<CubeKey, std::size_t> where;
  for (std::size_t i = 0; i < mols.size(); ++i) {
    if (mols[i].b.dimension() != dim || mols[i].b.degree_cap() != cap)
      throw std::invalid_argument(
          "synthesize_molecules: molecule does not match the coefficient scheme");
    if (!where.emplace(key_of(mols[i].cube), i).second)
      throw std::invalid_argument("synthesize_molecules: duplicate cube " +
                                  cube_label(mols[i].cube));
  }

  std::vector<std::string> orphans;
  std::vector<char> used(mols.size(), 0);
  for (const auto& [cube, value] : s.items()) {
    const auto it = where.find(key_of(cube));
    if (it == where.end())
      orphans.push_back("coefficient-only " + cube_label(cube));
    else
      used[it->second] = 1;
  }
  for (std::size_t i = 0; i < mols.size(); ++i)
    if (!used[i]) orphans.push_back("molecule-only " + cube_label(mols[i].cube));
  if (!orphans.empty()) {
    std::string msg = "synthesize_molecules: unmatched cubes:";
    for (std::size_t i = 0; i < orphans.size() && i < 8; ++i)
      msg += " " + orphans[i];
    if (orphans.size() > 8) msg += " ...";
    throw std::invalid_argument(msg);
  }

  std::map<int, std::vector<double>> lam_cache;
  std::vector<int> degs(out.size());
  for (std::size_t i = 0; i < out.size(); ++i) degs[i] = out.index_at(i).order();
  for (const auto& [cube, value] : s.items()) {
    const MoleculeDescriptor& mol = mols[where[key_of(cube)]];
    auto& lamM = lam_cache[mol.M];
    if (lamM.empty()) {
      lamM.resize(cap + 1);
      for (int d = 0; d <= cap; ++d) lamM[d] = std::pow(2.0 * d + dim, 0.5 * mol.M);
    }
    for (std::size_t i = 0; i < out.size(); ++i)
      out.slot(i) += value * lamM[degs[i]] * mol.b.slot(i);
  }
  return out;
}

}  // namespace htl
