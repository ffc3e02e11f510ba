#include "htl/semigroup.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "htl/errors.hpp"
#include "htl/special.hpp"

namespace htl {

namespace {

void check_dim(int dimension) {
  if (dimension != 1 && dimension != 2)
    throw std::invalid_argument("dimension must be 1 or 2");
}

// sup_x |h_m(x)|, all m.
constexpr double kHermiteSup = 0.7512;
// (2m)^{1/4} |h_m(x)| <= 0.9 for m >= 1024 and |x| <= 5.5 (deep oscillatory
// region; frozen empirical bound, audited in the tests).
constexpr double kBulkAmp2 = 0.81;

double dist2(int dim, Point x, Point y) {
  double d = (x[0] - y[0]) * (x[0] - y[0]);
  if (dim == 2) d += (x[1] - y[1]) * (x[1] - y[1]);
  return d;
}

}  // namespace

double mehler_kernel(int dimension, double t, Point x, Point y) {
  check_dim(dimension);
  if (!(t > 0.0)) throw std::domain_error("mehler_kernel: t must be positive");
  if (t < 1e-8)
    throw accuracy_error(
        "mehler_kernel: t below the 1e-8 overflow guard, use the spectral path");
  const double em2 = std::exp(-2.0 * t);
  const double om2 = -std::expm1(-2.0 * t);  // 1 - e^{-2t}
  const double om4 = -std::expm1(-4.0 * t);  // 1 - e^{-4t}
  const double a = (1.0 + em2) / om2;
  const double b = om2 / (1.0 + em2);
  double d2 = 0.0, s2 = 0.0;
  for (int i = 0; i < dimension; ++i) {
    d2 += (x[i] - y[i]) * (x[i] - y[i]);
    s2 += (x[i] + y[i]) * (x[i] + y[i]);
  }
  const double pref = std::pow(em2 / (om4 * M_PI), 0.5 * dimension);
  return pref * std::exp(-0.25 * (a * d2 + b * s2));
}

double heat_kernel_spectral(int dimension, double t, Point x, Point y,
                            int truncation) {
  check_dim(dimension);
  if (!(t > 0.0))
    throw std::domain_error("heat_kernel_spectral: t must be positive");
  if (truncation < 0 || truncation > kOrderCap)
    throw std::invalid_argument("heat_kernel_spectral: truncation outside cap");
  const int d = truncation;
  std::vector<double> cx(d + 1), cy(d + 1);
  hermite_column(d, x[0], cx.data());
  hermite_column(d, y[0], cy.data());
  if (dimension == 1) {
    double s = 0.0;
    for (int m = 0; m <= d; ++m)
      s += std::exp(-(2.0 * m + 1.0) * t) * (cx[m] * cy[m]);
    return s;
  }
  std::vector<double> cx2(d + 1), cy2(d + 1);
  hermite_column(d, x[1], cx2.data());
  hermite_column(d, y[1], cy2.data());
  double s = 0.0;
  for (int m = 0; m <= d; ++m) {
    double inner = 0.0;
    // pairwise grouping keeps the sum bitwise symmetric under x <-> y
    for (int a1 = 0; a1 <= m; ++a1)
      inner += (cx[m - a1] * cy[m - a1]) * (cx2[a1] * cy2[a1]);
    s += std::exp(-(2.0 * m + 2.0) * t) * inner;
  }
  return s;
}

HermiteExpansion apply_heat(const HermiteExpansion& e, double t) {
  if (t < 0.0) throw std::domain_error("apply_heat: t must be >= 0");
  return e.mapped([t](double lam) { return std::exp(-lam * t); });
}

HermiteExpansion apply_poisson(const HermiteExpansion& e, double t, int k) {
  if (!(t > 0.0)) throw std::domain_error("apply_poisson: t must be positive");
  if (k < 0) throw std::domain_error("apply_poisson: k must be >= 0");
  return e.mapped([t, k](double lam) {
    const double a = t * std::sqrt(lam);
    return std::pow(a, k) * std::exp(-a);
  });
}

namespace {

// e^{-t sqrt(lambda)} = pi^{-1/2} int_0^inf u^{-1/2} e^{-u} e^{-(t^2/4u) lambda} du,
// so the k=0 kernel is the same integral of W_{t^2/4u}. Substituting u = e^{2z}
// gives an integrand decaying double-exponentially both ways; the trapezoid
// rule on z then converges spectrally. tail_out gets the coarse/fine
// refinement difference as an error estimate.
double subordinated_poisson0(int dimension, double t, Point x, Point y,
                             double* tail_out) {
  const double z_lo = -9.0;
  // Right cut keeps the heat time t^2/(4 w^2) above the Mehler guard and,
  // for large t, clears the saddle at w ~ sqrt(t sqrt(lambda_min)/2).
  const double z_hi =
      std::min(std::log(4900.0 * t),
               1.8 + std::max(0.0, 0.5 * std::log(std::max(t, 1.0) / 2.0)));
  if (!(z_hi > z_lo + 2.0))
    throw accuracy_error(
        "kernel_p_tk: t too small for the subordination quadrature");
  auto integrand = [&](double z) {
    const double w = std::exp(z);
    const double s = 0.25 * t * t / (w * w);
    return 2.0 / std::sqrt(M_PI) * w * std::exp(-w * w) *
           mehler_kernel(dimension, s, x, y);
  };
  int fine = static_cast<int>(std::ceil((z_hi - z_lo) / 0.02)) + 1;
  if (fine % 2 == 0) ++fine;  // odd count nests the half-rate grid
  const double h = (z_hi - z_lo) / (fine - 1);
  double sum_f = 0.0, sum_c = 0.0;
  for (int i = 0; i < fine; ++i) {
    const double g = integrand(z_lo + i * h);
    const double end = (i == 0 || i == fine - 1) ? 0.5 : 1.0;
    sum_f += end * g;
    if (i % 2 == 0) sum_c += end * g;
  }
  const double vf = sum_f * h;
  const double vc = sum_c * 2.0 * h;
  if (tail_out) *tail_out = std::abs(vf - vc) + 1e-300;
  return vf;
}

// Bound on sum over |alpha| > D of (t sqrt(lambda))^k e^{-t sqrt(lambda)}
// |h_alpha(x) h_alpha(y)|, by comparing with int a^j e^{-a} da. Requires the
// summand decreasing past the cut, i.e. t sqrt(2D) > k.
double spectral_tail_bound(int dimension, double t, int k, Point x, Point y,
                           int truncation) {
  const double a_cut = t * std::sqrt(2.0 * truncation);
  if (a_cut <= k + 1.0) return std::numeric_limits<double>::infinity();
  if (dimension == 2)
    return 0.3183 * gamma_upper(k + 4, a_cut) / (2.0 * std::pow(t, 4.0));
  const double crude =
      kHermiteSup * kHermiteSup * gamma_upper(k + 2, a_cut) / (t * t);
  if (truncation >= 1024 && std::abs(x[0]) <= 5.5 && std::abs(y[0]) <= 5.5) {
    const double bulk = kBulkAmp2 / t * gamma_upper(k + 1, a_cut);
    return std::min(crude, bulk);
  }
  return crude;
}

}  // namespace

KernelValue kernel_p_tk(const KernelQuery& q, int dimension) {
  check_dim(dimension);
  if (!(q.t > 0.0)) throw std::domain_error("kernel_p_tk: t must be positive");
  if (q.k < 0) throw std::domain_error("kernel_p_tk: k must be >= 0");
  if (q.truncation < 0 || q.truncation > kOrderCap)
    throw std::invalid_argument("kernel_p_tk: truncation outside the core cap");
  KernelValue out;
  if (q.k == 0) {
    out.value = subordinated_poisson0(dimension, q.t, q.x, q.y, &out.tail_bound);
  } else {
    const int d = q.truncation;
    std::vector<double> cx(d + 1), cy(d + 1);
    hermite_column(d, q.x[0], cx.data());
    hermite_column(d, q.y[0], cy.data());
    auto weight = [&](double lam) {
      const double a = q.t * std::sqrt(lam);
      return std::pow(a, q.k) * std::exp(-a);
    };
    if (dimension == 1) {
      double s = 0.0;
      for (int m = 0; m <= d; ++m) s += weight(2.0 * m + 1.0) * (cx[m] * cy[m]);
      out.value = s;
    } else {
      std::vector<double> cx2(d + 1), cy2(d + 1);
      hermite_column(d, q.x[1], cx2.data());
      hermite_column(d, q.y[1], cy2.data());
      double s = 0.0;
      for (int m = 0; m <= d; ++m) {
        double inner = 0.0;
        for (int a1 = 0; a1 <= m; ++a1)
          inner += (cx[m - a1] * cy[m - a1]) * (cx2[a1] * cy2[a1]);
        s += weight(2.0 * m + 2.0) * inner;
      }
      out.value = s;
    }
    out.tail_bound = spectral_tail_bound(dimension, q.t, q.k, q.x, q.y, d);
  }
  if (out.tail_bound > 1e-6 * std::abs(out.value))
    throw accuracy_error(
        "kernel_p_tk: tail bound exceeds 1e-6 of the value; "
        "increase the truncation degree or the time t");
  return out;
}

std::string DecayAuditReport::csv() const {
  std::string s = "k,t,dist,lhs,envelope,ratio\n";
  char buf[192];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.k,
                  r.t, r.dist, r.lhs, r.envelope, r.ratio);
    s += buf;
  }
  std::snprintf(buf, sizeof buf, "supremum,,,,,%.17g\n", sup_ratio);
  s += buf;
  return s;
}

namespace {

struct PairGrid {
  std::vector<Point> xs, ys;
  std::vector<double> dist;
};

// 5 fixed midpoints x separations in [0,6]; n=2 offsets along a fixed
// direction so |x-y| still sweeps the range.
PairGrid make_pairs(int dimension, int separations) {
  if (separations < 2)
    throw std::invalid_argument("decay audit: need at least 2 separations");
  const double mids[5] = {-2.0, -1.0, 0.0, 1.0, 2.0};
  const double ux = dimension == 1 ? 1.0 : std::cos(M_PI / 6.0);
  const double uy = dimension == 1 ? 0.0 : std::sin(M_PI / 6.0);
  const double mscale = dimension == 1 ? 1.0 : 1.0 / std::sqrt(2.0);
  PairGrid g;
  for (double mu : mids) {
    for (int i = 0; i < separations; ++i) {
      const double d = 6.0 * i / (separations - 1);
      Point x{mu * mscale + 0.5 * d * ux, mu * mscale + 0.5 * d * uy};
      Point y{mu * mscale - 0.5 * d * ux, mu * mscale - 0.5 * d * uy};
      if (dimension == 1) x[1] = y[1] = 0.0;
      g.xs.push_back(x);
      g.ys.push_back(y);
      g.dist.push_back(d);
    }
  }
  return g;
}

}  // namespace

DecayAuditReport poisson_decay_audit(int dimension, int k, int separations,
                                     int truncation) {
  check_dim(dimension);
  if (k < 0) throw std::domain_error("poisson_decay_audit: k must be >= 0");
  const PairGrid pairs = make_pairs(dimension, separations);
  DecayAuditReport rep;
  const int n = dimension;

  if (k == 0) {
    // Subordinated Mehler path has no truncation tail, so small t is fine.
    const double ts[5] = {0.1, 0.2, 0.5, 1.0, 2.0};
    for (double t : ts) {
      for (std::size_t i = 0; i < pairs.xs.size(); ++i) {
        KernelQuery q{t, 0, pairs.xs[i], pairs.ys[i], truncation};
        const double v = kernel_p_tk(q, dimension).value;
        DecayAuditRow row;
        row.k = 0;
        row.t = t;
        row.dist = pairs.dist[i];
        row.lhs = std::abs(v);
        row.envelope = t / std::pow(t + row.dist, n + 1);
        row.ratio = row.lhs / row.envelope;
        rep.sup_ratio = std::max(rep.sup_ratio, row.ratio);
        rep.rows.push_back(row);
      }
    }
    return rep;
  }

  const double ts[5] = {0.5, 0.75, 1.0, 1.5, 2.0};
  // Cache per-pair coefficient products so each (t,k) pass is a weighted sum.
  const int d = truncation;
  std::vector<std::vector<double>> prod(pairs.xs.size());
  parallel_for(pairs.xs.size(), [&](std::size_t i) {
    std::vector<double> cx(d + 1), cy(d + 1);
    hermite_column(d, pairs.xs[i][0], cx.data());
    hermite_column(d, pairs.ys[i][0], cy.data());
    prod[i].resize(d + 1);
    if (dimension == 1) {
      for (int m = 0; m <= d; ++m) prod[i][m] = cx[m] * cy[m];
    } else {
      std::vector<double> cx2(d + 1), cy2(d + 1);
      hermite_column(d, pairs.xs[i][1], cx2.data());
      hermite_column(d, pairs.ys[i][1], cy2.data());
      for (int m = 0; m <= d; ++m) {
        double inner = 0.0;
        for (int a1 = 0; a1 <= m; ++a1)
          inner += (cx[m - a1] * cy[m - a1]) * (cx2[a1] * cy2[a1]);
        prod[i][m] = inner;
      }
    }
  });
  for (double t : ts) {
    std::vector<double> w(d + 1);
    for (int m = 0; m <= d; ++m) {
      const double a = t * std::sqrt(2.0 * m + n);
      w[m] = std::pow(a, k) * std::exp(-a);
    }
    for (std::size_t i = 0; i < pairs.xs.size(); ++i) {
      const double tail =
          spectral_tail_bound(dimension, t, k, pairs.xs[i], pairs.ys[i], d);
      double v = 0.0;
      for (int m = 0; m <= d; ++m) v += w[m] * prod[i][m];
      DecayAuditRow row;
      row.k = k;
      row.t = t;
      row.dist = pairs.dist[i];
      row.lhs = std::abs(v) + tail;  // tail folded in, keeps the bound honest
      row.envelope = std::pow(t, k) / std::pow(t + row.dist, n + k);
      row.ratio = row.lhs / row.envelope;
      rep.sup_ratio = std::max(rep.sup_ratio, row.ratio);
      rep.rows.push_back(row);
    }
  }
  return rep;
}

DecayAuditReport gaussian_bound_audit(int dimension, int separations) {
  check_dim(dimension);
  const PairGrid pairs = make_pairs(dimension, separations);
  const double ts[5] = {0.1, 0.2, 0.5, 1.0, 2.0};
  DecayAuditReport rep;
  for (double t : ts) {
    for (std::size_t i = 0; i < pairs.xs.size(); ++i) {
      const double w = mehler_kernel(dimension, t, pairs.xs[i], pairs.ys[i]);
      const double d2 = dist2(dimension, pairs.xs[i], pairs.ys[i]);
      DecayAuditRow row;
      row.k = 0;
      row.t = t;
      row.dist = std::sqrt(d2);
      row.lhs = w;
      row.envelope = std::pow(t, -0.5 * dimension) * std::exp(-d2 / (8.0 * t));
      row.ratio = row.lhs / row.envelope;
      rep.sup_ratio = std::max(rep.sup_ratio, row.ratio);
      rep.rows.push_back(row);
    }
  }
  return rep;
}

SchwartzAuditReport schwartz_decay_audit(const HermiteExpansion& f, int k,
                                         const SchemeContext& ctx) {
  SchwartzAuditReport rep;
  const auto& grid = *ctx.grid();
  for (std::size_t ti = 0; ti < ctx.times().node.size(); ++ti) {
    const double t = ctx.times().node[ti];
    const auto g = synthesize_on_grid(apply_poisson(f, t, k), ctx);
    for (std::size_t i = 0; i < g.value.size(); ++i) {
      const Point x = grid.point(i);
      double r2 = x[0] * x[0];
      if (grid.dimension == 2) r2 += x[1] * x[1];
      rep.sup_weighted = std::max(rep.sup_weighted, r2 * std::abs(g.value[i]));
    }
  }
  rep.finite = std::isfinite(rep.sup_weighted);
  return rep;
}

}  // namespace htl
