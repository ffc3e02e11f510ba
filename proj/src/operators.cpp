#include "htl/operators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "htl/errors.hpp"

namespace htl {

namespace {

// Composite Gauss-Legendre over geometrically spaced panels of [a, b].
double geometric_panels(const std::function<double(double)>& g, double a,
                        double b, int panels, const GaussLegendreRule& gl) {
  const double span = std::log(b / a);
  double total = 0.0;
  for (int k = 0; k < panels; ++k) {
    const double lo = a * std::exp(span * k / panels);
    const double hi = a * std::exp(span * (k + 1) / panels);
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double acc = 0.0;
    for (std::size_t j = 0; j < gl.node.size(); ++j)
      acc += gl.weight[j] * g(mid + half * gl.node[j]);
    total += acc * half;
  }
  return total;
}

// Doubles the panel count until two rounds agree to tol (absolute past 1).
double adaptive_log_quadrature(const std::function<double(double)>& g,
                               double a, double b, double tol,
                               const std::string& what) {
  static const GaussLegendreRule gl = GaussLegendreRule::make(10);
  int panels = 64;
  double prev = geometric_panels(g, a, b, panels, gl);
  for (int round = 0; round < 9; ++round) {
    panels *= 2;
    const double next = geometric_panels(g, a, b, panels, gl);
    if (std::abs(next - prev) <= tol * std::max(1.0, std::abs(next)))
      return next;
    prev = next;
  }
  throw accuracy_error(what + ": quadrature did not converge");
}

void check_sigma(double sigma, const char* who) {
  if (!(sigma > 0.0))
    throw std::domain_error(std::string(who) + ": sigma must be positive");
}

}  // namespace

MultiplierProfile MultiplierProfile::constant(double c) {
  if (!std::isfinite(c))
    throw std::invalid_argument("MultiplierProfile: non-finite level");
  MultiplierProfile p;
  p.kind_ = Kind::kConstant;
  p.c_ = c;
  p.sup_ = std::abs(c);
  return p;
}

MultiplierProfile MultiplierProfile::exponential(double amplitude,
                                                 double rate) {
  if (!std::isfinite(amplitude) || !std::isfinite(rate))
    throw std::invalid_argument("MultiplierProfile: non-finite parameter");
  if (rate <= 0.0)
    throw std::invalid_argument("MultiplierProfile: decay rate must be positive");
  MultiplierProfile p;
  p.kind_ = Kind::kExponential;
  p.c_ = amplitude;
  p.rate_ = rate;
  p.sup_ = std::abs(amplitude);
  return p;
}

MultiplierProfile MultiplierProfile::sampled(std::vector<double> t,
                                             std::vector<double> phi,
                                             double decay_rate) {
  if (t.size() != phi.size() || t.size() < 2)
    throw std::invalid_argument("MultiplierProfile: need matching sample lists");
  if (!(decay_rate > 0.0) || !std::isfinite(decay_rate))
    throw std::invalid_argument(
        "MultiplierProfile: sampled profiles need a positive decay rate past "
        "the last node");
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(t[i]) || !std::isfinite(phi[i]))
      throw std::invalid_argument("MultiplierProfile: non-finite sample");
    if (t[i] <= 0.0 || (i > 0 && t[i] <= t[i - 1]))
      throw std::invalid_argument(
          "MultiplierProfile: sample times must be positive and increasing");
  }
  MultiplierProfile p;
  p.kind_ = Kind::kSampled;
  p.rate_ = decay_rate;
  p.sup_ = 0.0;
  for (const double v : phi) p.sup_ = std::max(p.sup_, std::abs(v));
  p.t_ = std::move(t);
  p.phi_ = std::move(phi);
  return p;
}

double MultiplierProfile::operator()(double t) const {
  switch (kind_) {
    case Kind::kConstant:
      return c_;
    case Kind::kExponential:
      return c_ * std::exp(-rate_ * t);
    case Kind::kSampled: {
      if (t <= t_.front()) return phi_.front();
      if (t >= t_.back())
        return phi_.back() * std::exp(-rate_ * (t - t_.back()));
      const auto it = std::upper_bound(t_.begin(), t_.end(), t);
      const std::size_t i = static_cast<std::size_t>(it - t_.begin());
      const double w = (t - t_[i - 1]) / (t_[i] - t_[i - 1]);
      return phi_[i - 1] + w * (phi_[i] - phi_[i - 1]);
    }
  }
  return 0.0;
}

HermiteExpansion riesz_potential(const HermiteExpansion& f, double sigma) {
  check_sigma(sigma, "riesz_potential");
  return f.mapped([sigma](double lambda) { return std::pow(lambda, -sigma); });
}

double riesz_validation_gap(int dimension, int degree_cap, double sigma) {
  check_sigma(sigma, "riesz_validation_gap");
  if (dimension != 1 && dimension != 2)
    throw std::invalid_argument("riesz_validation_gap: dimension must be 1 or 2");
  if (degree_cap < 0 || degree_cap > kOrderCap)
    throw std::invalid_argument("riesz_validation_gap: bad degree cap");
  const double gam = std::tgamma(sigma);
  double worst = 0.0;
  for (int d = 0; d <= degree_cap; ++d) {
    const double lam = 2.0 * d + dimension;
    const double a = 1e-20, b = 745.0 / lam;
    const double head = std::pow(a, sigma) / sigma;  // e^{-t lam} = 1 there
    const double quad = adaptive_log_quadrature(
        [sigma, lam](double t) {
          return std::pow(t, sigma - 1.0) * std::exp(-t * lam);
        },
        a, b, 1e-11, "riesz_validation_gap");
    worst = std::max(worst, std::abs((head + quad) / gam * std::pow(lam, sigma) - 1.0));
  }
  return worst;
}

HermiteExpansion bessel_potential(const HermiteExpansion& f, double sigma) {
  check_sigma(sigma, "bessel_potential");
  return f.mapped(
      [sigma](double lambda) { return std::pow(1.0 + lambda, -sigma); });
}

HermiteExpansion spectral_multiplier(const HermiteExpansion& f,
                                     const MultiplierProfile& prof,
                                     const SamplingScheme& scheme) {
  scheme.validate();
  if (f.dimension() != scheme.dimension || f.degree_cap() != scheme.degree_cap)
    throw std::invalid_argument(
        "spectral_multiplier: expansion does not match the scheme");
  const int cap = scheme.degree_cap;
  const int dim = scheme.dimension;
  std::vector<double> symbol(cap + 1);
  for (int d = 0; d <= cap; ++d) {
    const double lam = 2.0 * d + dim;
    char tag[64];
    std::snprintf(tag, sizeof tag, "spectral_multiplier at lambda=%g", lam);
    symbol[d] = adaptive_log_quadrature(
        [&prof, lam](double t) { return prof(t) * lam * std::exp(-t * lam); },
        1e-12 / lam, 745.0 / lam, 1e-11, tag);
    if (std::abs(symbol[d]) > prof.sup_bound() * (1.0 + 1e-9))
      throw accuracy_error(std::string(tag) +
                           ": symbol exceeds the profile bound");
  }
  return f.mapped([&](double lambda) {
    return symbol[static_cast<int>(std::lround((lambda - dim) / 2.0))];
  });
}

std::string BoundednessReport::csv() const {
  std::string out = "member_id,source_norm,target_norm,ratio\n";
  char buf[128];
  for (const auto& r : rows) {
    if (r.skipped)
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,skipped\n", r.member,
                    r.source_norm, r.target_norm);
    else
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", r.member,
                    r.source_norm, r.target_norm, r.ratio);
    out += buf;
  }
  std::snprintf(buf, sizeof buf, "summary,%.17g,%.17g,%d\n", max_ratio,
                min_ratio, stable ? 1 : 0);
  out += buf;
  return out;
}

BoundednessReport boundedness_report(
    const std::function<HermiteExpansion(const HermiteExpansion&)>& op,
    const std::vector<HermiteExpansion>& family, const SpaceParams& source,
    const SpaceParams& target, const SamplingScheme& scheme,
    double stability_tol) {
  scheme.validate();
  if (family.empty())
    throw std::invalid_argument("boundedness_report: empty family");

  const auto ratios = [&](const SamplingScheme& sc,
                          std::vector<BoundednessRow>* rows) {
    const SchemeContext ctx(sc);
    double worst = 0.0;
    for (std::size_t i = 0; i < family.size(); ++i) {
      BoundednessRow row;
      row.member = i;
      row.source_norm =
          tl_norm(family[i], source.alpha, source.p, source.q, source.m, ctx)
              .total;
      if (row.source_norm == 0.0) {
        row.skipped = true;
        if (rows) rows->push_back(row);
        continue;
      }
      const HermiteExpansion mapped = op(family[i]);
      row.target_norm =
          tl_norm(mapped, target.alpha, target.p, target.q, target.m, ctx)
              .total;
      row.ratio = row.target_norm / row.source_norm;
      worst = std::max(worst, row.ratio);
      if (rows) rows->push_back(row);
    }
    return worst;
  };

  BoundednessReport rep;
  rep.max_ratio = ratios(scheme, &rep.rows);
  rep.min_ratio = std::numeric_limits<double>::infinity();
  bool any = false;
  for (const auto& r : rep.rows)
    if (!r.skipped) {
      rep.min_ratio = std::min(rep.min_ratio, r.ratio);
      any = true;
    }
  if (!any) {
    rep.min_ratio = 0.0;
    rep.stable = true;  // nothing to destabilize
    return rep;
  }
  rep.max_ratio_refined = ratios(scheme.refined(2.0), nullptr);
  rep.stable = std::abs(rep.max_ratio - rep.max_ratio_refined) <=
               stability_tol * std::max(rep.max_ratio, rep.max_ratio_refined);
  return rep;
}

}  // namespace htl
