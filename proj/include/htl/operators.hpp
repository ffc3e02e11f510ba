#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "htl/hermite.hpp"
#include "htl/tlspace.hpp"
#include "htl/varexp.hpp"

namespace htl {

// Bounded profile phi on (0, infinity) driving the Laplace-type multiplier
// m(H) = int phi(t) H e^{-tH} dt. Sampled profiles must declare an
// exponential decay rate past their last node so the integral converges.
class MultiplierProfile {
 public:
  static MultiplierProfile constant(double c);
  static MultiplierProfile exponential(double amplitude, double rate);
  static MultiplierProfile sampled(std::vector<double> t,
                                   std::vector<double> phi, double decay_rate);

  double operator()(double t) const;
  double sup_bound() const { return sup_; }

 private:
  MultiplierProfile() = default;
  enum class Kind { kConstant, kExponential, kSampled };
  Kind kind_ = Kind::kConstant;
  double c_ = 0.0;
  double rate_ = 0.0;
  std::vector<double> t_, phi_;
  double sup_ = 0.0;
};

// H^{-sigma}: c_alpha -> lambda_alpha^{-sigma} c_alpha.
HermiteExpansion riesz_potential(const HermiteExpansion& f, double sigma);

// Worst relative gap, over eigenvalues up to 2 cap + dim, between the
// spectral symbol lambda^{-sigma} and the quadrature of its defining time
// integral 1/Gamma(sigma) int t^sigma e^{-t lambda} dt/t.
double riesz_validation_gap(int dimension, int degree_cap, double sigma);

// (I+H)^{-sigma}: c_alpha -> (1+lambda_alpha)^{-sigma} c_alpha.
HermiteExpansion bessel_potential(const HermiteExpansion& f, double sigma);

// m(H) f with m(lambda) = int phi(t) lambda e^{-t lambda} dt evaluated per
// eigenvalue by adaptive panel quadrature; |m| <= sup_bound is checked.
HermiteExpansion spectral_multiplier(const HermiteExpansion& f,
                                     const MultiplierProfile& prof,
                                     const SamplingScheme& scheme);

struct SpaceParams {
  ExponentField alpha;
  ExponentField p;
  ExponentField q;
  int m = 6;
};

struct BoundednessRow {
  std::size_t member = 0;
  double source_norm = 0.0;
  double target_norm = 0.0;
  double ratio = 0.0;
  bool skipped = false;  // zero source norm
};

struct BoundednessReport {
  std::vector<BoundednessRow> rows;
  double max_ratio = 0.0;
  double min_ratio = 0.0;
  double max_ratio_refined = 0.0;
  bool stable = false;
  std::string csv() const;  // member,source_norm,target_norm,ratio + summary
};

// Ratio harness: tl_norm(op f; target) / tl_norm(f; source) per family
// member, re-run on the refined scheme; stable when the max ratio moves by
// at most stability_tol relatively.
BoundednessReport boundedness_report(
    const std::function<HermiteExpansion(const HermiteExpansion&)>& op,
    const std::vector<HermiteExpansion>& family, const SpaceParams& source,
    const SpaceParams& target, const SamplingScheme& scheme,
    double stability_tol = 0.15);

}  // namespace htl
