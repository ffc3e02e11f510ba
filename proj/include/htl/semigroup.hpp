#pragma once

#include <string>
#include <vector>

#include "htl/hermite.hpp"

namespace htl {

// Closed-form heat kernel of H (Mehler formula):
// W_t(x,y) = pi^{-n/2} (e^{-2t}/(1-e^{-4t}))^{n/2}
//            exp(-1/4 [ (1+e^{-2t})/(1-e^{-2t}) |x-y|^2
//                     + (1-e^{-2t})/(1+e^{-2t}) |x+y|^2 ]).
double mehler_kernel(int dimension, double t, Point x, Point y);

// Truncated spectral sum of the same kernel, sum_{|alpha| <= D} e^{-t lambda}
// h_alpha(x) h_alpha(y). Audit companion to mehler_kernel.
double heat_kernel_spectral(int dimension, double t, Point x, Point y,
                            int truncation);

// c_alpha -> e^{-t lambda_alpha} c_alpha.
HermiteExpansion apply_heat(const HermiteExpansion& e, double t);

// c_alpha -> (t sqrt(lambda_alpha))^k e^{-t sqrt(lambda_alpha)} c_alpha.
HermiteExpansion apply_poisson(const HermiteExpansion& e, double t, int k = 0);

struct KernelQuery {
  double t = 1.0;
  int k = 0;
  Point x{0.0, 0.0};
  Point y{0.0, 0.0};
  int truncation = 300;
};

struct KernelValue {
  double value = 0.0;
  double tail_bound = 0.0;
};

// Pointwise kernel of (t sqrt(H))^k e^{-t sqrt(H)}. Crossover policy: k = 0
// integrates the Mehler closed form against the subordination weight
// pi^{-1/2} u^{-1/2} e^{-u} du (valid for every t, tail_bound is the
// quadrature-refinement estimate); k >= 1 evaluates the truncated spectral
// sum, with tail_bound a rigorous integral-comparison bound on the dropped
// modes. Throws accuracy_error when tail_bound exceeds 1e-6 of the value;
// larger truncation or larger t fixes that.
KernelValue kernel_p_tk(const KernelQuery& q, int dimension);

struct DecayAuditRow {
  int k = 0;
  double t = 0.0;
  double dist = 0.0;
  double lhs = 0.0;
  double envelope = 0.0;
  double ratio = 0.0;
};

struct DecayAuditReport {
  std::vector<DecayAuditRow> rows;
  double sup_ratio = 0.0;
  std::string csv() const;  // k,t,dist,lhs,envelope,ratio rows + summary
};

// Ratio |p_{t,k}(x,y)| (t+|x-y|)^{n+k} / t^k over a pair grid (kernel decay
// law). k=0 uses the Mehler closed form over t in {0.1,0.2,0.5,1,2}; k >= 1
// uses spectral sums at the given truncation over t in {0.5,0.75,1,1.5,2},
// where the tail contract is provable. `separations` distances in [0,6] are
// paired with 5 fixed midpoints; doubling `separations` refines the audit.
DecayAuditReport poisson_decay_audit(int dimension, int k, int separations,
                                     int truncation = 2048);

// Ratio W_t(x,y) t^{n/2} exp(|x-y|^2/(8t)) over the same pair layout,
// t in {0.1,0.2,0.5,1,2} (Gaussian upper bound audit).
DecayAuditReport gaussian_bound_audit(int dimension, int separations);

struct SchwartzAuditReport {
  double sup_weighted = 0.0;  // sup over time grid and box of |x|^2 |u_t(x)|
  bool finite = false;
};

// Schwartz-class preservation probe: (t sqrt(H))^k e^{-t sqrt(H)} f stays
// rapidly decreasing, witnessed by the |x|^2-weighted sup over the box.
SchwartzAuditReport schwartz_decay_audit(const HermiteExpansion& f, int k,
                                         const SchemeContext& ctx);

}  // namespace htl
