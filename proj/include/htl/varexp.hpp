#pragma once

#include <memory>
#include <string>
#include <vector>

#include "htl/grid.hpp"

namespace htl {

// Pointwise exponent rule on R^n. Three representable classes: constants,
// clamped affine functions of the first coordinate, and nearest-cell lookup
// into grid samples. The same type carries integrability exponents p, q and
// smoothness exponents alpha; positivity is a requirement of the norms that
// consume the field, not of the field itself.
class ExponentField {
 public:
  enum class Kind { kConstant, kAffineClamped, kGridSampled };

  static ExponentField constant(double c);
  // clamp(a + b x_1, [lo, hi])
  static ExponentField affine_clamped(double a, double b, double lo, double hi);
  static ExponentField grid_sampled(std::shared_ptr<const BoxGrid> grid,
                                    std::vector<double> values);

  Kind kind() const { return kind_; }
  double operator()(Point x) const;

  // Infimum / supremum of the rule over R^n (exact for the closed forms,
  // a sample scan for grid data).
  double min() const { return min_; }
  double max() const { return max_; }

  // Serialization accessors; meaningful fields depend on kind.
  double param_a() const { return a_; }
  double param_b() const { return b_; }
  double param_lo() const { return lo_; }
  double param_hi() const { return hi_; }
  const std::shared_ptr<const BoxGrid>& sample_grid() const { return grid_; }
  const std::vector<double>& sample_values() const { return values_; }

 private:
  ExponentField() = default;
  Kind kind_ = Kind::kConstant;
  double a_ = 0.0, b_ = 0.0, lo_ = 0.0, hi_ = 0.0;
  std::shared_ptr<const BoxGrid> grid_;
  std::vector<double> values_;
  double min_ = 0.0, max_ = 0.0;
};

// Log-Holder metadata of a field, estimated on a reference grid. clog_local
// maximizes |p(x)-p(y)| log(e+1/|x-y|) over sampled pairs within distance 2;
// p_infinity averages the boundary samples and clog_infty maximizes
// |p(x)-p_infinity| log(e+|x|). Estimates, not preconditions.
struct FieldMeta {
  double p_minus = 0.0;
  double p_plus = 0.0;
  double clog_local = 0.0;
  double clog_infty = 0.0;
  double p_infinity = 0.0;
};

FieldMeta field_meta(const ExponentField& f, const BoxGrid& reference);

// Ordered family of grid functions, one per level, sharing one grid. Weights
// are the level measures: 1 for dyadic counting levels, the dt/t quadrature
// weight for time nodes.
struct LevelFamily {
  std::vector<double> weight;
  std::vector<GridFunction> member;
};

// Modular rho(lambda) = sum_i w_cell (|f_i|/lambda)^{p(x_i)}; strictly
// decreasing in lambda for nonzero f.
double luxemburg_modular(const GridFunction& f, const ExponentField& p,
                         double lambda);

// inf{lambda > 0 : rho(lambda) <= 1} by bisection in log lambda over the
// bracket [1e-12, 1e12], relative tolerance 1e-10. Zero input short-circuits
// to 0; a bracket end on the wrong side of 1 is an error, never a clamp.
double luxemburg_norm(const GridFunction& f, const ExponentField& p);

// Pointwise inner norm (sum_v w_v |f_v(x)|^{q(x)})^{1/q(x)}, then the
// Luxemburg norm with p of the result.
double mixed_norm(const LevelFamily& fam, const ExponentField& p,
                  const ExponentField& q);

// eta_{v,R}(z) = 2^{nv} (1+2^v|z|)^{-R}.
double eta_kernel(int dimension, int v, double R, Point z);
// Box-quadrature convolution with eta_{v,R}.
GridFunction eta_convolve(int v, double R, const GridFunction& f);
// Single-point value of the same convolution.
double eta_convolve_at(int v, double R, const GridFunction& f, Point x);
// Mass of eta_{v,R} outside the ball of radius dist (box truncation bound).
double eta_tail_mass(int dimension, int v, double R, double dist);

// Vector-valued convolution inequality probe: randomized families with
// p-,q- > 1 and R = n+1, ratio of mixed norms after/before applying
// eta_{v,R} per level. c_emp is the max ratio; stability compares the first
// half of the trials against all of them.
struct ConvolutionAuditReport {
  std::vector<double> ratio;
  double c_emp = 0.0;
  double c_emp_half = 0.0;
  bool stable = false;
};

ConvolutionAuditReport convolution_inequality_audit(int dimension, int trials,
                                                    unsigned seed);

// Discrete kernel domination probe: for random single-level coefficients,
// sup over grid points of
//   sum_Q |s_Q| (1+2^{min(v,j)}|x-x_Q|)^{-R}
// divided by max{1, 2^{(v-j)R}} eta_{v,R} * (sum_Q |s_Q| 1_Q)(x).
struct DiscreteKernelAuditReport {
  struct Row {
    int v = 0;
    int j = 0;
    double c_emp = 0.0;
  };
  std::vector<Row> rows;
  double sup_c = 0.0;
};

DiscreteKernelAuditReport discrete_kernel_audit(int dimension, int trials,
                                                unsigned seed);

}  // namespace htl
