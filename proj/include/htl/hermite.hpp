#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "htl/common.hpp"
#include "htl/grid.hpp"
#include "htl/multi_index.hpp"

namespace htl {

// Orders beyond this are refused; the normalized recurrence is validated well
// inside this range and |x| is capped where exp(-x^2/2) would underflow.
inline constexpr int kOrderCap = 2048;

// h_0..h_cap at t via h_{m+1} = t sqrt(2/(m+1)) h_m - sqrt(m/(m+1)) h_{m-1},
// h_0 = pi^{-1/4} exp(-t^2/2). out must hold cap+1 values.
void hermite_column(int cap, double t, double* out);

double eval_hermite_1d(int order, double t);

// Tensor value h_alpha(x) = prod_i h_{alpha_i}(x_i).
double eval_hermite(const MultiIndex& alpha, Point x);

// Gauss-Hermite rule of the given size with modified weights
// W_j = 1/(size * h_{size-1}(x_j)^2) = w_j e^{x_j^2}, so that
// sum_j W_j f(x_j) h_m(x_j) recovers coefficients of f against {h_m} for
// polynomial-times-Gaussian f of degree <= 2*size-1.
struct GaussHermiteRule {
  std::vector<double> node;    // ascending
  std::vector<double> weight;  // modified weights
  static GaussHermiteRule make(int size);
};

// Coefficients of a finite Hermite series sum_{|alpha| <= cap} c_alpha h_alpha.
class HermiteExpansion {
 public:
  HermiteExpansion(int dimension, int degree_cap)
      : table_(dimension, degree_cap), c_(table_.size(), 0.0) {}

  int dimension() const { return table_.dimension(); }
  int degree_cap() const { return table_.cap(); }
  const DegreeTable& table() const { return table_; }
  std::size_t size() const { return c_.size(); }

  double coefficient(const MultiIndex& a) const { return c_[table_.index_of(a)]; }
  void set_coefficient(const MultiIndex& a, double v) { c_[table_.index_of(a)] = v; }

  double& slot(std::size_t i) { return c_[i]; }
  double slot(std::size_t i) const { return c_[i]; }
  MultiIndex index_at(std::size_t i) const { return table_.at(i); }
  std::span<const double> raw() const { return c_; }

  // sqrt(sum c^2); the L^2(R^n) norm of the series by orthonormality
  double l2_norm() const;

  // Diagonal spectral calculus: c_alpha -> factor(lambda_alpha) c_alpha.
  HermiteExpansion mapped(const std::function<double(double)>& factor) const;

  HermiteExpansion& operator+=(const HermiteExpansion& other);
  HermiteExpansion& operator-=(const HermiteExpansion& other);
  HermiteExpansion& operator*=(double s);

 private:
  DegreeTable table_;
  std::vector<double> c_;
};

// Discretization parameters shared by every operation: spatial box and grid,
// Gauss-Hermite rule size, dyadic time grid.
struct SamplingScheme {
  int dimension = 1;
  int degree_cap = 256;        // total-degree truncation
  double box_halfwidth = 8.0;
  int points_per_axis = 512;
  int quadrature_size = 0;     // 0 = degree_cap + 1
  int time_levels = 12;        // dyadic octaves of (0, 1)
  int nodes_per_level = 6;     // Gauss-Legendre nodes per octave in log t
  int sup_samples_per_axis = 3;

  static SamplingScheme defaults(int dimension);
  // Scales resolution knobs (points, rule size, time nodes, sup samples) by
  // the given factor, >= 1.
  SamplingScheme refined(double factor) const;
  void validate() const;
};

// Immutable tables derived from a scheme: grid, rules, Hermite values on the
// grid axis and at the quadrature nodes. Construct once, share by const ref.
class SchemeContext {
 public:
  explicit SchemeContext(const SamplingScheme& s);

  const SamplingScheme& scheme() const { return scheme_; }
  const std::shared_ptr<const BoxGrid>& grid() const { return grid_; }
  const GaussHermiteRule& rule() const { return rule_; }
  const TimeGrid& times() const { return times_; }
  int degree_cap() const { return scheme_.degree_cap; }

  // Row-major [point][order], order = 0..degree_cap, at grid axis points.
  const std::vector<double>& axis_values_at_grid() const { return h_grid_; }
  // Same layout at the Gauss-Hermite nodes.
  const std::vector<double>& axis_values_at_rule() const { return h_rule_; }

 private:
  SamplingScheme scheme_;
  std::shared_ptr<const BoxGrid> grid_;
  GaussHermiteRule rule_;
  TimeGrid times_;
  std::vector<double> h_grid_;
  std::vector<double> h_rule_;
};

// Coefficients of f against {h_alpha}, |alpha| <= cap, by tensor
// Gauss-Hermite quadrature. Non-finite samples are rejected.
HermiteExpansion expand(const std::function<double(Point)>& f,
                        const SchemeContext& ctx);

std::vector<double> synthesize(const HermiteExpansion& e,
                               std::span<const Point> points);

GridFunction synthesize_on_grid(const HermiteExpansion& e,
                                const SchemeContext& ctx);

}  // namespace htl
