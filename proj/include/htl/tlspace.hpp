#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include "htl/hermite.hpp"
#include "htl/varexp.hpp"

namespace htl {

// Q = 2^{-v}([0,1)^n + k); x_Q is the lower-left corner 2^{-v} k.
struct DyadicCube {
  int v = 0;
  long k1 = 0;
  long k2 = 0;  // ignored for n = 1

  double side() const { return std::exp2(-v); }
  Point corner() const { return {side() * k1, side() * k2}; }
  double measure(int dimension) const {
    return dimension == 1 ? side() : side() * side();
  }
  bool operator==(const DyadicCube& o) const {
    return v == o.v && k1 == o.k1 && k2 == o.k2;
  }
};

// Sparse coefficients s_Q over dyadic levels 0..v_max, cubes inside the
// scheme's box. The scheme also fixes the grid used to sample the sums
// sum_Q s_Q |Q|^{-1/2} 1_Q.
class CoefficientSet {
 public:
  CoefficientSet(const SamplingScheme& scheme, int v_max);

  const SamplingScheme& scheme() const { return scheme_; }
  int v_max() const { return v_max_; }
  std::size_t size() const { return items_.size(); }

  // Insert or overwrite s_Q; the cube must lie inside the box with
  // 0 <= v <= v_max.
  void set(const DyadicCube& q, double s);
  // 0 for absent cubes.
  double at(const DyadicCube& q) const;

  const std::vector<std::pair<DyadicCube, double>>& items() const {
    return items_;
  }

 private:
  SamplingScheme scheme_;
  int v_max_ = 0;
  std::vector<std::pair<DyadicCube, double>> items_;
  std::map<std::tuple<int, long, long>, std::size_t> index_;
};

// Two-term norm of Definition "lowpass + square function": the L^{p(.)}
// norm of e^{-sqrt(H)}f plus the mixed norm of t^{-alpha(.)}
// (t sqrt(H))^m e^{-t sqrt(H)} f over the dyadic time grid.
struct NormBreakdown {
  double term_lowpass = 0.0;
  double term_squarefn = 0.0;
  double total = 0.0;
  // sup over grid points of the estimated share of the inner dt/t integral
  // lost below the smallest time node (t^{m-alpha} extrapolation).
  double tail_time = 0.0;
  // worst ratio of a square-function member at the box edge to its peak;
  // large values mean the spatial box truncates real mass.
  double tail_space = 0.0;
  // admissibility threshold for m from the exponent metadata; exceeding it
  // is required for the m-independence theorems, not for evaluation.
  double m_threshold = 0.0;
  bool m_ok = true;
};

NormBreakdown tl_norm(const HermiteExpansion& f, const ExponentField& alpha,
                      const ExponentField& p, const ExponentField& q, int m,
                      const SchemeContext& ctx);
NormBreakdown tl_norm(const HermiteExpansion& f, const ExponentField& alpha,
                      const ExponentField& p, const ExponentField& q, int m,
                      const SamplingScheme& scheme);

// Sequence-space norm: mixed norm over levels of
// 2^{v alpha(x)} sum_{Q in D_v} |s_Q| |Q|^{-1/2} 1_Q(x).
double seq_norm(const CoefficientSet& s, const ExponentField& alpha,
                const ExponentField& p, const ExponentField& q);

}  // namespace htl
