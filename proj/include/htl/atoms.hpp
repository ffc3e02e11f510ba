#pragma once

#include <string>
#include <vector>

#include "htl/decomposition.hpp"
#include "htl/hermite.hpp"
#include "htl/tlspace.hpp"
#include "htl/varexp.hpp"

namespace htl {

// Compactly supported bump on 3Q: a polynomial spline with smoothness_order+2
// continuous derivatives, orthogonal to monomials of degree <= moment_order
// when the level is positive, and scaled so the derivative envelope
// |D^gamma a(x)| <= 2^{|gamma| v} |Q|^{1/2} eta_{v,R}(x - x_Q),
// eta_{v,R}(y) = 2^{nv} (1 + 2^v |y|)^{-R}, is tight over |gamma| <= L.
class SmoothAtom {
 public:
  SmoothAtom() = default;

  const DyadicCube& cube() const { return cube_; }
  int dimension() const { return dim_; }
  int moment_order() const { return K_; }
  int smoothness_order() const { return L_; }
  int decay_exponent() const { return m_tilde_; }  // R in the envelope

  // Samples on the box grid of the scheme the atom was built with.
  const std::vector<double>& values() const { return values_; }

  double operator()(Point x) const;
  double operator()(double x) const;  // dimension 1

  // Coefficients against the Hermite basis by quadrature over the support.
  // leak receives the share of squared mass the degree cap fails to capture.
  HermiteExpansion expanded(const SchemeContext& ctx,
                            double* leak = nullptr) const;

 private:
  DyadicCube cube_;
  int dim_ = 1;
  int K_ = 0;
  int L_ = 0;
  int m_tilde_ = 0;
  double center_[2] = {0.0, 0.0};
  double halfwidth_ = 0.0;    // 1.5 * side
  double amplitude_ = 0.0;
  std::vector<double> poly_;  // per-axis factor q(u) on [-1, 1]
  std::vector<double> values_;

  friend SmoothAtom make_smooth_atom(const DyadicCube& cube, int K, int L,
                                     const SamplingScheme& scheme,
                                     int decay_exponent);
};

// decay_exponent 0 picks K + 2n + 1. Derivative orders above 4 have no
// finite-difference audit, so L <= 4. Throws accuracy_error if the moment
// orthogonalization degenerates.
SmoothAtom make_smooth_atom(const DyadicCube& cube, int K, int L,
                            const SamplingScheme& scheme,
                            int decay_exponent = 0);

struct AtomCheckReport {
  double support_spill = 0.0;  // largest |a| sampled outside 3Q
  double moment_worst = 0.0;   // largest |int x^gamma a|, |gamma| <= K
  double decay_worst = 0.0;    // largest derivative ratio against the envelope
  bool pass = false;
};

// Audits the three defining conditions independently of the construction:
// support by sampling outside 3Q, moments by quadrature (absolute 1e-10),
// derivatives by centered finite differences at step side/64 (ratio within
// half a percent of the declared constant 1).
AtomCheckReport validate_atom(const SmoothAtom& atom);

struct AtomHeatAuditReport {
  std::vector<HeatDecayRow> rows;
  double sup_small = 0.0;       // over t <= side
  double sup_large = 0.0;       // over t > side
  double expansion_leak = 0.0;  // squared-mass share above the degree cap
  std::string csv() const;
};

// Ratios of |(t sqrt(H))^m e^{-t sqrt(H)} a| over the grid against
// |Q|^{-1/2} (1+|x-x_Q|/side)^{-n-K}            for t <= side and
// |Q|^{-1/2} (side/t)^L (1+|x-x_Q|/t)^{-n-K}    for t > side.
AtomHeatAuditReport atom_heat_decay_audit(const SmoothAtom& atom, int m,
                                          const SchemeContext& ctx,
                                          int refine = 1);

struct EmbeddingReport {
  double seq = 0.0;             // sequence-space norm of s
  double func = 0.0;            // tl norm of sum_Q s_Q a_Q
  double ratio = 0.0;           // func / seq
  double ratio_refined = 0.0;   // same at doubled resolution
  double expansion_leak = 0.0;
  bool alpha_negative = false;  // alpha^+ < 0, the embedding hypothesis
  bool stable = false;
  bool skipped = false;
  std::string note;
};

// Synthesizes f = sum_Q s_Q a_Q from an atom per coefficient (aligned by
// cube), expands it, and reports tl_norm(f) / seq_norm(s) with a stability
// flag from recomputing at doubled resolution.
EmbeddingReport embedding_check(const CoefficientSet& s,
                                const std::vector<SmoothAtom>& atoms,
                                const ExponentField& alpha,
                                const ExponentField& p, const ExponentField& q,
                                int m, const SamplingScheme& scheme,
                                double stability_tol = 0.15);

}  // namespace htl
