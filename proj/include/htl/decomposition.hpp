#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "htl/hermite.hpp"
#include "htl/tlspace.hpp"
#include "htl/varexp.hpp"

namespace htl {

// Molecule on a dyadic cube, carried through its pre-image b: the molecule
// itself is a = H^{M/2} b, recovered diagonally as a_alpha = lambda^{M/2}
// b_alpha. Zero-level molecules satisfy the size condition only for
// k = M..2M; all others for k = 0..2M.
struct MoleculeDescriptor {
  DyadicCube cube;
  int M = 0;
  int N = 0;
  HermiteExpansion b;
  bool zero_level = false;
  double size_constant = 0.0;  // audited sup of the size-condition ratio
};

// Reproducing identity of order l >= 1,
//   f = 2^l/(l-1)! int_0^1 (t sqrt(H))^l e^{-2t sqrt(H)} f dt/t
//       + sum_{k<l} 2^k/k! (sqrt(H))^k e^{-2 sqrt(H)} f,
// evaluated per eigenvalue with the scheme's log-time quadrature; the
// uncovered head (0, 2^{-J}) is added in closed incomplete-gamma form.
HermiteExpansion calderon_reconstruct(const HermiteExpansion& f, int l,
                                      const SamplingScheme& scheme);

// Parameter check for the synthesis direction: N > n/tau - n + C_log(alpha)
// with tau = min{1, p^-, q^-}, m > max{alpha^+, 0} + N + n, and
// M > n + N + max{alpha^-, -alpha^-}. Violations are reported, not thrown.
struct AdmissibilityReport {
  double tau = 0.0;
  double clog = 0.0;
  double n_floor = 0.0;  // threshold for N
  double m_floor = 0.0;  // threshold for m
  double cap_floor = 0.0;  // threshold for M
  bool n_ok = false;
  bool m_ok = false;
  bool cap_ok = false;
  bool all_ok = false;
};

AdmissibilityReport check_admissibility(int m, int M, int N,
                                        const ExponentField& alpha,
                                        const ExponentField& p,
                                        const ExponentField& q,
                                        const BoxGrid& reference);

struct DecompositionResult {
  CoefficientSet coefficients;
  std::vector<MoleculeDescriptor> molecules;  // cube order, aligned with s
  std::vector<double> leakage;  // per molecule: localized mass lost to modes > cap
  double residual_l2 = 0.0;     // relative L2 of (synthesized sum - f)
  std::size_t dropped = 0;      // cubes with 0 < s_Q below the drop threshold
  double drop_threshold = 0.0;
  double leakage_max = 0.0;
  double excluded_mass_rel = 0.0;  // Gaussian-decay bound on mass outside the box
  AdmissibilityReport admissibility;
  int m = 0;
  int M = 0;
  int N = 0;
  int v_max = 0;
};

// Constructive decomposition f = sum_v sum_Q s_Q m_Q over levels 0..v_max.
// For v >= 1, s_Q is the sampled sup of |(t sqrt(H))^m e^{-t sqrt(H)} f| over
// Q x [2^{-v-1}, 2^{-v}) times |Q|^{1/2}, and b_Q integrates
// t^M e^{-t sqrt(H)} (t sqrt(H))^N applied to the cube-localized band data
// over the level's octave. Level 0 additionally carries the lowpass series
// sum_{k<l} 2^k/k! (sqrt(H))^k e^{-sqrt(H)} (e^{-sqrt(H)} f . 1_Q) and the
// [1/2, 1) octave, with s_Q = sup_Q |e^{-sqrt(H)} f|. Cubes whose s_Q falls
// below 1e-14 of the largest are dropped and counted.
DecompositionResult molecular_decompose(const HermiteExpansion& f, int m,
                                        int M, int N, int v_max,
                                        const ExponentField& alpha,
                                        const ExponentField& p,
                                        const ExponentField& q,
                                        const SchemeContext& ctx);
DecompositionResult molecular_decompose(const HermiteExpansion& f, int m,
                                        int M, int N, int v_max,
                                        const ExponentField& alpha,
                                        const ExponentField& p,
                                        const ExponentField& q,
                                        const SamplingScheme& scheme);

struct MoleculeSizeRow {
  int k;
  double ratio;  // sup over the grid of |(sqrt(H))^k b| / envelope
};

struct MoleculeAuditReport {
  std::vector<MoleculeSizeRow> rows;
  double sup_ratio = 0.0;
  bool pass = false;  // every ratio <= the declared size_constant
};

// Size-condition audit: for each required k, compares (sqrt(H))^k b on the
// grid against l(Q)^{M-k} |Q|^{-1/2} (1 + |x - x_Q|/l(Q))^{-n-N}.
MoleculeAuditReport validate_molecule(const MoleculeDescriptor& mol,
                                      const SchemeContext& ctx);
MoleculeAuditReport validate_molecule(const MoleculeDescriptor& mol);

struct HeatDecayRow {
  double t;
  int regime;  // 0: t <= l(Q), 1: t > l(Q)
  double ratio;
};

struct MoleculeHeatAuditReport {
  std::vector<HeatDecayRow> rows;
  double sup_small = 0.0;
  double sup_large = 0.0;
  std::string csv() const;  // "t,regime,ratio" rows plus a supremum line
};

// Heat-decay audit of a molecule: sup over the grid of
// |(t sqrt(H))^m e^{-t sqrt(H)} a(x)| against the two-regime envelope
//   t <= l(Q):  |Q|^{-1/2} (t/l(Q))^{m-N-n} (1 + |x-x_Q|/l(Q))^{-n-N}
//   t >  l(Q):  |Q|^{-1/2} (l(Q)/t)^M (1 + |x-x_Q|/t)^{-n-N}.
// refine scales the number of sampled times per regime.
MoleculeHeatAuditReport molecule_heat_audit(const MoleculeDescriptor& mol,
                                            int m, const SchemeContext& ctx,
                                            int refine = 1);

// Coefficient-space sum s_Q lambda^{M/2} b_Q over the common cube set.
// Cubes present on one side only are an input error listing the orphans.
HermiteExpansion synthesize_molecules(const CoefficientSet& s,
                                      const std::vector<MoleculeDescriptor>& mols);

}  // namespace htl
