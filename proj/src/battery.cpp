#include "htl/battery.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <memory>
#include <random>
#include <stdexcept>
#include <vector>

#include "htl/atoms.hpp"
#include "htl/decomposition.hpp"
#include "htl/io.hpp"
#include "htl/operators.hpp"
#include "htl/semigroup.hpp"
#include "htl/tlspace.hpp"
#include "htl/varexp.hpp"

namespace htl {
namespace {

// Acceptance tolerances, pinned here and nowhere else.
constexpr int kKernelTruncation = 300;
constexpr double kKernelRelTol = 1e-8;
constexpr double kKernelAbsTol = 1e-12;  // below |K| = kKernelRelTol
constexpr double kReproductionTol = 1e-8;
constexpr double kLuxemburgTol = 1e-8;
constexpr double kDecayStabilityTol = 0.05;
constexpr double kHeatStabilityTol = 0.10;
constexpr double kResidualTol = 1e-2;
constexpr double kEquivLo = 1e-2, kEquivHi = 1e2;
constexpr double kMRatioLo = 0.1, kMRatioHi = 10.0;
constexpr double kMStabilityTol = 0.10;
constexpr double kSymbolGapTol = 1e-6;
constexpr double kIdentityTol = 1e-10;
constexpr double kPointMultiplierTol = 1e-8;
constexpr double kRatioCap = 1e6;
constexpr double kEmbedStabilityTol = 0.15;
constexpr double kKernelSeconds = 10.0;
constexpr double kReproductionSeconds = 5.0;
constexpr double kDecaySeconds = 60.0;
constexpr double kEquivSeconds = 300.0;
constexpr double kTotalSeconds = 900.0;

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* pattern, ...) {
  char buf[512];
  va_list args;
  va_start(args, pattern);
  std::vsnprintf(buf, sizeof buf, pattern, args);
  va_end(args);
  return buf;
}

std::string slug(const std::string& name) {
  std::string out;
  for (const char c : name) {
    if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-')
      out += c;
    else if (!out.empty() && out.back() != '-')
      out += '-';
  }
  while (!out.empty() && out.back() == '-') out.pop_back();
  return out;
}

struct Emitter {
  std::filesystem::path dir;
  bool on = false;
  void write(const std::string& name, const std::string& text) const {
    if (on) write_text_file(dir / name, text);
  }
};

// Shared across suites 5-7 and 9: one scheme, the 4-member family, and its
// decompositions at (m, M, N) = (6, 4, 2), v_max = 8.
struct FamilyState {
  SamplingScheme scheme;
  std::unique_ptr<SchemeContext> ctx;
  std::vector<std::string> names;
  std::vector<HermiteExpansion> family;
  std::vector<DecompositionResult> decs;
};

constexpr int kFamM = 6, kFamBig = 4, kFamN = 2, kFamVmax = 8;

HermiteExpansion mixture_h0_h4(const SamplingScheme& sc) {
  HermiteExpansion f(sc.dimension, sc.degree_cap);
  f.set_coefficient(MultiIndex(0), 1.0);
  f.set_coefficient(MultiIndex(4), 0.5);
  return f;
}

// 1. Closed-form heat kernel against the truncated spectral sum.
CriterionResult run_kernel_agreement(const Emitter& em) {
  CriterionResult r{1, "heat-kernel-closed-form"};
  const auto t0 = Clock::now();
  const double times[] = {0.1, 0.5, 1.0, 2.0};
  std::vector<double> xs(25);
  for (int i = 0; i < 25; ++i) xs[i] = -3.0 + 0.25 * i;

  double worst_rel = 0.0, worst_abs = 0.0;
  std::string csv = "t,x,y,closed_form,spectral,abs_err,rel_err\n";
  for (const double t : times)
    for (const double x : xs)
      for (const double y : xs) {
        const double closed = mehler_kernel(1, t, {x, 0.0}, {y, 0.0});
        const double spectral =
            heat_kernel_spectral(1, t, {x, 0.0}, {y, 0.0}, kKernelTruncation);
        const double abs_err = std::abs(closed - spectral);
        const double rel_err = abs_err / std::abs(closed);
        if (std::abs(closed) >= kKernelRelTol)
          worst_rel = std::max(worst_rel, rel_err);
        else
          worst_abs = std::max(worst_abs, abs_err);
        csv += fmt("%.3g,%.3g,%.3g,%.17g,%.17g,%.3e,%.3e\n", t, x, y, closed,
                   spectral, abs_err, rel_err);
      }
  em.write("kernel-agreement.csv", csv);
  r.seconds = since(t0);
  r.pass = worst_rel <= kKernelRelTol && worst_abs <= kKernelAbsTol &&
           r.seconds <= kKernelSeconds;
  r.detail = fmt("worst rel %.2e (tol %.0e), worst small-value abs %.2e "
                 "(tol %.0e), 2500 pairs x 4 times",
                 worst_rel, kKernelRelTol, worst_abs, kKernelAbsTol);
  return r;
}

// 2. Reproducing identity per eigenvalue and on the h0 + 0.5 h4 mixture.
CriterionResult run_reproduction(const Emitter& em) {
  CriterionResult r{2, "reproducing-identity"};
  const auto t0 = Clock::now();

  SamplingScheme sc = SamplingScheme::defaults(1);
  sc.degree_cap = 255;  // eigenvalues 2d + 1 <= 511
  HermiteExpansion ones(1, sc.degree_cap);
  for (int d = 0; d <= sc.degree_cap; ++d)
    ones.set_coefficient(MultiIndex(d), 1.0);

  double worst_eigen = 0.0;
  std::string csv = "l,lambda,factor,deviation\n";
  for (int l = 1; l <= 6; ++l) {
    const auto rec = calderon_reconstruct(ones, l, sc);
    for (int d = 0; d <= sc.degree_cap; ++d) {
      const double factor = rec.coefficient(MultiIndex(d));
      const double dev = std::abs(factor - 1.0);
      worst_eigen = std::max(worst_eigen, dev);
      csv += fmt("%d,%d,%.17g,%.3e\n", l, 2 * d + 1, factor, dev);
    }
  }
  em.write("reproducing-identity.csv", csv);

  const SamplingScheme scd = SamplingScheme::defaults(1);
  const auto mix = mixture_h0_h4(scd);
  double worst_mix = 0.0;
  for (int l = 1; l <= 6; ++l) {
    const auto rec = calderon_reconstruct(mix, l, scd);
    for (int d = 0; d <= scd.degree_cap; ++d) {
      const double want = mix.coefficient(MultiIndex(d));
      const double got = rec.coefficient(MultiIndex(d));
      const double dev =
          want != 0.0 ? std::abs(got - want) / std::abs(want) : std::abs(got);
      worst_mix = std::max(worst_mix, dev);
    }
  }

  r.seconds = since(t0);
  r.pass = worst_eigen <= kReproductionTol && worst_mix <= kReproductionTol &&
           r.seconds <= kReproductionSeconds;
  r.detail = fmt("per-eigenvalue dev %.2e (l=1..6, lambda<=511), mixture "
                 "coefficient dev %.2e, tol %.0e",
                 worst_eigen, worst_mix, kReproductionTol);
  return r;
}

// 3. Luxemburg norms: constant exponents vs direct quadrature, and the
// two-piece indicator whose modular is exactly 1 at lambda = 1.
CriterionResult run_luxemburg(const Emitter& em) {
  CriterionResult r{3, "luxemburg-norms"};
  const auto t0 = Clock::now();
  const auto grid = make_box_grid(1, 8.0, 512);

  GridFunction f(grid);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double x = grid->axis[i];
    f.value[i] = (1.0 + x * x) * std::exp(-0.5 * x * x);
  }

  std::string csv = "check,expected,computed,deviation\n";
  double worst = 0.0;
  for (const double p0 : {1.0, 2.0, 3.7}) {
    double direct = 0.0;
    for (const double v : f.value) direct += std::pow(std::abs(v), p0);
    direct = std::pow(direct * grid->cell_weight, 1.0 / p0);
    const double lux = luxemburg_norm(f, ExponentField::constant(p0));
    const double dev = std::abs(lux - direct) / direct;
    worst = std::max(worst, dev);
    csv += fmt("constant-p-%.1f,%.17g,%.17g,%.3e\n", p0, direct, lux, dev);
  }

  GridFunction ind(grid);
  std::vector<double> pv(grid->size(), 2.0);
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double x = grid->axis[i];
    if (x >= 0.0 && x < 1.0) ind.value[i] = 1.0;
    if (x >= 0.5 && x < 1.0) pv[i] = 4.0;
  }
  const double lux2 = luxemburg_norm(ind, ExponentField::grid_sampled(grid, pv));
  const double dev2 = std::abs(lux2 - 1.0);
  worst = std::max(worst, dev2);
  csv += fmt("two-piece-indicator,1,%.17g,%.3e\n", lux2, dev2);
  em.write("luxemburg-norms.csv", csv);

  r.seconds = since(t0);
  r.pass = worst <= kLuxemburgTol;
  r.detail = fmt("worst deviation %.2e (tol %.0e) over p in {1, 2, 3.7} and "
                 "the two-piece indicator",
                 worst, kLuxemburgTol);
  return r;
}

// 4. Kernel decay audits, refined by doubling the separation count.
CriterionResult run_decay_audits(const Emitter& em) {
  CriterionResult r{4, "kernel-decay-audits"};
  const auto t0 = Clock::now();
  double worst_dev = 0.0, sup_lo = 1e300, sup_hi = 0.0;
  bool ok = true;

  for (int k = 0; k <= 4; ++k) {
    const auto base = poisson_decay_audit(1, k, 48);
    const auto fine = poisson_decay_audit(1, k, 96);
    const double dev = std::abs(fine.sup_ratio - base.sup_ratio) /
                       std::max(fine.sup_ratio, base.sup_ratio);
    ok = ok && std::isfinite(base.sup_ratio) && base.sup_ratio > 0.0 &&
         std::isfinite(fine.sup_ratio) && dev <= kDecayStabilityTol;
    worst_dev = std::max(worst_dev, dev);
    sup_lo = std::min(sup_lo, fine.sup_ratio);
    sup_hi = std::max(sup_hi, fine.sup_ratio);
    em.write(fmt("kernel-decay-k%d.csv", k), fine.csv());
  }

  const auto gbase = gaussian_bound_audit(1, 48);
  const auto gfine = gaussian_bound_audit(1, 96);
  const double gdev = std::abs(gfine.sup_ratio - gbase.sup_ratio) /
                      std::max(gfine.sup_ratio, gbase.sup_ratio);
  ok = ok && std::isfinite(gbase.sup_ratio) && gbase.sup_ratio > 0.0 &&
       gdev <= kDecayStabilityTol;
  worst_dev = std::max(worst_dev, gdev);
  em.write("gaussian-bound.csv", gfine.csv());

  r.seconds = since(t0);
  r.pass = ok && r.seconds <= kDecaySeconds;
  r.detail = fmt("sup constants k=0..4 in [%.3g, %.3g], gaussian %.3g; worst "
                 "doubling dev %.1f%% (tol %.0f%%)",
                 sup_lo, sup_hi, gfine.sup_ratio, 100.0 * worst_dev,
                 100.0 * kDecayStabilityTol);
  return r;
}

// 5. Every decomposition molecule passes its size audit; heat-decay ratios
// finite and stable under doubled time sampling. Builds the shared family.
CriterionResult run_molecule_audits(FamilyState& st, const Emitter& em) {
  CriterionResult r{5, "molecule-audits"};
  const auto t0 = Clock::now();

  const auto alpha0 = ExponentField::constant(0.0);
  const auto two = ExponentField::constant(2.0);
  st.names = {"h0", "h2+h5", "gaussian(1)", "shifted-gaussian(1)"};
  for (const auto& name : st.names)
    st.family.push_back(named_function(name, *st.ctx));
  const auto t_dec = Clock::now();
  for (const auto& f : st.family)
    st.decs.push_back(molecular_decompose(f, kFamM, kFamBig, kFamN, kFamVmax,
                                          alpha0, two, two, *st.ctx));
  const double dec_seconds = since(t_dec);

  bool ok = true;
  std::size_t total = 0, failed = 0;
  double worst_heat_dev = 0.0;
  for (std::size_t i = 0; i < st.family.size(); ++i) {
    const auto& dec = st.decs[i];
    std::string csv = "index,v,k,zero_level,size_constant,audit_sup,pass\n";
    for (std::size_t j = 0; j < dec.molecules.size(); ++j) {
      const auto& mol = dec.molecules[j];
      const auto rep = validate_molecule(mol, *st.ctx);
      const bool good = rep.pass && std::isfinite(rep.sup_ratio) &&
                        std::isfinite(mol.size_constant);
      if (!good) ++failed;
      ++total;
      csv += fmt("%zu,%d,%ld,%d,%.17g,%.17g,%d\n", j, mol.cube.v, mol.cube.k1,
                 mol.zero_level ? 1 : 0, mol.size_constant, rep.sup_ratio,
                 good ? 1 : 0);
    }
    em.write("molecule-sizes-" + slug(st.names[i]) + ".csv", csv);

    // heat-decay stability on a deterministic sample of the cube list
    std::string hcsv =
        "index,v,sup_small,sup_small_fine,sup_large,sup_large_fine,"
        "dev_small,dev_large\n";
    const std::size_t n = dec.molecules.size();
    const std::size_t step = std::max<std::size_t>(1, n / 7);
    std::vector<std::size_t> picks;
    for (std::size_t j = 0; j < n; j += step) picks.push_back(j);
    if (!picks.empty() && picks.back() != n - 1) picks.push_back(n - 1);
    for (const std::size_t j : picks) {
      const auto& mol = dec.molecules[j];
      const auto a1 = molecule_heat_audit(mol, kFamM, *st.ctx, 1);
      const auto a2 = molecule_heat_audit(mol, kFamM, *st.ctx, 2);
      const double ms = std::max(a1.sup_small, a2.sup_small);
      const double ml = std::max(a1.sup_large, a2.sup_large);
      const double ds = ms > 0.0 ? std::abs(a2.sup_small - a1.sup_small) / ms : 0.0;
      const double dl = ml > 0.0 ? std::abs(a2.sup_large - a1.sup_large) / ml : 0.0;
      ok = ok && std::isfinite(a1.sup_small) && std::isfinite(a1.sup_large) &&
           ds <= kHeatStabilityTol && dl <= kHeatStabilityTol;
      worst_heat_dev = std::max({worst_heat_dev, ds, dl});
      hcsv += fmt("%zu,%d,%.8e,%.8e,%.8e,%.8e,%.3f,%.3f\n", j, mol.cube.v,
                  a1.sup_small, a2.sup_small, a1.sup_large, a2.sup_large, ds,
                  dl);
    }
    em.write("molecule-heat-" + slug(st.names[i]) + ".csv", hcsv);
  }

  r.seconds = since(t0);
  r.pass = ok && failed == 0 && total > 0;
  r.detail = fmt("%zu molecules over 4 functions, %zu failed size audit; "
                 "worst heat-decay doubling dev %.1f%% (tol %.0f%%); includes "
                 "%.1f s of decomposition",
                 total, failed, 100.0 * worst_heat_dev,
                 100.0 * kHeatStabilityTol, dec_seconds);
  return r;
}

// 6. Round-trip residuals for h0 + 0.5 h4 and gaussian(1).
CriterionResult run_round_trip(const FamilyState& st, const Emitter& em) {
  CriterionResult r{6, "round-trip-residual"};
  const auto t0 = Clock::now();

  const auto alpha0 = ExponentField::constant(0.0);
  const auto two = ExponentField::constant(2.0);
  const auto mix = mixture_h0_h4(st.scheme);
  const auto mix_dec = molecular_decompose(mix, kFamM, kFamBig, kFamN,
                                           kFamVmax, alpha0, two, two, *st.ctx);

  std::string csv = "function,residual_l2,molecules,dropped,leakage_max\n";
  csv += fmt("h0+0.5h4,%.8e,%zu,%zu,%.8e\n", mix_dec.residual_l2,
             mix_dec.molecules.size(), mix_dec.dropped, mix_dec.leakage_max);
  double gauss_residual = -1.0;
  for (std::size_t i = 0; i < st.names.size(); ++i) {
    const auto& dec = st.decs[i];
    csv += fmt("%s,%.8e,%zu,%zu,%.8e\n", st.names[i].c_str(), dec.residual_l2,
               dec.molecules.size(), dec.dropped, dec.leakage_max);
    if (st.names[i] == "gaussian(1)") gauss_residual = dec.residual_l2;
  }
  em.write("round-trip.csv", csv);

  r.seconds = since(t0);
  r.pass = mix_dec.residual_l2 <= kResidualTol && gauss_residual >= 0.0 &&
           gauss_residual <= kResidualTol;
  r.detail = fmt("h0+0.5h4 residual %.2e, gaussian(1) %.2e (tol %.0e, "
                 "v_max=%d, cap %d)",
                 mix_dec.residual_l2, gauss_residual, kResidualTol, kFamVmax,
                 st.scheme.degree_cap);
  return r;
}

// 7. Analysis and synthesis norm ratios bounded; m-independence ratio in a
// fixed interval and stable under doubled time resolution.
CriterionResult run_norm_equivalence(const FamilyState& st, const Emitter& em) {
  CriterionResult r{7, "norm-equivalence"};
  const auto t0 = Clock::now();

  const auto alpha0 = ExponentField::constant(0.0);
  const auto two = ExponentField::constant(2.0);
  SamplingScheme fine = st.scheme;
  fine.nodes_per_level *= 2;
  const SchemeContext fctx(fine);

  bool ok = true;
  double worst_mdev = 0.0, an_lo = 1e300, an_hi = 0.0, syn_lo = 1e300,
         syn_hi = 0.0;
  std::string csv =
      "function,tl_m6,tl_m8,seq,synth_tl,analysis_ratio,synthesis_ratio,"
      "m_ratio,m_ratio_fine,m_dev\n";
  for (std::size_t i = 0; i < st.family.size(); ++i) {
    const auto& f = st.family[i];
    const auto& dec = st.decs[i];
    const double tl6 = tl_norm(f, alpha0, two, two, 6, *st.ctx).total;
    const double tl8 = tl_norm(f, alpha0, two, two, 8, *st.ctx).total;
    const double seq = seq_norm(dec.coefficients, alpha0, two, two);
    const auto synth = synthesize_molecules(dec.coefficients, dec.molecules);
    const double tls = tl_norm(synth, alpha0, two, two, 6, *st.ctx).total;

    const double analysis = seq / tl6;
    const double synthesis = tls / seq;
    const double mr = tl6 / tl8;
    const double tl6f = tl_norm(f, alpha0, two, two, 6, fctx).total;
    const double tl8f = tl_norm(f, alpha0, two, two, 8, fctx).total;
    const double mrf = tl6f / tl8f;
    const double mdev = std::abs(mr - mrf) / std::max(mr, mrf);

    ok = ok && std::isfinite(tl6) && tl6 > 0.0 && std::isfinite(seq) &&
         analysis >= kEquivLo && analysis <= kEquivHi &&
         synthesis >= kEquivLo && synthesis <= kEquivHi && mr >= kMRatioLo &&
         mr <= kMRatioHi && mdev <= kMStabilityTol;
    worst_mdev = std::max(worst_mdev, mdev);
    an_lo = std::min(an_lo, analysis);
    an_hi = std::max(an_hi, analysis);
    syn_lo = std::min(syn_lo, synthesis);
    syn_hi = std::max(syn_hi, synthesis);
    csv += fmt("%s,%.8e,%.8e,%.8e,%.8e,%.6g,%.6g,%.6g,%.6g,%.4f\n",
               st.names[i].c_str(), tl6, tl8, seq, tls, analysis, synthesis,
               mr, mrf, mdev);
  }
  em.write("norm-equivalence.csv", csv);

  r.seconds = since(t0);
  r.pass = ok && r.seconds <= kEquivSeconds;
  r.detail = fmt("analysis ratios [%.3g, %.3g], synthesis [%.3g, %.3g] "
                 "(bounds [%.0e, %.0e]); m6/m8 dev %.1f%% under doubled time "
                 "nodes (tol %.0f%%)",
                 an_lo, an_hi, syn_lo, syn_hi, kEquivLo, kEquivHi,
                 100.0 * worst_mdev, 100.0 * kMStabilityTol);
  return r;
}

// 8. Operator identities: negative-power symbol vs its defining integral,
// the constant multiplier as identity, and the e^{-t} profile at lambda = 9.
CriterionResult run_operator_identities(const Emitter& em) {
  CriterionResult r{8, "operator-identities"};
  const auto t0 = Clock::now();
  const SamplingScheme sc = SamplingScheme::defaults(1);

  std::string csv = "check,value,bound\n";
  bool ok = true;
  double worst_gap = 0.0;
  for (const double sigma : {0.5, 1.0, 1.5}) {
    const double gap = riesz_validation_gap(1, sc.degree_cap, sigma);
    worst_gap = std::max(worst_gap, gap);
    ok = ok && gap <= kSymbolGapTol;
    csv += fmt("symbol-gap-sigma-%.1f,%.3e,%.0e\n", sigma, gap, kSymbolGapTol);
  }

  HermiteExpansion ones(1, sc.degree_cap);
  for (int d = 0; d <= sc.degree_cap; ++d)
    ones.set_coefficient(MultiIndex(d), 1.0);
  const auto ident = spectral_multiplier(ones, MultiplierProfile::constant(1.0), sc);
  double ident_dev = 0.0;
  for (int d = 0; d <= sc.degree_cap; ++d)
    ident_dev = std::max(ident_dev,
                         std::abs(ident.coefficient(MultiIndex(d)) - 1.0));
  ok = ok && ident_dev <= kIdentityTol;
  csv += fmt("constant-multiplier-identity,%.3e,%.0e\n", ident_dev, kIdentityTol);

  HermiteExpansion h4(1, sc.degree_cap);
  h4.set_coefficient(MultiIndex(4), 1.0);
  const auto damped =
      spectral_multiplier(h4, MultiplierProfile::exponential(1.0, 1.0), sc);
  const double m9 = damped.coefficient(MultiIndex(4));
  const double m9_dev = std::abs(m9 - 0.9);
  ok = ok && m9_dev <= kPointMultiplierTol;
  csv += fmt("exponential-multiplier-at-9,%.3e,%.0e\n", m9_dev,
             kPointMultiplierTol);
  em.write("operator-identities.csv", csv);

  r.seconds = since(t0);
  r.pass = ok;
  r.detail = fmt("symbol gap %.2e (tol %.0e), identity dev %.2e (tol %.0e), "
                 "m(9) dev %.2e (tol %.0e)",
                 worst_gap, kSymbolGapTol, ident_dev, kIdentityTol, m9_dev,
                 kPointMultiplierTol);
  return r;
}

// 9. Boundedness tables for the smoothing operator (constant and variable
// regularity), the Laplace-transform multiplier, and the atomic embedding
// family with negative regularity. Ratio-stability flags are recorded as
// warnings; hard assertions are finiteness and boundedness.
CriterionResult run_boundedness(const FamilyState& st, unsigned seed,
                                const Emitter& em) {
  CriterionResult r{9, "boundedness-suites"};
  const auto t0 = Clock::now();

  const auto two = ExponentField::constant(2.0);
  const auto& family = st.family;
  bool ok = true, all_stable = true;

  const auto hard = [&](const BoundednessReport& rep) {
    std::size_t live = 0;
    for (const auto& row : rep.rows)
      if (!row.skipped) {
        ++live;
        ok = ok && std::isfinite(row.ratio) && row.ratio > 0.0 &&
             row.ratio < kRatioCap;
      }
    ok = ok && live > 0;
    all_stable = all_stable && rep.stable;
  };

  const auto smooth = [](const HermiteExpansion& f) {
    return riesz_potential(f, 1.0);
  };
  const SpaceParams flat0{ExponentField::constant(0.0), two, two, 6};
  const SpaceParams flat2{ExponentField::constant(2.0), two, two, 6};
  const auto rep_const =
      boundedness_report(smooth, family, flat0, flat2, st.scheme);
  hard(rep_const);
  em.write("boundedness-smoothing-constant.csv", rep_const.csv());

  const auto grid = st.ctx->grid();
  std::vector<double> av(grid->size()), av2(grid->size());
  for (std::size_t i = 0; i < grid->size(); ++i) {
    const double a = std::clamp(0.1 * std::sin(grid->point(i)[0]), -0.2, 0.2);
    av[i] = a;
    av2[i] = a + 2.0;
  }
  const SpaceParams var0{ExponentField::grid_sampled(grid, av), two, two, 6};
  const SpaceParams var2{ExponentField::grid_sampled(grid, av2), two, two, 6};
  const auto rep_var =
      boundedness_report(smooth, family, var0, var2, st.scheme);
  hard(rep_var);
  em.write("boundedness-smoothing-variable.csv", rep_var.csv());

  const auto prof = MultiplierProfile::exponential(1.0, 1.0);
  const auto mult = [&](const HermiteExpansion& f) {
    return spectral_multiplier(f, prof, st.scheme);
  };
  const SpaceParams third{ExponentField::constant(0.3), two, two, 6};
  const auto rep_mult =
      boundedness_report(mult, family, third, third, st.scheme);
  hard(rep_mult);
  em.write("boundedness-multiplier.csv", rep_mult.csv());

  // randomized atomic-embedding sets at alpha = -0.3 (negative everywhere)
  const auto alpha_neg = ExponentField::constant(-0.3);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> mag(0.25, 1.0);
  std::uniform_int_distribution<int> coin(0, 1);
  double ratio_lo = 1e300, ratio_hi = 0.0;
  std::size_t unstable = 0;
  std::string ecsv = "set,seq_norm,func_norm,ratio,ratio_refined,stable\n";
  for (int trial = 0; trial < 20; ++trial) {
    CoefficientSet s(st.scheme, 2);
    std::vector<SmoothAtom> atoms;
    for (const int v : {0, 1, 2}) {
      std::uniform_int_distribution<long> pos(-(2L << v) / 2,
                                              (2L << v) / 2 - 1);
      const DyadicCube q{v, pos(rng), 0};
      s.set(q, (coin(rng) ? 1.0 : -1.0) * mag(rng));
      atoms.push_back(make_smooth_atom(q, 1, 2, st.scheme));
    }
    const auto rep = embedding_check(s, atoms, alpha_neg, two, two, 6,
                                     st.scheme, kEmbedStabilityTol);
    ok = ok && !rep.skipped && std::isfinite(rep.ratio) && rep.ratio > 0.0 &&
         rep.ratio < kRatioCap && rep.alpha_negative;
    if (!rep.stable) {
      ++unstable;
      all_stable = false;
    }
    ratio_lo = std::min(ratio_lo, rep.ratio);
    ratio_hi = std::max(ratio_hi, rep.ratio);
    ecsv += fmt("%d,%.8e,%.8e,%.6g,%.6g,%d\n", trial, rep.seq, rep.func,
                rep.ratio, rep.ratio_refined, rep.stable ? 1 : 0);
  }
  em.write("embedding.csv", ecsv);

  r.seconds = since(t0);
  r.pass = ok;
  r.stability_warning = !all_stable;
  r.detail = fmt("smoothing max ratios %.3g (constant) / %.3g (variable), "
                 "multiplier max %.3g; embedding ratios [%.3g, %.3g] over 20 "
                 "sets, %zu unstable",
                 rep_const.max_ratio, rep_var.max_ratio, rep_mult.max_ratio,
                 ratio_lo, ratio_hi, unstable);
  return r;
}

}  // namespace

HermiteExpansion named_function(const std::string& name,
                                const SchemeContext& ctx) {
  const int dim = ctx.scheme().dimension;
  const int cap = ctx.degree_cap();
  const auto basis = [&](std::initializer_list<int> degrees) {
    HermiteExpansion f(dim, cap);
    for (const int d : degrees)
      f.set_coefficient(dim == 1 ? MultiIndex(d) : MultiIndex(d, 0), 1.0);
    return f;
  };
  const auto arg_of = [&](const char* prefix) -> double {
    const std::string pre(prefix);
    if (name.size() <= pre.size() + 1 || name.rfind(pre, 0) != 0 ||
        name.back() != ')')
      throw std::invalid_argument("unknown test function '" + name + "'");
    const std::string inner =
        name.substr(pre.size(), name.size() - pre.size() - 1);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(inner, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != inner.size())
      throw std::invalid_argument("unknown test function '" + name + "'");
    return v;
  };

  if (name == "h0") return basis({0});
  if (name == "h2+h5") return basis({2, 5});
  if (name.rfind("gaussian(", 0) == 0) {
    const double s = arg_of("gaussian(");
    if (!(s > 0.0))
      throw std::invalid_argument("gaussian width must be positive");
    const double inv = 1.0 / (2.0 * s * s);
    return expand(
        [dim, inv](Point x) {
          const double r2 =
              x[0] * x[0] + (dim == 2 ? x[1] * x[1] : 0.0);
          return std::exp(-r2 * inv);
        },
        ctx);
  }
  if (name.rfind("shifted-gaussian(", 0) == 0) {
    const double c = arg_of("shifted-gaussian(");
    return expand(
        [dim, c](Point x) {
          const double d0 = x[0] - c;
          const double r2 = d0 * d0 + (dim == 2 ? x[1] * x[1] : 0.0);
          return std::exp(-0.5 * r2);
        },
        ctx);
  }
  throw std::invalid_argument("unknown test function '" + name + "'");
}

std::vector<CriterionResult> run_acceptance_battery(const BatteryOptions& opt) {
  if (!(opt.refine >= 1.0))
    throw std::domain_error("battery refine factor must be >= 1");
  Emitter em;
  if (!opt.out_dir.empty()) {
    std::filesystem::create_directories(opt.out_dir);
    em.dir = opt.out_dir;
    em.on = true;
  }

  FamilyState st;
  st.scheme = opt.refine == 1.0 ? SamplingScheme::defaults(1)
                                : SamplingScheme::defaults(1).refined(opt.refine);
  st.ctx = std::make_unique<SchemeContext>(st.scheme);

  const auto t0 = Clock::now();
  std::vector<CriterionResult> out;
  out.push_back(run_kernel_agreement(em));
  out.push_back(run_reproduction(em));
  out.push_back(run_luxemburg(em));
  out.push_back(run_decay_audits(em));
  out.push_back(run_molecule_audits(st, em));
  out.push_back(run_round_trip(st, em));
  out.push_back(run_norm_equivalence(st, em));
  out.push_back(run_operator_identities(em));
  out.push_back(run_boundedness(st, opt.seed, em));

  CriterionResult total{10, "full-battery"};
  total.seconds = since(t0);
  bool all = true, warn = false;
  for (const auto& c : out) {
    all = all && c.pass;
    warn = warn || c.stability_warning;
  }
  total.pass = all && total.seconds <= kTotalSeconds;
  total.stability_warning = warn;
  total.detail = fmt("%d/9 criteria passed, %.1f s total (budget %.0f s)",
                     static_cast<int>(std::count_if(
                         out.begin(), out.end(),
                         [](const CriterionResult& c) { return c.pass; })),
                     total.seconds, kTotalSeconds);
  out.push_back(total);

  if (em.on) {
    Json jr;
    jr["suite"] = "acceptance";
    jr["seed"] = opt.seed;
    jr["refine"] = opt.refine;
    jr["scheme"] = scheme_to_json(st.scheme);
    jr["criteria"] = Json::array();
    for (const auto& c : out)
      jr["criteria"].push_back({{"id", c.id},
                                {"name", c.name},
                                {"pass", c.pass},
                                {"stability_warning", c.stability_warning},
                                {"seconds", c.seconds},
                                {"detail", c.detail}});
    jr["all_pass"] = out.back().pass;
    jr["total_seconds"] = out.back().seconds;
    em.write("report.json", jr.dump(2) + "\n");
  }
  return out;
}

}  // namespace htl
