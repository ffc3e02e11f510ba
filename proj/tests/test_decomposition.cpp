#include <doctest.h>

#include <cmath>

#include "htl/decomposition.hpp"
#include "htl/errors.hpp"

using namespace htl;

namespace {

SamplingScheme quick_scheme() {
  SamplingScheme s = SamplingScheme::defaults(1);
  s.degree_cap = 64;
  s.points_per_axis = 256;
  s.time_levels = 10;
  return s;
}

}  // namespace

TEST_CASE("reproducing identity on the ground state") {
  const SamplingScheme sc = SamplingScheme::defaults(1);
  HermiteExpansion f(1, sc.degree_cap);
  f.set_coefficient(MultiIndex({0}), 1.0);
  const auto r = calderon_reconstruct(f, 1, sc);
  CHECK(r.coefficient(MultiIndex({0})) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("reproducing identity per eigenvalue") {
  const SamplingScheme sc = SamplingScheme::defaults(1);
  HermiteExpansion f(1, sc.degree_cap);
  f.set_coefficient(MultiIndex({0}), 1.0);
  f.set_coefficient(MultiIndex({4}), 0.5);
  for (int l = 1; l <= 5; ++l) {
    const auto r = calderon_reconstruct(f, l, sc);
    CHECK(r.coefficient(MultiIndex({0})) == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(r.coefficient(MultiIndex({4})) == doctest::Approx(0.5).epsilon(1e-8));
  }
  // all eigenvalues up to 2 cap + 1 at once
  HermiteExpansion ones(1, sc.degree_cap);
  for (std::size_t i = 0; i < ones.size(); ++i) ones.slot(i) = 1.0;
  for (int l = 1; l <= 6; ++l) {
    const auto r = calderon_reconstruct(ones, l, sc);
    double worst = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i)
      worst = std::max(worst, std::abs(r.slot(i) - 1.0));
    CHECK(worst < 1e-8);
  }
}

TEST_CASE("reconstruction is linear") {
  const SamplingScheme sc = quick_scheme();
  HermiteExpansion f(1, sc.degree_cap), g(1, sc.degree_cap);
  f.set_coefficient(MultiIndex({1}), 1.0);
  g.set_coefficient(MultiIndex({3}), 1.0);
  auto fg = f;
  fg *= 2.0;
  for (std::size_t i = 0; i < fg.size(); ++i) fg.slot(i) += 3.0 * g.raw()[i];
  auto rhs = calderon_reconstruct(f, 3, sc);
  rhs *= 2.0;
  const auto rg = calderon_reconstruct(g, 3, sc);
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs.slot(i) += 3.0 * rg.raw()[i];
  const auto lhs = calderon_reconstruct(fg, 3, sc);
  for (std::size_t i = 0; i < lhs.size(); ++i)
    CHECK(lhs.raw()[i] == doctest::Approx(rhs.raw()[i]).epsilon(1e-12));
  CHECK_THROWS_AS(calderon_reconstruct(f, 0, sc), std::domain_error);
}

TEST_CASE("admissibility thresholds") {
  const auto grid = make_box_grid(1, 8.0, 512);
  const auto zero = ExponentField::constant(0.0);
  const auto two = ExponentField::constant(2.0);
  const auto ok = check_admissibility(6, 4, 2, zero, two, two, *grid);
  CHECK(ok.tau == 1.0);
  CHECK(ok.clog == 0.0);
  CHECK(ok.n_floor == doctest::Approx(0.0));
  CHECK(ok.m_floor == doctest::Approx(3.0));
  CHECK(ok.cap_floor == doctest::Approx(3.0));
  CHECK(ok.all_ok);
  const auto shallow = check_admissibility(6, 3, 2, zero, two, two, *grid);
  CHECK(shallow.n_ok);
  CHECK(shallow.m_ok);
  CHECK_FALSE(shallow.cap_ok);
  CHECK_FALSE(shallow.all_ok);
  const auto neg = check_admissibility(2, 4, 2, ExponentField::constant(-0.3),
                                       two, two, *grid);
  CHECK(neg.cap_floor == doctest::Approx(3.3));
  CHECK_FALSE(neg.m_ok);  // m must exceed max{alpha+, 0} + N + n = 3
}

TEST_CASE("decomposition of zero is empty") {
  const SamplingScheme sc = quick_scheme();
  const HermiteExpansion f(1, sc.degree_cap);
  const auto zero = ExponentField::constant(0.0);
  const auto two = ExponentField::constant(2.0);
  const auto res = molecular_decompose(f, 6, 3, 2, 3, zero, two, two, sc);
  CHECK(res.coefficients.size() == 0);
  CHECK(res.molecules.empty());
  CHECK(res.residual_l2 == 0.0);
  CHECK(res.dropped == 0);
}

TEST_CASE("decomposition guards") {
  const SamplingScheme sc = quick_scheme();
  HermiteExpansion f(1, sc.degree_cap);
  f.set_coefficient(MultiIndex({0}), 1.0);
  const auto zero = ExponentField::constant(0.0);
  const auto two = ExponentField::constant(2.0);
  CHECK_THROWS_AS(molecular_decompose(f, 0, 3, 2, 3, zero, two, two, sc),
                  std::domain_error);
  CHECK_THROWS_AS(molecular_decompose(f, 6, 3, 2, 0, zero, two, two, sc),
                  std::domain_error);
  CHECK_THROWS_AS(molecular_decompose(f, 6, 3, 2, 10, zero, two, two, sc),
                  std::invalid_argument);  // no octave at v_max
  SamplingScheme starved = sc;
  starved.nodes_per_level = 2;
  CHECK_THROWS_AS(molecular_decompose(f, 6, 3, 2, 3, zero, two, two, starved),
                  accuracy_error);
}

TEST_CASE("band sup matches a brute-force evaluation") {
  SamplingScheme sc = SamplingScheme::defaults(1);
  sc.sup_samples_per_axis = 12;
  HermiteExpansion f(1, sc.degree_cap);
  f.set_coefficient(MultiIndex({2}), 1.0);
  const auto zero = ExponentField::constant(0.0);
  const auto two = ExponentField::constant(2.0);
  const auto res = molecular_decompose(f, 6, 3, 2, 1, zero, two, two, sc);

  // s_Q on Q = [0, 1/2): the data is a single mode, so the sup factors into
  // the scalar profile at the octave nodes times |h_2| at the sample points
  const TimeGrid tg = TimeGrid::make(sc.time_levels, sc.nodes_per_level);
  const double r5 = std::sqrt(5.0);
  double best = 0.0;
  for (const std::size_t i : tg.octave(1)) {
    const double prof = std::pow(tg.node[i] * r5, 6) * std::exp(-tg.node[i] * r5);
    for (int j = 0; j < 12; ++j) {
      const double y = 0.5 * (j + 0.5) / 12.0;
      best = std::max(best, prof * std::abs(eval_hermite_1d(2, y)));
    }
  }
  const double oracle = std::sqrt(0.5) * best;
  CHECK(res.coefficients.at({1, 0, 0}) ==
        doctest::Approx(oracle).epsilon(1e-3));
}

TEST_CASE("round trip through molecules") {
  const SamplingScheme sc = SamplingScheme::defaults(1);
  const SchemeContext ctx(sc);
  HermiteExpansion f(1, sc.degree_cap);
  f.set_coefficient(MultiIndex({0}), 1.0);
  f.set_coefficient(MultiIndex({4}), 0.5);
  const auto zero = ExponentField::constant(0.0);
  const auto two = ExponentField::constant(2.0);
  const auto res = molecular_decompose(f, 6, 3, 2, 8, zero, two, two, ctx);

  CHECK(res.residual_l2 <= 1e-2);
  CHECK(res.molecules.size() == res.coefficients.size());
  CHECK(res.leakage.size() == res.molecules.size());
  CHECK(res.leakage_max <= 1.0);
  CHECK(res.excluded_mass_rel < 1e-12);
  CHECK_FALSE(res.admissibility.cap_ok);  // M = 3 misses M > 3
  CHECK(res.admissibility.n_ok);
  CHECK(res.admissibility.m_ok);

  // the reported residual is the residual of the synthesized sum
  const auto back = synthesize_molecules(res.coefficients, res.molecules);
  auto diff = back;
  diff -= f;
  CHECK(diff.l2_norm() / f.l2_norm() ==
        doctest::Approx(res.residual_l2).epsilon(1e-10));

  // every audited size constant certifies its own molecule; spot check
  for (std::size_t i = 0; i < res.molecules.size(); i += 97) {
    const auto rep = validate_molecule(res.molecules[i], ctx);
    CHECK(rep.pass);
    CHECK(rep.sup_ratio == doctest::Approx(res.molecules[i].size_constant));
    CHECK(std::isfinite(rep.sup_ratio));
  }

  // zero-level molecules audit k = M..2M, others 0..2M
  CHECK(res.molecules.front().zero_level);
  const auto rep0 = validate_molecule(res.molecules.front(), ctx);
  CHECK(rep0.rows.size() == 4);
  CHECK(rep0.rows.front().k == 3);
  const auto repv = validate_molecule(res.molecules.back(), ctx);
  CHECK(repv.rows.size() == 7);
  CHECK(repv.rows.front().k == 0);

  // doubling b doubles every size ratio
  auto scaled = res.molecules.back();
  scaled.b *= 2.0;
  const auto rep2 = validate_molecule(scaled, ctx);
  for (std::size_t i = 0; i < rep2.rows.size(); ++i)
    CHECK(rep2.rows[i].ratio ==
          doctest::Approx(2.0 * repv.rows[i].ratio).epsilon(1e-12));

  // heat-decay audit: finite two-regime ratios, parsable table
  const auto heat = molecule_heat_audit(res.molecules.back(), 6, ctx);
  CHECK(heat.sup_small > 0.0);
  CHECK(heat.sup_large > 0.0);
  CHECK(std::isfinite(heat.sup_small));
  CHECK(std::isfinite(heat.sup_large));
  CHECK(heat.rows.size() == 16);
  const std::string csv = heat.csv();
  CHECK(csv.rfind("t,regime,ratio\n", 0) == 0);
  CHECK(csv.find("supremum") != std::string::npos);
}

TEST_CASE("molecule synthesis guards") {
  const SamplingScheme sc = quick_scheme();
  const SchemeContext ctx(sc);
  HermiteExpansion f(1, sc.degree_cap);
  f.set_coefficient(MultiIndex({1}), 1.0);
  const auto zero = ExponentField::constant(0.0);
  const auto two = ExponentField::constant(2.0);
  auto res = molecular_decompose(f, 4, 2, 1, 2, zero, two, two, ctx);

  // empty input synthesizes to zero
  const CoefficientSet none(sc, 2);
  CHECK(synthesize_molecules(none, {}).l2_norm() == 0.0);

  // single molecule with unit coefficient comes back verbatim
  CoefficientSet one(sc, 2);
  const auto& mol = res.molecules.front();
  one.set(mol.cube, 1.0);
  const auto got = synthesize_molecules(one, {mol});
  for (std::size_t i = 0; i < got.size(); ++i) {
    const double lam = eigenvalue(got.index_at(i));
    CHECK(got.raw()[i] ==
          doctest::Approx(std::pow(lam, mol.M * 0.5) * mol.b.raw()[i]));
  }

  // orphans on either side are rejected
  CoefficientSet pairset(sc, 2);
  pairset.set(res.molecules[0].cube, 1.0);
  pairset.set(res.molecules[1].cube, 1.0);
  CHECK_THROWS_AS(synthesize_molecules(pairset, {res.molecules[0]}),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      synthesize_molecules(one, {res.molecules[0], res.molecules[1]}),
      std::invalid_argument);
}

TEST_CASE("decomposition is deterministic") {
  const SamplingScheme sc = quick_scheme();
  const SchemeContext ctx(sc);
  HermiteExpansion f(1, sc.degree_cap);
  f.set_coefficient(MultiIndex({2}), 1.0);
  f.set_coefficient(MultiIndex({5}), -0.7);
  const auto zero = ExponentField::constant(0.0);
  const auto two = ExponentField::constant(2.0);
  const auto a = molecular_decompose(f, 6, 3, 2, 3, zero, two, two, ctx);
  const auto b = molecular_decompose(f, 6, 3, 2, 3, zero, two, two, ctx);
  REQUIRE(a.coefficients.size() == b.coefficients.size());
  for (std::size_t i = 0; i < a.coefficients.items().size(); ++i) {
    CHECK(a.coefficients.items()[i].second == b.coefficients.items()[i].second);
    CHECK(a.molecules[i].size_constant == b.molecules[i].size_constant);
  }
  CHECK(a.residual_l2 == b.residual_l2);
}
