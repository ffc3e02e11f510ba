#include <doctest.h>

#include <cmath>
#include <random>

#include "htl/special.hpp"
#include "htl/tlspace.hpp"

using namespace htl;

namespace {

SamplingScheme small_scheme() {
  SamplingScheme s = SamplingScheme::defaults(1);
  s.degree_cap = 64;
  s.points_per_axis = 256;
  s.time_levels = 10;
  s.nodes_per_level = 4;
  return s;
}

}  // namespace

TEST_CASE("dyadic cube geometry") {
  const DyadicCube q{2, -3, 1};
  CHECK(q.side() == 0.25);
  CHECK(q.corner()[0] == -0.75);
  CHECK(q.corner()[1] == 0.25);
  CHECK(q.measure(1) == 0.25);
  CHECK(q.measure(2) == 0.0625);
  CHECK(q == DyadicCube{2, -3, 1});
}

TEST_CASE("coefficient set stores and validates cubes") {
  CoefficientSet s(SamplingScheme::defaults(1), 4);
  s.set({0, 2, 0}, 1.5);
  s.set({3, -10, 0}, -0.25);
  CHECK(s.at({0, 2, 0}) == 1.5);
  CHECK(s.at({3, -10, 0}) == -0.25);
  CHECK(s.at({1, 0, 0}) == 0.0);
  CHECK(s.size() == 2);
  s.set({0, 2, 0}, 2.0);  // overwrite, no duplicate
  CHECK(s.at({0, 2, 0}) == 2.0);
  CHECK(s.size() == 2);

  CHECK_THROWS_AS(s.set({5, 0, 0}, 1.0), std::out_of_range);   // level > v_max
  CHECK_THROWS_AS(s.set({-1, 0, 0}, 1.0), std::out_of_range);  // negative level
  CHECK_THROWS_AS(s.set({0, 8, 0}, 1.0), std::out_of_range);   // outside box
  CHECK_THROWS_AS(s.set({0, -9, 0}, 1.0), std::out_of_range);
  CHECK_THROWS_AS(s.set({0, 0, 0}, std::nan("")), std::invalid_argument);
}

TEST_CASE("norm of the ground state against scalar quadrature") {
  const SamplingScheme scheme = SamplingScheme::defaults(1);
  const SchemeContext ctx(scheme);
  HermiteExpansion f(1, scheme.degree_cap);
  f.set_coefficient(MultiIndex({0}), 1.0);
  const auto zero = ExponentField::constant(0.0);
  const auto two = ExponentField::constant(2.0);

  const auto nb = tl_norm(f, zero, two, two, 3, ctx);
  CHECK(nb.term_lowpass == doctest::Approx(std::exp(-1.0)).epsilon(1e-6));
  // (t sqrt(H))^3 e^{-t sqrt(H)} h0 = t^3 e^{-t} h0, so the square function
  // integral is int_0^1 t^6 e^{-2t} dt/t = (5!/2^6) P(6,2)
  const double oracle = std::sqrt(1.875 * reg_gamma_lower(6, 2.0));
  CHECK(nb.term_squarefn == doctest::Approx(oracle).epsilon(1e-6));
  CHECK(nb.total == nb.term_lowpass + nb.term_squarefn);
  CHECK(nb.m_threshold == doctest::Approx(2.0));
  CHECK(nb.m_ok);
  CHECK(nb.tail_time < 1e-9);
  CHECK(nb.tail_space < 1e-10);
}

TEST_CASE("norm of zero input") {
  const SamplingScheme scheme = small_scheme();
  const SchemeContext ctx(scheme);
  const HermiteExpansion f(1, scheme.degree_cap);
  const auto zero = ExponentField::constant(0.0);
  const auto two = ExponentField::constant(2.0);
  const auto nb = tl_norm(f, zero, two, two, 3, ctx);
  CHECK(nb.term_lowpass == 0.0);
  CHECK(nb.term_squarefn == 0.0);
  CHECK(nb.total == 0.0);
}

TEST_CASE("norm homogeneity") {
  const SamplingScheme scheme = small_scheme();
  const SchemeContext ctx(scheme);
  HermiteExpansion f(1, scheme.degree_cap);
  f.set_coefficient(MultiIndex({2}), 1.0);
  f.set_coefficient(MultiIndex({5}), 1.0);
  auto g = f;
  g *= 2.5;
  const auto zero = ExponentField::constant(0.0);
  const auto two = ExponentField::constant(2.0);
  const auto a = tl_norm(f, zero, two, two, 3, ctx);
  const auto b = tl_norm(g, zero, two, two, 3, ctx);
  CHECK(b.total == doctest::Approx(2.5 * a.total).epsilon(1e-8));
}

TEST_CASE("m below the threshold warns without failing") {
  const SamplingScheme scheme = small_scheme();
  const SchemeContext ctx(scheme);
  HermiteExpansion f(1, scheme.degree_cap);
  f.set_coefficient(MultiIndex({0}), 1.0);
  const auto zero = ExponentField::constant(0.0);
  const auto two = ExponentField::constant(2.0);
  const auto nb = tl_norm(f, zero, two, two, 1, ctx);
  CHECK_FALSE(nb.m_ok);
  CHECK(nb.total > 0.0);
  CHECK_THROWS_AS(tl_norm(f, zero, two, two, -1, ctx), std::domain_error);
}

TEST_CASE("norm persists under resolution doubling") {
  SamplingScheme coarse = small_scheme();
  SamplingScheme fine = coarse;
  fine.points_per_axis *= 2;
  fine.nodes_per_level *= 2;
  HermiteExpansion f(1, coarse.degree_cap);
  f.set_coefficient(MultiIndex({2}), 1.0);
  f.set_coefficient(MultiIndex({5}), 0.6);
  const auto alpha = ExponentField::constant(0.4);
  const auto p = ExponentField::constant(2.0);
  const auto q = ExponentField::constant(2.0);
  const double a = tl_norm(f, alpha, p, q, 6, coarse).total;
  const double b = tl_norm(f, alpha, p, q, 6, fine).total;
  CHECK(std::abs(a - b) <= 0.01 * std::max(a, b));
}

TEST_CASE("norms are m-stable for smooth inputs") {
  const SamplingScheme scheme = small_scheme();
  const SchemeContext ctx(scheme);
  HermiteExpansion f(1, scheme.degree_cap);
  f.set_coefficient(MultiIndex({2}), 1.0);
  f.set_coefficient(MultiIndex({5}), 1.0);
  const auto zero = ExponentField::constant(0.0);
  const auto two = ExponentField::constant(2.0);
  const double n6 = tl_norm(f, zero, two, two, 6, ctx).total;
  const double n8 = tl_norm(f, zero, two, two, 8, ctx).total;
  const double r = n6 / n8;
  CHECK(r > 0.1);
  CHECK(r < 10.0);
}

TEST_CASE("sequence norm of a normalized cube is one") {
  const auto two = ExponentField::constant(2.0);
  const auto alpha = ExponentField::affine_clamped(0.3, 0.1, -1.0, 1.0);

  CoefficientSet a(SamplingScheme::defaults(1), 4);
  a.set({0, 0, 0}, 1.0);
  CHECK(seq_norm(a, alpha, two, two) == doctest::Approx(1.0).epsilon(1e-9));

  // |Q|^{-1/2} 1_Q has unit L^2 mass at every level
  CoefficientSet b(SamplingScheme::defaults(1), 4);
  b.set({2, -5, 0}, 1.0);
  CHECK(seq_norm(b, ExponentField::constant(0.0), two, two) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("sequence norm of the empty set") {
  const auto two = ExponentField::constant(2.0);
  CoefficientSet s(SamplingScheme::defaults(1), 3);
  CHECK(seq_norm(s, ExponentField::constant(0.0), two, two) == 0.0);
}

TEST_CASE("sequence norm grows with any coefficient") {
  const auto two = ExponentField::constant(2.0);
  const auto alpha = ExponentField::constant(0.2);
  CoefficientSet s(SamplingScheme::defaults(1), 3);
  std::mt19937_64 rng(20240820);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int v = 0; v <= 3; ++v) {
    const long span = 8L << v;
    for (int c = 0; c < 6; ++c)
      s.set({v, static_cast<long>(rng() % (2 * span)) - span, 0}, u(rng));
  }
  const double base = seq_norm(s, alpha, two, two);
  CHECK(base > 0.0);
  auto bigger = s;
  const auto& [cube, val] = s.items()[4];
  bigger.set(cube, 2.0 * std::abs(val) + 0.5);
  CHECK(seq_norm(bigger, alpha, two, two) >= base * (1.0 - 1e-9));
}
