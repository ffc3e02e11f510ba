#include <doctest.h>

#include <cmath>
#include <functional>
#include <random>

#include "htl/errors.hpp"
#include "htl/varexp.hpp"

using namespace htl;

namespace {

GridFunction sample(const std::shared_ptr<const BoxGrid>& g,
                    const std::function<double(Point)>& fn) {
  GridFunction f(g);
  for (std::size_t i = 0; i < f.value.size(); ++i)
    f.value[i] = fn(g->point(i));
  return f;
}

GridFunction random_bumps(const std::shared_ptr<const BoxGrid>& g,
                          unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<std::array<double, 3>> par(4);
  for (auto& b : par) b = {u(rng), 5.0 * u(rng), 0.4 + 0.5 * std::abs(u(rng))};
  return sample(g, [&](Point x) {
    double s = 0.0;
    for (const auto& b : par)
      s += b[0] * std::exp(-(x[0] - b[1]) * (x[0] - b[1]) / (2 * b[2] * b[2]));
    return s;
  });
}

}  // namespace

TEST_CASE("exponent field kinds evaluate their rule") {
  const auto c = ExponentField::constant(2.5);
  CHECK(c({3.0, -1.0}) == 2.5);
  CHECK(c.min() == 2.5);
  CHECK(c.max() == 2.5);

  const auto a = ExponentField::affine_clamped(2.0, 0.5, 1.5, 3.0);
  CHECK(a({0.0, 0.0}) == 2.0);
  CHECK(a({1.0, 99.0}) == 2.5);   // second coordinate ignored
  CHECK(a({10.0, 0.0}) == 3.0);   // clamped above
  CHECK(a({-10.0, 0.0}) == 1.5);  // clamped below
  CHECK(a.min() == 1.5);
  CHECK(a.max() == 3.0);
  const auto flat = ExponentField::affine_clamped(2.0, 0.0, 1.0, 3.0);
  CHECK(flat.min() == 2.0);
  CHECK(flat.max() == 2.0);

  const auto g = make_box_grid(1, 2.0, 8);
  std::vector<double> vals(8);
  for (int i = 0; i < 8; ++i) vals[i] = 1.0 + 0.1 * i;
  const auto s = ExponentField::grid_sampled(g, vals);
  for (int i = 0; i < 8; ++i) CHECK(s({g->axis[i], 0.0}) == vals[i]);
  CHECK(s({-99.0, 0.0}) == vals[0]);  // clamped to the box
  CHECK(s({99.0, 0.0}) == vals[7]);
  CHECK(s.min() == 1.0);
  CHECK(s.max() == doctest::Approx(1.7));

  CHECK_THROWS_AS(ExponentField::affine_clamped(2, 0, 3, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(ExponentField::grid_sampled(g, {1.0, 2.0}),
                  std::invalid_argument);
  std::vector<double> bad = vals;
  bad[3] = std::nan("");
  CHECK_THROWS_AS(ExponentField::grid_sampled(g, bad), std::invalid_argument);
}

TEST_CASE("field metadata estimates log-continuity constants") {
  const auto grid = make_box_grid(1, 8.0, 512);

  const auto meta_c = field_meta(ExponentField::constant(1.7), *grid);
  CHECK(meta_c.p_minus == 1.7);
  CHECK(meta_c.p_plus == 1.7);
  CHECK(meta_c.clog_local == 0.0);
  CHECK(meta_c.clog_infty == 0.0);
  CHECK(meta_c.p_infinity == 1.7);

  // Unclamped affine inside the box: the pair maximum sits at distance 2.
  const auto meta_a =
      field_meta(ExponentField::affine_clamped(2.0, 0.1, 1.0, 3.0), *grid);
  CHECK(meta_a.p_infinity == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(meta_a.clog_local ==
        doctest::Approx(0.1 * 2.0 * std::log(M_E + 0.5)).epsilon(1e-6));
  const double edge = 8.0 - 8.0 / 512.0;
  CHECK(meta_a.clog_infty ==
        doctest::Approx(0.1 * edge * std::log(M_E + edge)).epsilon(1e-9));
}

TEST_CASE("luxemburg norm with constant exponent is the direct norm") {
  const auto grid = make_box_grid(1, 8.0, 512);
  const auto f = random_bumps(grid, 20240817);
  for (double p0 : {1.0, 2.0, 3.7}) {
    double direct = 0.0;
    for (double v : f.value) direct += std::pow(std::abs(v), p0);
    direct = std::pow(direct * grid->cell_weight, 1.0 / p0);
    CHECK(luxemburg_norm(f, ExponentField::constant(p0)) ==
          doctest::Approx(direct).epsilon(1e-8));
  }
}

TEST_CASE("luxemburg norm of a unit indicator") {
  const auto grid = make_box_grid(1, 8.0, 512);
  const auto f = sample(
      grid, [](Point x) { return x[0] >= 0.0 && x[0] < 1.0 ? 1.0 : 0.0; });
  CHECK(luxemburg_norm(f, ExponentField::constant(2.0)) ==
        doctest::Approx(1.0).epsilon(1e-9));

  // two-piece exponent: modular(lambda) = lambda^{-2}/2 + lambda^{-4}/2
  std::vector<double> pv(grid->size(), 2.0);
  for (std::size_t i = 0; i < grid->size(); ++i)
    if (grid->axis[i] >= 0.5 && grid->axis[i] < 1.0) pv[i] = 4.0;
  const auto f2 = f;
  CHECK(luxemburg_norm(f2, ExponentField::grid_sampled(grid, pv)) ==
        doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("luxemburg norm is homogeneous") {
  const auto grid = make_box_grid(1, 8.0, 512);
  const auto f = random_bumps(grid, 5);
  const auto p = ExponentField::affine_clamped(2.0, 0.2, 1.3, 3.0);
  const double base = luxemburg_norm(f, p);
  auto scaled = f;
  for (auto& v : scaled.value) v *= 3.7;
  CHECK(luxemburg_norm(scaled, p) ==
        doctest::Approx(3.7 * base).epsilon(1e-9));
}

TEST_CASE("luxemburg norm guards") {
  const auto grid = make_box_grid(1, 8.0, 64);
  GridFunction zero(grid);
  const auto p2 = ExponentField::constant(2.0);
  CHECK(luxemburg_norm(zero, p2) == 0.0);

  auto f = zero;
  f.value[10] = 1.0;
  CHECK_THROWS_AS(luxemburg_norm(f, ExponentField::constant(0.0)),
                  std::domain_error);
  CHECK_THROWS_AS(luxemburg_norm(f, ExponentField::constant(-1.0)),
                  std::domain_error);

  auto bad = zero;
  bad.value[3] = std::nan("");
  CHECK_THROWS_AS(luxemburg_norm(bad, p2), std::invalid_argument);

  auto huge = zero;
  huge.value[10] = 1e14;
  CHECK_THROWS_AS(luxemburg_norm(huge, p2), accuracy_error);
  auto tiny = zero;
  tiny.value[10] = 1e-14;
  CHECK_THROWS_AS(luxemburg_norm(tiny, p2), accuracy_error);
}

TEST_CASE("modular decreases in lambda") {
  const auto grid = make_box_grid(1, 8.0, 256);
  const auto f = random_bumps(grid, 11);
  const auto p = ExponentField::affine_clamped(2.0, 0.1, 1.5, 3.0);
  const double a = luxemburg_modular(f, p, 0.5);
  const double b = luxemburg_modular(f, p, 1.0);
  const double c = luxemburg_modular(f, p, 2.0);
  CHECK(a > b);
  CHECK(b > c);
}

TEST_CASE("mixed norm reduces to luxemburg for one level") {
  const auto grid = make_box_grid(1, 8.0, 256);
  const auto f = random_bumps(grid, 21);
  LevelFamily fam;
  fam.weight = {1.0};
  fam.member = {f};
  const auto p = ExponentField::constant(2.0);
  const auto q = ExponentField::affine_clamped(2.0, 0.3, 1.2, 4.0);
  CHECK(mixed_norm(fam, p, q) ==
        doctest::Approx(luxemburg_norm(f, p)).epsilon(1e-12));
}

TEST_CASE("mixed norm matches brute force for p = q = 2") {
  const auto grid = make_box_grid(1, 8.0, 512);
  const auto f1 = random_bumps(grid, 31);
  const auto f2 = random_bumps(grid, 32);
  LevelFamily fam;
  fam.weight = {0.3, 1.7};
  fam.member = {f1, f2};
  const auto two = ExponentField::constant(2.0);
  double brute = 0.0;
  for (std::size_t i = 0; i < grid->size(); ++i)
    brute += 0.3 * f1.value[i] * f1.value[i] + 1.7 * f2.value[i] * f2.value[i];
  brute = std::sqrt(brute * grid->cell_weight);
  CHECK(mixed_norm(fam, two, two) == doctest::Approx(brute).epsilon(1e-9));
}

TEST_CASE("mixed norm guards") {
  const auto grid = make_box_grid(1, 8.0, 64);
  const auto p = ExponentField::constant(2.0);
  LevelFamily empty;
  CHECK_THROWS_AS(mixed_norm(empty, p, p), std::invalid_argument);

  LevelFamily zero;
  zero.weight = {1.0, 1.0};
  zero.member = {GridFunction(grid), GridFunction(grid)};
  CHECK(mixed_norm(zero, p, p) == 0.0);

  LevelFamily badw = zero;
  badw.weight = {1.0, -1.0};
  CHECK_THROWS_AS(mixed_norm(badw, p, p), std::invalid_argument);

  LevelFamily mixedgrid = zero;
  mixedgrid.member[1] = GridFunction(make_box_grid(1, 8.0, 32));
  CHECK_THROWS_AS(mixed_norm(mixedgrid, p, p), std::invalid_argument);

  CHECK_THROWS_AS(mixed_norm(zero, p, ExponentField::constant(0.0)),
                  std::domain_error);
}

TEST_CASE("mollifier kernel normalization") {
  CHECK(eta_kernel(1, 0, 2.0, {0.0, 0.0}) == 1.0);
  CHECK(eta_kernel(1, 3, 2.0, {0.0, 0.0}) == 8.0);
  CHECK(eta_kernel(2, 1, 3.0, {0.0, 0.0}) == 4.0);
  CHECK(eta_kernel(1, 0, 2.0, {1.0, 0.0}) == doctest::Approx(0.25));
  CHECK_THROWS_AS(eta_kernel(1, 0, 1.0, {0.0, 0.0}), std::domain_error);
  CHECK_THROWS_AS(eta_kernel(2, 0, 2.0, {0.0, 0.0}), std::domain_error);
}

TEST_CASE("mollifier convolution of a constant integrates the kernel") {
  // Kernel mass for n=1, R=2 is 2; the box tail at halfwidth 2100 stays
  // below 1e-3, so a single wide-grid evaluation pins the value.
  const auto grid = make_box_grid(1, 2100.0, 131072);
  GridFunction f(grid);
  for (auto& v : f.value) v = 1.3;
  const double out = eta_convolve_at(0, 2.0, f, {0.0, 0.0});
  const double tail = eta_tail_mass(1, 0, 2.0, 2100.0);
  CHECK(tail <= 1e-3);
  CHECK(std::abs(out - 2.0 * 1.3) <= 2e-3 * 1.3);
}

TEST_CASE("mollifier convolution preserves positivity and matches pointwise") {
  const auto grid = make_box_grid(1, 8.0, 256);
  auto f = random_bumps(grid, 77);
  for (auto& v : f.value) v = std::abs(v);
  const auto conv = eta_convolve(2, 2.0, f);
  for (double v : conv.value) CHECK(v >= 0.0);
  CHECK(conv.value[100] == eta_convolve_at(2, 2.0, f, grid->point(100)));
  CHECK_THROWS_AS(eta_convolve(0, 1.0, f), std::domain_error);
}

TEST_CASE("tail mass formulas") {
  CHECK(eta_tail_mass(1, 0, 2.0, 0.0) == doctest::Approx(2.0));
  CHECK(eta_tail_mass(1, 0, 2.0, 9.0) == doctest::Approx(0.2));
  CHECK(eta_tail_mass(1, 2, 2.0, 1.0) == doctest::Approx(0.4));
  // n=2, R=3: mass outside radius 0 is 2*pi*(1 - 1/2) = pi
  CHECK(eta_tail_mass(2, 0, 3.0, 0.0) == doctest::Approx(M_PI));
  CHECK_THROWS_AS(eta_tail_mass(2, 0, 2.0, 1.0), std::domain_error);
}

TEST_CASE("convolution inequality audit is stable over trials") {
  const auto rep = convolution_inequality_audit(1, 50, 20240818);
  CHECK(rep.ratio.size() == 50);
  CHECK(rep.c_emp > 0.0);
  CHECK(std::isfinite(rep.c_emp));
  CHECK(rep.c_emp_half <= rep.c_emp);
  CHECK(rep.stable);
  for (double r : rep.ratio) {
    CHECK(std::isfinite(r));
    CHECK(r > 0.0);
  }
}

TEST_CASE("discrete kernel domination audit") {
  const auto rep = discrete_kernel_audit(1, 3, 20240819);
  CHECK(rep.rows.size() == 3 * 4);
  CHECK(std::isfinite(rep.sup_c));
  CHECK(rep.sup_c > 0.0);
  CHECK(rep.sup_c < 1e3);
  for (const auto& row : rep.rows) {
    CHECK(row.c_emp > 0.0);
    CHECK(row.c_emp <= rep.sup_c);
  }
}
