#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "htl/errors.hpp"
#include "htl/hermite.hpp"
#include "htl/semigroup.hpp"
#include "htl/special.hpp"

using namespace htl;

namespace {

double spectral_poisson_1d(double t, int k, double x, double y, int cap) {
  std::vector<double> cx(cap + 1), cy(cap + 1);
  hermite_column(cap, x, cx.data());
  hermite_column(cap, y, cy.data());
  double s = 0.0;
  for (int m = 0; m <= cap; ++m) {
    const double a = t * std::sqrt(2.0 * m + 1.0);
    s += std::pow(a, k) * std::exp(-a) * cx[m] * cy[m];
  }
  return s;
}

}  // namespace

TEST_CASE("heat kernel closed form at the origin") {
  const double v = mehler_kernel(1, 0.5, {0.0, 0.0}, {0.0, 0.0});
  CHECK(v == doctest::Approx(0.3680051987075608).epsilon(1e-13));
  CHECK(v > 0.0);
}

TEST_CASE("heat kernel is symmetric and positive") {
  std::mt19937_64 rng(20240815);
  std::uniform_real_distribution<double> u(-3.0, 3.0), ut(0.05, 2.0);
  for (int i = 0; i < 50; ++i) {
    const Point x{u(rng), u(rng)}, y{u(rng), u(rng)};
    const double t = ut(rng);
    CHECK(mehler_kernel(2, t, x, y) == mehler_kernel(2, t, y, x));
    CHECK(mehler_kernel(2, t, x, y) > 0.0);
    CHECK(mehler_kernel(1, t, x, y) == mehler_kernel(1, t, y, x));
  }
}

TEST_CASE("heat kernel guards") {
  CHECK_THROWS_AS(mehler_kernel(1, 0.0, {0, 0}, {0, 0}), std::domain_error);
  CHECK_THROWS_AS(mehler_kernel(1, -1.0, {0, 0}, {0, 0}), std::domain_error);
  CHECK_THROWS_AS(mehler_kernel(1, 1e-9, {0, 0}, {0, 0}), accuracy_error);
  CHECK_THROWS_AS(mehler_kernel(3, 1.0, {0, 0}, {0, 0}),
                  std::invalid_argument);
}

TEST_CASE("heat kernel factorizes over coordinates") {
  const Point x{0.7, -1.2}, y{-0.4, 2.1};
  for (double t : {0.1, 0.6, 1.7}) {
    const double w2 = mehler_kernel(2, t, x, y);
    const double w1a = mehler_kernel(1, t, {x[0], 0}, {y[0], 0});
    const double w1b = mehler_kernel(1, t, {x[1], 0}, {y[1], 0});
    CHECK(w2 == doctest::Approx(w1a * w1b).epsilon(1e-13));
  }
}

TEST_CASE("heat kernel large-t limit is the ground state") {
  const double t = 8.0;
  for (auto [x, y] : std::vector<std::pair<double, double>>{
           {0.0, 0.0}, {1.0, -2.0}, {2.5, 2.5}}) {
    const double ratio =
        mehler_kernel(1, t, {x, 0}, {y, 0}) /
        (std::exp(-t) * eval_hermite_1d(0, x) * eval_hermite_1d(0, y));
    CHECK(ratio == doctest::Approx(1.0).epsilon(1e-6));
  }
  const double r2 = mehler_kernel(2, t, {0.3, -0.6}, {0.2, 0.9}) /
                    (std::exp(-2.0 * t) * eval_hermite_1d(0, 0.3) *
                     eval_hermite_1d(0, -0.6) * eval_hermite_1d(0, 0.2) *
                     eval_hermite_1d(0, 0.9));
  CHECK(r2 == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("spectral heat sum agrees with the closed form") {
  const int cap = 300;
  for (double t : {0.1, 0.5, 1.0, 2.0}) {
    for (auto [x, y] : std::vector<std::pair<double, double>>{
             {0.0, 0.0}, {1.5, -2.0}, {3.0, 3.0}, {-2.7, 0.4}}) {
      const double w = mehler_kernel(1, t, {x, 0}, {y, 0});
      const double s = heat_kernel_spectral(1, t, {x, 0}, {y, 0}, cap);
      if (std::abs(w) > 1e-8)
        CHECK(s == doctest::Approx(w).epsilon(1e-8));
      else
        CHECK(std::abs(s - w) <= 1e-12);
    }
  }
  const Point x{0.5, -1.0}, y{0.3, 0.2};
  CHECK(heat_kernel_spectral(2, 0.5, x, y, 80) ==
        doctest::Approx(mehler_kernel(2, 0.5, x, y)).epsilon(1e-10));
}

TEST_CASE("heat semigroup on coefficients") {
  HermiteExpansion f(1, 8);
  f.set_coefficient(MultiIndex({0}), 1.0);
  f.set_coefficient(MultiIndex({4}), -0.7);

  const auto id = apply_heat(f, 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) CHECK(id.slot(i) == f.slot(i));

  const auto g = apply_heat(f, std::log(2.0));
  CHECK(g.coefficient(MultiIndex({0})) == doctest::Approx(0.5).epsilon(1e-15));
  // lambda = 9 at order 4
  CHECK(g.coefficient(MultiIndex({4})) ==
        doctest::Approx(-0.7 * std::pow(0.5, 9.0)).epsilon(1e-14));
  CHECK_THROWS_AS(apply_heat(f, -0.1), std::domain_error);
}

TEST_CASE("heat semigroup matches kernel integration") {
  HermiteExpansion f(1, 64);
  f.set_coefficient(MultiIndex({0}), 1.0);
  f.set_coefficient(MultiIndex({3}), 0.5);
  const double t = 0.5;
  const auto ft = apply_heat(f, t);

  const auto gl = GaussLegendreRule::make(200);
  const double halfwidth = 8.0;
  std::vector<Point> nodes(gl.node.size());
  for (std::size_t j = 0; j < gl.node.size(); ++j)
    nodes[j] = {halfwidth * gl.node[j], 0.0};
  const auto fy = synthesize(f, nodes);

  for (double x : {0.0, 0.8, -1.7}) {
    double integral = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j)
      integral += halfwidth * gl.weight[j] *
                  mehler_kernel(1, t, {x, 0.0}, nodes[j]) * fy[j];
    const Point px{x, 0.0};
    const double direct = synthesize(ft, std::span<const Point>(&px, 1))[0];
    CHECK(direct == doctest::Approx(integral).epsilon(1e-8));
  }
}

TEST_CASE("poisson operator on coefficients") {
  HermiteExpansion f(1, 8);
  f.set_coefficient(MultiIndex({0}), 1.0);
  auto g = apply_poisson(f, 1.0, 0);
  CHECK(g.coefficient(MultiIndex({0})) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-14));

  HermiteExpansion h4(1, 8);
  h4.set_coefficient(MultiIndex({4}), 1.0);
  // lambda = 9, t = 1/3: (t sqrt(lambda))^2 e^{-t sqrt(lambda)} = e^{-1}
  auto g2 = apply_poisson(h4, 1.0 / 3.0, 2);
  CHECK(g2.coefficient(MultiIndex({4})) ==
        doctest::Approx(std::exp(-1.0)).epsilon(1e-14));

  CHECK_THROWS_AS(apply_poisson(f, 0.0, 0), std::domain_error);
  CHECK_THROWS_AS(apply_poisson(f, 1.0, -1), std::domain_error);
}

TEST_CASE("poisson semigroup law") {
  HermiteExpansion f(1, 24);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (std::size_t i = 0; i < f.size(); ++i) f.slot(i) = u(rng);
  const auto a = apply_poisson(apply_poisson(f, 0.3, 0), 0.45, 0);
  const auto b = apply_poisson(f, 0.75, 0);
  for (std::size_t i = 0; i < f.size(); ++i)
    CHECK(a.slot(i) == doctest::Approx(b.slot(i)).epsilon(1e-12));
}

TEST_CASE("poisson kernel crossover values") {
  // Large t: the lowest mode dominates the subordinated value.
  const double one_term = std::exp(-4.0) / std::sqrt(M_PI);
  const auto v4 = kernel_p_tk({4.0, 0, {0, 0}, {0, 0}, 300}, 1);
  CHECK(std::abs(v4.value / one_term - 1.0) < 0.01);
  CHECK(v4.tail_bound <= 1e-6 * v4.value);

  const auto v12 = kernel_p_tk({12.0, 0, {0, 0}, {0, 0}, 300}, 1);
  CHECK(v12.value ==
        doctest::Approx(std::exp(-12.0) / std::sqrt(M_PI)).epsilon(1e-6));

  // Subordinated path against an independent spectral sum where the spectral
  // tail is negligible.
  for (double t : {0.5, 1.0, 2.0}) {
    const auto v = kernel_p_tk({t, 0, {1.3, 0}, {-0.7, 0}, 300}, 1);
    CHECK(v.value ==
          doctest::Approx(spectral_poisson_1d(t, 0, 1.3, -0.7, 2048))
              .epsilon(1e-10));
  }
}

TEST_CASE("poisson kernel derivative identities for k >= 1") {
  // (t sqrt(H))^k e^{-t sqrt(H)} is (-t d/dt)^.. of the k=0 kernel:
  // p_{t,1} = -t d/dt p_t and p_{t,2} = t^2 d^2/dt^2 p_t.
  const double t = 1.0, h = 1e-3;
  const Point x{0.4, 0}, y{-0.2, 0};
  auto p0 = [&](double s) { return kernel_p_tk({s, 0, x, y, 300}, 1).value; };
  const double pm = p0(t - h), pc = p0(t), pp = p0(t + h);

  const auto k1 = kernel_p_tk({t, 1, x, y, 2048}, 1);
  CHECK(k1.tail_bound <= 1e-6 * std::abs(k1.value));
  CHECK(k1.value ==
        doctest::Approx(-t * (pp - pm) / (2.0 * h)).epsilon(1e-4));

  const auto k2 = kernel_p_tk({t, 2, x, y, 2048}, 1);
  CHECK(k2.value ==
        doctest::Approx(t * t * (pp - 2.0 * pc + pm) / (h * h)).epsilon(1e-4));
}

TEST_CASE("poisson kernel symmetry") {
  const Point x{1.1, 0}, y{-2.3, 0};
  CHECK(kernel_p_tk({0.7, 0, x, y, 300}, 1).value ==
        kernel_p_tk({0.7, 0, y, x, 300}, 1).value);
  CHECK(kernel_p_tk({0.9, 1, x, y, 2048}, 1).value ==
        kernel_p_tk({0.9, 1, y, x, 2048}, 1).value);
}

TEST_CASE("poisson kernel refusals") {
  CHECK_THROWS_AS(kernel_p_tk({0.05, 1, {0, 0}, {0, 0}, 2048}, 1),
                  accuracy_error);
  CHECK_THROWS_AS(kernel_p_tk({1.0, 1, {0, 0}, {0, 0}, 4096}, 1),
                  std::invalid_argument);
  CHECK_THROWS_AS(kernel_p_tk({0.0, 0, {0, 0}, {0, 0}, 300}, 1),
                  std::domain_error);
  CHECK_THROWS_AS(kernel_p_tk({1.0, -1, {0, 0}, {0, 0}, 300}, 1),
                  std::domain_error);
  // subordinated path stays available at small t
  CHECK(kernel_p_tk({0.05, 0, {0, 0}, {0, 0}, 300}, 1).value > 0.0);
}

TEST_CASE("scaled amplitude stays below the frozen bound") {
  // The spectral tail bound for high modes relies on
  // (2m)^{1/4} |h_m(x)| <= 0.9 for m >= 1024, |x| <= 5.5.
  std::vector<double> col(kOrderCap + 1);
  for (int m : {1024, 1400, 1800, 2048}) {
    double worst = 0.0;
    for (int i = 0; i <= 550; ++i) {
      const double x = 5.5 * i / 550.0;
      hermite_column(m, x, col.data());
      worst = std::max(worst, std::pow(2.0 * m, 0.25) * std::abs(col[m]));
    }
    CHECK(worst < 0.9);
  }
}

TEST_CASE("incomplete gamma identities") {
  for (auto [s, x] : std::vector<std::pair<int, double>>{
           {1, 0.5}, {2, 1.0}, {3, 2.5}, {5, 3.0}, {5, 12.0}, {11, 6.0}}) {
    CHECK(reg_gamma_lower(s, x) + reg_gamma_upper(s, x) ==
          doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(reg_gamma_upper(1, 0.7) ==
        doctest::Approx(std::exp(-0.7)).epsilon(1e-15));
  CHECK(gamma_upper(2, 1.3) ==
        doctest::Approx(std::exp(-1.3) * (1.0 + 1.3)).epsilon(1e-14));
  CHECK(reg_gamma_lower(2, 1.0) ==
        doctest::Approx(0.26424111765711533).epsilon(1e-14));
  CHECK(reg_gamma_upper(3, 2.5) ==
        doctest::Approx(0.5438131158833296).epsilon(1e-14));
  CHECK(reg_gamma_upper(4, 2.0) > reg_gamma_upper(4, 2.5));
}

TEST_CASE("poisson decay audit is finite and refines stably") {
  const auto rep = poisson_decay_audit(1, 0, 48);
  CHECK(rep.rows.size() == 5 * 48 * 5);
  CHECK(std::isfinite(rep.sup_ratio));
  CHECK(rep.sup_ratio > 0.0);
  for (const auto& r : rep.rows) CHECK(std::isfinite(r.ratio));

  const auto fine = poisson_decay_audit(1, 0, 96);
  CHECK(std::abs(fine.sup_ratio - rep.sup_ratio) <= 0.05 * rep.sup_ratio);

  const auto csv = rep.csv();
  CHECK(csv.find("k,t,dist,lhs,envelope,ratio") == 0);
  CHECK(csv.find("supremum") != std::string::npos);
}

TEST_CASE("poisson decay audit covers the spectral orders") {
  for (int k : {1, 2}) {
    const auto rep = poisson_decay_audit(1, k, 6);
    CHECK(rep.rows.size() == 5 * 6 * 5);
    CHECK(std::isfinite(rep.sup_ratio));
    for (const auto& r : rep.rows) {
      CHECK(r.k == k);
      CHECK(std::isfinite(r.ratio));
    }
  }
  CHECK_THROWS_AS(poisson_decay_audit(1, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(poisson_decay_audit(1, -1, 8), std::domain_error);
}

TEST_CASE("gaussian envelope audit") {
  const auto rep = gaussian_bound_audit(1, 10);
  CHECK(rep.rows.size() == 5 * 10 * 5);
  CHECK(std::isfinite(rep.sup_ratio));
  CHECK(rep.sup_ratio < 1.0);
  const auto rep2 = gaussian_bound_audit(2, 6);
  CHECK(std::isfinite(rep2.sup_ratio));
}

TEST_CASE("poisson operators preserve rapid decay") {
  SamplingScheme s = SamplingScheme::defaults(1);
  s.degree_cap = 64;
  s.points_per_axis = 256;
  s.time_levels = 6;
  s.quadrature_size = 0;
  const SchemeContext ctx(s);
  HermiteExpansion f(1, 64);
  f.set_coefficient(MultiIndex({0}), 1.0);
  f.set_coefficient(MultiIndex({6}), 0.3);
  for (int k : {0, 1, 2}) {
    const auto rep = schwartz_decay_audit(f, k, ctx);
    CHECK(rep.finite);
    CHECK(rep.sup_weighted < 5.0);
    CHECK(rep.sup_weighted > 0.0);
  }
}
