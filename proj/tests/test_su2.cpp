#include "homlab/su2.hpp"
#include "homlab/error.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace homlab;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

double max_rel(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

std::vector<int> repeat_axis(int k) { return std::vector<int>(static_cast<std::size_t>(k), 0); }

PowerLawFamily family(double p, double r, double c_delta = 1.0) {
  PowerLawFamily f;
  f.p = parse_exponent(p);
  f.r = parse_exponent(r);
  f.c_delta = c_delta;
  return f;
}

}  // namespace

TEST_CASE("Milnor metric storage") {
  const auto g = MilnorMetric::from_gap(0.25, 1e-12);
  CHECK(g.gap() == 1e-12);
  CHECK(g.lambda1() < g.lambda2());
  CHECK_THROWS_AS(MilnorMetric(0.0, 1, 1), DomainError);
  CHECK_THROWS_AS(MilnorMetric(1, -1, 1), DomainError);
  CHECK_THROWS_AS(MilnorMetric::from_gap(1, 3.0), DomainError);
  const MilnorMetric h(0.5, 1.5, 2.5);
  CHECK(h.lambda1() == 1.5);
  CHECK(h.lambda2() == 2.5);
}

TEST_CASE("Milnor brackets") {
  const Bracket round = milnor_bracket(MilnorMetric(1, 1, 1));
  CHECK(round(0, 1, 2) == -2.0);
  CHECK(round(0, 2, 1) == 2.0);
  CHECK(round(1, 2, 0) == -2.0);
  const Bracket berger = milnor_bracket(MilnorMetric(0.09, 1, 1));
  CHECK(berger(1, 2, 0) == doctest::Approx(-2 * 0.3));
  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(0.01, 10.0);
  for (int i = 0; i < 50; ++i) {
    const MilnorMetric g(u(rng), u(rng), u(rng));
    const auto rep = validate(milnor_bracket(g));
    CHECK(rep.jacobi_residual == 0.0);
    CHECK(rep.ok());
  }
}

TEST_CASE("c-coefficients and sectional curvature") {
  const auto r = su2_invariants(MilnorMetric(1, 1, 1));
  for (int i = 0; i < 3; ++i) {
    CHECK(r.c[i] == doctest::Approx(1.0));
    CHECK(r.sec[i] == doctest::Approx(1.0));
  }
  for (double eps : {0.5, 0.1, 1e-3}) {
    const auto b = su2_invariants(MilnorMetric(eps, 1, 1));
    CHECK(b.sec[0] == doctest::Approx(eps).epsilon(1e-12));
    CHECK(b.sec[1] == doctest::Approx(4 - 3 * eps).epsilon(1e-12));
    CHECK(b.sec[2] == doctest::Approx(eps).epsilon(1e-12));
  }
  const auto g = su2_invariants(MilnorMetric(1, 2, 3));
  CHECK(g.c[0] == doctest::Approx(2 * std::sqrt(2.0 / 3)));
  CHECK(g.c[2] == doctest::Approx(0.0));

  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int i = 0; i < 200; ++i) {
    const MilnorMetric m(u(rng), u(rng), u(rng));
    const auto inv = su2_invariants(m);
    CHECK(inv.cross_check <= 1e-12);
    const auto R = curvature_base(milnor_bracket(m));
    const int planes[3][2] = {{0, 1}, {1, 2}, {0, 2}};
    for (int p = 0; p < 3; ++p) {
      const double s = sectional_curvature(R, Eigen::Vector3d::Unit(planes[p][0]), Eigen::Vector3d::Unit(planes[p][1]));
      CHECK(rel(s, inv.sec[p]) <= 1e-10);
    }
    const auto S = nomizu_connection(milnor_bracket(m));
    CHECK(max_rel(S.S[0], inv.c[0] * so_basis(3, 1, 2)) <= 1e-12);
    CHECK(max_rel(S.S[1], -inv.c[1] * so_basis(3, 0, 2)) <= 1e-12);
    CHECK(max_rel(S.S[2], inv.c[2] * so_basis(3, 0, 1)) <= 1e-12);
  }
}

TEST_CASE("first covariant derivative in closed form") {
  CHECK(rm1_closed(MilnorMetric(1, 1, 1)).max_abs() == 0.0);
  const double eps = 0.3;
  const auto b = rm1_closed(MilnorMetric(eps, 1, 1));
  for (int a = 0; a < 3; ++a)
    for (int c = 0; c < 3; ++c) {
      const int x0[] = {0};
      CHECK(b.value(x0, a, c).cwiseAbs().maxCoeff() == 0.0);
    }
  const int x1[] = {1};
  const double expect = 2 * eps * (2 - 2 * eps) / std::sqrt(eps);
  CHECK((b.value(x1, 1, 2) - expect * so_basis(3, 0, 1)).cwiseAbs().maxCoeff() < 1e-12);

  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (int i = 0; i < 200; ++i) {
    const MilnorMetric g(u(rng), u(rng), u(rng));
    const auto engine = curvature_tower(milnor_bracket(g), 1)[1];
    CHECK((rm1_closed(g) - engine).max_abs() <= 1e-10 * std::max(1.0, engine.max_abs()));
  }
}

TEST_CASE("axis line of Rm^k") {
  for (int k = 1; k <= 6; ++k)
    for (const auto& v : rmk_axis_closed(MilnorMetric(0.3, 1.2, 1.2), k)) CHECK(v.cwiseAbs().maxCoeff() == 0.0);
  CHECK_THROWS_AS(rmk_axis_closed(MilnorMetric(1, 1, 1), 0), DomainError);

  const MilnorMetric g = MilnorMetric::from_gap(0.25, 0.125);
  const auto rm1 = rm1_closed(g);
  const auto one = rmk_axis_closed(g, 1);
  const int x0[] = {0};
  CHECK(max_rel(one[0], rm1.value(x0, 0, 1)) <= 1e-14);
  CHECK(max_rel(one[1], rm1.value(x0, 0, 2)) <= 1e-14);

  const auto tower = curvature_tower(milnor_bracket(g), 8);
  for (int k = 1; k <= 8; ++k) {
    const auto closed = rmk_axis_closed(g, k);
    const auto idx = repeat_axis(k);
    const double scale = std::max(1.0, tower[k].max_abs());
    CHECK((tower[k].value(idx, 0, 1) - closed[0]).cwiseAbs().maxCoeff() <= 1e-9 * scale);
    CHECK((tower[k].value(idx, 0, 2) - closed[1]).cwiseAbs().maxCoeff() <= 1e-9 * scale);
    CHECK(tower[k].value(idx, 1, 2).cwiseAbs().maxCoeff() <= 1e-12 * scale);
  }
}

TEST_CASE("star family") {
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> ue(0.01, 3.0), ud(0.0, 0.999);
  for (int i = 0; i < 50; ++i) {
    const double eps = ue(rng), delta = ud(rng);
    const Bracket a = star_family(eps, delta);
    const Bracket b = milnor_bracket(MilnorMetric(eps, 1 - delta / 2, 1 + delta / 2));
    for (std::size_t j = 0; j < a.coefficients().size(); ++j)
      CHECK(std::abs(a.coefficients()[j] - b.coefficients()[j]) <= 1e-14 * std::max(1.0, b.max_abs()));
    CHECK(star_metric(eps, delta).gap() == delta);
  }
  CHECK(star_family(0.3, 0.0) == milnor_bracket(MilnorMetric(0.3, 1, 1)));
  const Bracket round = star_family(1, 0);
  CHECK(round(0, 1, 2) == -2.0);
  CHECK(round(1, 2, 0) == -2.0);
  CHECK_THROWS_AS(star_family(1, 1.0), DomainError);
  CHECK_THROWS_AS(star_family(1, -0.1), DomainError);
}

TEST_CASE("exponents and regularity index") {
  CHECK(parse_exponent("11/2") == Rational(11, 2));
  CHECK(parse_exponent(5.5) == Rational(11, 2));
  CHECK(parse_exponent(3) == Rational(3));
  CHECK_THROWS_AS(parse_exponent(0.1), DomainError);
  CHECK_THROWS_AS(parse_exponent("x/2"), DomainError);
  CHECK_THROWS_AS(parse_exponent(-1), DomainError);

  for (int s = 1; s <= 6; ++s) {
    const auto r = regularity_index(family(2, s + 2.5));
    CHECK_FALSE(r.infinite);
    CHECK(r.value == s + 2);
  }
  for (int k = 1; k <= 6; ++k) CHECK(regularity_index(family(2, k + 1)).value == k);
  CHECK(regularity_index(family(2, 0, 0.0)).infinite);
  CHECK(regularity_index(family(1, 1)).value == 1);
  CHECK(regularity_index(family(2, 1.5)).value == 1);
}

TEST_CASE("sectional limits along almost-Berger families") {
  // limits (0, 4, 0) exactly when the regularity index is at least 2
  for (int reg = 1; reg <= 3; ++reg) {
    const auto f = family(2, reg + 1);
    REQUIRE(regularity_index(f).value == reg);
    const auto far = su2_invariants(f.metric(1e4));
    const bool berger_limit = std::abs(far.sec[0]) < 1e-3 && std::abs(far.sec[1] - 4) < 1e-3 &&
                              std::abs(far.sec[2]) < 1e-3;
    CHECK(berger_limit == (reg >= 2));
  }
  // bounded curvature iff |lambda_1 - lambda_2| <= C eps
  for (int j = 4; j <= 16; j += 4) {
    const double eps = std::ldexp(1.0, -j);
    const double ok = max_abs_sec(curvature_base(milnor_bracket(MilnorMetric::from_gap(eps, 0.5 * eps)))).value;
    const double bad = max_abs_sec(curvature_base(milnor_bracket(MilnorMetric::from_gap(eps, std::sqrt(eps))))).value;
    CHECK(ok < 8.0);
    CHECK(bad > 0.5 / std::sqrt(eps));
  }
}

TEST_CASE("collapse tables") {
  SUBCASE("exact Berger family") {
    const auto t = collapse_table(family(2, 0, 0.0), {2, 4, 8, 16, 32, 64}, 4);
    for (int k = 1; k <= 4; ++k) {
      const auto col = t.column(k);
      for (std::size_t i = 1; i < col.size(); ++i) CHECK(col[i] < col[i - 1]);
      CHECK(col.back() < 0.05 * col.front());
    }
    CHECK(t.rows.size() == 30);
    CHECK(std::isnan(t.rows.front().envelope));
  }
  SUBCASE("divergent order grows like the axis bound") {
    const auto t = collapse_table(family(2, 5.5), {8, 16, 32, 64}, 5);
    const auto c4 = t.column(4), c5 = t.column(5);
    for (std::size_t i = 1; i < c4.size(); ++i) {
      CHECK(c4[i] > c4[i - 1]);
      CHECK(c5[i] > c5[i - 1]);
    }
    CHECK(t.slopes[5] == doctest::Approx(1.5).epsilon(0.1));
    for (const auto& row : t.rows)
      if (row.k >= 4) CHECK(row.norm >= 0.5 * row.axis_bound);
  }
  CHECK_THROWS_AS(collapse_table(family(2, 5.5), {}, 3), DomainError);
  EngineLimits tight;
  tight.max_entries = 100;
  CHECK_THROWS_AS(collapse_table(family(2, 5.5), {2}, 3, tight), CapacityError);
}
