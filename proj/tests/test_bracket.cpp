#include "homlab/bracket.hpp"
#include "homlab/error.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace homlab;
using fixtures::milnor;
using fixtures::random_orthogonal;
using fixtures::random_solvable;

namespace {

double max_diff(const Bracket& a, const Bracket& b) {
  double r = 0.0;
  for (std::size_t i = 0; i < a.coefficients().size(); ++i)
    r = std::max(r, std::abs(a.coefficients()[i] - b.coefficients()[i]));
  return r;
}

}  // namespace

TEST_CASE("bracket construction enforces ranges and antisymmetry") {
  CHECK_THROWS_AS(Bracket(0, 0), DomainError);
  CHECK_THROWS_AS(Bracket(4, 3), DomainError);
  CHECK_THROWS_AS(Bracket(-1, 3), DomainError);
  Bracket b(1, 3);
  b.set(1, 3, 2, 0.5);
  CHECK(b(3, 1, 2) == -0.5);
  CHECK_THROWS_AS(b.set(2, 2, 0, 1.0), DomainError);
  CHECK_THROWS_AS(Bracket::from_entries(0, 2, {{0, 1, 0, 1.0}, {1, 0, 0, 2.0}}), DomainError);
}

TEST_CASE("validate") {
  SUBCASE("zero bracket") {
    const auto r = validate(zero_bracket(0, 3));
    CHECK(r.ok());
    CHECK(r.jacobi_residual == 0.0);
    CHECK(r.degenerate_subspace_dim == 0);
  }
  SUBCASE("mu_o") {
    const auto r = validate(mu_o());
    CHECK(r.h1_ok);
    CHECK(r.h2_ok);
    CHECK(r.h3_ok);
  }
  SUBCASE("degenerate extension of mu_o") {
    const auto r = validate(mu_o_degenerate_extension());
    CHECK(r.h1_ok);
    CHECK(r.h2_ok);
    CHECK_FALSE(r.h3_ok);
    CHECK(r.degenerate_subspace_dim == 1);
  }
  SUBCASE("Jacobi failure") {
    // [e0,e1]=e2, [e1,e2]=e1, [e0,e2]=0 violates Jacobi
    const auto b = Bracket::from_entries(0, 3, {{0, 1, 2, 1.0}, {1, 2, 1, 1.0}});
    const auto r = validate(b);
    CHECK_FALSE(r.h1_ok);
    CHECK(r.jacobi_residual > 0.5);
  }
  SUBCASE("non-skew isotropy action") {
    // e0 acts on the base by a symmetric matrix
    const auto b = Bracket::from_entries(1, 2, {{0, 1, 1, 1.0}, {0, 2, 2, -1.0}});
    CHECK_FALSE(validate(b).h2_ok);
  }
  SUBCASE("fixtures") {
    CHECK(validate(hyperbolic_bracket(3)).ok());
    for (int eps : {-1, 0, 1}) {
      const auto r = validate(surface_bracket(eps));
      CHECK(r.h1_ok);
      CHECK(r.h2_ok);
      CHECK(r.h3_ok);
    }
    CHECK(validate(milnor(0.3, 1.2, 0.7)).ok());
  }
}

TEST_CASE("restrict") {
  SUBCASE("degenerate extension recovers mu_o up to the q-block") {
    const Bracket r = restrict_bracket(mu_o_degenerate_extension());
    REQUIRE(r.q() == 1);
    REQUIRE(r.m() == 3);
    CHECK(validate(r).ok());
    // the q-block basis is only fixed up to sign
    const Bracket ref = mu_o();
    const double sgn = r(1, 2, 0) * ref(1, 2, 0) > 0 ? 1.0 : -1.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k) {
          const double f = ((k == 0) != (i == 0 || j == 0)) ? sgn : 1.0;
          CHECK(r(i, j, k) == doctest::Approx(f * ref(i, j, k)).epsilon(1e-12));
        }
  }
  SUBCASE("already effective") { CHECK(max_diff(restrict_bracket(mu_o()), mu_o()) < 1e-14); }
  SUBCASE("full kernel") {
    const Bracket r = restrict_bracket(zero_bracket(1, 2));
    CHECK(r.q() == 0);
    CHECK(r.m() == 2);
    CHECK(r.max_abs() == 0.0);
  }
  SUBCASE("invalid input") {
    const auto b = Bracket::from_entries(1, 3, {{1, 2, 3, 1.0}, {2, 3, 2, 1.0}});
    CHECK_THROWS_AS(restrict_bracket(b), DomainError);
  }
}

TEST_CASE("scale") {
  CHECK_THROWS_AS(scale(mu_o(), 0.0), DomainError);
  CHECK_THROWS_AS(scale(mu_o(), -1.0), DomainError);
  CHECK(max_diff(scale(mu_o(), 1.0), mu_o()) == 0.0);
  const Bracket s = scale(mu_o(), 2.0);
  CHECK(s(1, 2, 0) == doctest::Approx(-0.5));
  CHECK(s(0, 1, 2) == doctest::Approx(-2.0));
  const Bracket t = scale(milnor(0.5, 1.0, 2.0), 3.0);
  CHECK(t(1, 2, 0) == doctest::Approx(milnor(0.5, 1.0, 2.0)(1, 2, 0) / 3.0));

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.2, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    const Bracket b = trial % 2 ? milnor(u(rng), u(rng), u(rng)) : mu_o();
    const double R = u(rng);
    const Bracket back = scale(scale(b, R), 1.0 / R);
    CHECK(max_diff(back, b) <= 1e-14 * b.max_abs());
    const auto r0 = validate(b);
    const auto r1 = validate(scale(b, R));
    CHECK(r0.h1_ok == r1.h1_ok);
    CHECK(r0.h2_ok == r1.h2_ok);
    CHECK(r0.h3_ok == r1.h3_ok);
    if (b.q() == 0) CHECK(r1.jacobi_residual <= 1e-12 * std::max(1.0, scale(b, R).max_abs()));
  }
}

TEST_CASE("split") {
  const auto sp = split(mu_o());
  CHECK(sp.iso(0, 1, 0) == -2.0);
  CHECK(sp.iso(1, 0, 0) == 2.0);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) CHECK(sp.base(a, b, c) == 0.0);

  const double eps = 0.3, l1 = 1.5, l2 = 0.8;
  const auto ms = split(milnor(eps, l1, l2));
  CHECK(ms.iso_part.empty());
  CHECK(ms.base(1, 2, 0) == doctest::Approx(-2 * std::sqrt(eps / (l1 * l2))));

  for (const Bracket& b : {mu_o(), mu_o_degenerate_extension(), milnor(eps, l1, l2), hyperbolic_bracket(4)})
    CHECK(recompose(split(b)) == b);
}

TEST_CASE("frame change") {
  const Bracket b = milnor(0.4, 1.1, 2.3);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(3, 3);
  a(0, 1) = 1;
  a(1, 0) = -1;
  a(2, 2) = 1;
  const Bracket t = transform(b, a);
  CHECK(validate(t).ok());
  // a e_1 = -e_0, a e_0 = e_1: mu'(e_1, e_0) = a mu(e_0, -e_1) ...
  const Eigen::VectorXd x = Eigen::VectorXd::Unit(3, 0), y = Eigen::VectorXd::Unit(3, 2);
  const Eigen::VectorXd lhs = t.apply(a * x, a * y);
  const Eigen::VectorXd rhs = a * b.apply(x, y);
  CHECK((lhs - rhs).norm() < 1e-14);
  CHECK(max_diff(transform(t, a.transpose()), b) < 1e-14);
}

TEST_CASE("JSON round trip") {
  for (const Bracket& b : {mu_o(), milnor(0.2, 1.0, 3.0), hyperbolic_bracket(3)}) {
    nlohmann::json j = b;
    CHECK(j.at("q") == b.q());
    for (const auto& e : j.at("coeff")) CHECK(e[0].get<int>() < e[1].get<int>());
    CHECK(bracket_from_json(j) == b);
  }
  nlohmann::json bad = {{"q", 0}, {"m", 2}, {"coeff", {{0, 1, 0, 1.0}, {0, 1, 0, 2.0}}}};
  CHECK_THROWS_AS(bracket_from_json(bad), DomainError);
}
