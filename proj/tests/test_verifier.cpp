#include "homlab/verifier.hpp"
#include "homlab/error.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <random>

using namespace homlab;
using fixtures::milnor;
using fixtures::random_orthogonal;
using fixtures::star;

namespace {

RiemannTuple zero_tuple(int m, int s) { return curvature_tuple(zero_bracket(0, m), s); }

RiemannTuple with_noise(RiemannTuple t, int k, std::mt19937& rng) {
  std::normal_distribution<double> nd;
  const double mag = std::max(1.0, t[k].max_abs());
  for (double& v : t[k].data()) v = mag * nd(rng);
  return t;
}

}  // namespace

TEST_CASE("R1 residuals") {
  const auto round = curvature_tuple(milnor(1, 1, 1), 3);
  for (double r : check_r1(round).residuals) CHECK(r <= 1e-10);
  for (double r : check_r1(zero_tuple(3, 3)).residuals) CHECK(r == 0.0);

  std::mt19937 rng(1);
  const auto noisy = with_noise(curvature_tuple(milnor(0.3, 1, 2), 3), 1, rng);
  const auto res = check_r1(noisy).residuals;
  CHECK(std::max(res[2], res[4]) > 0.1);

  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int i = 0; i < 5; ++i) {
    const auto t = curvature_tuple(milnor(u(rng), u(rng), u(rng)), 4);
    CHECK(check_r1(t).passes(1e-8));
    CHECK(check_r2(t).passes());
  }
  CHECK(check_r1(curvature_tuple(mu_o(), 3)).passes(1e-8));
  CHECK(check_r1(curvature_tuple(hyperbolic_bracket(4), 3)).passes(1e-8));
}

TEST_CASE("R2 clauses") {
  SUBCASE("round") {
    const auto r = check_r2(curvature_tuple(milnor(1, 1, 1), 3));
    CHECK(r.passes());
    for (const auto& k : r.kernels) CHECK(k.dim_k == 3);
  }
  SUBCASE("Berger") {
    const auto t = curvature_tuple(milnor(0.25, 1, 1), 3);
    const auto r = check_r2(t);
    CHECK(r.passes());
    for (const auto& k : r.kernels) CHECK(k.dim_k == 1);
    const Eigen::MatrixXd N = null_space(alpha_matrix(t, 2));
    REQUIRE(N.cols() == 1);
    CHECK(std::abs(N(2, 0)) == doctest::Approx(1.0));  // E_12 is the last basis element
  }
  SUBCASE("second derivative removed") {
    auto t = curvature_tuple(star(0.25, 0.125), 4);
    for (double& v : t[2].data()) v = 0.0;
    const auto r = check_r2(t);
    CHECK_FALSE(r.passes());
    CHECK_FALSE(r.inclusion_ok());
    CHECK(r.kernel_ok());
    CHECK_FALSE(check_r1(t).passes(1e-8));
  }
}

TEST_CASE("Singer invariant") {
  const auto round = singer_invariant(curvature_tuple(milnor(1, 1, 1), 4));
  CHECK(round.stabilized);
  CHECK(round.singer_k == 0);
  CHECK(round.kernels == std::vector<int>{3, 3, 3, 3});

  // (1,2,3) has sec(e_0^e_2) = sec(e_1^e_2), so R^0 alone keeps a rotation
  const auto generic = singer_invariant(curvature_tuple(milnor(1, 2, 3), 3));
  CHECK(generic.kernels == std::vector<int>{1, 0, 0});
  CHECK(generic.singer_k == 1);
  const auto distinct = singer_invariant(curvature_tuple(milnor(1, 2, 4), 3));
  CHECK(distinct.kernels.front() == 0);
  CHECK(distinct.singer_k == 0);

  std::mt19937 rng(2);
  std::uniform_real_distribution<double> u(0.2, 3.0);
  for (int i = 0; i < 10; ++i) {
    const auto t = curvature_tuple(milnor(u(rng), u(rng), u(rng)), 3);
    const auto rep = singer_invariant(t);
    CHECK(rep.stabilized);
    CHECK(rep.singer_k <= 1);
    for (std::size_t k = 1; k < rep.kernels.size(); ++k) CHECK(rep.kernels[k] <= rep.kernels[k - 1]);
    const auto moved = singer_invariant(transform(random_orthogonal(rng, 3, i % 2), t));
    CHECK(moved.kernels == rep.kernels);
  }

  // isotropic R^0 followed by a generic R^1: the filtration drops at the last order
  RiemannTuple t{3, 2, curvature_tower(milnor(0.25, 1, 1), 2)};
  t[1] = with_noise(t, 1, rng)[1];
  t[1].antisymmetrize();
  const auto cut = singer_invariant(t);
  CHECK(cut.kernels == std::vector<int>{1, 0});
  CHECK_FALSE(cut.stabilized);
}

TEST_CASE("Nomizu algebra") {
  const auto flat = nomizu_algebra(zero_tuple(3, 3));
  CHECK(flat.dim == 6);
  const auto round = nomizu_algebra(curvature_tuple(milnor(1, 1, 1), 3));
  CHECK(round.dim == 6);
  CHECK(round.closure_residual < 1e-8);
  const auto berger = nomizu_algebra(curvature_tuple(milnor(0.25, 1, 1), 3));
  CHECK(berger.dim == 4);
  CHECK(berger.stabilized);
  CHECK(berger.closure_residual < 1e-8);
  CHECK(berger.system_residual < 1e-10);
  const auto generic = nomizu_algebra(curvature_tuple(milnor(1, 2, 3), 3));
  CHECK(generic.dim == 3);
  CHECK(generic.closure_residual < 1e-8);
  CHECK(nomizu_algebra(curvature_tuple(mu_o(), 3)).dim == 4);
  CHECK(nomizu_algebra(curvature_tuple(hyperbolic_bracket(3), 3)).dim == 6);

  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(0.3, 2.0);
  for (int i = 0; i < 5; ++i) {
    const auto b = i % 2 ? milnor(u(rng), 1, 1) : milnor(u(rng), u(rng), u(rng));
    const int d = nomizu_algebra(curvature_tuple(b, 3)).dim;
    CHECK(nomizu_algebra(transform(random_orthogonal(rng, 3), curvature_tuple(b, 3))).dim == d);
    CHECK(nomizu_algebra(curvature_tuple(scale(b, u(rng)), 3)).dim == d);
  }

  // (v, S(v)) generates a Killing field on a Lie group
  const auto b = milnor(0.7, 1.3, 0.4);
  const auto t = curvature_tuple(b, 3);
  const auto S = nomizu_connection(b);
  const auto basis = nomizu_algebra(t);
  Eigen::MatrixXd span(9, basis.dim);
  for (int c = 0; c < basis.dim; ++c) {
    span.block(0, c, 3, 1) = basis.generators[c].v;
    const auto& A = basis.generators[c].A;
    span.block(3, c, 6, 1) << A.col(0), A.col(1);
  }
  for (int x = 0; x < 3; ++x) {
    Eigen::VectorXd g(9);
    g << Eigen::Vector3d::Unit(x), S.S[x].col(0), S.S[x].col(1);
    const Eigen::VectorXd coeff = span.colPivHouseholderQr().solve(g);
    CHECK((span * coeff - g).norm() < 1e-8);
  }
}

TEST_CASE("Nomizu bracket") {
  const auto R0 = curvature_base(milnor(1, 1, 1));
  const KillingGenerator x{Eigen::Vector3d::Unit(0), Eigen::MatrixXd::Zero(3, 3)};
  const KillingGenerator y{Eigen::Vector3d::Unit(1), Eigen::MatrixXd::Zero(3, 3)};
  const auto br = nomizu_bracket(R0, x, y);
  CHECK(br.v.norm() == 0.0);
  CHECK((br.A - so_basis(3, 0, 1)).norm() < 1e-14);
}

TEST_CASE("orbit distance") {
  std::mt19937 rng(6);
  std::uniform_real_distribution<double> u(0.3, 2.5);
  for (int i = 0; i < 10; ++i) {
    const auto t = curvature_tuple(milnor(u(rng), u(rng), u(rng)), 3);
    const Eigen::MatrixXd a = random_orthogonal(rng, 3, i % 2);
    const auto d = tuple_distance(t, transform(a, t));
    CHECK(d.distance <= 1e-6);
    CHECK(d.converged);
    CHECK((d.aligner.transpose() * d.aligner - Eigen::MatrixXd::Identity(3, 3)).norm() < 1e-12);
  }
  const auto t = curvature_tuple(milnor(0.4, 1.2, 2.0), 3);
  CHECK(tuple_distance(t, t).distance == 0.0);

  const auto round = curvature_tuple(milnor(1, 1, 1), 3);
  const auto half = curvature_tuple(scale(milnor(1, 1, 1), 2.0), 3);
  const auto rd = tuple_distance(round, half);
  CHECK(rd.distance == doctest::Approx(0.75 * std::sqrt(12.0)).epsilon(1e-10));

  const auto t1 = curvature_tuple(milnor(0.5, 1, 2), 3);
  const auto t2 = curvature_tuple(milnor(0.6, 1.1, 1.7), 3);
  const auto t3 = curvature_tuple(milnor(0.45, 1.3, 1.5), 3);
  const double d12 = tuple_distance(t1, t2).distance;
  CHECK(d12 == doctest::Approx(tuple_distance(t2, t1).distance).epsilon(1e-6));
  CHECK(d12 <= tuple_distance(t1, t3).distance + tuple_distance(t3, t2).distance + 1e-6);

  CHECK_THROWS_AS(tuple_distance(t1, curvature_tuple(milnor(1, 1, 1), 4)), DomainError);
  CHECK_THROWS_AS(tuple_distance(t1, curvature_tuple(hyperbolic_bracket(4), 3)), DomainError);
  CHECK_THROWS_AS(tuple_distance(t1, t2, {1.0, 1.0}), DomainError);

  AlignmentBudget none;
  none.max_iterations = 0;
  CHECK_FALSE(tuple_distance(t1, transform(random_orthogonal(rng, 3), t1), {}, none).converged);
}

TEST_CASE("orbit distance in dimension four") {
  std::mt19937 rng(8);
  const auto t = curvature_tuple(fixtures::random_solvable(rng, 4), 3);
  const auto d = tuple_distance(t, transform(random_orthogonal(rng, 4, true), t));
  CHECK(d.distance <= 1e-6 * std::max(1.0, t[3].norm()));
}

TEST_CASE("alignment gradient matches finite differences") {
  std::mt19937 rng(10);
  std::uniform_real_distribution<double> u(0.3, 2.5);
  const auto basis = so_basis(3);
  for (int i = 0; i < 20; ++i) {
    const auto t1 = curvature_tuple(milnor(u(rng), u(rng), u(rng)), 3);
    const auto t2 = curvature_tuple(milnor(u(rng), u(rng), u(rng)), 3);
    const std::vector<double> w{1.0, 0.5, 2.0, 1.0};
    const Eigen::MatrixXd a = random_orthogonal(rng, 3, i % 2);
    const Eigen::VectorXd g = alignment_gradient(t1, t2, w, a);
    for (std::size_t p = 0; p < basis.size(); ++p) {
      const double h = 1e-5;
      const Eigen::MatrixXd ap = a * (h * basis[p]).exp(), am = a * (-h * basis[p]).exp();
      const double fd = (alignment_objective(t1, t2, w, ap) - alignment_objective(t1, t2, w, am)) / (2 * h);
      CHECK(std::abs(fd - g[static_cast<Eigen::Index>(p)]) <= 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("alignment starts") {
  CHECK(alignment_starts(3, 0, 1).size() == 48);
  CHECK(alignment_starts(2, 0, 1).size() == 8);
  const auto s4 = alignment_starts(4, 6, 1);
  CHECK(s4.size() == 8);
  int negative = 0;
  for (const auto& a : s4) {
    CHECK((a.transpose() * a - Eigen::MatrixXd::Identity(4, 4)).norm() < 1e-12);
    negative += a.determinant() < 0;
  }
  CHECK(negative == 3);
}

TEST_CASE("report serialization") {
  const auto t = curvature_tuple(milnor(0.25, 1, 1), 3);
  CHECK(to_json(check_r1(t)).at("residuals").size() == 6);
  CHECK(to_json(check_r2(t)).at("kernel_ok") == true);
  CHECK(to_json(singer_invariant(t)).at("singer_k") == 0);
  CHECK(to_json(nomizu_algebra(t)).at("generators").size() == 4);
  CHECK(to_json(tuple_distance(t, t)).at("aligner").size() == 3);
}
