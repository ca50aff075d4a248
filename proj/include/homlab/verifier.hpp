#pragma once

#include "homlab/curvature.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <array>
#include <vector>

namespace homlab {

/// Singular-value threshold tau = kSubspaceTolerance * sigma_max for kernels and images.
inline constexpr double kSubspaceTolerance = 1e-8;

/// Residuals of the six first-order identities on a tuple:
///   i)   pair symmetry of R^0
///   ii)  first Bianchi identity of R^0
///   iii) pair symmetry of X -| R^1
///   iv)  first Bianchi identity of X -| R^1
///   v)   second Bianchi identity (cyclic in X, Y_1, Y_2) of R^1
///   vi)  Ricci identity on the first two slots of R^{k+2}, 0 <= k <= s-2
/// Each residual is a max-abs violation divided by max(1, max-abs of the tensors involved).
struct R1Report {
  std::array<double, 6> residuals{};

  bool passes(double tol) const;
};

R1Report check_r1(const RiemannTuple& t);

struct InclusionCheck {
  int k = 0;
  double residual = 0.0;  // relative least-squares residual of beta^k against image(alpha^{k-1})
  bool ok = false;
};

struct KernelCheck {
  int k = 0;
  int dim_k = 0;
  int dim_k_plus_1 = 0;
  bool ok = false;
};

struct R2Report {
  std::vector<InclusionCheck> inclusions;  // i(m)+2 <= k <= s
  std::vector<KernelCheck> kernels;        // i(m) <= k <= s-1

  bool inclusion_ok() const;
  bool kernel_ok() const;
  bool passes() const { return inclusion_ok() && kernel_ok(); }
};

R2Report check_r2(const RiemannTuple& t, double tol = kSubspaceTolerance);

/// Flattened alpha^k: columns E_p . (R^0, ..., R^k) over the so(m) basis.
Eigen::MatrixXd alpha_matrix(const RiemannTuple& t, int k);
/// Flattened beta^k: columns (e_x -| R^1, ..., e_x -| R^k).
Eigen::MatrixXd beta_matrix(const RiemannTuple& t, int k);

/// Orthonormal basis of the numerical nullspace (threshold tol * sigma_max).
Eigen::MatrixXd null_space(const Eigen::MatrixXd& mat, double tol = kSubspaceTolerance);

struct SingerReport {
  std::vector<int> kernels;  // dim i(k), k = 0..s-1
  int singer_k = -1;         // first k with i(k) = i(k+1); -1 when not stabilized
  bool stabilized = false;
};

SingerReport singer_invariant(const RiemannTuple& t, double tol = kSubspaceTolerance);

/// A Killing generator (v, A) with A in so(m) as a matrix.
struct KillingGenerator {
  Eigen::VectorXd v;
  Eigen::MatrixXd A;
};

struct NomizuBasis {
  std::vector<KillingGenerator> generators;
  int dim = 0;
  /// Dimension when only the constraints through order s-2 are imposed.
  int dim_truncated = 0;
  bool stabilized = false;
  /// max over generators of the relative residual of the linear system.
  double system_residual = 0.0;
  /// max over pairs of the relative distance of [g_i, g_j] from the span.
  double closure_residual = 0.0;
};

NomizuBasis nomizu_algebra(const RiemannTuple& t, double tol = kSubspaceTolerance);

/// Bracket [(v,A),(w,B)] = (A w - B v, [A,B] + R^0(v ^ w)).
KillingGenerator nomizu_bracket(const CurvatureDerivative& R0, const KillingGenerator& x,
                                const KillingGenerator& y);

/// Every start gets screening_iterations steps; the refined_starts best then
/// continue up to max_iterations each.
struct AlignmentBudget {
  int max_iterations = 200;
  int screening_iterations = 8;
  int refined_starts = 4;
  int random_starts = 24;  // used for m > 3
  double gradient_tolerance = 1e-10;
  unsigned seed = 42;
};

struct TupleDistance {
  double distance = 0.0;
  Eigen::MatrixXd aligner;
  std::vector<double> per_order;  // |a.R1^k - R2^k|
  bool converged = false;
  int iterations = 0;  // total over all starts
};

/// Upper bound on min over a in O(m) of sum_k w_k |a.t1^k - t2^k|. Empty
/// weights mean w_k = 1 for every order.
TupleDistance tuple_distance(const RiemannTuple& t1, const RiemannTuple& t2,
                             const std::vector<double>& weights = {},
                             const AlignmentBudget& budget = {});

/// F(a) = sum_k w_k |a.t1^k - t2^k|^2, the smooth objective minimized by tuple_distance.
double alignment_objective(const RiemannTuple& t1, const RiemannTuple& t2,
                           const std::vector<double>& weights, const Eigen::MatrixXd& a);

/// Partial derivatives of t -> F(a exp(t E_p)) at t = 0 over the so(m) basis E_p.
Eigen::VectorXd alignment_gradient(const RiemannTuple& t1, const RiemannTuple& t2,
                                   const std::vector<double>& weights, const Eigen::MatrixXd& a);

/// Starting points of the orbit search: all signed permutation matrices for
/// m <= 3, otherwise the identity, -identity and random elements of both components.
std::vector<Eigen::MatrixXd> alignment_starts(int m, int random_starts, unsigned seed);

nlohmann::json to_json(const R1Report& r);
nlohmann::json to_json(const R2Report& r);
nlohmann::json to_json(const SingerReport& r);
nlohmann::json to_json(const NomizuBasis& r);
nlohmann::json to_json(const TupleDistance& r);

}  // namespace homlab
