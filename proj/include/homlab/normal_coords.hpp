#pragma once

#include "homlab/curvature.hpp"
#include "homlab/verifier.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <map>
#include <vector>

namespace homlab {

/// R^{j}(0) for j = 0..K along the radial geodesic t -> t y, as m x m matrices:
/// R^{j}(0) w = -Rm^j(y,..,y | y ^ w) y. Requires K <= s.
std::vector<Eigen::MatrixXd> radial_curvature_ops(const RiemannTuple& t, const Eigen::VectorXd& y, int K);

/// Word of argument indices (a^{i_1} a^{i_2} ...) with an integer coefficient.
using OperatorPolynomial = std::map<std::vector<int>, long long>;

/// Symbolic expansion of the Jacobi-jet polynomial P_k in non-commuting arguments a^0, a^1, ...
OperatorPolynomial jacobi_polynomial(int k);
int polynomial_degree(const OperatorPolynomial& p);

/// Matrices P_1 .. P_kmax evaluated on ops (entry 0 is unused and zero). Needs kmax <= ops.size().
std::vector<Eigen::MatrixXd> jacobi_polynomials(const std::vector<Eigen::MatrixXd>& ops, int kmax);

/// Covariant derivatives J^{k}(0), k = 0..K, of the Jacobi field with J(0) = 0, J'(0) = w.
/// Needs ops R^{0}..R^{K-3}.
std::vector<Eigen::VectorXd> jacobi_jet(const std::vector<Eigen::MatrixXd>& ops, const Eigen::VectorXd& w, int K);

/// f^{(n)}(0) for n = 0..J.size() of f(t) = |J(t)|^2 from the odd/even closed formulas.
std::vector<double> f_derivatives(const std::vector<Eigen::VectorXd>& J);

struct RadialJet {
  Eigen::VectorXd y;
  Eigen::VectorXd w;
  std::vector<Eigen::VectorXd> jacobi_jets;  // J^{k}(0), k = 0..K+3
  std::vector<double> f_derivs;              // f^{(k)}(0), k = 0..K+4
};

/// Radial jet using Rm^0..Rm^K; requires K <= s.
RadialJet radial_metric_jet(const RiemannTuple& t, const Eigen::VectorXd& y, const Eigen::VectorXd& w, int K);

/// Multi-indices q with |q| = d in m variables, lexicographically descending in q_1.
std::vector<std::vector<int>> multi_indices(int m, int d);

/// Partial derivatives d^q g_ij(0) of the metric in normal coordinates for |q| <= K.
class MetricJet {
 public:
  MetricJet(int m, int order);

  int m() const { return m_; }
  int order() const { return order_; }
  /// All multi-indices with |q| <= order, grouped by |q|.
  const std::vector<std::vector<int>>& indices() const { return indices_; }

  double derivative(int i, int j, const std::vector<int>& q) const;
  /// m x m matrix of d^q g_ij(0).
  const Eigen::MatrixXd& derivative(const std::vector<int>& q) const;
  void set_derivative(const std::vector<int>& q, const Eigen::MatrixXd& value);

  /// max over |q| <= order, i, j of |d^q g_ij - d^q h_ij|.
  double max_difference(const MetricJet& other) const;

 private:
  std::size_t slot(const std::vector<int>& q) const;

  int m_;
  int order_;
  std::vector<std::vector<int>> indices_;
  std::map<std::vector<int>, std::size_t> lookup_;
  std::vector<Eigen::MatrixXd> values_;
};

/// Recovers d^q g_ij(0), |q| <= K, from the tuple. Requires K <= s + 2.
MetricJet metric_taylor(const RiemannTuple& t, int K, unsigned seed = 42);

struct LauretGap {
  double aligned = 0.0;    // after the best orbit aligner of the curvature tuples
  double unaligned = 0.0;  // in the given frames
  Eigen::MatrixXd aligner;
};

/// max |d^q g1_ij(0) - d^q g2_ij(0)| over |q| <= K. Requires K <= min(s1, s2) + 2.
LauretGap lauret_gap(const RiemannTuple& t1, const RiemannTuple& t2, int K, const AlignmentBudget& budget = {});

nlohmann::json to_json(const RadialJet& j);
nlohmann::json to_json(const MetricJet& j);
nlohmann::json to_json(const LauretGap& g);

}  // namespace homlab
