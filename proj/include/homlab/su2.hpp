#pragma once

#include "homlab/bracket.hpp"
#include "homlab/curvature.hpp"

#include <boost/rational.hpp>
#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <array>
#include <vector>

namespace homlab {

/// Diagonal left-invariant metric g(X_0,X_0) = eps, g(X_1,X_1) = lambda_1,
/// g(X_2,X_2) = lambda_2 on SU(2) in a Milnor frame. Stored as
/// (eps, mean, gap) with lambda_{1,2} = mean -/+ gap/2 so small gaps stay exact.
class MilnorMetric {
 public:
  MilnorMetric(double eps, double lambda1, double lambda2);
  static MilnorMetric from_gap(double eps, double gap, double mean = 1.0);

  double eps() const { return eps_; }
  double lambda1() const { return mean_ - 0.5 * gap_; }
  double lambda2() const { return mean_ + 0.5 * gap_; }
  /// lambda_2 - lambda_1.
  double gap() const { return gap_; }
  double mean() const { return mean_; }

 private:
  MilnorMetric() = default;
  double eps_ = 1.0;
  double mean_ = 1.0;
  double gap_ = 0.0;
};

Bracket milnor_bracket(const MilnorMetric& g);

struct SU2Invariants {
  std::array<double, 3> c{};
  /// Sectional curvatures of e_0^e_1, e_1^e_2, e_0^e_2 from the c-coefficients.
  std::array<double, 3> sec{};
  /// The same three values from the explicit (eps, lambda) expressions.
  std::array<double, 3> sec_explicit{};
  /// max relative disagreement between sec and sec_explicit.
  double cross_check = 0.0;
};

SU2Invariants su2_invariants(const MilnorMetric& g);

/// Closed-form first covariant derivative (six independent non-zero values).
CurvatureDerivative rm1_closed(const MilnorMetric& g);

/// Rm^k(e_0,..,e_0 | w) for w = e_0^e_1, e_0^e_2, e_1^e_2 from the inductive formula.
std::array<Eigen::MatrixXd, 3> rmk_axis_closed(const MilnorMetric& g, int k);

/// mu_star(eps, delta), i.e. the Milnor metric (eps, 1 - delta/2, 1 + delta/2).
Bracket star_family(double eps, double delta);
MilnorMetric star_metric(double eps, double delta);

using Rational = boost::rational<long long>;

/// Parses a non-negative exponent given as a JSON number or a "p/q" string.
Rational parse_exponent(const nlohmann::json& j);

/// eps^(n) = c_eps n^-p and lambda_2 - lambda_1 = c_delta n^-r around lambda = limit.
struct PowerLawFamily {
  double c_eps = 1.0;
  Rational p{2};
  double c_delta = 0.0;
  Rational r{0};
  double limit = 1.0;

  void check() const;
  MilnorMetric metric(double n) const;
};

struct RegularityIndex {
  bool infinite = false;
  long long value = 0;
};

RegularityIndex regularity_index(const PowerLawFamily& f);

struct CollapseRow {
  int n = 0;
  int k = 0;
  double norm = 0.0;
  double envelope = 0.0;    // eps^(1/2) + eps^(-(k+2)/2) |gap|, NaN for k = 0
  double axis_bound = 0.0;  // 2^(2(k+1)) eps^(-(k+2)/2) |gap|, NaN for k = 0
};

struct CollapseTable {
  std::vector<int> n_values;
  int k_max = 0;
  std::vector<CollapseRow> rows;  // ordered by n, then k
  std::vector<double> slopes;     // least-squares log-log slope of norm against n, per k
  std::vector<double> max_abs_sec;

  /// Column of norms for order k, in n order.
  std::vector<double> column(int k) const;
};

CollapseTable collapse_table(const PowerLawFamily& f, const std::vector<int>& n_values, int k_max,
                             const EngineLimits& limits = {});

nlohmann::json to_json(const SU2Invariants& r);
nlohmann::json to_json(const RegularityIndex& r);
nlohmann::json to_json(const CollapseTable& t);

}  // namespace homlab
