#pragma once

#include "homlab/bracket.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <cstddef>
#include <span>
#include <vector>

namespace homlab {

/// Caps on tensor sizes. An order-k derivative in dimension m holds m^(k+4) doubles.
struct EngineLimits {
  int max_m = 6;
  std::size_t max_entries = std::size_t{1} << 25;
};

/// Basis element E_ij = e^i (x) e_j - e^j (x) e_i of so(m), i.e. E_ij e_i = e_j.
Eigen::MatrixXd so_basis(int m, int i, int j);
/// All E_ij with i < j in lexicographic order.
std::vector<Eigen::MatrixXd> so_basis(int m);

/// Difference tensor S = D - nabla between the canonical Ambrose-Singer
/// connection and the Levi-Civita connection, as a map R^m -> so(m).
struct ConnectionOperator {
  int m = 0;
  std::vector<Eigen::MatrixXd> S;  // S[x] acts on R^m, skew

  /// max_x of the spectral norm of S(e_x).
  double max_operator_norm() const;
};

/// Dense order-k curvature derivative T(x_1..x_k | e_a ^ e_b) in so(m).
///
/// Layout is row-major over the index tuple (x_1, ..., x_k, a, b, i, j) where
/// the so(m) value is the matrix with entries [i][j] = <T(...) e_j, e_i>.
/// The (a, b) pair is stored in both orders; T is skew in (a,b) and (i,j).
class CurvatureDerivative {
 public:
  CurvatureDerivative(int order, int m);

  int order() const { return order_; }
  int m() const { return m_; }
  std::size_t size() const { return data_.size(); }
  /// Number of (a, b, i, j) entries per derivative multi-index, m^4.
  std::size_t block_size() const;

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }

  double operator()(std::span<const int> derivs, int a, int b, int i, int j) const;
  Eigen::MatrixXd value(std::span<const int> derivs, int a, int b) const;
  /// Sets the value on e_a ^ e_b (and minus it on e_b ^ e_a).
  void set_value(std::span<const int> derivs, int a, int b, const Eigen::MatrixXd& v);

  /// X -| T with X = e_x in the first derivative slot.
  CurvatureDerivative contract_first(int x) const;
  /// Swaps the first two derivative slots (order >= 2).
  CurvatureDerivative swap_first_two() const;

  /// Frobenius norm over all stored entries (both (a,b) orders, full matrices).
  double norm() const;
  double max_abs() const;

  /// Projects onto the part skew in (a,b) and in (i,j).
  void antisymmetrize();

  CurvatureDerivative& operator+=(const CurvatureDerivative& o);
  CurvatureDerivative& operator-=(const CurvatureDerivative& o);
  CurvatureDerivative& operator*=(double s);

 private:
  std::size_t offset(std::span<const int> derivs, int a, int b, int i, int j) const;

  int order_;
  int m_;
  std::vector<double> data_;
};

CurvatureDerivative operator+(CurvatureDerivative a, const CurvatureDerivative& b);
CurvatureDerivative operator-(CurvatureDerivative a, const CurvatureDerivative& b);
CurvatureDerivative operator*(double s, CurvatureDerivative a);
double dot(const CurvatureDerivative& a, const CurvatureDerivative& b);

/// A finite tower (R^0, ..., R^s) of curvature data in dimension m.
struct RiemannTuple {
  int m = 0;
  int s = 0;
  std::vector<CurvatureDerivative> entries;

  const CurvatureDerivative& operator[](int k) const { return entries.at(static_cast<std::size_t>(k)); }
  CurvatureDerivative& operator[](int k) { return entries.at(static_cast<std::size_t>(k)); }
};

/// Largest Singer invariant in dimension <= m: exact for m <= 4, the bound
/// ceil(3m/2) - 1 otherwise.
int singer_bound(int m);

/// Derivation action of A in so(m) on an so(m)-valued multilinear map:
/// (A.P)(V_1..V_r) = [A, P(V_1..V_r)] - sum_i P(.., A V_i, ..), the wedge slot
/// counting as two vector slots.
CurvatureDerivative derivation_act(const Eigen::MatrixXd& A, const CurvatureDerivative& P);

/// Change of orthonormal frame: (a.T)(V..) = a T(a^T V..) a^T.
CurvatureDerivative transform(const Eigen::MatrixXd& a, const CurvatureDerivative& T);
RiemannTuple transform(const Eigen::MatrixXd& a, const RiemannTuple& t);

ConnectionOperator nomizu_connection(const Bracket& b);

/// Rm(X^Y) = ad(mu_h(X,Y)) - [S(X), S(Y)] - S(mu_m(X,Y)), with the convention
/// Rm(X^Y) = nabla_[X,Y] - [nabla_X, nabla_Y] (unit sphere has sectional +1).
CurvatureDerivative curvature_base(const Bracket& b, double tol = kDefaultTolerance);

/// Next covariant derivative from X -| Rm^{k+1} = -S(X).Rm^k.
CurvatureDerivative curvature_derive(const ConnectionOperator& S, const CurvatureDerivative& prev,
                                     const EngineLimits& limits = {});
CurvatureDerivative curvature_derive(const Bracket& b, const CurvatureDerivative& prev,
                                     const EngineLimits& limits = {});

/// Rm^0 .. Rm^k_max without the tuple-length requirement.
std::vector<CurvatureDerivative> curvature_tower(const Bracket& b, int k_max,
                                                 const EngineLimits& limits = {});

/// The curvature s-tuple; requires s >= singer_bound(m) + 2.
RiemannTuple curvature_tuple(const Bracket& b, int s, const EngineLimits& limits = {});

/// Entries of the curvature operator on Lambda^2 in the lexicographic basis
/// e_a ^ e_b (a < b): column (a,b) holds the E_cd-coordinates of Rm(e_a ^ e_b).
Eigen::MatrixXd lambda2_operator(const CurvatureDerivative& R0);

/// <Rm(X^Y) X, Y> for an orthonormal pair.
double sectional_curvature(const CurvatureDerivative& R0, const Eigen::VectorXd& X,
                           const Eigen::VectorXd& Y);

struct SectionalBound {
  double value = 0.0;
  /// True when the value is exact (m <= 3); false for sampled estimates.
  bool certified = true;
};

/// sup of |sec| over planes: exact spectral answer for m <= 3, multi-start
/// ascent over orthonormal pairs (fixed seed) otherwise.
SectionalBound max_abs_sec(const CurvatureDerivative& R0, unsigned seed = 42);

nlohmann::json to_json(const CurvatureDerivative& T);
CurvatureDerivative curvature_derivative_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RiemannTuple& t);

}  // namespace homlab
