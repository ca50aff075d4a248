#pragma once

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <array>
#include <vector>

namespace homlab {

/// Structure constants of a Lie bracket on R^{q+m} = R^q (isotropy) + R^m (base).
///
/// mu(e_i, e_j) = sum_k c(i, j, k) e_k with indices in [0, q+m). The first q
/// indices span the isotropy block, the remaining m the base block, which
/// carries the standard inner product. Antisymmetry in (i, j) is enforced by
/// every mutator.
class Bracket {
 public:
  Bracket(int q, int m);

  /// Builds a bracket from (i, j, k, value) entries; (j, i, k) gets -value.
  static Bracket from_entries(int q, int m,
                              const std::vector<std::tuple<int, int, int, double>>& entries);

  int q() const { return q_; }
  int m() const { return m_; }
  int dim() const { return q_ + m_; }

  double operator()(int i, int j, int k) const { return c_[index(i, j, k)]; }

  /// Sets mu(e_i, e_j)_k = v and mu(e_j, e_i)_k = -v. Requires i != j unless v == 0.
  void set(int i, int j, int k, double v);

  /// Bracket of two arbitrary vectors of R^{q+m}.
  Eigen::VectorXd apply(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;

  double max_abs() const;
  const std::vector<double>& coefficients() const { return c_; }

  friend bool operator==(const Bracket& a, const Bracket& b) = default;

 private:
  std::size_t index(int i, int j, int k) const {
    const auto n = static_cast<std::size_t>(dim());
    return (static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)) * n +
           static_cast<std::size_t>(k);
  }

  int q_;
  int m_;
  std::vector<double> c_;
};

struct ValidityReport {
  double jacobi_residual = 0.0;
  bool h1_ok = false;
  bool h2_ok = false;
  bool h3_ok = false;
  int degenerate_subspace_dim = 0;

  bool ok() const { return h1_ok && h2_ok && h3_ok; }
};

/// The three blocks of a bracket: everything touching the isotropy block, and
/// the isotropy/base components of mu restricted to the base block.
struct BracketSplit {
  Bracket mixed;
  int q = 0;
  int m = 0;
  std::vector<double> iso_part;   // [a][b][z], a,b < m, z < q
  std::vector<double> base_part;  // [a][b][c], a,b,c < m

  double iso(int a, int b, int z) const {
    return iso_part[(static_cast<std::size_t>(a) * m + b) * q + z];
  }
  double base(int a, int b, int c) const {
    return base_part[(static_cast<std::size_t>(a) * m + b) * m + c];
  }
};

inline constexpr double kDefaultTolerance = 1e-8;

ValidityReport validate(const Bracket& b, double tol = kDefaultTolerance);

/// Removes the isotropy directions acting trivially on the base block. The
/// q'-block of the result is only defined up to an orthogonal change of basis.
Bracket restrict_bracket(const Bracket& b, double tol = kDefaultTolerance);

/// The bracket of the homothetic space with metric R^2 g.
Bracket scale(const Bracket& b, double R);

BracketSplit split(const Bracket& b);
Bracket recompose(const BracketSplit& s);

/// Change of orthonormal frame on the base block: (a.mu)(X, Y) = a mu(a^T X, a^T Y),
/// acting trivially on the isotropy block.
Bracket transform(const Bracket& b, const Eigen::MatrixXd& a);

/// Numerical rank with singular-value threshold tol * sigma_max.
int numerical_rank(const Eigen::MatrixXd& mat, double tol);

// Fixture brackets.
Bracket zero_bracket(int q, int m);
/// The symmetric space CP^1 x R written with a one-dimensional isotropy.
Bracket mu_o();
/// Same as mu_o() with an extra isotropy generator (index 1) acting by zero.
Bracket mu_o_degenerate_extension();
/// Real hyperbolic space RH^m as the solvable group mu(e_0, e_i) = e_i.
Bracket hyperbolic_bracket(int m);
/// Two-dimensional brackets with q = 1: S^2 (eps = +1), RH^2 (eps = -1), flat (eps = 0).
Bracket surface_bracket(int eps);

void to_json(nlohmann::json& j, const Bracket& b);
Bracket bracket_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ValidityReport& r);

}  // namespace homlab
