#pragma once

#include "homlab/bracket.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace fixtures {

/// Left-invariant metric on SU(2) written directly from its structure constants.
inline homlab::Bracket milnor(double eps, double l1, double l2) {
  return homlab::Bracket::from_entries(0, 3,
                                       {{0, 1, 2, -2 * std::sqrt(l2 / (eps * l1))},
                                        {0, 2, 1, 2 * std::sqrt(l1 / (eps * l2))},
                                        {1, 2, 0, -2 * std::sqrt(eps / (l1 * l2))}});
}

inline homlab::Bracket star(double eps, double delta) { return milnor(eps, 1 - delta / 2, 1 + delta / 2); }

/// mu(e_0, e_i) = sum_j A_ji e_j: e_0 acts on the abelian ideal span(e_1..).
inline homlab::Bracket random_solvable(std::mt19937& rng, int m) {
  std::normal_distribution<double> nd;
  homlab::Bracket b(0, m);
  for (int i = 1; i < m; ++i)
    for (int j = 1; j < m; ++j) b.set(0, i, j, nd(rng));
  return b;
}

inline Eigen::MatrixXd random_orthogonal(std::mt19937& rng, int m, bool flip = false) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd g(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) g(i, j) = nd(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  if ((q.determinant() < 0) != flip) q.col(0) *= -1.0;
  return q;
}

}  // namespace fixtures
