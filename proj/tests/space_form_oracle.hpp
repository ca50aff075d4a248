#pragma once

#include "homlab/bracket.hpp"

#include "fixtures.hpp"

#include <cmath>
#include <map>
#include <vector>

// Taylor expansion of a constant-curvature metric in normal coordinates.
namespace space_form_oracle {

using homlab::Bracket;

using Poly = std::map<std::vector<int>, double>;

inline double fact(int n) { return n <= 1 ? 1.0 : n * fact(n - 1); }

inline Poly mul(const Poly& a, const Poly& b) {
  Poly r;
  for (const auto& [qa, ca] : a)
    for (const auto& [qb, cb] : b) {
      auto q = qa;
      for (std::size_t i = 0; i < q.size(); ++i) q[i] += qb[i];
      r[q] += ca * cb;
    }
  return r;
}

inline Poly add(Poly a, const Poly& b, double s = 1.0) {
  for (const auto& [q, c] : b) a[q] += s * c;
  return a;
}

inline Poly constant(int m, double c) { return {{std::vector<int>(static_cast<std::size_t>(m), 0), c}}; }

inline Poly variable(int m, int i) {
  std::vector<int> q(static_cast<std::size_t>(m), 0);
  q[static_cast<std::size_t>(i)] = 1;
  return {{q, 1.0}};
}

// Taylor polynomial of g_ij = delta_ij h(r^2) + x_i x_j (1 - h(r^2)) / r^2 for curvature kappa,
// truncated at total degree K.
inline std::vector<std::vector<Poly>> space_form_metric(int m, double kappa, int K) {
  Poly u;
  for (int i = 0; i < m; ++i) u = add(u, mul(variable(m, i), variable(m, i)));
  Poly h, g;  // g = (1 - h) / u
  Poly un = constant(m, 1.0);
  for (int n = 0; 2 * n <= K; ++n) {
    const double c = std::pow(-1.0, n) * std::pow(2.0, 2 * n + 1) * std::pow(kappa, n) / fact(2 * n + 2);
    h = add(h, un, c);
    un = mul(un, u);
  }
  Poly um = constant(m, 1.0);
  for (int n = 1; 2 * n <= K; ++n) {
    const double c = std::pow(-1.0, n) * std::pow(2.0, 2 * n + 1) * std::pow(kappa, n) / fact(2 * n + 2);
    g = add(g, um, -c);
    um = mul(um, u);
  }
  std::vector<std::vector<Poly>> out(static_cast<std::size_t>(m), std::vector<Poly>(static_cast<std::size_t>(m)));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      Poly p = mul(mul(variable(m, i), variable(m, j)), g);
      if (i == j) p = add(p, h);
      out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = p;
    }
  return out;
}

inline double oracle_derivative(const std::vector<std::vector<Poly>>& g, int i, int j, const std::vector<int>& q) {
  const auto& p = g[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  const auto it = p.find(q);
  if (it == p.end()) return 0.0;
  double qf = 1.0;
  for (int v : q) qf *= fact(v);
  return it->second * qf;
}

inline Bracket space_form(int m, double kappa) {
  const double R = 1.0 / std::sqrt(std::abs(kappa));
  if (m == 2) return homlab::scale(homlab::surface_bracket(kappa > 0 ? 1 : -1), R);
  return homlab::scale(kappa > 0 ? fixtures::milnor(1, 1, 1) : homlab::hyperbolic_bracket(m), R);
}

}  // namespace space_form_oracle
