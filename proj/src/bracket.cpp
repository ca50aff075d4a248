#include "homlab/bracket.hpp"

#include "homlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

namespace homlab {

namespace {

void check_dims(int q, int m) {
  if (m < 1) throw DomainError("bracket: base dimension m must be positive, got " + std::to_string(m));
  if (q < 0 || q > m * (m - 1) / 2)
    throw DomainError("bracket: isotropy dimension q=" + std::to_string(q) +
                      " outside [0, m(m-1)/2] for m=" + std::to_string(m));
}

}  // namespace

Bracket::Bracket(int q, int m) : q_(q), m_(m) {
  check_dims(q, m);
  const auto n = static_cast<std::size_t>(q + m);
  c_.assign(n * n * n, 0.0);
}

Bracket Bracket::from_entries(int q, int m,
                              const std::vector<std::tuple<int, int, int, double>>& entries) {
  Bracket b(q, m);
  std::set<std::array<int, 3>> seen;
  for (const auto& [i, j, k, v] : entries) {
    const std::array<int, 3> key{std::min(i, j), std::max(i, j), k};
    if (!seen.insert(key).second)
      throw DomainError("bracket: duplicate coefficient entry (" + std::to_string(i) + "," +
                        std::to_string(j) + "," + std::to_string(k) + ")");
    b.set(i, j, k, v);
  }
  return b;
}

void Bracket::set(int i, int j, int k, double v) {
  const int n = dim();
  if (i < 0 || j < 0 || k < 0 || i >= n || j >= n || k >= n)
    throw DomainError("bracket: index out of range");
  if (i == j) {
    if (v != 0.0) throw DomainError("bracket: mu(e_i, e_i) must vanish");
    return;
  }
  c_[index(i, j, k)] = v;
  c_[index(j, i, k)] = -v;
}

Eigen::VectorXd Bracket::apply(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const {
  const int n = dim();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (x[i] == 0.0) continue;
    for (int j = 0; j < n; ++j) {
      const double w = x[i] * y[j];
      if (w == 0.0) continue;
      for (int k = 0; k < n; ++k) out[k] += w * (*this)(i, j, k);
    }
  }
  return out;
}

double Bracket::max_abs() const {
  double r = 0.0;
  for (double v : c_) r = std::max(r, std::abs(v));
  return r;
}

int numerical_rank(const Eigen::MatrixXd& mat, double tol) {
  if (mat.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(mat);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  const double thresh = tol * s[0];
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > thresh) ++r;
  return r;
}

namespace {

// Column z holds every component of mu(e_z, e_x) for x in the base block.
Eigen::MatrixXd isotropy_action_matrix(const Bracket& b) {
  const int q = b.q(), m = b.m(), n = b.dim();
  Eigen::MatrixXd mat(static_cast<Eigen::Index>(m) * n, q);
  for (int z = 0; z < q; ++z)
    for (int x = 0; x < m; ++x)
      for (int k = 0; k < n; ++k) mat(x * n + k, z) = b(z, q + x, k);
  return mat;
}

}  // namespace

ValidityReport validate(const Bracket& b, double tol) {
  if (!(tol > 0.0)) throw DomainError("validate: tolerance must be positive");
  const int q = b.q(), m = b.m(), n = b.dim();
  ValidityReport rep;

  // Jacobi: mu(mu(x,y),z) + mu(mu(y,z),x) + mu(mu(z,x),y) = 0 on basis triples.
  double jac = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = j + 1; k < n; ++k)
        for (int out = 0; out < n; ++out) {
          double s = 0.0;
          for (int l = 0; l < n; ++l) {
            s += b(i, j, l) * b(l, k, out);
            s += b(j, k, l) * b(l, i, out);
            s += b(k, i, l) * b(l, j, out);
          }
          jac = std::max(jac, std::abs(s));
        }
  rep.jacobi_residual = jac;

  const double scale = std::max(1.0, b.max_abs());
  bool sub_ok = true;
  for (int z = 0; z < q; ++z) {
    for (int w = 0; w < q; ++w)
      for (int k = q; k < n; ++k)
        if (std::abs(b(z, w, k)) > tol * scale) sub_ok = false;
    for (int x = q; x < n; ++x)
      for (int k = 0; k < q; ++k)
        if (std::abs(b(z, x, k)) > tol * scale) sub_ok = false;
  }
  rep.h1_ok = sub_ok && jac <= tol * scale * scale;

  bool skew_ok = true;
  for (int z = 0; z < q; ++z)
    for (int x = 0; x < m; ++x)
      for (int y = 0; y < m; ++y)
        if (std::abs(b(z, q + x, q + y) + b(z, q + y, q + x)) > tol * scale) skew_ok = false;
  rep.h2_ok = skew_ok;

  rep.degenerate_subspace_dim = q - numerical_rank(isotropy_action_matrix(b), tol);
  rep.h3_ok = rep.degenerate_subspace_dim == 0;
  return rep;
}

Bracket restrict_bracket(const Bracket& b, double tol) {
  const ValidityReport rep = validate(b, tol);
  if (!rep.h1_ok || !rep.h2_ok)
    throw DomainError("restrict: bracket violates the Jacobi/subalgebra (h1) or skewness (h2) condition");
  const int q = b.q(), m = b.m(), n = b.dim();
  const int kernel = rep.degenerate_subspace_dim;
  if (kernel == 0) return b;

  // Right singular vectors: leading ones span the effective part, trailing
  // ones the kernel. New isotropy basis = [kernel | effective].
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(isotropy_action_matrix(b), Eigen::ComputeFullV);
  const Eigen::MatrixXd& V = svd.matrixV();
  const int eff = q - kernel;
  Eigen::MatrixXd P(q, q);
  P.leftCols(kernel) = V.rightCols(kernel);
  P.rightCols(eff) = V.leftCols(eff);

  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
  g.topLeftCorner(q, q) = P;
  const Eigen::MatrixXd ginv = g.transpose();  // orthogonal

  Bracket out(eff, m);
  for (int i = kernel; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Eigen::VectorXd v = ginv * b.apply(g.col(i), g.col(j));
      for (int k = kernel; k < n; ++k) out.set(i - kernel, j - kernel, k - kernel, v[k]);
    }
  if (!validate(out, tol).h3_ok)
    throw NumericalError("restrict: restricted bracket still has a degenerate isotropy subspace");
  return out;
}

Bracket scale(const Bracket& b, double R) {
  if (!(R > 0.0)) throw DomainError("scale: R must be positive");
  const int q = b.q(), n = b.dim();
  Bracket out = b;
  const double inv = 1.0 / R;
  const double inv2 = inv * inv;
  for (int i = q; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k) out.set(i, j, k, b(i, j, k) * (k < q ? inv2 : inv));
  return out;
}

BracketSplit split(const Bracket& b) {
  const int q = b.q(), m = b.m(), n = b.dim();
  BracketSplit s{Bracket(q, m), q, m, {}, {}};
  s.iso_part.assign(static_cast<std::size_t>(m) * m * q, 0.0);
  s.base_part.assign(static_cast<std::size_t>(m) * m * m, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double v = b(i, j, k);
        if (i < q) {
          s.mixed.set(i, j, k, v);
        } else if (k < q) {
          s.iso_part[(static_cast<std::size_t>(i - q) * m + (j - q)) * q + k] = v;
          s.iso_part[(static_cast<std::size_t>(j - q) * m + (i - q)) * q + k] = -v;
        } else {
          s.base_part[(static_cast<std::size_t>(i - q) * m + (j - q)) * m + (k - q)] = v;
          s.base_part[(static_cast<std::size_t>(j - q) * m + (i - q)) * m + (k - q)] = -v;
        }
      }
  return s;
}

Bracket recompose(const BracketSplit& s) {
  Bracket out = s.mixed;
  const int q = s.q, m = s.m;
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b) {
      for (int z = 0; z < q; ++z) out.set(q + a, q + b, z, s.iso(a, b, z));
      for (int c = 0; c < m; ++c) out.set(q + a, q + b, q + c, s.base(a, b, c));
    }
  return out;
}

Bracket transform(const Bracket& b, const Eigen::MatrixXd& a) {
  const int q = b.q(), m = b.m(), n = b.dim();
  if (a.rows() != m || a.cols() != m) throw DomainError("transform: matrix must be m x m");
  Eigen::MatrixXd g = Eigen::MatrixXd::Identity(n, n);
  g.bottomRightCorner(m, m) = a;
  const Eigen::MatrixXd gt = g.transpose();
  Bracket out(q, m);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const Eigen::VectorXd v = g * b.apply(gt.col(i), gt.col(j));
      for (int k = 0; k < n; ++k) out.set(i, j, k, v[k]);
    }
  return out;
}

Bracket zero_bracket(int q, int m) { return Bracket(q, m); }

Bracket mu_o() {
  // e_0 spans the isotropy; e_1, e_2, e_3 the base.
  return Bracket::from_entries(1, 3, {{0, 1, 2, -2.0}, {0, 2, 1, 2.0}, {1, 2, 0, -2.0}});
}

Bracket mu_o_degenerate_extension() {
  return Bracket::from_entries(2, 3, {{0, 2, 3, -2.0}, {0, 3, 2, 2.0}, {2, 3, 0, -2.0}});
}

Bracket hyperbolic_bracket(int m) {
  Bracket b(0, m);
  for (int i = 1; i < m; ++i) b.set(0, i, i, 1.0);
  return b;
}

Bracket surface_bracket(int eps) {
  // mu(e_0,e_1) = e_2, mu(e_0,e_2) = -e_1, mu(e_1,e_2) = eps e_0
  return Bracket::from_entries(1, 2, {{0, 1, 2, 1.0}, {0, 2, 1, -1.0}, {1, 2, 0, double(eps)}});
}

void to_json(nlohmann::json& j, const Bracket& b) {
  nlohmann::json coeff = nlohmann::json::array();
  const int n = b.dim();
  for (int i = 0; i < n; ++i)
    for (int k = i + 1; k < n; ++k)
      for (int l = 0; l < n; ++l)
        if (b(i, k, l) != 0.0) coeff.push_back({i, k, l, b(i, k, l)});
  j = {{"q", b.q()}, {"m", b.m()}, {"coeff", coeff}};
}

Bracket bracket_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("q") || !j.contains("m"))
    throw DomainError("bracket JSON: expected object with q, m, coeff");
  const int q = j.at("q").get<int>();
  const int m = j.at("m").get<int>();
  std::vector<std::tuple<int, int, int, double>> entries;
  if (j.contains("coeff")) {
    for (const auto& e : j.at("coeff")) {
      if (!e.is_array() || e.size() != 4) throw DomainError("bracket JSON: coeff entries are [i, j, k, value]");
      entries.emplace_back(e[0].get<int>(), e[1].get<int>(), e[2].get<int>(), e[3].get<double>());
    }
  }
  return Bracket::from_entries(q, m, entries);
}

nlohmann::json to_json(const ValidityReport& r) {
  return {{"jacobi_residual", r.jacobi_residual},
          {"h1", r.h1_ok},
          {"h2", r.h2_ok},
          {"h3", r.h3_ok},
          {"degenerate_subspace_dim", r.degenerate_subspace_dim}};
}

}  // namespace homlab
