#include "homlab/verifier.hpp"

#include "homlab/error.hpp"
#include "homlab/parallel.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace homlab {

namespace {

const std::span<const int> kNone;

void append(std::vector<double>& out, const CurvatureDerivative& T) {
  out.insert(out.end(), T.data().begin(), T.data().end());
}

Eigen::MatrixXd columns_to_matrix(const std::vector<std::vector<double>>& cols) {
  if (cols.empty()) return {};
  Eigen::MatrixXd M(static_cast<Eigen::Index>(cols.front().size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c)
    M.col(static_cast<Eigen::Index>(c)) =
        Eigen::Map<const Eigen::VectorXd>(cols[c].data(), static_cast<Eigen::Index>(cols[c].size()));
  return M;
}

int kernel_dim(const Eigen::MatrixXd& M, double tol) {
  if (M.rows() == 0) return static_cast<int>(M.cols());
  return static_cast<int>(M.cols()) - numerical_rank(M, tol);
}

// Coordinates of A in the E_ij (i < j) basis: A = sum a_p E_p with E_ij(j, i) = 1.
Eigen::VectorXd so_coordinates(const Eigen::MatrixXd& A) {
  const int m = static_cast<int>(A.rows());
  Eigen::VectorXd a(m * (m - 1) / 2);
  int p = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) a[p++] = 0.5 * (A(j, i) - A(i, j));
  return a;
}

Eigen::MatrixXd so_matrix(int m, const Eigen::VectorXd& a) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, m);
  int p = 0;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j, ++p) {
      A(j, i) += a[p];
      A(i, j) -= a[p];
    }
  return A;
}

void require_same_shape(const RiemannTuple& a, const RiemannTuple& b) {
  if (a.m != b.m) throw DomainError("tuple_distance: dimension mismatch");
  if (a.s != b.s || a.entries.size() != b.entries.size())
    throw DomainError("tuple_distance: order mismatch");
}

std::vector<double> resolve_weights(const RiemannTuple& t, const std::vector<double>& weights) {
  const auto n = t.entries.size();
  if (weights.empty()) return std::vector<double>(n, 1.0);
  if (weights.size() != n) throw DomainError("tuple_distance: need one weight per order");
  for (double w : weights)
    if (!(w >= 0.0)) throw DomainError("tuple_distance: weights must be non-negative");
  return weights;
}

struct Aligner {
  const RiemannTuple& t1;
  const RiemannTuple& t2;
  std::vector<double> w;
  std::vector<std::vector<CurvatureDerivative>> jac;  // jac[p][k] = E_p . t1^k
  Eigen::MatrixXd normal;

  Aligner(const RiemannTuple& a, const RiemannTuple& b, std::vector<double> weights)
      : t1(a), t2(b), w(std::move(weights)) {
    const auto basis = so_basis(t1.m);
    const auto p = static_cast<Eigen::Index>(basis.size());
    for (const auto& E : basis) {
      std::vector<CurvatureDerivative> col;
      for (const auto& T : t1.entries) col.push_back(derivation_act(E, T));
      jac.push_back(std::move(col));
    }
    normal = Eigen::MatrixXd::Zero(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
      for (Eigen::Index j = i; j < p; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k)
          s += w[k] * dot(jac[static_cast<std::size_t>(i)][k], jac[static_cast<std::size_t>(j)][k]);
        normal(i, j) = normal(j, i) = s;
      }
  }

  // Residuals t1^k - a^T.t2^k; their weighted squared norm equals F(a).
  std::vector<CurvatureDerivative> residuals(const Eigen::MatrixXd& a) const {
    std::vector<CurvatureDerivative> r;
    const Eigen::MatrixXd at = a.transpose();
    for (std::size_t k = 0; k < w.size(); ++k) r.push_back(t1.entries[k] - transform(at, t2.entries[k]));
    return r;
  }

  double objective(const std::vector<CurvatureDerivative>& r) const {
    double f = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) f += w[k] * dot(r[k], r[k]);
    return f;
  }

  // Half the gradient of F in the chart xi -> a exp(xi).
  Eigen::VectorXd half_gradient(const std::vector<CurvatureDerivative>& r) const {
    Eigen::VectorXd g(static_cast<Eigen::Index>(jac.size()));
    for (std::size_t p = 0; p < jac.size(); ++p) {
      double s = 0.0;
      for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * dot(jac[p][k], r[k]);
      g[static_cast<Eigen::Index>(p)] = s;
    }
    return g;
  }
};

struct StartResult {
  Eigen::MatrixXd a;
  double f = std::numeric_limits<double>::infinity();
  double damping = 1e-3;
  bool converged = false;
  bool stalled = false;
  int iterations = 0;
};

struct Descent {
  const Aligner& al;
  const AlignmentBudget& budget;
  double fscale;

  StartResult start(Eigen::MatrixXd a) const {
    StartResult out;
    out.a = std::move(a);
    out.f = al.objective(al.residuals(out.a));
    return out;
  }

  // Levenberg-Marquardt steps in the chart xi -> a exp(xi) with Armijo backtracking.
  void run(StartResult& st, int iterations) const {
    const int m = al.t1.m;
    const auto p = al.normal.rows();
    const double unit = std::max(al.normal.trace() / static_cast<double>(std::max<Eigen::Index>(p, 1)), 1e-300);
    const double gtol = budget.gradient_tolerance * std::max(1.0, fscale);
    auto r = al.residuals(st.a);
    for (int it = 0; it < iterations && !st.converged; ++it) {
      const Eigen::VectorXd g = al.half_gradient(r);
      if (2.0 * g.norm() <= gtol || st.f == 0.0) {
        st.converged = true;
        break;
      }
      ++st.iterations;
      const Eigen::MatrixXd lhs = al.normal + st.damping * unit * Eigen::MatrixXd::Identity(p, p);
      const Eigen::VectorXd xi = -lhs.ldlt().solve(g);
      const double slope = 2.0 * xi.dot(g);  // directional derivative, negative
      if (!(slope < 0.0)) break;
      const Eigen::MatrixXd Xi = so_matrix(m, xi);
      double step = 1.0;
      bool moved = false;
      for (int ls = 0; ls < 40; ++ls, step *= 0.5) {
        Eigen::MatrixXd trial = st.a * (step * Xi).exp();
        auto rt = al.residuals(trial);
        const double ft = al.objective(rt);
        if (ft <= st.f + 1e-4 * step * slope) {
          st.a = std::move(trial);
          r = std::move(rt);
          st.f = ft;
          moved = true;
          break;
        }
      }
      st.damping = step == 1.0 ? std::max(st.damping * 0.1, 1e-12) : std::min(st.damping * 10.0, 1e6);
      if (!moved) {
        // no further decrease representable in floating point
        st.converged = 2.0 * g.norm() <= 1e-6 * std::max(1.0, fscale);
        st.stalled = true;
        break;
      }
      if (st.iterations % 10 == 0) {
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(st.a, Eigen::ComputeFullU | Eigen::ComputeFullV);
        st.a = svd.matrixU() * svd.matrixV().transpose();
        r = al.residuals(st.a);
        st.f = al.objective(r);
      }
    }
  }
};

}  // namespace

// ---------------------------------------------------------------------------
// (R1)

bool R1Report::passes(double tol) const {
  return std::all_of(residuals.begin(), residuals.end(), [tol](double r) { return r <= tol; });
}

R1Report check_r1(const RiemannTuple& t) {
  if (t.entries.empty()) throw DomainError("check_r1: empty tuple");
  const int m = t.m;
  R1Report rep;
  const auto& R0 = t[0];
  const double mag0 = std::max(1.0, R0.max_abs());
  double r_i = 0.0, r_ii = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d) {
          r_i = std::max(r_i, std::abs(R0(kNone, a, b, d, c) - R0(kNone, c, d, b, a)));
          r_ii = std::max(r_ii, std::abs(R0(kNone, a, b, d, c) + R0(kNone, b, c, d, a) + R0(kNone, c, a, d, b)));
        }
  rep.residuals[0] = r_i / mag0;
  rep.residuals[1] = r_ii / mag0;

  if (t.entries.size() > 1) {
    const auto& R1 = t[1];
    const double mag1 = std::max(1.0, R1.max_abs());
    double r_iii = 0.0, r_iv = 0.0, r_v = 0.0;
    for (int x = 0; x < m; ++x) {
      const int xs[] = {x};
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b)
          for (int c = 0; c < m; ++c)
            for (int d = 0; d < m; ++d) {
              r_iii = std::max(r_iii, std::abs(R1(xs, a, b, d, c) - R1(xs, c, d, b, a)));
              r_iv = std::max(r_iv, std::abs(R1(xs, a, b, d, c) + R1(xs, b, c, d, a) + R1(xs, c, a, d, b)));
              const int as[] = {a}, bs[] = {b};
              r_v = std::max(r_v, std::abs(R1(xs, a, b, d, c) + R1(as, b, x, d, c) + R1(bs, x, a, d, c)));
            }
    }
    rep.residuals[2] = r_iii / mag1;
    rep.residuals[3] = r_iv / mag1;
    rep.residuals[4] = r_v / mag1;
  }

  double r_vi = 0.0;
  for (int k = 0; k + 2 <= t.s && static_cast<std::size_t>(k + 2) < t.entries.size(); ++k) {
    const auto& top = t[k + 2];
    const auto swapped = top.swap_first_two();
    const double mag = std::max({1.0, top.max_abs(), R0.max_abs() * t[k].max_abs()});
    double res = 0.0;
    for (int x1 = 0; x1 < m; ++x1)
      for (int x2 = 0; x2 < m; ++x2) {
        const auto lhs = top.contract_first(x1).contract_first(x2) - swapped.contract_first(x1).contract_first(x2);
        const auto act = derivation_act(R0.value(kNone, x1, x2), t[k]);
        res = std::max(res, (lhs + act).max_abs());
      }
    r_vi = std::max(r_vi, res / mag);
  }
  rep.residuals[5] = r_vi;
  return rep;
}

// ---------------------------------------------------------------------------
// (R2), Singer invariant

Eigen::MatrixXd alpha_matrix(const RiemannTuple& t, int k) {
  if (k < 0 || k > t.s) throw DomainError("alpha_matrix: order out of range");
  std::vector<std::vector<double>> cols;
  for (const auto& E : so_basis(t.m)) {
    std::vector<double> col;
    for (int j = 0; j <= k; ++j) append(col, derivation_act(E, t[j]));
    cols.push_back(std::move(col));
  }
  return columns_to_matrix(cols);
}

Eigen::MatrixXd beta_matrix(const RiemannTuple& t, int k) {
  if (k < 1 || k > t.s) throw DomainError("beta_matrix: order out of range");
  std::vector<std::vector<double>> cols;
  for (int x = 0; x < t.m; ++x) {
    std::vector<double> col;
    for (int j = 1; j <= k; ++j) append(col, t[j].contract_first(x));
    cols.push_back(std::move(col));
  }
  return columns_to_matrix(cols);
}

Eigen::MatrixXd null_space(const Eigen::MatrixXd& mat, double tol) {
  const auto n = mat.cols();
  if (mat.rows() == 0 || mat.size() == 0) return Eigen::MatrixXd::Identity(n, n);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(mat, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double thresh = s.size() && s[0] > 0.0 ? tol * s[0] : std::numeric_limits<double>::infinity();
  Eigen::Index rank = 0;
  while (rank < s.size() && s[rank] > thresh) ++rank;
  return svd.matrixV().rightCols(n - rank);
}

bool R2Report::inclusion_ok() const {
  return std::all_of(inclusions.begin(), inclusions.end(), [](const auto& c) { return c.ok; });
}

bool R2Report::kernel_ok() const {
  return std::all_of(kernels.begin(), kernels.end(), [](const auto& c) { return c.ok; });
}

R2Report check_r2(const RiemannTuple& t, double tol) {
  const int im = singer_bound(t.m);
  R2Report rep;
  std::vector<int> dims(static_cast<std::size_t>(t.s) + 1, -1);
  auto dim_of = [&](int k) {
    auto& d = dims[static_cast<std::size_t>(k)];
    if (d < 0) d = kernel_dim(alpha_matrix(t, k), tol);
    return d;
  };
  for (int k = im + 2; k <= t.s; ++k) {
    const Eigen::MatrixXd A = alpha_matrix(t, k - 1);
    const Eigen::MatrixXd B = beta_matrix(t, k);
    InclusionCheck c{k, 0.0, false};
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU);
    const auto& s = svd.singularValues();
    Eigen::Index rank = 0;
    if (s.size() && s[0] > 0.0)
      while (rank < s.size() && s[rank] > tol * s[0]) ++rank;
    const Eigen::MatrixXd U = svd.matrixU().leftCols(rank);
    double scale = 1.0;
    for (Eigen::Index x = 0; x < B.cols(); ++x) scale = std::max(scale, B.col(x).norm());
    for (Eigen::Index x = 0; x < B.cols(); ++x) {
      const Eigen::VectorXd b = B.col(x);
      const Eigen::VectorXd res = b - U * (U.transpose() * b);
      c.residual = std::max(c.residual, res.norm() / scale);
    }
    c.ok = c.residual <= tol;
    rep.inclusions.push_back(c);
  }
  for (int k = im; k + 1 <= t.s; ++k) {
    KernelCheck c{k, dim_of(k), dim_of(k + 1), false};
    c.ok = c.dim_k == c.dim_k_plus_1;
    rep.kernels.push_back(c);
  }
  return rep;
}

SingerReport singer_invariant(const RiemannTuple& t, double tol) {
  SingerReport rep;
  for (int k = 0; k <= t.s - 1; ++k) rep.kernels.push_back(kernel_dim(alpha_matrix(t, k), tol));
  for (std::size_t k = 0; k + 1 < rep.kernels.size(); ++k)
    if (rep.kernels[k] == rep.kernels[k + 1]) {
      rep.singer_k = static_cast<int>(k);
      rep.stabilized = true;
      break;
    }
  return rep;
}

// ---------------------------------------------------------------------------
// Nomizu algebra

KillingGenerator nomizu_bracket(const CurvatureDerivative& R0, const KillingGenerator& x,
                                const KillingGenerator& y) {
  const int m = R0.m();
  Eigen::MatrixXd rm = Eigen::MatrixXd::Zero(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const double w = x.v[a] * y.v[b];
      if (w != 0.0) rm += w * R0.value(kNone, a, b);
    }
  return {x.A * y.v - y.A * x.v, x.A * y.A - y.A * x.A + rm};
}

namespace {

// Rows of v -| R^{k+1} + A.R^k = 0 for orders [0, kmax], each block scaled to unit magnitude.
Eigen::MatrixXd killing_system(const RiemannTuple& t, int kmax) {
  const int m = t.m;
  const auto basis = so_basis(m);
  const auto nv = static_cast<std::size_t>(m), na = basis.size();
  std::vector<std::vector<double>> cols(nv + na);
  for (int k = 0; k <= kmax; ++k) {
    const double scale = std::max(t[k].norm(), t[k + 1].norm());
    const double inv = scale > 0.0 ? 1.0 / scale : 0.0;
    for (std::size_t x = 0; x < nv; ++x) {
      auto T = t[k + 1].contract_first(static_cast<int>(x));
      T *= inv;
      append(cols[x], T);
    }
    for (std::size_t p = 0; p < na; ++p) {
      auto T = derivation_act(basis[p], t[k]);
      T *= inv;
      append(cols[nv + p], T);
    }
  }
  return columns_to_matrix(cols);
}

}  // namespace

NomizuBasis nomizu_algebra(const RiemannTuple& t, double tol) {
  if (t.s < 2) throw DomainError("nomizu_algebra: need s >= 2");
  const int m = t.m;
  const auto nv = static_cast<Eigen::Index>(m);
  NomizuBasis out;
  const Eigen::MatrixXd full = killing_system(t, t.s - 1);
  const Eigen::MatrixXd N = null_space(full, tol);
  out.dim = static_cast<int>(N.cols());
  out.dim_truncated = static_cast<int>(null_space(killing_system(t, t.s - 2), tol).cols());
  out.stabilized = out.dim == out.dim_truncated;

  double sigma_max = 0.0;
  if (full.size()) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(full);
    sigma_max = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  }
  for (Eigen::Index c = 0; c < N.cols(); ++c) {
    const Eigen::VectorXd n = N.col(c);
    out.generators.push_back({n.head(nv), so_matrix(m, n.tail(n.size() - nv))});
    if (sigma_max > 0.0) out.system_residual = std::max(out.system_residual, (full * n).norm() / sigma_max);
  }

  for (std::size_t i = 0; i < out.generators.size(); ++i)
    for (std::size_t j = i + 1; j < out.generators.size(); ++j) {
      const auto br = nomizu_bracket(t[0], out.generators[i], out.generators[j]);
      Eigen::VectorXd x(N.rows());
      x << br.v, so_coordinates(br.A);
      const Eigen::VectorXd res = x - N * (N.transpose() * x);
      out.closure_residual = std::max(out.closure_residual, res.norm() / std::max(1.0, x.norm()));
    }
  return out;
}

// ---------------------------------------------------------------------------
// Orbit distance

std::vector<Eigen::MatrixXd> alignment_starts(int m, int random_starts, unsigned seed) {
  std::vector<Eigen::MatrixXd> out;
  if (m <= 3) {
    std::vector<int> perm(static_cast<std::size_t>(m));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      for (int signs = 0; signs < (1 << m); ++signs) {
        Eigen::MatrixXd P = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) P(perm[static_cast<std::size_t>(i)], i) = (signs >> i) & 1 ? -1.0 : 1.0;
        out.push_back(P);
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
  }
  out.push_back(Eigen::MatrixXd::Identity(m, m));
  out.push_back(-Eigen::MatrixXd::Identity(m, m));
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  for (int i = 0; i < random_starts; ++i) {
    Eigen::MatrixXd g(m, m);
    for (int r = 0; r < m; ++r)
      for (int c = 0; c < m; ++c) g(r, c) = nd(rng);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    if ((q.determinant() > 0) != (i % 2 == 0)) q.col(0) *= -1.0;
    out.push_back(q);
  }
  return out;
}

double alignment_objective(const RiemannTuple& t1, const RiemannTuple& t2, const std::vector<double>& weights,
                           const Eigen::MatrixXd& a) {
  require_same_shape(t1, t2);
  const auto w = resolve_weights(t1, weights);
  double f = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const auto d = transform(a, t1.entries[k]) - t2.entries[k];
    f += w[k] * dot(d, d);
  }
  return f;
}

Eigen::VectorXd alignment_gradient(const RiemannTuple& t1, const RiemannTuple& t2,
                                   const std::vector<double>& weights, const Eigen::MatrixXd& a) {
  require_same_shape(t1, t2);
  const Aligner al(t1, t2, resolve_weights(t1, weights));
  return 2.0 * al.half_gradient(al.residuals(a));
}

TupleDistance tuple_distance(const RiemannTuple& t1, const RiemannTuple& t2, const std::vector<double>& weights,
                             const AlignmentBudget& budget) {
  require_same_shape(t1, t2);
  if (budget.max_iterations < 0) throw DomainError("tuple_distance: negative iteration budget");
  const Aligner al(t1, t2, resolve_weights(t1, weights));
  double fscale = 0.0;
  for (std::size_t k = 0; k < al.w.size(); ++k)
    fscale += al.w[k] * (dot(t1.entries[k], t1.entries[k]) + dot(t2.entries[k], t2.entries[k]));

  // Screen every start briefly, then spend the remaining budget on the most promising ones.
  const Descent descent{al, budget, fscale};
  const auto starts = alignment_starts(t1.m, budget.random_starts, budget.seed);
  std::vector<StartResult> results(starts.size());
  const int screen = std::min(budget.screening_iterations, budget.max_iterations);
  parallel_for(starts.size(), [&](std::size_t i) {
    results[i] = descent.start(starts[i]);
    descent.run(results[i], screen);
  });
  std::vector<std::size_t> order(results.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto i, auto j) { return results[i].f < results[j].f; });
  order.resize(std::min(order.size(), static_cast<std::size_t>(std::max(1, budget.refined_starts))));
  parallel_for(order.size(), [&](std::size_t i) {
    auto& st = results[order[i]];
    if (!st.stalled) descent.run(st, budget.max_iterations - st.iterations);
  });

  TupleDistance out;
  std::size_t best = order.front();
  for (std::size_t i = 0; i < results.size(); ++i) {
    out.iterations += results[i].iterations;
    if (results[i].f < results[best].f) best = i;
  }
  out.aligner = results[best].a;
  out.converged = results[best].converged;
  for (std::size_t k = 0; k < al.w.size(); ++k) {
    const double d = (transform(out.aligner, t1.entries[k]) - t2.entries[k]).norm();
    out.per_order.push_back(d);
    out.distance += al.w[k] * d;
  }
  return out;
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const R1Report& r) {
  return {{"residuals", r.residuals},
          {"labels", {"pair_symmetry_R0", "bianchi_R0", "pair_symmetry_R1", "bianchi_R1", "second_bianchi_R1",
                      "ricci_identity"}}};
}

nlohmann::json to_json(const R2Report& r) {
  nlohmann::json inc = nlohmann::json::array(), ker = nlohmann::json::array();
  for (const auto& c : r.inclusions) inc.push_back({{"k", c.k}, {"residual", c.residual}, {"ok", c.ok}});
  for (const auto& c : r.kernels)
    ker.push_back({{"k", c.k}, {"dim_ker_k", c.dim_k}, {"dim_ker_k_plus_1", c.dim_k_plus_1}, {"ok", c.ok}});
  return {{"inclusions", inc}, {"kernels", ker}, {"inclusion_ok", r.inclusion_ok()}, {"kernel_ok", r.kernel_ok()}};
}

nlohmann::json to_json(const SingerReport& r) {
  return {{"kernels", r.kernels},
          {"singer_k", r.stabilized ? nlohmann::json(r.singer_k) : nlohmann::json(nullptr)},
          {"stabilized", r.stabilized}};
}

nlohmann::json to_json(const NomizuBasis& r) {
  nlohmann::json gens = nlohmann::json::array();
  for (const auto& g : r.generators) {
    std::vector<double> v(g.v.data(), g.v.data() + g.v.size());
    const Eigen::VectorXd a = so_coordinates(g.A);
    gens.push_back({{"v", v}, {"A", std::vector<double>(a.data(), a.data() + a.size())}});
  }
  return {{"dim", r.dim},
          {"dim_truncated", r.dim_truncated},
          {"stabilized", r.stabilized},
          {"system_residual", r.system_residual},
          {"closure_residual", r.closure_residual},
          {"generators", gens}};
}

nlohmann::json to_json(const TupleDistance& r) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < r.aligner.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(r.aligner.cols()));
    for (Eigen::Index j = 0; j < r.aligner.cols(); ++j) row[static_cast<std::size_t>(j)] = r.aligner(i, j);
    a.push_back(row);
  }
  return {{"distance", r.distance},
          {"per_order", r.per_order},
          {"aligner", a},
          {"converged", r.converged},
          {"iterations", r.iterations}};
}

}  // namespace homlab
