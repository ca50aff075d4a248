#include "homlab/normal_coords.hpp"

#include "homlab/error.hpp"
#include "homlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <string>

namespace homlab {

namespace {

const std::span<const int> kNone;

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

double factorial(int n) {
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

double multi_factorial(const std::vector<int>& q) {
  double r = 1.0;
  for (int v : q) r *= factorial(v);
  return r;
}

double monomial(const Eigen::VectorXd& y, const std::vector<int>& q) {
  double r = 1.0;
  for (std::size_t i = 0; i < q.size(); ++i) r *= std::pow(y[static_cast<Eigen::Index>(i)], q[i]);
  return r;
}

// Contracts every derivative slot of T with y.
CurvatureDerivative contract_all(const CurvatureDerivative& T, const Eigen::VectorXd& y) {
  CurvatureDerivative cur = T;
  while (cur.order() > 0) {
    CurvatureDerivative next(cur.order() - 1, cur.m());
    for (int x = 0; x < cur.m(); ++x)
      if (y[x] != 0.0) next += y[x] * cur.contract_first(x);
    cur = std::move(next);
  }
  return cur;
}

// Primitive integer vectors with entries in [-N, N], first non-zero entry positive, normalized.
std::vector<Eigen::VectorXd> lattice_nodes(int m, int N) {
  std::vector<Eigen::VectorXd> out;
  std::vector<int> v(static_cast<std::size_t>(m), -N);
  while (true) {
    int g = 0, first = 0;
    for (int x : v) {
      g = std::gcd(g, std::abs(x));
      if (first == 0) first = x;
    }
    if (g == 1 && first > 0) {
      Eigen::VectorXd y(m);
      for (int i = 0; i < m; ++i) y[i] = v[static_cast<std::size_t>(i)];
      out.push_back(y.normalized());
    }
    int pos = m - 1;
    while (pos >= 0 && v[static_cast<std::size_t>(pos)] == N) v[static_cast<std::size_t>(pos--)] = -N;
    if (pos < 0) break;
    ++v[static_cast<std::size_t>(pos)];
  }
  return out;
}

// Nodes making the degree-d monomial basis interpolation matrix full rank.
std::vector<Eigen::VectorXd> interpolation_nodes(int m, int d, unsigned seed) {
  const auto qs = multi_indices(m, d);
  const auto need = static_cast<Eigen::Index>(qs.size());
  auto full_rank = [&](const std::vector<Eigen::VectorXd>& nodes) {
    if (static_cast<Eigen::Index>(nodes.size()) < need) return false;
    Eigen::MatrixXd V(static_cast<Eigen::Index>(nodes.size()), need);
    for (std::size_t r = 0; r < nodes.size(); ++r)
      for (std::size_t c = 0; c < qs.size(); ++c)
        V(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = monomial(nodes[r], qs[c]);
    return numerical_rank(V, 1e-10) == need;
  };
  for (int N = 1; N <= 2 * d + 2; ++N) {
    auto nodes = lattice_nodes(m, N);
    if (full_rank(nodes)) return nodes;
  }
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<Eigen::VectorXd> nodes;
  for (Eigen::Index i = 0; i < 2 * need; ++i) {
    Eigen::VectorXd y(m);
    for (int k = 0; k < m; ++k) y[k] = nd(rng);
    nodes.push_back(y.normalized());
  }
  if (!full_rank(nodes)) throw NumericalError("metric_taylor: interpolation nodes are rank deficient");
  return nodes;
}

}  // namespace

std::vector<Eigen::MatrixXd> radial_curvature_ops(const RiemannTuple& t, const Eigen::VectorXd& y, int K) {
  if (K < 0) throw DomainError("radial_curvature_ops: K must be non-negative");
  if (K > t.s) throw DomainError("radial_curvature_ops: K=" + std::to_string(K) + " exceeds tuple order s=" + std::to_string(t.s));
  const int m = t.m;
  if (y.size() != m) throw DomainError("radial_curvature_ops: direction has wrong dimension");
  std::vector<Eigen::MatrixXd> ops;
  for (int j = 0; j <= K; ++j) {
    const auto R = contract_all(t[j], y);
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      Eigen::MatrixXd Ri = Eigen::MatrixXd::Zero(m, m);
      for (int a = 0; a < m; ++a)
        if (y[a] != 0.0) Ri += y[a] * R.value(kNone, a, i);
      M.col(i) = -Ri * y;
    }
    ops.push_back(M);
  }
  return ops;
}

OperatorPolynomial jacobi_polynomial(int k) {
  if (k < 1) throw DomainError("jacobi_polynomial: k must be at least 1");
  std::vector<OperatorPolynomial> P(static_cast<std::size_t>(k) + 1);
  for (int n = 1; n <= k; ++n) {
    auto& p = P[static_cast<std::size_t>(n)];
    p[{n - 1}] += n;
    for (int i = 1; i <= n - 2; ++i) {
      const auto c = static_cast<long long>(binomial(n, i + 2));
      for (const auto& [word, coeff] : P[static_cast<std::size_t>(i)]) {
        std::vector<int> w{n - 2 - i};
        w.insert(w.end(), word.begin(), word.end());
        p[w] += c * coeff;
      }
    }
  }
  return P[static_cast<std::size_t>(k)];
}

int polynomial_degree(const OperatorPolynomial& p) {
  int d = 0;
  for (const auto& [word, coeff] : p)
    if (coeff != 0) d = std::max(d, static_cast<int>(word.size()));
  return d;
}

std::vector<Eigen::MatrixXd> jacobi_polynomials(const std::vector<Eigen::MatrixXd>& ops, int kmax) {
  if (kmax > static_cast<int>(ops.size())) throw DomainError("jacobi_polynomials: not enough curvature operators");
  if (ops.empty()) return std::vector<Eigen::MatrixXd>(1);
  const auto m = ops.front().rows();
  std::vector<Eigen::MatrixXd> P(static_cast<std::size_t>(std::max(kmax, 0)) + 1, Eigen::MatrixXd::Zero(m, m));
  for (int k = 1; k <= kmax; ++k) {
    Eigen::MatrixXd p = k * ops[static_cast<std::size_t>(k - 1)];
    for (int i = 1; i <= k - 2; ++i)
      p += binomial(k, i + 2) * ops[static_cast<std::size_t>(k - 2 - i)] * P[static_cast<std::size_t>(i)];
    P[static_cast<std::size_t>(k)] = std::move(p);
  }
  return P;
}

std::vector<Eigen::VectorXd> jacobi_jet(const std::vector<Eigen::MatrixXd>& ops, const Eigen::VectorXd& w, int K) {
  if (K < 0) throw DomainError("jacobi_jet: K must be non-negative");
  const auto m = w.size();
  const auto P = jacobi_polynomials(ops, std::max(K - 2, 0));
  std::vector<Eigen::VectorXd> J;
  for (int k = 0; k <= K; ++k) {
    if (k == 1)
      J.push_back(w);
    else if (k == 0 || k == 2)
      J.push_back(Eigen::VectorXd::Zero(m));
    else
      J.push_back(P[static_cast<std::size_t>(k - 2)] * w);
  }
  return J;
}

std::vector<double> f_derivatives(const std::vector<Eigen::VectorXd>& J) {
  if (J.size() < 2) throw DomainError("f_derivatives: need J^{0} and J^{1}");
  const int n_max = static_cast<int>(J.size());
  const Eigen::VectorXd& w = J[1];
  auto jk = [&](int i) -> const Eigen::VectorXd& { return J[static_cast<std::size_t>(i)]; };
  std::vector<double> f{0.0, 0.0, 2.0 * w.squaredNorm()};
  for (int n = 3; n <= n_max; ++n) {
    double v = 0.0;
    if (n % 2 == 1) {
      const int k = (n - 1) / 2;
      v = 2.0 * n * jk(2 * k).dot(w);
      for (int i = 3; i <= k; ++i) v += 2.0 * binomial(n, i) * jk(2 * k + 1 - i).dot(jk(i));
    } else {
      const int k = (n - 2) / 2;
      v = 2.0 * n * jk(2 * k + 1).dot(w);
      for (int i = 3; i <= k; ++i) v += 2.0 * binomial(n, i) * jk(2 * k + 2 - i).dot(jk(i));
      v += binomial(n, k + 1) * jk(k + 1).squaredNorm();
    }
    f.push_back(v);
  }
  f.resize(static_cast<std::size_t>(n_max) + 1);
  return f;
}

RadialJet radial_metric_jet(const RiemannTuple& t, const Eigen::VectorXd& y, const Eigen::VectorXd& w, int K) {
  if (w.size() != t.m) throw DomainError("radial_metric_jet: transverse vector has wrong dimension");
  const auto ops = radial_curvature_ops(t, y, K);
  RadialJet out{y, w, jacobi_jet(ops, w, K + 3), {}};
  out.f_derivs = f_derivatives(out.jacobi_jets);
  return out;
}

std::vector<std::vector<int>> multi_indices(int m, int d) {
  std::vector<std::vector<int>> out;
  std::vector<int> q(static_cast<std::size_t>(m), 0);
  auto rec = [&](auto&& self, int pos, int left) -> void {
    if (pos == m - 1) {
      q[static_cast<std::size_t>(pos)] = left;
      out.push_back(q);
      return;
    }
    for (int v = left; v >= 0; --v) {
      q[static_cast<std::size_t>(pos)] = v;
      self(self, pos + 1, left - v);
    }
  };
  if (m >= 1 && d >= 0) rec(rec, 0, d);
  return out;
}

MetricJet::MetricJet(int m, int order) : m_(m), order_(order) {
  if (m < 1 || order < 0) throw DomainError("MetricJet: invalid shape");
  for (int d = 0; d <= order; ++d)
    for (auto& q : multi_indices(m, d)) {
      lookup_[q] = indices_.size();
      indices_.push_back(q);
    }
  values_.assign(indices_.size(), Eigen::MatrixXd::Zero(m, m));
  values_[0] = Eigen::MatrixXd::Identity(m, m);
}

std::size_t MetricJet::slot(const std::vector<int>& q) const {
  const auto it = lookup_.find(q);
  if (it == lookup_.end()) throw DomainError("MetricJet: multi-index out of range");
  return it->second;
}

double MetricJet::derivative(int i, int j, const std::vector<int>& q) const { return values_[slot(q)](i, j); }
const Eigen::MatrixXd& MetricJet::derivative(const std::vector<int>& q) const { return values_[slot(q)]; }
void MetricJet::set_derivative(const std::vector<int>& q, const Eigen::MatrixXd& value) { values_[slot(q)] = value; }

double MetricJet::max_difference(const MetricJet& other) const {
  if (other.m_ != m_) throw DomainError("MetricJet: dimension mismatch");
  const int K = std::min(order_, other.order_);
  double r = 0.0;
  for (const auto& q : indices_) {
    if (std::accumulate(q.begin(), q.end(), 0) > K) continue;
    r = std::max(r, (derivative(q) - other.derivative(q)).cwiseAbs().maxCoeff());
  }
  return r;
}

MetricJet metric_taylor(const RiemannTuple& t, int K, unsigned seed) {
  if (K < 0) throw DomainError("metric_taylor: K must be non-negative");
  if (K > t.s + 2) throw DomainError("metric_taylor: K=" + std::to_string(K) + " needs s >= K-2, tuple has s=" + std::to_string(t.s));
  const int m = t.m;
  MetricJet jet(m, K);
  if (K < 2) return jet;
  const int kcurv = K - 2;  // highest Rm order needed

  std::vector<Eigen::VectorXd> ws;
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      Eigen::VectorXd w = Eigen::VectorXd::Unit(m, i);
      if (j != i) w += Eigen::VectorXd::Unit(m, j);
      ws.push_back(w);
      pairs.emplace_back(i, j);
    }
  auto diag_index = [&](int i) {
    for (std::size_t p = 0; p < pairs.size(); ++p)
      if (pairs[p].first == i && pairs[p].second == i) return p;
    return std::size_t{0};
  };

  for (int d = 2; d <= K; ++d) {
    const auto qs = multi_indices(m, d);
    const auto nodes = interpolation_nodes(m, d, seed);
    // values[node][pair] = polarized f^{(d+2)}(0) / (d+2)!
    std::vector<std::vector<double>> values(nodes.size());
    parallel_for(nodes.size(), [&](std::size_t n) {
      const auto ops = radial_curvature_ops(t, nodes[n], std::min(kcurv, d - 2));
      const auto P = jacobi_polynomials(ops, d - 1);
      std::vector<double> quad(ws.size());
      for (std::size_t p = 0; p < ws.size(); ++p) {
        std::vector<Eigen::VectorXd> J;
        for (int k = 0; k <= d + 1; ++k) {
          if (k == 1)
            J.push_back(ws[p]);
          else if (k == 0 || k == 2)
            J.push_back(Eigen::VectorXd::Zero(m));
          else
            J.push_back(P[static_cast<std::size_t>(k - 2)] * ws[p]);
        }
        J.push_back(Eigen::VectorXd::Zero(m));  // J^{d+2} only meets J^{0} = 0
        quad[p] = f_derivatives(J)[static_cast<std::size_t>(d + 2)] / factorial(d + 2);
      }
      auto& out = values[n];
      out.resize(ws.size());
      for (std::size_t p = 0; p < ws.size(); ++p) {
        const auto [i, j] = pairs[p];
        out[p] = i == j ? quad[p] : 0.5 * (quad[p] - quad[diag_index(i)] - quad[diag_index(j)]);
      }
    });

    Eigen::MatrixXd V(static_cast<Eigen::Index>(nodes.size()), static_cast<Eigen::Index>(qs.size()));
    Eigen::MatrixXd rhs(static_cast<Eigen::Index>(nodes.size()), static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      for (std::size_t c = 0; c < qs.size(); ++c)
        V(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(c)) = monomial(nodes[n], qs[c]);
      for (std::size_t p = 0; p < pairs.size(); ++p)
        rhs(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p)) = values[n][p];
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V);
    if (qr.rank() != static_cast<Eigen::Index>(qs.size()))
      throw NumericalError("metric_taylor: interpolation matrix is rank deficient");
    const Eigen::MatrixXd coeff = qr.solve(rhs);
    for (std::size_t c = 0; c < qs.size(); ++c) {
      Eigen::MatrixXd g = Eigen::MatrixXd::Zero(m, m);
      const double qf = multi_factorial(qs[c]);
      for (std::size_t p = 0; p < pairs.size(); ++p) {
        const auto [i, j] = pairs[p];
        g(i, j) = g(j, i) = qf * coeff(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(p));
      }
      jet.set_derivative(qs[c], g);
    }
  }
  return jet;
}

LauretGap lauret_gap(const RiemannTuple& t1, const RiemannTuple& t2, int K, const AlignmentBudget& budget) {
  if (t1.m != t2.m) throw DomainError("lauret_gap: dimension mismatch");
  if (K > std::min(t1.s, t2.s) + 2) throw DomainError("lauret_gap: K exceeds min(s1, s2) + 2");
  // align on the common orders
  const int s = std::min(t1.s, t2.s);
  RiemannTuple a1{t1.m, s, {t1.entries.begin(), t1.entries.begin() + s + 1}};
  RiemannTuple a2{t2.m, s, {t2.entries.begin(), t2.entries.begin() + s + 1}};
  LauretGap out;
  const MetricJet j2 = metric_taylor(a2, K);
  out.unaligned = metric_taylor(a1, K).max_difference(j2);
  out.aligner = tuple_distance(a1, a2, {}, budget).aligner;
  out.aligned = metric_taylor(transform(out.aligner, a1), K).max_difference(j2);
  return out;
}

nlohmann::json to_json(const RadialJet& j) {
  nlohmann::json J = nlohmann::json::array();
  for (const auto& v : j.jacobi_jets) J.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  return {{"y", std::vector<double>(j.y.data(), j.y.data() + j.y.size())},
          {"w", std::vector<double>(j.w.data(), j.w.data() + j.w.size())},
          {"jacobi_jets", J},
          {"f_derivs", j.f_derivs}};
}

nlohmann::json to_json(const MetricJet& j) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& q : j.indices())
    for (int a = 0; a < j.m(); ++a)
      for (int b = a; b < j.m(); ++b) entries.push_back({{"i", a}, {"j", b}, {"q", q}, {"value", j.derivative(a, b, q)}});
  return {{"m", j.m()}, {"order", j.order()}, {"entries", entries}};
}

nlohmann::json to_json(const LauretGap& g) {
  nlohmann::json a = nlohmann::json::array();
  for (Eigen::Index i = 0; i < g.aligner.rows(); ++i) {
    std::vector<double> row(static_cast<std::size_t>(g.aligner.cols()));
    for (Eigen::Index c = 0; c < g.aligner.cols(); ++c) row[static_cast<std::size_t>(c)] = g.aligner(i, c);
    a.push_back(row);
  }
  return {{"aligned", g.aligned}, {"unaligned", g.unaligned}, {"aligner", a}};
}

}  // namespace homlab
