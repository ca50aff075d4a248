#include "homlab/curvature.hpp"

#include "homlab/error.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace homlab {

namespace {

std::size_t ipow(int base, int exp) {
  std::size_t r = 1;
  for (int i = 0; i < exp; ++i) r *= static_cast<std::size_t>(base);
  return r;
}

void check_capacity(int order, int m, const EngineLimits& limits) {
  if (m > limits.max_m)
    throw CapacityError("curvature engine: m=" + std::to_string(m) + " exceeds cap " +
                        std::to_string(limits.max_m));
  // m^(order+4) without overflow
  double entries = std::pow(static_cast<double>(m), order + 4);
  if (entries > static_cast<double>(limits.max_entries))
    throw CapacityError("curvature engine: order " + std::to_string(order) + " in dimension " +
                        std::to_string(m) + " needs " + std::to_string(entries) +
                        " entries, cap is " + std::to_string(limits.max_entries));
}

}  // namespace

Eigen::MatrixXd so_basis(int m, int i, int j) {
  Eigen::MatrixXd E = Eigen::MatrixXd::Zero(m, m);
  E(j, i) = 1.0;
  E(i, j) = -1.0;
  return E;
}

std::vector<Eigen::MatrixXd> so_basis(int m) {
  std::vector<Eigen::MatrixXd> out;
  for (int i = 0; i < m; ++i)
    for (int j = i + 1; j < m; ++j) out.push_back(so_basis(m, i, j));
  return out;
}

double ConnectionOperator::max_operator_norm() const {
  double r = 0.0;
  for (const auto& s : S) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(s);
    r = std::max(r, svd.singularValues().size() ? svd.singularValues()[0] : 0.0);
  }
  return r;
}

// ---------------------------------------------------------------------------
// CurvatureDerivative

CurvatureDerivative::CurvatureDerivative(int order, int m) : order_(order), m_(m) {
  if (order < 0) throw DomainError("curvature derivative: negative order");
  if (m < 1) throw DomainError("curvature derivative: m must be positive");
  data_.assign(ipow(m, order + 4), 0.0);
}

std::size_t CurvatureDerivative::block_size() const { return ipow(m_, 4); }

std::size_t CurvatureDerivative::offset(std::span<const int> derivs, int a, int b, int i,
                                        int j) const {
  if (static_cast<int>(derivs.size()) != order_)
    throw DomainError("curvature derivative: wrong number of derivative indices");
  std::size_t off = 0;
  const auto m = static_cast<std::size_t>(m_);
  for (int x : derivs) off = off * m + static_cast<std::size_t>(x);
  off = off * m + static_cast<std::size_t>(a);
  off = off * m + static_cast<std::size_t>(b);
  off = off * m + static_cast<std::size_t>(i);
  off = off * m + static_cast<std::size_t>(j);
  return off;
}

double CurvatureDerivative::operator()(std::span<const int> derivs, int a, int b, int i,
                                       int j) const {
  return data_[offset(derivs, a, b, i, j)];
}

Eigen::MatrixXd CurvatureDerivative::value(std::span<const int> derivs, int a, int b) const {
  Eigen::MatrixXd v(m_, m_);
  const std::size_t base = offset(derivs, a, b, 0, 0);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j) v(i, j) = data_[base + static_cast<std::size_t>(i * m_ + j)];
  return v;
}

void CurvatureDerivative::set_value(std::span<const int> derivs, int a, int b,
                                    const Eigen::MatrixXd& v) {
  const std::size_t ab = offset(derivs, a, b, 0, 0);
  const std::size_t ba = offset(derivs, b, a, 0, 0);
  for (int i = 0; i < m_; ++i)
    for (int j = 0; j < m_; ++j) {
      const auto e = static_cast<std::size_t>(i * m_ + j);
      data_[ab + e] = v(i, j);
      data_[ba + e] = (a == b) ? 0.0 : -v(i, j);
    }
}

CurvatureDerivative CurvatureDerivative::contract_first(int x) const {
  if (order_ < 1) throw DomainError("contract_first: order-0 tensor has no derivative slot");
  CurvatureDerivative out(order_ - 1, m_);
  const std::size_t n = out.size();
  std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(x) * n), n,
              out.data_.begin());
  return out;
}

CurvatureDerivative CurvatureDerivative::swap_first_two() const {
  if (order_ < 2) throw DomainError("swap_first_two: order must be at least 2");
  CurvatureDerivative out(order_, m_);
  const std::size_t tail = ipow(m_, order_ + 2);
  for (int x = 0; x < m_; ++x)
    for (int y = 0; y < m_; ++y) {
      const auto src = (static_cast<std::size_t>(x) * m_ + y) * tail;
      const auto dst = (static_cast<std::size_t>(y) * m_ + x) * tail;
      std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(src), tail,
                  out.data_.begin() + static_cast<std::ptrdiff_t>(dst));
    }
  return out;
}

double CurvatureDerivative::norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double CurvatureDerivative::max_abs() const {
  double r = 0.0;
  for (double v : data_) r = std::max(r, std::abs(v));
  return r;
}

void CurvatureDerivative::antisymmetrize() {
  const auto m = static_cast<std::size_t>(m_);
  const std::size_t blk = m * m * m * m;
  const std::size_t nblk = data_.size() / blk;
  for (std::size_t d = 0; d < nblk; ++d) {
    double* p = data_.data() + d * blk;
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b)
        for (std::size_t i = 0; i < m; ++i)
          for (std::size_t j = 0; j < m; ++j) {
            double& v0 = p[((a * m + b) * m + i) * m + j];
            double& v1 = p[((b * m + a) * m + i) * m + j];
            double& v2 = p[((a * m + b) * m + j) * m + i];
            double& v3 = p[((b * m + a) * m + j) * m + i];
            const double s = 0.25 * (v0 - v1 - v2 + v3);
            v0 = s;
            v1 = -s;
            v2 = -s;
            v3 = s;
          }
  }
}

CurvatureDerivative& CurvatureDerivative::operator+=(const CurvatureDerivative& o) {
  if (o.order_ != order_ || o.m_ != m_) throw DomainError("curvature derivative: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

CurvatureDerivative& CurvatureDerivative::operator-=(const CurvatureDerivative& o) {
  if (o.order_ != order_ || o.m_ != m_) throw DomainError("curvature derivative: shape mismatch");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
  return *this;
}

CurvatureDerivative& CurvatureDerivative::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

CurvatureDerivative operator+(CurvatureDerivative a, const CurvatureDerivative& b) { return a += b; }
CurvatureDerivative operator-(CurvatureDerivative a, const CurvatureDerivative& b) { return a -= b; }
CurvatureDerivative operator*(double s, CurvatureDerivative a) { return a *= s; }

double dot(const CurvatureDerivative& a, const CurvatureDerivative& b) {
  if (a.order() != b.order() || a.m() != b.m()) throw DomainError("dot: shape mismatch");
  double s = 0.0;
  const auto x = a.data();
  const auto y = b.data();
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

int singer_bound(int m) {
  if (m < 1) throw DomainError("singer_bound: m must be positive");
  if (m <= 2) return 0;
  if (m <= 4) return 1;
  return (3 * m + 1) / 2 - 1;
}

// ---------------------------------------------------------------------------
// Tensor-algebra operations

CurvatureDerivative derivation_act(const Eigen::MatrixXd& A, const CurvatureDerivative& P) {
  const int m = P.m();
  if (A.rows() != m || A.cols() != m) throw DomainError("derivation_act: dimension mismatch");
  const int slots = P.order() + 4;
  std::vector<std::size_t> stride(static_cast<std::size_t>(slots));
  for (int s = 0; s < slots; ++s) stride[static_cast<std::size_t>(s)] = ipow(m, slots - 1 - s);
  const int row_slot = slots - 2;  // the contravariant index i of the value

  std::vector<double> a(static_cast<std::size_t>(m * m));
  for (int r = 0; r < m; ++r)
    for (int c = 0; c < m; ++c) a[static_cast<std::size_t>(r * m + c)] = A(r, c);

  CurvatureDerivative out(P.order(), m);
  const auto src = P.data();
  auto dst = out.data();
  std::vector<int> digit(static_cast<std::size_t>(slots), 0);
  for (std::size_t idx = 0; idx < src.size(); ++idx) {
    double acc = 0.0;
    for (int s = 0; s < slots; ++s) {
      const int x = digit[static_cast<std::size_t>(s)];
      const std::size_t st = stride[static_cast<std::size_t>(s)];
      const std::size_t base = idx - static_cast<std::size_t>(x) * st;
      if (s == row_slot) {
        for (int l = 0; l < m; ++l) acc += a[static_cast<std::size_t>(x * m + l)] * src[base + l * st];
      } else {
        for (int l = 0; l < m; ++l) acc -= a[static_cast<std::size_t>(l * m + x)] * src[base + l * st];
      }
    }
    dst[idx] = acc;
    for (int s = slots - 1; s >= 0; --s) {
      if (++digit[static_cast<std::size_t>(s)] < m) break;
      digit[static_cast<std::size_t>(s)] = 0;
    }
  }
  return out;
}

CurvatureDerivative transform(const Eigen::MatrixXd& a, const CurvatureDerivative& T) {
  const int m = T.m();
  if (a.rows() != m || a.cols() != m) throw DomainError("transform: dimension mismatch");
  const int slots = T.order() + 4;
  // Orthogonal a acts on every slot by the same matrix; apply it axis by axis.
  std::vector<double> cur(T.data().begin(), T.data().end());
  std::vector<double> next(cur.size());
  for (int s = 0; s < slots; ++s) {
    const std::size_t st = ipow(m, slots - 1 - s);
    const std::size_t outer = cur.size() / (st * static_cast<std::size_t>(m));
    for (std::size_t o = 0; o < outer; ++o)
      for (std::size_t in = 0; in < st; ++in) {
        const std::size_t base = o * st * static_cast<std::size_t>(m) + in;
        for (int r = 0; r < m; ++r) {
          double acc = 0.0;
          for (int c = 0; c < m; ++c) acc += a(r, c) * cur[base + static_cast<std::size_t>(c) * st];
          next[base + static_cast<std::size_t>(r) * st] = acc;
        }
      }
    std::swap(cur, next);
  }
  CurvatureDerivative out(T.order(), m);
  std::copy(cur.begin(), cur.end(), out.data().begin());
  return out;
}

RiemannTuple transform(const Eigen::MatrixXd& a, const RiemannTuple& t) {
  RiemannTuple out{t.m, t.s, {}};
  out.entries.reserve(t.entries.size());
  for (const auto& e : t.entries) out.entries.push_back(transform(a, e));
  return out;
}

// ---------------------------------------------------------------------------
// Curvature of a bracket

ConnectionOperator nomizu_connection(const Bracket& b) {
  const int m = b.m();
  const BracketSplit sp = split(b);
  ConnectionOperator op{m, {}};
  op.S.assign(static_cast<std::size_t>(m), Eigen::MatrixXd::Zero(m, m));
  // -2 <S(X)Y, Z> = <mu_m(X,Y),Z> + <mu_m(Z,X),Y> + <mu_m(Z,Y),X>
  for (int x = 0; x < m; ++x)
    for (int y = 0; y < m; ++y)
      for (int z = 0; z < m; ++z)
        op.S[static_cast<std::size_t>(x)](z, y) =
            -0.5 * (sp.base(x, y, z) + sp.base(z, x, y) + sp.base(z, y, x));
  for (auto& s : op.S) s = 0.5 * (s - s.transpose()).eval();
  return op;
}

CurvatureDerivative curvature_base(const Bracket& b, double tol) {
  const int q = b.q(), m = b.m();
  const BracketSplit sp = split(b);
  const ConnectionOperator S = nomizu_connection(b);

  // ad of each isotropy generator on the base block
  std::vector<Eigen::MatrixXd> ad(static_cast<std::size_t>(q), Eigen::MatrixXd::Zero(m, m));
  for (int z = 0; z < q; ++z) {
    auto& A = ad[static_cast<std::size_t>(z)];
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) A(i, j) = b(z, q + j, q + i);
    const double skew_err = (A + A.transpose()).cwiseAbs().maxCoeff();
    if (skew_err > tol * std::max(1.0, A.cwiseAbs().maxCoeff()))
      throw DomainError("curvature_base: isotropy does not act skew-symmetrically on the base (h2 fails)");
  }

  CurvatureDerivative R(0, m);
  const std::span<const int> none;
  for (int a = 0; a < m; ++a)
    for (int c = a + 1; c < m; ++c) {
      Eigen::MatrixXd v = Eigen::MatrixXd::Zero(m, m);
      for (int z = 0; z < q; ++z) v += sp.iso(a, c, z) * ad[static_cast<std::size_t>(z)];
      const auto& Sa = S.S[static_cast<std::size_t>(a)];
      const auto& Sc = S.S[static_cast<std::size_t>(c)];
      v -= Sa * Sc - Sc * Sa;
      for (int d = 0; d < m; ++d) v -= sp.base(a, c, d) * S.S[static_cast<std::size_t>(d)];
      R.set_value(none, a, c, v);
    }
  R.antisymmetrize();
  return R;
}

CurvatureDerivative curvature_derive(const ConnectionOperator& S, const CurvatureDerivative& prev,
                                     const EngineLimits& limits) {
  const int m = prev.m();
  if (S.m != m) throw DomainError("curvature_derive: dimension mismatch");
  check_capacity(prev.order() + 1, m, limits);
  CurvatureDerivative out(prev.order() + 1, m);
  const std::size_t n = prev.size();
  auto dst = out.data();
  for (int x = 0; x < m; ++x) {
    const CurvatureDerivative d = derivation_act(S.S[static_cast<std::size_t>(x)], prev);
    const auto src = d.data();
    for (std::size_t i = 0; i < n; ++i) dst[static_cast<std::size_t>(x) * n + i] = -src[i];
  }
  out.antisymmetrize();
  return out;
}

CurvatureDerivative curvature_derive(const Bracket& b, const CurvatureDerivative& prev,
                                     const EngineLimits& limits) {
  return curvature_derive(nomizu_connection(b), prev, limits);
}

std::vector<CurvatureDerivative> curvature_tower(const Bracket& b, int k_max,
                                                 const EngineLimits& limits) {
  if (k_max < 0) throw DomainError("curvature_tower: k_max must be non-negative");
  check_capacity(k_max, b.m(), limits);
  const ConnectionOperator S = nomizu_connection(b);
  std::vector<CurvatureDerivative> out;
  out.reserve(static_cast<std::size_t>(k_max) + 1);
  out.push_back(curvature_base(b));
  for (int k = 1; k <= k_max; ++k) out.push_back(curvature_derive(S, out.back(), limits));
  return out;
}

RiemannTuple curvature_tuple(const Bracket& b, int s, const EngineLimits& limits) {
  const int need = singer_bound(b.m()) + 2;
  if (s < need)
    throw DomainError("curvature_tuple: s=" + std::to_string(s) +
                      " is too short; a tuple determining the space needs s >= i(m)+2 = " +
                      std::to_string(need));
  return RiemannTuple{b.m(), s, curvature_tower(b, s, limits)};
}

Eigen::MatrixXd lambda2_operator(const CurvatureDerivative& R0) {
  if (R0.order() != 0) throw DomainError("lambda2_operator: expects an order-0 tensor");
  const int m = R0.m();
  const int p = m * (m - 1) / 2;
  Eigen::MatrixXd L(p, p);
  const std::span<const int> none;
  int col = 0;
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b, ++col) {
      int row = 0;
      for (int c = 0; c < m; ++c)
        for (int d = c + 1; d < m; ++d, ++row) L(row, col) = R0(none, a, b, d, c);
    }
  return L;
}

double sectional_curvature(const CurvatureDerivative& R0, const Eigen::VectorXd& X,
                           const Eigen::VectorXd& Y) {
  const int m = R0.m();
  if (R0.order() != 0) throw DomainError("sectional_curvature: expects an order-0 tensor");
  if (X.size() != m || Y.size() != m) throw DomainError("sectional_curvature: dimension mismatch");
  constexpr double kTol = 1e-10;
  if (std::abs(X.squaredNorm() - 1.0) > kTol || std::abs(Y.squaredNorm() - 1.0) > kTol ||
      std::abs(X.dot(Y)) > kTol)
    throw DomainError("sectional_curvature: plane vectors must be orthonormal");
  const std::span<const int> none;
  double s = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const double w = X[a] * Y[b];
      if (w == 0.0) continue;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) s += w * R0(none, a, b, i, j) * X[j] * Y[i];
    }
  return s;
}

SectionalBound max_abs_sec(const CurvatureDerivative& R0, unsigned seed) {
  const int m = R0.m();
  if (R0.order() != 0) throw DomainError("max_abs_sec: expects an order-0 tensor");
  if (m < 2) return {0.0, true};
  const Eigen::MatrixXd L = lambda2_operator(R0);
  if (m <= 3) {
    // every 2-form is decomposable for m <= 3
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (L + L.transpose()));
    return {es.eigenvalues().cwiseAbs().maxCoeff(), true};
  }

  auto sec = [&](const Eigen::VectorXd& X, const Eigen::VectorXd& Y) {
    return sectional_curvature(R0, X, Y);
  };
  auto orthonormalize = [](Eigen::VectorXd& X, Eigen::VectorXd& Y) {
    X.normalize();
    Y -= Y.dot(X) * X;
    Y.normalize();
  };

  double best = 0.0;
  for (int a = 0; a < m; ++a)
    for (int b = a + 1; b < m; ++b)
      best = std::max(best, std::abs(sec(Eigen::VectorXd::Unit(m, a), Eigen::VectorXd::Unit(m, b))));

  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  constexpr int kStarts = 64;
  constexpr int kIters = 200;
  for (int start = 0; start < kStarts; ++start) {
    Eigen::VectorXd X(m), Y(m);
    for (int i = 0; i < m; ++i) {
      X[i] = nd(rng);
      Y[i] = nd(rng);
    }
    orthonormalize(X, Y);
    double step = 0.1;
    double cur = std::abs(sec(X, Y));
    for (int it = 0; it < kIters && step > 1e-12; ++it) {
      // numerical gradient of |sec| on the ambient pair, then retraction
      Eigen::VectorXd gX(m), gY(m);
      constexpr double h = 1e-6;
      for (int i = 0; i < m; ++i) {
        Eigen::VectorXd Xp = X, Xm = X, Yp = Y, Ym = Y;
        Xp[i] += h;
        Xm[i] -= h;
        Yp[i] += h;
        Ym[i] -= h;
        Eigen::VectorXd Ya = Y, Yb = Y, Xa = X, Xb = X;
        orthonormalize(Xp, Ya);
        orthonormalize(Xm, Yb);
        orthonormalize(Xa, Yp);
        orthonormalize(Xb, Ym);
        gX[i] = (std::abs(sec(Xp, Ya)) - std::abs(sec(Xm, Yb))) / (2 * h);
        gY[i] = (std::abs(sec(Xa, Yp)) - std::abs(sec(Xb, Ym))) / (2 * h);
      }
      Eigen::VectorXd Xn = X + step * gX, Yn = Y + step * gY;
      orthonormalize(Xn, Yn);
      const double val = std::abs(sec(Xn, Yn));
      if (val > cur) {
        X = Xn;
        Y = Yn;
        cur = val;
        step *= 1.5;
      } else {
        step *= 0.5;
      }
    }
    best = std::max(best, cur);
  }
  return {best, false};
}

// ---------------------------------------------------------------------------
// JSON

nlohmann::json to_json(const CurvatureDerivative& T) {
  std::vector<int> shape(static_cast<std::size_t>(T.order() + 4), T.m());
  return {{"order", T.order()},
          {"m", T.m()},
          {"shape", shape},
          {"layout", "row-major over (x_1..x_k, a, b, i, j); value[i][j] = <T(..|e_a^e_b) e_j, e_i>"},
          {"data", std::vector<double>(T.data().begin(), T.data().end())}};
}

CurvatureDerivative curvature_derivative_from_json(const nlohmann::json& j) {
  CurvatureDerivative T(j.at("order").get<int>(), j.at("m").get<int>());
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != T.size()) throw DomainError("curvature derivative JSON: data length mismatch");
  std::copy(data.begin(), data.end(), T.data().begin());
  return T;
}

nlohmann::json to_json(const RiemannTuple& t) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : t.entries) entries.push_back(to_json(e));
  return {{"m", t.m}, {"s", t.s}, {"entries", entries}};
}

}  // namespace homlab
