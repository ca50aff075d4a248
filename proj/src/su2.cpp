#include "homlab/su2.hpp"

#include "homlab/error.hpp"
#include "homlab/parallel.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace homlab {

namespace {

const std::span<const int> kNone;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(std::string("Milnor metric: ") + what + " must be positive");
}

double relative_gap(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

double to_double(const Rational& q) { return static_cast<double>(q.numerator()) / static_cast<double>(q.denominator()); }

}  // namespace

MilnorMetric::MilnorMetric(double eps, double lambda1, double lambda2)
    : eps_(eps), mean_(0.5 * (lambda1 + lambda2)), gap_(lambda2 - lambda1) {
  require_positive(eps, "eps");
  require_positive(lambda1, "lambda_1");
  require_positive(lambda2, "lambda_2");
}

MilnorMetric MilnorMetric::from_gap(double eps, double gap, double mean) {
  require_positive(eps, "eps");
  require_positive(mean - 0.5 * std::abs(gap), "lambda_1 and lambda_2");
  MilnorMetric g;
  g.eps_ = eps;
  g.mean_ = mean;
  g.gap_ = gap;
  return g;
}

Bracket milnor_bracket(const MilnorMetric& g) {
  const double e = g.eps(), l1 = g.lambda1(), l2 = g.lambda2();
  return Bracket::from_entries(0, 3,
                               {{0, 1, 2, -2.0 * std::sqrt(l2 / (e * l1))},
                                {0, 2, 1, 2.0 * std::sqrt(l1 / (e * l2))},
                                {1, 2, 0, -2.0 * std::sqrt(e / (l1 * l2))}});
}

SU2Invariants su2_invariants(const MilnorMetric& g) {
  const double e = g.eps(), l1 = g.lambda1(), l2 = g.lambda2(), d = g.gap();
  const double root = std::sqrt(e * l1 * l2);
  SU2Invariants out;
  auto& c = out.c;
  c[0] = (-e + 2 * g.mean()) / root;
  c[1] = (e + d) / root;
  c[2] = (e - d) / root;
  out.sec = {-c[0] * c[1] + c[1] * c[2] + c[0] * c[2], c[0] * c[1] - c[1] * c[2] + c[0] * c[2],
             c[0] * c[1] + c[1] * c[2] - c[0] * c[2]};
  const double ll = l1 * l2;
  out.sec_explicit = {(e + 2 * d - d * (l1 + 3 * l2) / e) / ll, (-3 * e + 2 * (l1 + l2) + d * d / e) / ll,
                      (e - 2 * d + d * (l2 + 3 * l1) / e) / ll};
  for (int i = 0; i < 3; ++i) out.cross_check = std::max(out.cross_check, relative_gap(out.sec[i], out.sec_explicit[i]));
  return out;
}

CurvatureDerivative rm1_closed(const MilnorMetric& g) {
  const auto c = su2_invariants(g).c;
  const double root = std::sqrt(g.eps() * g.lambda1() * g.lambda2());
  const double c1_minus_c2 = 2.0 * g.gap() / root;
  const double c0_minus_c2 = c[0] - c[2], c0_minus_c1 = c[0] - c[1];
  CurvatureDerivative T(1, 3);
  auto put = [&](int x, int a, int b, double v, int i, int j) {
    const int xs[] = {x};
    T.set_value(xs, a, b, v * so_basis(3, i, j));
  };
  put(0, 0, 1, 2 * c[0] * c[0] * c1_minus_c2, 0, 2);
  put(0, 0, 2, 2 * c[0] * c[0] * c1_minus_c2, 0, 1);
  put(1, 0, 1, 2 * c[1] * c[1] * c0_minus_c2, 1, 2);
  put(1, 1, 2, 2 * c[1] * c[1] * c0_minus_c2, 0, 1);
  put(2, 0, 2, 2 * c[2] * c[2] * c0_minus_c1, 1, 2);
  put(2, 1, 2, 2 * c[2] * c[2] * c0_minus_c1, 0, 2);
  return T;
}

std::array<Eigen::MatrixXd, 3> rmk_axis_closed(const MilnorMetric& g, int k) {
  if (k < 1) throw DomainError("rmk_axis_closed: k must be at least 1");
  const auto c = su2_invariants(g).c;
  const double root = std::sqrt(g.eps() * g.lambda1() * g.lambda2());
  const double c1_minus_c2 = 2.0 * g.gap() / root;
  const double mag = std::ldexp(std::pow(c[0], k + 1) * c1_minus_c2, k);
  auto b = [](int j) { return 1 + j % 2; };
  auto sign = [](int j) { return (j / 2) % 2 ? -1.0 : 1.0; };
  return {sign(k - 1) * mag * so_basis(3, 0, b(k)), sign(k) * mag * so_basis(3, 0, b(k + 1)),
          Eigen::MatrixXd::Zero(3, 3)};
}

MilnorMetric star_metric(double eps, double delta) {
  if (!(delta >= 0.0 && delta < 1.0)) throw DomainError("star_family: delta must lie in [0, 1)");
  return MilnorMetric::from_gap(eps, delta, 1.0);
}

Bracket star_family(double eps, double delta) {
  star_metric(eps, delta);
  return Bracket::from_entries(0, 3,
                               {{0, 1, 2, -2.0 * std::sqrt((2 + delta) / ((2 - delta) * eps))},
                                {0, 2, 1, 2.0 * std::sqrt((2 - delta) / ((2 + delta) * eps))},
                                {1, 2, 0, -2.0 * std::sqrt(4 * eps / (4 - delta * delta))}});
}

Rational parse_exponent(const nlohmann::json& j) {
  Rational q;
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    const auto slash = s.find('/');
    try {
      std::size_t used = 0;
      const long long num = std::stoll(s.substr(0, slash), &used);
      long long den = 1;
      if (slash != std::string::npos) den = std::stoll(s.substr(slash + 1));
      if (den == 0) throw DomainError("exponent '" + s + "': zero denominator");
      q = Rational(num, den);
    } catch (const std::logic_error&) {
      throw DomainError("exponent '" + s + "' is not an integer or p/q fraction");
    }
  } else if (j.is_number_integer()) {
    q = Rational(j.get<long long>());
  } else if (j.is_number()) {
    // exact for dyadic inputs such as 5.5; other decimals must be given as "p/q"
    const double x = j.get<double>();
    long long den = 1;
    while (den <= (1LL << 20) && std::nearbyint(x * static_cast<double>(den)) != x * static_cast<double>(den)) den *= 2;
    if (den > (1LL << 20)) throw DomainError("exponent " + j.dump() + " is not exact in binary; write it as \"p/q\"");
    q = Rational(static_cast<long long>(std::nearbyint(x * static_cast<double>(den))), den);
  } else {
    throw DomainError("exponent must be a number or a \"p/q\" string");
  }
  if (q < 0) throw DomainError("exponent must be non-negative");
  return q;
}

void PowerLawFamily::check() const {
  if (!(c_eps > 0.0)) throw DomainError("power-law family: c_eps must be positive");
  if (p <= 0) throw DomainError("power-law family: p must be positive");
  if (c_delta < 0.0) throw DomainError("power-law family: c_delta must be non-negative");
  if (c_delta > 0.0 && r <= 0) throw DomainError("power-law family: r must be positive when c_delta > 0");
  if (!(limit > 0.0)) throw DomainError("power-law family: limit must be positive");
}

MilnorMetric PowerLawFamily::metric(double n) const {
  check();
  if (!(n >= 1.0)) throw DomainError("power-law family: n must be at least 1");
  const double gap = c_delta == 0.0 ? 0.0 : c_delta * std::pow(n, -to_double(r));
  return MilnorMetric::from_gap(c_eps * std::pow(n, -to_double(p)), gap, limit);
}

RegularityIndex regularity_index(const PowerLawFamily& f) {
  f.check();
  if (f.c_delta == 0.0) return {true, 0};
  // eps^(-k/2) gap ~ n^(k p/2 - r) -> 0 iff k p/2 < r, i.e. k < 2r/p
  const Rational bound = Rational(2) * f.r / f.p;
  long long k = bound.numerator() / bound.denominator();
  if (Rational(k) == bound) --k;
  return {false, k};
}

std::vector<double> CollapseTable::column(int k) const {
  std::vector<double> out;
  for (const auto& row : rows)
    if (row.k == k) out.push_back(row.norm);
  return out;
}

CollapseTable collapse_table(const PowerLawFamily& f, const std::vector<int>& n_values, int k_max,
                             const EngineLimits& limits) {
  f.check();
  if (k_max < 0) throw DomainError("collapse_table: k_max must be non-negative");
  if (n_values.empty()) throw DomainError("collapse_table: no n values");
  CollapseTable out;
  out.n_values = n_values;
  out.k_max = k_max;
  const auto cols = static_cast<std::size_t>(k_max) + 1;
  std::vector<std::vector<CollapseRow>> per_n(n_values.size());
  out.max_abs_sec.assign(n_values.size(), 0.0);
  parallel_for(n_values.size(), [&](std::size_t i) {
    const int n = n_values[i];
    const MilnorMetric g = f.metric(n);
    const auto tower = curvature_tower(milnor_bracket(g), k_max, limits);
    out.max_abs_sec[i] = max_abs_sec(tower[0]).value;
    const double e = g.eps(), gap = std::abs(g.gap());
    for (int k = 0; k <= k_max; ++k) {
      CollapseRow row{n, k, tower[static_cast<std::size_t>(k)].norm(), std::numeric_limits<double>::quiet_NaN(),
                      std::numeric_limits<double>::quiet_NaN()};
      if (k >= 1) {
        const double blow = std::pow(e, -0.5 * (k + 2)) * gap;
        row.envelope = std::sqrt(e) + blow;
        row.axis_bound = std::ldexp(blow, 2 * (k + 1));
      }
      per_n[i].push_back(row);
    }
  });
  for (const auto& rows : per_n) out.rows.insert(out.rows.end(), rows.begin(), rows.end());

  for (std::size_t k = 0; k < cols; ++k) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (std::size_t i = 0; i < n_values.size(); ++i) {
      const double v = per_n[i][k].norm;
      if (!(v > 0.0)) continue;
      const double x = std::log(static_cast<double>(n_values[i])), y = std::log(v);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++cnt;
    }
    const double den = cnt * sxx - sx * sx;
    out.slopes.push_back(cnt >= 2 && den > 0 ? (cnt * sxy - sx * sy) / den : std::numeric_limits<double>::quiet_NaN());
  }
  return out;
}

nlohmann::json to_json(const SU2Invariants& r) {
  return {{"c", r.c}, {"sec", r.sec}, {"sec_explicit", r.sec_explicit}, {"cross_check", r.cross_check},
          {"planes", {"e0^e1", "e1^e2", "e0^e2"}}};
}

nlohmann::json to_json(const RegularityIndex& r) {
  if (r.infinite) return "inf";
  return r.value;
}

nlohmann::json to_json(const CollapseTable& t) {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  nlohmann::json slopes = nlohmann::json::array();
  for (double s : t.slopes) slopes.push_back(num(s));
  nlohmann::json cols = nlohmann::json::object();
  for (int k = 0; k <= t.k_max; ++k) cols[std::to_string(k)] = t.column(k);
  return {{"n_values", t.n_values}, {"k_max", t.k_max}, {"slopes", slopes}, {"norms", cols},
          {"max_abs_sec", t.max_abs_sec}};
}

}  // namespace homlab
