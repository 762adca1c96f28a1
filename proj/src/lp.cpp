#include "knstab/lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace knstab::lp {

namespace {

std::int64_t checked(__int128 v) {
  if (v > std::numeric_limits<std::int64_t>::max() || v < std::numeric_limits<std::int64_t>::min())
    throw std::overflow_error("rational overflow");
  return std::int64_t(v);
}

}  // namespace

Fraction::Fraction(std::int64_t n) : num(n), den(1) {}

Fraction::Fraction(std::int64_t n, std::int64_t d) {
  if (d == 0) throw std::invalid_argument("zero denominator");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  std::int64_t g = std::gcd(n < 0 ? -n : n, d);
  if (g == 0) g = 1;
  num = n / g;
  den = d / g;
}

Fraction Fraction::operator+(const Fraction& o) const {
  __int128 n = __int128(num) * o.den + __int128(o.num) * den;
  __int128 d = __int128(den) * o.den;
  __int128 an = n < 0 ? -n : n;
  std::int64_t g = std::gcd(checked(an == 0 ? 1 : an), checked(d));
  return Fraction(checked(n / g), checked(d / g));
}

Fraction Fraction::operator-(const Fraction& o) const { return *this + (-o); }

Fraction Fraction::operator*(const Fraction& o) const {
  __int128 n = __int128(num) * o.num;
  __int128 d = __int128(den) * o.den;
  std::int64_t g = std::gcd(checked(n == 0 ? 1 : (n < 0 ? -n : n)), checked(d));
  return Fraction(checked(n) / g, checked(d) / g);
}

Fraction Fraction::operator/(const Fraction& o) const {
  if (o.num == 0) throw std::invalid_argument("division by zero fraction");
  return *this * Fraction(o.den, o.num);
}

Fraction Fraction::operator-() const {
  Fraction f;
  f.num = -num;
  f.den = den;
  return f;
}

bool Fraction::operator==(const Fraction& o) const { return num == o.num && den == o.den; }

bool Fraction::operator<(const Fraction& o) const {
  return __int128(num) * o.den < __int128(o.num) * den;
}

Rationalized rationalize(double x, std::int64_t max_den, double tol) {
  Rationalized r;
  if (!std::isfinite(x)) throw std::invalid_argument("non-finite LP datum");
  // continued fraction expansion
  double v = x;
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  for (int it = 0; it < 64; ++it) {
    double fl = std::floor(v);
    if (fl > 9e17 || fl < -9e17) break;
    std::int64_t a = std::int64_t(fl);
    __int128 p2 = __int128(a) * p1 + p0;
    __int128 q2 = __int128(a) * q1 + q0;
    if (q2 > max_den) break;
    p0 = p1;
    q0 = q1;
    p1 = checked(p2);
    q1 = checked(q2);
    double rem = v - fl;
    if (std::abs(x - double(p1) / double(q1)) <= tol * std::max(1.0, std::abs(x))) break;
    if (rem < 1e-15) break;
    v = 1.0 / rem;
  }
  if (q1 == 0) {
    p1 = 0;
    q1 = 1;
  }
  r.value = Fraction(p1, q1);
  r.exact = std::abs(x - r.value.to_double()) <= tol * std::max(1.0, std::abs(x));
  return r;
}

namespace {

using FRow = std::vector<Fraction>;

// exact solve of a k x k system; empty result if singular
std::optional<FRow> solve_square(std::vector<FRow> m, FRow rhs) {
  int k = int(rhs.size());
  for (int col = 0; col < k; ++col) {
    int piv = -1;
    for (int row = col; row < k; ++row)
      if (!m[row][col].is_zero()) {
        piv = row;
        break;
      }
    if (piv < 0) return std::nullopt;
    std::swap(m[col], m[piv]);
    std::swap(rhs[col], rhs[piv]);
    Fraction inv = Fraction(1) / m[col][col];
    for (int j = col; j < k; ++j) m[col][j] = m[col][j] * inv;
    rhs[col] = rhs[col] * inv;
    for (int row = 0; row < k; ++row) {
      if (row == col || m[row][col].is_zero()) continue;
      Fraction f = m[row][col];
      for (int j = col; j < k; ++j) m[row][j] = m[row][j] - f * m[col][j];
      rhs[row] = rhs[row] - f * rhs[col];
    }
  }
  return rhs;
}

Fraction dot(const FRow& a, const FRow& b) {
  Fraction s(0);
  for (size_t i = 0; i < a.size(); ++i) s = s + a[i] * b[i];
  return s;
}

}  // namespace

ConeLpResult cone_minimize(const std::vector<FRow>& a_rows, const FRow& c) {
  int k = int(c.size());
  // constraint list: a_rows . s <= 0, then e_i . s <= 1 and -e_i . s <= 1
  std::vector<FRow> rows = a_rows;
  std::vector<Fraction> rhs(a_rows.size(), Fraction(0));
  for (int i = 0; i < k; ++i) {
    FRow e(k, Fraction(0)), me(k, Fraction(0));
    e[i] = Fraction(1);
    me[i] = Fraction(-1);
    rows.push_back(e);
    rhs.push_back(Fraction(1));
    rows.push_back(me);
    rhs.push_back(Fraction(1));
  }
  int m = int(rows.size());

  ConeLpResult out;
  out.min_value = Fraction(0);  // origin is feasible
  out.exact = true;
  bool have_min = false;

  std::vector<int> idx(k);
  // enumerate ascending k-subsets of [0, m)
  std::vector<int> comb(k);
  std::iota(comb.begin(), comb.end(), 0);
  auto advance = [&]() -> bool {
    int i = k - 1;
    while (i >= 0 && comb[i] == m - k + i) --i;
    if (i < 0) return false;
    ++comb[i];
    for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
    return true;
  };

  std::vector<FRow> verts;
  std::vector<Fraction> vals;
  bool origin_vertex = false;

  if (k == 0) {
    out.min_value = Fraction(0);
    out.optimal_vertices = {FRow{}};
    return out;
  }

  do {
    std::vector<FRow> mat(k);
    FRow b(k);
    for (int i = 0; i < k; ++i) {
      mat[i] = rows[comb[i]];
      b[i] = rhs[comb[i]];
    }
    auto sol = solve_square(mat, b);
    if (!sol) continue;
    bool feasible = true;
    for (int i = 0; i < m && feasible; ++i)
      if (rhs[i] < dot(rows[i], *sol)) feasible = false;
    if (!feasible) continue;
    bool dup = false;
    for (auto& w : verts)
      if (w == *sol) {
        dup = true;
        break;
      }
    if (dup) continue;
    verts.push_back(*sol);
    vals.push_back(dot(c, *sol));
    bool zero = true;
    for (auto& x : *sol)
      if (!x.is_zero()) zero = false;
    if (zero) origin_vertex = true;
  } while (advance());

  for (size_t i = 0; i < verts.size(); ++i) {
    if (!have_min || vals[i] < out.min_value) {
      out.min_value = vals[i];
      have_min = true;
    }
  }
  // The polytope is bounded, so if any vertex exists the minimum over vertices
  // is the true minimum. If no subset produced a vertex (impossible for the
  // box-bounded polytope) fall back to the origin.
  if (!have_min) {
    out.min_value = Fraction(0);
    out.optimal_vertices = {FRow(k, Fraction(0))};
    return out;
  }
  for (size_t i = 0; i < verts.size(); ++i)
    if (vals[i] == out.min_value) out.optimal_vertices.push_back(verts[i]);
  out.zero_is_vertex = origin_vertex;
  return out;
}

ConeLpResult cone_minimize(const RMat& a, const RVec& c) {
  bool exact = true;
  std::vector<FRow> rows(a.rows(), FRow(a.cols()));
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j) {
      auto r = rationalize(a(i, j));
      rows[i][j] = r.value;
      exact = exact && r.exact;
    }
  FRow obj(c.size());
  for (int j = 0; j < c.size(); ++j) {
    auto r = rationalize(c(j));
    obj[j] = r.value;
    exact = exact && r.exact;
  }
  auto out = cone_minimize(rows, obj);
  out.exact = out.exact && exact;
  return out;
}

}  // namespace knstab::lp
