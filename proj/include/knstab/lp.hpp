#pragma once

#include "knstab/types.hpp"

#include <cstdint>
#include <vector>

namespace knstab::lp {

/// Small exact rational scalar. Magnitudes stay tiny here (vertex enumeration
/// over integer constraints of modulus <= ~10 in dimension <= 3), but the
/// arithmetic reduces through gcd and multiplies through 128-bit intermediates
/// so borderline data cannot silently wrap.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Fraction() = default;
  Fraction(std::int64_t n);
  Fraction(std::int64_t n, std::int64_t d);

  Fraction operator+(const Fraction& o) const;
  Fraction operator-(const Fraction& o) const;
  Fraction operator*(const Fraction& o) const;
  Fraction operator/(const Fraction& o) const;
  Fraction operator-() const;
  bool operator==(const Fraction& o) const;
  bool operator<(const Fraction& o) const;
  bool operator<=(const Fraction& o) const { return *this == o || *this < o; }

  bool is_zero() const { return num == 0; }
  double to_double() const { return double(num) / double(den); }
};

/// Best rational approximation with denominator <= max_den (continued
/// fractions). exact is set when |value - num/den| <= tol.
struct Rationalized {
  Fraction value;
  bool exact = false;
};
Rationalized rationalize(double x, std::int64_t max_den = 1000000, double tol = 1e-9);

/// minimize c . s  subject to  A s <= 0 (row-wise) and |s_i| <= 1.
///
/// Solved exactly by enumerating vertices (all full-rank k-subsets of the
/// constraint rows). The origin is always feasible, so the program is feasible
/// and bounded; the minimum is <= 0.
struct ConeLpResult {
  Fraction min_value;
  // all polytope vertices attaining the minimum (exact coordinates)
  std::vector<std::vector<Fraction>> optimal_vertices;
  bool zero_is_vertex = false;  // the origin is a vertex of the polytope
  bool exact = false;           // inputs rationalized without rounding error
};
ConeLpResult cone_minimize(const std::vector<std::vector<Fraction>>& a_rows,
                           const std::vector<Fraction>& c);

/// Convenience wrapper over double data (rationalized first).
ConeLpResult cone_minimize(const RMat& a, const RVec& c);

}  // namespace knstab::lp
