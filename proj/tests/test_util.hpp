#pragma once

#include "knstab/types.hpp"

#include <functional>
#include <random>

namespace knstab::testutil {

inline Mat random_matrix(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Mat m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = cx(g(rng), g(rng));
  return m;
}

inline Mat random_hermitian(int n, std::mt19937_64& rng, double scale = 1.0) {
  Mat m = random_matrix(n, rng, scale);
  return 0.5 * (m + m.adjoint());
}

inline Mat random_invertible(int n, std::mt19937_64& rng) {
  for (;;) {
    Mat m = random_matrix(n, rng);
    if (std::abs(m.determinant()) > 1e-3) return m;
  }
}

inline Vec random_vector(int n, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Vec v(n);
  for (int i = 0; i < n; ++i) v(i) = cx(g(rng), g(rng));
  return v;
}

/// Adaptive Simpson quadrature; independent oracle for energy / Psi integrals.
inline double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-10, int depth = 30) {
  auto simpson = [&](double lo, double hi) {
    double mid = 0.5 * (lo + hi);
    return (hi - lo) / 6.0 * (f(lo) + 4.0 * f(mid) + f(hi));
  };
  std::function<double(double, double, double, int)> rec = [&](double lo, double hi, double whole,
                                                               int d) -> double {
    double mid = 0.5 * (lo + hi);
    double left = simpson(lo, mid), right = simpson(mid, hi);
    if (d <= 0 || std::abs(left + right - whole) < 15.0 * tol) return left + right;
    return rec(lo, mid, left, d - 1) + rec(mid, hi, right, d - 1);
  };
  return rec(a, b, simpson(a, b), depth);
}

}  // namespace knstab::testutil
