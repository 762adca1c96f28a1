#pragma once

#include "knstab/types.hpp"

#include <optional>
#include <random>
#include <vector>

namespace knstab::linalg {

/// Numerical rank via SVD with threshold rank_rel * sigma_max.
int rank(const Mat& m, double rel_tol = tols::rank_rel);

/// Orthonormal basis of the column span (columns of the result).
Mat col_space(const Mat& m, double rel_tol = tols::rank_rel);

/// Orthonormal basis of the (right) null space.
Mat null_space(const Mat& m, double rel_tol = tols::rank_rel);

/// Real null space of a real matrix.
RMat null_space_real(const RMat& m, double rel_tol = tols::rank_rel);

/// Largest principal angle between the column spans of two orthonormal bases.
/// Spans of different dimension compare as pi/2.
double max_principal_angle(const Mat& q1, const Mat& q2);

bool same_subspace(const Mat& q1, const Mat& q2, double tol = tols::subspace);

/// Polar decomposition g = k h with k unitary and h Hermitian positive definite.
struct Polar {
  Mat k;
  Mat h;
};
std::optional<Polar> polar(const Mat& g);

/// Hermitian logarithm of a positive definite Hermitian matrix.
Mat log_hpd(const Mat& h);

/// Principal logarithm of a unitary matrix (anti-Hermitian result).
Mat log_unitary(const Mat& k);

/// Matrix exponential (Eigen scaling-and-squaring).
Mat expm(const Mat& m);

/// Haar-ish random unitary via QR of a Ginibre matrix.
Mat random_unitary(int n, std::mt19937_64& rng);

/// Hermitian part (m + m^*)/2.
inline Mat herm_part(const Mat& m) { return 0.5 * (m + m.adjoint()); }

/// Orthonormal real basis of the anti-Hermitian matrices u(r),
/// w.r.t. the inner product <a,b> = Re tr(a^* b). Size r^2.
std::vector<Mat> antihermitian_basis(int r);

/// Orthonormal real basis of the Hermitian matrices i u(r). Size r^2.
std::vector<Mat> hermitian_basis(int r);

}  // namespace knstab::linalg
