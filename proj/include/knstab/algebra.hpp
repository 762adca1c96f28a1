#pragma once

#include "knstab/linalg.hpp"
#include "knstab/types.hpp"

#include <optional>
#include <variant>
#include <vector>

namespace knstab {

/// A Hermitian-type algebra element: diagonalizable with real spectrum,
/// together with its clustered spectral data. For gl the eigenvector basis is
/// stored grouped by ascending eigenvalue cluster.
struct HermitianTypeElement {
  AlgebraElement raw;
  std::vector<double> eigenvalues;  // ascending, distinct after clustering
  std::vector<Mat> projections;     // gl only: complement-compatible projectors
  Mat basis;                        // gl only: eigenvectors, cluster-grouped
  Mat basis_inv;
  std::vector<int> cluster_sizes;

  int rank() const { return raw.rank(); }
  GroupKind kind() const { return raw.kind; }
  double spectral_scale() const;
};

using ClassifyResult = std::variant<HermitianTypeElement, Rejection>;

/// Decides whether s is of Hermitian type (diagonalizable, real spectrum).
/// Borderline spectra produce an indeterminate rejection, never a silent pass.
ClassifyResult classify_hermitian_type(const AlgebraElement& s);

/// Convenience: classify or throw. For inputs already known to be good.
HermitianTypeElement classify_or_throw(const AlgebraElement& s);

struct ParabolicTriple {
  HermitianTypeElement base;
  std::vector<AlgebraElement> g_alg;  // ad(s)-eigenvalue <= 0
  std::vector<AlgebraElement> z_alg;  // = 0
  std::vector<AlgebraElement> u_alg;  // < 0
};

ParabolicTriple parabolic_triple(const HermitianTypeElement& s);

enum class ParabolicMembership { in_unipotent, in_parabolic, outside };

struct MembershipResult {
  ParabolicMembership membership;
  Mat limit;  // lim e^{st} g e^{-st}, valid when membership != outside
};

/// Membership of an invertible g in G(s) / U(s) via block structure in the
/// eigenbasis of s.
MembershipResult parabolic_member(const Mat& g, const HermitianTypeElement& s);

/// The relation s ~ sigma: sigma in g(s) with z(s)-projection equal to s.
bool equiv(const HermitianTypeElement& s, const HermitianTypeElement& sigma,
           double tol = tols::subspace);

/// The unique u in U(s) with ad_u(s) = sigma. Empty if the inputs are not
/// equivalent (residual check fails).
std::optional<Mat> find_unipotent(const HermitianTypeElement& s,
                                  const HermitianTypeElement& sigma);

/// The Hermitian representative of the ~-class of s.
HermitianTypeElement retract_to_compact(const HermitianTypeElement& s);

/// Flag data (Phi, eta) of the ~-class, gl only.
struct FlagClass {
  std::vector<Mat> steps;       // cumulative orthonormal bases, strictly growing
  std::vector<double> weights;  // ascending
};

FlagClass flag_class(const HermitianTypeElement& s);

bool same_flag(const FlagClass& a, const FlagClass& b, double tol = tols::subspace);

struct PolarPair {
  Mat k_part;  // unitary
  Mat h_part;  // positive definite Hermitian
};

/// g = k h. Empty for singular g.
std::optional<PolarPair> polar_decompose(const Mat& g);

enum class Ambient { full, compact };

/// Basis of the simultaneous commutant of the generators inside the requested
/// real form. `full` returns a complex basis of the commutant in g; `compact`
/// a real basis of the commutant in k (anti-Hermitian matrices for gl).
std::vector<AlgebraElement> centralizer_algebra(const std::vector<AlgebraElement>& generators,
                                                GroupKind kind, int rank, Ambient ambient);

}  // namespace knstab
