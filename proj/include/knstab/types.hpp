#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace knstab {

using cx = std::complex<double>;
using Vec = Eigen::VectorXcd;
using Mat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;

enum class GroupKind { torus, gl };

/// Numerical thresholds shared across the library. All relative tolerances
/// are scaled by the natural size of the object they apply to.
namespace tols {
// two eigenvalues belong to the same cluster iff gap <= eig_cluster * max(1, specrad)
inline constexpr double eig_cluster = 1e-9;
// rank decisions: singular value significant iff > rank_rel * sigma_max
inline constexpr double rank_rel = 1e-10;
// subspaces are equal iff all principal angles are below this
inline constexpr double subspace = 1e-8;
// |v_j| <= support_lo * ||v|| counts as a zero component;
// values in (support_lo, support_hi] * ||v|| are indeterminate
inline constexpr double support_lo = 1e-12;
inline constexpr double support_hi = 1e-9;
// borderline band for real-spectrum / nilpotency decisions:
// below reject_lo accept, above reject_hi reject, in between indeterminate
inline constexpr double reject_lo = 1e-9;
inline constexpr double reject_hi = 1e-6;
// default flow tolerance on ||mu||
inline constexpr double mu_zero = 1e-9;
// accumulated exponent norm beyond which a flow is declared degenerating
inline constexpr double exponent_blowup = 40.0;
}  // namespace tols

/// An element of the Lie algebra: gl(r,C) as a dense r x r matrix, or the
/// complexified torus algebra C^k as a coordinate vector.
struct AlgebraElement {
  GroupKind kind;
  Vec tv;  // torus case, size k
  Mat gm;  // gl case, r x r

  static AlgebraElement torus(Vec v) {
    AlgebraElement a;
    a.kind = GroupKind::torus;
    a.tv = std::move(v);
    return a;
  }
  static AlgebraElement gl(Mat m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("gl element must be square");
    AlgebraElement a;
    a.kind = GroupKind::gl;
    a.gm = std::move(m);
    return a;
  }
  static AlgebraElement zero(GroupKind k, int rank) {
    return k == GroupKind::torus ? torus(Vec::Zero(rank)) : gl(Mat::Zero(rank, rank));
  }

  int rank() const { return kind == GroupKind::torus ? int(tv.size()) : int(gm.rows()); }

  double norm() const { return kind == GroupKind::torus ? tv.norm() : gm.norm(); }

  bool is_hermitian(double tol = 1e-12) const;

  AlgebraElement operator+(const AlgebraElement& o) const;
  AlgebraElement operator-(const AlgebraElement& o) const;
  AlgebraElement operator*(double t) const;

  /// Lie bracket; identically zero on the torus algebra.
  AlgebraElement bracket(const AlgebraElement& o) const;
};

/// Outcome of a classification that may be numerically undecidable.
enum class Determinacy { determinate, indeterminate };

struct Rejection {
  std::string reason;
  Determinacy determinacy = Determinacy::determinate;
};

}  // namespace knstab
