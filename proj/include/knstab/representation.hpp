#pragma once

#include "knstab/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace knstab {

/// A group element: k nonzero complex numbers for the torus (C*)^k, an
/// invertible r x r matrix for GL(r).
struct GroupElement {
  GroupKind kind;
  Vec tdiag;
  Mat gmat;

  static GroupElement torus(Vec d) {
    GroupElement g;
    g.kind = GroupKind::torus;
    g.tdiag = std::move(d);
    return g;
  }
  static GroupElement gl(Mat m) {
    GroupElement g;
    g.kind = GroupKind::gl;
    g.gmat = std::move(m);
    return g;
  }
  static GroupElement identity(GroupKind k, int rank) {
    return k == GroupKind::torus ? torus(Vec::Ones(rank)) : gl(Mat::Identity(rank, rank));
  }
  int rank() const { return kind == GroupKind::torus ? int(tdiag.size()) : int(gmat.rows()); }
};

/// Linear action datum. Torus: integer weight matrix chi (n x k), coordinate j
/// transforms with weight row chi_j. GL(r): the images of the r^2 elementary
/// matrices E_ab under the differential of the representation, each n x n,
/// stored at index a*r + b.
struct Representation {
  GroupKind kind = GroupKind::torus;
  int group_rank = 0;
  int ambient_dim = 0;
  Eigen::MatrixXi weights;
  std::vector<Mat> images;

  static Representation torus_weights(Eigen::MatrixXi chi);
  static Representation gl_standard(int r);
  /// gl(2) on Sym^d(C^2) in the unitarized monomial basis.
  static Representation gl_sym(int d);
  static Representation gl_adjoint(int r);
  static Representation gl_explicit(int r, std::vector<Mat> images);

  /// The induced algebra map: sigma(s) as an n x n matrix (torus: diagonal).
  Mat algebra_matrix(const AlgebraElement& s) const;

  Vec apply(const AlgebraElement& s, const Vec& v) const;

  /// rho(g) on the ambient space. Torus elements act diagonally through
  /// integer powers; GL elements through the polar factors.
  Mat group_matrix(const GroupElement& g) const;

  Vec apply_group(const GroupElement& g, const Vec& v) const;

  /// Bracket compatibility and unitarity of the induced K-representation.
  /// Returns a diagnostic on failure.
  std::optional<std::string> validate(double tol = 1e-10) const;
};

/// One-parameter flow e^{t sigma(s)} v. Overflow is reported, not thrown.
struct ActResult {
  Vec value;
  bool overflow = false;
};
ActResult act(const Representation& rep, const AlgebraElement& s, double t, const Vec& v);

}  // namespace knstab
