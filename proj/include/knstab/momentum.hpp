#pragma once

#include "knstab/algebra.hpp"
#include "knstab/representation.hpp"

#include <limits>
#include <optional>
#include <vector>

namespace knstab {

/// The chosen maximal compact subgroup (unitary / real torus) with the flat
/// Hermitian metric and the centrally shifted moment map mu_tau = mu_0 - i tau.
/// tau: real k-vector for the torus, a single real scalar (times identity) for gl.
struct Symplectization {
  Representation rep;
  RVec tau;

  static Symplectization make(Representation r, RVec t);

  /// <tau_lift, s> for Hermitian s; the fixed ad-invariant pairing is
  /// Re tr(a^* b) on gl, the Euclidean dot product on the torus.
  double tau_pairing(const AlgebraElement& s) const;
};

/// Eigen-decomposition of sigma(s) (s Hermitian) with v resolved into
/// eigencomponents, clustered by eigenvalue.
struct WeightDecomp {
  std::vector<double> eigenvalues;  // ascending distinct
  std::vector<Vec> components;      // of v, summing back to v
  Mat frame;                        // unitary eigenbasis of sigma(s)
  double op_scale;                  // max(1, ||sigma(s)||)
};
WeightDecomp weight_decompose(const Symplectization& sp, const AlgebraElement& s_herm,
                              const Vec& v);

/// mu_tau^{-is}(v) = (1/2) h(sigma(s) v, v) + <tau, s>. The sign of the tau
/// term is frozen by the energy-formula calibration (see the momentum tests).
double moment_pairing(const Symplectization& sp, const AlgebraElement& s_herm, const Vec& v);

/// mu_tau(v) as a Hermitian element of i k (dual identification by the fixed
/// pairing), plus its norm.
struct MomentVector {
  AlgebraElement direction;  // Hermitian representative
  double norm = 0.0;
};
MomentVector moment_vector(const Symplectization& sp, const Vec& v);

struct MaximalWeight {
  bool infinite = false;
  double value = 0.0;
  Determinacy determinacy = Determinacy::determinate;

  double as_extended() const {
    return infinite ? std::numeric_limits<double>::infinity() : value;
  }
};

/// lambda^s(v) for Hermitian s.
MaximalWeight maximal_weight(const Symplectization& sp, const AlgebraElement& s_herm,
                             const Vec& v);

/// lambda^s(v) for arbitrary Hermitian-type s, reduced through the retraction.
MaximalWeight maximal_weight_general(const Symplectization& sp, const HermitianTypeElement& s,
                                     const Vec& v);

/// E(c_v^s) = lambda^s(v) - lambda_v^s(0), extended real.
MaximalWeight energy(const Symplectization& sp, const AlgebraElement& s_herm, const Vec& v);

/// lim_{t->inf} e^{t sigma(s)} v when it exists (projection onto the kernel
/// eigenspace); empty if some positively weighted component survives.
struct LimitPoint {
  std::optional<Vec> value;
  Determinacy determinacy = Determinacy::determinate;
};
LimitPoint limit_point(const Symplectization& sp, const AlgebraElement& s_herm, const Vec& v);

/// Psi(v, e^{ts}) in closed form; +inf on overflow.
double kempf_ness(const Symplectization& sp, const AlgebraElement& s_herm, double t,
                  const Vec& v);

/// Psi(v, g) through the polar decomposition g = k e^s and left-K-invariance.
double kempf_ness_group(const Symplectization& sp, const GroupElement& g, const Vec& v);

struct StabilizerInfo {
  std::vector<AlgebraElement> g_v;  // complex basis of the infinitesimal stabilizer
  std::vector<AlgebraElement> k_v;  // real basis of its compact part
  bool reductive = false;           // g_v = k_v^C
};
StabilizerInfo stabilizer_algebra(const Representation& rep, const Vec& v);

}  // namespace knstab
