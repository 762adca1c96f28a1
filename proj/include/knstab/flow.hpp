#pragma once

#include "knstab/momentum.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace knstab {

enum class FlowClass { reached_zero, stalled_positive, degenerating, inconclusive };

struct FlowOptions {
  double tol = tols::mu_zero;
  int max_iter = 100000;
  double max_step = 8.0;       // cap on a single accepted step length
  double blowup = tols::exponent_blowup;
};

/// Outcome of gradient descent on the Kempf-Ness functional along geodesics
/// e^{ts}. `exponent_sum` is a bookkeeping sum of the Hermitian step
/// directions; the actual group element is the ordered product of the step
/// exponentials, which `v_final` already incorporates.
struct FlowResult {
  Vec v_final;
  AlgebraElement exponent_sum;
  double exponent_norm = 0.0;       // norm of exponent_sum
  double mu_final = 0.0;            // ||mu(v_final)||
  double mu_min = 0.0;              // smallest ||mu|| seen
  double psi_final = 0.0;           // Psi relative to the start point
  std::vector<double> mu_trajectory;  // sampled
  FlowClass classification = FlowClass::inconclusive;
  int iterations = 0;
  double wall_time = 0.0;
  bool psi_monotone = true;
};

/// Backtracking descent v <- exp(-eps mu_dir) v with exact Psi bookkeeping via
/// the cocycle property. Descent along the degenerating locus is detected by
/// exponent blow-up with vanishing ||mu||; convergence requires both
/// ||mu|| <= tol and a stabilized exponent (reaching small ||mu|| alone also
/// happens along degenerating rays).
FlowResult kn_descent(const Symplectization& sp, const Vec& v, FlowOptions opts = {});

struct InfMomentResult {
  double value = 0.0;          // infimum estimate of ||mu|| over the orbit
  FlowClass classification = FlowClass::inconclusive;
  bool semistable = false;     // valid when conclusive
  bool conclusive = false;
};
InfMomentResult inf_moment_norm(const Symplectization& sp, const Vec& v, FlowOptions opts = {});

/// The single Hermitian shift s0 with mu(e^{s0} v) = 0, searched inside
/// i [ z(k_v)^perp within z_k(k_v) ]. Fails (with margins) if the full moment
/// map does not vanish at the restricted critical point.
struct ZeroShift {
  bool ok = false;
  AlgebraElement s0;
  double mu_norm = 0.0;   // full ||mu(e^{s0} v)|| at the result
  std::string failure;
};
ZeroShift find_zero_shift(const Symplectization& sp, const Vec& v, FlowOptions opts = {});

enum class Boundedness { bounded_below, unbounded };

struct BoundednessResult {
  Boundedness kind = Boundedness::bounded_below;
  double inf_estimate = 0.0;     // bounded case: best Psi value reached
  AlgebraElement direction;      // unbounded case: verified descent direction
  double weight = 0.0;           // maximal weight along that direction
  double slope = 0.0;            // measured large-t slope of Psi along it
  bool heuristic = false;        // bounded verdicts for gl are not proofs
};
BoundednessResult boundedness_probe(const Symplectization& sp, const Vec& v, int budget = 64,
                                    std::uint64_t seed = 1);

}  // namespace knstab
