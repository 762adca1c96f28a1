#pragma once

#include "knstab/momentum.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace knstab {

/// Verdict levels, ordered so that stable => polystable => semistable is the
/// numeric order of the enum.
enum class Level { unstable, semistable_not_polystable, polystable_not_stable, stable };

inline bool is_semistable(Level l) { return l != Level::unstable; }
inline bool is_polystable(Level l) {
  return l == Level::polystable_not_stable || l == Level::stable;
}

const char* level_name(Level l);

enum class Confidence { exact, heuristic };

struct DestabilizerCert {
  AlgebraElement s;   // Hermitian, normalized
  double weight = 0;  // maximal weight along s, < 0
};

struct ZeroMomentCert {
  GroupElement g;       // ||mu(g v)|| <= tol
  double mu_norm = 0;
};

struct DegenerationCert {
  AlgebraElement s_m;  // admissible direction with weight 0
  Vec y;               // limit of e^{t s_m} v
  AlgebraElement s0;   // shift with mu(e^{s0} y) = 0
  double mu_norm = 0;  // ||mu(e^{s0} y)||
};

struct AnalyticOnlyCert {
  std::string note;
  double margin = 0;
};

using Certificate = std::variant<DestabilizerCert, ZeroMomentCert, DegenerationCert,
                                 AnalyticOnlyCert>;

struct Verdict {
  Level level = Level::unstable;
  Certificate certificate;
  Confidence confidence = Confidence::exact;
  double margin = 0.0;  // distance of the deciding quantity from its threshold
};

/// Exact verdict for torus actions: the finite branch of the maximal weight is
/// linear in s, so the decision reduces to a rational LP over the admissible
/// cone intersected with the unit box.
Verdict analytic_verdict_torus(const Symplectization& sp, const Vec& v);

/// Verdict for GL via unitary-frame sampling (each Hermitian direction lies in
/// a conjugate of the diagonal torus) plus descent confirmation. Destabilizers
/// are proofs; nonnegative outcomes are heuristic unless the flow confirms.
Verdict analytic_verdict_gl(const Symplectization& sp, const Vec& v, int budget = 64,
                            std::uint64_t seed = 1);

Verdict analytic_verdict(const Symplectization& sp, const Vec& v, int budget = 64,
                         std::uint64_t seed = 1);

/// Best destabilizing direction found: minimizes the finite branch of
/// s -> lambda^s(v) over normalized admissible directions. The returned value
/// is always re-verified through the weight primitive.
struct DestabResult {
  AlgebraElement s;
  double value = 0.0;      // verified weight along s (0 for s = 0)
  bool exact = false;      // torus LP path
};
DestabResult destabilizer_search(const Symplectization& sp, const Vec& v, int budget = 64,
                                 std::uint64_t seed = 1);

/// Degeneration data (s_m, y, s0) for a semistable point: weight-zero
/// admissible direction chosen in the relative interior of the optimal face
/// (maximizing the set of support weights it kills), the limit point, and the
/// moment-zero shift. All four defining conditions are re-verified; failures
/// are reported, never swallowed.
struct DegenResult {
  bool ok = false;
  DegenerationCert cert;
  std::string failure;     // non-semistable input or a failed condition
  std::optional<DestabilizerCert> destabilizer;  // when the input is unstable
};
DegenResult degeneration_certificate(const Symplectization& sp, const Vec& v);

/// For semistable v the maximal weight must vanish on Hermitian directions
/// inside the stabilizer algebra; evaluates it on a basis sample.
struct StabilizerWeightReport {
  bool vacuous = false;    // trivial stabilizer
  double max_abs = 0.0;
  bool pass = true;
};
StabilizerWeightReport stabilizer_weight_check(const Symplectization& sp, const Vec& v);

/// Re-verifies a certificate from scratch against the momentum primitives.
/// Returns a failure description, or nothing if the certificate is sound.
std::optional<std::string> verify_certificate(const Symplectization& sp, const Vec& v,
                                              const Verdict& verdict, double tol = 1e-7);

}  // namespace knstab
