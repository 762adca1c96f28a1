#include "knstab/stability.hpp"

#include "knstab/flow.hpp"
#include "knstab/lp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace knstab {

const char* level_name(Level l) {
  switch (l) {
    case Level::unstable: return "unstable";
    case Level::semistable_not_polystable: return "semistable_not_polystable";
    case Level::polystable_not_stable: return "polystable_not_stable";
    case Level::stable: return "stable";
  }
  return "?";
}

namespace {

std::vector<int> support_indices(const Vec& v, bool* indeterminate) {
  std::vector<int> supp;
  double nv = v.norm();
  if (indeterminate) *indeterminate = false;
  if (nv == 0.0) return supp;
  for (int j = 0; j < v.size(); ++j) {
    double a = std::abs(v(j));
    if (a > tols::support_hi * nv)
      supp.push_back(j);
    else if (a > tols::support_lo * nv && indeterminate)
      *indeterminate = true;
  }
  return supp;
}

RVec frac_vec(const std::vector<lp::Fraction>& f) {
  RVec r(f.size());
  for (size_t i = 0; i < f.size(); ++i) r(int(i)) = f[i].to_double();
  return r;
}

struct TorusLpData {
  std::vector<int> supp;
  std::vector<std::vector<lp::Fraction>> rows;  // support weight rows
  std::vector<lp::Fraction> obj;
  lp::ConeLpResult lp;
  bool exact = true;
};

// exact LP over the admissible cone of a diagonalized problem:
// chi is the (n x k) integer weight matrix, supp the live coordinates,
// objective the tau covector.
TorusLpData diag_lp(const Eigen::MatrixXi& chi, const std::vector<int>& supp, const RVec& tau) {
  TorusLpData d;
  d.supp = supp;
  const int k = int(chi.cols());
  for (int j : supp) {
    std::vector<lp::Fraction> row(k);
    for (int i = 0; i < k; ++i) row[i] = lp::Fraction(chi(j, i));
    d.rows.push_back(std::move(row));
  }
  d.obj.resize(k);
  for (int i = 0; i < k; ++i) {
    auto r = lp::rationalize(tau(i));
    d.obj[i] = r.value;
    d.exact = d.exact && r.exact;
  }
  d.lp = lp::cone_minimize(d.rows, d.obj);
  d.lp.exact = d.lp.exact && d.exact;
  return d;
}

lp::Fraction frac_dot(const std::vector<lp::Fraction>& a, const std::vector<lp::Fraction>& b) {
  lp::Fraction s(0);
  for (size_t i = 0; i < a.size(); ++i) s = s + a[i] * b[i];
  return s;
}

// every optimal vertex annihilates every support weight (the optimal face
// lies inside the stabilizer algebra)
bool optimal_face_in_stabilizer(const TorusLpData& d) {
  for (const auto& vert : d.lp.optimal_vertices)
    for (const auto& row : d.rows)
      if (!frac_dot(row, vert).is_zero()) return false;
  return true;
}

bool only_zero_optimal(const TorusLpData& d) {
  for (const auto& vert : d.lp.optimal_vertices)
    for (const auto& x : vert)
      if (!x.is_zero()) return false;
  return true;
}

// relative-interior point of the optimal face: the vertex average. Scaled to
// sup-norm 1 when nonzero (homogeneity makes the scale irrelevant).
RVec optimal_face_interior(const TorusLpData& d) {
  const int k = d.obj.size() ? int(d.obj.size()) : 0;
  RVec s = RVec::Zero(k);
  for (const auto& vert : d.lp.optimal_vertices) s += frac_vec(vert);
  if (d.lp.optimal_vertices.empty()) return s;
  s /= double(d.lp.optimal_vertices.size());
  double m = s.size() ? s.cwiseAbs().maxCoeff() : 0.0;
  if (m > 1e-12) s /= m;
  return s;
}

GroupElement exp_group(const Symplectization& sp, const AlgebraElement& s) {
  if (sp.rep.kind == GroupKind::torus) {
    Vec d(s.tv.size());
    for (int i = 0; i < s.tv.size(); ++i) d(i) = std::exp(s.tv(i));
    return GroupElement::torus(d);
  }
  return GroupElement::gl(linalg::expm(s.gm));
}

// --- GL frame machinery ------------------------------------------------

struct FrameData {
  bool ok = false;
  Mat frame;             // unitary r x r
  Eigen::MatrixXi chi;   // n x r integer weights of the conjugated torus
  Vec coords;            // v in the joint eigenbasis
  Mat joint;             // unitary n x n joint eigenbasis
};

// Diagonalize the commuting Hermitian family sigma(k E_ii k^*) and read off
// the integer weights of the conjugated maximal torus.
FrameData frame_weights(const Symplectization& sp, const Mat& kframe, const Vec& v,
                        std::mt19937_64& rng) {
  FrameData fd;
  const int r = sp.rep.group_rank;
  const int n = sp.rep.ambient_dim;
  std::vector<Mat> cs;
  double scale = 1.0;
  for (int i = 0; i < r; ++i) {
    Mat e = kframe.col(i) * kframe.col(i).adjoint();  // k E_ii k^*
    Mat ci = sp.rep.algebra_matrix(AlgebraElement::gl(e));
    ci = linalg::herm_part(ci);
    scale = std::max(scale, ci.norm());
    cs.push_back(std::move(ci));
  }
  std::uniform_real_distribution<double> u(1.0, 2.0);
  for (int attempt = 0; attempt < 6; ++attempt) {
    Mat combo = Mat::Zero(n, n);
    for (int i = 0; i < r; ++i) combo += u(rng) * cs[i];
    Eigen::SelfAdjointEigenSolver<Mat> es(combo);
    Mat f = es.eigenvectors();
    Eigen::MatrixXi chi(n, r);
    double resid = 0.0;
    for (int i = 0; i < r; ++i) {
      Mat d = f.adjoint() * cs[i] * f;
      for (int q = 0; q < n; ++q) {
        double w = d(q, q).real();
        chi(q, i) = int(std::lround(w));
        resid = std::max(resid, std::abs(w - double(chi(q, i))));
      }
      Mat off = d;
      off.diagonal().setZero();
      resid = std::max(resid, off.norm());
    }
    if (resid <= 1e-7 * scale) {
      fd.ok = true;
      fd.frame = kframe;
      fd.chi = std::move(chi);
      fd.joint = f;
      fd.coords = f.adjoint() * v;
      return fd;
    }
  }
  return fd;
}

std::vector<Mat> candidate_frames(const Symplectization& sp, const Vec& v, int budget,
                                  std::mt19937_64& rng) {
  const int r = sp.rep.group_rank;
  std::vector<Mat> frames;
  frames.push_back(Mat::Identity(r, r));
  auto mu = moment_vector(sp, v);
  if (mu.direction.kind == GroupKind::gl && mu.norm > 0) {
    Eigen::SelfAdjointEigenSolver<Mat> es(mu.direction.gm);
    frames.push_back(es.eigenvectors());
  }
  int randoms = std::max(0, budget - int(frames.size()));
  for (int i = 0; i < randoms; ++i) frames.push_back(linalg::random_unitary(r, rng));
  return frames;
}

AlgebraElement frame_direction(const Mat& kframe, const RVec& diag) {
  Vec d = diag.cast<cx>();
  Mat s = kframe * d.asDiagonal() * kframe.adjoint();
  return AlgebraElement::gl(linalg::herm_part(s));
}

struct GlSearch {
  bool found = false;
  AlgebraElement s;           // verified destabilizer
  double value = 0.0;
  // best frame with LP optimum zero, for degeneration construction
  bool have_zero_frame = false;
  Mat zero_frame;
  RVec zero_direction;        // relative-interior optimal direction in that frame
  int zero_kills = -1;        // support weights strictly killed by it
};

GlSearch gl_frame_search(const Symplectization& sp, const Vec& v, int budget,
                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  GlSearch out;
  out.s = AlgebraElement::zero(GroupKind::gl, sp.rep.group_rank);
  const RVec tau_row = RVec::Constant(sp.rep.group_rank, sp.tau(0));
  for (const Mat& kf : candidate_frames(sp, v, budget, rng)) {
    auto fd = frame_weights(sp, kf, v, rng);
    if (!fd.ok) continue;
    bool indet = false;
    auto supp = support_indices(fd.coords, &indet);
    auto d = diag_lp(fd.chi, supp, tau_row);
    if (d.lp.min_value < lp::Fraction(0)) {
      RVec vert = frac_vec(d.lp.optimal_vertices.front());
      AlgebraElement s = frame_direction(kf, vert);
      auto mw = maximal_weight(sp, s, v);
      if (!mw.infinite && mw.value < 0 && (!out.found || mw.value < out.value)) {
        out.found = true;
        out.s = s;
        out.value = mw.value;
      }
      continue;
    }
    // LP optimum is zero: remember the frame whose optimal face kills the
    // largest set of support weights (degeneration quality)
    RVec interior = optimal_face_interior(d);
    int kills = 0;
    for (int j : supp) {
      double dot = 0.0;
      for (int i = 0; i < fd.chi.cols(); ++i) dot += double(fd.chi(j, i)) * interior(i);
      if (dot < -1e-9) ++kills;
    }
    if (kills > out.zero_kills) {
      out.zero_kills = kills;
      out.have_zero_frame = true;
      out.zero_frame = kf;
      out.zero_direction = interior;
    }
  }
  return out;
}

Verdict torus_verdict_impl(const Symplectization& sp, const Vec& v);

}  // namespace

Verdict analytic_verdict_torus(const Symplectization& sp, const Vec& v) {
  if (sp.rep.kind != GroupKind::torus)
    throw std::invalid_argument("analytic_verdict_torus: torus actions only");
  return torus_verdict_impl(sp, v);
}

namespace {

Verdict torus_verdict_impl(const Symplectization& sp, const Vec& v) {
  bool indet = false;
  auto supp = support_indices(v, &indet);
  if (indet)
    throw std::runtime_error(
        "indeterminate support: a coordinate lies in the threshold band");
  auto d = diag_lp(sp.rep.weights, supp, sp.tau);

  Verdict out;
  out.confidence = d.lp.exact ? Confidence::exact : Confidence::heuristic;

  if (d.lp.min_value < lp::Fraction(0)) {
    RVec vert = frac_vec(d.lp.optimal_vertices.front());
    AlgebraElement s = AlgebraElement::torus(vert.cast<cx>());
    auto mw = maximal_weight(sp, s, v);
    bool verified = !mw.infinite && mw.value < 0;
    if (verified) {
      out.level = Level::unstable;
      out.certificate = DestabilizerCert{s, mw.value};
      out.margin = -d.lp.min_value.to_double();
      return out;
    }
    if (d.lp.min_value.to_double() < -1e-9)
      throw std::logic_error("LP destabilizer failed re-verification");
    // rationalization dust: fall through and treat the optimum as zero
    out.confidence = Confidence::heuristic;
  }

  out.margin = std::abs(d.lp.min_value.to_double());
  bool poly = optimal_face_in_stabilizer(d);
  auto stab = stabilizer_algebra(sp.rep, v);

  if (poly) {
    bool stable = only_zero_optimal(d) && stab.g_v.empty();
    out.level = stable ? Level::stable : Level::polystable_not_stable;
    auto zs = find_zero_shift(sp, v);
    if (zs.ok) {
      out.certificate = ZeroMomentCert{exp_group(sp, zs.s0), zs.mu_norm};
    } else {
      out.certificate = AnalyticOnlyCert{"moment-zero shift failed: " + zs.failure, zs.mu_norm};
      out.confidence = Confidence::heuristic;
    }
    return out;
  }

  out.level = Level::semistable_not_polystable;
  auto dg = degeneration_certificate(sp, v);
  if (dg.ok) {
    out.certificate = dg.cert;
  } else {
    out.certificate = AnalyticOnlyCert{"degeneration construction failed: " + dg.failure, 0.0};
    out.confidence = Confidence::heuristic;
  }
  return out;
}

}  // namespace

Verdict analytic_verdict_gl(const Symplectization& sp, const Vec& v, int budget,
                            std::uint64_t seed) {
  if (sp.rep.kind != GroupKind::gl)
    throw std::invalid_argument("analytic_verdict_gl: gl actions only");
  auto search = gl_frame_search(sp, v, budget, seed);

  Verdict out;
  if (search.found) {
    out.level = Level::unstable;
    out.certificate = DestabilizerCert{search.s, search.value};
    out.confidence = Confidence::exact;  // a verified destabilizer is a proof
    out.margin = -search.value;
    return out;
  }

  auto fr = kn_descent(sp, v);
  switch (fr.classification) {
    case FlowClass::reached_zero: {
      auto stab = stabilizer_algebra(sp.rep, v);
      out.level = stab.g_v.empty() ? Level::stable : Level::polystable_not_stable;
      auto zs = find_zero_shift(sp, v);
      if (zs.ok) {
        out.certificate = ZeroMomentCert{exp_group(sp, zs.s0), zs.mu_norm};
        out.confidence = Confidence::exact;
      } else {
        out.certificate = AnalyticOnlyCert{"moment-zero shift failed: " + zs.failure, zs.mu_norm};
        out.confidence = Confidence::heuristic;
      }
      out.margin = fr.mu_final;
      return out;
    }
    case FlowClass::degenerating: {
      out.level = Level::semistable_not_polystable;
      auto dg = degeneration_certificate(sp, v);
      if (dg.ok) {
        out.certificate = dg.cert;
        out.confidence = Confidence::exact;
      } else {
        out.certificate =
            AnalyticOnlyCert{"degeneration construction failed: " + dg.failure, fr.mu_min};
        out.confidence = Confidence::heuristic;
      }
      out.margin = fr.mu_min;
      return out;
    }
    case FlowClass::stalled_positive:
      out.level = Level::unstable;
      out.certificate = AnalyticOnlyCert{
          "moment norm stalls at a positive value along descent; no frame destabilizer found",
          fr.mu_final};
      out.confidence = Confidence::heuristic;
      out.margin = fr.mu_final;
      return out;
    case FlowClass::inconclusive:
      out.level = Level::semistable_not_polystable;
      out.certificate = AnalyticOnlyCert{"descent inconclusive within budget", fr.mu_min};
      out.confidence = Confidence::heuristic;
      out.margin = fr.mu_min;
      return out;
  }
  return out;
}

Verdict analytic_verdict(const Symplectization& sp, const Vec& v, int budget,
                         std::uint64_t seed) {
  return sp.rep.kind == GroupKind::torus ? analytic_verdict_torus(sp, v)
                                         : analytic_verdict_gl(sp, v, budget, seed);
}

DestabResult destabilizer_search(const Symplectization& sp, const Vec& v, int budget,
                                 std::uint64_t seed) {
  DestabResult out;
  out.s = AlgebraElement::zero(sp.rep.kind, sp.rep.group_rank);
  if (sp.rep.kind == GroupKind::torus) {
    bool indet = false;
    auto supp = support_indices(v, &indet);
    auto d = diag_lp(sp.rep.weights, supp, sp.tau);
    out.exact = d.lp.exact;
    if (d.lp.min_value < lp::Fraction(0)) {
      RVec vert = frac_vec(d.lp.optimal_vertices.front());
      AlgebraElement s = AlgebraElement::torus(vert.cast<cx>());
      auto mw = maximal_weight(sp, s, v);
      if (!mw.infinite && mw.value < 0) {
        out.s = s;
        out.value = mw.value;
      }
    }
    return out;
  }
  auto search = gl_frame_search(sp, v, budget, seed);
  if (search.found) {
    out.s = search.s;
    out.value = search.value;
  }
  return out;
}

DegenResult degeneration_certificate(const Symplectization& sp, const Vec& v) {
  DegenResult out;
  out.cert.s_m = AlgebraElement::zero(sp.rep.kind, sp.rep.group_rank);
  out.cert.s0 = AlgebraElement::zero(sp.rep.kind, sp.rep.group_rank);
  out.cert.y = v;

  auto mu0 = moment_vector(sp, v);
  if (mu0.norm <= tols::mu_zero) {  // already a zero of the moment map
    out.ok = true;
    out.cert.mu_norm = mu0.norm;
    return out;
  }

  AlgebraElement s_m = AlgebraElement::zero(sp.rep.kind, sp.rep.group_rank);
  if (sp.rep.kind == GroupKind::torus) {
    bool indet = false;
    auto supp = support_indices(v, &indet);
    auto d = diag_lp(sp.rep.weights, supp, sp.tau);
    if (d.lp.min_value < lp::Fraction(0)) {
      out.failure = "input is not semistable";
      RVec vert = frac_vec(d.lp.optimal_vertices.front());
      AlgebraElement s = AlgebraElement::torus(vert.cast<cx>());
      auto mw = maximal_weight(sp, s, v);
      if (!mw.infinite && mw.value < 0) out.destabilizer = DestabilizerCert{s, mw.value};
      return out;
    }
    s_m = AlgebraElement::torus(optimal_face_interior(d).cast<cx>());
  } else {
    auto search = gl_frame_search(sp, v, 32, 1);
    if (search.found) {
      out.failure = "input is not semistable";
      out.destabilizer = DestabilizerCert{search.s, search.value};
      return out;
    }
    if (!search.have_zero_frame) {
      out.failure = "no diagonalizable frame produced a weight-zero admissible direction";
      return out;
    }
    s_m = frame_direction(search.zero_frame, search.zero_direction);
  }

  // condition: the maximal weight along s_m vanishes
  auto mw = maximal_weight(sp, s_m, v);
  if (mw.infinite || std::abs(mw.value) > 1e-9 * std::max(1.0, std::abs(mw.value))) {
    out.failure = "maximal weight along the chosen direction does not vanish";
    return out;
  }
  // condition: the limit along s_m exists
  auto lim = limit_point(sp, s_m, v);
  if (!lim.value) {
    out.failure = "limit along the chosen direction does not exist";
    return out;
  }
  Vec y = *lim.value;
  // condition: a commuting shift brings the limit to a zero of the moment map
  auto zs = find_zero_shift(sp, y);
  if (!zs.ok) {
    out.failure = "limit point admits no moment-zero shift: " + zs.failure;
    return out;
  }
  double scale = std::max(1.0, s_m.norm() * std::max(1.0, zs.s0.norm()));
  if (s_m.bracket(zs.s0).norm() > 1e-8 * scale) {
    out.failure = "shift does not commute with the degenerating direction";
    return out;
  }
  Vec shifted = act(sp.rep, zs.s0, 1.0, y).value;
  double mu_final = moment_vector(sp, shifted).norm;
  if (mu_final > 10.0 * tols::mu_zero) {
    out.failure = "moment map does not vanish at the shifted limit";
    return out;
  }

  out.ok = true;
  out.cert.s_m = s_m;
  out.cert.y = y;
  out.cert.s0 = zs.s0;
  out.cert.mu_norm = mu_final;
  return out;
}

StabilizerWeightReport stabilizer_weight_check(const Symplectization& sp, const Vec& v) {
  StabilizerWeightReport rep;
  auto stab = stabilizer_algebra(sp.rep, v);
  if (stab.k_v.empty()) {
    rep.vacuous = true;
    return rep;
  }
  double tau_scale = 1.0 + sp.tau.cwiseAbs().maxCoeff();
  for (const auto& b : stab.k_v) {
    // i k_v consists exactly of the Hermitian stabilizer directions
    AlgebraElement h = b.kind == GroupKind::torus
                           ? AlgebraElement::torus(cx(0, 1) * b.tv)
                           : AlgebraElement::gl(cx(0, 1) * b.gm);
    double n = h.norm();
    if (n < 1e-12) continue;
    h = h * (1.0 / n);
    auto mw = maximal_weight(sp, h, v);
    double val = mw.infinite ? std::numeric_limits<double>::infinity() : std::abs(mw.value);
    rep.max_abs = std::max(rep.max_abs, val);
  }
  rep.pass = rep.max_abs <= 1e-8 * tau_scale;
  return rep;
}

std::optional<std::string> verify_certificate(const Symplectization& sp, const Vec& v,
                                              const Verdict& verdict, double tol) {
  if (const auto* c = std::get_if<DestabilizerCert>(&verdict.certificate)) {
    if (!c->s.is_hermitian(1e-8)) return "destabilizer direction is not Hermitian";
    auto mw = maximal_weight(sp, c->s, v);
    if (mw.infinite) return "destabilizer direction has infinite weight";
    if (mw.value >= 0) return "destabilizer weight is nonnegative";
    if (std::abs(mw.value - c->weight) > tol * std::max(1.0, std::abs(c->weight)))
      return "destabilizer weight mismatch on re-evaluation";
    return std::nullopt;
  }
  if (const auto* c = std::get_if<ZeroMomentCert>(&verdict.certificate)) {
    Vec w = sp.rep.apply_group(c->g, v);
    double n = moment_vector(sp, w).norm;
    if (n > std::max(tol, 10.0 * tols::mu_zero))
      return "moment map does not vanish at the certified group translate";
    return std::nullopt;
  }
  if (const auto* c = std::get_if<DegenerationCert>(&verdict.certificate)) {
    auto mw = maximal_weight(sp, c->s_m, v);
    if (mw.infinite || std::abs(mw.value) > tol) return "weight along s_m does not vanish";
    auto lim = limit_point(sp, c->s_m, v);
    if (!lim.value) return "limit along s_m does not exist";
    if ((*lim.value - c->y).norm() > tol * std::max(1.0, c->y.norm()))
      return "limit point mismatch on re-evaluation";
    double scale = std::max(1.0, c->s_m.norm() * std::max(1.0, c->s0.norm()));
    if (c->s_m.bracket(c->s0).norm() > 1e-8 * scale) return "s_m and s0 do not commute";
    Vec shifted = act(sp.rep, c->s0, 1.0, c->y).value;
    if (moment_vector(sp, shifted).norm > std::max(tol, 10.0 * tols::mu_zero))
      return "moment map does not vanish at the shifted limit";
    return std::nullopt;
  }
  return std::nullopt;  // analytic-only data carries no re-checkable claim
}

}  // namespace knstab
