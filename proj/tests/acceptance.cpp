// Acceptance gate: one line of output per criterion, nonzero exit on any
// failure. argv[1] names the directory holding the frozen gallery verdicts;
// pass --freeze as argv[2] to regenerate that file from the current engines.
#include "knstab/harness.hpp"

#include "test_util.hpp"

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include <unsupported/Eigen/MatrixFunctions>

using namespace knstab;
using nlohmann::ordered_json;
using testutil::adaptive_simpson;
using testutil::random_hermitian;
using testutil::random_matrix;
using testutil::random_vector;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void fail(const std::string& why) {
    pass = false;
    if (detail.empty()) detail = why;
  }
};

bool report(int id, const std::string& name, double budget_s,
            const std::function<void(Outcome&)>& fn) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    fn(out);
  } catch (const std::exception& e) {
    out.fail(std::string("exception: ") + e.what());
  }
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > budget_s)
    out.fail("runtime " + std::to_string(secs) + "s exceeds budget " + std::to_string(budget_s) +
             "s");
  std::printf("criterion %d (%s): %s [%.1fs]%s%s\n", id, name.c_str(),
              out.pass ? "PASS" : "FAIL", secs, out.detail.empty() ? "" : " -- ",
              out.detail.c_str());
  return out.pass;
}

// --- shared samplers ------------------------------------------------------

Symplectization random_torus_sp(std::mt19937_64& rng, int max_k = 3, int max_n = 6,
                                int bound = 4) {
  std::uniform_int_distribution<int> kd(1, max_k), nd(2, max_n), wd(-bound, bound), td(-1, 1);
  int k = kd(rng), n = nd(rng);
  Eigen::MatrixXi chi(n, k);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < k; ++j) chi(i, j) = wd(rng);
  RVec tau(k);
  for (int j = 0; j < k; ++j) tau(j) = double(td(rng));
  return Symplectization::make(Representation::torus_weights(chi), tau);
}

Symplectization random_gl_sp(std::mt19937_64& rng, int max_r = 3) {
  std::uniform_int_distribution<int> pick(0, 3), td(-1, 1);
  Representation rep;
  switch (pick(rng)) {
    case 0: rep = Representation::gl_standard(2 + int(rng() % std::uint64_t(max_r - 1))); break;
    case 1: rep = Representation::gl_sym(2 + int(rng() % 3)); break;
    case 2: rep = Representation::gl_adjoint(2); break;
    default: rep = Representation::gl_standard(2); break;
  }
  RVec tau(1);
  tau << double(td(rng));
  return Symplectization::make(rep, tau);
}

AlgebraElement random_direction(const Symplectization& sp, std::mt19937_64& rng,
                                double scale = 0.7) {
  if (sp.rep.kind == GroupKind::torus) {
    std::normal_distribution<double> g(0.0, scale);
    Vec s(sp.rep.group_rank);
    for (int i = 0; i < sp.rep.group_rank; ++i) s(i) = cx(g(rng), 0.0);
    return AlgebraElement::torus(s);
  }
  return AlgebraElement::gl(random_hermitian(sp.rep.group_rank, rng, scale));
}

// well-conditioned invertible conjugator: exp of a small element
Mat mild_invertible(int n, std::mt19937_64& rng, double scale = 0.3) {
  return Mat(random_matrix(n, rng, scale).exp());
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

// --- criterion 1 ----------------------------------------------------------
// The derivative of the weight function t -> mu-pairing(e^{ts} v) is the
// squared gradient norm, and the derivative of Psi along e^{ts} is that same
// pairing. Both checked by central differences on random samples.
void criterion1(Outcome& out) {
  std::mt19937_64 rng(101);
  const double h = 1e-5;
  for (int trial = 0; trial < 100; ++trial) {
    Symplectization sp = trial % 2 == 0 ? random_torus_sp(rng) : random_gl_sp(rng);
    AlgebraElement s = random_direction(sp, rng);
    Vec v = random_vector(sp.rep.ambient_dim, rng);
    auto lam = [&](double t) {
      return moment_pairing(sp, s, act(sp.rep, s, t, v).value);
    };
    for (double t : {-0.3, 0.1, 0.6}) {
      double fd_lam = (lam(t + h) - lam(t - h)) / (2.0 * h);
      Vec w = act(sp.rep, s, t, v).value;
      double grad2 = sp.rep.apply(s, w).squaredNorm();
      if (rel_err(fd_lam, grad2) > 1e-6)
        out.fail("weight-derivative identity off at trial " + std::to_string(trial));

      double fd_psi =
          (kempf_ness(sp, s, t + h, v) - kempf_ness(sp, s, t - h, v)) / (2.0 * h);
      if (rel_err(fd_psi, lam(t)) > 1e-7)
        out.fail("functional-derivative identity off at trial " + std::to_string(trial));
    }
    if (!out.pass) return;
  }
}

// --- criterion 2 ----------------------------------------------------------
// Closed forms against adaptive quadrature. Directions are drawn on a 1/4
// grid so surviving decay rates are bounded away from zero and the infinite
// integral is captured on a finite window. Infinite weights are confirmed by
// super-linear growth of the weight function.
void criterion2(Outcome& out) {
  std::mt19937_64 rng(202);
  auto snap = [](double x) {
    double g = std::round(4.0 * x) / 4.0;
    return g == 0.0 && x != 0.0 ? (x > 0 ? 0.25 : -0.25) : g;
  };
  int finite_checked = 0, infinite_confirmed = 0;
  while (finite_checked < 100) {
    Symplectization sp = rng() % 2 == 0 ? random_torus_sp(rng) : random_gl_sp(rng);
    AlgebraElement s = random_direction(sp, rng);
    if (sp.rep.kind == GroupKind::torus) {
      for (int i = 0; i < s.tv.size(); ++i) s.tv(i) = snap(s.tv(i).real());
    } else {
      Eigen::SelfAdjointEigenSolver<Mat> es(s.gm);
      RVec d = es.eigenvalues();
      for (int i = 0; i < d.size(); ++i) d(i) = snap(d(i));
      s.gm = es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
      s.gm = linalg::herm_part(s.gm);
    }
    Vec v = random_vector(sp.rep.ambient_dim, rng);
    auto lam = [&](double t) { return moment_pairing(sp, s, act(sp.rep, s, t, v).value); };
    auto grad2 = [&](double t) {
      return sp.rep.apply(s, act(sp.rep, s, t, v).value).squaredNorm();
    };
    auto mw = maximal_weight(sp, s, v);
    if (mw.determinacy != Determinacy::determinate) continue;
    if (mw.infinite) {
      double early = (lam(2.0) - lam(0.0)) / 2.0;
      double late = (lam(20.0) - lam(18.0)) / 2.0;
      if (!(late > 4.0 * std::abs(early) + 1.0))
        out.fail("infinite weight without super-linear growth");
      ++infinite_confirmed;
      continue;
    }
    ++finite_checked;
    // energy: integral of the squared gradient from 0 to infinity
    auto en = energy(sp, s, v);
    if (en.infinite) {
      out.fail("finite weight but infinite energy");
      return;
    }
    double quad = adaptive_simpson(grad2, 0.0, 60.0, 1e-11);
    if (rel_err(en.value, quad) > 1e-7) out.fail("energy disagrees with quadrature");
    // Psi(T) as the integral of the weight function
    double T = 1.5;
    double psi_quad = adaptive_simpson(lam, 0.0, T, 1e-11);
    if (rel_err(kempf_ness(sp, s, T, v), psi_quad) > 1e-7)
      out.fail("functional disagrees with quadrature");
    if (!out.pass) return;
  }
  if (infinite_confirmed == 0) out.fail("no infinite-weight samples drawn");
}

// --- criterion 3 ----------------------------------------------------------
// Structure of the weight: positive homogeneity, unitary equivariance,
// invariance under the associated parabolic, invariance of the direction
// class under unipotent transits, and independence of the diagonalizing
// representative.
void criterion3(Outcome& out) {
  std::mt19937_64 rng(303);
  const double tol = 1e-8;

  for (int trial = 0; trial < 100; ++trial) {  // homogeneity
    Symplectization sp = trial % 2 == 0 ? random_torus_sp(rng) : random_gl_sp(rng);
    AlgebraElement s = random_direction(sp, rng);
    Vec v = random_vector(sp.rep.ambient_dim, rng);
    double c = 0.5 + double(rng() % 7);
    auto a = maximal_weight(sp, s, v);
    auto b = maximal_weight(sp, s * c, v);
    if (a.infinite != b.infinite) out.fail("homogeneity breaks the infinite branch");
    if (!a.infinite && rel_err(b.value, c * a.value) > tol) out.fail("homogeneity off");
    if (!out.pass) return;
  }

  for (int trial = 0; trial < 100; ++trial) {  // unitary equivariance
    Symplectization sp = random_gl_sp(rng);
    const int r = sp.rep.group_rank;
    AlgebraElement s = random_direction(sp, rng);
    Vec v = random_vector(sp.rep.ambient_dim, rng);
    Eigen::HouseholderQR<Mat> qr(random_matrix(r, rng));
    Mat k = Mat(qr.householderQ());
    auto a = maximal_weight(sp, s, v);
    auto b = maximal_weight(sp, AlgebraElement::gl(k * s.gm * k.adjoint()),
                            sp.rep.apply_group(GroupElement::gl(k), v));
    if (a.infinite != b.infinite || (!a.infinite && rel_err(b.value, a.value) > tol)) {
      out.fail("unitary equivariance off");
      return;
    }
  }

  for (int trial = 0; trial < 100; ++trial) {  // parabolic invariance
    Symplectization sp = random_gl_sp(rng);
    AlgebraElement s = random_direction(sp, rng);
    Vec v = random_vector(sp.rep.ambient_dim, rng);
    auto tri = parabolic_triple(classify_or_throw(s));
    std::normal_distribution<double> g(0.0, 0.3);
    Mat a = Mat::Zero(s.gm.rows(), s.gm.cols());
    for (const auto& b : tri.g_alg) a += cx(g(rng), g(rng)) * b.gm;
    Vec gv = sp.rep.apply_group(GroupElement::gl(Mat(a.exp())), v);
    auto lhs = maximal_weight(sp, s, gv);
    auto rhs = maximal_weight(sp, s, v);
    if (lhs.infinite != rhs.infinite ||
        (!lhs.infinite && rel_err(lhs.value, rhs.value) > tol)) {
      out.fail("parabolic invariance off");
      return;
    }
  }

  for (int trial = 0; trial < 100; ++trial) {  // transit invariance of the class
    Symplectization sp = random_gl_sp(rng);
    const int r = sp.rep.group_rank;
    std::uniform_int_distribution<int> val(-2, 2);
    Vec d(r);
    for (int i = 0; i < r; ++i) d(i) = double(val(rng));
    Mat p = mild_invertible(r, rng);
    auto s = classify_or_throw(AlgebraElement::gl(p * d.asDiagonal() * p.inverse()));
    auto tri = parabolic_triple(s);
    std::normal_distribution<double> g(0.0, 0.3);
    Mat u = Mat::Identity(r, r);
    for (const auto& b : tri.u_alg) u += cx(g(rng), g(rng)) * b.gm;
    auto sigma = classify_or_throw(AlgebraElement::gl(u * s.raw.gm * u.inverse()));
    Vec v = random_vector(sp.rep.ambient_dim, rng);
    auto a = maximal_weight_general(sp, s, v);
    auto b = maximal_weight_general(sp, sigma, v);
    if (a.infinite != b.infinite || (!a.infinite && rel_err(b.value, a.value) > tol)) {
      out.fail("transit invariance off");
      return;
    }
  }

  for (int trial = 0; trial < 100; ++trial) {  // representative independence
    Symplectization sp = random_gl_sp(rng);
    const int r = sp.rep.group_rank;
    AlgebraElement s = random_direction(sp, rng);
    Mat gamma = mild_invertible(r, rng);
    Vec v = random_vector(sp.rep.ambient_dim, rng);
    auto a = maximal_weight(sp, s, v);
    auto conj = classify_or_throw(AlgebraElement::gl(gamma * s.gm * gamma.inverse()));
    auto b = maximal_weight_general(sp, conj, sp.rep.apply_group(GroupElement::gl(gamma), v));
    if (a.infinite != b.infinite || (!a.infinite && rel_err(b.value, a.value) > tol)) {
      out.fail("representative independence off");
      return;
    }
  }
}

// --- criterion 4 ----------------------------------------------------------
// Algebra of the direction cone in gl(r), r <= 4: retraction soundness,
// unipotent transit round-trips, projection onto the compact orbit, and the
// polar fixed-point property.
void criterion4(Outcome& out) {
  std::mt19937_64 rng(404);
  std::uniform_int_distribution<int> rd(2, 4), val(-2, 2);

  auto sample_htype = [&](int r) {
    Vec d(r);
    for (int i = 0; i < r; ++i) d(i) = double(val(rng));
    Mat p = mild_invertible(r, rng);
    return classify_or_throw(AlgebraElement::gl(p * d.asDiagonal() * p.inverse()));
  };

  for (int trial = 0; trial < 100; ++trial) {  // retraction
    auto s = sample_htype(rd(rng));
    auto r0 = retract_to_compact(s);
    if (!equiv(s, r0, 1e-6)) out.fail("retraction leaves the class");
    if (!r0.raw.is_hermitian(1e-8)) out.fail("retraction not Hermitian");
    auto r1 = retract_to_compact(r0);
    if ((r1.raw.gm - r0.raw.gm).norm() > 1e-8 * std::max(1.0, r0.raw.gm.norm()))
      out.fail("retraction not idempotent");
    if (!out.pass) return;
  }

  for (int trial = 0; trial < 100; ++trial) {  // transit round-trip
    const int r = rd(rng);
    auto s = sample_htype(r);
    auto tri = parabolic_triple(s);
    std::normal_distribution<double> g(0.0, 0.3);
    Mat u = Mat::Identity(r, r);
    for (const auto& b : tri.u_alg) u += cx(g(rng), g(rng)) * b.gm;
    auto sigma = classify_or_throw(AlgebraElement::gl(u * s.raw.gm * u.inverse()));
    auto u2 = find_unipotent(s, sigma);
    if (!u2) {
      out.fail("transit not recovered");
      return;
    }
    double scale = std::max(1.0, s.raw.gm.norm());
    if ((*u2 * s.raw.gm * u2->inverse() - sigma.raw.gm).norm() > 1e-10 * scale) {
      out.fail("transit round-trip residual above 1e-10");
      return;
    }
  }

  for (int trial = 0; trial < 100; ++trial) {  // compact-orbit projection
    const int r = rd(rng);
    Mat h = random_hermitian(r, rng);
    Mat g = mild_invertible(r, rng);
    auto cls = classify_hermitian_type(AlgebraElement::gl(g * h * g.inverse()));
    auto* ok = std::get_if<HermitianTypeElement>(&cls);
    if (!ok) continue;  // borderline sample
    auto proj = retract_to_compact(*ok);
    Eigen::SelfAdjointEigenSolver<Mat> e1(h), e2(proj.raw.gm);
    if ((e1.eigenvalues() - e2.eigenvalues()).cwiseAbs().maxCoeff() >
        1e-7 * std::max(1.0, h.norm())) {
      out.fail("compact projection changes the spectrum");
      return;
    }
  }

  for (int trial = 0; trial < 100; ++trial) {  // polar fixed point
    const int r = rd(rng);
    Mat s = random_hermitian(r, rng);
    std::normal_distribution<double> g(0.0, 0.4);
    // an element commuting with s: exponential of a polynomial in s
    Mat a = cx(g(rng), g(rng)) * Mat::Identity(r, r) + cx(g(rng), g(rng)) * s +
            cx(g(rng), g(rng)) * s * s;
    Mat grp = a.exp();
    auto pd = polar_decompose(grp);
    if (!pd) {
      out.fail("polar decomposition failed on an invertible element");
      return;
    }
    double scale = std::max(1.0, s.norm());
    if ((pd->k_part * s - s * pd->k_part).norm() > 1e-8 * scale * pd->k_part.norm() ||
        (pd->h_part * s - s * pd->h_part).norm() > 1e-8 * scale * pd->h_part.norm()) {
      out.fail("polar factors do not commute with the fixed direction");
      return;
    }
  }
}

// --- criteria 5 and 6 share the generated suite ---------------------------

struct SuiteStats {
  int instances = 0, points = 0;
  int disagreements = 0, inconclusive = 0, cert_failures = 0;
  int degen_failures = 0, destab_failures = 0;
  int reductivity_violations = 0, commutant_violations = 0;
  int stabweight_violations = 0, convexity_violations = 0;
};

SuiteStats run_suite() {
  SuiteStats st;
  RandomParams params;  // k <= 3, n <= 6, |weights| <= 5, tau in {-1,0,1}
  auto suite = generate_random(2026, params);
  st.instances = int(suite.size());
  for (const auto& inst : suite) {
    auto sp = inst.symplectization();
    auto rep = compare(inst);
    if (!rep.all_agree) ++st.disagreements;
    if (rep.any_inconclusive) ++st.inconclusive;
    if (!rep.certificates_ok) ++st.cert_failures;
    for (size_t pi = 0; pi < inst.points.size(); ++pi) {
      const Vec& v = inst.points[pi].second;
      const Verdict& verdict = rep.points[pi].analytic.verdict;
      ++st.points;
      if (is_semistable(verdict.level)) {
        auto dg = degeneration_certificate(sp, v);
        if (!dg.ok)
          ++st.degen_failures;
        else {
          // every moment-map zero the construction reaches must have a
          // reductive stabilizer
          Vec y = act(sp.rep, dg.cert.s0, 1.0, dg.cert.y).value;
          if (!stabilizer_algebra(sp.rep, y).reductive) ++st.reductivity_violations;
        }
        if (!stabilizer_weight_check(sp, v).pass) ++st.stabweight_violations;
      } else {
        auto ds = destabilizer_search(sp, v);
        if (!(ds.exact && ds.value < -1e-9)) ++st.destab_failures;
        auto mw = maximal_weight(sp, ds.s, v);
        if (mw.infinite || mw.value > -1e-9) ++st.destab_failures;
      }
    }
  }
  return st;
}

SuiteStats* suite_stats() {
  static SuiteStats st = run_suite();
  return &st;
}

void criterion5(Outcome& out) {
  auto* st = suite_stats();
  if (st->instances != 200) out.fail("suite size is not 200");
  if (st->disagreements) out.fail(std::to_string(st->disagreements) + " engine disagreements");
  if (st->inconclusive) out.fail(std::to_string(st->inconclusive) + " inconclusive instances");
  if (st->cert_failures) out.fail(std::to_string(st->cert_failures) + " certificate failures");
  if (st->degen_failures)
    out.fail(std::to_string(st->degen_failures) + " semistable points without degeneration data");
  if (st->destab_failures)
    out.fail(std::to_string(st->destab_failures) + " unstable points without a destabilizer");
}

void criterion6(Outcome& out) {
  auto* st = suite_stats();
  if (st->reductivity_violations)
    out.fail(std::to_string(st->reductivity_violations) + " non-reductive moment-zero stabilizers");
  if (st->stabweight_violations)
    out.fail(std::to_string(st->stabweight_violations) + " nonvanishing stabilizer weights");

  // commutant membership of the moment image, checked on matrix actions where
  // the bracket is nontrivial
  std::mt19937_64 rng(606);
  for (const auto& inst : gallery()) {
    if (inst.rep.kind != GroupKind::gl) continue;
    auto sp = inst.symplectization();
    for (const auto& [name, v] : inst.points) {
      auto mu = moment_vector(sp, v);
      auto stab = stabilizer_algebra(sp.rep, v);
      for (const auto& b : stab.k_v) {
        Mat bracket = mu.direction.gm * b.gm - b.gm * mu.direction.gm;
        if (bracket.norm() > 1e-8 * std::max(1.0, mu.direction.gm.norm()))
          ++st->commutant_violations;
      }
    }
  }
  if (st->commutant_violations)
    out.fail(std::to_string(st->commutant_violations) + " moment images outside the commutant");

  // geodesic convexity of the functional: nonnegative second differences,
  // equivalently a nondecreasing weight function
  for (int trial = 0; trial < 100; ++trial) {
    Symplectization sp = trial % 2 == 0 ? random_torus_sp(rng) : random_gl_sp(rng);
    AlgebraElement s = random_direction(sp, rng);
    Vec v = random_vector(sp.rep.ambient_dim, rng);
    auto psi = [&](double t) { return kempf_ness(sp, s, t, v); };
    auto lam = [&](double t) { return moment_pairing(sp, s, act(sp.rep, s, t, v).value); };
    for (double t : {-0.5, 0.0, 0.5}) {
      double dd = psi(t + 0.25) - 2.0 * psi(t) + psi(t - 0.25);
      if (dd < -1e-8 * std::max(1.0, std::abs(psi(t)))) ++st->convexity_violations;
      if (lam(t + 0.25) < lam(t) - 1e-8 * std::max(1.0, std::abs(lam(t))))
        ++st->convexity_violations;
    }
  }
  if (st->convexity_violations)
    out.fail(std::to_string(st->convexity_violations) + " convexity violations");
}

// --- criterion 7 ----------------------------------------------------------

std::string gallery_report_text() {
  ordered_json all = ordered_json::array();
  for (const auto& inst : gallery())
    all.push_back(ordered_json::parse(serialize_report(compare(inst))));
  return all.dump(2) + "\n";
}

void criterion7(Outcome& out, const std::string& goldens_dir, bool freeze) {
  std::string text = gallery_report_text();
  std::string path = goldens_dir + "/gallery_verdicts.json";
  if (freeze) {
    std::ofstream f(path);
    f << text;
    out.detail = "goldens frozen to " + path;
  } else {
    std::ifstream f(path);
    if (!f) {
      out.fail("missing goldens file " + path);
      return;
    }
    std::ostringstream ss;
    ss << f.rdbuf();
    if (ss.str() != text) out.fail("gallery reports differ from the frozen goldens");
  }

  auto doc = ordered_json::parse(text);
  auto verdict_of = [&](const std::string& id, const std::string& point) -> std::string {
    for (const auto& inst : doc) {
      if (inst["instance"] != id) continue;
      for (const auto& p : inst["points"])
        if (p["point"] == point) return p["analytic"]["verdict"].get<std::string>();
    }
    return "<missing>";
  };
  // the central-shift sweep crosses all three coarse classes
  std::set<std::string> sweep = {verdict_of("B_minus", "unit"), verdict_of("B_zero", "unit"),
                                 verdict_of("B_plus", "unit")};
  if (sweep != std::set<std::string>{"stable", "semistable_not_polystable", "unstable"})
    out.fail("central-shift sweep does not cross the three classes");
  if (verdict_of("A", "balanced") != "stable" ||
      verdict_of("A", "first_only") != "semistable_not_polystable" ||
      verdict_of("A", "origin") != "polystable_not_stable")
    out.fail("reference instance A misclassified");
}

}  // namespace

int main(int argc, char** argv) {
  std::string goldens_dir = argc > 1 ? argv[1] : "tests/goldens";
  bool freeze = argc > 2 && std::string(argv[2]) == "--freeze";

  bool ok = true;
  ok &= report(1, "derivative identities along one-parameter orbits", 10.0, criterion1);
  ok &= report(2, "closed forms against adaptive quadrature", 30.0, criterion2);
  ok &= report(3, "weight-function structure under conjugation", 60.0, criterion3);
  ok &= report(4, "direction-cone algebra round-trips", 60.0, criterion4);
  ok &= report(5, "engine agreement on the generated suite", 300.0, criterion5);
  ok &= report(6, "structural invariants on the suite", 60.0, criterion6);
  ok &= report(7, "gallery regression against frozen goldens", 60.0,
               [&](Outcome& out) { criterion7(out, goldens_dir, freeze); });
  return ok ? 0 : 1;
}
