#include "knstab/momentum.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace knstab {

namespace {

void require_hermitian(const AlgebraElement& s) {
  if (!s.is_hermitian(1e-9))
    throw std::invalid_argument("expected a Hermitian direction (element of i k)");
}

double support_threshold(const Vec& v) { return tols::support_lo * std::max(1e-300, v.norm()); }
double support_band(const Vec& v) { return tols::support_hi * std::max(1e-300, v.norm()); }

}  // namespace

Symplectization Symplectization::make(Representation r, RVec t) {
  Symplectization sp;
  sp.rep = std::move(r);
  if (sp.rep.kind == GroupKind::torus) {
    if (t.size() != sp.rep.group_rank)
      throw std::invalid_argument("tau must have torus rank entries");
  } else if (t.size() != 1) {
    throw std::invalid_argument("gl tau is a single central scalar");
  }
  sp.tau = std::move(t);
  return sp;
}

double Symplectization::tau_pairing(const AlgebraElement& s) const {
  if (rep.kind == GroupKind::torus) {
    double acc = 0.0;
    for (int i = 0; i < tau.size(); ++i) acc += tau(i) * s.tv(i).real();
    return acc;
  }
  return tau(0) * s.gm.trace().real();  // <tau I, s> with the trace pairing
}

WeightDecomp weight_decompose(const Symplectization& sp, const AlgebraElement& s_herm,
                              const Vec& v) {
  require_hermitian(s_herm);
  WeightDecomp d;
  Mat m = sp.rep.algebra_matrix(s_herm);
  Eigen::SelfAdjointEigenSolver<Mat> es(linalg::herm_part(m));
  RVec eig = es.eigenvalues();
  d.frame = es.eigenvectors();
  d.op_scale = std::max(1.0, eig.cwiseAbs().maxCoeff());
  Vec w = d.frame.adjoint() * v;
  // cluster ascending eigenvalues
  int i = 0;
  const int n = int(eig.size());
  while (i < n) {
    int j = i;
    while (j + 1 < n && eig(j + 1) - eig(j) <= tols::eig_cluster * d.op_scale) ++j;
    double eta = eig.segment(i, j - i + 1).mean();
    Vec comp = Vec::Zero(n);
    for (int c = i; c <= j; ++c) comp += w(c) * Vec(d.frame.col(c));
    d.eigenvalues.push_back(eta);
    d.components.push_back(comp);
    i = j + 1;
  }
  return d;
}

double moment_pairing(const Symplectization& sp, const AlgebraElement& s_herm, const Vec& v) {
  require_hermitian(s_herm);
  Vec sv = sp.rep.apply(s_herm, v);
  double quad = 0.5 * (v.adjoint() * sv)(0, 0).real();
  return quad + sp.tau_pairing(s_herm);
}

MomentVector moment_vector(const Symplectization& sp, const Vec& v) {
  MomentVector mv;
  if (sp.rep.kind == GroupKind::torus) {
    const int k = sp.rep.group_rank;
    Vec m = Vec::Zero(k);
    for (int i = 0; i < k; ++i) {
      double acc = sp.tau(i);
      for (int j = 0; j < sp.rep.ambient_dim; ++j)
        acc += 0.5 * double(sp.rep.weights(j, i)) * std::norm(v(j));
      m(i) = acc;
    }
    mv.direction = AlgebraElement::torus(m);
    mv.norm = m.norm();
    return mv;
  }
  const int r = sp.rep.group_rank;
  Mat t(r, r);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) t(a, b) = (v.adjoint() * sp.rep.images[a * r + b] * v)(0, 0);
  Mat m = 0.5 * t.conjugate() + sp.tau(0) * Mat::Identity(r, r);
  m = linalg::herm_part(m);
  mv.direction = AlgebraElement::gl(m);
  mv.norm = m.norm();
  return mv;
}

MaximalWeight maximal_weight(const Symplectization& sp, const AlgebraElement& s_herm,
                             const Vec& v) {
  auto d = weight_decompose(sp, s_herm, v);
  MaximalWeight out;
  double thr = support_threshold(v), band = support_band(v);
  double zero_band = 1e-10 * d.op_scale;
  double finite = sp.tau_pairing(s_herm);
  for (size_t j = 0; j < d.eigenvalues.size(); ++j) {
    double sj = d.eigenvalues[j];
    double cn = d.components[j].norm();
    if (sj > zero_band) {
      if (cn > band) {
        out.infinite = true;
        return out;
      }
      if (cn > thr) out.determinacy = Determinacy::indeterminate;
    }
    // s_j <= 0 components die along the flow, s_j ~ 0 ones contribute 0
  }
  out.value = finite;
  return out;
}

MaximalWeight maximal_weight_general(const Symplectization& sp, const HermitianTypeElement& s,
                                     const Vec& v) {
  if (s.raw.is_hermitian(1e-9)) return maximal_weight(sp, s.raw, v);
  auto herm = retract_to_compact(s);  // lambda is ~-invariant
  return maximal_weight(sp, herm.raw, v);
}

MaximalWeight energy(const Symplectization& sp, const AlgebraElement& s_herm, const Vec& v) {
  MaximalWeight lam = maximal_weight(sp, s_herm, v);
  if (lam.infinite) return lam;
  lam.value -= moment_pairing(sp, s_herm, v);
  return lam;
}

LimitPoint limit_point(const Symplectization& sp, const AlgebraElement& s_herm, const Vec& v) {
  auto d = weight_decompose(sp, s_herm, v);
  LimitPoint out;
  double thr = support_threshold(v), band = support_band(v);
  double zero_band = 1e-10 * d.op_scale;
  Vec lim = Vec::Zero(v.size());
  for (size_t j = 0; j < d.eigenvalues.size(); ++j) {
    double sj = d.eigenvalues[j];
    double cn = d.components[j].norm();
    if (sj > zero_band) {
      if (cn > band) return out;  // no limit
      if (cn > thr) out.determinacy = Determinacy::indeterminate;
    } else if (std::abs(sj) <= zero_band) {
      lim += d.components[j];
    }
  }
  out.value = lim;
  return out;
}

double kempf_ness(const Symplectization& sp, const AlgebraElement& s_herm, double t,
                  const Vec& v) {
  auto d = weight_decompose(sp, s_herm, v);
  double acc = t * sp.tau_pairing(s_herm);
  for (size_t j = 0; j < d.eigenvalues.size(); ++j) {
    double sj = d.eigenvalues[j];
    double n2 = d.components[j].squaredNorm();
    if (n2 == 0.0) continue;
    acc += 0.25 * n2 * std::expm1(2.0 * t * sj);
  }
  if (!std::isfinite(acc)) return std::numeric_limits<double>::infinity();
  return acc;
}

double kempf_ness_group(const Symplectization& sp, const GroupElement& g, const Vec& v) {
  if (g.kind == GroupKind::torus) {
    // (C*)^k = T^k x exp(R^k): the Hermitian exponent is log|g| componentwise
    Vec s(g.tdiag.size());
    for (int i = 0; i < g.tdiag.size(); ++i) {
      double a = std::abs(g.tdiag(i));
      if (a == 0.0) throw std::invalid_argument("singular torus element");
      s(i) = std::log(a);
    }
    return kempf_ness(sp, AlgebraElement::torus(s), 1.0, v);
  }
  auto p = linalg::polar(g.gmat);
  if (!p) throw std::invalid_argument("kempf_ness_group: singular g");
  Mat s = linalg::log_hpd(p->h);
  return kempf_ness(sp, AlgebraElement::gl(s), 1.0, v);
}

StabilizerInfo stabilizer_algebra(const Representation& rep, const Vec& v) {
  StabilizerInfo info;
  const int n = rep.ambient_dim;
  if (rep.kind == GroupKind::torus) {
    const int k = rep.group_rank;
    Mat sys = Mat::Zero(n, k);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < k; ++i) sys(j, i) = double(rep.weights(j, i)) * v(j);
    Mat ns = linalg::null_space(sys);
    for (int c = 0; c < ns.cols(); ++c) info.g_v.push_back(AlgebraElement::torus(ns.col(c)));
    // k = iR^k: real solutions of the same (real-coefficient row space) system
    RMat rsys(2 * n, k);
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < k; ++i) {
        cx e = double(rep.weights(j, i)) * v(j);
        rsys(2 * j, i) = e.real();
        rsys(2 * j + 1, i) = e.imag();
      }
    RMat rns = linalg::null_space_real(rsys);
    for (int c = 0; c < rns.cols(); ++c)
      info.k_v.push_back(AlgebraElement::torus(cx(0, 1) * rns.col(c).cast<cx>()));
    // dim_R g_v = 2 * complex nullity; g_v = k_v^C iff it equals 2 * dim_R k_v
    info.reductive = int(info.g_v.size()) == int(info.k_v.size());
    return info;
  }
  const int r = rep.group_rank;
  Mat sys(n, r * r);
  for (int a = 0; a < r; ++a)
    for (int b = 0; b < r; ++b) sys.col(a * r + b) = rep.images[a * r + b] * v;
  Mat ns = linalg::null_space(sys);
  for (int c = 0; c < ns.cols(); ++c) {
    Mat m(r, r);
    for (int a = 0; a < r; ++a)
      for (int b = 0; b < r; ++b) m(a, b) = ns(a * r + b, c);
    info.g_v.push_back(AlgebraElement::gl(m));
  }
  // compact part: real null space over the anti-Hermitian basis
  auto kbasis = linalg::antihermitian_basis(r);
  RMat rsys(2 * n, int(kbasis.size()));
  for (size_t l = 0; l < kbasis.size(); ++l) {
    Vec img = rep.algebra_matrix(AlgebraElement::gl(kbasis[l])) * v;
    for (int j = 0; j < n; ++j) {
      rsys(2 * j, int(l)) = img(j).real();
      rsys(2 * j + 1, int(l)) = img(j).imag();
    }
  }
  RMat rns = linalg::null_space_real(rsys);
  for (int c = 0; c < rns.cols(); ++c) {
    Mat m = Mat::Zero(r, r);
    for (size_t l = 0; l < kbasis.size(); ++l) m += rns(int(l), c) * kbasis[l];
    info.k_v.push_back(AlgebraElement::gl(m));
  }
  info.reductive = 2 * int(info.g_v.size()) == 2 * int(info.k_v.size());
  return info;
}

}  // namespace knstab
