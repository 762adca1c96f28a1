#include "knstab/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace knstab {

double HermitianTypeElement::spectral_scale() const {
  double r = 1.0;
  for (double e : eigenvalues) r = std::max(r, std::abs(e));
  return r;
}

namespace {

// cluster sorted values with gap <= eig_cluster * scale
std::vector<std::vector<int>> cluster_indices(const std::vector<double>& vals, double scale) {
  std::vector<int> order(vals.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return vals[a] < vals[b]; });
  std::vector<std::vector<int>> clusters;
  for (int idx : order) {
    if (clusters.empty() || vals[idx] - vals[clusters.back().back()] > tols::eig_cluster * scale)
      clusters.push_back({idx});
    else
      clusters.back().push_back(idx);
  }
  return clusters;
}

}  // namespace

ClassifyResult classify_hermitian_type(const AlgebraElement& s) {
  if (s.kind == GroupKind::torus) {
    double scale = std::max(1.0, s.tv.cwiseAbs().maxCoeff());
    double worst = s.tv.size() > 0 ? s.tv.imag().cwiseAbs().maxCoeff() : 0.0;
    if (worst > tols::reject_hi * scale)
      return Rejection{"non-real eigenvalue (torus entry has imaginary part)"};
    if (worst > tols::reject_lo * scale)
      return Rejection{"indeterminate at tolerance: borderline imaginary part",
                       Determinacy::indeterminate};
    HermitianTypeElement h;
    h.raw = AlgebraElement::torus(s.tv.real().cast<cx>());
    std::vector<double> vals(s.tv.size());
    for (int i = 0; i < s.tv.size(); ++i) vals[i] = s.tv(i).real();
    for (const auto& cl : cluster_indices(vals, scale)) {
      h.eigenvalues.push_back(vals[cl.front()]);
      h.cluster_sizes.push_back(int(cl.size()));
    }
    return h;
  }

  const Mat& m = s.gm;
  const int n = int(m.rows());
  Eigen::ComplexEigenSolver<Mat> es(m);
  if (es.info() != Eigen::Success) return Rejection{"eigensolver failed"};
  Vec lam = es.eigenvalues();
  double scale = std::max(1.0, lam.cwiseAbs().maxCoeff());

  double worst_imag = lam.imag().cwiseAbs().maxCoeff();
  if (worst_imag > tols::reject_hi * scale)
    return Rejection{"non-real eigenvalue"};
  if (worst_imag > tols::reject_lo * scale)
    return Rejection{"indeterminate at tolerance: borderline imaginary part",
                     Determinacy::indeterminate};

  std::vector<double> vals(n);
  for (int i = 0; i < n; ++i) vals[i] = lam(i).real();
  auto clusters = cluster_indices(vals, scale);

  // nilpotency detection: rank(s - eta) vs rank((s - eta)^2) per cluster
  for (const auto& cl : clusters) {
    double eta = 0.0;
    for (int idx : cl) eta += vals[idx];
    eta /= double(cl.size());
    Mat a = m - eta * Mat::Identity(n, n);
    Mat a2 = a * a;
    for (const Mat* p : {&a, &a2}) {
      Eigen::JacobiSVD<Mat> svd(*p);
      const auto& sv = svd.singularValues();
      if (sv(0) == 0.0) continue;
      double thr = tols::rank_rel * sv(0);
      for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > 0.1 * thr && sv(i) < 10.0 * thr)
          return Rejection{"indeterminate at tolerance: singular value in rank band",
                           Determinacy::indeterminate};
    }
    if (linalg::rank(a2) < linalg::rank(a))
      return Rejection{"nonzero nilpotent part at eigenvalue " + std::to_string(eta)};
  }

  HermitianTypeElement h;
  h.raw = s;
  Mat v(n, n);
  int col = 0;
  for (const auto& cl : clusters) {
    double eta = 0.0;
    for (int idx : cl) eta += vals[idx];
    h.eigenvalues.push_back(eta / double(cl.size()));
    h.cluster_sizes.push_back(int(cl.size()));
    for (int idx : cl) v.col(col++) = es.eigenvectors().col(idx);
  }
  h.basis = v;
  Eigen::FullPivLU<Mat> lu(v);
  if (!lu.isInvertible())
    return Rejection{"indeterminate at tolerance: ill-conditioned eigenbasis",
                     Determinacy::indeterminate};
  h.basis_inv = lu.inverse();

  col = 0;
  for (size_t j = 0; j < clusters.size(); ++j) {
    Mat sel = Mat::Zero(n, n);
    for (int i = 0; i < h.cluster_sizes[j]; ++i) sel(col + i, col + i) = 1.0;
    col += h.cluster_sizes[j];
    h.projections.push_back(h.basis * sel * h.basis_inv);
  }

  // reconstruction sanity: sum eta_j P_j = s
  Mat rec = Mat::Zero(n, n);
  for (size_t j = 0; j < h.projections.size(); ++j) rec += h.eigenvalues[j] * h.projections[j];
  if ((rec - m).norm() > 1e-7 * scale)
    return Rejection{"indeterminate at tolerance: spectral reconstruction residual",
                     Determinacy::indeterminate};
  return h;
}

HermitianTypeElement classify_or_throw(const AlgebraElement& s) {
  auto res = classify_hermitian_type(s);
  if (auto* rej = std::get_if<Rejection>(&res))
    throw std::invalid_argument("not of Hermitian type: " + rej->reason);
  return std::get<HermitianTypeElement>(std::move(res));
}

ParabolicTriple parabolic_triple(const HermitianTypeElement& s) {
  ParabolicTriple t;
  t.base = s;
  if (s.kind() == GroupKind::torus) {
    const int k = s.rank();
    for (int i = 0; i < k; ++i) {
      Vec e = Vec::Zero(k);
      e(i) = 1.0;
      t.g_alg.push_back(AlgebraElement::torus(e));
      t.z_alg.push_back(AlgebraElement::torus(e));
    }
    return t;
  }
  const int n = s.rank();
  const int m = int(s.eigenvalues.size());
  std::vector<int> cluster_of_col(n);
  {
    int col = 0;
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < s.cluster_sizes[j]; ++i) cluster_of_col[col++] = j;
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      int ca = cluster_of_col[i], cb = cluster_of_col[j];
      Mat b = s.basis.col(i) * s.basis_inv.row(j);
      auto el = AlgebraElement::gl(b);
      if (ca <= cb) t.g_alg.push_back(el);  // ad-eigenvalue eta_a - eta_b <= 0
      if (ca == cb)
        t.z_alg.push_back(el);
      else if (ca < cb)
        t.u_alg.push_back(el);
    }
  return t;
}

MembershipResult parabolic_member(const Mat& g, const HermitianTypeElement& s) {
  if (s.kind() == GroupKind::torus)
    throw std::invalid_argument("parabolic_member: gl only");
  if (linalg::rank(g) < g.rows()) throw std::invalid_argument("parabolic_member: singular g");
  const int m = int(s.eigenvalues.size());
  Mat a = s.basis_inv * g * s.basis;
  double scale = std::max(1.0, a.norm());
  // block (p,q) scales as e^{t(eta_p - eta_q)} under e^{st} g e^{-st}
  std::vector<int> offs(m + 1, 0);
  for (int j = 0; j < m; ++j) offs[j + 1] = offs[j] + s.cluster_sizes[j];
  Mat limit = Mat::Zero(a.rows(), a.cols());
  bool in_g = true, diag_identity = true;
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q) {
      Mat blk = a.block(offs[p], offs[q], s.cluster_sizes[p], s.cluster_sizes[q]);
      if (p > q) {  // eta_p > eta_q: grows under conjugation
        if (blk.norm() > 1e-8 * scale) in_g = false;
      } else if (p == q) {
        limit.block(offs[p], offs[q], blk.rows(), blk.cols()) = blk;
        if ((blk - Mat::Identity(blk.rows(), blk.cols())).norm() > 1e-8 * scale)
          diag_identity = false;
      }
    }
  MembershipResult res;
  if (!in_g) {
    res.membership = ParabolicMembership::outside;
    return res;
  }
  res.limit = s.basis * limit * s.basis_inv;
  res.membership =
      diag_identity ? ParabolicMembership::in_unipotent : ParabolicMembership::in_parabolic;
  return res;
}

bool equiv(const HermitianTypeElement& s, const HermitianTypeElement& sigma, double tol) {
  if (s.kind() != sigma.kind() || s.rank() != sigma.rank()) return false;
  if (s.kind() == GroupKind::torus)
    return (s.raw.tv - sigma.raw.tv).norm() <= tol * std::max(1.0, s.raw.tv.norm());
  double scale = std::max(1.0, std::max(s.raw.gm.norm(), sigma.raw.gm.norm()));
  const int m = int(s.eigenvalues.size());
  Mat zproj = Mat::Zero(s.rank(), s.rank());
  for (int p = 0; p < m; ++p) {
    zproj += s.projections[p] * sigma.raw.gm * s.projections[p];
    for (int q = 0; q < m; ++q)
      if (s.eigenvalues[p] > s.eigenvalues[q]) {
        Mat blk = s.projections[p] * sigma.raw.gm * s.projections[q];
        if (blk.norm() > tol * scale) return false;  // sigma not in g(s)
      }
  }
  return (zproj - s.raw.gm).norm() <= tol * scale;
}

std::optional<Mat> find_unipotent(const HermitianTypeElement& s,
                                  const HermitianTypeElement& sigma) {
  if (s.kind() == GroupKind::torus) {
    if (!equiv(s, sigma)) return std::nullopt;
    return Mat::Identity(s.rank(), s.rank());  // torus: ~ is equality, u = e
  }
  if (!equiv(s, sigma)) return std::nullopt;
  const int n = s.rank();
  auto tri = parabolic_triple(s);
  const int d = int(tri.u_alg.size());
  // u = 1 + N with N in u(s); u s u^{-1} = sigma  <=>  N s - sigma N = sigma - s
  Mat sys(n * n, d);
  for (int l = 0; l < d; ++l) {
    Mat img = tri.u_alg[l].gm * s.raw.gm - sigma.raw.gm * tri.u_alg[l].gm;
    sys.col(l) = Eigen::Map<const Vec>(img.data(), n * n);
  }
  Mat rhs_m = sigma.raw.gm - s.raw.gm;
  Vec rhs = Eigen::Map<const Vec>(rhs_m.data(), n * n);
  Vec c = d > 0 ? Vec(sys.colPivHouseholderQr().solve(rhs)) : Vec();
  Mat u = Mat::Identity(n, n);
  for (int l = 0; l < d; ++l) u += c(l) * tri.u_alg[l].gm;
  double scale = std::max(1.0, s.raw.gm.norm());
  if ((u * s.raw.gm - sigma.raw.gm * u).norm() > 1e-9 * scale) return std::nullopt;
  return u;
}

HermitianTypeElement retract_to_compact(const HermitianTypeElement& s) {
  if (s.kind() == GroupKind::torus) return s;
  const int n = s.rank();
  Eigen::HouseholderQR<Mat> qr(s.basis);
  Mat q = Mat(qr.householderQ()).leftCols(n);
  Vec d = Vec::Zero(n);
  int col = 0;
  for (size_t j = 0; j < s.eigenvalues.size(); ++j)
    for (int i = 0; i < s.cluster_sizes[j]; ++i) d(col++) = s.eigenvalues[j];
  Mat herm = q * d.asDiagonal() * q.adjoint();
  herm = linalg::herm_part(herm);  // kill roundoff skew
  return classify_or_throw(AlgebraElement::gl(herm));
}

FlagClass flag_class(const HermitianTypeElement& s) {
  if (s.kind() == GroupKind::torus)
    throw std::invalid_argument("flag_class: flags are trivial for torus inputs");
  FlagClass f;
  f.weights = s.eigenvalues;
  Eigen::HouseholderQR<Mat> qr(s.basis);
  Mat q = Mat(qr.householderQ()).leftCols(s.rank());
  int cum = 0;
  for (size_t j = 0; j < s.eigenvalues.size(); ++j) {
    cum += s.cluster_sizes[j];
    f.steps.push_back(q.leftCols(cum));
  }
  return f;
}

bool same_flag(const FlagClass& a, const FlagClass& b, double tol) {
  if (a.steps.size() != b.steps.size()) return false;
  for (size_t j = 0; j < a.weights.size(); ++j) {
    if (std::abs(a.weights[j] - b.weights[j]) > 1e-8 * std::max(1.0, std::abs(a.weights[j])))
      return false;
    if (a.steps[j].cols() != b.steps[j].cols()) return false;
    if (!linalg::same_subspace(a.steps[j], b.steps[j], tol)) return false;
  }
  return true;
}

std::optional<PolarPair> polar_decompose(const Mat& g) {
  auto p = linalg::polar(g);
  if (!p) return std::nullopt;
  return PolarPair{p->k, p->h};
}

std::vector<AlgebraElement> centralizer_algebra(const std::vector<AlgebraElement>& generators,
                                                GroupKind kind, int rank, Ambient ambient) {
  std::vector<AlgebraElement> out;
  if (kind == GroupKind::torus) {
    // abelian: commutant is everything
    for (int i = 0; i < rank; ++i) {
      Vec e = Vec::Zero(rank);
      e(i) = ambient == Ambient::full ? cx(1, 0) : cx(0, 1);
      out.push_back(AlgebraElement::torus(e));
    }
    return out;
  }
  const int n = rank;
  if (ambient == Ambient::full) {
    if (generators.empty()) {
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          Mat e = Mat::Zero(n, n);
          e(i, j) = 1.0;
          out.push_back(AlgebraElement::gl(e));
        }
      return out;
    }
    Mat sys(int(generators.size()) * n * n, n * n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Mat e = Mat::Zero(n, n);
        e(i, j) = 1.0;
        for (size_t gidx = 0; gidx < generators.size(); ++gidx) {
          Mat br = e * generators[gidx].gm - generators[gidx].gm * e;
          sys.block(int(gidx) * n * n, i * n + j, n * n, 1) =
              Eigen::Map<const Vec>(br.data(), n * n);
        }
      }
    Mat ns = linalg::null_space(sys);
    for (int c = 0; c < ns.cols(); ++c) {
      Mat m(n, n);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = ns(i * n + j, c);
      out.push_back(AlgebraElement::gl(m));
    }
    return out;
  }
  // compact real form u(n): real null space over the anti-Hermitian basis
  auto kbasis = linalg::antihermitian_basis(n);
  const int dim = int(kbasis.size());
  RMat sys(std::max<size_t>(1, generators.size()) * 2 * n * n, dim);
  sys.setZero();
  for (int l = 0; l < dim; ++l)
    for (size_t gidx = 0; gidx < generators.size(); ++gidx) {
      Mat br = kbasis[l] * generators[gidx].gm - generators[gidx].gm * kbasis[l];
      for (int i = 0; i < n * n; ++i) {
        sys(int(gidx) * 2 * n * n + 2 * i, l) = br(i / n, i % n).real();
        sys(int(gidx) * 2 * n * n + 2 * i + 1, l) = br(i / n, i % n).imag();
      }
    }
  RMat ns = generators.empty() ? RMat(RMat::Identity(dim, dim)) : linalg::null_space_real(sys);
  for (int c = 0; c < ns.cols(); ++c) {
    Mat m = Mat::Zero(n, n);
    for (int l = 0; l < dim; ++l) m += ns(l, c) * kbasis[l];
    out.push_back(AlgebraElement::gl(m));
  }
  return out;
}

}  // namespace knstab
