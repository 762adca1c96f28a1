#include "knstab/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace knstab {

bool AlgebraElement::is_hermitian(double tol) const {
  if (kind == GroupKind::torus) return tv.imag().cwiseAbs().maxCoeff() <= tol * std::max(1.0, tv.norm());
  return (gm - gm.adjoint()).norm() <= tol * std::max(1.0, gm.norm());
}

AlgebraElement AlgebraElement::operator+(const AlgebraElement& o) const {
  return kind == GroupKind::torus ? torus(tv + o.tv) : gl(gm + o.gm);
}
AlgebraElement AlgebraElement::operator-(const AlgebraElement& o) const {
  return kind == GroupKind::torus ? torus(tv - o.tv) : gl(gm - o.gm);
}
AlgebraElement AlgebraElement::operator*(double t) const {
  return kind == GroupKind::torus ? torus(Vec(t * tv)) : gl(Mat(t * gm));
}
AlgebraElement AlgebraElement::bracket(const AlgebraElement& o) const {
  if (kind == GroupKind::torus) return torus(Vec::Zero(tv.size()));
  return gl(gm * o.gm - o.gm * gm);
}

namespace linalg {

int rank(const Mat& m, double rel_tol) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) == 0.0) return 0;
  double thresh = rel_tol * sv(0);
  int r = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > thresh) ++r;
  return r;
}

Mat col_space(const Mat& m, double rel_tol) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU);
  const auto& sv = svd.singularValues();
  int r = 0;
  if (sv.size() > 0 && sv(0) > 0.0) {
    double thresh = rel_tol * sv(0);
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > thresh) ++r;
  }
  return svd.matrixU().leftCols(r);
}

Mat null_space(const Mat& m, double rel_tol) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int r = 0;
  if (sv.size() > 0 && sv(0) > 0.0) {
    double thresh = rel_tol * sv(0);
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > thresh) ++r;
  }
  return svd.matrixV().rightCols(m.cols() - r);
}

RMat null_space_real(const RMat& m, double rel_tol) {
  Eigen::JacobiSVD<RMat> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int r = 0;
  if (sv.size() > 0 && sv(0) > 0.0) {
    double thresh = rel_tol * sv(0);
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > thresh) ++r;
  }
  return svd.matrixV().rightCols(m.cols() - r);
}

double max_principal_angle(const Mat& q1, const Mat& q2) {
  if (q1.cols() != q2.cols()) return M_PI / 2.0;
  if (q1.cols() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(Mat(q1.adjoint() * q2));
  double smin = svd.singularValues().minCoeff();
  smin = std::clamp(smin, -1.0, 1.0);
  return std::acos(smin);
}

bool same_subspace(const Mat& q1, const Mat& q2, double tol) {
  return max_principal_angle(q1, q2) <= tol;
}

std::optional<Polar> polar(const Mat& g) {
  Eigen::SelfAdjointEigenSolver<Mat> es(Mat(g.adjoint() * g));
  if (es.eigenvalues().minCoeff() <= 0.0) return std::nullopt;  // singular g
  Mat h = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() *
          es.eigenvectors().adjoint();
  Mat hinv = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() *
             es.eigenvectors().adjoint();
  return Polar{g * hinv, h};
}

Mat log_hpd(const Mat& h) {
  Eigen::SelfAdjointEigenSolver<Mat> es(h);
  return es.eigenvectors() * es.eigenvalues().array().log().matrix().asDiagonal() *
         es.eigenvectors().adjoint();
}

Mat log_unitary(const Mat& k) {
  Eigen::ComplexEigenSolver<Mat> es(k);
  Mat v = es.eigenvectors();
  Vec lam = es.eigenvalues();
  Vec loglam(lam.size());
  for (int i = 0; i < lam.size(); ++i) loglam(i) = cx(0.0, std::arg(lam(i)));
  return v * loglam.asDiagonal() * v.inverse();
}

Mat expm(const Mat& m) { return m.exp(); }

Mat random_unitary(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Mat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = cx(gauss(rng), gauss(rng));
  Eigen::HouseholderQR<Mat> qr(g);
  Mat q = qr.householderQ();
  // fix phases so the factorization is unique-ish
  Mat r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < n; ++i) {
    cx d = r(i, i);
    if (std::abs(d) > 0) q.col(i) *= d / std::abs(d);
  }
  return q;
}

std::vector<Mat> antihermitian_basis(int r) {
  std::vector<Mat> basis;
  const double s = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < r; ++j) {
    Mat m = Mat::Zero(r, r);
    m(j, j) = cx(0, 1);
    basis.push_back(m);
  }
  for (int j = 0; j < r; ++j)
    for (int k = j + 1; k < r; ++k) {
      Mat m = Mat::Zero(r, r);
      m(j, k) = s;
      m(k, j) = -s;
      basis.push_back(m);
      Mat m2 = Mat::Zero(r, r);
      m2(j, k) = cx(0, s);
      m2(k, j) = cx(0, s);
      basis.push_back(m2);
    }
  return basis;
}

std::vector<Mat> hermitian_basis(int r) {
  std::vector<Mat> basis = antihermitian_basis(r);
  for (auto& m : basis) m *= cx(0, 1);
  return basis;
}

}  // namespace linalg
}  // namespace knstab
