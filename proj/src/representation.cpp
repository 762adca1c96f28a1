#include "knstab/representation.hpp"

#include "knstab/linalg.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

namespace knstab {

Representation Representation::torus_weights(Eigen::MatrixXi chi) {
  Representation r;
  r.kind = GroupKind::torus;
  r.group_rank = int(chi.cols());
  r.ambient_dim = int(chi.rows());
  r.weights = std::move(chi);
  return r;
}

Representation Representation::gl_standard(int rk) {
  Representation r;
  r.kind = GroupKind::gl;
  r.group_rank = rk;
  r.ambient_dim = rk;
  for (int a = 0; a < rk; ++a)
    for (int b = 0; b < rk; ++b) {
      Mat e = Mat::Zero(rk, rk);
      e(a, b) = 1.0;
      r.images.push_back(e);
    }
  return r;
}

Representation Representation::gl_sym(int d) {
  // orthonormal basis u_q ~ sqrt(C(d,q)) x^{d-q} y^q, q = 0..d
  Representation r;
  r.kind = GroupKind::gl;
  r.group_rank = 2;
  r.ambient_dim = d + 1;
  const int n = d + 1;
  Mat e11 = Mat::Zero(n, n), e22 = Mat::Zero(n, n), e12 = Mat::Zero(n, n), e21 = Mat::Zero(n, n);
  for (int q = 0; q <= d; ++q) {
    e11(q, q) = double(d - q);
    e22(q, q) = double(q);
    if (q + 1 <= d) e21(q + 1, q) = std::sqrt(double((d - q) * (q + 1)));  // lowering x -> y
    if (q - 1 >= 0) e12(q - 1, q) = std::sqrt(double(q * (d - q + 1)));
  }
  r.images = {e11, e12, e21, e22};
  return r;
}

Representation Representation::gl_adjoint(int rk) {
  Representation r;
  r.kind = GroupKind::gl;
  r.group_rank = rk;
  r.ambient_dim = rk * rk;
  const int n = rk * rk;
  for (int a = 0; a < rk; ++a)
    for (int b = 0; b < rk; ++b) {
      Mat e = Mat::Zero(rk, rk);
      e(a, b) = 1.0;
      Mat img = Mat::Zero(n, n);
      // ad(E_ab) acting on vec(X) (column-major): E_ab X - X E_ab
      for (int i = 0; i < rk; ++i)
        for (int j = 0; j < rk; ++j) {
          Mat x = Mat::Zero(rk, rk);
          x(i, j) = 1.0;
          Mat y = e * x - x * e;
          img.col(j * rk + i) = Eigen::Map<const Vec>(y.data(), n);
        }
      r.images.push_back(img);
    }
  return r;
}

Representation Representation::gl_explicit(int rk, std::vector<Mat> images) {
  if (int(images.size()) != rk * rk)
    throw std::invalid_argument("gl_explicit: need r^2 elementary images");
  Representation r;
  r.kind = GroupKind::gl;
  r.group_rank = rk;
  r.ambient_dim = int(images.front().rows());
  r.images = std::move(images);
  return r;
}

Mat Representation::algebra_matrix(const AlgebraElement& s) const {
  if (kind == GroupKind::torus) {
    Vec d(ambient_dim);
    for (int j = 0; j < ambient_dim; ++j) {
      cx acc = 0.0;
      for (int i = 0; i < group_rank; ++i) acc += double(weights(j, i)) * s.tv(i);
      d(j) = acc;
    }
    return Mat(d.asDiagonal());
  }
  Mat m = Mat::Zero(ambient_dim, ambient_dim);
  for (int a = 0; a < group_rank; ++a)
    for (int b = 0; b < group_rank; ++b) m += s.gm(a, b) * images[a * group_rank + b];
  return m;
}

Vec Representation::apply(const AlgebraElement& s, const Vec& v) const {
  if (v.size() != ambient_dim) throw std::invalid_argument("apply: shape mismatch");
  if (kind == GroupKind::torus) {
    Vec out(ambient_dim);
    for (int j = 0; j < ambient_dim; ++j) {
      cx acc = 0.0;
      for (int i = 0; i < group_rank; ++i) acc += double(weights(j, i)) * s.tv(i);
      out(j) = acc * v(j);
    }
    return out;
  }
  return algebra_matrix(s) * v;
}

Mat Representation::group_matrix(const GroupElement& g) const {
  if (kind == GroupKind::torus) {
    Vec d(ambient_dim);
    for (int j = 0; j < ambient_dim; ++j) {
      cx acc = 1.0;
      for (int i = 0; i < group_rank; ++i) {
        int w = weights(j, i);
        cx base = g.tdiag(i);
        if (std::abs(base) == 0.0) throw std::invalid_argument("torus element not invertible");
        acc *= std::pow(base, w);
      }
      d(j) = acc;
    }
    return Mat(d.asDiagonal());
  }
  auto p = linalg::polar(g.gmat);
  if (!p) throw std::invalid_argument("group_matrix: singular g");
  // rho(e^X) = e^{sigma(X)} on each polar factor
  Mat lk = linalg::log_unitary(p->k);
  Mat lh = linalg::log_hpd(p->h);
  Mat rk = linalg::expm(algebra_matrix(AlgebraElement::gl(lk)));
  Mat rh = linalg::expm(algebra_matrix(AlgebraElement::gl(lh)));
  return rk * rh;
}

Vec Representation::apply_group(const GroupElement& g, const Vec& v) const {
  return group_matrix(g) * v;
}

std::optional<std::string> Representation::validate(double tol) const {
  if (kind == GroupKind::torus) {
    if (weights.rows() != ambient_dim || weights.cols() != group_rank)
      return "weight matrix shape mismatch";
    return std::nullopt;
  }
  const int rk = group_rank;
  if (int(images.size()) != rk * rk) return "wrong number of elementary images";
  for (const auto& im : images)
    if (im.rows() != ambient_dim || im.cols() != ambient_dim) return "image shape mismatch";
  double scale = 1.0;
  for (const auto& im : images) scale = std::max(scale, im.norm());
  auto img = [&](int a, int b) -> const Mat& { return images[a * rk + b]; };
  for (int a = 0; a < rk; ++a)
    for (int b = 0; b < rk; ++b)
      for (int c = 0; c < rk; ++c)
        for (int d = 0; d < rk; ++d) {
          // [E_ab, E_cd] = delta_bc E_ad - delta_da E_cb
          Mat lhs = img(a, b) * img(c, d) - img(c, d) * img(a, b);
          Mat rhs = Mat::Zero(ambient_dim, ambient_dim);
          if (b == c) rhs += img(a, d);
          if (d == a) rhs -= img(c, b);
          if ((lhs - rhs).norm() > tol * scale * scale)
            return "bracket compatibility fails on pair E_" + std::to_string(a + 1) +
                   std::to_string(b + 1) + ", E_" + std::to_string(c + 1) + std::to_string(d + 1);
        }
  // unitarity of the induced K-representation: sigma(a)^* = sigma(a^*)
  for (int a = 0; a < rk; ++a)
    for (int b = 0; b < rk; ++b)
      if ((img(a, b).adjoint() - img(b, a)).norm() > tol * scale)
        return "induced K-representation is not unitary (adjoint mismatch on E_" +
               std::to_string(a + 1) + std::to_string(b + 1) + ")";
  return std::nullopt;
}

ActResult act(const Representation& rep, const AlgebraElement& s, double t, const Vec& v) {
  ActResult res;
  if (rep.kind == GroupKind::torus) {
    res.value = Vec(rep.ambient_dim);
    for (int j = 0; j < rep.ambient_dim; ++j) {
      cx acc = 0.0;
      for (int i = 0; i < rep.group_rank; ++i) acc += double(rep.weights(j, i)) * s.tv(i);
      res.value(j) = std::exp(t * acc) * v(j);
    }
  } else {
    Mat m = rep.algebra_matrix(s);
    if ((m - m.adjoint()).norm() <= 1e-10 * std::max(1.0, m.norm())) {
      // Hermitian generator: work in its eigenbasis
      Eigen::SelfAdjointEigenSolver<Mat> es(m);
      Vec w = es.eigenvectors().adjoint() * v;
      for (int j = 0; j < w.size(); ++j) w(j) *= std::exp(t * es.eigenvalues()(j));
      res.value = es.eigenvectors() * w;
    } else {
      res.value = linalg::expm(Mat(t * m)) * v;
    }
  }
  res.overflow = !res.value.allFinite();
  return res;
}

}  // namespace knstab
