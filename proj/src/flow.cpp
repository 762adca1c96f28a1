#include "knstab/flow.hpp"

#include "knstab/stability.hpp"

#include <chrono>
#include <cmath>
#include <deque>

namespace knstab {

namespace {

constexpr double armijo_c1 = 1e-4;
constexpr double shrink = 0.5;

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

FlowResult kn_descent(const Symplectization& sp, const Vec& v, FlowOptions opts) {
  if (opts.tol <= 0) throw std::invalid_argument("kn_descent: tol must be positive");
  auto t0 = std::chrono::steady_clock::now();

  FlowResult res;
  res.v_final = v;
  res.exponent_sum = AlgebraElement::zero(sp.rep.kind, sp.rep.group_rank);
  res.mu_min = std::numeric_limits<double>::infinity();

  // per-iteration cumulative step length, for the stabilization window
  std::vector<double> cumstep{0.0};
  const int window = 30;
  const double settle = 1e-6;
  // (exponent, mu) checkpoints for the stall-ratio test
  std::deque<std::pair<double, double>> checkpoints;

  double prev_step = 0.25;
  double exponent_len = 0.0;  // sum of accepted step lengths (monotone)
  const size_t base_stab_dim = stabilizer_algebra(sp.rep, v).g_v.size();

  // spectral (Barzilai-Borwein) step seed: plain normalized descent zigzags
  // badly in the ill-conditioned valleys near degenerating rays
  bool have_prev = false;
  AlgebraElement prev_mu = AlgebraElement::zero(sp.rep.kind, sp.rep.group_rank);
  AlgebraElement last_step = prev_mu;
  auto inner = [&](const AlgebraElement& a, const AlgebraElement& b) {
    if (sp.rep.kind == GroupKind::torus) return (a.tv.adjoint() * b.tv)(0, 0).real();
    return (a.gm.adjoint() * b.gm).trace().real();
  };

  for (int iter = 0; iter < opts.max_iter; ++iter) {
    auto mu = moment_vector(sp, res.v_final);
    res.mu_final = mu.norm;
    res.mu_min = std::min(res.mu_min, mu.norm);
    if (res.mu_trajectory.size() < 20000) res.mu_trajectory.push_back(mu.norm);
    checkpoints.emplace_back(exponent_len, mu.norm);
    while (checkpoints.size() > 1 && checkpoints[1].first <= exponent_len - 25.0)
      checkpoints.pop_front();

    // convergence: small mu alone is not enough (degenerating rays also pass
    // through small mu); the trajectory must additionally have settled.
    // zero in the orbit vs zero in the orbit closure: the stabilizer dimension
    // is constant along the orbit and jumps exactly when a weight component
    // collapses, so a jump (or a blown-up exponent) marks a degeneration
    auto zero_class = [&] {
      if (res.exponent_norm > opts.blowup) return FlowClass::degenerating;
      if (stabilizer_algebra(sp.rep, res.v_final).g_v.size() > base_stab_dim)
        return FlowClass::degenerating;
      // escape-ray probe: at a genuine minimum the moment norm grows in every
      // non-stabilizer direction; along a recession ray it keeps shrinking no
      // matter how far out we stand.  The residual direction is contaminated
      // by transverse noise, so for the torus we project it onto the exact
      // kernel of the dominant-coordinate weight rows (where any recession
      // ray must live) before stepping, leaving the balanced part untouched.
      double dirmax = sp.rep.kind == GroupKind::torus
                          ? mu.direction.tv.cwiseAbs().maxCoeff()
                          : mu.direction.gm.cwiseAbs().maxCoeff();
      if (mu.norm == 0.0)  // norm underflowed under a nonzero pairing:
        return dirmax > 0.0 ? FlowClass::degenerating : FlowClass::reached_zero;
      if (sp.rep.kind == GroupKind::torus) {
        // a degeneration shows up as a scale gap in the coordinates together
        // with a strict recession direction: some s fixing every dominant
        // coordinate (chi_j . s = 0) while sending every collapsed one to
        // zero (chi_j . s < 0).  That is exactly the condition for the
        // stratum the flow converged into to lie in the orbit closure.
        const double vmax = res.v_final.cwiseAbs().maxCoeff();
        std::vector<int> alive, dying;
        for (int j = 0; j < res.v_final.size(); ++j) {
          double a = std::abs(res.v_final(j));
          if (a >= 1e-4 * vmax)
            alive.push_back(j);
          else if (a > 0.0)
            dying.push_back(j);
        }
        if (dying.empty()) return FlowClass::reached_zero;
        Eigen::MatrixXd A(alive.size(), sp.rep.group_rank);
        for (size_t r = 0; r < alive.size(); ++r)
          A.row(r) = sp.rep.weights.row(alive[r]).cast<double>();
        Eigen::MatrixXd K = Eigen::FullPivLU<Eigen::MatrixXd>(A).kernel();
        if (K.norm() < 1e-12) return FlowClass::reached_zero;
        Eigen::MatrixXd B(dying.size(), K.cols());
        for (size_t r = 0; r < dying.size(); ++r) {
          Eigen::RowVectorXd row =
              sp.rep.weights.row(dying[r]).cast<double>() * K;
          B.row(r) = row.norm() > 0 ? row / row.norm() : row;
        }
        // Chebyshev direction of {y : B y < 0} by subgradient steps
        Eigen::VectorXd y = -B.colwise().sum().transpose();
        if (y.norm() < 1e-12) y = Eigen::VectorXd::Ones(K.cols());
        y /= y.norm();
        for (int it = 0; it < 400; ++it) {
          int worst = 0;
          (B * y).maxCoeff(&worst);
          y -= (0.5 / std::sqrt(it + 1.0)) * B.row(worst).transpose();
          double n = y.norm();
          if (n < 1e-12) break;
          y /= n;
        }
        return (B * y).maxCoeff() < -1e-4 ? FlowClass::degenerating
                                          : FlowClass::reached_zero;
      }
      AlgebraElement d = mu.direction * (-1.0 / mu.norm);
      auto probe = act(sp.rep, d, 5.0, res.v_final);
      if (!probe.overflow && moment_vector(sp, probe.value).norm < 0.9 * mu.norm)
        return FlowClass::degenerating;
      return FlowClass::reached_zero;
    };

    if (mu.norm <= opts.tol) {
      int t = iter;
      if (t >= window && cumstep[t] - cumstep[t - window] < settle) {
        res.classification = zero_class();
        res.iterations = iter;
        res.wall_time = elapsed_since(t0);
        return res;
      }
    }

    if (res.exponent_norm > opts.blowup) {
      if (mu.norm < 10.0 * opts.tol) {
        res.classification = FlowClass::degenerating;
        res.iterations = iter;
        res.wall_time = elapsed_since(t0);
        return res;
      }
      // mu stopped decaying over >= 20 units of exponent => positive infimum
      if (checkpoints.front().first <= exponent_len - 20.0 &&
          mu.norm > 0.9 * checkpoints.front().second) {
        res.classification = FlowClass::stalled_positive;
        res.iterations = iter;
        res.wall_time = elapsed_since(t0);
        return res;
      }
    }

    if (mu.norm == 0.0) {  // exact zero, window logic above handles the rest
      res.classification = zero_class();
      res.iterations = iter;
      res.wall_time = elapsed_since(t0);
      return res;
    }

    AlgebraElement dir = mu.direction * (-1.0 / mu.norm);
    double trial = std::min(opts.max_step, 2.0 * prev_step);
    if (have_prev) {
      AlgebraElement dg = mu.direction + prev_mu * (-1.0);
      double dg2 = inner(dg, dg);
      double bb = dg2 > 0.0 ? inner(last_step, dg) / dg2 : 0.0;
      if (bb > 0.0) trial = std::min(opts.max_step, std::max(1e-12, bb * mu.norm));
    }
    bool accepted = false;
    double dpsi = 0.0;
    Vec next;
    while (trial >= 1e-14) {
      dpsi = kempf_ness(sp, dir, trial, res.v_final);
      if (std::isfinite(dpsi) && dpsi <= -armijo_c1 * trial * mu.norm) {
        auto stepped = act(sp.rep, dir, trial, res.v_final);
        if (!stepped.overflow) {
          next = std::move(stepped.value);
          accepted = true;
          break;
        }
      }
      trial *= shrink;
    }
    if (!accepted) {
      // no admissible step: at a numerical critical point
      res.classification =
          mu.norm <= 10.0 * opts.tol ? zero_class() : FlowClass::inconclusive;
      res.iterations = iter;
      res.wall_time = elapsed_since(t0);
      return res;
    }

    res.v_final = std::move(next);
    res.psi_final += dpsi;
    if (dpsi > 1e-12) res.psi_monotone = false;
    res.exponent_sum = res.exponent_sum + dir * trial;
    res.exponent_norm = res.exponent_sum.norm();
    last_step = dir * trial;
    prev_mu = mu.direction;
    have_prev = true;
    exponent_len += trial;
    cumstep.push_back(exponent_len);
    prev_step = trial;
    res.iterations = iter + 1;
  }

  res.classification = FlowClass::inconclusive;
  res.mu_final = moment_vector(sp, res.v_final).norm;
  res.wall_time = elapsed_since(t0);
  return res;
}

InfMomentResult inf_moment_norm(const Symplectization& sp, const Vec& v, FlowOptions opts) {
  auto fr = kn_descent(sp, v, opts);
  InfMomentResult out;
  out.classification = fr.classification;
  switch (fr.classification) {
    case FlowClass::reached_zero:
    case FlowClass::degenerating:
      out.value = std::min(fr.mu_min, fr.mu_final);
      out.semistable = true;
      out.conclusive = true;
      break;
    case FlowClass::stalled_positive:
      out.value = fr.mu_final;
      out.semistable = false;
      out.conclusive = true;
      break;
    case FlowClass::inconclusive:
      out.value = fr.mu_min;
      out.conclusive = false;
      break;
  }
  return out;
}

namespace {

// Hermitian directions spanning i [ z(k_v)^perp inside z_k(k_v) ]
std::vector<AlgebraElement> shift_space(const Symplectization& sp,
                                        const StabilizerInfo& stab) {
  GroupKind kind = sp.rep.kind;
  int rk = sp.rep.group_rank;
  auto inner = [&](const AlgebraElement& a, const AlgebraElement& b) {
    if (kind == GroupKind::torus) return (a.tv.adjoint() * b.tv)(0, 0).real();
    return (a.gm.adjoint() * b.gm).trace().real();
  };
  auto realize = [&](const AlgebraElement& a) {
    if (kind == GroupKind::torus) {
      RVec r(2 * rk);
      for (int i = 0; i < rk; ++i) {
        r(2 * i) = a.tv(i).real();
        r(2 * i + 1) = a.tv(i).imag();
      }
      return r;
    }
    RVec r(2 * rk * rk);
    for (int i = 0; i < rk * rk; ++i) {
      r(2 * i) = a.gm(i / rk, i % rk).real();
      r(2 * i + 1) = a.gm(i / rk, i % rk).imag();
    }
    return r;
  };
  // z_k(k_v): commutant of the compact stabilizer inside k
  auto zk = centralizer_algebra(stab.k_v, kind, rk, Ambient::compact);
  // z(k_v): combinations of the k_v basis commuting with every generator
  std::vector<AlgebraElement> center;
  if (!stab.k_v.empty()) {
    const int p = int(stab.k_v.size());
    const int rows = int(realize(stab.k_v[0]).size());
    RMat sys(rows * p, p);
    for (int i = 0; i < p; ++i)
      for (int j = 0; j < p; ++j)
        sys.block(rows * j, i, rows, 1) = realize(stab.k_v[i].bracket(stab.k_v[j]));
    RMat ns = linalg::null_space_real(sys);
    for (int c = 0; c < ns.cols(); ++c) {
      AlgebraElement el = AlgebraElement::zero(kind, rk);
      for (int i = 0; i < p; ++i) el = el + stab.k_v[i] * ns(i, c);
      center.push_back(el);
    }
  }
  // Gram-Schmidt zk against the center, then orthonormalize; multiply by i.
  std::vector<AlgebraElement> ortho_center;
  for (auto c : center) {
    for (const auto& p : ortho_center) c = c - p * inner(p, c);
    double n = c.norm();
    if (n > 1e-10) ortho_center.push_back(c * (1.0 / n));
  }
  std::vector<AlgebraElement> basis;
  for (auto b : zk) {
    for (const auto& p : ortho_center) b = b - p * inner(p, b);
    for (const auto& p : basis) b = b - p * inner(p, b);
    double n = b.norm();
    if (n > 1e-8) basis.push_back(b * (1.0 / n));
  }
  // rotate anti-Hermitian directions into Hermitian ones
  std::vector<AlgebraElement> herm;
  for (const auto& b : basis) {
    if (kind == GroupKind::torus)
      herm.push_back(AlgebraElement::torus(cx(0, 1) * b.tv));
    else
      herm.push_back(AlgebraElement::gl(cx(0, 1) * b.gm));
  }
  return herm;
}

}  // namespace

ZeroShift find_zero_shift(const Symplectization& sp, const Vec& v, FlowOptions opts) {
  ZeroShift out;
  out.s0 = AlgebraElement::zero(sp.rep.kind, sp.rep.group_rank);

  auto mu0 = moment_vector(sp, v);
  if (mu0.norm <= opts.tol) {
    out.ok = true;
    out.mu_norm = mu0.norm;
    return out;
  }

  auto stab = stabilizer_algebra(sp.rep, v);
  auto basis = shift_space(sp, stab);
  const int m = int(basis.size());
  if (m == 0) {
    out.failure = "shift space is trivial but the moment map does not vanish";
    out.mu_norm = mu0.norm;
    return out;
  }

  auto make_s = [&](const RVec& c) {
    AlgebraElement s = AlgebraElement::zero(sp.rep.kind, sp.rep.group_rank);
    for (int i = 0; i < m; ++i) s = s + basis[i] * c(i);
    return s;
  };
  // descend on ||mu||^2 rather than Psi: near the zero the Psi decrement is
  // quadratic in ||mu|| and drowns in roundoff against Psi = O(1), while
  // ||mu||^2 itself goes to zero and keeps full relative precision
  auto mu_sq = [&](const RVec& c) {
    auto a = act(sp.rep, make_s(c), 1.0, v);
    if (a.overflow) return std::numeric_limits<double>::infinity();
    double n = moment_vector(sp, a.value).norm;
    return n * n;
  };

  RVec c = RVec::Zero(m);
  double fc = mu0.norm * mu0.norm;
  double prev_step = 0.25;
  RVec last_d = RVec::Zero(m);
  // spectral step seed, same cure for zigzag as in the descent flow
  bool have_prev = false;
  RVec prev_grad = RVec::Zero(m);
  RVec last_step = RVec::Zero(m);
  const bool exact_grad = sp.rep.kind == GroupKind::torus;
  const int iter_cap = std::min(opts.max_iter, 50000);

  for (int iter = 0; iter < iter_cap; ++iter) {
    AlgebraElement s = make_s(c);
    Vec w = act(sp.rep, s, 1.0, v).value;
    auto mu = moment_vector(sp, w);
    if (mu.norm <= opts.tol) {
      // attained zero vs escape ray: ||mu|| also crosses any tolerance while
      // sliding to infinity along a recession direction. Probing further along
      // the last step separates the two: past an attained minimum the value
      // turns back up, along an escape ray it keeps shrinking.
      if (last_d.norm() > 0.0 && mu_sq(c + 5.0 * last_d) < 0.9 * mu.norm * mu.norm) {
        out.failure = "the infimum of the moment norm is not attained in the shift space";
        out.s0 = s;
        out.mu_norm = mu.norm;
        return out;
      }
      out.ok = true;
      out.s0 = s;
      out.mu_norm = mu.norm;
      return out;
    }
    RVec grad(m);
    bool accepted = false;
    if (exact_grad) {
      // abelian case in closed form: with q_j = |(e^s v)_j|^2,
      // d mu_i / dc_l = sum_j q_j chi_{ji} (chi_j . b_l), so
      // d ||mu||^2 / dc_l = 2 sum_j q_j (chi_j . mu) (chi_j . b_l)
      const auto& chi = sp.rep.weights;
      RVec muv = mu.direction.tv.real();
      Eigen::MatrixXd J(chi.cols(), m);
      for (int l = 0; l < m; ++l) {
        RVec bl = basis[l].tv.real();
        for (int i = 0; i < chi.cols(); ++i) {
          double acc = 0.0;
          for (int j = 0; j < chi.rows(); ++j) {
            double cj_b = 0.0;
            for (int i2 = 0; i2 < chi.cols(); ++i2) cj_b += chi(j, i2) * bl(i2);
            acc += std::norm(w(j)) * chi(j, i) * cj_b;
          }
          J(i, l) = acc;
        }
      }
      grad = 2.0 * J.transpose() * muv;
      // Gauss-Newton step: quadratic tail convergence where plain descent on
      // the squared norm limps linearly; fall back to the gradient if the
      // full or halved step does not already decrease the value
      RVec dgn = J.colPivHouseholderQr().solve(-muv);
      double t = 1.0;
      for (int h = 0; h < 8 && !accepted; ++h, t *= 0.5) {
        RVec cn = c + t * dgn;
        double fn = mu_sq(cn);
        if (std::isfinite(fn) && fn < fc) {
          c = cn;
          fc = fn;
          double dn = dgn.norm();
          if (dn > 0.0) last_d = dgn / dn;
          have_prev = false;
          accepted = true;
        }
      }
      if (accepted) continue;
    } else {
      double h = 1e-5 * std::max(1.0, c.norm());
      for (int i = 0; i < m; ++i) {
        RVec cp = c, cm = c;
        cp(i) += h;
        cm(i) -= h;
        grad(i) = (mu_sq(cp) - mu_sq(cm)) / (2.0 * h);
      }
    }
    double gn = grad.norm();
    if (gn < 1e-14) {
      out.failure = "restricted critical point does not kill the full moment map";
      out.s0 = s;
      out.mu_norm = mu.norm;
      return out;
    }
    RVec d = -grad / gn;
    double trial = std::min(8.0, 2.0 * prev_step);
    if (have_prev) {
      RVec dg = grad - prev_grad;
      double dg2 = dg.squaredNorm();
      double bb = dg2 > 0.0 ? last_step.dot(dg) / dg2 : 0.0;
      if (bb > 0.0) trial = std::min(8.0, std::max(1e-12, bb * gn));
    }
    while (trial >= 1e-16) {
      RVec cn = c + trial * d;
      double fn = mu_sq(cn);
      if (std::isfinite(fn) && fn <= fc - armijo_c1 * trial * gn) {
        c = cn;
        fc = fn;
        accepted = true;
        break;
      }
      trial *= shrink;
    }
    if (!accepted) {
      out.failure = "descent stalled before the moment map vanished";
      out.s0 = s;
      out.mu_norm = mu.norm;
      return out;
    }
    prev_step = trial;
    last_d = d;
    last_step = trial * d;
    prev_grad = grad;
    have_prev = true;
  }

  AlgebraElement s = make_s(c);
  out.failure = "iteration budget exhausted";
  out.s0 = s;
  out.mu_norm = moment_vector(sp, act(sp.rep, s, 1.0, v).value).norm;
  return out;
}

BoundednessResult boundedness_probe(const Symplectization& sp, const Vec& v, int budget,
                                    std::uint64_t seed) {
  BoundednessResult out;
  out.direction = AlgebraElement::zero(sp.rep.kind, sp.rep.group_rank);

  auto d = destabilizer_search(sp, v, budget, seed);
  if (d.value < -1e-9) {
    out.kind = Boundedness::unbounded;
    out.direction = d.s;
    out.weight = d.value;
    // eventual slope along e^{ts} is the (negative) maximal weight
    double p10 = kempf_ness(sp, d.s, 10.0, v);
    double p20 = kempf_ness(sp, d.s, 20.0, v);
    out.slope = (p20 - p10) / 10.0;
    out.heuristic = false;
    return out;
  }

  auto fr = kn_descent(sp, v);
  out.kind = Boundedness::bounded_below;
  out.inf_estimate = fr.psi_final;
  out.heuristic = sp.rep.kind == GroupKind::gl || fr.classification == FlowClass::inconclusive;
  return out;
}

}  // namespace knstab
