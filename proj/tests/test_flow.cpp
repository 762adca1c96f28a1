#include "knstab/flow.hpp"

#include "knstab/stability.hpp"

#include "doctest.h"
#include "test_util.hpp"

#include <random>

using namespace knstab;

namespace {

Symplectization torus_sp(std::initializer_list<std::initializer_list<int>> rows,
                         std::initializer_list<double> tau) {
  const int n = int(rows.size());
  const int k = int(rows.begin()->size());
  Eigen::MatrixXi chi(n, k);
  int i = 0;
  for (const auto& row : rows) {
    int j = 0;
    for (int w : row) chi(i, j++) = w;
    ++i;
  }
  RVec t(k);
  int j = 0;
  for (double x : tau) t(j++) = x;
  return Symplectization::make(Representation::torus_weights(chi), t);
}

Vec cv(std::initializer_list<double> entries) {
  Vec v(int(entries.size()));
  int i = 0;
  for (double x : entries) v(i++) = cx(x, 0.0);
  return v;
}

}  // namespace

TEST_CASE("descent stops immediately at a moment-map zero") {
  auto sp = torus_sp({{1}, {-1}}, {0.0});
  auto fr = kn_descent(sp, cv({1, 1}));
  CHECK(fr.classification == FlowClass::reached_zero);
  CHECK(fr.iterations == 0);
  CHECK(fr.mu_final < 1e-12);
  CHECK(fr.psi_final == doctest::Approx(0.0));
}

TEST_CASE("descent converges to the balanced point of an opposite pair") {
  // weights {1,-1}, v = (2,1): the minimum has |v1| = |v2| = sqrt(2)
  auto sp = torus_sp({{1}, {-1}}, {0.0});
  auto fr = kn_descent(sp, cv({2, 1}));
  REQUIRE(fr.classification == FlowClass::reached_zero);
  CHECK(std::abs(fr.v_final(0)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-4));
  CHECK(std::abs(fr.v_final(1)) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-4));
  CHECK(fr.psi_monotone);
  // closed-form minimum of Psi along the diagonal: min_a (e^{2a}-1) + (e^{-2a}-1)/4
  double astar = 0.5 * std::log(0.5);
  double psimin = (std::exp(2 * astar) - 1.0) + 0.25 * (std::exp(-2 * astar) - 1.0);
  CHECK(fr.psi_final == doctest::Approx(psimin).epsilon(1e-6));
}

TEST_CASE("descent along a collapsing orbit is classified as degenerating") {
  auto sp = torus_sp({{1}, {-1}}, {0.0});
  auto fr = kn_descent(sp, cv({1, 0}));
  CHECK(fr.classification == FlowClass::degenerating);
  CHECK(fr.mu_final < 1e-7);
  CHECK(fr.exponent_norm > 10.0);
  CHECK(fr.psi_monotone);
}

TEST_CASE("descent stalls at a positive moment norm on an unstable point") {
  // weights {1}, tau = 1: ||mu|| = e^{2a}/2 + 1 >= 1 along the whole orbit
  auto sp = torus_sp({{1}}, {1.0});
  auto fr = kn_descent(sp, cv({1}));
  CHECK(fr.classification == FlowClass::stalled_positive);
  CHECK(fr.mu_final >= 1.0 - 1e-6);
  CHECK(fr.mu_min >= 1.0 - 1e-6);
}

TEST_CASE("infimum of the moment norm matches the closed form") {
  auto zero = inf_moment_norm(torus_sp({{1}, {-1}}, {0.0}), cv({2, 1}));
  CHECK(zero.conclusive);
  CHECK(zero.semistable);
  CHECK(zero.value < 1e-8);

  auto collapse = inf_moment_norm(torus_sp({{1}, {-1}}, {0.0}), cv({1, 0}));
  CHECK(collapse.conclusive);
  CHECK(collapse.semistable);
  CHECK(collapse.value < 1e-7);

  auto positive = inf_moment_norm(torus_sp({{1}}, {1.0}), cv({1}));
  CHECK(positive.conclusive);
  CHECK_FALSE(positive.semistable);
  CHECK(positive.value == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("zero shift in closed form for an opposite pair") {
  auto sp = torus_sp({{1}, {-1}}, {0.0});
  auto zs = find_zero_shift(sp, cv({2, 1}));
  REQUIRE(zs.ok);
  CHECK(zs.mu_norm < 1e-8);
  // mu(e^{a} . (2,1)) = 0 at 4 e^{2a} = e^{-2a}, i.e. a = log(1/2)/2
  CHECK(zs.s0.tv(0).real() == doctest::Approx(0.5 * std::log(0.5)).epsilon(1e-6));

  auto trivial = find_zero_shift(sp, cv({1, 1}));
  REQUIRE(trivial.ok);
  CHECK(trivial.s0.tv.norm() < 1e-12);
}

TEST_CASE("zero shift fails honestly on a strictly semistable point") {
  // the infimum over the shift directions is not attained for v = (1,0)
  auto sp = torus_sp({{1}, {-1}}, {0.0});
  auto zs = find_zero_shift(sp, cv({1, 0}));
  CHECK_FALSE(zs.ok);
  CHECK_FALSE(zs.failure.empty());
  CHECK(zs.mu_norm > 0.0);
}

TEST_CASE("zero shift commutes with the stabilizer for matrix actions") {
  // nondegenerate quadratic form xy under the symmetric square, tau = -1
  auto rep = Representation::gl_sym(2);
  RVec tau(1);
  tau << -1.0;
  auto sp = Symplectization::make(rep, tau);
  Vec v = cv({0, 1, 0});
  auto zs = find_zero_shift(sp, v);
  REQUIRE(zs.ok);
  CHECK(zs.mu_norm < 1e-8);
  auto stab = stabilizer_algebra(sp.rep, v);
  for (const auto& b : stab.k_v) {
    Mat bracket = zs.s0.gm * b.gm - b.gm * zs.s0.gm;
    CHECK(bracket.norm() < 1e-7 * std::max(1.0, zs.s0.gm.norm()));
  }
}

TEST_CASE("boundedness probe: the three regimes") {
  auto bounded = boundedness_probe(torus_sp({{1}, {-1}}, {0.0}), cv({2, 1}));
  CHECK(bounded.kind == Boundedness::bounded_below);
  CHECK_FALSE(bounded.heuristic);
  double astar = 0.5 * std::log(0.5);
  double psimin = (std::exp(2 * astar) - 1.0) + 0.25 * (std::exp(-2 * astar) - 1.0);
  CHECK(bounded.inf_estimate == doctest::Approx(psimin).epsilon(1e-4));

  auto flat = boundedness_probe(torus_sp({{1}, {-1}}, {0.0}), cv({1, 0}));
  CHECK(flat.kind == Boundedness::bounded_below);
  CHECK(flat.inf_estimate == doctest::Approx(-0.25).epsilon(1e-4));

  auto unbounded = boundedness_probe(torus_sp({{1}}, {1.0}), cv({1}));
  CHECK(unbounded.kind == Boundedness::unbounded);
  CHECK(unbounded.weight < -0.5);
  // the measured large-t slope approaches the maximal weight
  CHECK(unbounded.slope == doctest::Approx(unbounded.weight).epsilon(1e-3));
}

TEST_CASE("the descent never increases the functional") {
  std::mt19937_64 rng(61);
  std::uniform_int_distribution<int> wd(-3, 3), kd(1, 2), nd(2, 4), td(-1, 1);
  std::normal_distribution<double> g(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    int k = kd(rng), n = nd(rng);
    Eigen::MatrixXi chi(n, k);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < k; ++j) chi(i, j) = wd(rng);
    RVec tau(k);
    for (int j = 0; j < k; ++j) tau(j) = double(td(rng));
    auto sp = Symplectization::make(Representation::torus_weights(chi), tau);
    Vec v(n);
    for (int i = 0; i < n; ++i) v(i) = cx(g(rng), g(rng));
    auto fr = kn_descent(sp, v);
    CHECK(fr.psi_monotone);
    CHECK(fr.mu_min <= fr.mu_final + 1e-12);
  }
}

TEST_CASE("all collapse directions land in the same compact orbit") {
  // v = (1,1) for weights {1,0}: every admissible collapse kills the first
  // coordinate and the limits agree up to the compact group (here: moduli)
  auto sp = torus_sp({{1}, {0}}, {0.0});
  Vec v = cv({1, 1});
  std::vector<double> dirs = {-1.0, -0.5, -0.25};
  Vec first;
  for (double d : dirs) {
    auto lim = limit_point(sp, AlgebraElement::torus(Vec::Ones(1) * d), v);
    REQUIRE(lim.value.has_value());
    auto zs = find_zero_shift(sp, *lim.value);
    REQUIRE(zs.ok);
    Vec y = act(sp.rep, zs.s0, 1.0, *lim.value).value;
    if (first.size() == 0)
      first = y;
    else
      CHECK((y.cwiseAbs() - first.cwiseAbs()).norm() < 1e-8);
  }
}

TEST_CASE("moment-map zeros reached by the flow have reductive stabilizers") {
  auto rep = Representation::gl_sym(2);
  RVec tau(1);
  tau << -1.0;
  auto sp = Symplectization::make(rep, tau);
  for (auto& v : {cv({0, 1, 0}), cv({1, 0, 1})}) {
    auto zs = find_zero_shift(sp, v);
    REQUIRE(zs.ok);
    Vec y = act(sp.rep, zs.s0, 1.0, v).value;
    CHECK(moment_vector(sp, y).norm < 1e-8);
    auto stab = stabilizer_algebra(sp.rep, y);
    CHECK(stab.reductive);
  }
}
