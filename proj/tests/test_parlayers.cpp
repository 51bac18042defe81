#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "qfno/error.hpp"
#include "qfno/parlayers.hpp"
#include "test_support.hpp"

using namespace qfno;
using namespace qfno::testing;

namespace {

bool every_slot_split(const Layout& l, const std::vector<int>& set) {
  for (int s = 0; s < l.slot_count(); ++s) {
    if (!l.slot_active(s)) continue;
    const auto [p, q] = l.slots[s];
    const bool a = std::find(set.begin(), set.end(), p) != set.end();
    const bool b = std::find(set.begin(), set.end(), q) != set.end();
    if (a == b) return false;
  }
  return true;
}

CMatrix z_on(int n, const std::vector<int>& set) {
  CMatrix d = CMatrix::Identity(n, n);
  for (int i : set) d(i, i) = -1.0;
  return d;
}

}  // namespace

TEST_CASE("butterfly layout") {
  const auto l = Layout::butterfly(4);
  CHECK(l.slots == std::vector<std::pair<int, int>>{{0, 2}, {1, 3}, {0, 1}, {2, 3}});
  CHECK(l.layer_count() == 2);
  for (int n = 2; n <= 64; n *= 2) {
    const auto b = Layout::butterfly(n);
    CHECK(b.slot_count() == n / 2 * log2_exact(n));
    CHECK(b.layer_count() == log2_exact(n));
    CHECK(build_param_circuit(b, ThetaVector(b.slot_count(), 0.1)).depth() == log2_exact(n));
  }
  CHECK_THROWS_AS(Layout::butterfly(6), Error);
}

TEST_CASE("pyramid layout") {
  for (int n = 2; n <= 10; ++n) {
    const auto p = Layout::pyramid(n);
    CHECK(p.slot_count() == n * (n - 1) / 2);
    CHECK(p.layer_count() == 2 * n - 3);
  }
}

TEST_CASE("z_index_set") {
  CHECK(z_index_set(Layout::butterfly(4)) == std::vector<int>{0, 3});
  CHECK(z_index_set(Layout::butterfly(8)) == std::vector<int>{0, 3, 5, 6});
  CHECK(z_index_set(Layout::pyramid(5)) == std::vector<int>{0, 2, 4});
  for (int n = 2; n <= 64; n *= 2) CHECK(every_slot_split(Layout::butterfly(n), z_index_set(Layout::butterfly(n))));
  const auto padded = Layout::butterfly_padded(12);
  CHECK(every_slot_split(padded, z_index_set(padded)));
  CHECK(z_index_set(Layout::custom(4, {{0, 1}, {1, 2}, {2, 3}})) == std::vector<int>{0, 2});
  CHECK_THROWS_AS(z_index_set(Layout::custom(3, {{0, 1}, {1, 2}, {0, 2}})), Error);
}

TEST_CASE("Z conjugation reverses every angle") {
  std::mt19937_64 rng(4);
  for (const auto& l : {Layout::butterfly(8), Layout::pyramid(5), Layout::butterfly_padded(6)}) {
    const auto theta = init_theta(l, rng);
    const CMatrix p = restricted_matrix(build_param_circuit(l, theta), Sector::Hw1);
    const CMatrix pr = restricted_matrix(build_reversed(l, theta), Sector::Hw1);
    const CMatrix z = z_on(l.n, z_index_set(l));
    // P' U_Z P = U_Z, i.e. P' = U_Z P^dagger U_Z.
    CHECK(max_abs_diff(pr * z * p, z) <= 1e-12);
  }
}

TEST_CASE("controlled parametrised circuit") {
  std::mt19937_64 rng(8);
  const auto l = Layout::butterfly(4);
  const auto theta = init_theta(l, rng);
  const int n_bottom = 4;
  const int control = 2;
  const auto c = build_controlled_param(l, theta, control, n_bottom);
  PairState s{random_complex(4, n_bottom, rng)};
  const PairState before = s;
  const CVector dense = dense_reference_sim(c, embed_pair(s));
  apply_circuit(s, c);
  CHECK(max_abs_diff(embed_pair(s), dense) <= 1e-12);

  const RMatrix w = unary_weight(l, theta);
  for (int j = 0; j < n_bottom; ++j) {
    const CVector expect = j == control ? CVector(w.cast<Complex>() * before.amps.col(j)) : CVector(before.amps.col(j));
    CHECK(max_abs_diff(s.amps.col(j), expect) <= 1e-12);
  }
}

TEST_CASE("unary_weight equals the circuit restriction") {
  std::mt19937_64 rng(12);
  for (const auto& l : {Layout::butterfly(8), Layout::pyramid(6), Layout::butterfly_padded(12)}) {
    const auto theta = init_theta(l, rng);
    Circuit pp = build_param_circuit(l, theta).then(build_reversed(l, theta));
    const CMatrix u = restricted_matrix(pp, Sector::Hw1);
    const RMatrix w = unary_weight(l, theta);
    CHECK(max_abs_diff(u, w.cast<Complex>()) <= 1e-12);
    CHECK(max_abs_diff(CMatrix(w.transpose() * w), CMatrix::Identity(l.n, l.n)) <= 1e-12);
    CHECK_THROWS_AS(unary_weight(l, ThetaVector(1, 0.0)), Error);
  }
}

TEST_CASE("frozen slots of a padded butterfly") {
  const auto l = Layout::butterfly_padded(12);
  CHECK(l.n == 16);
  CHECK(l.active_slot_count() == 20);
  std::mt19937_64 rng(1);
  const auto theta = init_theta(l, rng);
  const RMatrix w = unary_weight(l, theta);
  CHECK((w.bottomRightCorner(4, 4) - RMatrix::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(w.topRightCorner(12, 4).cwiseAbs().maxCoeff() == 0.0);
  CHECK(build_param_circuit(l, theta).size() == 20u);
}

TEST_CASE("weight-2 chain equals the circuit restriction") {
  std::mt19937_64 rng(31);
  for (const auto& l : {Layout::butterfly(8), Layout::pyramid(5)}) {
    const auto theta = init_theta(l, rng);
    const CMatrix u = restricted_matrix(build_param_circuit(l, theta), Sector::Hw2);
    CHECK(max_abs_diff(u, param_chain_hw2(l).matrix(theta).cast<Complex>()) <= 1e-12);
  }
}

TEST_CASE("compound matrix") {
  SUBCASE("definition") {
    RMatrix w(3, 3);
    w << 1, 2, 3, 4, 5, 6, 7, 8, 10;
    const RMatrix c = compound_order2(w);
    // rows/cols: (0,1), (0,2), (1,2)
    CHECK(c(0, 0) == doctest::Approx(1 * 5 - 2 * 4));
    CHECK(c(2, 1) == doctest::Approx(4 * 10 - 6 * 7));
    CHECK(c(1, 2) == doctest::Approx(2 * 10 - 3 * 8));
    CHECK_THROWS_AS(compound_order2(RMatrix::Zero(2, 3)), Error);
  }

  SUBCASE("multiplicative and orthogonal") {
    std::mt19937_64 rng(2);
    const auto l = Layout::butterfly(8);
    const RMatrix a = unary_weight(l, init_theta(l, rng));
    const RMatrix b = unary_weight(l, init_theta(l, rng));
    const RMatrix cab = compound_order2(a * b);
    CHECK((cab - compound_order2(a) * compound_order2(b)).cwiseAbs().maxCoeff() <= 1e-12);
    const int d = hw2_dim(8);
    CHECK((cab.transpose() * cab - RMatrix::Identity(d, d)).cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("nearest-neighbour circuits realise the compound") {
    std::mt19937_64 rng(6);
    const auto l = Layout::pyramid(6);
    const auto theta = init_theta(l, rng);
    const RMatrix w1 = param_chain(l).matrix(theta);
    const RMatrix w2 = param_chain_hw2(l).matrix(theta);
    CHECK((w2 - compound_order2(w1)).cwiseAbs().maxCoeff() <= 1e-12);
  }

  SUBCASE("long-range RBS picks up a sign the compound does not") {
    // A gate on (0, 2) acting on the pair containing qubit 1 passes over an
    // occupied qubit, which the determinant formula cannot see.
    const auto l = Layout::butterfly(4);
    std::mt19937_64 rng(6);
    const auto theta = init_theta(l, rng);
    const RMatrix w1 = param_chain(l).matrix(theta);
    const RMatrix w2 = param_chain_hw2(l).matrix(theta);
    CHECK((w2 - compound_order2(w1)).cwiseAbs().maxCoeff() > 1e-3);
  }
}

TEST_CASE("GivensChain vjp matches finite differences") {
  std::mt19937_64 rng(44);
  for (const auto& chain : {unary_weight_chain(Layout::butterfly(8)), param_chain_hw2(Layout::pyramid(4))}) {
    int params = 0;
    for (const auto& s : chain.steps()) params = std::max(params, s.param + 1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    ThetaVector theta(params);
    for (auto& t : theta) t = u(rng);
    const RMatrix ubar = random_real(chain.dim(), chain.dim(), rng);
    const auto g = chain.vjp(theta, ubar);
    const double h = 1e-6;
    for (int k = 0; k < params; ++k) {
      auto tp = theta;
      auto tm = theta;
      tp[k] += h;
      tm[k] -= h;
      const double fd = ((chain.matrix(tp) - chain.matrix(tm)).cwiseProduct(ubar)).sum() / (2 * h);
      CHECK(g[k] == doctest::Approx(fd).epsilon(1e-6));
    }
  }
}
