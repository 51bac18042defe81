#include <doctest.h>

#include <bit>
#include <cmath>
#include <random>

#include "qfno/dense.hpp"
#include "qfno/error.hpp"
#include "qfno/measure.hpp"
#include "qfno/states.hpp"
#include "test_support.hpp"

using namespace qfno;
using namespace qfno::testing;

TEST_CASE("rbs_matrix") {
  CHECK(max_abs_diff(rbs_matrix(0.0), Eigen::Matrix4cd::Identity()) == 0.0);

  const double t = 0.731;
  const auto m = rbs_matrix(t);
  CHECK(m(1, 1).real() == doctest::Approx(std::cos(t)));
  CHECK(m(1, 2).real() == doctest::Approx(std::sin(t)));
  CHECK(m(2, 1).real() == doctest::Approx(-std::sin(t)));
  CHECK(m(2, 2).real() == doctest::Approx(std::cos(t)));

  const auto q = rbs_matrix(-kPi / 4);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(q(1, 1) - r) < 1e-15);
  CHECK(std::abs(q(1, 2) + r) < 1e-15);
  CHECK(std::abs(q(2, 1) - r) < 1e-15);
  CHECK(std::abs(q(2, 2) - r) < 1e-15);
}

TEST_CASE("unary RBS matches the 4x4 column") {
  // |e_p> is |01> in the rbs_matrix basis, so its image is column 1.
  UnaryState s{CVector::Zero(2)};
  s.amps[0] = 1.0;
  apply_gate(s, Rbs{Register::Top, 0, 1, kPi / 2});
  const auto m = rbs_matrix(kPi / 2);
  CHECK(std::abs(s.amps[0] - m(1, 1)) < 1e-15);
  CHECK(std::abs(s.amps[1] - m(2, 1)) < 1e-15);
}

TEST_CASE("phase -1 twice is the identity") {
  std::mt19937_64 rng(1);
  UnaryState s{random_complex(5, rng)};
  const auto before = s.amps;
  apply_gate(s, Phase{Register::Top, 3, -1.0});
  apply_gate(s, Phase{Register::Top, 3, -1.0});
  CHECK(max_abs_diff(s.amps, before) == 0.0);
}

TEST_CASE("unary engine agrees with the dense oracle") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = random_single_register_circuit(6, 20, rng);
    UnaryState s{random_complex(6, rng)};
    const CVector dense = dense_reference_sim(c, embed_unary(s));
    apply_circuit(s, c);
    CHECK(max_abs_diff(embed_unary(s), dense) <= 1e-12);
  }
}

TEST_CASE("pair engine") {
  std::mt19937_64 rng(11);

  SUBCASE("anti-controlled Z twice is the identity") {
    PairState s{random_complex(3, 4, rng)};
    const auto before = s.amps;
    const Gate g = AntiControlledZ{1, {0, 2}};
    apply_gate(s, g);
    apply_gate(s, g);
    CHECK(max_abs_diff(s.amps, before) == 0.0);
  }

  SUBCASE("anti-controlled Z leaves its control column alone") {
    PairState s{CMatrix::Zero(3, 4)};
    s.amps.col(1) = random_complex(3, rng);
    const auto before = s.amps;
    apply_gate(s, AntiControlledZ{1, {0, 1, 2}});
    CHECK(max_abs_diff(s.amps, before) == 0.0);
  }

  SUBCASE("dense agreement on 3x4") {
    for (int trial = 0; trial < 20; ++trial) {
      const auto c = random_pair_circuit(3, 4, 25, rng);
      PairState s{random_complex(3, 4, rng)};
      const CVector dense = dense_reference_sim(c, embed_pair(s));
      apply_circuit(s, c);
      CHECK(max_abs_diff(embed_pair(s), dense) <= 1e-12);
    }
  }

  SUBCASE("index errors") {
    PairState s{random_complex(3, 4, rng)};
    CHECK_THROWS_AS(apply_gate(s, Rbs{Register::Bottom, 0, 4, 0.1}), Error);
    CHECK_THROWS_AS(apply_gate(s, AntiControlledZ{4, {0}}), Error);
  }
}

TEST_CASE("weight-2 engine") {
  std::mt19937_64 rng(13);

  SUBCASE("index bijection") {
    const int n = 7;
    for (int k = 0; k < hw2_dim(n); ++k) {
      auto [p, q] = hw2_pair(n, k);
      CHECK(p < q);
      CHECK(hw2_index(n, p, q) == k);
    }
  }

  SUBCASE("RBS leaves its own pair alone") {
    Hw2State s = Hw2State::zero(5);
    s.amps[hw2_index(5, 1, 3)] = 1.0;
    apply_gate(s, Rbs{Register::Top, 1, 3, 0.9});
    CHECK(std::abs(s.amps[hw2_index(5, 1, 3)] - 1.0) < 1e-15);
    CHECK(s.amps.norm() == doctest::Approx(1.0));
  }

  SUBCASE("Z twice") {
    Hw2State s{6, random_complex(hw2_dim(6), rng)};
    const auto before = s.amps;
    apply_gate(s, ZGate{Register::Top, 2});
    apply_gate(s, ZGate{Register::Top, 2});
    CHECK(max_abs_diff(s.amps, before) == 0.0);
  }

  SUBCASE("dense agreement") {
    for (int trial = 0; trial < 20; ++trial) {
      const auto c = random_single_register_circuit(6, 20, rng);
      Hw2State s{6, random_complex(hw2_dim(6), rng)};
      const CVector dense = dense_reference_sim(c, embed_hw2(s));
      apply_circuit(s, c);
      CHECK(max_abs_diff(embed_hw2(s), dense) <= 1e-12);
    }
  }
}

TEST_CASE("restricted_matrix") {
  SUBCASE("empty circuit") {
    Circuit c(RegisterLayout{4, 0});
    CHECK(max_abs_diff(restricted_matrix(c, Sector::Hw1), CMatrix::Identity(4, 4)) == 0.0);
    CHECK(max_abs_diff(restricted_matrix(c, Sector::Hw2), CMatrix::Identity(6, 6)) == 0.0);
  }
  SUBCASE("single RBS is the middle block") {
    const double t = 0.4;
    Circuit c(RegisterLayout{2, 0}, {Rbs{Register::Top, 0, 1, t}});
    const CMatrix m = restricted_matrix(c, Sector::Hw1);
    CHECK(max_abs_diff(m, rbs_matrix(t).block(1, 1, 2, 2)) <= 1e-15);
  }
  SUBCASE("unitary") {
    std::mt19937_64 rng(3);
    const auto c = random_single_register_circuit(8, 40, rng);
    for (auto sector : {Sector::Hw1, Sector::Hw2}) {
      const CMatrix m = restricted_matrix(c, sector);
      CHECK(max_abs_diff(m.adjoint() * m, CMatrix::Identity(m.rows(), m.cols())) <= 1e-10);
    }
  }
  SUBCASE("weight-2 cap") {
    Circuit c(RegisterLayout{70, 0});
    CHECK_THROWS_AS(restricted_matrix(c, Sector::Hw2), Error);
    CHECK_NOTHROW(restricted_matrix(c, Sector::Hw1));
  }
}

TEST_CASE("dense oracle") {
  std::mt19937_64 rng(5);

  SUBCASE("identity circuit") {
    Circuit c(RegisterLayout{4, 0});
    const CVector psi = random_complex(16, rng);
    CHECK(max_abs_diff(dense_reference_sim(c, psi), psi) == 0.0);
  }

  SUBCASE("RBS then Z equals Z then RBS(-theta)") {
    std::uniform_real_distribution<double> angle(-3.0, 3.0);
    for (int trial = 0; trial < 10; ++trial) {
      const double t = angle(rng);
      for (int z : {0, 1}) {
        Circuit lhs(RegisterLayout{2, 0}, {Rbs{Register::Top, 0, 1, t}, ZGate{Register::Top, z}});
        Circuit rhs(RegisterLayout{2, 0}, {ZGate{Register::Top, z}, Rbs{Register::Top, 0, 1, -t}});
        const CVector psi = random_complex(4, rng);
        CHECK(max_abs_diff(dense_reference_sim(lhs, psi), dense_reference_sim(rhs, psi)) <= 1e-14);
      }
    }
  }

  SUBCASE("weight sectors are never mixed") {
    const int n = 6;
    const auto c = random_single_register_circuit(n, 30, rng);
    for (std::uint64_t basis = 0; basis < (1u << n); ++basis) {
      CVector psi = CVector::Zero(1 << n);
      psi[static_cast<Eigen::Index>(basis)] = 1.0;
      const CVector out = dense_reference_sim(c, psi);
      double leak = 0.0;
      for (std::uint64_t k = 0; k < (1u << n); ++k) {
        if (std::popcount(k) != std::popcount(basis)) leak = std::max(leak, std::abs(out[static_cast<Eigen::Index>(k)]));
      }
      CHECK(leak == 0.0);
    }
  }

  SUBCASE("qubit cap") {
    Circuit c(RegisterLayout{13, 0});
    CHECK_THROWS_AS(dense_reference_sim(c, CVector::Zero(1 << 13)), Error);
  }
}

TEST_CASE("measurement") {
  SUBCASE("deterministic state") {
    PairState s{CMatrix::Zero(2, 3)};
    s.amps(1, 2) = 1.0;
    const auto counts = measure_sample(s, 1000, 4);
    CHECK(counts(1, 2) == 1000);
    CHECK(counts.sum() == 1000);
  }
  SUBCASE("uniform 2x2 estimates") {
    PairState s{CMatrix::Constant(2, 2, Complex{0.5, 0.0})};
    const auto est = amp_estimates(measure_sample(s, 1000000, 9));
    CHECK((est.array() - 0.5).abs().maxCoeff() <= 5e-3);
  }
  SUBCASE("seeded determinism") {
    std::mt19937_64 rng(2);
    PairState s{random_complex(3, 5, rng)};
    CHECK(measure_sample(s, 5000, 42) == measure_sample(s, 5000, 42));
  }
  SUBCASE("requires normalisation") {
    PairState s{CMatrix::Constant(2, 2, Complex{1.0, 0.0})};
    CHECK_THROWS_AS(measure_sample(s, 10, 1), Error);
  }
}
