#include <catch_amalgamated.hpp>

#include "support.hpp"

using namespace subnyq;
using namespace subnyq::test;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("mirror and reflection", "[symmetry]") {
  std::mt19937_64 rng(71);
  const CVec x = random_cvec(12, rng);
  CHECK(mirror(mirror(x)) == x);
  CHECK(mirror(CVec::Unit(12, 0)) == CVec::Unit(12, 11));
  CHECK(reflect(reflect(x)) == x);
  CHECK_THROWS_AS(mirror(x, 10), Error);

  // A symmetric expansion is mirror-invariant except for the pinned first slot.
  const HalfSpectrum h{random_rvec(5, rng), 0.3};
  const CVec e = h.expand();
  CHECK(reflect(e) == e);
  CHECK((mirror(e).head(11) - e.tail(11)).norm() == 0.0);
}

TEST_CASE("half spectrum expansion", "[symmetry]") {
  std::mt19937_64 rng(73);
  const HalfSpectrum h{random_rvec(9, rng), -0.4};
  const CVec e = h.expand();
  REQUIRE(e.size() == 20);
  CHECK(e[0] == 0.0);
  CHECK_THAT(e.squaredNorm(), WithinRel(h.power(), 1e-14));
  CHECK_THAT(h.power(), WithinRel(2.0 * h.g_r.squaredNorm() + h.g0 * h.g0, 1e-14));
  const HalfSpectrum back = HalfSpectrum::contract(e);
  CHECK(back.g_r == h.g_r);
  CHECK(back.g0 == h.g0);
  CHECK(HalfSpectrum::from_stacked(h.stacked()).g_r == h.g_r);

  // Real even spectrum gives a real time-domain signal.
  const SystemConfig c = default_config(1);
  const FrequencyOps ops(c);
  const HalfSpectrum g{random_rvec(c.K / 2 - 1, rng), 1.1};
  CVec t(c.N * 7);
  const CVec full = g.expand();
  for (int n = 0; n < t.size(); ++n) {
    cd acc = 0.0;
    for (int p = 0; p < c.K; ++p) acc += full[p] * std::polar(1.0, 2.0 * kPi * c.harmonic_at(p) * n / t.size());
    t[n] = acc;
  }
  CHECK(t.imag().norm() <= 1e-10 * t.norm());
}

TEST_CASE("reduced transmit form", "[symmetry]") {
  const RMat id = reduce_transmit_form(CMat::Identity(10, 10));
  RVec expect = RVec::Constant(5, 2.0);
  expect[4] = 1.0;
  CHECK((id - RMat(expect.asDiagonal())).norm() == 0.0);

  std::mt19937_64 rng(79);
  for (int i = 0; i < 50; ++i) {
    const CMat phi = random_hermitian(16, rng);
    const HalfSpectrum h{random_rvec(7, rng), random_rvec(1, rng)[0]};
    const CVec e = h.expand();
    const double full = std::real(e.dot(phi * e));
    const RVec y = h.stacked();
    CHECK_THAT(y.dot(reduce_transmit_form(phi) * y), WithinRel(full, 1e-10));
  }

  // K = 4 by hand: slots (-2, -1, 0, 1); y = [g_{-1}, g_0], g_{-1} = g_1.
  const CMat phi = random_hermitian(4, rng);
  const RMat half = reduce_transmit_form(phi);
  CHECK_THAT(half(0, 0), WithinAbs((phi(1, 1) + phi(1, 3) + phi(3, 1) + phi(3, 3)).real(), 1e-14));
  CHECK_THAT(half(0, 1), WithinAbs(0.5 * (phi(1, 2) + phi(3, 2) + phi(2, 1) + phi(2, 3)).real(), 1e-14));
  CHECK_THAT(half(1, 1), WithinAbs(phi(2, 2).real(), 1e-14));
}

TEST_CASE("reduced receive forms", "[symmetry]") {
  const ParameterPrior prior = default_prior();
  const Mat2 m = weight_matrix(0.4, prior);

  SECTION("scalar groups") {
    const SystemConfig c = default_config(0);
    const FrequencyOps ops(c);
    std::mt19937_64 rng(83);
    const auto deltas = delta_aggregate(ops, random_cvec(c.K, rng), m, prior, 3, c.n0);
    const ReducedReceiveForms r = reduce_receive_forms(deltas, c.N);
    CHECK(static_cast<int>(r.paired.size()) == c.N / 2 - 1);
    for (int k = -c.N / 2 + 1; k <= -1; ++k) {
      CHECK(r.paired[k + c.N / 2 - 1](0, 0) == deltas[k + c.N / 2](0, 0) + deltas[-k + c.N / 2](0, 0));
    }
    CHECK(r.lone_dc == deltas[c.N / 2]);
    CHECK(r.lone_nyquist == deltas[0]);
  }

  SECTION("symmetric filters see the same objective") {
    const SystemConfig c = default_config(1);
    const FrequencyOps ops(c);
    std::mt19937_64 rng(89);
    for (int i = 0; i < 50; ++i) {
      const auto deltas = delta_aggregate(ops, random_cvec(c.K, rng), m, prior, 3, c.n0);
      const ReducedReceiveForms r = reduce_receive_forms(deltas, c.N);
      CHECK(static_cast<int>(r.paired.size()) + 2 == c.N / 2 + 1);
      const CVec h = random_symmetric_receive(c.K, 1000 + i);
      CHECK_THAT(reduced_receive_objective(ops, r, h), WithinRel(receive_objective(ops, deltas, h), 1e-10));
    }
  }

  CHECK_THROWS_AS(reduce_receive_forms(std::vector<CMat>(3), 4), Error);
}

TEST_CASE("symmetric group basis", "[symmetry]") {
  for (int size : {1, 2, 3, 4, 5}) {
    for (bool nyquist : {false, true}) {
      const RMat Q = symmetric_group_basis(size, nyquist);
      CHECK((Q.transpose() * Q - RMat::Identity(Q.cols(), Q.cols())).norm() < 1e-14);
      for (int j = 0; j < Q.cols(); ++j) {
        const RVec q = Q.col(j);
        const int off = nyquist ? 1 : 0;
        const RVec tail = q.tail(size - off);
        CHECK((tail - tail.reverse()).norm() < 1e-14);
      }
    }
  }
}
