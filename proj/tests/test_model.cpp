#include <catch_amalgamated.hpp>

#include <random>

#include "support.hpp"

using namespace subnyq;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("build_config derives the sampling grid", "[model]") {
  const SystemConfig c = build_config(25e6, 2e-6, 1, 1.0, 0.0);
  CHECK(c.N == 50);
  CHECK(c.K == 150);
  CHECK_THAT(c.f0, WithinRel(500e3, 1e-12));
  CHECK_THAT(c.bandwidth, WithinRel(75e6, 1e-12));

  const SystemConfig flat = build_config(25e6, 2e-6, 0, 1.0, 0.0);
  CHECK(flat.K == 50);
  CHECK(flat.N == 50);
}

TEST_CASE("build_config rejects bad inputs", "[model]") {
  const auto code_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return Errc::Io;
  };
  CHECK(code_of([] { build_config(25e6, 3e-6, 0, 1.0, 0.0); }) == Errc::NonIntegerSampleCount);
  CHECK(code_of([] { build_config(25e6, 2.02e-6, 0, 1.0, 0.0); }) == Errc::NonIntegerSampleCount);
  CHECK(code_of([] { build_config(0.0, 2e-6, 0, 1.0, 0.0); }) == Errc::NonPositiveInput);
  CHECK(code_of([] { build_config(25e6, -2e-6, 0, 1.0, 0.0); }) == Errc::NonPositiveInput);
  CHECK(code_of([] { build_config(25e6, 2e-6, 0, 0.0, 0.0); }) == Errc::NonPositiveInput);
  CHECK(code_of([] { build_config(25e6, 2e-6, -1, 1.0, 0.0); }) == Errc::NonPositiveInput);
}

TEST_CASE("harmonic_limits follows the floor formulas", "[model]") {
  CHECK(harmonic_limits(0, 50, 150).minus == 1);
  CHECK(harmonic_limits(0, 50, 150).plus == 1);
  CHECK(harmonic_limits(0, 50, 100).minus == 1);
  CHECK(harmonic_limits(0, 50, 100).plus == 0);
  CHECK(harmonic_limits(-10, 50, 100).minus == 0);
  CHECK(harmonic_limits(-10, 50, 100).plus == 1);
  CHECK_THROWS_AS(harmonic_limits(25, 50, 150), Error);
  CHECK_THROWS_AS(harmonic_limits(-26, 50, 150), Error);

  for (int L = 0; L <= 4; ++L) {
    const SystemConfig c = build_config(25e6, 2e-6, L, 1.0, 0.0);
    for (int k = -c.N / 2; k < c.N / 2; ++k) {
      const HarmonicLimits lim = harmonic_limits(k, c);
      CHECK(lim.minus == L);
      CHECK(lim.plus == L);
    }
  }
}

TEST_CASE("aliasing groups partition the harmonics", "[model]") {
  for (int N = 2; N <= 60; N += 2) {
    for (int K = N; K <= 600; K += 2) {
      const AliasPartition part(N, K);
      std::vector<int> seen(K, 0);
      bool aligned = true;
      for (int r = 0; r < N; ++r) {
        for (int m : part.members[r]) {
          ++seen[m + K / 2];
          aligned = aligned && ((m - (r - N / 2)) % N == 0);
        }
      }
      bool once = true;
      for (int s : seen) once = once && s == 1;
      REQUIRE(once);
      REQUIRE(aligned);
    }
  }
}

TEST_CASE("prior quadrature", "[model]") {
  const ParameterPrior prior = make_prior(1e-9, 5e3, 2e-10, -300.0);

  const auto single = prior_quadrature(prior, 1);
  REQUIRE(single.size() == 1);
  CHECK(single[0].tau == prior.mu_tau);
  CHECK(single[0].nu == prior.mu_nu);
  CHECK(single[0].weight == 1.0);

  const auto q = prior_quadrature(prior, 15);
  REQUIRE(q.size() == 225);
  double sum = 0.0, mt = 0.0, mn = 0.0;
  for (const QuadNode& n : q) {
    sum += n.weight;
    mt += n.weight * n.tau;
    mn += n.weight * n.nu;
  }
  CHECK_THAT(sum, WithinAbs(1.0, 1e-12));
  CHECK_THAT(mt / prior.sigma_tau, WithinAbs(prior.mu_tau / prior.sigma_tau, 1e-10));
  CHECK_THAT(mn / prior.sigma_nu, WithinAbs(prior.mu_nu / prior.sigma_nu, 1e-10));

  // Sampled prior mean agrees within Monte-Carlo error.
  std::mt19937_64 rng(11);
  std::normal_distribution<double> nd;
  const int draws = 1000000;
  double st = 0.0, sn = 0.0;
  for (int i = 0; i < draws; ++i) {
    st += prior.mu_tau + prior.sigma_tau * nd(rng);
    sn += prior.mu_nu + prior.sigma_nu * nd(rng);
  }
  const double band = 4.0 / std::sqrt(static_cast<double>(draws));
  CHECK(std::abs(st / draws - mt) / prior.sigma_tau < band);
  CHECK(std::abs(sn / draws - mn) / prior.sigma_nu < band);
}

TEST_CASE("Gauss-Hermite rule is exact for low-degree moments", "[model]") {
  const auto double_factorial = [](int n) {
    double r = 1.0;
    for (int i = n; i > 1; i -= 2) r *= i;
    return r;
  };
  for (int n : {1, 2, 3, 5, 8, 15}) {
    const GaussHermiteRule gh = gauss_hermite(n);
    for (int deg = 0; deg <= 2 * n - 1; ++deg) {
      double m = 0.0, scale = 0.0;
      for (int i = 0; i < n; ++i) {
        m += gh.weights[i] * std::pow(gh.nodes[i], deg);
        scale += gh.weights[i] * std::pow(std::abs(gh.nodes[i]), deg);
      }
      // Odd moments cancel up to rounding of the absolute moment.
      const double exact = deg % 2 == 1 ? 0.0 : double_factorial(deg - 1);
      CHECK_THAT(m, WithinAbs(exact, 1e-12 * std::max(1.0, scale) + 1e-9 * exact));
    }
  }
  // Bivariate moments through the tensor rule.
  const ParameterPrior unit = make_prior(1.0, 1.0);
  const auto q = prior_quadrature(unit, 4);
  double m22 = 0.0, m31 = 0.0;
  for (const QuadNode& n : q) {
    m22 += n.weight * n.tau * n.tau * n.nu * n.nu;
    m31 += n.weight * std::pow(n.tau, 3) * n.nu;
  }
  CHECK_THAT(m22, WithinAbs(1.0, 1e-9));
  CHECK_THAT(m31, WithinAbs(0.0, 1e-9));
}

TEST_CASE("prior information matrix", "[model]") {
  const ParameterPrior p = make_prior(1e-9, 5e3);
  const Mat2 jp = p.pim();
  CHECK_THAT(jp(0, 0), WithinRel(1e18, 1e-12));
  CHECK_THAT(jp(1, 1), WithinRel(4e-8, 1e-12));
  CHECK(jp(0, 1) == 0.0);
  CHECK_THROWS_AS(make_prior(0.0, 1.0), Error);
}
