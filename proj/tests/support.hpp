#pragma once

#include <cstdint>
#include <random>

#include "subnyq/optimizer.hpp"

namespace subnyq::test {

/// 25 MHz sampling, 2 us period, 1 ns / 5 kHz prior.
inline SystemConfig default_config(int L = 1, double n0 = 1.0) { return build_config(25e6, 2e-6, L, 1.0, n0); }

inline ParameterPrior default_prior() { return make_prior(1e-9, 5e3); }

inline CVec random_cvec(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  CVec x(n);
  for (int i = 0; i < n; ++i) {
    const double re = nd(rng);
    const double im = nd(rng);
    x[i] = cd(re, im);
  }
  return x;
}

inline RVec random_rvec(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  RVec x(n);
  for (int i = 0; i < n; ++i) x[i] = nd(rng);
  return x;
}

inline CMat random_hermitian(int n, std::mt19937_64& rng) {
  CMat a(n, n);
  for (int j = 0; j < n; ++j) a.col(j) = random_cvec(n, rng);
  return 0.5 * (a + a.adjoint());
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

template <class A, class B>
double rel_err_mat(const A& a, const B& b) {
  return (a - b).norm() / std::max(b.norm(), 1e-300);
}

}  // namespace subnyq::test
