#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "subnyq/types.hpp"

namespace subnyq {

/// System parameters plus every quantity derived from them. Immutable once built.
struct SystemConfig {
  double fs = 0.0;  // sampling rate, Hz
  double t0 = 0.0;  // signal period, s
  int L = 0;        // bandwidth factor, B = (2L+1) fs
  double pt = 1.0;  // transmit power budget
  double n0 = 0.0;  // noise power spectral density

  int N = 0;  // samples per period
  int K = 0;  // harmonics
  double f0 = 0.0;
  double omega0 = 0.0;
  double omega_s = 0.0;
  double ts = 0.0;
  double bandwidth = 0.0;

  int harmonic_at(int pos) const noexcept { return pos - K / 2; }
  int position_of_harmonic(int k) const noexcept { return k + K / 2; }
  int grid_at(int row) const noexcept { return row - N / 2; }
  int row_of_grid(int k) const noexcept { return k + N / 2; }

  /// Same system with a different noise level.
  SystemConfig with_n0(double n0_new) const {
    SystemConfig c = *this;
    c.n0 = n0_new;
    return c;
  }
};

inline SystemConfig build_config(double fs, double t0, int L, double pt, double n0) {
  if (!(fs > 0.0)) throw Error(Errc::NonPositiveInput, "sampling rate must be positive");
  if (!(t0 > 0.0)) throw Error(Errc::NonPositiveInput, "period must be positive");
  if (!(pt > 0.0)) throw Error(Errc::NonPositiveInput, "transmit power must be positive");
  if (!(n0 >= 0.0)) throw Error(Errc::NonPositiveInput, "noise density must be non-negative");
  if (L < 0) throw Error(Errc::NonPositiveInput, "bandwidth factor L must be >= 0");

  const double samples = t0 * fs;
  const double rounded = std::round(samples);
  if (std::abs(samples - rounded) > 1e-9 * std::max(1.0, samples) || rounded < 2.0 ||
      static_cast<long long>(rounded) % 2 != 0) {
    throw Error(Errc::NonIntegerSampleCount,
                "T0*fs = " + std::to_string(samples) + " is not a positive even integer");
  }

  SystemConfig c;
  c.fs = fs;
  c.t0 = t0;
  c.L = L;
  c.pt = pt;
  c.n0 = n0;
  c.N = static_cast<int>(rounded);
  c.K = (2 * L + 1) * c.N;
  c.f0 = 1.0 / t0;
  c.omega0 = 2.0 * kPi * c.f0;
  c.omega_s = 2.0 * kPi * fs;
  c.ts = 1.0 / fs;
  c.bandwidth = (2 * L + 1) * fs;
  return c;
}

struct HarmonicLimits {
  int minus = 0;
  int plus = 0;
};

inline int floor_div(int a, int b) {
  int q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

/// Fold counts of grid bin k: how many harmonics below and above k alias onto it.
inline HarmonicLimits harmonic_limits(int k, int N, int K) {
  if (k < -N / 2 || k >= N / 2) throw Error(Errc::IndexOutOfRange, "grid index " + std::to_string(k));
  return {floor_div(K / 2 + k, N), floor_div(K / 2 - 1 - k, N)};
}

inline HarmonicLimits harmonic_limits(int k, const SystemConfig& c) { return harmonic_limits(k, c.N, c.K); }

/// Partition of the harmonic set into the N aliasing groups F_k.
struct AliasPartition {
  int N = 0;
  int K = 0;
  std::vector<HarmonicLimits> limits;       // per row (k + N/2)
  std::vector<std::vector<int>> members;    // harmonic indices of F_k, ascending
  std::vector<int> row_of_position;         // harmonic position -> row

  AliasPartition() = default;
  AliasPartition(int n, int k_count) : N(n), K(k_count) {
    limits.resize(N);
    members.resize(N);
    row_of_position.assign(K, -1);
    for (int row = 0; row < N; ++row) {
      const int k = row - N / 2;
      limits[row] = harmonic_limits(k, N, K);
      for (int l = -limits[row].minus; l <= limits[row].plus; ++l) {
        const int m = k + l * N;
        members[row].push_back(m);
        row_of_position[m + K / 2] = row;
      }
    }
  }

  explicit AliasPartition(const SystemConfig& c) : AliasPartition(c.N, c.K) {}

  int group_size(int row) const { return static_cast<int>(members[row].size()); }

  /// Position (0-based, into a length-K vector) of the i-th member of group `row`.
  int member_position(int row, int i) const { return members[row][i] + K / 2; }
};

/// Independent Gaussian prior on (tau, nu).
struct ParameterPrior {
  double mu_tau = 0.0;
  double mu_nu = 0.0;
  double sigma_tau = 1.0;
  double sigma_nu = 1.0;

  Mat2 pim() const {
    Mat2 p = Mat2::Zero();
    p(0, 0) = 1.0 / (sigma_tau * sigma_tau);
    p(1, 1) = 1.0 / (sigma_nu * sigma_nu);
    return p;
  }

  Theta mean() const { return {mu_tau, mu_nu}; }
};

inline ParameterPrior make_prior(double sigma_tau, double sigma_nu, double mu_tau = 0.0, double mu_nu = 0.0) {
  if (!(sigma_tau > 0.0) || !(sigma_nu > 0.0)) {
    throw Error(Errc::NonPositiveInput, "prior standard deviations must be positive");
  }
  return {mu_tau, mu_nu, sigma_tau, sigma_nu};
}

/// One-dimensional Gauss-Hermite rule for the standard normal density
/// (probabilists' convention). Weights sum to one.
struct GaussHermiteRule {
  RVec nodes;
  RVec weights;
};

/// Golub-Welsch on the Jacobi matrix of the probabilists' Hermite polynomials.
/// Nodes are symmetrized so that x_i = -x_{n-1-i} holds exactly.
inline GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw Error(Errc::NonPositiveInput, "quadrature needs at least one node");
  GaussHermiteRule rule;
  if (n == 1) {
    rule.nodes = RVec::Zero(1);
    rule.weights = RVec::Ones(1);
    return rule;
  }
  RVec diag = RVec::Zero(n);
  RVec sub(n - 1);
  for (int i = 1; i < n; ++i) sub[i - 1] = std::sqrt(static_cast<double>(i));
  Eigen::SelfAdjointEigenSolver<RMat> es;
  es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
  RVec x = es.eigenvalues();
  RVec w(n);
  for (int i = 0; i < n; ++i) w[i] = es.eigenvectors()(0, i) * es.eigenvectors()(0, i);

  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const int j = n - 1 - i;
    rule.nodes[i] = 0.5 * (x[i] - x[j]);
    rule.weights[i] = 0.5 * (w[i] + w[j]);
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  rule.weights /= rule.weights.sum();
  return rule;
}

struct QuadNode {
  double tau = 0.0;
  double nu = 0.0;
  double weight = 0.0;
};

/// Tensor-product rule over the prior: each axis carries its own 1-D rule mapped to
/// N(mu, sigma^2). Tensor nodes are ordered tau-major.
struct PriorRule {
  RVec tau;
  RVec tau_weights;
  RVec nu;
  RVec nu_weights;

  std::vector<QuadNode> nodes() const {
    std::vector<QuadNode> out;
    out.reserve(static_cast<size_t>(tau.size() * nu.size()));
    for (Eigen::Index a = 0; a < tau.size(); ++a) {
      for (Eigen::Index b = 0; b < nu.size(); ++b) {
        out.push_back({tau[a], nu[b], tau_weights[a] * nu_weights[b]});
      }
    }
    return out;
  }

  int size() const { return static_cast<int>(tau.size() * nu.size()); }
};

inline PriorRule prior_rule(const ParameterPrior& prior, int nodes_per_axis) {
  const GaussHermiteRule gh = gauss_hermite(nodes_per_axis);
  PriorRule r;
  r.tau = (prior.mu_tau + prior.sigma_tau * gh.nodes.array()).matrix();
  r.nu = (prior.mu_nu + prior.sigma_nu * gh.nodes.array()).matrix();
  r.tau_weights = gh.weights;
  r.nu_weights = gh.weights;
  return r;
}

inline std::vector<QuadNode> prior_quadrature(const ParameterPrior& prior, int nodes_per_axis) {
  return prior_rule(prior, nodes_per_axis).nodes();
}

}  // namespace subnyq
