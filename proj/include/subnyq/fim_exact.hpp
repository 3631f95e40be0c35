#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "subnyq/freqops.hpp"
#include "subnyq/parallel.hpp"

namespace subnyq {

enum class FimKind { exact, approx };

inline const char* to_string(FimKind k) { return k == FimKind::exact ? "exact" : "approx"; }

/// 2x2 information matrix over (tau, nu). `nodes` is the quadrature size per
/// axis for expected values, 0 for a pointwise FIM.
struct FimResult {
  Mat2 J = Mat2::Zero();
  FimKind kind = FimKind::exact;
  int nodes = 0;
};

/// Derivatives of the noise-free received samples with respect to tau and nu.
struct SignalDerivatives {
  CVec d_tau;
  CVec d_nu;
};

inline SignalDerivatives signal_derivatives(const FrequencyOps& ops, Theta theta, cd gamma, const CVec& g,
                                            const CVec& h) {
  const auto& c = ops.config();
  require_length(g, c.K, "transmit spectrum");
  const ShiftedSpectrum hs = shifted_receive_spectrum(h, theta.nu, c);
  const DelayMatrix T = delay_matrix(theta.tau, c);

  const CVec b = (T.diag.array() * g.array() * hs.value.array()).matrix();
  const CVec b_tau = (T.d_diag.array() * g.array() * hs.value.array()).matrix();
  const CVec b_nu = (T.diag.array() * g.array() * hs.d_nu.array()).matrix();

  const CMat& W = ops.dft();
  const CVec x0 = W.adjoint() * ops.fold(b);
  const CVec x_tau = W.adjoint() * ops.fold(b_tau);
  const CVec x_nu = W.adjoint() * ops.fold(b_nu);

  const cd scale = gamma * std::sqrt(static_cast<double>(c.N));
  SignalDerivatives d{CVec(c.N), CVec(c.N)};
  for (int r = 0; r < c.N; ++r) {
    const double t = c.grid_at(r) * c.ts;
    const cd delta = std::polar(1.0, 2.0 * kPi * theta.nu * t);
    const cd d_delta = kJ * (2.0 * kPi * t) * delta;
    d.d_tau[r] = scale * delta * x_tau[r];
    d.d_nu[r] = scale * (d_delta * x0[r] + delta * x_nu[r]);
  }
  return d;
}

/// Pointwise FIM J_ij = 2 Re{dv_i^H R^{-1} dv_j}.
inline FimResult fim_exact(const FrequencyOps& ops, Theta theta, cd gamma, const CVec& g, const CVec& h,
                           const NoiseCovariance& noise) {
  const SignalDerivatives d = signal_derivatives(ops, theta, gamma, g, h);
  const CVec r_tau = noise.apply_inverse(d.d_tau);
  const CVec r_nu = noise.apply_inverse(d.d_nu);
  FimResult out;
  out.J(0, 0) = 2.0 * std::real(d.d_tau.dot(r_tau));
  out.J(1, 1) = 2.0 * std::real(d.d_nu.dot(r_nu));
  out.J(0, 1) = out.J(1, 0) = 2.0 * std::real(d.d_tau.dot(r_nu));
  return out;
}

inline FimResult fim_exact(const FrequencyOps& ops, Theta theta, cd gamma, const CVec& g, const CVec& h) {
  return fim_exact(ops, theta, gamma, g, h, noise_covariance(ops, h, ops.config().n0));
}

/// Expected FIM over the prior by tensor Gauss-Hermite quadrature.
inline FimResult efim(const FrequencyOps& ops, const CVec& g, const CVec& h, const ParameterPrior& prior,
                      int nodes_per_axis, const NoiseCovariance& noise) {
  const std::vector<QuadNode> q = prior_quadrature(prior, nodes_per_axis);
  std::vector<Mat2> parts(q.size());
  parallel_for(static_cast<int>(q.size()), [&](int i) {
    parts[i] = q[i].weight * fim_exact(ops, {q[i].tau, q[i].nu}, 1.0, g, h, noise).J;
  });
  FimResult out;
  for (const Mat2& p : parts) out.J += p;
  out.J = 0.5 * (out.J + out.J.transpose()).eval();
  out.nodes = nodes_per_axis;
  return out;
}

inline FimResult efim(const FrequencyOps& ops, const CVec& g, const CVec& h, const ParameterPrior& prior,
                      int nodes_per_axis) {
  return efim(ops, g, h, prior, nodes_per_axis, noise_covariance(ops, h, ops.config().n0));
}

/// Bayesian information J_B = J_D + J_P and its inverse, the BCRLB.
struct Bcrlb {
  Mat2 jb;
  Mat2 bound;
};

inline Bcrlb bcrlb(const Mat2& jd, const ParameterPrior& prior) {
  Bcrlb b;
  b.jb = jd + prior.pim();
  b.bound = b.jb.inverse();
  b.bound = 0.5 * (b.bound + b.bound.transpose()).eval();
  return b;
}

inline void require_invertible(const Mat2& J, const char* what) {
  const double det = J.determinant();
  if (!(J(0, 0) > 0.0) || !(J(1, 1) > 0.0) || !(det > 1e-14 * J(0, 0) * J(1, 1))) {
    throw Error(Errc::SingularInformation, std::string(what) + " information matrix is singular");
  }
}

/// Information gain in dB along each parameter: 10 log10 of the ratio of
/// inverse-EFIM diagonals, reference over system.
struct Gain {
  double tau_db = 0.0;
  double nu_db = 0.0;
};

inline Gain relative_gain(const Mat2& jd_sys, const Mat2& jd_ref) {
  require_invertible(jd_sys, "system");
  require_invertible(jd_ref, "reference");
  const Mat2 a = jd_sys.inverse();
  const Mat2 b = jd_ref.inverse();
  return {10.0 * std::log10(b(0, 0) / a(0, 0)), 10.0 * std::log10(b(1, 1) / a(1, 1))};
}

}  // namespace subnyq
