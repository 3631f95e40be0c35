#pragma once

#include <cmath>
#include <vector>

#include "subnyq/fim_exact.hpp"

namespace subnyq {

/// Fourier coefficient of the T0-periodic Doppler phasor: sinc(T0 nu - z).
inline double doppler_coefficient(int z, double nu, double t0) {
  const double x = t0 * nu - z;
  if (x == 0.0) return 1.0;
  if (x == std::round(x)) return 0.0;
  return std::sin(kPi * x) / (kPi * x);
}

/// d/dnu of doppler_coefficient.
inline double doppler_coefficient_derivative(int z, double nu, double t0) {
  const double x = t0 * nu - z;
  if (std::abs(x) < 1e-4) return t0 * (-kPi * kPi / 3.0) * x;
  const double s = std::sin(kPi * x) / (kPi * x);
  return t0 * (std::cos(kPi * x) - s) / x;
}

/// Coefficients d_z(nu) and their nu-derivatives for z = -(K-1) .. K-1, stored at z + K - 1.
struct DopplerKernel {
  int K = 0;
  RVec d;
  RVec dd;

  double at(int z) const { return d[z + K - 1]; }

  /// D x with [D]_mn = d_{m-n}.
  CVec apply(const CVec& x) const { return toeplitz(d, x); }
  CVec apply_derivative(const CVec& x) const { return toeplitz(dd, x); }

  RMat matrix() const { return dense(d); }
  RMat derivative_matrix() const { return dense(dd); }

 private:
  CVec toeplitz(const RVec& coef, const CVec& x) const {
    CVec out(K);
    for (int m = 0; m < K; ++m) {
      cd acc = 0.0;
      for (int n = 0; n < K; ++n) acc += coef[m - n + K - 1] * x[n];
      out[m] = acc;
    }
    return out;
  }
  RMat dense(const RVec& coef) const {
    RMat M(K, K);
    for (int m = 0; m < K; ++m) {
      for (int n = 0; n < K; ++n) M(m, n) = coef[m - n + K - 1];
    }
    return M;
  }
};

inline DopplerKernel doppler_kernel(double nu, const SystemConfig& c) {
  DopplerKernel k;
  k.K = c.K;
  k.d.resize(2 * c.K - 1);
  k.dd.resize(2 * c.K - 1);
  for (int z = -(c.K - 1); z <= c.K - 1; ++z) {
    k.d[z + c.K - 1] = doppler_coefficient(z, nu, c.t0);
    k.dd[z + c.K - 1] = doppler_coefficient_derivative(z, nu, c.t0);
  }
  return k;
}

/// K x K Toeplitz Doppler convolution D(nu) and dD/dnu.
struct DopplerConvolution {
  RMat D;
  RMat dD;
};

inline DopplerConvolution doppler_convolution(double nu, const SystemConfig& c) {
  const DopplerKernel k = doppler_kernel(nu, c);
  return {k.matrix(), k.derivative_matrix()};
}

/// Diagonal of Omega^{-1}: (Ts/N0) / sum of |H|^2 over each aliasing group.
/// Groups with no receive gain carry no information and get 0.
inline RVec omega_inverse(const FrequencyOps& ops, const CVec& h, double n0) {
  const auto& c = ops.config();
  require_length(h, c.K, "receive spectrum");
  if (!(n0 > 0.0)) throw Error(Errc::SingularCovariance, "noise density must be positive");
  RVec p = RVec::Zero(c.N);
  for (int q = 0; q < c.K; ++q) p[ops.partition().row_of_position[q]] += std::norm(h[q]);
  const double peak = p.maxCoeff();
  if (!(peak > 0.0)) throw Error(Errc::SingularCovariance, "receive filter is identically zero");
  RVec out(c.N);
  for (int r = 0; r < c.N; ++r) out[r] = p[r] < 1e-15 * peak ? 0.0 : c.ts / (n0 * p[r]);
  return out;
}

/// Delay weights -j k omega0 per harmonic position.
inline CVec delay_weights(const SystemConfig& c) {
  CVec e(c.K);
  for (int p = 0; p < c.K; ++p) e[p] = -kJ * (c.harmonic_at(p) * c.omega0);
  return e;
}

/// Approximated received spectrum gamma A (h o D(nu) T(tau) g) and its time samples.
inline ReceivedSignal approx_received_spectrum(const FrequencyOps& ops, Theta theta, cd gamma, const CVec& g,
                                               const CVec& h) {
  const auto& c = ops.config();
  require_length(g, c.K, "transmit spectrum");
  require_length(h, c.K, "receive spectrum");
  const DelayMatrix T = delay_matrix(theta.tau, c);
  const CVec dtg = doppler_kernel(theta.nu, c).apply((T.diag.array() * g.array()).matrix());
  ReceivedSignal out;
  out.freq = gamma * ops.fold((h.array() * dtg.array()).matrix());
  out.time = ops.to_time(out.freq);
  return out;
}

/// xi_i = sqrt(N) dC/dtheta_i g at one node, with a precomputed Doppler kernel.
struct XiPair {
  CVec tau;
  CVec nu;
};

inline XiPair xi_vectors(const SystemConfig& c, const DopplerKernel& dk, double tau, const CVec& g,
                         const CVec& e_tau) {
  const DelayMatrix T = delay_matrix(tau, c);
  const CVec tg = (T.diag.array() * g.array()).matrix();
  const CVec tkg = (tg.array() * e_tau.array()).matrix();
  const double s = std::sqrt(static_cast<double>(c.N));
  return {s * dk.apply(tkg), s * dk.apply_derivative(tg)};
}

/// Approximated pointwise FIM: 2N Re{(A(h o dC_i g))^H Omega^{-1} A(h o dC_j g)}.
inline FimResult fim_approx(const FrequencyOps& ops, Theta theta, const CVec& g, const CVec& h, double n0) {
  const auto& c = ops.config();
  require_length(g, c.K, "transmit spectrum");
  const RVec winv = omega_inverse(ops, h, n0);
  const XiPair xi = xi_vectors(c, doppler_kernel(theta.nu, c), theta.tau, g, delay_weights(c));
  const CVec y_tau = ops.fold((h.array() * xi.tau.array()).matrix());
  const CVec y_nu = ops.fold((h.array() * xi.nu.array()).matrix());
  FimResult out;
  out.kind = FimKind::approx;
  const auto form = [&](const CVec& a, const CVec& b) {
    cd acc = 0.0;
    for (int r = 0; r < c.N; ++r) acc += std::conj(a[r]) * winv[r] * b[r];
    return 2.0 * acc.real();
  };
  out.J(0, 0) = form(y_tau, y_tau);
  out.J(1, 1) = form(y_nu, y_nu);
  out.J(0, 1) = out.J(1, 0) = form(y_tau, y_nu);
  return out;
}

/// Expected approximated FIM over the prior.
inline FimResult efim_approx(const FrequencyOps& ops, const CVec& g, const CVec& h, const ParameterPrior& prior,
                             int nodes_per_axis, double n0) {
  const std::vector<QuadNode> q = prior_quadrature(prior, nodes_per_axis);
  std::vector<Mat2> parts(q.size());
  parallel_for(static_cast<int>(q.size()), [&](int i) {
    parts[i] = q[i].weight * fim_approx(ops, {q[i].tau, q[i].nu}, g, h, n0).J;
  });
  FimResult out;
  out.kind = FimKind::approx;
  out.nodes = nodes_per_axis;
  for (const Mat2& p : parts) out.J += p;
  out.J = 0.5 * (out.J + out.J.transpose()).eval();
  return out;
}

/// Symmetrized weights (M'_ij + M'_ji) used by both quadratic forms.
inline Mat2 pair_weights(const Mat2& m) { return m + m.transpose(); }

/// Transmit quadratic form: Hermitian K x K Phi with g^H Phi g = tr(M' Jbar_D).
///
/// Per Doppler node the Gram matrices G_ab = (A H D_a)^H Omega^{-1} (A H D_b)
/// are formed once; the delay average then reduces to multiplying G by the
/// characteristic sums c(k_m - k_n) of the delay nodes.
inline CMat phi_aggregate(const FrequencyOps& ops, const CVec& h, const Mat2& m_weight, const ParameterPrior& prior,
                          int nodes_per_axis, double n0) {
  const auto& c = ops.config();
  const int K = c.K;
  const RVec winv = omega_inverse(ops, h, n0);
  const PriorRule rule = prior_rule(prior, nodes_per_axis);
  const Mat2 mw = pair_weights(m_weight);
  if (mw.isZero(0.0)) return CMat::Zero(K, K);

  // Delay characteristic sums over k_m - k_n.
  CVec cdelay(2 * K - 1);
  for (int d = -(K - 1); d <= K - 1; ++d) {
    cd acc = 0.0;
    for (Eigen::Index q = 0; q < rule.tau.size(); ++q) {
      acc += rule.tau_weights[q] * std::polar(1.0, d * c.omega0 * rule.tau[q]);
    }
    cdelay[d + K - 1] = acc;
  }

  const RVec wsqrt = winv.cwiseSqrt();
  const int nq = static_cast<int>(rule.nu.size());
  std::vector<CMat> g00(nq), g01(nq), g11(nq);
  parallel_for(nq, [&](int q) {
    const DopplerKernel dk = doppler_kernel(rule.nu[q], c);
    const CMat hd0 = h.asDiagonal() * dk.matrix().cast<cd>();
    const CMat hd1 = h.asDiagonal() * dk.derivative_matrix().cast<cd>();
    const CMat z0 = wsqrt.asDiagonal() * ops.fold_rows(hd0);
    const CMat z1 = wsqrt.asDiagonal() * ops.fold_rows(hd1);
    const double w = rule.nu_weights[q];
    g00[q] = w * (z0.adjoint() * z0);
    g01[q] = w * (z0.adjoint() * z1);
    g11[q] = w * (z1.adjoint() * z1);
  });
  CMat G00 = CMat::Zero(K, K), G01 = CMat::Zero(K, K), G11 = CMat::Zero(K, K);
  for (int q = 0; q < nq; ++q) {
    G00 += g00[q];
    G01 += g01[q];
    G11 += g11[q];
  }

  const CVec e = delay_weights(c);
  const double n = static_cast<double>(c.N);
  CMat phi(K, K);
  for (int a = 0; a < K; ++a) {
    for (int b = 0; b < K; ++b) {
      const cd cm = cdelay[a - b + K - 1];
      const cd tt = std::conj(e[a]) * G00(a, b) * e[b];
      const cd tn = std::conj(e[a]) * G01(a, b);
      const cd nt = std::conj(G01(b, a)) * e[b];
      const cd nn = G11(a, b);
      phi(a, b) = n * cm * (mw(0, 0) * tt + mw(0, 1) * tn + mw(1, 0) * nt + mw(1, 1) * nn);
    }
  }
  return 0.5 * (phi + phi.adjoint());
}

inline double transmit_objective(const CMat& phi, const CVec& g) { return std::real(g.dot(phi * g)); }

/// Receive quadratic forms: one Hermitian Delta_k per aliasing group (indexed by
/// row k + N/2, members in ascending harmonic order) such that
/// sum_k h_k^H Delta_k h_k / h_k^H h_k = tr(M' Jbar_D).
inline std::vector<CMat> delta_aggregate(const FrequencyOps& ops, const CVec& g, const Mat2& m_weight,
                                         const ParameterPrior& prior, int nodes_per_axis, double n0) {
  const auto& c = ops.config();
  require_length(g, c.K, "transmit spectrum");
  if (!(n0 > 0.0)) throw Error(Errc::SingularCovariance, "noise density must be positive");
  const AliasPartition& part = ops.partition();
  const PriorRule rule = prior_rule(prior, nodes_per_axis);
  const Mat2 mw = pair_weights(m_weight);
  const CVec e = delay_weights(c);
  const int nq = static_cast<int>(rule.nu.size());

  std::vector<std::vector<CMat>> partial(nq);
  parallel_for(nq, [&](int q) {
    const DopplerKernel dk = doppler_kernel(rule.nu[q], c);
    std::vector<CMat> acc(c.N);
    for (int r = 0; r < c.N; ++r) acc[r] = CMat::Zero(part.group_size(r), part.group_size(r));
    for (Eigen::Index t = 0; t < rule.tau.size(); ++t) {
      const XiPair xi = xi_vectors(c, dk, rule.tau[t], g, e);
      const double w = rule.tau_weights[t] * rule.nu_weights[q];
      for (int r = 0; r < c.N; ++r) {
        const int sz = part.group_size(r);
        CVec a(sz), b(sz);
        for (int i = 0; i < sz; ++i) {
          a[i] = xi.tau[part.member_position(r, i)];
          b[i] = xi.nu[part.member_position(r, i)];
        }
        const CVec ac = a.conjugate();
        const CVec bc = b.conjugate();
        acc[r] += w * (mw(0, 0) * ac * a.transpose() + mw(0, 1) * ac * b.transpose() +
                       mw(1, 0) * bc * a.transpose() + mw(1, 1) * bc * b.transpose());
      }
    }
    partial[q] = std::move(acc);
  });

  std::vector<CMat> out(c.N);
  const double scale = c.ts / n0;
  for (int r = 0; r < c.N; ++r) {
    out[r] = CMat::Zero(part.group_size(r), part.group_size(r));
    for (int q = 0; q < nq; ++q) out[r] += partial[q][r];
    out[r] = scale * 0.5 * (out[r] + out[r].adjoint()).eval();
  }
  return out;
}

/// Rayleigh quotient h^H Delta h / h^H h, defined as 0 for h = 0.
inline double rayleigh(const CMat& delta, const CVec& h) {
  const double nn = h.squaredNorm();
  if (nn == 0.0) return 0.0;
  return std::real(h.dot(delta * h)) / nn;
}

/// Group slice h_k of a full receive spectrum.
inline CVec group_slice(const AliasPartition& part, int row, const CVec& h) {
  CVec out(part.group_size(row));
  for (int i = 0; i < part.group_size(row); ++i) out[i] = h[part.member_position(row, i)];
  return out;
}

inline double receive_objective(const FrequencyOps& ops, const std::vector<CMat>& deltas, const CVec& h) {
  require_length(h, ops.K(), "receive spectrum");
  double total = 0.0;
  for (int r = 0; r < ops.N(); ++r) total += rayleigh(deltas[r], group_slice(ops.partition(), r, h));
  return total;
}

}  // namespace subnyq
