#pragma once

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "subnyq/symmetry.hpp"
#include "subnyq/waveforms.hpp"

namespace subnyq {

/// Weighting M' = diag(alpha, 1 - alpha) applied to the prior-normalized
/// parameters (tau / sigma_tau, nu / sigma_nu), expressed in SI units.
inline Mat2 weight_matrix(double alpha, const ParameterPrior& prior) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(Errc::InvalidConfig, "alpha must lie in [0, 1]");
  Mat2 m = Mat2::Zero();
  m(0, 0) = alpha * prior.sigma_tau * prior.sigma_tau;
  m(1, 1) = (1.0 - alpha) * prior.sigma_nu * prior.sigma_nu;
  return m;
}

/// Flips the sign (or for complex vectors, the phase) so that the first entry
/// with non-negligible magnitude is real and positive.
inline void fix_sign(CVec& v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-12 * scale) {
      v *= std::conj(v[i]) / std::abs(v[i]);
      v[i] = std::abs(v[i]);
      return;
    }
  }
}

inline void fix_sign(RVec& v) {
  const double scale = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) > 1e-12 * scale) {
      if (v[i] < 0.0) v = -v;
      return;
    }
  }
}

inline bool is_degenerate(const RVec& ascending_eigenvalues) {
  const Eigen::Index n = ascending_eigenvalues.size();
  if (n < 2) return false;
  const double top = ascending_eigenvalues[n - 1];
  return top - ascending_eigenvalues[n - 2] <= 1e-12 * std::abs(top);
}

struct TransmitStep {
  CVec g;
  double value = 0.0;  // objective attained, g^H Phi g
  bool degenerate = false;
};

/// Maximizes g^H Phi g subject to ||g||^2 = P_T. In symmetric mode g is real,
/// even and pinned at -K/2; the power weights 2 (paired harmonics) and 1 (DC)
/// are absorbed so the constraint is met exactly.
inline TransmitStep transmit_step(const CMat& phi, double pt, bool full_space = false) {
  TransmitStep out;
  const Eigen::Index K = phi.rows();
  if (full_space) {
    Eigen::SelfAdjointEigenSolver<CMat> es(phi);
    out.degenerate = is_degenerate(es.eigenvalues());
    CVec v = phi.isZero(0.0) ? CVec(CVec::Unit(K, 0)) : CVec(es.eigenvectors().col(K - 1));
    fix_sign(v);
    out.g = std::sqrt(pt) * v;
  } else {
    const RMat half = reduce_transmit_form(phi);
    const Eigen::Index m = half.rows();
    RVec sinv = RVec::Constant(m, 1.0 / std::sqrt(2.0));
    sinv[m - 1] = 1.0;
    const RMat scaled = sinv.asDiagonal() * half * sinv.asDiagonal();
    Eigen::SelfAdjointEigenSolver<RMat> es(scaled);
    out.degenerate = is_degenerate(es.eigenvalues());
    RVec u = half.isZero(0.0) ? RVec(RVec::Unit(m, 0)) : RVec(es.eigenvectors().col(m - 1));
    fix_sign(u);
    const RVec y = std::sqrt(pt) * sinv.cwiseProduct(u);
    out.g = HalfSpectrum::from_stacked(y).expand();
  }
  out.value = transmit_objective(phi, out.g);
  return out;
}

struct ReceiveStep {
  CVec h;
  double value = 0.0;  // sum of Rayleigh quotients
  int degenerate_groups = 0;
};

/// Top eigenvector of a real symmetric form restricted to span(Q), unit norm.
inline RVec top_restricted(const RMat& form, const RMat& Q, bool& degenerate, double& value) {
  const RMat sub = Q.transpose() * form * Q;
  Eigen::SelfAdjointEigenSolver<RMat> es(sub);
  degenerate = is_degenerate(es.eigenvalues());
  value = es.eigenvalues()[sub.rows() - 1];
  RVec v = Q * es.eigenvectors().col(sub.rows() - 1);
  fix_sign(v);
  return v;
}

/// Independently maximizes each aliasing group's Rayleigh quotient. In symmetric
/// mode filters are real with h_{-k} = Pi h_k; the self-mapped DC and Nyquist
/// groups are searched within their symmetric subspaces.
inline ReceiveStep receive_step(const FrequencyOps& ops, const std::vector<CMat>& deltas, bool full_space = false) {
  const AliasPartition& part = ops.partition();
  const int N = ops.N();
  ReceiveStep out;
  out.h = CVec::Zero(ops.K());
  const auto place = [&](int row, const CVec& v) {
    for (int i = 0; i < part.group_size(row); ++i) out.h[part.member_position(row, i)] = v[i];
  };

  if (full_space) {
    for (int r = 0; r < N; ++r) {
      Eigen::SelfAdjointEigenSolver<CMat> es(deltas[r]);
      const Eigen::Index n = deltas[r].rows();
      if (is_degenerate(es.eigenvalues())) ++out.degenerate_groups;
      CVec v = es.eigenvectors().col(n - 1);
      fix_sign(v);
      place(r, v);
      out.value += es.eigenvalues()[n - 1];
    }
    return out;
  }

  const ReducedReceiveForms forms = reduce_receive_forms(deltas, N);
  for (int k = -N / 2 + 1; k <= -1; ++k) {
    const RMat form = forms.paired[k + N / 2 - 1].real();
    const RMat Q = RMat::Identity(form.rows(), form.rows());
    bool degenerate = false;
    double value = 0.0;
    const RVec v = top_restricted(form, Q, degenerate, value);
    out.degenerate_groups += degenerate;
    out.value += value;
    place(k + N / 2, v.cast<cd>());
    place(-k + N / 2, v.reverse().cast<cd>());
  }
  for (const bool nyquist : {false, true}) {
    const int row = nyquist ? 0 : N / 2;
    const RMat form = (nyquist ? forms.lone_nyquist : forms.lone_dc).real();
    const RMat Q = symmetric_group_basis(static_cast<int>(form.rows()), nyquist);
    bool degenerate = false;
    double value = 0.0;
    const RVec v = top_restricted(form, Q, degenerate, value);
    out.degenerate_groups += degenerate;
    out.value += value;
    place(row, v.cast<cd>());
  }
  return out;
}

/// Projection onto real filters with H(-k) = H(k); the -K/2 slot is kept.
inline CVec symmetrize_receive(const CVec& h) {
  const CVec re = h.real().cast<cd>();
  CVec out = 0.5 * (re + reflect(re));
  out[0] = re[0];
  return out;
}

/// Random real symmetric receive filter.
inline CVec random_symmetric_receive(int K, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  CVec h(K);
  for (int p = 0; p < K; ++p) h[p] = dist(rng);
  return symmetrize_receive(h);
}

struct DesignOptions {
  int nodes = 15;
  double eps = 1e-6;
  int max_iter = 100;
  int restarts = 3;
  std::uint64_t seed = 1;
  bool full_space = false;
};

struct DesignResult {
  CVec g;
  CVec h;
  double alpha = 0.0;
  double initial_objective = 0.0;
  std::vector<double> trace;  // after every half-step: transmit, receive, transmit, ...
  int iterations = 0;
  bool converged = false;
  int restart = 0;
  bool degenerate = false;
  Mat2 jd = Mat2::Zero();         // exact EFIM
  Mat2 jd_approx = Mat2::Zero();  // approximated EFIM
  Gain chi;                       // from exact EFIMs
  Gain chi_approx;                // from approximated EFIMs

  double objective() const { return trace.empty() ? initial_objective : trace.back(); }
};

/// Alternating maximization of tr(M' Jbar_D), starting with a transmit step for h_init.
inline DesignResult alternate_optimize(const FrequencyOps& ops, const CVec& g_init, const CVec& h_init,
                                       const Mat2& m_weight, const ParameterPrior& prior, const DesignOptions& opt) {
  if (!(opt.eps > 0.0)) throw Error(Errc::InvalidConfig, "convergence threshold must be positive");
  if (opt.max_iter < 1) throw Error(Errc::InvalidConfig, "max_iter must be >= 1");
  const double n0 = ops.config().n0;
  const double pt = ops.config().pt;

  DesignResult res;
  res.h = opt.full_space ? h_init : symmetrize_receive(h_init);
  res.g = g_init;
  res.initial_objective =
      transmit_objective(phi_aggregate(ops, res.h, m_weight, prior, opt.nodes, n0), g_init);

  double previous = res.initial_objective;
  for (int it = 1; it <= opt.max_iter; ++it) {
    const TransmitStep ts = transmit_step(phi_aggregate(ops, res.h, m_weight, prior, opt.nodes, n0), pt, opt.full_space);
    res.g = ts.g;
    res.degenerate = res.degenerate || ts.degenerate;
    res.trace.push_back(ts.value);

    const ReceiveStep rs = receive_step(ops, delta_aggregate(ops, res.g, m_weight, prior, opt.nodes, n0), opt.full_space);
    res.h = rs.h;
    res.trace.push_back(rs.value);
    res.iterations = it;

    const double gain = (rs.value - previous) / std::max(std::abs(previous), std::numeric_limits<double>::min());
    previous = rs.value;
    if (gain < opt.eps) {
      res.converged = true;
      break;
    }
  }
  return res;
}

/// Reference transceiver: RPC transmit with the ideal low-pass receive filter.
struct ReferenceSystem {
  CVec g;
  CVec h;
  Mat2 jd = Mat2::Zero();
  Mat2 jd_approx = Mat2::Zero();
};

inline ReferenceSystem make_reference(const FrequencyOps& ops, const ParameterPrior& prior, int nodes,
                                      std::uint64_t code_seed = 1) {
  const auto& c = ops.config();
  ReferenceSystem ref;
  ref.g = rpc_waveform(c, default_code(c.N / 2, code_seed));
  ref.h = reference_lowpass(c);
  ref.jd = efim(ops, ref.g, ref.h, prior, nodes).J;
  ref.jd_approx = efim_approx(ops, ref.g, ref.h, prior, nodes, c.n0).J;
  return ref;
}

/// Fills the exact/approximated EFIMs and gains of a design.
inline void evaluate_design(const FrequencyOps& ops, const ParameterPrior& prior, const ReferenceSystem& ref,
                            int nodes, DesignResult& d) {
  d.jd = efim(ops, d.g, d.h, prior, nodes).J;
  d.jd_approx = efim_approx(ops, d.g, d.h, prior, nodes, ops.config().n0).J;
  d.chi = relative_gain(d.jd, ref.jd);
  d.chi_approx = relative_gain(d.jd_approx, ref.jd_approx);
}

/// Best of `opt.restarts` runs: the first starts from the reference filters,
/// later ones from seeded random symmetric receive filters.
inline DesignResult optimize_design(const FrequencyOps& ops, double alpha, const ParameterPrior& prior,
                                    const ReferenceSystem& ref, const DesignOptions& opt) {
  const Mat2 mw = weight_matrix(alpha, prior);
  DesignResult best;
  bool have = false;
  for (int r = 0; r < std::max(1, opt.restarts); ++r) {
    const CVec h0 = r == 0 ? ref.h : random_symmetric_receive(ops.K(), opt.seed * 1000003ULL + r);
    DesignResult d = alternate_optimize(ops, ref.g, h0, mw, prior, opt);
    d.restart = r;
    if (!have || d.objective() > best.objective()) {
      best = std::move(d);
      have = true;
    }
  }
  best.alpha = alpha;
  evaluate_design(ops, prior, ref, opt.nodes, best);
  return best;
}

struct ParetoResult {
  std::vector<DesignResult> designs;
  std::vector<std::string> failures;  // "alpha: message" for runs that threw
  int best = -1;                      // index maximizing chi_tau + chi_nu
};

inline std::vector<double> alpha_grid(int points) {
  std::vector<double> a(points);
  for (int i = 0; i < points; ++i) a[i] = points == 1 ? 1.0 : static_cast<double>(i) / (points - 1);
  return a;
}

inline ParetoResult pareto_sweep(const FrequencyOps& ops, const std::vector<double>& alphas,
                                 const ParameterPrior& prior, const ReferenceSystem& ref, const DesignOptions& opt) {
  ParetoResult out;
  for (double a : alphas) {
    try {
      out.designs.push_back(optimize_design(ops, a, prior, ref, opt));
    } catch (const Error& e) {
      out.failures.push_back(std::to_string(a) + ": " + e.what());
    }
  }
  double top = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < out.designs.size(); ++i) {
    const double s = out.designs[i].chi.tau_db + out.designs[i].chi.nu_db;
    if (s > top) {
      top = s;
      out.best = static_cast<int>(i);
    }
  }
  return out;
}

}  // namespace subnyq
