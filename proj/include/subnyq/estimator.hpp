#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "subnyq/fim_exact.hpp"

namespace subnyq {

/// Circular standard complex Gaussian vector, E|z_i|^2 = 1.
template <class Rng>
CVec complex_gaussian(int n, Rng& rng) {
  std::normal_distribution<double> dist(0.0, std::sqrt(0.5));
  CVec z(n);
  for (int i = 0; i < n; ++i) {
    const double re = dist(rng);
    const double im = dist(rng);
    z[i] = cd(re, im);
  }
  return z;
}

/// Draws eta ~ CN(0, R) using the DFT square root (circulant) or the Cholesky factor.
template <class Rng>
CVec sample_noise(const NoiseCovariance& noise, Rng& rng) {
  const Eigen::Index N = noise.R.rows();
  if (noise.n0 == 0.0) return CVec::Zero(N);
  if (noise.kind == CovarianceKind::circulant) {
    const double trace = noise.omega.sum();
    if (noise.omega.minCoeff() < -1e-9 * trace) throw Error(Errc::FactorizationFailure, "covariance not PSD");
    const CVec z = complex_gaussian(static_cast<int>(N), rng);
    return noise.W.adjoint() * (noise.omega.cwiseMax(0.0).cwiseSqrt().cast<cd>().cwiseProduct(z));
  }
  if (noise.llt.info() != Eigen::Success) throw Error(Errc::FactorizationFailure, "Cholesky factor unavailable");
  return noise.llt.matrixL() * complex_gaussian(static_cast<int>(N), rng);
}

/// Noise-free template s(theta) = received_signal(theta, gamma = 1) in time.
inline CVec template_signal(const FrequencyOps& ops, Theta theta, const CVec& g, const CVec& h) {
  return received_signal(ops, theta, 1.0, g, h).time;
}

/// Closed-form path-gain estimate (s^H R^{-1} y) / (s^H R^{-1} s).
inline cd gamma_hat(const FrequencyOps& ops, const CVec& y, Theta theta, const CVec& g, const CVec& h,
                    const NoiseCovariance& noise) {
  const CVec s = template_signal(ops, theta, g, h);
  const CVec ws = noise.apply_inverse(s);
  const double d = std::real(s.dot(ws));
  if (!(d > 0.0) || !std::isfinite(d)) throw Error(Errc::ZeroSignal, "template has no energy");
  return ws.dot(y) / d;
}

/// f_MAP(theta): concentrated likelihood minus the quadratic prior penalty.
inline double map_objective(const FrequencyOps& ops, const CVec& y, Theta theta, const ParameterPrior& prior,
                            const CVec& g, const CVec& h, const NoiseCovariance& noise) {
  const CVec s = template_signal(ops, theta, g, h);
  const CVec ws = noise.apply_inverse(s);
  const double d = std::real(s.dot(ws));
  const double data = d > 0.0 ? std::norm(ws.dot(y)) / d : 0.0;
  const double u = (theta.tau - prior.mu_tau) / prior.sigma_tau;
  const double v = (theta.nu - prior.mu_nu) / prior.sigma_nu;
  return data - u * u - v * v;
}

struct MapSearch {
  int grid = 61;          // points per axis
  double span = 4.0;      // half-width in prior standard deviations
  int max_newton = 20;
  double tolerance = 1e-12;  // relative change of f_MAP
  double fd_step = 1e-3;     // finite-difference step in prior standard deviations
};

/// JMAP-ML estimator for a fixed transceiver. Grid templates are whitened once
/// for unit noise density; any N0 rescales the data term by 1/N0.
class MapEstimator {
 public:
  MapEstimator(const FrequencyOps& ops, CVec g, CVec h, const ParameterPrior& prior, MapSearch search = {},
               CovarianceKind kind = CovarianceKind::circulant)
      : ops_(ops),
        g_(std::move(g)),
        h_(std::move(h)),
        prior_(prior),
        search_(search),
        noise1_(noise_covariance(ops, h_, 1.0, kind)) {
    if (search_.grid < 1) throw Error(Errc::InvalidConfig, "search grid needs at least one point");
    const int n = search_.grid;
    for (int i = 0; i < n; ++i) axis_.push_back(n == 1 ? 0.0 : -search_.span + 2.0 * search_.span * i / (n - 1));
    white_.resize(static_cast<size_t>(n) * n);
    energy_.resize(static_cast<size_t>(n) * n);
    parallel_for(n * n, [&](int idx) {
      const Theta th = to_theta(axis_[idx / n], axis_[idx % n]);
      const CVec s = template_signal(ops_, th, g_, h_);
      white_[idx] = noise1_.apply_inverse(s);
      energy_[idx] = std::real(s.dot(white_[idx]));
    });
  }

  const NoiseCovariance& unit_noise() const { return noise1_; }
  const ParameterPrior& prior() const { return prior_; }
  const CVec& transmit() const { return g_; }
  const CVec& receive() const { return h_; }

  double objective(const CVec& y, double n0, Theta theta) const {
    const CVec s = template_signal(ops_, theta, g_, h_);
    const CVec ws = noise1_.apply_inverse(s);
    const double d = std::real(s.dot(ws));
    const double data = d > 0.0 ? std::norm(ws.dot(y)) / (n0 * d) : 0.0;
    return data - penalty(theta);
  }

  Theta estimate(const CVec& y, double n0) const {
    const int n = search_.grid;
    int best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (int idx = 0; idx < n * n; ++idx) {
      const Theta th = to_theta(axis_[idx / n], axis_[idx % n]);
      const double data = energy_[idx] > 0.0 ? std::norm(white_[idx].dot(y)) / (n0 * energy_[idx]) : 0.0;
      const double f = data - penalty(th);
      if (f > best_val) {
        best_val = f;
        best = idx;
      }
    }
    return refine(y, n0, axis_[best / n], axis_[best % n]);
  }

 private:
  Theta to_theta(double u, double v) const {
    return {prior_.mu_tau + u * prior_.sigma_tau, prior_.mu_nu + v * prior_.sigma_nu};
  }

  double penalty(Theta th) const {
    const double u = (th.tau - prior_.mu_tau) / prior_.sigma_tau;
    const double v = (th.nu - prior_.mu_nu) / prior_.sigma_nu;
    return u * u + v * v;
  }

  double eval(const CVec& y, double n0, double u, double v) const { return objective(y, n0, to_theta(u, v)); }

  /// Damped Newton ascent in normalized coordinates with central differences.
  /// Only improving steps are accepted, so the grid point is the fallback.
  Theta refine(const CVec& y, double n0, double u, double v) const {
    const double h = search_.fd_step;
    const double limit = search_.span + 1.0;
    double f = eval(y, n0, u, v);
    for (int it = 0; it < search_.max_newton; ++it) {
      const double fpu = eval(y, n0, u + h, v), fmu = eval(y, n0, u - h, v);
      const double fpv = eval(y, n0, u, v + h), fmv = eval(y, n0, u, v - h);
      const double fpp = eval(y, n0, u + h, v + h), fpm = eval(y, n0, u + h, v - h);
      const double fmp = eval(y, n0, u - h, v + h), fmm = eval(y, n0, u - h, v - h);
      Eigen::Vector2d grad((fpu - fmu) / (2 * h), (fpv - fmv) / (2 * h));
      Mat2 hess;
      hess(0, 0) = (fpu - 2 * f + fmu) / (h * h);
      hess(1, 1) = (fpv - 2 * f + fmv) / (h * h);
      hess(0, 1) = hess(1, 0) = (fpp - fpm - fmp + fmm) / (4 * h * h);

      Eigen::Vector2d step;
      Eigen::SelfAdjointEigenSolver<Mat2> es(hess);
      if (es.eigenvalues().maxCoeff() < 0.0) {
        step = -hess.ldlt().solve(grad);
      } else {
        // Not locally concave: gradient step scaled by the largest curvature.
        const double curv = std::max(es.eigenvalues().cwiseAbs().maxCoeff(), 1.0);
        step = grad / curv;
      }
      if (!step.allFinite()) break;
      bool improved = false;
      for (int half = 0; half < 30; ++half) {
        const double un = u + step[0], vn = v + step[1];
        if (std::abs(un) <= limit && std::abs(vn) <= limit) {
          const double fn = eval(y, n0, un, vn);
          if (fn >= f) {
            const double change = fn - f;
            u = un;
            v = vn;
            f = fn;
            improved = true;
            if (change <= search_.tolerance * std::abs(f)) return to_theta(u, v);
            break;
          }
        }
        step *= 0.5;
      }
      if (!improved) break;
    }
    return to_theta(u, v);
  }

  const FrequencyOps& ops_;
  CVec g_;
  CVec h_;
  ParameterPrior prior_;
  MapSearch search_;
  NoiseCovariance noise1_;
  std::vector<double> axis_;
  std::vector<CVec> white_;
  std::vector<double> energy_;
};

inline Theta map_estimate(const FrequencyOps& ops, const CVec& y, const ParameterPrior& prior, const CVec& g,
                          const CVec& h, double n0, MapSearch search = {}) {
  return MapEstimator(ops, g, h, prior, search).estimate(y, n0);
}

/// Gridded surface, values(i, j) at (tau[i], nu[j]), normalized to peak 1.
/// For the MAP surface value = (f - offset) / scale.
struct AmbiguitySurface {
  RVec tau;
  RVec nu;
  RMat values;
  double offset = 0.0;
  double scale = 1.0;
};

inline RVec linspace(double lo, double hi, int n) {
  RVec x(n);
  for (int i = 0; i < n; ++i) x[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1);
  return x;
}

/// Classic ambiguity: periodic correlation of the transmit signal with its
/// delayed, Doppler-shifted copy, evaluated on the harmonic representation.
inline AmbiguitySurface classic_ambiguity(const SystemConfig& c, const CVec& g, const RVec& tau, const RVec& nu) {
  require_length(g, c.K, "transmit spectrum");
  const int K = c.K;
  AmbiguitySurface s{tau, nu, RMat(tau.size(), nu.size())};
  const double peak = std::pow(c.t0 * g.squaredNorm(), 2);
  if (!(peak > 0.0)) throw Error(Errc::ZeroSignal, "transmit spectrum is zero");
  parallel_for(static_cast<int>(tau.size()), [&](int i) {
    CVec u(K);
    for (int m = 0; m < K; ++m) u[m] = std::conj(g[m]) * std::polar(1.0, -c.harmonic_at(m) * c.omega0 * tau[i]);
    for (Eigen::Index j = 0; j < nu.size(); ++j) {
      std::vector<double> sinc(2 * K - 1);
      for (int d = -(K - 1); d <= K - 1; ++d) {
        const double x = d + nu[j] * c.t0;
        sinc[d + K - 1] = x == 0.0 ? 1.0 : std::sin(kPi * x) / (kPi * x);
      }
      cd acc = 0.0;
      for (int k = 0; k < K; ++k) {
        cd inner = 0.0;
        for (int m = 0; m < K; ++m) inner += u[m] * sinc[k - m + K - 1];
        acc += g[k] * inner;
      }
      s.values(i, j) = std::norm(c.t0 * acc) / peak;
    }
  });
  return s;
}

/// MAP ambiguity: f_MAP for the noise-free input y = s(0), affinely mapped to [0, 1].
inline AmbiguitySurface map_ambiguity(const FrequencyOps& ops, const CVec& g, const CVec& h,
                                      const ParameterPrior& prior, double n0, const RVec& tau, const RVec& nu) {
  if (!(n0 > 0.0)) throw Error(Errc::NonPositiveInput, "MAP ambiguity needs a positive noise density");
  const NoiseCovariance noise = noise_covariance(ops, h, n0);
  const CVec y = template_signal(ops, prior.mean(), g, h);
  AmbiguitySurface s{tau, nu, RMat(tau.size(), nu.size())};
  parallel_for(static_cast<int>(tau.size()), [&](int i) {
    for (Eigen::Index j = 0; j < nu.size(); ++j) s.values(i, j) = map_objective(ops, y, {tau[i], nu[j]}, prior, g, h, noise);
  });
  const double lo = s.values.minCoeff();
  const double hi = s.values.maxCoeff();
  s.offset = lo;
  s.scale = hi > lo ? hi - lo : 1.0;
  s.values = ((s.values.array() - lo) / s.scale).matrix();
  return s;
}

/// Width of the connected region around the global peak where the surface
/// stays at or above `level`, along one axis through the peak (0: tau, 1: nu).
/// Edges are located by linear interpolation.
inline double peak_width(const AmbiguitySurface& s, int axis, double level = 0.5) {
  Eigen::Index pi = 0, pj = 0;
  s.values.maxCoeff(&pi, &pj);
  const RVec line = axis == 0 ? RVec(s.values.col(pj)) : RVec(s.values.row(pi).transpose());
  const RVec& x = axis == 0 ? s.tau : s.nu;
  const Eigen::Index p = axis == 0 ? pi : pj;
  auto edge = [&](int dir) {
    Eigen::Index i = p;
    while (i + dir >= 0 && i + dir < line.size() && line[i + dir] >= level) i += dir;
    if (i + dir < 0 || i + dir >= line.size()) return x[i];
    const double t = (line[i] - level) / (line[i] - line[i + dir]);
    return x[i] + t * (x[i + dir] - x[i]);
  };
  return std::abs(edge(1) - edge(-1));
}

struct McReport {
  std::vector<double> psnr_dbhz;
  std::vector<double> nmse_tau;
  std::vector<double> nmse_nu;
  std::vector<double> bcrlb_tau;  // [J_B^{-1}]_11 / sigma_tau^2
  std::vector<double> bcrlb_nu;
  std::vector<double> gamma_mse;
  std::vector<int> failures;
  int trials = 0;
  std::uint64_t seed = 0;
};

inline std::vector<double> psnr_range(double lo, double hi, double step) {
  if (!(step > 0.0) || hi < lo) throw Error(Errc::InvalidConfig, "invalid pSNR range");
  std::vector<double> out;
  for (int i = 0;; ++i) {
    const double v = lo + i * step;
    if (v > hi + 1e-9 * std::max(1.0, std::abs(hi))) break;
    out.push_back(v);
  }
  return out;
}

/// Independent generator per (seed, pSNR index, trial).
inline std::mt19937_64 trial_rng(std::uint64_t seed, int psnr_index, int trial) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(psnr_index), static_cast<std::uint32_t>(trial)};
  return std::mt19937_64(seq);
}

struct MonteCarloOptions {
  int nodes = 15;
  MapSearch search;
};

/// NMSE of the JMAP-ML estimator versus pSNR = P_T / N0, with the normalized BCRLB.
inline McReport monte_carlo(const FrequencyOps& ops, const CVec& g, const CVec& h, const ParameterPrior& prior,
                            const std::vector<double>& psnr_dbhz, int trials, std::uint64_t seed,
                            const MonteCarloOptions& opt = {}) {
  if (trials < 1) throw Error(Errc::InvalidConfig, "trials must be positive");
  const auto& c = ops.config();
  const MapEstimator est(ops, g, h, prior, opt.search);
  const Mat2 jd1 = efim(ops, g, h, prior, opt.nodes, est.unit_noise()).J;

  McReport rep;
  rep.trials = trials;
  rep.seed = seed;
  rep.psnr_dbhz = psnr_dbhz;
  for (size_t p = 0; p < psnr_dbhz.size(); ++p) {
    const double n0 = c.pt / std::pow(10.0, psnr_dbhz[p] / 10.0);
    const double amp = std::sqrt(n0);
    std::vector<std::array<double, 3>> err(trials);
    std::vector<char> failed(trials, 0);
    parallel_for(trials, [&](int t) {
      auto rng = trial_rng(seed, static_cast<int>(p), t);
      std::normal_distribution<double> nd;
      try {
        const Theta truth{prior.mu_tau + prior.sigma_tau * nd(rng), prior.mu_nu + prior.sigma_nu * nd(rng)};
        const CVec y = template_signal(ops, truth, g, h) + amp * sample_noise(est.unit_noise(), rng);
        const Theta hat = est.estimate(y, n0);
        const cd gh = gamma_hat(ops, y, hat, g, h, est.unit_noise());
        err[t] = {std::pow((hat.tau - truth.tau) / prior.sigma_tau, 2), std::pow((hat.nu - truth.nu) / prior.sigma_nu, 2),
                  std::norm(gh - 1.0)};
      } catch (const Error&) {
        failed[t] = 1;
      }
    });
    double st = 0.0, sn = 0.0, sg = 0.0;
    int ok = 0, bad = 0;
    for (int t = 0; t < trials; ++t) {
      if (failed[t]) {
        ++bad;
        continue;
      }
      st += err[t][0];
      sn += err[t][1];
      sg += err[t][2];
      ++ok;
    }
    rep.nmse_tau.push_back(ok ? st / ok : std::numeric_limits<double>::quiet_NaN());
    rep.nmse_nu.push_back(ok ? sn / ok : std::numeric_limits<double>::quiet_NaN());
    rep.gamma_mse.push_back(ok ? sg / ok : std::numeric_limits<double>::quiet_NaN());
    rep.failures.push_back(bad);
    const Bcrlb b = bcrlb(jd1 / n0, prior);
    rep.bcrlb_tau.push_back(b.bound(0, 0) / (prior.sigma_tau * prior.sigma_tau));
    rep.bcrlb_nu.push_back(b.bound(1, 1) / (prior.sigma_nu * prior.sigma_nu));
  }
  return rep;
}

}  // namespace subnyq
