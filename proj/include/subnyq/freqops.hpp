#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Cholesky>

#include "subnyq/model.hpp"

namespace subnyq {

/// Operators shared by every receive-model evaluation: the aliasing partition,
/// the centered unitary DFT and the harmonic/grid index tables.
class FrequencyOps {
 public:
  explicit FrequencyOps(const SystemConfig& config) : config_(config), partition_(config) {
    const int N = config_.N;
    const int K = config_.K;
    W_.resize(N, N);
    const double scale = 1.0 / std::sqrt(static_cast<double>(N));
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < N; ++j) {
        const long long prod = static_cast<long long>(i - N / 2) * (j - N / 2);
        const double phase = -2.0 * kPi * static_cast<double>(prod % N) / N;
        W_(i, j) = std::polar(scale, phase);
      }
    }
    harmonics_.resize(K);
    for (int p = 0; p < K; ++p) harmonics_[p] = config_.harmonic_at(p);
    grid_.resize(N);
    for (int r = 0; r < N; ++r) grid_[r] = config_.grid_at(r);
  }

  const SystemConfig& config() const noexcept { return config_; }
  const AliasPartition& partition() const noexcept { return partition_; }
  const CMat& dft() const noexcept { return W_; }
  /// Harmonic index of each spectrum position, as doubles.
  const RVec& harmonics() const noexcept { return harmonics_; }
  /// Centered sample index of each time/grid position.
  const RVec& grid() const noexcept { return grid_; }
  int N() const noexcept { return config_.N; }
  int K() const noexcept { return config_.K; }

  /// A x: sums each aliasing group into its grid bin.
  CVec fold(const CVec& x) const {
    require_length(x, K(), "fold");
    CVec out = CVec::Zero(N());
    for (int p = 0; p < K(); ++p) out[partition_.row_of_position[p]] += x[p];
    return out;
  }

  /// A X for a K-row matrix.
  CMat fold_rows(const CMat& X) const {
    CMat out = CMat::Zero(N(), X.cols());
    for (int p = 0; p < K(); ++p) out.row(partition_.row_of_position[p]) += X.row(p);
    return out;
  }

  CVec to_time(const CVec& spectrum) const { return std::sqrt(static_cast<double>(N())) * (W_.adjoint() * spectrum); }
  CVec to_freq(const CVec& time) const { return (W_ * time) / std::sqrt(static_cast<double>(N())); }

 private:
  SystemConfig config_;
  AliasPartition partition_;
  CMat W_;
  RVec harmonics_;
  RVec grid_;
};

/// Dense N x K 0/1 aliasing matrix.
inline RMat aliasing_matrix(const SystemConfig& config) {
  const AliasPartition part(config);
  RMat A = RMat::Zero(config.N, config.K);
  for (int p = 0; p < config.K; ++p) A(part.row_of_position[p], p) = 1.0;
  return A;
}

/// Diagonal of T(tau) and of its tau-derivative.
struct DelayMatrix {
  CVec diag;
  CVec d_diag;
};

inline DelayMatrix delay_matrix(double tau, const SystemConfig& c) {
  DelayMatrix t{CVec(c.K), CVec(c.K)};
  for (int p = 0; p < c.K; ++p) {
    const double w = c.harmonic_at(p) * c.omega0;
    t.diag[p] = std::polar(1.0, -w * tau);
    t.d_diag[p] = -kJ * w * t.diag[p];
  }
  return t;
}

/// Time-domain Doppler diagonal Delta(nu), the Doppler convolution matrix
/// W Delta W^H, and the nu-derivatives of both.
struct DopplerMatrices {
  CVec diag;
  CVec d_diag;
  CMat conv;
  CMat d_conv;
};

inline DopplerMatrices doppler_matrices(double nu, const FrequencyOps& ops) {
  const auto& c = ops.config();
  DopplerMatrices d{CVec(c.N), CVec(c.N), CMat(), CMat()};
  for (int r = 0; r < c.N; ++r) {
    const double t = c.grid_at(r) * c.ts;
    d.diag[r] = std::polar(1.0, 2.0 * kPi * nu * t);
    d.d_diag[r] = kJ * (2.0 * kPi * t) * d.diag[r];
  }
  const CMat& W = ops.dft();
  d.conv = W * d.diag.asDiagonal() * W.adjoint();
  d.d_conv = W * d.d_diag.asDiagonal() * W.adjoint();
  return d;
}

/// Band-limited interpolation kernel on the harmonic grid: the real, even,
/// K*omega0-periodic Dirichlet kernel evaluated at offset d + s bins, together
/// with its derivative with respect to s.
struct KernelValue {
  double value;
  double d_ds;
};

inline KernelValue dirichlet_kernel(int d, double s, int K) {
  const double x = d + s;
  if (d == 0 && std::abs(s) < 0.05) {
    // Direct cosine sum avoids the 0/0 in the closed form near the origin.
    const double phi = 2.0 * kPi * x / K;
    double v = 1.0 + std::cos(0.5 * K * phi);
    double dv = -0.5 * K * std::sin(0.5 * K * phi);
    for (int p = 1; p < K / 2; ++p) {
      v += 2.0 * std::cos(p * phi);
      dv -= 2.0 * p * std::sin(p * phi);
    }
    return {v / K, dv / K * (2.0 * kPi / K)};
  }
  const double sign = (d % 2 == 0) ? 1.0 : -1.0;
  const double sin_num = sign * std::sin(kPi * s);
  const double cos_num = sign * std::cos(kPi * s);
  const double a = kPi * x / K;
  const double sa = std::sin(a);
  const double cot = std::cos(a) / sa;
  const double v = sin_num * cot / K;
  const double dv = (kPi * cos_num * cot - sin_num * (kPi / K) / (sa * sa)) / K;
  return {v, dv};
}

inline void check_doppler_range(double nu, const SystemConfig& c) {
  if (!(std::abs(nu) < 0.5 * c.f0)) {
    throw Error(Errc::DopplerOutOfRange, "|nu| = " + std::to_string(std::abs(nu)) + " Hz must stay below f0/2");
  }
}

/// h(nu): the receive response at k*omega0 + 2*pi*nu, and its nu-derivative.
struct ShiftedSpectrum {
  CVec value;
  CVec d_nu;
};

inline ShiftedSpectrum shifted_receive_spectrum(const CVec& h, double nu, const SystemConfig& c) {
  require_length(h, c.K, "receive spectrum");
  check_doppler_range(nu, c);
  const int K = c.K;
  const double s = nu * c.t0;
  std::vector<double> ker(2 * K - 1);
  std::vector<double> dker(2 * K - 1);
  for (int d = -(K - 1); d <= K - 1; ++d) {
    const KernelValue kv = dirichlet_kernel(d, s, K);
    ker[d + K - 1] = kv.value;
    dker[d + K - 1] = kv.d_ds * c.t0;
  }
  ShiftedSpectrum out{CVec::Zero(K), CVec::Zero(K)};
  for (int k = 0; k < K; ++k) {
    cd v = 0.0;
    cd dv = 0.0;
    const int base = k + K - 1;
    for (int m = 0; m < K; ++m) {
      v += h[m] * ker[base - m];
      dv += h[m] * dker[base - m];
    }
    out.value[k] = v;
    out.d_nu[k] = dv;
  }
  if (nu == 0.0) out.value = h;
  return out;
}

inline ShiftedSpectrum shifted_receive_spectrum(const Spectrum& h, double nu, const SystemConfig& c) {
  return shifted_receive_spectrum(h.coeffs(), nu, c);
}

/// Interpolated receive response H(omega) at an arbitrary frequency.
inline cd receive_response(const CVec& h, double omega, const SystemConfig& c) {
  const double x = omega / c.omega0;
  const int K = c.K;
  cd out = 0.0;
  for (int m = 0; m < K; ++m) {
    const double off = x - c.harmonic_at(m);
    const int d = static_cast<int>(std::lround(off));
    out += h[m] * dirichlet_kernel(d, off - d, K).value;
  }
  return out;
}

/// Sampled noise-free received signal in time (v) and frequency (v~) domains,
/// v = sqrt(N) W^H v~.
struct ReceivedSignal {
  CVec time;
  CVec freq;
};

inline ReceivedSignal received_signal(const FrequencyOps& ops, Theta theta, cd gamma, const CVec& g, const CVec& h) {
  const auto& c = ops.config();
  require_length(g, c.K, "transmit spectrum");
  const ShiftedSpectrum hs = shifted_receive_spectrum(h, theta.nu, c);
  const DelayMatrix T = delay_matrix(theta.tau, c);
  const CVec u = ops.fold((T.diag.array() * g.array() * hs.value.array()).matrix());
  ReceivedSignal out;
  CVec x = ops.dft().adjoint() * u;
  for (int r = 0; r < c.N; ++r) x[r] *= std::polar(1.0, 2.0 * kPi * theta.nu * c.grid_at(r) * c.ts);
  out.time = gamma * std::sqrt(static_cast<double>(c.N)) * x;
  out.freq = ops.to_freq(out.time);
  return out;
}

inline ReceivedSignal received_signal(const FrequencyOps& ops, Theta theta, cd gamma, const Spectrum& g,
                                      const Spectrum& h) {
  return received_signal(ops, theta, gamma, g.coeffs(), h.coeffs());
}

enum class CovarianceKind { circulant, toeplitz };

/// Noise covariance of the filtered, sampled white noise.
struct NoiseCovariance {
  CovarianceKind kind = CovarianceKind::circulant;
  double n0 = 0.0;
  CMat R;       // time domain
  CMat R_freq;  // W R W^H
  RVec omega;   // diagonal model: (N0/Ts) * aliased |H|^2 per grid bin
  CMat W;
  Eigen::LLT<CMat> llt;

  bool invertible() const { return n0 > 0.0; }

  /// R^{-1} x in the time domain.
  CVec apply_inverse(const CVec& x) const {
    if (!invertible()) throw Error(Errc::SingularCovariance, "noise covariance is zero (N0 = 0)");
    if (kind == CovarianceKind::circulant) {
      CVec f = W * x;
      f.array() /= omega.array();
      return W.adjoint() * f;
    }
    return llt.solve(x);
  }
};

inline NoiseCovariance noise_covariance(const FrequencyOps& ops, const CVec& h, double n0,
                                        CovarianceKind kind = CovarianceKind::circulant) {
  const auto& c = ops.config();
  require_length(h, c.K, "receive spectrum");
  const int N = c.N;
  const int K = c.K;

  RVec aliased = RVec::Zero(N);
  for (int p = 0; p < K; ++p) aliased[ops.partition().row_of_position[p]] += std::norm(h[p]);
  const double peak = aliased.maxCoeff();
  if (!(peak > 0.0) || aliased.minCoeff() < 1e-15 * peak) {
    throw Error(Errc::SingularCovariance, "receive filter removes an entire aliasing group");
  }

  NoiseCovariance nc;
  nc.kind = kind;
  nc.n0 = n0;
  nc.W = ops.dft();
  nc.omega = (n0 / c.ts) * aliased;

  // Autocorrelation r(m Ts) for lags m = -(N-1) .. N-1.
  std::vector<cd> r(2 * N - 1, 0.0);
  if (kind == CovarianceKind::circulant) {
    for (int m = -(N - 1); m <= N - 1; ++m) {
      cd acc = 0.0;
      for (int p = 0; p < K; ++p) {
        const long long km = static_cast<long long>(c.harmonic_at(p)) * m;
        acc += std::norm(h[p]) * std::polar(1.0, 2.0 * kPi * static_cast<double>(km % N) / N);
      }
      r[m + N - 1] = n0 * c.f0 * acc;
    }
  } else {
    // Continuous-frequency integral of |H(omega)|^2 over one period of the
    // interpolant; the midpoint rule with 4 points per bin is exact here.
    constexpr int kPerBin = 4;
    const int M = K * kPerBin;
    std::vector<double> power(M);
    std::vector<double> freq(M);
    for (int i = 0; i < M; ++i) {
      const double x = -0.5 * K + (i + 0.5) / kPerBin;
      freq[i] = x * c.omega0;
      power[i] = std::norm(receive_response(h, freq[i], c));
    }
    for (int m = -(N - 1); m <= N - 1; ++m) {
      cd acc = 0.0;
      for (int i = 0; i < M; ++i) acc += power[i] * std::polar(1.0, freq[i] * m * c.ts);
      r[m + N - 1] = n0 / (2.0 * kPi) * (c.omega0 / kPerBin) * acc;
    }
  }

  nc.R.resize(N, N);
  for (int a = 0; a < N; ++a) {
    for (int b = 0; b < N; ++b) nc.R(a, b) = r[a - b + N - 1];
  }
  nc.R_freq = nc.W * nc.R * nc.W.adjoint();
  if (kind == CovarianceKind::toeplitz && n0 > 0.0) {
    nc.llt.compute(nc.R);
    if (nc.llt.info() != Eigen::Success) throw Error(Errc::SingularCovariance, "Toeplitz covariance not positive definite");
  }
  return nc;
}

inline NoiseCovariance noise_covariance(const FrequencyOps& ops, const Spectrum& h, double n0,
                                        CovarianceKind kind = CovarianceKind::circulant) {
  return noise_covariance(ops, h.coeffs(), n0, kind);
}

}  // namespace subnyq
