#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "subnyq/model.hpp"

namespace subnyq {

/// Complex Fresnel integral Z(u) = int_0^u exp(j pi a^2 / 2) da.
inline cd fresnel(double u) {
  const double x = std::abs(u);
  cd z = 0.0;
  if (x < 0.5) {
    // Power series; terms fall off like (pi/8)^n / n!.
    const cd q = kJ * (kPi / 2.0) * x * x;
    cd term = x;
    for (int n = 0; n < 30; ++n) {
      z += term / static_cast<double>(2 * n + 1);
      term *= q / static_cast<double>(n + 1);
    }
  } else {
    // Integrate piecewise between nodes sqrt(2i) where the phase advances by pi;
    // one 31-point Kronrod rule resolves each piece to rounding.
    using boost::math::quadrature::gauss_kronrod;
    auto re = [](double a) { return std::cos(0.5 * kPi * a * a); };
    auto im = [](double a) { return std::sin(0.5 * kPi * a * a); };
    double lo = 0.0;
    for (int i = 1; lo < x; ++i) {
      const double hi = std::min(x, std::sqrt(2.0 * i));
      const double c = gauss_kronrod<double, 31>::integrate(re, lo, hi, 0, 0.0);
      const double s = gauss_kronrod<double, 31>::integrate(im, lo, hi, 0, 0.0);
      z += cd(c, s);
      lo = hi;
    }
  }
  return u < 0.0 ? -z : z;
}

/// Default +-1 code of length M from a seeded generator.
inline std::vector<int> default_code(int M, std::uint64_t seed = 1) {
  std::mt19937_64 rng(seed);
  std::vector<int> code(M);
  for (int& b : code) b = (rng() >> 63) ? 1 : -1;
  return code;
}

/// Rectangular phase code: rect pulse of width 2 Ts band-limited to fs, convolved
/// with the code, sampled at the harmonics and normalized to P_T.
inline CVec rpc_waveform(const SystemConfig& c, const std::vector<int>& code) {
  const int M = c.N / 2;
  if (static_cast<int>(code.size()) != M) {
    throw Error(Errc::CodeLengthMismatch,
                "code length " + std::to_string(code.size()) + " != N/2 = " + std::to_string(M));
  }
  for (int b : code) {
    if (b != 1 && b != -1) throw Error(Errc::InvalidConfig, "code entries must be +1 or -1");
  }
  const double T = 2.0 * c.ts;
  CVec g = CVec::Zero(c.K);
  for (int p = 0; p < c.K; ++p) {
    const int k = c.harmonic_at(p);
    if (k < -c.N / 2 || k >= c.N / 2) continue;
    const double w = k * c.omega0;
    const double pulse = (k == 0) ? T : 2.0 * std::sin(0.5 * w * T) / w;
    cd code_sum = 0.0;
    for (int m = 0; m < M; ++m) code_sum += static_cast<double>(code[m]) * std::polar(1.0, -w * m * T);
    g[p] = pulse * code_sum;
  }
  return Spectrum(g).with_power(c.pt).coeffs();
}

/// Closed-form spectrum of a rect-windowed chirp exp(j mu t^2 / 2), |t| < T/2.
inline cd lfm_spectrum(double omega, double T, double mu) {
  const double a = std::sqrt(1.0 / (kPi * mu));
  const double b = std::sqrt(mu * T * T / (4.0 * kPi));
  return std::sqrt(kPi / mu) * std::polar(1.0, -omega * omega / (2.0 * mu)) *
         (fresnel(a * omega + b) + fresnel(-a * omega + b));
}

inline double lfm_default_slope(const SystemConfig& c) { return 4.0 * kPi * c.N / (3.0 * c.t0 * c.t0); }

inline CVec lfm_waveform(const SystemConfig& c, double T, double mu) {
  if (!(T > 0.0) || T > c.t0 * (1.0 + 1e-12)) throw Error(Errc::InvalidConfig, "LFM pulse length must be in (0, T0]");
  if (!(mu > 0.0)) throw Error(Errc::NonPositiveInput, "LFM slope must be positive");
  CVec g(c.K);
  for (int p = 0; p < c.K; ++p) g[p] = lfm_spectrum(c.harmonic_at(p) * c.omega0, T, mu);
  return Spectrum(g).with_power(c.pt).coeffs();
}

inline CVec lfm_waveform(const SystemConfig& c) { return lfm_waveform(c, c.t0, lfm_default_slope(c)); }

/// Ideal low-pass: H_k = 1 for -B_ref/2 <= k f0 < B_ref/2.
inline CVec reference_lowpass(const SystemConfig& c, double b_ref) {
  if (!(b_ref > 0.0) || b_ref > c.bandwidth * (1.0 + 1e-12)) {
    throw Error(Errc::BandwidthOutOfRange, "reference bandwidth must lie in (0, B]");
  }
  // Compare in units of f0 so band edges on a harmonic stay exact.
  const double edge = 0.5 * b_ref / c.f0;
  CVec h = CVec::Zero(c.K);
  for (int p = 0; p < c.K; ++p) {
    const double k = c.harmonic_at(p);
    if (k >= -edge - 1e-9 && k < edge - 1e-9) h[p] = 1.0;
  }
  return h;
}

inline CVec reference_lowpass(const SystemConfig& c) { return reference_lowpass(c, c.fs); }

}  // namespace subnyq
