#pragma once

#include <complex>
#include <numbers>
#include <utility>

#include <Eigen/Dense>

#include "subnyq/error.hpp"

namespace subnyq {

using cd = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;
using RMat = Eigen::MatrixXd;
using Mat2 = Eigen::Matrix2d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cd kJ{0.0, 1.0};

/// Delay (s) and Doppler shift (Hz).
struct Theta {
  double tau = 0.0;
  double nu = 0.0;
};

/// Fourier coefficients on the harmonic grid {-K/2, ..., K/2-1}. Position p holds
/// harmonic p - K/2.
class Spectrum {
 public:
  Spectrum() = default;
  explicit Spectrum(CVec coeffs) : coeffs_(std::move(coeffs)) {}

  static Spectrum zeros(int K) { return Spectrum(CVec::Zero(K)); }
  static Spectrum constant(int K, cd value) { return Spectrum(CVec::Constant(K, value)); }

  int size() const noexcept { return static_cast<int>(coeffs_.size()); }
  const CVec& coeffs() const noexcept { return coeffs_; }
  CVec& coeffs() noexcept { return coeffs_; }

  cd harmonic(int k) const {
    const int pos = k + size() / 2;
    if (pos < 0 || pos >= size()) throw Error(Errc::IndexOutOfRange, "harmonic " + std::to_string(k));
    return coeffs_[pos];
  }

  double power() const { return coeffs_.squaredNorm(); }

  /// Copy rescaled so that the power equals `target`.
  Spectrum with_power(double target) const {
    const double p = power();
    if (p <= 0.0) throw Error(Errc::NonPositiveInput, "cannot normalize a zero spectrum");
    return Spectrum(coeffs_ * std::sqrt(target / p));
  }

 private:
  CVec coeffs_;
};

inline void require_length(const CVec& x, int expected, const char* what) {
  if (x.size() != expected) {
    throw Error(Errc::LengthMismatch, std::string(what) + ": expected length " + std::to_string(expected) +
                                          ", got " + std::to_string(x.size()));
  }
}

}  // namespace subnyq
