#pragma once

#include <vector>

#include "subnyq/fim_approx.hpp"

namespace subnyq {

/// Index reversal: element i moves to K-1-i (0-based). An involution.
inline CVec mirror(const CVec& x) { return x.reverse(); }

inline CVec mirror(const CVec& x, int K) {
  require_length(x, K, "mirror");
  return x.reverse();
}

/// Frequency reflection k -> -k on the harmonic grid. The unpaired slot of
/// harmonic -K/2 stays in place.
inline CVec reflect(const CVec& x) {
  const Eigen::Index K = x.size();
  CVec out(K);
  out[0] = x[0];
  for (Eigen::Index p = 1; p < K; ++p) out[p] = x[K - p];
  return out;
}

/// Real, even spectrum stored on one side: g_r holds harmonics -K/2+1 .. -1 in
/// ascending order (equivalently +K/2-1 .. +1), g0 the DC coefficient.
/// Harmonic -K/2 is pinned to zero.
struct HalfSpectrum {
  RVec g_r;
  double g0 = 0.0;

  int half_size() const { return static_cast<int>(g_r.size()) + 1; }

  /// Stacked vector [g_r; g0].
  RVec stacked() const {
    RVec y(half_size());
    y.head(g_r.size()) = g_r;
    y[g_r.size()] = g0;
    return y;
  }

  static HalfSpectrum from_stacked(const RVec& y) {
    HalfSpectrum s;
    s.g_r = y.head(y.size() - 1);
    s.g0 = y[y.size() - 1];
    return s;
  }

  /// Full length-K spectrum.
  CVec expand() const {
    const int m = static_cast<int>(g_r.size());
    const int K = 2 * (m + 1);
    CVec x = CVec::Zero(K);
    for (int j = 0; j < m; ++j) {
      x[1 + j] = g_r[j];
      x[K - 1 - j] = g_r[j];
    }
    x[K / 2] = g0;
    return x;
  }

  /// Negative-side and DC real parts of a full spectrum.
  static HalfSpectrum contract(const CVec& x) {
    const int K = static_cast<int>(x.size());
    HalfSpectrum s;
    s.g_r.resize(K / 2 - 1);
    for (int j = 0; j < K / 2 - 1; ++j) s.g_r[j] = x[1 + j].real();
    s.g0 = x[K / 2].real();
    return s;
  }

  double power() const { return 2.0 * g_r.squaredNorm() + g0 * g0; }
};

/// Real symmetric (K/2) x (K/2) form with expand(g)^H Phi expand(g) = y^T Phi_half y
/// for y = [g_r; g0].
inline RMat reduce_transmit_form(const CMat& phi) {
  const Eigen::Index K = phi.rows();
  const Eigen::Index m = K / 2 - 1;
  const Eigen::Index dc = K / 2;
  const auto left = [](Eigen::Index j) { return 1 + j; };
  const auto right = [K](Eigen::Index j) { return K - 1 - j; };  // right block already reversed

  RMat out(m + 1, m + 1);
  for (Eigen::Index a = 0; a < m; ++a) {
    for (Eigen::Index b = 0; b < m; ++b) {
      const cd v = phi(left(a), left(b)) + phi(left(a), right(b)) + phi(right(a), left(b)) + phi(right(a), right(b));
      out(a, b) = v.real();
    }
    out(a, m) = (phi(left(a), dc) + phi(right(a), dc)).real();
    out(m, a) = (phi(dc, left(a)) + phi(dc, right(a))).real();
  }
  out(m, m) = phi(dc, dc).real();
  return 0.5 * (out + out.transpose());
}

/// Receive forms restricted to reflection-symmetric filters (h_{-k} = Pi h_k).
/// paired[j] covers grid k = -N/2 + 1 + j (k < 0) together with -k; the DC and
/// Nyquist groups map onto themselves and stay single.
struct ReducedReceiveForms {
  std::vector<CMat> paired;
  CMat lone_dc;
  CMat lone_nyquist;
};

inline CMat reverse_both(const CMat& m) { return m.colwise().reverse().rowwise().reverse(); }

inline ReducedReceiveForms reduce_receive_forms(const std::vector<CMat>& deltas, int N) {
  if (static_cast<int>(deltas.size()) != N) throw Error(Errc::LengthMismatch, "need one form per aliasing group");
  ReducedReceiveForms out;
  for (int k = -N / 2 + 1; k <= -1; ++k) {
    const CMat& a = deltas[k + N / 2];
    const CMat& b = deltas[-k + N / 2];
    if (a.rows() != b.rows()) throw Error(Errc::InvalidConfig, "aliasing groups k and -k differ in size");
    out.paired.push_back(a + reverse_both(b));
  }
  out.lone_dc = deltas[N / 2];
  out.lone_nyquist = deltas[0];
  return out;
}

/// Objective of a symmetric receive filter through the reduced forms.
inline double reduced_receive_objective(const FrequencyOps& ops, const ReducedReceiveForms& forms, const CVec& h) {
  const AliasPartition& part = ops.partition();
  const int N = ops.N();
  double total = 0.0;
  for (int k = -N / 2 + 1; k <= -1; ++k) {
    total += rayleigh(forms.paired[k + N / 2 - 1], group_slice(part, k + N / 2, h));
  }
  total += rayleigh(forms.lone_dc, group_slice(part, N / 2, h));
  total += rayleigh(forms.lone_nyquist, group_slice(part, 0, h));
  return total;
}

/// Orthonormal basis of the reflection-symmetric vectors of a self-mapped group.
/// DC group: palindromes. Nyquist group: slot 0 (harmonic -K/2) free, the rest
/// palindromic.
inline RMat symmetric_group_basis(int size, bool nyquist) {
  const int offset = nyquist ? 1 : 0;
  const int n = size - offset;
  const int cols = offset + (n + 1) / 2;
  RMat Q = RMat::Zero(size, cols);
  int c = 0;
  if (nyquist) Q(0, c++) = 1.0;
  for (int i = 0; i < (n + 1) / 2; ++i, ++c) {
    const int a = offset + i;
    const int b = offset + n - 1 - i;
    if (a == b) {
      Q(a, c) = 1.0;
    } else {
      Q(a, c) = Q(b, c) = 1.0 / std::sqrt(2.0);
    }
  }
  return Q;
}

}  // namespace subnyq
