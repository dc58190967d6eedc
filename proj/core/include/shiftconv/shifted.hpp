#pragma once

// Shifted convolution sums
//   D_f(a, b; h) = sum_{am +- bn = h} lambda_phi(m) lambda_psi(n) f(am, bn)
// by exact lattice enumeration, the main term of the divisor analog, and
// the scale of the bound they are compared with.

#include <array>
#include <complex>

#include "shiftconv/coeffs.hpp"
#include "shiftconv/weights.hpp"

namespace shiftconv {

struct ShiftedSumSpec {
  i64 a = 1, b = 1, h = 1;
  int sign = -1;  // -1: am - bn = h, +1: am + bn = h
  CoefficientSource phi, psi;
  SmoothWeight2D f;

  /// Throws DomainError unless a, b >= 1, gcd(a, b) = 1, h >= 1, sign = +-1.
  void validate() const;
  /// am + sign * bn - h, the frequency of (m, n) in the exponential sum.
  i64 frequency(i64 m, i64 n) const noexcept { return a * m + sign * b * n - h; }
  /// m and n ranges meeting the support of f: {m_lo, m_hi, n_lo, n_hi}.
  std::array<i64, 4> index_box() const;
  /// Throws CoefficientShortfall when either source is too short for index_box().
  void require_coefficients() const;
};

std::complex<double> shifted_sum_direct(const ShiftedSumSpec& spec);

struct MainTermSpec {
  i64 q_max = 0;  // 0: chosen automatically (doubling until the q-series settles)
  double euler_gamma = kEulerGamma;
  double tolerance = 1e-10;
  i64 q_cap = i64{1} << 22;
};

struct MainTermResult {
  double value = 0;
  i64 q_max = 0;
  double tail_bound = 0;       // rigorous bound on the omitted q > q_max terms
  double doubling_change = 0;  // |value(2 q_max) - value(q_max)|
};

/// int g(x, -+x +- h) dx with
///   g(x, y) = f(x, y) sum_q (ab, q) / (ab q^2) c_q(h) (log x - lambda_aq)(log y - lambda_bq),
///   lambda_aq = log(a q^2 / (a, q)^2) - 2 gamma.
/// Both sources must be divisor analogs.
MainTermResult divisor_main_term(const ShiftedSumSpec& spec, const MainTermSpec& mts = {});

struct BoundScales {
  double main_bound = 0;  // P^1.1 (ab)^-0.1 (X+Y)^0.1 (XY)^(0.4+eps), eps = 0.01
  double trivial = 0;     // (XY / ab)^(1/2)
};

BoundScales bound_scales(const ShiftedSumSpec& spec);

}  // namespace shiftconv
