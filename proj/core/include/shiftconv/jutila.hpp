#pragma once

// Jutila's variant of the circle method. The indicator I of [0, 1] is
// approximated by
//   I~(alpha) = (1 / (2 delta L)) sum_{q in Q} sum*_{d mod q} I_{d/q}(alpha),
// I_{d/q} the indicator of [d/q - delta, d/q + delta], L = sum phi(q). The
// shifted sum is the integral of the exponential sum G over [0, 1]; replacing
// I by I~ gives the approximation D~.

#include <complex>
#include <string>
#include <vector>

#include "shiftconv/shifted.hpp"
#include "shiftconv/voronoi.hpp"

namespace shiftconv {

struct JutilaScheme {
  double Q = 1, delta = 1;
  i64 N = 1, a = 1, b = 1, h = 1;
  bool filtered = false;    // moduli restricted by Nab | q and (h, q) = (h, Nab)
  std::vector<i64> moduli;  // sorted
  i64 L = 0;                // sum of phi(q) over moduli
};

/// Q^-2 <= delta <= Q^-1 (with a relative slack of 1e-12).
bool delta_in_range(double Q, double delta) noexcept;

/// Q = {q in [Q, 2Q] : Nab | q, (h, q) = (h, Nab)}. Throws DomainError if
/// delta is out of range, gcd(a, b) != 1, or the set is empty.
JutilaScheme build_scheme(double Q, double delta, i64 N, i64 a, i64 b, i64 h);

/// Every integer q in [Q, 2Q].
JutilaScheme build_full_scheme(double Q, double delta);

/// An explicit modulus set; the delta range is checked only when asked.
JutilaScheme scheme_from_moduli(double Q, double delta, std::vector<i64> moduli, bool check_delta = true);

/// delta with delta^3 Q^5 = (c a b)^3, i.e. delta = c a b Q^(-5/3), clamped into [Q^-2, Q^-1].
double balanced_delta(double Q, i64 a, i64 b, double c = 1.0);

/// Piecewise constant function: values[i] on [breaks[i-1], breaks[i]), with
/// breaks[-1] = lo and breaks[n] = hi implied.
struct StepFunction {
  double lo = 0, hi = 0;
  std::vector<double> breaks;  // interior, strictly increasing
  std::vector<double> values;  // breaks.size() + 1 entries
  double operator()(double x) const;
};

/// I~ on [-delta, 1 + delta] (breakpoints rounded to double).
StepFunction approximant(const JutilaScheme& s);

struct L2Report {
  double l2 = 0;       // int (I - I~)^2, from the exact rational value
  double bound = 0;    // delta^-1 L^-2 Q^2.1
  double ratio = 0;    // l2 / bound
  bool mass_exact = false;  // int I~ == 1 exactly
  std::size_t breakpoints = 0;
};

/// Exact: every breakpoint d/q +- delta is compared in 128-bit integer
/// arithmetic (delta is taken as the dyadic rational its double represents),
/// and the integral is assembled in arbitrary-precision rationals.
/// Requires 2Q <= 10^4.
L2Report l2_error(const JutilaScheme& s);

/// Where alpha = num/den + beta; phases of the rational part are exact.
struct Alpha {
  i64 num = 0, den = 1;
  long double beta = 0;
  static Alpha real(long double x) { return {0, 1, x}; }
};

/// G(alpha) = sum lambda_phi(m) lambda_psi(n) F(am, bn) e((am -+ bn - h) alpha),
/// stored as its frequency spectrum (the coefficient of e(k alpha) for each k).
class ExpSum {
 public:
  explicit ExpSum(const ShiftedSumSpec& spec);

  std::complex<double> operator()(const Alpha& alpha) const;
  std::complex<double> operator()(double alpha) const { return (*this)(Alpha::real(alpha)); }

  i64 k_min() const noexcept { return k_min_; }
  i64 k_max() const noexcept { return k_min_ + static_cast<i64>(spectrum_.size()) - 1; }
  i64 max_abs_frequency() const noexcept;
  bool empty() const noexcept { return spectrum_.empty(); }

 private:
  i64 k_min_ = 0;
  std::vector<std::complex<long double>> spectrum_;
};

std::complex<double> exp_sum_G(double alpha, const ShiftedSumSpec& spec);

/// int_0^1 G by the n-point uniform rule, exact once n > 2 max |am -+ bn - h|.
/// n_points = 0 picks the smallest admissible n. Throws DomainError below the threshold.
std::complex<double> d_exact_by_integral(const ShiftedSumSpec& spec, i64 n_points = 0);

/// int_{-delta}^{delta} G(d/q + beta) d beta by Gauss-Legendre.
std::complex<double> arc_integral(const ExpSum& G, i64 d, i64 q, double delta, int points);

/// Gauss-Legendre points for an arc: max(min_points, 8 + 2 delta max|k|).
int arc_points(const ExpSum& G, double delta, int min_points = 16);

struct DTildeReport {
  std::complex<double> value;
  std::size_t arcs = 0;
  int points_per_arc = 0;
};

/// D~ = (1 / (2 delta L)) sum_q sum*_d (arc integral).
DTildeReport d_tilde(const ShiftedSumSpec& spec, const JutilaScheme& s, int points_per_arc = 16);

/// (ab)^(1/2) delta^(1/2) Q^-1 (AB)^(3/2) / (A + B), with A, B the box scales of F.
double approximation_error_scale(const ShiftedSumSpec& spec, const JutilaScheme& s);
/// delta^2 Q^(3/2) (ab)^-1 (AB)^(3/2) / (A + B).
double arc_remainder_scale(const ShiftedSumSpec& spec, const JutilaScheme& s);

/// The four sign branches of the doubly transformed arc (two dual branches
/// each for m and n; holomorphic sources contribute the single J branch).
struct ArcBranchValue {
  DualBranch m_branch, n_branch;
  std::complex<double> value;
};

struct ArcTransformReport {
  i64 d = 0, q = 1;
  std::complex<double> transformed, direct;
  double difference = 0;  // |transformed - direct|
  std::vector<ArcBranchValue> branches;
  i64 m_cut = 0, n_cut = 0;
  double m_tail = 0, n_tail = 0;  // measured truncation tails (per-side rule quantity)
  int beta_points = 0;
};

struct ArcTransformOptions {
  // The m |term| rule overstates the tail of the oscillating dual sums by
  // several orders here (1e-3 gives ~1e-8 agreement on small boxes), and the
  // cross-check is at the 1e-5 level, so cut and panel floor are looser than
  // for the plain Voronoi identity.
  VoronoiOptions voronoi{0, 1e-3, 0, {20, 1.0, 4, 0}};
  int beta_points = 0;  // 0: chosen from delta * (largest frequency)
};

/// The arc integral after Voronoi summation in both m and n, modulus q/a and
/// q/b. F must be separable (F.separable non-empty); the beta integral is
/// done last by Gauss-Legendre. Requires N a b | q (N the level of both sources)
/// and gcd(d, q) = 1.
ArcTransformReport transformed_arc_sum(i64 d, i64 q, const ShiftedSumSpec& spec, const JutilaScheme& s,
                                       const ArcTransformOptions& opts = {});

/// The same after summing over all reduced d mod q, where the additive
/// phases collapse to twisted Kloosterman sums
///   S_{conj(chi omega)}(-h, +-am +- bn; q).
/// `direct` is the sum of the direct arc integrals.
ArcTransformReport transformed_arc_sum_over_d(i64 q, const ShiftedSumSpec& spec, const JutilaScheme& s,
                                              const ArcTransformOptions& opts = {});

struct WiltonReport {
  double worst_ratio = 0;  // sup |S(x)| / (sqrt(x) log 2x)
  double worst_alpha = 0;
  i64 worst_x = 0;
};

/// S(x) = sum_{m <= x} lambda(m) e(m alpha) over the given alphas, x <= x_max.
WiltonReport wilton_diagnostic(const CoefficientSource& src, const std::vector<double>& alphas, i64 x_max);

}  // namespace shiftconv
