#pragma once

// Twisted L-values L(s, phi x chi) by the approximate functional equation,
// the amplified second moment over characters mod q, and a sweep of
// max |L(1/2)| against q.
//
// The AFE used here is the Mellin-Barnes form
//   L(s) = sum a_m m^-s V_s(m / sqrt C) + eps R(s) sum conj(a_m) m^(s-1) V_{1-s}(m / sqrt C),
//   V_s(y) = (1/2 pi i) int_(c) G(u) prod_j Gamma_R(s+u+mu_j)/Gamma_R(s+mu_j) y^-u du/u,
//   R(s) = C^(1/2-s) prod_j Gamma_R(1-s+mu_j)/Gamma_R(s+mu_j),
// which is exact for any even G with G(0) = 1. At s = 1/2 this is T + eps conj(T)
// for self-dual phi. Different G give the same value, which is what certifies
// the root number.

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "shiftconv/characters.hpp"
#include "shiftconv/coeffs.hpp"
#include "shiftconv/weights.hpp"

namespace shiftconv {

/// G(u) = exp(u^2 / width), or G = 1 when width is 0 (V is then an incomplete gamma ratio).
struct AfeWeight {
  double width = 0;

  static AfeWeight flat() { return {0}; }
  static AfeWeight gaussian(double width) { return {width}; }
  std::complex<long double> operator()(std::complex<long double> u) const;
  std::string name() const;
};

/// Archimedean and arithmetic data of the twist.
struct TwistData {
  double conductor = 1;                       // C
  std::vector<std::complex<double>> shifts;   // mu_j in prod Gamma_R(s + mu_j)
  std::complex<double> root_number = 1;       // eps
};

/// Root number of phi x chi. Level-1 holomorphic: i^k tau(chi)^2 / q. Divisor
/// analog (L(s, chi)^2): chi(-1) tau(chi)^2 / q. Other sources use the root number
/// from the coefficient header as eps_phi chi(N) psi(q) tau(chi)^2 / q and are
/// only as trustworthy as the runtime dual-weight check says.
/// Throws DomainError when the data needed is missing, and ToleranceError when
/// |eps| differs from 1 by more than 1e-8.
std::complex<double> root_number(const CoefficientSource& phi, const DirichletCharacter& chi);

TwistData twist_data(const CoefficientSource& phi, const DirichletCharacter& chi);

struct LValueRequest {
  std::complex<double> s{0.5, 0.0};
  CoefficientSource phi;
  DirichletCharacter chi = character_from_label("trivial");
  /// > 0: sums stop at m <= q^(1 + cutoff_epsilon) regardless of V; 0: stop where
  /// |V| has fallen below `tolerance`.
  double cutoff_epsilon = 0;
  AfeWeight weight = AfeWeight::flat();
  double tolerance = 1e-16;
};

struct LValueResult {
  std::complex<double> value;
  std::complex<double> T;        // sum a_m m^-s V_s
  std::complex<double> T_dual;   // R(s) sum conj(a_m) m^(s-1) V_{1-s}
  std::complex<double> root_number;
  double conductor = 1;
  i64 terms = 0;                 // m range of both sums
  double effective_epsilon = 0;  // log(terms) / log(q) - 1, q > 1 only
};

LValueResult afe_lvalue(const LValueRequest& req);

struct LabeledLValue {
  std::string label;  // chi
  LValueResult result;
};

/// afe_lvalue for every primitive chi mod q, sharing the cutoff tables between
/// characters of equal parity. Ordered by character index.
std::vector<LabeledLValue> afe_lvalues_mod(const CoefficientSource& phi, i64 q, std::complex<double> s = {0.5, 0.0},
                                           AfeWeight weight = AfeWeight::flat(), double tolerance = 1e-16);

/// V_s(y) for the given twist data (exposed for tests and diagnostics).
std::complex<double> afe_cutoff(std::complex<double> s, const TwistData& data, const AfeWeight& G, double y);

struct AmplifierSpec {
  CoefficientSource phi;
  i64 q = 1;
  DirichletCharacter chi = character_from_label("trivial");
  int L_amp = 1;
  double M = 1;
  SmoothWeight1D k_weight;  // supported in [M, 2M]
};

/// k = rho(x / M), the partition-of-unity bump on [M, 2M].
AmplifierSpec make_amplifier_spec(const CoefficientSource& phi, const DirichletCharacter& chi, int L_amp, double M);

struct CharacterMoment {
  std::string label;
  std::complex<double> S_omega;  // sum lambda(m) omega(m) k(m)
  double amplifier = 0;          // |sum_{l <= L} conj(chi(l)) omega(l)|^2
};

struct AmplifierMoment {
  double S = 0;
  double target_term = 0;  // amplifier(chi) |S_chi|^2
  std::vector<CharacterMoment> per_character;
};

/// Direct evaluation over the primitive characters omega mod q (q <= 10^4).
AmplifierMoment amplifier_moment(const AmplifierSpec& spec);

/// a(n) = sum_{l m = n, l <= L} conj(chi(l)) lambda(m) k(m), n = 0..N (a(0) = 0).
std::vector<std::complex<double>> amplifier_coefficients(const AmplifierSpec& spec);

struct OffDiagonal {
  i64 N = 0;                                     // 2 L M, support bound of a(n)
  double D0 = 0;                                 // D(0) by convolution
  double D0_direct = 0;                          // sum |a(n)|^2
  std::vector<std::complex<double>> D;           // D(h), h = 1..N, by convolution
  std::vector<std::complex<double>> D_shifted;   // the same through shifted sums over (l1, l2)
  double max_route_difference = 0;               // max_h |D - D_shifted|
  double rhs = 0;                                // phi(q) sum_{h = 0 mod q, |h| <= N} D(h)
};

OffDiagonal amplifier_offdiagonal(const AmplifierSpec& spec);

struct ParsevalCheck {
  double lhs = 0;  // sum over all omega mod q of |S_omega|^2
  double rhs = 0;  // phi(q) sum over reduced residues r of |sum_{m = r} lambda(m) k(m)|^2
};

ParsevalCheck parseval_check(const AmplifierSpec& spec);

struct SweepRow {
  i64 q = 0;
  double max_abs = 0;
  std::string argmax;  // character label
  double sqrt_q = 0;
  double subconvex = 0;  // q^(1/2 - 1/54)
};

struct SweepTable {
  std::vector<SweepRow> rows;
  // least squares log max|L| = intercept + slope log q over rows with
  // max|L| > 1e-10; CI from Student t
  std::optional<double> slope, intercept, ci_low, ci_high;
  std::size_t fitted = 0;
  double confidence = 0.95;
};

/// Every prime q in [q_lo, q_hi] coprime to the level (prime powers too when
/// `prime_powers`), max over primitive chi of |L(s, phi x chi)|.
SweepTable subconvexity_sweep(const CoefficientSource& phi, i64 q_lo, i64 q_hi, std::complex<double> s = {0.5, 0.0},
                              bool prime_powers = false, AfeWeight weight = AfeWeight::flat());

}  // namespace shiftconv
