#pragma once

// Exact integer number theory shared by every other module: residues,
// multiplicative inverses, additive characters e_q, Ramanujan sums and the
// classical arithmetic functions.

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

namespace shiftconv {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;

/// Euler's constant. The literal is the value returned by euler_gamma_series()
/// rounded to double; a unit test keeps the two in agreement.
inline constexpr double kEulerGamma = 0.57721566490153286;

/// gamma = H_n - log n - 1/(2n) + sum_k B_2k / (2k n^2k), Euler-Maclaurin with
/// n = 1000 and five correction terms, accumulated in long double.
long double euler_gamma_series();

/// A residue class d mod q stored in canonical form 0 <= value < modulus.
struct Residue {
  i64 value = 0;
  i64 modulus = 1;

  friend bool operator==(const Residue&, const Residue&) = default;
};

/// exp(2 pi i x / q); |z| = 1 up to rounding.
using UnitComplex = std::complex<double>;

/// Canonical representative of x mod q in [0, q). Requires q >= 1.
constexpr i64 mod_reduce(i64 x, i64 q) noexcept {
  const i64 r = x % q;
  return r < 0 ? r + q : r;
}

i64 gcd(i64 a, i64 b) noexcept;

/// gcd(m, n, q) with the convention gcd(0, 0, q) = q.
i64 gcd3(i64 m, i64 n, i64 q) noexcept;

/// Inverse of d mod q. Throws DomainError when gcd(d, q) != 1.
Residue mod_inverse(i64 d, i64 q);

i64 pow_mod(i64 base, u64 exp, i64 q) noexcept;

/// e_q(x) = exp(2 pi i x / q). The argument is reduced mod q first so that
/// large products like d*m do not lose phase accuracy.
UnitComplex e_q(i64 x, i64 q);
std::complex<long double> e_q_ld(i64 x, i64 q);

/// Table of e_q(j) for j = 0..q-1.
std::vector<UnitComplex> additive_character_table(i64 q);

/// Prime factorization by trial division against a cached prime table.
std::vector<std::pair<i64, int>> factorize(i64 n);

/// All positive divisors of n (n >= 1), ascending.
std::vector<i64> divisors(i64 n);

bool is_prime(i64 n);

i64 euler_phi(i64 q);
int mobius(i64 q);
i64 divisor_tau(i64 n);

/// Ramanujan's sum c_q(h) through the closed form sum_{d | (q,h)} d mu(q/d).
i64 ramanujan_sum(i64 q, i64 h);

/// Largest cyclic gap between consecutive integers coprime to q (q >= 2).
i64 reduced_residue_max_gap(i64 q);

/// Moebius values mu(0..n) from a linear sieve; mu[0] is 0.
std::vector<int> mobius_sieve(i64 n);

/// Number of divisors d(0..n) from a sieve; entry 0 is 0.
std::vector<i64> divisor_count_sieve(i64 n);

}  // namespace shiftconv
