#include "shiftconv/arith.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>
#include <tuple>

#include "shiftconv/error.hpp"

namespace shiftconv {
namespace {

// Primes below 2^17 cover trial division for every modulus up to ~1.7e10.
constexpr i64 kSieveLimit = 1 << 17;

const std::vector<i64>& small_primes() {
  static const std::vector<i64> primes = [] {
    std::vector<bool> composite(kSieveLimit + 1, false);
    std::vector<i64> out;
    for (i64 p = 2; p <= kSieveLimit; ++p) {
      if (composite[p]) continue;
      out.push_back(p);
      for (i64 k = p * p; k <= kSieveLimit; k += p) composite[k] = true;
    }
    return out;
  }();
  return primes;
}

}  // namespace

i64 gcd(i64 a, i64 b) noexcept { return std::gcd(a, b); }

i64 gcd3(i64 m, i64 n, i64 q) noexcept { return std::gcd(std::gcd(m, n), q); }

i64 pow_mod(i64 base, u64 exp, i64 q) noexcept {
  if (q == 1) return 0;
  i128 result = 1;
  i128 b = mod_reduce(base, q);
  while (exp) {
    if (exp & 1) result = result * b % q;
    b = b * b % q;
    exp >>= 1;
  }
  return static_cast<i64>(result);
}

Residue mod_inverse(i64 d, i64 q) {
  if (q < 1) throw DomainError("mod_inverse: modulus must be positive, got " + std::to_string(q));
  if (q == 1) return {0, 1};
  // Extended Euclid on (d mod q, q).
  i64 r0 = q, r1 = mod_reduce(d, q);
  i64 s0 = 0, s1 = 1;
  while (r1 != 0) {
    const i64 t = r0 / r1;
    std::tie(r0, r1) = std::pair{r1, r0 - t * r1};
    std::tie(s0, s1) = std::pair{s1, s0 - t * s1};
  }
  if (r0 != 1) {
    throw DomainError("mod_inverse: gcd(" + std::to_string(d) + ", " + std::to_string(q) +
                      ") = " + std::to_string(r0) + " is not 1");
  }
  return {mod_reduce(s0, q), q};
}

std::complex<long double> e_q_ld(i64 x, i64 q) {
  const i64 r = mod_reduce(x, q);
  // Exact values at quarter turns.
  if (r == 0) return {1.0L, 0.0L};
  if ((4 * static_cast<i128>(r)) % q == 0) {
    switch (static_cast<int>(4 * static_cast<i128>(r) / q)) {
      case 1: return {0.0L, 1.0L};
      case 2: return {-1.0L, 0.0L};
      case 3: return {0.0L, -1.0L};
      default: break;
    }
  }
  // Use the representative in (-q/2, q/2] so the angle stays small.
  const i64 s = (2 * r > q) ? r - q : r;
  const long double angle = 2.0L * std::numbers::pi_v<long double> * static_cast<long double>(s) /
                            static_cast<long double>(q);
  return {std::cos(angle), std::sin(angle)};
}

UnitComplex e_q(i64 x, i64 q) {
  const auto z = e_q_ld(x, q);
  return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

std::vector<UnitComplex> additive_character_table(i64 q) {
  std::vector<UnitComplex> table(static_cast<std::size_t>(q));
  for (i64 j = 0; j < q; ++j) table[static_cast<std::size_t>(j)] = e_q(j, q);
  return table;
}

std::vector<std::pair<i64, int>> factorize(i64 n) {
  if (n < 1) throw DomainError("factorize: argument must be >= 1, got " + std::to_string(n));
  std::vector<std::pair<i64, int>> out;
  for (const i64 p : small_primes()) {
    if (p * p > n) break;
    if (n % p != 0) continue;
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    out.emplace_back(p, e);
  }
  // Continue with odd candidates beyond the table.
  for (i64 p = kSieveLimit + 1 + (kSieveLimit % 2); n > 1 && p * p <= n; p += 2) {
    if (n % p != 0) continue;
    int e = 0;
    while (n % p == 0) {
      n /= p;
      ++e;
    }
    out.emplace_back(p, e);
  }
  if (n > 1) out.emplace_back(n, 1);
  return out;
}

std::vector<i64> divisors(i64 n) {
  std::vector<i64> out{1};
  for (const auto& [p, e] : factorize(n)) {
    const std::size_t base = out.size();
    i64 pk = 1;
    for (int k = 1; k <= e; ++k) {
      pk *= p;
      for (std::size_t i = 0; i < base; ++i) out.push_back(out[i] * pk);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

bool is_prime(i64 n) {
  if (n < 2) return false;
  const auto f = factorize(n);
  return f.size() == 1 && f.front().second == 1;
}

i64 euler_phi(i64 q) {
  i64 phi = q;
  for (const auto& [p, e] : factorize(q)) phi = phi / p * (p - 1);
  return phi;
}

int mobius(i64 q) {
  int mu = 1;
  for (const auto& [p, e] : factorize(q)) {
    if (e > 1) return 0;
    mu = -mu;
  }
  return mu;
}

i64 divisor_tau(i64 n) {
  i64 t = 1;
  for (const auto& [p, e] : factorize(n)) t *= (e + 1);
  return t;
}

i64 ramanujan_sum(i64 q, i64 h) {
  if (q < 1) throw DomainError("ramanujan_sum: q must be >= 1");
  const i64 g = std::gcd(q, h);  // gcd(q, 0) = q
  i64 sum = 0;
  for (const i64 d : divisors(g)) sum += d * mobius(q / d);
  return sum;
}

i64 reduced_residue_max_gap(i64 q) {
  if (q < 2) throw DomainError("reduced_residue_max_gap: q must be >= 2");
  i64 first = -1, prev = -1, gap = 0;
  for (i64 r = 1; r <= q; ++r) {
    if (std::gcd(r, q) != 1) continue;
    if (first < 0) first = r;
    if (prev >= 0) gap = std::max(gap, r - prev);
    prev = r;
  }
  // Wrap-around gap from the last reduced residue to first + q.
  gap = std::max(gap, first + q - prev);
  return gap;
}

std::vector<int> mobius_sieve(i64 n) {
  std::vector<int> mu(static_cast<std::size_t>(n + 1), 1);
  std::vector<bool> composite(static_cast<std::size_t>(n + 1), false);
  std::vector<i64> primes;
  if (n >= 0) mu[0] = 0;
  for (i64 i = 2; i <= n; ++i) {
    if (!composite[i]) {
      primes.push_back(i);
      mu[i] = -1;
    }
    for (const i64 p : primes) {
      if (i * p > n) break;
      composite[i * p] = true;
      if (i % p == 0) {
        mu[i * p] = 0;
        break;
      }
      mu[i * p] = -mu[i];
    }
  }
  return mu;
}

std::vector<i64> divisor_count_sieve(i64 n) {
  std::vector<i64> d(static_cast<std::size_t>(n + 1), 0);
  for (i64 k = 1; k <= n; ++k)
    for (i64 m = k; m <= n; m += k) ++d[m];
  return d;
}

long double euler_gamma_series() {
  const int n = 1000;
  long double h = 0;
  for (int k = n; k >= 1; --k) h += 1.0L / k;
  const long double x = n, x2 = x * x;
  // Bernoulli corrections B_2k / (2k n^2k) for k = 1..5
  const long double corr = 1 / (12 * x2) - 1 / (120 * x2 * x2) + 1 / (252 * x2 * x2 * x2) -
                           1 / (240 * x2 * x2 * x2 * x2) + 1 / (132 * x2 * x2 * x2 * x2 * x2);
  return h - std::log(x) - 1 / (2 * x) + corr;
}

}  // namespace shiftconv
