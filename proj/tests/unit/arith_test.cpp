#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "shiftconv/arith.hpp"
#include "shiftconv/error.hpp"

using namespace shiftconv;

namespace {

// direct sum over reduced residues, no closed form
std::complex<double> ramanujan_direct(i64 q, i64 h) {
  std::complex<double> s = 0;
  for (i64 d = 1; d <= q; ++d)
    if (std::gcd(d, q) == 1) s += std::polar(1.0, 2 * std::numbers::pi * static_cast<double>(mod_reduce(d * h, q)) / q);
  return s;
}

i64 phi_count(i64 q) {
  i64 c = 0;
  for (i64 d = 1; d <= q; ++d) c += std::gcd(d, q) == 1;
  return c;
}

}  // namespace

TEST(Arith, ModInverseExamples) {
  EXPECT_EQ(mod_inverse(3, 7).value, 5);
  EXPECT_EQ(mod_inverse(1, 1).value, 0);
  EXPECT_THROW(mod_inverse(2, 4), DomainError);
  EXPECT_THROW(mod_inverse(6, 9), DomainError);
}

TEST(Arith, ModInverseRoundTrip) {
  for (i64 q = 2; q <= 1000; ++q)
    for (i64 d = -q; d < 2 * q; d += 1 + q / 97) {
      if (std::gcd(d, q) != 1) continue;
      const Residue r = mod_inverse(d, q);
      ASSERT_EQ(r.modulus, q);
      ASSERT_EQ(mod_reduce(static_cast<i64>(static_cast<i128>(mod_reduce(d, q)) * r.value % q), q), 1) << d << " " << q;
    }
}

TEST(Arith, AdditiveCharacter) {
  EXPECT_NEAR(std::abs(e_q(1, 4) - std::complex<double>(0, 1)), 0, 1e-15);
  EXPECT_NEAR(std::abs(e_q(0, 9) - 1.0), 0, 0);
  for (i64 q = 1; q <= 60; ++q)
    for (i64 x = -200; x <= 200; x += 7) {
      EXPECT_NEAR(std::abs(e_q(x, q)), 1.0, 1e-12);
      EXPECT_EQ(e_q(x, q), e_q(x + q, q));
    }
  // reduction keeps phase accuracy for d*m around 1e12
  const i64 big = 1'000'000'007LL * 1009;
  EXPECT_NEAR(std::abs(e_q(big, 1009) - 1.0), 0, 1e-15);
  const auto table = additive_character_table(12);
  ASSERT_EQ(table.size(), 12u);
  for (i64 j = 0; j < 12; ++j) EXPECT_EQ(table[j], e_q(j, 12));
}

TEST(Arith, RamanujanSumExamples) {
  EXPECT_EQ(ramanujan_sum(1, 5), 1);
  EXPECT_EQ(ramanujan_sum(6, 1), 1);
  EXPECT_EQ(ramanujan_sum(4, 2), -2);
}

TEST(Arith, RamanujanSumAgainstDirectSum) {
  for (i64 q = 1; q <= 500; q += (q < 60 ? 1 : 13))
    for (i64 h = -500; h <= 500; h += (q < 60 ? 7 : 1)) {
      const auto d = ramanujan_direct(q, h);
      ASSERT_NEAR(d.real(), static_cast<double>(ramanujan_sum(q, h)), 1e-9) << q << " " << h;
      ASSERT_NEAR(d.imag(), 0.0, 1e-9);
    }
  for (i64 q = 1; q <= 500; ++q) ASSERT_EQ(ramanujan_sum(q, 0), euler_phi(q));
}

TEST(Arith, MultiplicativeFunctions) {
  EXPECT_EQ(euler_phi(12), 4);
  EXPECT_EQ(divisor_tau(12), 6);
  EXPECT_EQ(mobius(30), -1);
  EXPECT_EQ(mobius(12), 0);
  EXPECT_EQ(mobius(1), 1);
  EXPECT_EQ(gcd3(0, 0, 12), 12);
  EXPECT_EQ(gcd3(4, 6, 10), 2);
  const auto mu = mobius_sieve(2000);
  const auto dc = divisor_count_sieve(2000);
  for (i64 n = 1; n <= 2000; ++n) {
    ASSERT_EQ(euler_phi(n), phi_count(n));
    ASSERT_EQ(mu[n], mobius(n));
    ASSERT_EQ(dc[n], static_cast<i64>(divisors(n).size()));
    ASSERT_EQ(divisor_tau(n), dc[n]);
    i64 prod = 1;
    for (auto [p, e] : factorize(n)) {
      ASSERT_TRUE(is_prime(p));
      for (int k = 0; k < e; ++k) prod *= p;
    }
    ASSERT_EQ(prod, n);
  }
}

TEST(Arith, ReducedResidueGap) {
  EXPECT_EQ(reduced_residue_max_gap(2), 2);
  EXPECT_EQ(reduced_residue_max_gap(6), 4);
  EXPECT_EQ(reduced_residue_max_gap(30), 6);
  for (i64 q = 2; q <= 300; ++q) {
    i64 prev = -1, first = -1, gap = 0;
    for (i64 d = 1; d <= q; ++d)
      if (std::gcd(d, q) == 1) {
        if (prev >= 0) gap = std::max(gap, d - prev);
        else first = d;
        prev = d;
      }
    gap = std::max(gap, first + q - prev);
    ASSERT_EQ(reduced_residue_max_gap(q), gap) << q;
  }
}

TEST(Arith, EulerGammaConstant) {
  EXPECT_NEAR(static_cast<double>(euler_gamma_series()), kEulerGamma, 1e-16);
  EXPECT_NEAR(kEulerGamma, 0.5772156649015329, 1e-16);
}
