#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "shiftconv/error.hpp"
#include "shiftconv/expsums.hpp"

using namespace shiftconv;

namespace {

i64 inverse_by_search(i64 d, i64 q) {
  for (i64 x = 0; x < q; ++x)
    if (mod_reduce(d * x, q) == 1 % q) return x;
  return -1;
}

std::complex<double> kloosterman_oracle(i64 m, i64 n, i64 q) {
  std::complex<long double> s = 0;
  for (i64 d = 0; d < q; ++d) {
    if (std::gcd(d, q) != 1) continue;
    const i64 x = mod_reduce(d * m + inverse_by_search(d, q) * n, q);
    s += std::polar(1.0L, 2 * std::numbers::pi_v<long double> * x / q);
  }
  return {static_cast<double>(s.real()), static_cast<double>(s.imag())};
}

}  // namespace

TEST(Expsums, Examples) {
  for (i64 q : {1, 6, 30, 97}) EXPECT_NEAR(std::abs(kloosterman({0, 0, q, {}}) - static_cast<double>(euler_phi(q))), 0, 1e-9);
  EXPECT_NEAR(std::abs(kloosterman({1, 1, 2, {}}) - 1.0), 0, 1e-12);
  EXPECT_NEAR(std::abs(kloosterman({1, 1, 3, {}}) + 1.0), 0, 1e-12);
}

TEST(Expsums, AgainstOracle) {
  for (i64 q = 1; q <= 60; ++q)
    for (i64 m = -3; m <= 7; m += 2)
      for (i64 n = 0; n <= 6; n += 3) ASSERT_NEAR(std::abs(kloosterman({m, n, q, {}}) - kloosterman_oracle(m, n, q)), 0, 1e-10);
}

TEST(Expsums, BoundExamples) {
  for (i64 p : {2, 3, 7, 101}) EXPECT_NEAR(weil_estermann_bound(1, 1, p), 2 * std::sqrt(static_cast<double>(p)), 1e-12);
  for (i64 q : {1, 4, 12}) EXPECT_NEAR(weil_estermann_bound(0, 0, q), static_cast<double>(q * divisor_tau(q)), 1e-9);
  EXPECT_NEAR(weil_estermann_bound(2, 4, 6), std::sqrt(2.0) * std::sqrt(6.0) * 4, 1e-12);
}

TEST(Expsums, Symmetry) {
  for (i64 q = 1; q <= 200; ++q)
    for (i64 m : {1, 2, 5, 12})
      for (i64 n : {3, 4, 9}) ASSERT_NEAR(std::abs(kloosterman({m, n, q, {}}) - kloosterman({n, m, q, {}})), 0, 1e-9);
}

TEST(Expsums, PrincipalTwist) {
  for (i64 q = 1; q <= 80; ++q) {
    const auto chi0 = CharacterGroup(q).character(0);
    for (i64 m : {0, 1, 6})
      for (i64 n : {1, 4})
        ASSERT_NEAR(std::abs(kloosterman({m, n, q, chi0}) - kloosterman({m, n, q, {}})), 0, 1e-12);
  }
}

TEST(Expsums, TwistedAgainstDirectSum) {
  for (i64 q : {5, 8, 12, 21}) {
    for (const auto& chi : enumerate_characters(q)) {
      std::complex<double> s = 0;
      for (i64 d = 1; d < q; ++d)
        if (std::gcd(d, q) == 1)
          s += chi(d) * std::polar(1.0, 2 * std::numbers::pi * mod_reduce(3 * d + 2 * inverse_by_search(d, q), q) / q);
      ASSERT_NEAR(std::abs(kloosterman({3, 2, q, chi}) - s), 0, 1e-10);
    }
  }
}

TEST(Expsums, SelbergMultiplicativity) {
  for (i64 q1 = 2; q1 <= 50; q1 += 3)
    for (i64 q2 = 2; q2 <= 50; q2 += 4) {
      if (std::gcd(q1, q2) != 1) continue;
      const i64 i2 = mod_inverse(q2, q1).value, i1 = mod_inverse(q1, q2).value;
      const auto lhs = kloosterman({1, 1, q1 * q2, {}});
      const auto rhs = kloosterman({i2 * i2 % q1, 1, q1, {}}) * kloosterman({i1 * i1 % q2, 1, q2, {}});
      ASSERT_NEAR(std::abs(lhs - rhs), 0, 1e-9) << q1 << " " << q2;
    }
}

TEST(Expsums, ScanWeil) {
  EXPECT_LE(scan_weil(1, default_weil_grid()).worst.ratio, 1.0);
  const auto r = scan_weil(50, {{1, 1}});
  EXPECT_TRUE(r.passed);
  EXPECT_LE(r.worst.ratio, 1 + 1e-9);
  EXPECT_EQ(r.per_q.size(), 50u);
  const auto grid = default_weil_grid();
  EXPECT_EQ(grid.size(), 400u);
  // an impossible tolerance produces a witness
  EXPECT_THROW(scan_weil(20, {{1, 1}}, -0.5), ToleranceError);
}
