#include <gtest/gtest.h>

#include <cmath>

#include "shiftconv/error.hpp"
#include "shiftconv/shifted.hpp"

using namespace shiftconv;

namespace {

ShiftedSumSpec make_spec(i64 a, i64 b, i64 h, int sign, const CoefficientSource& phi, const CoefficientSource& psi,
                         double A, double B, double P = 1) {
  ShiftedSumSpec s;
  s.a = a;
  s.b = b;
  s.h = h;
  s.sign = sign;
  s.phi = phi;
  s.psi = psi;
  s.f = make_box_weight(A, B, P);
  return s;
}

std::complex<double> brute_force(const ShiftedSumSpec& s) {
  std::complex<long double> acc = 0;
  const auto& sp = s.f.support();
  for (i64 m = 1; s.a * m <= sp[1]; ++m)
    for (i64 n = 1; s.b * n <= sp[3]; ++n)
      if (s.a * m + s.sign * s.b * n == s.h)
        acc += std::complex<long double>(s.phi(m) * s.psi(n)) * s.f(static_cast<long double>(s.a * m),
                                                                      static_cast<long double>(s.b * n));
  return {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
}

CoefficientSource scaled(const CoefficientSource& src, double c) {
  std::vector<std::complex<double>> v(src.data().begin() + 1, src.data().end());
  for (auto& x : v) x *= c;
  CoefficientSource out(std::move(v));
  out.kind = src.kind;
  out.weight = src.weight;
  out.sign = src.sign;
  return out;
}

}  // namespace

TEST(Shifted, Validation) {
  const auto d = divisor_analog(100);
  EXPECT_THROW(make_spec(2, 4, 1, -1, d, d, 10, 10).validate(), DomainError);
  EXPECT_THROW(make_spec(1, 1, 0, -1, d, d, 10, 10).validate(), DomainError);
  EXPECT_THROW(make_spec(1, 1, 1, 0, d, d, 10, 10).validate(), DomainError);
  EXPECT_THROW(shifted_sum_direct(make_spec(1, 1, 1, -1, d, d, 60, 60)), CoefficientShortfall);
  auto z = make_spec(1, 1, 1, -1, d, d, 10, 10);
  z.f = SmoothWeight2D::zero();
  EXPECT_EQ(shifted_sum_direct(z), std::complex<double>(0));
}

TEST(Shifted, AgainstBruteForce) {
  const auto div = divisor_analog(500);
  const auto delta = delta_coefficients(500);
  const auto s1 = make_spec(1, 1, 1, -1, div, div, 10, 10);
  EXPECT_NEAR(std::abs(shifted_sum_direct(s1) - brute_force(s1)), 0, 1e-12);
  const auto s2 = make_spec(2, 3, 1, -1, delta, delta, 100, 100);
  EXPECT_NEAR(std::abs(shifted_sum_direct(s2) - brute_force(s2)), 0, 1e-12);
  const auto s3 = make_spec(2, 3, 301, 1, delta, div, 100, 100, 3);
  EXPECT_NEAR(std::abs(shifted_sum_direct(s3) - brute_force(s3)), 0, 1e-12);
  EXPECT_GT(std::abs(brute_force(s3)), 0);
  const auto s4 = make_spec(3, 2, 7, -1, div, delta, 90, 60, 2);
  EXPECT_NEAR(std::abs(shifted_sum_direct(s4) - brute_force(s4)), 0, 1e-12);
}

TEST(Shifted, Bilinearity) {
  const auto delta = delta_coefficients(500);
  const auto s = make_spec(2, 3, 1, -1, delta, delta, 100, 100);
  auto t = s;
  t.psi = scaled(delta, 2);
  EXPECT_NEAR(std::abs(shifted_sum_direct(t) - 2.0 * shifted_sum_direct(s)), 0, 1e-12);
  auto u = s;
  u.phi = scaled(delta, -3);
  EXPECT_NEAR(std::abs(shifted_sum_direct(u) + 3.0 * shifted_sum_direct(s)), 0, 1e-12);
}

TEST(Shifted, MirrorSum) {
  // sum_{am - bn = h} over f(am, bn) equals the sum over bn - am = -h with the roles swapped
  const auto div = divisor_analog(300);
  const auto delta = delta_coefficients(300);
  const auto s = make_spec(2, 3, 5, -1, delta, div, 100, 120, 2);
  std::complex<long double> mirror = 0;
  for (i64 n = 1; 3 * n <= 240; ++n)
    for (i64 m = 1; 2 * m <= 200; ++m)
      if (3 * n - 2 * m == -5)
        mirror += std::complex<long double>(div(n) * delta(m)) * s.f(static_cast<long double>(2 * m), static_cast<long double>(3 * n));
  EXPECT_NEAR(std::abs(shifted_sum_direct(s) - std::complex<double>(mirror)), 0, 1e-12);
}

TEST(Shifted, BoundScales) {
  const auto d = divisor_analog(100);
  const auto one = bound_scales(make_spec(1, 1, 1, -1, d, d, 1, 1));
  // P = X = Y = 1 leaves only (X + Y)^0.1 = 2^0.1
  EXPECT_NEAR(one.main_bound, std::pow(2.0, 0.1), 1e-15);
  EXPECT_NEAR(one.trivial, 1.0, 1e-15);
  const auto big = bound_scales(make_spec(1, 1, 1, -1, d, d, 1e4, 1e4));
  const double hand = std::exp(0.1 * std::log(2e4) + 0.41 * std::log(1e8));
  EXPECT_NEAR(big.main_bound / hand, 1.0, 1e-12);
  EXPECT_NEAR(big.trivial, 1e4, 1e-8);
  const auto ab = bound_scales(make_spec(2, 3, 1, -1, d, d, 100, 200, 4));
  EXPECT_NEAR(ab.main_bound, std::pow(4, 1.1) * std::pow(6, -0.1) * std::pow(300, 0.1) * std::pow(2e4, 0.41), 1e-9);
  EXPECT_NEAR(ab.trivial, std::sqrt(2e4 / 6), 1e-12);
}

TEST(Shifted, MainTermMatchesDirectSum) {
  const auto div = divisor_analog(2100);
  const auto s = make_spec(1, 1, 1, -1, div, div, 1000, 1000);
  const auto mt = divisor_main_term(s);
  const double direct = shifted_sum_direct(s).real();
  EXPECT_LT(std::abs(direct - mt.value) / direct, 1e-3);
  EXPECT_LT(std::abs(direct - mt.value), bound_scales(s).trivial);
  EXPECT_LT(mt.doubling_change, 1e-8 * std::abs(mt.value));
  auto z = s;
  z.f = SmoothWeight2D::zero();
  EXPECT_EQ(divisor_main_term(z).value, 0.0);
  EXPECT_THROW(divisor_main_term(make_spec(1, 1, 1, -1, delta_coefficients(300), div, 100, 100)), DomainError);
}

TEST(Shifted, BoundedRatioTripwire) {
  const auto delta = delta_coefficients(5000);
  for (double X : {50.0, 200.0, 800.0, 2000.0}) {
    const auto s = make_spec(1, 1, 1, -1, delta, delta, X, X);
    const double r = std::abs(shifted_sum_direct(s)) / bound_scales(s).main_bound;
    EXPECT_LT(r, 100) << X;
  }
}
