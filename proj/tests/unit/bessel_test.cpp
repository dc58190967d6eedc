#include <gtest/gtest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>

#include "shiftconv/bessel.hpp"
#include "shiftconv/error.hpp"

using namespace shiftconv;

TEST(Bessel, Examples) {
  EXPECT_NEAR(eval_kernel(KernelSpec::J(0), 1e-9), 1.0, 1e-15);
  // power series oracle
  double s = 0, term = 0.5;
  for (int j = 0; j < 20; ++j) {
    s += term;
    term *= -0.25 / ((j + 1.0) * (j + 2.0));
  }
  EXPECT_NEAR(eval_kernel(KernelSpec::J(1), 1.0), s, 1e-14);
  EXPECT_NEAR(eval_kernel(KernelSpec::J(1), 1.0), 0.4400505857, 1e-10);
  EXPECT_NEAR(eval_kernel(KernelSpec::Mplus(0), 1.0), 1.6840977530, 1e-10);
  EXPECT_THROW(eval_kernel(KernelSpec::J(3), 0.0), DomainError);
  EXPECT_THROW(eval_kernel(KernelSpec::Mminus(0), -1.0), DomainError);
}

TEST(Bessel, IntegerOrderAgainstBoost) {
  for (int n : {0, 1, 5, 11, 12})
    for (double x = 0.05; x <= 200; x *= 1.17) {
      const double ref = boost::math::cyl_bessel_j(n, x);
      ASSERT_NEAR(eval_kernel(KernelSpec::J(n), x), ref, 1e-10 * std::max(1.0, std::abs(ref))) << n << " " << x;
    }
  for (double x : {1e3, 5e3, 1e4}) EXPECT_NEAR(eval_kernel(KernelSpec::J(11), x), boost::math::cyl_bessel_j(11, x), 1e-12);
}

TEST(Bessel, MuZeroAnchors) {
  for (double x = 0.1; x <= 50; x += 0.137) {
    ASSERT_NEAR(eval_kernel(KernelSpec::Mplus(0), x), 4 * boost::math::cyl_bessel_k(0, x), 1e-8) << x;
    ASSERT_NEAR(eval_kernel(KernelSpec::Mminus(0), x), -2 * std::numbers::pi * boost::math::cyl_neumann(0, x), 1e-8) << x;
  }
}

TEST(Bessel, ImaginaryOrderK) {
  // independent half-line quadrature of the same integral representation
  boost::math::quadrature::exp_sinh<double> es;
  for (double mu : {0.5, 2.0, 4.5})
    for (double x : {0.3, 1.0, 4.0, 12.0}) {
      const double ref = es.integrate([&](double t) { return std::exp(-x * std::cosh(t)) * std::cos(2 * mu * t); });
      ASSERT_NEAR(bessel_k_imag<double>(mu, x), ref, 1e-10 * std::max(1.0, std::abs(ref)) + 1e-14) << mu << " " << x;
      ASSERT_NEAR(kernel_mplus<double>(mu, x), 4 * std::cosh(std::numbers::pi * mu) * ref, 1e-9 * std::cosh(std::numbers::pi * mu));
    }
}

TEST(Bessel, EvenInMu) {
  for (double mu : {0.3, 1.7, 6.0})
    for (double x : {0.5, 3.0, 20.0}) {
      EXPECT_EQ(bessel_k_imag<double>(mu, x), bessel_k_imag<double>(-mu, x));
      EXPECT_EQ(kernel_mminus<double>(mu, x), kernel_mminus<double>(-mu, x));
    }
}

TEST(Bessel, DerivativeRelation) {
  const double h = 1e-5;
  for (int n = 1; n <= 12; ++n)
    for (double x = 0.5; x <= 50; x += 0.83) {
      auto f = [&](double t) { return std::pow(t, n) * eval_kernel(KernelSpec::J(n), t); };
      const double fd = (f(x + h) - f(x - h)) / (2 * h);
      const double rhs = std::pow(x, n) * eval_kernel(KernelSpec::J(n - 1), x);
      ASSERT_NEAR(fd, rhs, 1e-6 * std::max(1.0, std::abs(rhs))) << n << " " << x;
    }
}

TEST(Bessel, DecayChecks) {
  std::vector<double> g1, g50;
  for (double x = 1; x <= 100; x += 0.25) g1.push_back(x);
  for (double x = 1; x <= 50; x += 0.25) g50.push_back(x);
  const auto j0 = kernel_decay_check(KernelSpec::J(0), g1);
  EXPECT_LE(j0.sup_scaled, 1.0);
  EXPECT_TRUE(j0.bounded);
  const auto mp = kernel_decay_check(KernelSpec::Mplus(0), g50);
  EXPECT_TRUE(mp.monotone_decreasing);
  EXPECT_EQ(mp.argmax, 1.0);
  const auto mm = kernel_decay_check(KernelSpec::Mminus(0), g1);
  EXPECT_TRUE(std::isfinite(mm.sup_scaled));
  EXPECT_TRUE(mm.bounded);
}

TEST(Bessel, TableMatchesDirect) {
  const auto& t = kernel_table(KernelSpec::J(11));
  for (long double x = 0.01L; x < 40; x *= 1.31L)
    ASSERT_NEAR(static_cast<double>(t(x)), eval_kernel(KernelSpec::J(11), static_cast<double>(x)), 1e-13);
  const auto& m = kernel_table(KernelSpec::Mminus(0));
  for (long double x = 0.01L; x < 40; x *= 1.29L)
    ASSERT_NEAR(static_cast<double>(m(x)), -2 * std::numbers::pi * boost::math::cyl_neumann(0, static_cast<double>(x)), 1e-10);
  EXPECT_LT(m.worst_check(), 1e-12);
}
