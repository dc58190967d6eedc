#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "shiftconv/lfun.hpp"

using namespace shiftconv;

namespace {

const CoefficientSource& delta_src() {
  static const CoefficientSource s = delta_coefficients(400000);
  return s;
}

DirichletCharacter conjugate_in_group(const DirichletCharacter& chi) {
  for (const auto& c : CharacterGroup(chi.modulus()).all()) {
    bool same = true;
    for (i64 n = 0; n < chi.modulus() && same; ++n) same = std::abs(c(n) - std::conj(chi(n))) < 1e-12;
    if (same) return c;
  }
  throw std::logic_error("no conjugate");
}

// prod over p <= P of (1 - lambda(p) chi(p) p^-s + chi(p)^2 p^-2s)^-1, level 1
std::complex<double> euler_product(const DirichletCharacter& chi, std::complex<double> s, i64 P) {
  std::complex<long double> prod = 1;
  const std::complex<long double> sl(s);
  for (i64 p = 2; p <= P; ++p) {
    if (!is_prime(p)) continue;
    const std::complex<long double> c(chi(p)), lam(delta_src()(p));
    const auto x = std::exp(-sl * std::log(static_cast<long double>(p)));
    prod /= 1.0L - lam * c * x + c * c * x * x;
  }
  return {static_cast<double>(prod.real()), static_cast<double>(prod.imag())};
}

std::complex<double> direct_series(const DirichletCharacter& chi, std::complex<double> s, i64 N) {
  std::complex<long double> acc = 0;
  const std::complex<long double> sl(s);
  for (i64 m = N; m >= 1; --m)
    acc += std::complex<long double>(delta_src()(m) * chi(m)) * std::exp(-sl * std::log(static_cast<long double>(m)));
  return {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
}

LValueResult lvalue(const DirichletCharacter& chi, std::complex<double> s, AfeWeight w = AfeWeight::flat(),
                    const CoefficientSource& phi = delta_src()) {
  LValueRequest r;
  r.s = s;
  r.phi = phi;
  r.chi = chi;
  r.weight = w;
  return afe_lvalue(r);
}

}  // namespace

TEST(Lfun, RootNumberLevelOne) {
  for (i64 q : {5, 7, 12})
    for (const auto& chi : CharacterGroup(q).primitive()) {
      const auto g = gauss_sum(chi);
      const auto eps = root_number(delta_src(), chi);
      EXPECT_NEAR(std::abs(eps - g * g / static_cast<double>(q)), 0, 1e-12);  // i^12 = 1
      EXPECT_NEAR(std::abs(eps), 1.0, 1e-12);
    }
}

TEST(Lfun, CutoffLimits) {
  const auto chi = CharacterGroup(7).primitive().front();
  const auto td = twist_data(delta_src(), chi);
  EXPECT_NEAR(td.conductor, 49, 1e-12);
  EXPECT_NEAR(std::abs(afe_cutoff({0.5, 0}, td, AfeWeight::flat(), 1e-6) - 1.0), 0, 1e-6);
  EXPECT_LT(std::abs(afe_cutoff({0.5, 0}, td, AfeWeight::flat(), 50)), 1e-12);
}

TEST(Lfun, DirectSeriesFarRight) {
  const auto trivial = character_from_label("trivial");
  EXPECT_NEAR(std::abs(lvalue(trivial, {3, 0}).value - direct_series(trivial, {3, 0}, 100000)), 0, 1e-9);
  for (const auto& chi : CharacterGroup(5).primitive())
    EXPECT_NEAR(std::abs(lvalue(chi, {3, 1.5}).value - direct_series(chi, {3, 1.5}, 100000)), 0, 1e-9);
}

TEST(Lfun, EulerProductAtTwo) {
  const auto trivial = character_from_label("trivial");
  EXPECT_NEAR(std::abs(lvalue(trivial, {2, 0}).value - euler_product(trivial, {2, 0}, 400000)), 0, 1e-6);
  const auto chi = CharacterGroup(7).primitive().at(1);
  EXPECT_NEAR(std::abs(lvalue(chi, {2, 0}).value - euler_product(chi, {2, 0}, 400000)), 0, 1e-6);
}

TEST(Lfun, DualWeightModFive) {
  for (const auto& chi : CharacterGroup(5).primitive()) {
    const auto a = lvalue(chi, {0.5, 0}, AfeWeight::flat());
    const auto b = lvalue(chi, {0.5, 0}, AfeWeight::gaussian(8));
    EXPECT_LT(std::abs(a.value - b.value), 1e-4) << chi.label();
  }
}

TEST(Lfun, DualWeightDivisorAnalog) {
  const auto div = divisor_analog(20000);
  for (i64 q : {7, 8})
    for (const auto& chi : CharacterGroup(q).primitive()) {
      const auto a = lvalue(chi, {0.5, 0}, AfeWeight::flat(), div);
      const auto b = lvalue(chi, {0.5, 0}, AfeWeight::gaussian(8), div);
      EXPECT_LT(std::abs(a.value - b.value), 1e-4) << chi.label();
    }
}

TEST(Lfun, Conjugation) {
  for (i64 q : {5, 8, 13})
    for (const auto& chi : CharacterGroup(q).primitive()) {
      const std::complex<double> s(0.6, 2.0);
      const auto a = lvalue(chi, s).value;
      const auto b = lvalue(conjugate_in_group(chi), std::conj(s), AfeWeight::flat(), contragredient(delta_src())).value;
      EXPECT_NEAR(std::abs(b - std::conj(a)), 0, 1e-8) << chi.label();
    }
}

TEST(Lfun, BatchMatchesSingle) {
  const auto batch = afe_lvalues_mod(delta_src(), 11);
  const auto prim = CharacterGroup(11).primitive();
  ASSERT_EQ(batch.size(), prim.size());
  for (std::size_t i = 0; i < prim.size(); ++i) {
    EXPECT_EQ(batch[i].label, prim[i].label());
    EXPECT_NEAR(std::abs(batch[i].result.value - lvalue(prim[i], {0.5, 0}).value), 0, 1e-12);
  }
}

TEST(Lfun, AmplifierUnitLength) {
  const auto chi = CharacterGroup(11).primitive().front();
  const auto spec = make_amplifier_spec(delta_src(), chi, 1, 8);
  const auto mom = amplifier_moment(spec);
  double s = 0;
  for (const auto& c : mom.per_character) {
    EXPECT_NEAR(c.amplifier, 1.0, 1e-14);
    s += std::norm(c.S_omega);
  }
  EXPECT_NEAR(mom.S, s, 1e-12 * s);
}

TEST(Lfun, AmplifierAgainstDirectSums) {
  const auto chi = CharacterGroup(11).primitive().at(3);
  const auto spec = make_amplifier_spec(delta_src(), chi, 3, 8);
  const auto mom = amplifier_moment(spec);
  const auto prim = CharacterGroup(11).primitive();
  ASSERT_EQ(mom.per_character.size(), prim.size());
  double S = 0;
  for (std::size_t i = 0; i < prim.size(); ++i) {
    const auto& w = prim[i];
    std::complex<double> sw = 0, amp = 0;
    for (i64 m = 8; m <= 16; ++m) sw += delta_src()(m) * w(m) * static_cast<double>(rho(m / 8.0L));
    for (i64 l = 1; l <= 3; ++l) amp += std::conj(chi(l)) * w(l);
    EXPECT_NEAR(std::abs(mom.per_character[i].S_omega - sw), 0, 1e-12);
    EXPECT_NEAR(mom.per_character[i].amplifier, std::norm(amp), 1e-12);
    S += std::norm(amp) * std::norm(sw);
  }
  EXPECT_NEAR(mom.S, S, 1e-10);
  // positivity: dropping every omega but chi
  EXPECT_LE(mom.target_term, mom.S);
  EXPECT_GE(mom.target_term, 0);
}

TEST(Lfun, OffDiagonalRoutes) {
  const auto chi = CharacterGroup(13).primitive().at(2);
  const auto spec = make_amplifier_spec(delta_src(), chi, 3, 16);
  const auto off = amplifier_offdiagonal(spec);
  const auto a = amplifier_coefficients(spec);
  EXPECT_EQ(off.N, 2 * 3 * 16);
  ASSERT_EQ(static_cast<i64>(a.size()), off.N + 1);
  double d0 = 0;
  for (const auto& x : a) d0 += std::norm(x);
  EXPECT_NEAR(off.D0, d0, 1e-10);
  EXPECT_NEAR(off.D0_direct, d0, 1e-10);
  EXPECT_LT(off.max_route_difference, 1e-8);
  // D(h) against the plain correlation sum of a(n)
  for (i64 h = 1; h <= off.N; h += 7) {
    std::complex<double> dh = 0;
    for (i64 n = 1; n + h <= off.N; ++n) dh += a[n + h] * std::conj(a[n]);
    EXPECT_NEAR(std::abs(off.D[h - 1] - dh), 0, 1e-10) << h;
  }
  const auto mom = amplifier_moment(spec);
  EXPECT_LE(mom.S, off.rhs * (1 + 1e-8));
}

TEST(Lfun, Parseval) {
  const auto chi = CharacterGroup(17).primitive().front();
  const auto pc = parseval_check(make_amplifier_spec(delta_src(), chi, 2, 16));
  EXPECT_NEAR(pc.lhs, pc.rhs, 1e-8 * pc.rhs);
}

TEST(Lfun, Sweep) {
  const auto t = subconvexity_sweep(delta_src(), 5, 13);
  ASSERT_EQ(t.rows.size(), 4u);
  const std::vector<i64> qs{5, 7, 11, 13};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(t.rows[i].q, qs[i]);
    EXPECT_TRUE(std::isfinite(t.rows[i].max_abs));
    EXPECT_NEAR(t.rows[i].sqrt_q, std::sqrt(static_cast<double>(qs[i])), 1e-15);
  }
  ASSERT_TRUE(t.slope && t.ci_low && t.ci_high);
  EXPECT_LE(*t.ci_low, *t.slope);
  EXPECT_GE(*t.ci_high, *t.slope);
  EXPECT_TRUE(subconvexity_sweep(delta_src(), 14, 16).rows.empty());
}
