#include "shiftconv/characters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "shiftconv/error.hpp"
#include "shiftconv/parallel.hpp"

namespace shiftconv {
namespace {

i64 primitive_root_mod_prime(i64 p) {
  if (p == 2) return 1;
  const auto fac = factorize(p - 1);
  for (i64 g = 2; g < p; ++g) {
    bool ok = true;
    for (const auto& [r, e] : fac) {
      if (pow_mod(g, static_cast<u64>((p - 1) / r), p) == 1) {
        ok = false;
        break;
      }
    }
    if (ok) return g;
  }
  throw Error("no primitive root mod " + std::to_string(p));
}

// x with x = r (mod m1) and x = 1 (mod m2), for coprime m1, m2.
i64 crt_with_one(i64 r, i64 m1, i64 m2) {
  if (m2 == 1) return mod_reduce(r, m1);
  // x = 1 + m2 * t, m2 * t = r - 1 (mod m1)
  const i64 t = static_cast<i64>(static_cast<i128>(mod_reduce(r - 1, m1)) * mod_inverse(m2, m1).value % m1);
  return 1 + m2 * t;
}

int v_p(i64 n, i64 p) {
  int v = 0;
  while (n != 0 && n % p == 0) {
    n /= p;
    ++v;
  }
  return v;
}

}  // namespace

DirichletCharacter::DirichletCharacter(i64 modulus, std::vector<i64> exponents,
                                       std::vector<std::complex<double>> values, i64 index, i64 conductor)
    : q_(modulus),
      exponents_(std::move(exponents)),
      values_(std::move(values)),
      index_(index),
      conductor_(conductor) {}

std::string DirichletCharacter::label() const { return std::to_string(q_) + ":" + std::to_string(index_); }

bool DirichletCharacter::is_real() const {
  return std::all_of(values_.begin(), values_.end(), [](const auto& z) { return z.imag() == 0.0; });
}

int DirichletCharacter::parity() const {
  if (q_ <= 2) return 1;
  return (*this)(-1).real() > 0 ? 1 : -1;
}

CharacterGroup::CharacterGroup(i64 q) : q_(q) {
  if (q < 1) throw DomainError("character modulus must be >= 1, got " + std::to_string(q));
  for (const auto& [p, e] : factorize(q == 1 ? 1 : q)) {
    i64 pe = 1;
    for (int k = 0; k < e; ++k) pe *= p;
    const i64 rest = q / pe;
    auto add_factor = [&](i64 local_gen, i64 order) {
      factors_.push_back({p, pe, order, crt_with_one(local_gen, pe, rest)});
      // local discrete log table on Z/p^e
      std::vector<i64> table(static_cast<std::size_t>(pe), -1);
      dlog_.push_back(std::move(table));
    };
    if (p == 2) {
      if (e >= 2) add_factor(pe - 1, 2);
      if (e >= 3) add_factor(5, pe / 4);
    } else {
      i64 g = primitive_root_mod_prime(p);
      if (e >= 2 && pow_mod(g, static_cast<u64>(p - 1), p * p) == 1) g += p;
      add_factor(g, pe / p * (p - 1));
    }
  }
  for (const auto& f : factors_) size_ *= f.order;

  // Fill discrete logs. Odd p: powers of the generator. p = 2: n = (-1)^a 5^b.
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    const auto& fac = factors_[f];
    auto& table = dlog_[f];
    if (fac.prime != 2) {
      const i64 g = mod_reduce(fac.generator, fac.prime_power);
      i64 x = 1;
      for (i64 k = 0; k < fac.order; ++k) {
        table[static_cast<std::size_t>(x)] = k;
        x = static_cast<i64>(static_cast<i128>(x) * g % fac.prime_power);
      }
    } else if (mod_reduce(fac.generator, fac.prime_power) == fac.prime_power - 1) {
      // the -1 factor; a 5 factor, if any, is filled below
      for (i64 n = 1; n < fac.prime_power; n += 2) table[static_cast<std::size_t>(n)] = (n % 4 == 1) ? 0 : 1;
    }
  }
  // 5-factor tables (second 2-adic factor) need the sign split first.
  for (std::size_t f = 1; f < factors_.size(); ++f) {
    const auto& fac = factors_[f];
    if (fac.prime != 2 || factors_[f - 1].prime != 2) continue;
    auto& table = dlog_[f];
    std::fill(table.begin(), table.end(), -1);
    i64 x = 1;
    for (i64 k = 0; k < fac.order; ++k) {
      table[static_cast<std::size_t>(x)] = k;
      table[static_cast<std::size_t>(fac.prime_power - x)] = k;
      x = x * 5 % fac.prime_power;
    }
  }
}

std::vector<i64> CharacterGroup::discrete_log(i64 n) const {
  if (std::gcd(mod_reduce(n, q_), q_) != 1) throw DomainError("discrete_log: argument not coprime to modulus");
  std::vector<i64> out(factors_.size());
  for (std::size_t f = 0; f < factors_.size(); ++f)
    out[f] = dlog_[f][static_cast<std::size_t>(mod_reduce(n, factors_[f].prime_power))];
  return out;
}

i64 CharacterGroup::conductor_of(const std::vector<i64>& exps) const {
  i64 cond = 1;
  for (std::size_t f = 0; f < factors_.size(); ++f) {
    const auto& fac = factors_[f];
    const int e = v_p(fac.prime_power, fac.prime);
    if (fac.prime != 2) {
      if (exps[f] == 0) continue;
      // trivial on 1 + p^j Z iff p^(e-j) | a
      int j = 1;
      i64 pj = fac.prime_power / fac.prime;  // p^(e-j)
      while (j < e && exps[f] % pj != 0) {
        ++j;
        pj /= fac.prime;
      }
      for (int k = 0; k < j; ++k) cond *= fac.prime;
      continue;
    }
    // 2-adic: handled at the -1 factor, looking ahead for the 5 factor.
    if (f > 0 && factors_[f - 1].prime == 2) continue;
    const i64 a1 = exps[f];
    const bool has5 = f + 1 < factors_.size() && factors_[f + 1].prime == 2;
    const i64 a2 = has5 ? exps[f + 1] : 0;
    if (a2 == 0) {
      if (a1 != 0) cond *= 4;
      continue;
    }
    int j = 3;
    while (j < e && a2 % (i64{1} << (e - j)) != 0) ++j;
    cond *= i64{1} << j;
  }
  return cond;
}

DirichletCharacter CharacterGroup::character(i64 index) const {
  if (index < 0 || index >= size_)
    throw DomainError("character index " + std::to_string(index) + " out of range for modulus " +
                      std::to_string(q_));
  std::vector<i64> exps(factors_.size());
  i64 rem = index;
  for (std::size_t f = factors_.size(); f-- > 0;) {
    exps[f] = rem % factors_[f].order;
    rem /= factors_[f].order;
  }
  i64 exponent = 1;
  for (const auto& fac : factors_) exponent = std::lcm(exponent, fac.order);
  const auto roots = additive_character_table(exponent);

  std::vector<std::complex<double>> values(static_cast<std::size_t>(q_), 0.0);
  for (i64 n = 0; n < q_; ++n) {
    if (std::gcd(n, q_) != 1) continue;
    i64 phase = 0;
    for (std::size_t f = 0; f < factors_.size(); ++f) {
      const i64 lg = dlog_[f][static_cast<std::size_t>(n % factors_[f].prime_power)];
      phase = (phase + static_cast<i64>(static_cast<i128>(exps[f]) * lg % factors_[f].order) *
                           (exponent / factors_[f].order)) %
              exponent;
    }
    values[static_cast<std::size_t>(n)] = roots[static_cast<std::size_t>(phase)];
  }
  if (q_ == 1) values[0] = 1.0;
  return DirichletCharacter(q_, std::move(exps), std::move(values), index, conductor_of(exps));
}

std::vector<DirichletCharacter> CharacterGroup::all() const {
  std::vector<DirichletCharacter> out;
  out.reserve(static_cast<std::size_t>(size_));
  for (i64 i = 0; i < size_; ++i) out.push_back(character(i));
  return out;
}

std::vector<DirichletCharacter> CharacterGroup::primitive() const {
  std::vector<DirichletCharacter> out;
  for (i64 i = 0; i < size_; ++i) {
    std::vector<i64> exps(factors_.size());
    i64 rem = i;
    for (std::size_t f = factors_.size(); f-- > 0;) {
      exps[f] = rem % factors_[f].order;
      rem /= factors_[f].order;
    }
    if (conductor_of(exps) == q_) out.push_back(character(i));
  }
  return out;
}

std::vector<DirichletCharacter> enumerate_characters(i64 q) { return CharacterGroup(q).all(); }

i64 conductor_by_search(const DirichletCharacter& chi) {
  const i64 q = chi.modulus();
  for (const i64 d : divisors(q)) {
    bool induced = true;
    for (i64 n = 1; n < q && induced; n += d) {
      if (std::gcd(n, q) != 1) continue;
      if (std::abs(chi(n) - std::complex<double>(1.0)) > 1e-9) induced = false;
    }
    if (induced) return d;
  }
  return q;
}

namespace {

// Locate the character of `group` agreeing with `value(n)` on units.
template <typename F>
DirichletCharacter match_in_group(const CharacterGroup& group, F&& value) {
  const auto& fac = group.factors();
  i64 index = 0;
  for (const auto& f : fac) {
    const auto z = value(f.generator);
    const double turns = std::arg(z) / (2.0 * std::numbers::pi);
    const i64 a = mod_reduce(std::llround(turns * static_cast<double>(f.order)), f.order);
    index = index * f.order + a;
  }
  return group.character(index);
}

}  // namespace

DirichletCharacter primitive_inducing(const DirichletCharacter& chi) {
  const i64 q = chi.modulus();
  const i64 qs = chi.conductor();
  if (qs == q) return chi;
  const CharacterGroup group(qs);
  return match_in_group(group, [&](i64 g) {
    // a lift of g mod qs that is coprime to q
    i64 n = g;
    while (std::gcd(n, q) != 1) n += qs;
    return chi(n);
  });
}

DirichletCharacter character_product(const DirichletCharacter& a, const DirichletCharacter& b) {
  const i64 m = std::lcm(a.modulus(), b.modulus());
  const CharacterGroup group(m);
  return match_in_group(group, [&](i64 g) { return a(g) * b(g); });
}

DirichletCharacter character_from_label(const std::string& label) {
  if (label == "trivial") return CharacterGroup(1).character(0);
  const auto colon = label.find(':');
  if (colon == std::string::npos) throw DomainError("character label must be q:index, got '" + label + "'");
  i64 q = 0, idx = 0;
  try {
    std::size_t used = 0;
    q = std::stoll(label.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument("q");
    const std::string rest = label.substr(colon + 1);
    idx = std::stoll(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("index");
  } catch (const std::logic_error&) {
    throw DomainError("malformed character label '" + label + "'");
  }
  return CharacterGroup(q).character(idx);
}

std::complex<double> gauss_sum(const DirichletCharacter& chi) {
  const i64 q = chi.modulus();
  CompensatedSum<std::complex<long double>> acc;
  for (i64 n = 0; n < q; ++n) {
    const auto c = chi(n);
    if (c == 0.0) continue;
    acc.add(std::complex<long double>(c.real(), c.imag()) * e_q_ld(n, q));
  }
  const auto v = acc.value();
  return {static_cast<double>(v.real()), static_cast<double>(v.imag())};
}

}  // namespace shiftconv
