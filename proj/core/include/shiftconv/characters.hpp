#pragma once

// Dirichlet characters mod q built from a CRT decomposition of (Z/q)^* into
// cyclic factors with explicit generators. Labels are "q:index" where index
// is the position of the exponent vector in lexicographic order (0 = principal).

#include <complex>
#include <memory>
#include <string>
#include <vector>

#include "shiftconv/arith.hpp"

namespace shiftconv {

/// One cyclic factor of (Z/q)^*: a generator of order `order`, embedded in Z/q
/// (congruent to the generator modulo `prime_power`, to 1 modulo the rest).
struct CyclicFactor {
  i64 prime = 0;
  i64 prime_power = 0;
  i64 order = 0;
  i64 generator = 0;
};

class DirichletCharacter {
 public:
  DirichletCharacter(i64 modulus, std::vector<i64> exponents, std::vector<std::complex<double>> values,
                     i64 index, i64 conductor);

  i64 modulus() const noexcept { return q_; }
  i64 index() const noexcept { return index_; }
  std::string label() const;
  i64 conductor() const noexcept { return conductor_; }
  bool is_primitive() const noexcept { return conductor_ == q_; }
  bool is_principal() const noexcept { return index_ == 0; }
  bool is_real() const;
  /// Exponent vector over the cyclic factors of the group.
  const std::vector<i64>& exponents() const noexcept { return exponents_; }

  std::complex<double> operator()(i64 n) const { return values_[static_cast<std::size_t>(mod_reduce(n, q_))]; }
  const std::vector<std::complex<double>>& values() const noexcept { return values_; }

  /// chi(-1) as +1 or -1.
  int parity() const;

 private:
  i64 q_;
  std::vector<i64> exponents_;
  std::vector<std::complex<double>> values_;
  i64 index_;
  i64 conductor_;
};

class CharacterGroup {
 public:
  explicit CharacterGroup(i64 q);

  i64 modulus() const noexcept { return q_; }
  i64 size() const noexcept { return size_; }
  const std::vector<CyclicFactor>& factors() const noexcept { return factors_; }

  /// Character with the given lexicographic index, 0 <= index < size().
  DirichletCharacter character(i64 index) const;
  std::vector<DirichletCharacter> all() const;
  std::vector<DirichletCharacter> primitive() const;

  /// Discrete logarithms of n (coprime to q) over the cyclic factors.
  std::vector<i64> discrete_log(i64 n) const;

 private:
  i64 conductor_of(const std::vector<i64>& exps) const;

  i64 q_;
  i64 size_ = 1;
  std::vector<CyclicFactor> factors_;
  // dlog_[f][n mod q] for n coprime to q, -1 otherwise.
  std::vector<std::vector<i64>> dlog_;
};

std::vector<DirichletCharacter> enumerate_characters(i64 q);

/// Smallest divisor q* of q from which chi is induced, by direct testing.
/// Independent of the structural conductor stored on the character.
i64 conductor_by_search(const DirichletCharacter& chi);

/// Parse "q:index" or "trivial" (principal mod 1).
DirichletCharacter character_from_label(const std::string& label);

std::complex<double> gauss_sum(const DirichletCharacter& chi);

/// Primitive character mod q* inducing chi.
DirichletCharacter primitive_inducing(const DirichletCharacter& chi);

/// Pointwise product of characters, possibly of different moduli, as a character
/// mod lcm (the label is recomputed in that group).
DirichletCharacter character_product(const DirichletCharacter& a, const DirichletCharacter& b);

}  // namespace shiftconv
