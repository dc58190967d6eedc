#pragma once

// Normalized Fourier coefficients lambda(m): Ramanujan's Delta from the eta
// product, the divisor-function analog, and coefficient files.

#include <complex>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "shiftconv/arith.hpp"
#include "shiftconv/characters.hpp"

namespace shiftconv {

enum class FormKind { Holomorphic, Maass, Divisor };

std::string to_string(FormKind kind);
FormKind form_kind_from_string(const std::string& s);

class CoefficientSource {
 public:
  FormKind kind = FormKind::Holomorphic;
  i64 level = 1;
  /// Nebentypus label "q:index" or "trivial".
  std::string nebentypus = "trivial";
  int weight = 0;      // holomorphic only
  double mu = 0.0;     // maass/divisor only
  int sign = 0;        // lambda(-m) = sign * lambda(m); 0 when not meaningful
  std::optional<std::complex<double>> root_number;  // root number of the form itself, if supplied
  bool primitive = true;

  CoefficientSource() = default;
  CoefficientSource(std::vector<std::complex<double>> values_from_one);

  i64 m_max() const noexcept { return static_cast<i64>(coeffs_->size()) - 1; }
  bool is_real() const noexcept { return real_; }

  /// lambda(m) for 1 <= |m| <= m_max; negative m only for maass/divisor kinds.
  std::complex<double> operator()(i64 m) const;
  std::complex<double> at_positive(i64 m) const noexcept { return (*coeffs_)[static_cast<std::size_t>(m)]; }

  /// Throws CoefficientShortfall when m_max < required.
  void require(i64 required, const std::string& context) const;

  /// Entries 0..m_max; entry 0 is 0.
  const std::vector<std::complex<double>>& data() const noexcept { return *coeffs_; }

  DirichletCharacter nebentypus_character() const;

 private:
  std::shared_ptr<const std::vector<std::complex<double>>> coeffs_ =
      std::make_shared<const std::vector<std::complex<double>>>(1, 0.0);
  bool real_ = true;
};

enum class TauMethod {
  Auto,    // Sparse below 2^15 coefficients, Squaring above
  Sparse,  // pentagonal series multiplied in 23 times, exact 128-bit adds: O(m_max^1.5)
  Squaring // Jacobi's prod (1 - x^n)^3 squared three times by NTT mod five primes, CRT back
};

/// Ramanujan tau(1..m_max) from x * prod (1 - x^n)^24; entry 0 is 0.
/// Throws OverflowError if a coefficient leaves the 128-bit range.
std::vector<i128> ramanujan_tau(i64 m_max, TauMethod method = TauMethod::Auto);

/// Delta normalized by m^(-11/2): level 1, weight 12.
CoefficientSource delta_coefficients(i64 m_max);

/// lambda(m) = d(m); kind divisor, mu = 0, sign +.
CoefficientSource divisor_analog(i64 m_max);

CoefficientSource contragredient(const CoefficientSource& src);

/// (sum_{m <= x} |lambda(m)|^2) / x.
double rankin_selberg_ratio(const CoefficientSource& src, double x);

// File format: one header line
//   #coef v1 kind=<holomorphic|maass|divisor> N=<int> k=<int|-> mu=<decimal|-> neb=<q:index|trivial>
//   sign=<+|-|-> root=<re,im|->
// (all on one line) followed by rows "<m> <re> <im>" for m = 1, 2, ..., with
// 17 significant digits and no blank lines.
CoefficientSource load_coefficients(std::istream& in);
CoefficientSource load_coefficients(const std::string& path);
void save_coefficients(const CoefficientSource& src, std::ostream& out);
void save_coefficients(const CoefficientSource& src, const std::string& path);
std::string coefficient_header(const CoefficientSource& src);

}  // namespace shiftconv
