#include "shiftconv/gamma.hpp"

#include <cmath>
#include <numbers>

#include "shiftconv/error.hpp"

namespace shiftconv {
namespace {

constexpr long double kPi = std::numbers::pi_v<long double>;

// B_2j / (2j (2j - 1)) for j = 1..10
constexpr long double kStirling[] = {
    1.0L / 12,          -1.0L / 360,          1.0L / 1260,          -1.0L / 1680,
    1.0L / 1188,        -691.0L / 360360,     1.0L / 156,           -3617.0L / 122400,
    43867.0L / 244188,  -174611.0L / 125400,
};

}  // namespace

std::complex<long double> log_gamma(std::complex<long double> z) {
  if (z.imag() == 0 && z.real() <= 0 && z.real() == std::floor(z.real()))
    throw DomainError("log_gamma: pole at a non-positive integer");
  if (z.real() < 0.5L) {
    // Gamma(z) Gamma(1 - z) = pi / sin(pi z)
    return std::log(kPi) - std::log(std::sin(kPi * z)) - log_gamma(1.0L - z);
  }
  std::complex<long double> shift = 0;
  while (std::abs(z) < 20) {
    shift += std::log(z);
    z += 1.0L;
  }
  const std::complex<long double> w = 1.0L / z, w2 = w * w;
  std::complex<long double> series = 0, p = w;
  for (const long double c : kStirling) {
    series += c * p;
    p *= w2;
  }
  return (z - 0.5L) * std::log(z) - z + 0.5L * std::log(2 * kPi) + series - shift;
}

std::complex<long double> log_gamma_r(std::complex<long double> s) {
  return -s / 2.0L * std::log(kPi) + log_gamma(s / 2.0L);
}

}  // namespace shiftconv
