#pragma once

// Complex log-gamma in long double: Stirling's series after an upward shift
// of the argument, reflection for Re z < 1/2. The imaginary part is a
// continuous branch along the shift, not necessarily the principal one; only
// exp() and differences of it are used downstream.

#include <complex>

namespace shiftconv {

std::complex<long double> log_gamma(std::complex<long double> z);

/// Gamma_R(s) = pi^(-s/2) Gamma(s/2), as a logarithm.
std::complex<long double> log_gamma_r(std::complex<long double> s);

}  // namespace shiftconv
