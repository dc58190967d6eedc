#pragma once

// Bessel kernels of the Voronoi transforms: integer-order J_n and the real
// combinations
//   M+(x) = 4 cosh(pi mu) K_{2i mu}(x),
//   M-(x) = -(pi / cosh(pi mu)) (Y_{2i mu}(x) + Y_{-2i mu}(x)).
//
// Representations used:
//   J_n(x)   = (1/2pi) int_0^{2pi} cos(n t - x sin t) dt, periodic trapezoid,
//              Hankel expansion once x is large enough for it to reach
//              working precision.
//   K_{2iu}  = int_0^inf exp(-x cosh t) cos(2u t) dt, trapezoid on the even
//              integrand (spectrally accurate).
//   M-(x)    = -(2/cosh pi u) int_0^pi sin(x sin t) cosh(2u t) dt
//              + 4 cosh(pi u) int_0^inf cos(2u t) exp(-x sinh t) dt,
//              from Schlaefli's integral for Y_nu summed over +-nu; Hankel
//              expansion for large x. At u = 0 this is -2 pi Y_0(x).

#include <memory>
#include <mutex>
#include <string>
#include <vector>

namespace shiftconv {

enum class KernelFamily { J, Mplus, Mminus };

struct KernelSpec {
  KernelFamily family = KernelFamily::J;
  int order = 0;     // J_n
  double mu = 0.0;   // M+- of order 2 i mu

  static KernelSpec J(int n) { return {KernelFamily::J, n, 0.0}; }
  static KernelSpec Mplus(double mu) { return {KernelFamily::Mplus, 0, mu}; }
  static KernelSpec Mminus(double mu) { return {KernelFamily::Mminus, 0, mu}; }
};

std::string to_string(const KernelSpec& spec);

template <typename T>
T bessel_j(int n, T x);

/// K_{2i mu}(x) for x > 0; even in mu by construction (only |mu| is used).
template <typename T>
T bessel_k_imag(T mu, T x);

template <typename T>
T kernel_mplus(T mu, T x);

template <typename T>
T kernel_mminus(T mu, T x);

/// Dispatches on spec; x <= 0 raises DomainError.
double eval_kernel(const KernelSpec& spec, double x);
long double eval_kernel_ld(const KernelSpec& spec, long double x);

// Piecewise Chebyshev interpolant of a kernel on [2^-20, x_hi): dyadic pieces
// below 1, unit pieces above. Pieces are built on first use and checked
// against direct evaluation at off-node points; a piece that fails the check
// is split (up to 16 ways) and a piece that still fails falls back to the
// direct evaluation. Outside the table eval_kernel_ld is used, so x_hi is
// chosen where the direct routes become cheap (Hankel / K asymptotics).
class KernelTable {
 public:
  static constexpr int kDegree = 24;
  static constexpr int kDyadicPieces = 20;

  explicit KernelTable(const KernelSpec& spec);
  KernelTable(const KernelTable&) = delete;
  KernelTable& operator=(const KernelTable&) = delete;

  long double operator()(long double x) const;
  const KernelSpec& spec() const { return spec_; }
  double x_hi() const { return x_hi_; }
  /// Largest observed |interpolant - direct| / scale over the checks so far.
  double worst_check() const;

 private:
  struct Piece {
    long double lo = 0, hi = 0;
    int splits = 0;  // 0 = direct evaluation fallback
    std::vector<long double> coef;  // splits * (kDegree + 1)
  };
  void build(Piece& p, long double lo, long double hi) const;
  const Piece& piece(std::size_t i) const;

  KernelSpec spec_;
  double x_hi_ = 24;
  std::size_t count_ = 0;
  std::unique_ptr<Piece[]> pieces_;
  std::unique_ptr<std::once_flag[]> once_;
  mutable std::mutex check_mutex_;
  mutable double worst_check_ = 0;
};

/// Shared table per kernel (process lifetime).
const KernelTable& kernel_table(const KernelSpec& spec);

struct DecayReport {
  double sup_scaled = 0;   // sup |kernel(x)| sqrt(x)
  double argmax = 0;
  bool monotone_decreasing = true;
  bool bounded = true;     // sup_scaled <= constant on the x >= 1 part of the grid
  double constant = 0;
  std::vector<double> scaled;  // |kernel(x)| sqrt(x) on the grid
};

/// Scans |kernel(x)| x^(1/2) over an increasing positive grid.
DecayReport kernel_decay_check(const KernelSpec& spec, const std::vector<double>& x_grid, double constant = 10.0);

}  // namespace shiftconv
