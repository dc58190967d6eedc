#pragma once

// Smooth compactly supported test functions. Every bump is built from the
// mollifier exp(-1/t); derivative bounds are measured numerically per weight
// instance and stored as a certificate that tests re-verify by finite
// differences.

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace shiftconv {

template <typename T>
T mollifier(T t) {
  return t > 0 ? std::exp(-1 / t) : T(0);
}

/// Smooth step: 0 on (-inf, 1], 1 on [sqrt 2, inf).
template <typename T>
T eta(T x) {
  const T s2 = std::sqrt(T(2));
  if (x <= 1) return 0;
  if (x >= s2) return 1;
  const T t = (x - 1) / (s2 - 1);
  const T a = mollifier(t), b = mollifier(1 - t);
  return a / (a + b);
}

/// Partition-of-unity bump supported in [1, 2]: sum_k rho(2^(-k/2) x) = 1.
template <typename T>
T rho(T x) {
  const T s2 = std::sqrt(T(2));
  if (x <= 1 || x >= 2) return 0;
  return x <= s2 ? eta(x) : 1 - eta(x / s2);
}

/// sup |rho^(j)| for j = 0, 1, 2 (measured once, with a small margin).
const std::array<double, 3>& rho_derivative_sup();

class SmoothWeight1D {
 public:
  using Fn = std::function<long double(long double)>;

  SmoothWeight1D() = default;
  /// |g^(j)| <= constants[j] * scale^j is the certified pattern.
  SmoothWeight1D(Fn f, double lo, double hi, double scale, std::vector<double> constants, std::string name);

  long double operator()(long double x) const { return (f_ && x >= lo_ && x <= hi_) ? f_(x) : 0.0L; }
  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  double derivative_scale() const noexcept { return scale_; }
  const std::vector<double>& constants() const noexcept { return constants_; }
  const std::string& name() const noexcept { return name_; }
  bool is_zero() const noexcept { return !f_; }

  /// Points inside [lo, hi] where g is smooth but not analytic (quadrature splits there).
  std::vector<double> knots;

  static SmoothWeight1D zero() { return {}; }

 private:
  Fn f_;
  double lo_ = 1, hi_ = 1, scale_ = 1;
  std::vector<double> constants_;
  std::string name_ = "zero";
};

/// rho(x / A) on [A, 2A], scale 1/A.
SmoothWeight1D bump_weight(double A);

/// Certified derivative pattern of a 2D weight.
enum class BoundPattern {
  Box,      // |g^(i,j)| <= C_ij A^-i B^-j P^(i+j)
  Uniform,  // |g^(i,j)| <= C_ij delta^(i+j)
  Dyadic,   // x^i y^j |g^(i,j)| <= C_ij (1 + x/X)^-1 (1 + y/Y)^-1 P^(i+j)
};

struct Certificate {
  BoundPattern pattern = BoundPattern::Box;
  std::array<std::array<double, 3>, 3> C{};  // i, j <= 2
};

/// One separable term c * u(x) * v(y).
struct SeparableTerm {
  long double c = 1;
  std::function<long double(long double)> u, v;
};

class SmoothWeight2D {
 public:
  using Fn = std::function<long double(long double, long double)>;

  SmoothWeight2D() = default;
  SmoothWeight2D(Fn f, std::array<double, 4> support, std::string name);

  long double operator()(long double x, long double y) const {
    if (!f_ || x < support_[0] || x > support_[1] || y < support_[2] || y > support_[3]) return 0.0L;
    return f_(x, y);
  }

  /// {x_lo, x_hi, y_lo, y_hi}
  const std::array<double, 4>& support() const noexcept { return support_; }
  bool is_zero() const noexcept { return !f_; }
  const std::string& name() const noexcept { return name_; }

  // parameters: box scales A, B, oscillation P, dyadic X, Y, redundant delta
  double A = 1, B = 1, P = 1, X = 1, Y = 1, delta = 0;
  std::optional<double> shift_h;  // set when a redundant factor w(x - y - h) is attached
  Certificate certificate;
  /// Present when g = sum of separable terms (no redundant factor).
  std::vector<SeparableTerm> separable;
  /// Smooth but non-analytic junctions in x and in y (quadrature splits there).
  std::vector<double> knots_x, knots_y;

  static SmoothWeight2D zero() { return {}; }

 private:
  Fn f_;
  std::array<double, 4> support_{1, 1, 1, 1};
  std::string name_ = "zero";
};

/// rho(x/A) rho(y/B), modulated for P > 1 by (1 + sin(pi P x/A) sin(pi P y/B) / 2) / 2.
/// The certificate is calibrated on construction.
SmoothWeight2D make_box_weight(double A, double B, double P);

/// Redundant factor w(t): 1 for |t| <= 1/(2 delta), 0 for |t| >= 1/delta.
long double redundant_w(long double t, long double delta);

/// F(x, y) = g(x, y) w(x - y - h), certificate in the uniform delta^(i+j) pattern.
SmoothWeight2D attach_redundant_factor(const SmoothWeight2D& g, double h, double delta);

/// Weight satisfying the dyadic bound: u(x/X) u(y/Y) (1 + sin(P log x) sin(P log y) / 2) / 2 with
/// u(t) = eta(4t) / (1 + t), cut off smoothly beyond `extent` times X (resp. Y).
SmoothWeight2D make_dyadic_weight(double P, double X, double Y, double extent = 64.0);

struct DyadicPiece {
  int k = 0, l = 0;
  double A_k = 0, B_l = 0;
  SmoothWeight2D piece;
};

/// Pieces f rho(x / A_k) rho(y / B_l), A_k = 2^(k/2) X, B_l = 2^(l/2) Y, that
/// meet the support of f.
std::vector<DyadicPiece> dyadic_decompose(const SmoothWeight2D& f);

/// Measures C_ij on a grid and stores them (with margin) in the certificate.
void calibrate_certificate(SmoothWeight2D& g, BoundPattern pattern, int grid = 96);

struct CertificateCheck {
  bool passed = true;
  double worst_ratio = 0;  // max |FD derivative| / certified bound
  int worst_i = 0, worst_j = 0;
  double worst_x = 0, worst_y = 0;
};

/// 5-point central finite differences, orders i, j <= 2, on an n x n interior grid.
CertificateCheck verify_certificate(const SmoothWeight2D& g, int n = 10);

/// Same for 1D weights: |g^(j)| <= C_j scale^j, j <= 2.
CertificateCheck verify_certificate(const SmoothWeight1D& g, int n = 10);

/// Mixed partial of order (i, j) by 5-point stencils, step hx, hy.
long double finite_difference(const SmoothWeight2D& g, long double x, long double y, int i, int j, long double hx,
                              long double hy);

/// L1 norm of the (1,1) derivative of g over its support, by a midpoint grid.
double l1_norm_mixed(const SmoothWeight2D& g, int grid = 200);

}  // namespace shiftconv
