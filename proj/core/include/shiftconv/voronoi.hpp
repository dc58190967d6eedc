#pragma once

// Both sides of the Voronoi summation identity for a coefficient source:
//   chi(d) sum_m lambda(m) e_q(dm) g(m)
// against the dual sum with the Bessel transforms of g. Holomorphic sources
// use J_{k-1}; maass and divisor sources use the M+- kernels, and the
// divisor analog carries an additional main term
//   (1/q) int (log(x/q^2) + 2 gamma) g(x) dx.

#include <complex>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "shiftconv/arith.hpp"
#include "shiftconv/bessel.hpp"
#include "shiftconv/coeffs.hpp"
#include "shiftconv/weights.hpp"

namespace shiftconv {

struct TransformOptions {
  int gl_points = 20;
  double panels_per_oscillation = 1.0;
  long base_panels = 16;
  double extra_oscillations = 0;  // oscillations of the weight itself across its support
};

/// I(y) = int g(x) K(4 pi sqrt(x y) / q) dx for a real kernel K, computed in
/// long double after the substitution x = u^2 (so the kernel argument is
/// linear in u) with composite Gauss-Legendre panels scaled to the number of
/// oscillations. Several weights on a common support share the kernel
/// evaluations. Node sets are cached per refinement level; the object is
/// safe to share between threads.
class BesselTransform {
 public:
  BesselTransform(SmoothWeight1D g, i64 q, KernelSpec kernel, TransformOptions opts = {});
  /// All weights must have the same support; knots are merged.
  BesselTransform(std::vector<SmoothWeight1D> gs, i64 q, KernelSpec kernel, TransformOptions opts = {});

  struct Value {
    long double integral = 0;
    // rounding floor: argument errors of relative size eps give K errors of
    // about |K| x eps, added in quadrature over the nodes
    long double noise = 0;
  };
  /// First weight only.
  Value integral(long double y) const;
  /// One value per weight.
  void integrals(long double y, Value* out) const;

  std::size_t weight_count() const noexcept { return gs_.size(); }
  const KernelSpec& kernel() const noexcept { return kernel_; }
  i64 modulus() const noexcept { return q_; }

 private:
  struct Level {
    std::vector<long double> u;
    std::vector<std::vector<long double>> gw;  // per weight: rule weight * g(u^2) * 2u
  };
  const Level& level(std::size_t piece, int lev) const;

  std::vector<SmoothWeight1D> gs_;
  i64 q_;
  KernelSpec kernel_;
  TransformOptions opts_;
  std::vector<std::pair<long double, long double>> pieces_;  // u-intervals
  mutable std::mutex mutex_;
  mutable std::vector<std::vector<std::unique_ptr<Level>>> levels_;
};

/// ghat(y) = (2 pi i^k / q) int g(x) J_{k-1}(4 pi sqrt(x y) / q) dx.
std::function<std::complex<double>(double)> transform_g_hat(const SmoothWeight1D& g, i64 q, int k,
                                                            TransformOptions opts = {});

/// g^+(y) = (1/q) int g(x) M+(..) dx and g^-(y) = (1/q) int g(x) M-(..) dx.
std::function<double(double)> transform_g_pm(const SmoothWeight1D& g, i64 q, double mu, int sign,
                                             TransformOptions opts = {});

struct VoronoiOptions {
  i64 m_cut = 0;             // 0: choose by the decay rule
  double cut_tolerance = 1e-10;
  i64 m_cap = 0;             // 0: source m_max
  TransformOptions transform;
};

struct VoronoiResult {
  i64 q = 1, d = 0;
  std::complex<double> lhs, rhs;
  double residual = 0;
  i64 m_cut = 0;
  i64 m_rule = 0;            // first m meeting the decay rule (before doubling)
  double tail_estimate = 0;
  std::complex<double> main_term;  // divisor analog only
  bool divisor_analog = false;     // flagged: not a genuine cusp form
  std::string kernel;
};

/// One family of terms on the dual side. Holomorphic sources have the single
/// J branch; maass and divisor sources have two:
///   Minus: lambda(m)  e_q(-dbar m) g^-(m)
///   Plus:  lambda(-m) e_q(+dbar m) g^+(m)
enum class DualBranch { J, Minus, Plus };

struct BranchSigns {
  KernelFamily family;
  int coefficient_sign;  // lambda(coefficient_sign * m)
  int phase_sign;        // e_q(phase_sign * dbar * m)
};

BranchSigns branch_signs(DualBranch b);
std::string to_string(DualBranch b);
std::vector<DualBranch> dual_branches(const CoefficientSource& src);

/// Transformed weights of a batch of real weights on a common support, at
/// m = 1..m_cut, with the 2 pi i^k / q (holomorphic) or 1/q prefactor applied.
struct DualSeries {
  i64 q = 1;
  std::vector<DualBranch> branches;
  i64 m_cut = 0, m_rule = 0;
  double tail_estimate = 0;
  /// values[w][branch][m], entry m = 0 unused
  std::vector<std::vector<std::vector<std::complex<long double>>>> values;
  /// divisor analog: (1/q) int (log(x/q^2) + 2 gamma) g_w(x) dx, else 0
  std::vector<double> main_term;
};

/// The truncation rule: smallest m after which max_w |transform| * (running
/// Rankin-Selberg average of |lambda|) * m stays below
/// max(cut_tolerance * scale, rounding floor) over a window, then doubled.
DualSeries dual_series(const CoefficientSource& src, i64 q, const std::vector<SmoothWeight1D>& gs, double scale,
                       const VoronoiOptions& opts = {});

/// sum_branch sum_{m <= m_cut} lambda(+-m) e_q(-+dbar m) values[w][branch][m] + main_term[w].
std::complex<long double> dual_sum(const DualSeries& ds, const CoefficientSource& src, i64 dbar, std::size_t w);

/// Runs every d in `ds` against one cached transform. Requires N | q, (d, q) = 1.
std::vector<VoronoiResult> voronoi_residuals(const CoefficientSource& src, i64 q, const std::vector<i64>& ds,
                                             const SmoothWeight1D& g, const VoronoiOptions& opts = {});

VoronoiResult voronoi_residual(const CoefficientSource& src, i64 d, i64 q, const SmoothWeight1D& g,
                               const VoronoiOptions& opts = {});

/// chi(d) sum lambda(m) e_q(dm) g(m) over the support of g.
std::complex<double> voronoi_lhs(const CoefficientSource& src, i64 d, i64 q, const SmoothWeight1D& g);

/// (1/q) int (log(x/q^2) + 2 gamma) g(x) dx.
double divisor_voronoi_main_term(const SmoothWeight1D& g, i64 q);

}  // namespace shiftconv
