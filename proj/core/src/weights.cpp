#include "shiftconv/weights.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "shiftconv/error.hpp"

namespace shiftconv {
namespace {

constexpr long double kPi = std::numbers::pi_v<long double>;

// 5-point central stencils for orders 0, 1, 2 (offsets -2..2).
constexpr long double kStencil[3][5] = {
    {0, 0, 1, 0, 0},
    {1.0L / 12, -8.0L / 12, 0, 8.0L / 12, -1.0L / 12},
    {-1.0L / 12, 16.0L / 12, -30.0L / 12, 16.0L / 12, -1.0L / 12},
};

double pattern_bound(const SmoothWeight2D& g, long double x, long double y, int i, int j) {
  switch (g.certificate.pattern) {
    case BoundPattern::Box:
      return static_cast<double>(std::pow(g.A, -i) * std::pow(g.B, -j) * std::pow(g.P, i + j));
    case BoundPattern::Uniform:
      return std::pow(g.delta, i + j);
    case BoundPattern::Dyadic: {
      const long double env = 1 / ((1 + x / g.X) * (1 + y / g.Y));
      return static_cast<double>(env * std::pow(static_cast<long double>(g.P), i + j) /
                                 (std::pow(x, static_cast<long double>(i)) * std::pow(y, static_cast<long double>(j))));
    }
  }
  return 1;
}

// Local finite-difference step for the pattern (about 1e-3 of the variation scale).
void fd_steps(const SmoothWeight2D& g, long double x, long double y, long double frac, long double& hx,
              long double& hy) {
  hx = hy = frac;
  switch (g.certificate.pattern) {
    case BoundPattern::Box:
      hx = frac * g.A / g.P;
      hy = frac * g.B / g.P;
      break;
    case BoundPattern::Uniform:
      hx = hy = frac / g.delta;
      break;
    case BoundPattern::Dyadic:
      hx = frac * x / g.P;
      hy = frac * y / g.P;
      break;
  }
}

std::vector<long double> sample_axis(long double lo, long double hi, int n, bool logarithmic) {
  std::vector<long double> out(static_cast<std::size_t>(n));
  for (int a = 0; a < n; ++a) {
    const long double t = (a + 0.5L) / n;
    out[static_cast<std::size_t>(a)] =
        logarithmic ? lo * std::pow(hi / lo, t) : lo + (hi - lo) * t;
  }
  return out;
}

}  // namespace

const std::array<double, 3>& rho_derivative_sup() {
  static const std::array<double, 3> sup = [] {
    std::array<double, 3> s{0, 0, 0};
    const int n = 40000;
    const long double h = 1e-4L;
    for (int a = 0; a <= n; ++a) {
      const long double x = 1 + static_cast<long double>(a) / n;
      long double d[3] = {0, 0, 0};
      for (int o = 0; o < 3; ++o)
        for (int t = -2; t <= 2; ++t) d[o] += kStencil[o][t + 2] * rho(x + t * h);
      s[0] = std::max<double>(s[0], std::abs(static_cast<double>(d[0])));
      s[1] = std::max<double>(s[1], std::abs(static_cast<double>(d[1] / h)));
      s[2] = std::max<double>(s[2], std::abs(static_cast<double>(d[2] / (h * h))));
    }
    for (auto& v : s) v *= 1.05;
    return s;
  }();
  return sup;
}

SmoothWeight1D::SmoothWeight1D(Fn f, double lo, double hi, double scale, std::vector<double> constants,
                               std::string name)
    : f_(std::move(f)), lo_(lo), hi_(hi), scale_(scale), constants_(std::move(constants)), name_(std::move(name)) {
  if (!(lo < hi)) throw DomainError("SmoothWeight1D: empty support");
}

SmoothWeight1D bump_weight(double A) {
  if (!(A > 0)) throw DomainError("bump_weight: A must be positive");
  const long double a = A;
  const auto& c = rho_derivative_sup();
  std::ostringstream name;
  name << "rho(x/" << A << ")";
  SmoothWeight1D g([a](long double x) { return rho(x / a); }, A, 2 * A, 1.0 / A, {c[0], c[1], c[2]}, name.str());
  g.knots = {A * std::sqrt(2.0)};
  return g;
}

SmoothWeight2D::SmoothWeight2D(Fn f, std::array<double, 4> support, std::string name)
    : f_(std::move(f)), support_(support), name_(std::move(name)) {}

SmoothWeight2D make_box_weight(double A, double B, double P) {
  if (!(A >= 0.5 && B >= 0.5)) throw DomainError("make_box_weight: A, B must be >= 1/2");
  if (!(P >= 1)) throw DomainError("make_box_weight: P must be >= 1");
  const long double a = A, b = B, p = P;
  std::vector<SeparableTerm> terms;
  auto ra = [a](long double x) { return rho(x / a); };
  auto rb = [b](long double y) { return rho(y / b); };
  if (P == 1) {
    terms.push_back({1.0L, ra, rb});
  } else {
    terms.push_back({0.5L, ra, rb});
    terms.push_back({0.25L, [a, p](long double x) { return rho(x / a) * std::sin(kPi * p * x / a); },
                     [b, p](long double y) { return rho(y / b) * std::sin(kPi * p * y / b); }});
  }
  std::ostringstream name;
  name << "box(A=" << A << ",B=" << B << ",P=" << P << ")";
  SmoothWeight2D g(
      [terms](long double x, long double y) {
        long double s = 0;
        for (const auto& t : terms) s += t.c * t.u(x) * t.v(y);
        return s;
      },
      {A, 2 * A, B, 2 * B}, name.str());
  g.A = A;
  g.B = B;
  g.P = P;
  g.X = A;
  g.Y = B;
  g.separable = std::move(terms);
  g.knots_x = {A * std::sqrt(2.0)};
  g.knots_y = {B * std::sqrt(2.0)};
  calibrate_certificate(g, BoundPattern::Box);
  return g;
}

long double redundant_w(long double t, long double delta) {
  const long double s = delta * std::abs(t);
  if (s <= 0.5L) return 1;
  if (s >= 1) return 0;
  const long double tau = 2 * s - 1;
  const long double u = mollifier(tau), v = mollifier(1 - tau);
  return 1 - u / (u + v);
}

SmoothWeight2D attach_redundant_factor(const SmoothWeight2D& g, double h, double delta) {
  if (!(delta > 0)) throw DomainError("attach_redundant_factor: delta must be positive");
  const long double hh = h, dd = delta;
  std::ostringstream name;
  name << g.name() << "*w(x-y-" << h << ";delta=" << delta << ")";
  SmoothWeight2D F([g, hh, dd](long double x, long double y) { return g(x, y) * redundant_w(x - y - hh, dd); },
                   g.support(), name.str());
  F.A = g.A;
  F.B = g.B;
  F.P = g.P;
  F.X = g.X;
  F.Y = g.Y;
  F.delta = delta;
  F.shift_h = h;
  F.knots_x = g.knots_x;
  F.knots_y = g.knots_y;
  calibrate_certificate(F, BoundPattern::Uniform);
  return F;
}

SmoothWeight2D make_dyadic_weight(double P, double X, double Y, double extent) {
  if (!(P >= 1 && X >= 1 && Y >= 1)) throw DomainError("make_dyadic_weight: P, X, Y must be >= 1");
  const long double p = P, xs = X, ys = Y, ext = extent;
  auto u = [ext](long double t) { return eta(4 * t) * (1 - eta(t / ext)) / (1 + t); };
  std::ostringstream name;
  name << "dyadic(P=" << P << ",X=" << X << ",Y=" << Y << ")";
  const double top = std::sqrt(2.0) * extent;
  SmoothWeight2D f(
      [u, p, xs, ys](long double x, long double y) {
        const long double mod = (1 + std::sin(p * std::log(x)) * std::sin(p * std::log(y)) / 2) / 2;
        return u(x / xs) * u(y / ys) * mod;
      },
      {X / 4, top * X, Y / 4, top * Y}, name.str());
  f.P = P;
  f.X = X;
  f.Y = Y;
  f.A = X;
  f.B = Y;
  auto ux = [u, xs](long double x) { return u(x / xs); };
  auto uy = [u, ys](long double y) { return u(y / ys); };
  f.separable.push_back({0.5L, ux, uy});
  f.separable.push_back({0.25L, [ux, p](long double x) { return ux(x) * std::sin(p * std::log(x)); },
                         [uy, p](long double y) { return uy(y) * std::sin(p * std::log(y)); }});
  const double s2 = std::sqrt(2.0);
  f.knots_x = {X / 4 * s2, extent * X};
  f.knots_y = {Y / 4 * s2, extent * Y};
  calibrate_certificate(f, BoundPattern::Dyadic, 128);
  return f;
}

std::vector<DyadicPiece> dyadic_decompose(const SmoothWeight2D& f) {
  if (f.is_zero()) return {};
  const auto& s = f.support();
  std::vector<DyadicPiece> out;
  const int k_lo = static_cast<int>(std::floor(2 * std::log2(s[0] / f.X))) - 2;
  const int k_hi = static_cast<int>(std::ceil(2 * std::log2(s[1] / f.X))) + 1;
  const int l_lo = static_cast<int>(std::floor(2 * std::log2(s[2] / f.Y))) - 2;
  const int l_hi = static_cast<int>(std::ceil(2 * std::log2(s[3] / f.Y))) + 1;
  for (int k = k_lo; k <= k_hi; ++k) {
    const double Ak = std::pow(2.0, k / 2.0) * f.X;
    if (!(2 * Ak > s[0] && Ak < s[1])) continue;
    for (int l = l_lo; l <= l_hi; ++l) {
      const double Bl = std::pow(2.0, l / 2.0) * f.Y;
      if (!(2 * Bl > s[2] && Bl < s[3])) continue;
      const long double a = Ak, b = Bl;
      std::ostringstream name;
      name << f.name() << "[k=" << k << ",l=" << l << "]";
      SmoothWeight2D piece([f, a, b](long double x, long double y) { return f(x, y) * rho(x / a) * rho(y / b); },
                           {std::max(Ak, s[0]), std::min(2 * Ak, s[1]), std::max(Bl, s[2]), std::min(2 * Bl, s[3])},
                           name.str());
      piece.A = Ak;
      piece.B = Bl;
      piece.P = f.P;
      piece.X = Ak;
      piece.Y = Bl;
      out.push_back({k, l, Ak, Bl, std::move(piece)});
    }
  }
  return out;
}

long double finite_difference(const SmoothWeight2D& g, long double x, long double y, int i, int j, long double hx,
                              long double hy) {
  long double s = 0;
  for (int a = -2; a <= 2; ++a) {
    const long double ca = kStencil[i][a + 2];
    if (ca == 0) continue;
    for (int b = -2; b <= 2; ++b) {
      const long double cb = kStencil[j][b + 2];
      if (cb == 0) continue;
      s += ca * cb * g(x + a * hx, y + b * hy);
    }
  }
  return s / (std::pow(hx, static_cast<long double>(i)) * std::pow(hy, static_cast<long double>(j)));
}

void calibrate_certificate(SmoothWeight2D& g, BoundPattern pattern, int grid) {
  g.certificate.pattern = pattern;
  for (auto& row : g.certificate.C) row.fill(0.0);
  if (g.is_zero()) return;
  const auto& s = g.support();
  const bool logarithmic = pattern == BoundPattern::Dyadic;
  const auto xs = sample_axis(s[0], s[1], grid, logarithmic);
  const auto ys = sample_axis(s[2], s[3], grid, logarithmic);
  for (const long double x : xs) {
    for (const long double y : ys) {
      long double hx = 0, hy = 0;
      fd_steps(g, x, y, 1e-3L, hx, hy);
      long double vals[5][5];
      for (int a = -2; a <= 2; ++a)
        for (int b = -2; b <= 2; ++b) vals[a + 2][b + 2] = g(x + a * hx, y + b * hy);
      for (int i = 0; i <= 2; ++i) {
        for (int j = 0; j <= 2; ++j) {
          long double d = 0;
          for (int a = 0; a < 5; ++a)
            for (int b = 0; b < 5; ++b) d += kStencil[i][a] * kStencil[j][b] * vals[a][b];
          d /= std::pow(hx, static_cast<long double>(i)) * std::pow(hy, static_cast<long double>(j));
          const double ratio = static_cast<double>(std::abs(d)) / pattern_bound(g, x, y, i, j);
          g.certificate.C[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
              std::max(g.certificate.C[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)], ratio);
        }
      }
    }
  }
  // Sampling margin: the grid may straddle the true maximum.
  for (auto& row : g.certificate.C)
    for (auto& c : row) c = c * 1.5 + 1e-12;
}

CertificateCheck verify_certificate(const SmoothWeight2D& g, int n) {
  CertificateCheck out;
  if (g.is_zero()) return out;
  const auto& s = g.support();
  const bool logarithmic = g.certificate.pattern == BoundPattern::Dyadic;
  const auto xs = sample_axis(s[0], s[1], n, logarithmic);
  const auto ys = sample_axis(s[2], s[3], n, logarithmic);
  for (const long double x : xs) {
    for (const long double y : ys) {
      long double hx = 0, hy = 0;
      fd_steps(g, x, y, 2e-3L, hx, hy);
      for (int i = 0; i <= 2; ++i) {
        for (int j = 0; j <= 2; ++j) {
          const double d = static_cast<double>(std::abs(finite_difference(g, x, y, i, j, hx, hy)));
          const double bound =
              g.certificate.C[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] * pattern_bound(g, x, y, i, j);
          const double ratio = d / bound;
          if (ratio > out.worst_ratio) {
            out.worst_ratio = ratio;
            out.worst_i = i;
            out.worst_j = j;
            out.worst_x = static_cast<double>(x);
            out.worst_y = static_cast<double>(y);
          }
        }
      }
    }
  }
  out.passed = out.worst_ratio <= 1.0;
  return out;
}

CertificateCheck verify_certificate(const SmoothWeight1D& g, int n) {
  CertificateCheck out;
  if (g.is_zero()) return out;
  const long double h = 1e-3L / g.derivative_scale();
  for (int a = 0; a < n; ++a) {
    const long double x = g.lo() + (g.hi() - g.lo()) * (a + 0.5L) / n;
    for (int j = 0; j <= 2 && j < static_cast<int>(g.constants().size()); ++j) {
      long double d = 0;
      for (int t = -2; t <= 2; ++t) d += kStencil[j][t + 2] * g(x + t * h);
      d /= std::pow(h, static_cast<long double>(j));
      const double bound = g.constants()[static_cast<std::size_t>(j)] * std::pow(g.derivative_scale(), j);
      const double ratio = static_cast<double>(std::abs(d)) / bound;
      if (ratio > out.worst_ratio) {
        out.worst_ratio = ratio;
        out.worst_i = j;
        out.worst_x = static_cast<double>(x);
      }
    }
  }
  out.passed = out.worst_ratio <= 1.0;
  return out;
}

double l1_norm_mixed(const SmoothWeight2D& g, int grid) {
  if (g.is_zero()) return 0;
  const auto& s = g.support();
  const long double dx = (s[1] - s[0]) / static_cast<long double>(grid);
  const long double dy = (s[3] - s[2]) / static_cast<long double>(grid);
  long double total = 0;
  for (int a = 0; a < grid; ++a) {
    const long double x = s[0] + (a + 0.5L) * dx;
    for (int b = 0; b < grid; ++b) {
      const long double y = s[2] + (b + 0.5L) * dy;
      total += std::abs(finite_difference(g, x, y, 1, 1, dx / 8, dy / 8));
    }
  }
  return static_cast<double>(total * dx * dy);
}

}  // namespace shiftconv
