#pragma once

// Gauss-Legendre rules (cached, computed in long double), a globally adaptive
// Gauss-Legendre integrator, and trapezoid-type rules for smooth half-line
// integrands.

#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <vector>

#include "shiftconv/error.hpp"

namespace shiftconv {

struct GaussRule {
  std::vector<long double> nodes;    // on [-1, 1], ascending
  std::vector<long double> weights;
};

/// n-point Gauss-Legendre rule; cached and safe to call concurrently.
const GaussRule& gauss_legendre(int n);

/// Fixed n-point rule on [a, b].
template <typename T, typename F>
auto gauss_fixed(F&& f, T a, T b, int n) -> decltype(f(a)) {
  const auto& r = gauss_legendre(n);
  const T half = (b - a) / 2, mid = (a + b) / 2;
  decltype(f(a)) s{};
  for (std::size_t i = 0; i < r.nodes.size(); ++i)
    s += static_cast<T>(r.weights[i]) * f(mid + half * static_cast<T>(r.nodes[i]));
  return s * half;
}

/// Composite rule: `panels` equal panels with n points each.
template <typename T, typename F>
auto gauss_composite(F&& f, T a, T b, long panels, int n) -> decltype(f(a)) {
  decltype(f(a)) s{};
  const T h = (b - a) / static_cast<T>(panels);
  for (long p = 0; p < panels; ++p) s += gauss_fixed<T>(f, a + h * static_cast<T>(p), a + h * static_cast<T>(p + 1), n);
  return s;
}

template <typename R>
struct QuadResult {
  R value{};
  double error = 0;
  long evaluations = 0;
};

/// Globally adaptive Gauss-Legendre: the panel with the largest error
/// estimate (n-point vs two half-panels) is split until the total estimate
/// is below max(abs_tol, rel_tol * |value|). Throws ToleranceError when
/// max_panels is exhausted.
template <typename T, typename F>
auto adaptive_gauss(F&& f, T a, T b, double abs_tol, double rel_tol, int n = 20, long initial_panels = 1,
                    long max_panels = 200000) -> QuadResult<decltype(f(a))> {
  using R = decltype(f(a));
  struct Panel {
    T lo, hi;
    R value;
    double err;
    bool operator<(const Panel& o) const { return err < o.err; }
  };
  QuadResult<R> out;
  auto eval = [&](T lo, T hi) {
    const T mid = (lo + hi) / 2;
    const R whole = gauss_fixed<T>(f, lo, hi, n);
    const R left = gauss_fixed<T>(f, lo, mid, n);
    const R right = gauss_fixed<T>(f, mid, hi, n);
    out.evaluations += 3L * n;
    return Panel{lo, hi, left + right, static_cast<double>(std::abs(whole - (left + right)))};
  };
  std::priority_queue<Panel> heap;
  R total{};
  double err = 0;
  const T h = (b - a) / static_cast<T>(initial_panels);
  for (long p = 0; p < initial_panels; ++p) {
    auto pn = eval(a + h * static_cast<T>(p), p + 1 == initial_panels ? b : a + h * static_cast<T>(p + 1));
    total += pn.value;
    err += pn.err;
    heap.push(pn);
  }
  long panels = initial_panels;
  while (err > std::max(abs_tol, rel_tol * static_cast<double>(std::abs(total)))) {
    if (panels >= max_panels) throw ToleranceError("adaptive Gauss-Legendre did not converge", err);
    const Panel worst = heap.top();
    heap.pop();
    const T mid = (worst.lo + worst.hi) / 2;
    auto l = eval(worst.lo, mid), r = eval(mid, worst.hi);
    total += (l.value + r.value) - worst.value;
    err += l.err + r.err - worst.err;
    heap.push(l);
    heap.push(r);
    ++panels;
    // resum occasionally to shed drift from the running updates
    if (panels % 1024 == 0) {
      auto copy = heap;
      total = R{};
      err = 0;
      while (!copy.empty()) {
        total += copy.top().value;
        err += copy.top().err;
        copy.pop();
      }
    }
  }
  out.value = total;
  out.error = err;
  return out;
}

/// Trapezoid rule for an even integrand on the whole line, returned as the
/// half-line integral: h (f(0)/2 + sum_{k>=1} f(kh)), summed until k h > t_max.
template <typename T, typename F>
T even_trapezoid(F&& f, T h, T t_max) {
  T s = f(T(0)) / 2;
  for (long k = 1;; ++k) {
    const T t = h * static_cast<T>(k);
    if (t > t_max) break;
    s += f(t);
  }
  return s * h;
}

/// Tanh-sinh rule on [a, b] with step halving until successive levels agree
/// to rel_tol. Endpoint singularities of integrable type are allowed.
template <typename T, typename F>
T tanh_sinh(F&& f, T a, T b, double rel_tol, int max_level = 12) {
  const T half = (b - a) / 2;
  const T pi2 = std::acos(T(-1)) / 2;
  const T t_max = T(4);
  auto level_sum = [&](T h, long start, long stride) {
    T s = 0;
    for (long k = start;; k += stride) {
      const T t = h * static_cast<T>(k);
      if (t > t_max) break;
      const T u = pi2 * std::sinh(t);
      const T c = std::cosh(u);
      const T w = pi2 * std::cosh(t) / (c * c);
      if (w < std::numeric_limits<T>::min()) break;
      // distance to each endpoint computed without cancellation
      const T dist = half / (std::exp(u) * c);
      T v = f(b - dist);
      if (k != 0) v += f(a + dist);
      s += w * v;
    }
    return s;
  };
  T h = T(0.5);
  T sum = level_sum(h, 0, 1);
  T prev = sum * h * half;
  for (int level = 1; level <= max_level; ++level) {
    h /= 2;
    sum += level_sum(h, 1, 2);
    const T cur = sum * h * half;
    if (std::abs(cur - prev) <= static_cast<T>(rel_tol) * std::abs(cur) && level >= 3) return cur;
    prev = cur;
  }
  throw ToleranceError("tanh-sinh did not converge", static_cast<double>(std::abs(prev)));
}

}  // namespace shiftconv
