#include "shiftconv/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace shiftconv {
namespace {

GaussRule compute_rule(int n) {
  GaussRule r;
  r.nodes.resize(static_cast<std::size_t>(n));
  r.weights.resize(static_cast<std::size_t>(n));
  const long double pi = std::numbers::pi_v<long double>;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    long double x = std::cos(pi * (i + 0.75L) / (n + 0.5L));
    long double dp = 0;
    for (int it = 0; it < 100; ++it) {
      long double p0 = 1, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1);
      const long double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-21L) break;
    }
    // recompute derivative at the converged node for the weight
    long double p0 = 1, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const long double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1);
    const long double w = 2 / ((1 - x * x) * dp * dp);
    r.nodes[static_cast<std::size_t>(i)] = -x;
    r.nodes[static_cast<std::size_t>(n - 1 - i)] = x;
    r.weights[static_cast<std::size_t>(i)] = w;
    r.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) r.nodes[static_cast<std::size_t>(n / 2)] = 0;
  return r;
}

}  // namespace

const GaussRule& gauss_legendre(int n) {
  if (n < 1 || n > 1000) throw DomainError("gauss_legendre: n must be in [1, 1000]");
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<GaussRule>(compute_rule(n));
  return *slot;
}

}  // namespace shiftconv
