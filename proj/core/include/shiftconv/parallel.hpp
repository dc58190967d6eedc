#pragma once

// One process-wide worker pool plus helpers whose results do not depend on the
// number of threads: work is cut into blocks of a fixed size, each block is
// reduced serially, and block partials are combined by a fixed pairwise tree.

#include <complex>
#include <cstddef>
#include <functional>
#include <type_traits>
#include <vector>

namespace shiftconv {

/// Number of worker threads used by parallel_for (>= 1).
unsigned thread_count();

/// Set the worker count; 0 selects SHIFTCONV_THREADS or hardware concurrency.
void set_thread_count(unsigned n);

/// Runs body(i) for i in [0, n). Blocks until every index is done and
/// rethrows the first exception raised by any body.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// Neumaier-compensated accumulator; works for real and complex T.
template <typename T>
class CompensatedSum {
 public:
  void add(const T& x) {
    if constexpr (std::is_floating_point_v<T>) {
      add_real(sum_, comp_, x);
    } else {
      auto re = sum_.real(), ci = comp_.real();
      auto im = sum_.imag(), cj = comp_.imag();
      add_real(re, ci, x.real());
      add_real(im, cj, x.imag());
      sum_ = T(re, im);
      comp_ = T(ci, cj);
    }
  }
  T value() const { return sum_ + comp_; }

 private:
  template <typename R>
  static void add_real(R& sum, R& comp, R x) {
    const R t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }

  T sum_{};
  T comp_{};
};

/// Pairwise (tree) reduction in index order; shape depends only on v.size().
template <typename T>
T pairwise_sum(std::vector<T> v) {
  if (v.empty()) return T{};
  while (v.size() > 1) {
    std::vector<T> next((v.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < v.size(); i += 2) next[i / 2] = v[i] + v[i + 1];
    if (v.size() % 2) next.back() = v.back();
    v.swap(next);
  }
  return v.front();
}

inline constexpr std::size_t kReductionBlock = 512;

/// Sum of term(i) for i in [0, n), bit-identical for every thread count.
template <typename T, typename F>
T deterministic_sum(std::size_t n, F&& term, std::size_t block = kReductionBlock) {
  if (n == 0) return T{};
  const std::size_t blocks = (n + block - 1) / block;
  std::vector<T> partial(blocks);
  parallel_for(blocks, [&](std::size_t b) {
    CompensatedSum<T> acc;
    const std::size_t hi = std::min(n, (b + 1) * block);
    for (std::size_t i = b * block; i < hi; ++i) acc.add(term(i));
    partial[b] = acc.value();
  });
  return pairwise_sum(std::move(partial));
}

}  // namespace shiftconv
