#include "shiftconv/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <tuple>
#include <limits>
#include <numbers>
#include <sstream>

#include "shiftconv/error.hpp"
#include "shiftconv/quadrature.hpp"

namespace shiftconv {
namespace {

template <typename T>
constexpr T pi_v = std::numbers::pi_v<T>;

template <typename T>
T work_eps() {
  return std::numeric_limits<T>::epsilon() / 4;
}

// Hankel's expansion: P and Q series for given 4 nu^2 (real). Returns false
// if the terms stop decreasing before reaching working precision.
template <typename T>
bool hankel_pq(T four_nu_sq, T x, T& P, T& Q) {
  P = 1;
  Q = 0;
  T term = 1, prev = std::numeric_limits<T>::infinity();
  const T eps = work_eps<T>();
  for (int k = 1; k < 400; ++k) {
    const T odd = static_cast<T>(2 * k - 1);
    term *= (four_nu_sq - odd * odd) / (static_cast<T>(k) * 8 * x);
    const T mag = std::abs(term);
    if (mag == 0) return true;
    // sign pattern: P gets (-1)^(k/2) a_k for even k, Q gets (-1)^((k-1)/2) a_k for odd k
    const T signed_term = ((k / 2) % 2 == 0) ? term : -term;
    if (k % 2 == 0)
      P += signed_term;
    else
      Q += signed_term;
    if (mag < eps) return true;
    // past the turning point of the numerator the terms must keep shrinking
    if (odd * odd > std::abs(four_nu_sq) && mag > prev) return false;
    prev = mag;
  }
  return false;
}

template <typename T>
T j_series(int n, T x) {
  // sum_j (-1)^j (x/2)^(2j+n) / (j! (j+n)!)
  const T half = x / 2;
  T term = 1;
  for (int i = 1; i <= n; ++i) term *= half / static_cast<T>(i);
  T s = term;
  const T h2 = half * half;
  for (int j = 1; j < 500; ++j) {
    term *= -h2 / (static_cast<T>(j) * static_cast<T>(j + n));
    s += term;
    if (std::abs(term) <= work_eps<T>() * std::abs(s)) break;
  }
  return s;
}

template <typename T>
T j_trapezoid(int n, T x) {
  // (1/N) sum over N equally spaced angles; the aliasing error is J_{N-n}(x).
  long N = n + static_cast<long>(std::ceil(1.3 * static_cast<double>(x))) + 60;
  N += N % 2;
  const T step = 2 * pi_v<T> / static_cast<T>(N);
  auto f = [&](T t) { return std::cos(static_cast<T>(n) * t - x * std::sin(t)); };
  T s = f(0) + f(pi_v<T>);
  for (long j = 1; j < N / 2; ++j) s += 2 * f(step * static_cast<T>(j));
  return s / static_cast<T>(N);
}

// cos(x - phase) and sin(x - phase) with the phase applied after reduction of x.
template <typename T>
void shifted_trig(T x, T phase, T& c, T& s) {
  const T cx = std::cos(x), sx = std::sin(x), cp = std::cos(phase), sp = std::sin(phase);
  c = cx * cp + sx * sp;
  s = sx * cp - cx * sp;
}

}  // namespace

std::string to_string(const KernelSpec& spec) {
  std::ostringstream o;
  switch (spec.family) {
    case KernelFamily::J: o << "J_" << spec.order; break;
    case KernelFamily::Mplus: o << "M+(mu=" << spec.mu << ")"; break;
    case KernelFamily::Mminus: o << "M-(mu=" << spec.mu << ")"; break;
  }
  return o.str();
}

template <typename T>
T bessel_j(int n, T x) {
  if (n < 0) return (n % 2 ? -1 : 1) * bessel_j<T>(-n, x);
  if (x < 0) return (n % 2 ? -1 : 1) * bessel_j<T>(n, -x);
  if (x == 0) return n == 0 ? T(1) : T(0);
  if (x <= std::max<T>(8, static_cast<T>(n))) return j_series<T>(n, x);
  if (x > 20) {
    T P, Q;
    if (hankel_pq<T>(static_cast<T>(4) * n * n, x, P, Q)) {
      T c, s;
      shifted_trig<T>(x, pi_v<T> * (static_cast<T>(n) / 2 + T(0.25)), c, s);
      return std::sqrt(2 / (pi_v<T> * x)) * (P * c - Q * s);
    }
  }
  return j_trapezoid<T>(n, x);
}

// K_nu(x) ~ sqrt(pi/2x) e^-x sum_k a_k(nu) / x^k with 4 nu^2 = -16 mu^2.
template <typename T>
bool k_asymptotic(T mu, T x, T& out) {
  const T four_nu_sq = -16 * mu * mu;
  T term = 1, sum = 1, prev = std::numeric_limits<T>::infinity();
  for (int k = 1; k < 400; ++k) {
    const T odd = static_cast<T>(2 * k - 1);
    term *= (four_nu_sq - odd * odd) / (static_cast<T>(k) * 8 * x);
    const T mag = std::abs(term);
    sum += term;
    if (mag < work_eps<T>() * std::abs(sum)) {
      out = std::sqrt(pi_v<T> / (2 * x)) * std::exp(-x) * sum;
      return true;
    }
    if (odd * odd > std::abs(four_nu_sq) && mag > prev) return false;
    prev = mag;
  }
  return false;
}

template <typename T>
T bessel_k_imag(T mu, T x) {
  if (!(x > 0)) throw DomainError("K_{2i mu}(x) requires x > 0");
  mu = std::abs(mu);
  if (x > 20) {
    T v;
    if (k_asymptotic<T>(mu, x, v)) return v;
  }
  // exp(-x (cosh t - 1)) cos(2 mu t), trapezoid on the even integrand
  const T cut = -std::log(work_eps<T>()) + 6;
  const T t_max = std::acosh(1 + cut / x);
  const T h = std::min<T>(pi_v<T> * pi_v<T> / (cut + 2 * pi_v<T> * mu + 4), T(0.6) / std::sqrt(x));
  auto f = [&](T t) { return std::exp(-x * (std::cosh(t) - 1)) * std::cos(2 * mu * t); };
  return even_trapezoid<T>(f, h, t_max) * std::exp(-x);
}

template <typename T>
T kernel_mplus(T mu, T x) {
  return 4 * std::cosh(pi_v<T> * mu) * bessel_k_imag<T>(mu, x);
}

template <typename T>
T kernel_mminus(T mu, T x) {
  if (!(x > 0)) throw DomainError("M-(x) requires x > 0");
  mu = std::abs(mu);
  if (x > 20) {
    T P, Q;
    if (hankel_pq<T>(-16 * mu * mu, x, P, Q)) {
      T c, s;
      shifted_trig<T>(x, pi_v<T> / 4, c, s);
      return -2 * pi_v<T> * std::sqrt(2 / (pi_v<T> * x)) * (P * s + Q * c);
    }
  }
  // int_0^pi sin(x sin t) cosh(2 mu t) dt, composite Gauss on panels narrower
  // than a few oscillations
  const long panels = static_cast<long>(std::ceil(static_cast<double>(x) / 3)) + 4;
  const T a = gauss_composite<T>([&](T t) { return std::sin(x * std::sin(t)) * std::cosh(2 * mu * t); }, T(0),
                                 pi_v<T>, panels, 24);
  // int_0^inf cos(2 mu t) exp(-x sinh t) dt on [0, asinh(cut/x)]
  const T cut = -std::log(work_eps<T>()) + 6;
  const T t_max = std::asinh(cut / x);
  // absolute floor: the panel error estimates bottom out near eps per panel
  const double tol = static_cast<double>(work_eps<T>()) * 64;
  const double abs_tol = std::max(tol, 1e-17);
  const auto b = adaptive_gauss<T>([&](T t) { return std::cos(2 * mu * t) * std::exp(-x * std::sinh(t)); }, T(0),
                                   t_max, abs_tol, tol, 20, static_cast<long>(std::ceil(mu * t_max)) + 4);
  return -2 / std::cosh(pi_v<T> * mu) * a + 4 * std::cosh(pi_v<T> * mu) * b.value;
}

template double bessel_j<double>(int, double);
template long double bessel_j<long double>(int, long double);
template double bessel_k_imag<double>(double, double);
template long double bessel_k_imag<long double>(long double, long double);
template double kernel_mplus<double>(double, double);
template long double kernel_mplus<long double>(long double, long double);
template double kernel_mminus<double>(double, double);
template long double kernel_mminus<long double>(long double, long double);

long double eval_kernel_ld(const KernelSpec& spec, long double x) {
  if (!(x > 0)) throw DomainError("eval_kernel: x must be positive, got " + std::to_string(static_cast<double>(x)));
  switch (spec.family) {
    case KernelFamily::J: return bessel_j<long double>(spec.order, x);
    case KernelFamily::Mplus: return kernel_mplus<long double>(spec.mu, x);
    case KernelFamily::Mminus: return kernel_mminus<long double>(spec.mu, x);
  }
  return 0;
}

double eval_kernel(const KernelSpec& spec, double x) {
  if (!(x > 0)) throw DomainError("eval_kernel: x must be positive, got " + std::to_string(x));
  switch (spec.family) {
    case KernelFamily::J: return bessel_j<double>(spec.order, x);
    case KernelFamily::Mplus: return kernel_mplus<double>(spec.mu, x);
    case KernelFamily::Mminus: return kernel_mminus<double>(spec.mu, x);
  }
  return 0;
}

namespace {

// Where the direct route at x is cheap: Hankel (J, M-) or K asymptotics (M+).
bool direct_is_fast(const KernelSpec& spec, long double x) {
  long double P, Q, v;
  switch (spec.family) {
    case KernelFamily::J: return hankel_pq<long double>(4.0L * spec.order * spec.order, x, P, Q);
    case KernelFamily::Mminus: return hankel_pq<long double>(-16.0L * spec.mu * spec.mu, x, P, Q);
    case KernelFamily::Mplus: return k_asymptotic<long double>(std::abs(spec.mu), x, v);
  }
  return false;
}

long double cheb_eval(const long double* c, long double t) {
  // Clenshaw on t in [-1, 1]
  long double b1 = 0, b2 = 0;
  for (int k = KernelTable::kDegree; k >= 1; --k) {
    const long double b0 = 2 * t * b1 - b2 + c[k];
    b2 = b1;
    b1 = b0;
  }
  return t * b1 - b2 + c[0];
}

}  // namespace

KernelTable::KernelTable(const KernelSpec& spec) : spec_(spec) {
  // the direct route is fast past 20 when the asymptotic series converges there;
  // for large mu that happens later, so the table reaches further
  long double x = 24;
  while (x < 4096 && !direct_is_fast(spec, x)) x += 8;
  x_hi_ = static_cast<double>(x);
  count_ = kDyadicPieces + static_cast<std::size_t>(x_hi_) - 1;
  pieces_ = std::make_unique<Piece[]>(count_);
  once_ = std::make_unique<std::once_flag[]>(count_);
}

double KernelTable::worst_check() const {
  std::lock_guard lock(check_mutex_);
  return worst_check_;
}

void KernelTable::build(Piece& p, long double lo, long double hi) const {
  constexpr int n = kDegree + 1;
  // For mu > 0 the Schlaefli route for M- cancels terms of size ~cosh(pi mu), so
  // the direct values themselves carry that much noise.
  long double check_tol = 1e-15L;
  if (spec_.family == KernelFamily::Mminus)
    check_tol = std::max(check_tol, 1024 * std::numeric_limits<long double>::epsilon() * std::cosh(pi_v<long double> * spec_.mu));
  p.lo = lo;
  p.hi = hi;
  for (int splits = 1; splits <= 16; splits *= 2) {
    std::vector<long double> coef(static_cast<std::size_t>(splits * n));
    long double scale = 0, err = 0;
    const long double w = (hi - lo) / splits;
    for (int s = 0; s < splits; ++s) {
      const long double a = lo + w * s, b = a + w;
      long double f[n];
      for (int j = 0; j < n; ++j) {
        const long double t = std::cos(pi_v<long double> * (j + 0.5L) / n);
        f[j] = eval_kernel_ld(spec_, (a + b) / 2 + (b - a) / 2 * t);
        scale = std::max(scale, std::abs(f[j]));
      }
      long double* c = coef.data() + s * n;
      for (int k = 0; k < n; ++k) {
        long double acc = 0;
        for (int j = 0; j < n; ++j) acc += f[j] * std::cos(pi_v<long double> * k * (j + 0.5L) / n);
        c[k] = acc * (k == 0 ? 1.0L : 2.0L) / n;
      }
      for (const long double t : {-0.97L, -0.41L, 0.13L, 0.77L}) {
        const long double x = (a + b) / 2 + (b - a) / 2 * t;
        err = std::max(err, std::abs(cheb_eval(c, t) - eval_kernel_ld(spec_, x)));
      }
    }
    // scale floor keeps exponentially small M+ pieces from demanding relative accuracy
    // below what the direct route itself delivers
    const long double rel = err / std::max(scale, 1e-300L);
    if (rel < check_tol || err < 1e-19L) {
      p.splits = splits;
      p.coef = std::move(coef);
      std::lock_guard lock(check_mutex_);
      worst_check_ = std::max(worst_check_, static_cast<double>(rel));
      return;
    }
  }
  p.splits = 0;
}

const KernelTable::Piece& KernelTable::piece(std::size_t i) const {
  Piece& p = pieces_[i];
  std::call_once(once_[i], [&] {
    long double lo, hi;
    if (i < kDyadicPieces) {
      hi = std::ldexp(1.0L, -static_cast<int>(i));
      lo = hi / 2;
    } else {
      lo = static_cast<long double>(i - kDyadicPieces + 1);
      hi = lo + 1;
    }
    build(p, lo, hi);
  });
  return p;
}

long double KernelTable::operator()(long double x) const {
  if (!(x > 0)) throw DomainError("KernelTable: x must be positive, got " + std::to_string(static_cast<double>(x)));
  std::size_t i;
  if (x >= x_hi_ || x < std::ldexp(1.0L, -kDyadicPieces)) return eval_kernel_ld(spec_, x);
  if (x >= 1) {
    i = kDyadicPieces + static_cast<std::size_t>(x) - 1;
  } else {
    int e;
    std::frexp(x, &e);  // x in [2^(e-1), 2^e)
    i = static_cast<std::size_t>(-e);
  }
  const Piece& p = piece(i);
  if (p.splits == 0) return eval_kernel_ld(spec_, x);
  const long double w = (p.hi - p.lo) / p.splits;
  int s = static_cast<int>((x - p.lo) / w);
  s = std::clamp(s, 0, p.splits - 1);
  const long double a = p.lo + w * s;
  return cheb_eval(p.coef.data() + s * (kDegree + 1), (2 * (x - a) - w) / w);
}

const KernelTable& kernel_table(const KernelSpec& spec) {
  static std::mutex m;
  static std::map<std::tuple<int, int, double>, std::unique_ptr<KernelTable>> tables;
  std::lock_guard lock(m);
  auto& slot = tables[{static_cast<int>(spec.family), spec.order, std::abs(spec.mu)}];
  if (!slot) slot = std::make_unique<KernelTable>(spec);
  return *slot;
}

DecayReport kernel_decay_check(const KernelSpec& spec, const std::vector<double>& x_grid, double constant) {
  DecayReport r;
  r.constant = constant;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    const double x = x_grid[i];
    if (!(x > 0) || (i > 0 && x <= x_grid[i - 1])) throw DomainError("kernel_decay_check: grid must be positive and increasing");
    const double v = eval_kernel(spec, x);
    const double scaled = std::abs(v) * std::sqrt(x);
    r.scaled.push_back(scaled);
    if (scaled > r.sup_scaled) {
      r.sup_scaled = scaled;
      r.argmax = x;
    }
    if (std::abs(v) > prev) r.monotone_decreasing = false;
    prev = std::abs(v);
    if (x >= 1 && scaled > constant) r.bounded = false;
  }
  return r;
}

}  // namespace shiftconv
