// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.
// Usage: shiftconv_acceptance [criterion numbers...]   (default: all twelve)

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/multiprecision/cpp_int.hpp>
#include <chrono>
#include <cstdarg>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <numbers>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "shiftconv/bessel.hpp"
#include "shiftconv/characters.hpp"
#include "shiftconv/coeffs.hpp"
#include "shiftconv/error.hpp"
#include "shiftconv/expsums.hpp"
#include "shiftconv/jutila.hpp"
#include "shiftconv/lfun.hpp"
#include "shiftconv/shifted.hpp"
#include "shiftconv/voronoi.hpp"
#include "shiftconv/weights.hpp"

using namespace shiftconv;
using boost::multiprecision::cpp_int;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// every weight handed to criteria 1-10, re-certified in criterion 11
std::vector<SmoothWeight1D> used_1d;
std::vector<SmoothWeight2D> used_2d;

SmoothWeight1D use(SmoothWeight1D g) {
  used_1d.push_back(g);
  return g;
}
SmoothWeight2D use(SmoothWeight2D g) {
  used_2d.push_back(g);
  return g;
}

const CoefficientSource& delta_table(i64 m_max) {
  static CoefficientSource src;
  if (src.m_max() < m_max) src = delta_coefficients(m_max);
  return src;
}

// ---------------------------------------------------------------------------

Outcome voronoi_holomorphic() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<i64> qs{1, 2, 3, 5, 7};
  const std::vector<double> As{100, 1000, 10000};
  std::vector<SmoothWeight1D> gs;
  for (double A : As) gs.push_back(use(bump_weight(A)));
  i64 len = 1 << 16;
  for (;;) {
    try {
      const CoefficientSource& src = delta_table(len);
      double worst = 0;
      std::string at;
      std::size_t checks = 0;
      i64 cut = 0;
      for (i64 q : qs) {
        std::vector<i64> ds;
        for (i64 d = 1; d <= q; ++d)
          if (std::gcd(d, q) == 1) ds.push_back(d);
        for (std::size_t i = 0; i < gs.size(); ++i)
          for (const auto& r : voronoi_residuals(src, q, ds, gs[i])) {
            ++checks;
            cut = std::max(cut, r.m_cut);
            if (!(r.residual <= worst)) {
              worst = r.residual;
              at = fmt("q=%lld d=%lld A=%g", static_cast<long long>(q), static_cast<long long>(r.d), As[i]);
            }
          }
      }
      const double secs = seconds_since(t0);
      return {worst < 1e-6 && secs < 300,
              fmt("max residual %.2e (%s) over %zu checks, largest m_cut %lld; %.1f s (limits 1e-6, 300 s)", worst,
                  at.c_str(), checks, static_cast<long long>(cut), secs)};
    } catch (const CoefficientShortfall& e) {
      len = std::max<i64>(2 * len, e.required());
    }
  }
}

double pm_oracle(const SmoothWeight1D& g, i64 q, int sign, double y) {
  auto f = [&](double x) {
    const double z = 4 * std::numbers::pi * std::sqrt(x * y) / static_cast<double>(q);
    const double k = sign > 0 ? 4 * boost::math::cyl_bessel_k(0, z) : -2 * std::numbers::pi * boost::math::cyl_neumann(0, z);
    return static_cast<double>(g(x)) * k;
  };
  double err = 0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, g.lo(), g.hi(), 12, 1e-12, &err) /
         static_cast<double>(q);
}

Outcome voronoi_maass_path() {
  // kernels against Boost's K_0 and Y_0
  double worst_kernel = 0;
  for (int i = 0; i <= 1000; ++i) {
    const double x = 0.1 + (50 - 0.1) * i / 1000.0;
    worst_kernel = std::max(worst_kernel, std::abs(eval_kernel(KernelSpec::Mplus(0), x) - 4 * boost::math::cyl_bessel_k(0, x)));
    worst_kernel = std::max(worst_kernel, std::abs(eval_kernel(KernelSpec::Mminus(0), x) +
                                                   2 * std::numbers::pi * boost::math::cyl_neumann(0, x)));
  }
  // the transforms g^+- against the same transforms built on the Boost kernels;
  // y is chosen so the kernel argument 4 pi sqrt(x y) / q covers [0.1, 50]
  double worst_transform = 0;
  for (double A : {1.0, 10.0}) {
    const auto g = use(bump_weight(A));
    for (i64 q : {1, 3, 7}) {
      const auto gp = transform_g_pm(g, q, 0, 1), gm = transform_g_pm(g, q, 0, -1);
      for (double z : {0.1, 0.5, 2.0, 8.0, 20.0, 50.0}) {
        const double y = std::pow(z * static_cast<double>(q) / (4 * std::numbers::pi), 2) / A;
        worst_transform = std::max(worst_transform, std::abs(gp(y) - pm_oracle(g, q, 1, y)));
        worst_transform = std::max(worst_transform, std::abs(gm(y) - pm_oracle(g, q, -1, y)));
      }
    }
  }
  // the dual-representation check itself on the mu = 0 divisor analog
  const auto div = divisor_analog(200000);
  double worst_div = 0;
  const auto gdiv = use(bump_weight(1000));
  for (i64 q : {1, 3})
    for (const auto& r : voronoi_residuals(div, q, q == 1 ? std::vector<i64>{1} : std::vector<i64>{1, 2}, gdiv))
      worst_div = std::max(worst_div, r.residual);

  bool pass = worst_kernel < 1e-8 && worst_transform < 1e-8 && worst_div < 1e-8;
  std::string detail = fmt("mu=0 kernels %.1e, transforms %.1e, divisor-analog residual %.1e (limit 1e-8)", worst_kernel,
                           worst_transform, worst_div);
  if (const char* path = std::getenv("SHIFTCONV_MAASS_FILE"); path && *path) {
    try {
      const auto src = load_coefficients(std::string(path));
      double worst = 0;
      const i64 q = src.level;
      std::vector<i64> ds;
      for (i64 d = 1; d <= q; ++d)
        if (std::gcd(d, q) == 1) ds.push_back(d);
      for (double A : {100.0, 1000.0})
        for (const auto& r : voronoi_residuals(src, q, ds, use(bump_weight(A)))) worst = std::max(worst, r.residual);
      pass = pass && worst < 1e-4;
      detail += fmt("; supplied file residual %.2e (limit 1e-4)", worst);
    } catch (const Error& e) {
      pass = false;
      detail += std::string("; supplied file: ") + e.what();
    }
  } else {
    detail += "; no certified Maass file supplied (SHIFTCONV_MAASS_FILE), file part not applicable";
  }
  return {pass, detail};
}

Outcome jutila_l2_grid() {
  struct Row {
    double Q, delta;
    bool filtered;
    L2Report r;
  };
  auto run_grid = [] {
    std::vector<Row> rows;
    for (double Q : {10.0, 30.0, 100.0, 300.0, 1000.0})
      for (double e : {-2.0, -1.5, -1.0}) {
        const double delta = std::pow(Q, e);
        rows.push_back({Q, delta, false, l2_error(build_full_scheme(Q, delta))});
        rows.push_back({Q, delta, true, l2_error(build_scheme(Q, delta, 1, 2, 3, 1))});
      }
    return rows;
  };
  const auto a = run_grid(), b = run_grid();
  double worst = 0;
  std::string at;
  bool mass = true, stable = a.size() == b.size();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].r.ratio > worst || !(a[i].r.ratio == a[i].r.ratio)) {
      worst = a[i].r.ratio;
      at = fmt("Q=%g delta=%.3g %s", a[i].Q, a[i].delta, a[i].filtered ? "filtered" : "full");
    }
    mass = mass && a[i].r.mass_exact;
    stable = stable && std::memcmp(&a[i].r.l2, &b[i].r.l2, sizeof(double)) == 0 && a[i].r.breakpoints == b[i].r.breakpoints;
  }
  return {worst <= 10 && mass && stable,
          fmt("%zu schemes, max l2/(delta^-1 L^-2 Q^2.1) = %.3f at %s (limit 10); mass exact: %s; bitwise stable: %s",
              a.size(), worst, at.c_str(), mass ? "yes" : "no", stable ? "yes" : "no")};
}

std::complex<double> lattice_brute_force(const ShiftedSumSpec& s) {
  std::complex<long double> acc = 0;
  const auto& sp = s.f.support();
  for (i64 m = 1; s.a * m <= sp[1]; ++m)
    for (i64 n = 1; s.b * n <= sp[3]; ++n)
      if (s.a * m + s.sign * s.b * n == s.h)
        acc += std::complex<long double>(s.phi(m) * s.psi(n)) *
               s.f(static_cast<long double>(s.a * m), static_cast<long double>(s.b * n));
  return {static_cast<double>(acc.real()), static_cast<double>(acc.imag())};
}

Outcome circle_exactness() {
  const auto delta = delta_coefficients(4096);
  const auto div = divisor_analog(4096);
  struct Inst {
    i64 a, b;
    double A;
    bool holo;
  };
  const std::vector<Inst> insts{{1, 1, 32, true},    {2, 3, 48, false},   {1, 1, 1000, true},
                                {2, 3, 1000, false}, {1, 1, 1000, false}, {2, 3, 1000, true}};
  double worst = 0, worst_bf = 0;
  std::string detail;
  for (const auto& in : insts) {
    ShiftedSumSpec s;
    s.a = in.a;
    s.b = in.b;
    s.h = 1;
    s.phi = s.psi = in.holo ? delta : div;
    s.f = use(make_box_weight(in.A, in.A, 1));
    const auto direct = shifted_sum_direct(s);
    const auto exact = d_exact_by_integral(s);
    const auto bf = lattice_brute_force(s);
    worst = std::max(worst, std::abs(exact - direct));
    worst_bf = std::max(worst_bf, std::abs(direct - bf));
    detail += fmt("%s(%lld,%lld,A=%g) D=%.6g; ", in.holo ? "delta" : "divisor", static_cast<long long>(in.a),
                  static_cast<long long>(in.b), in.A, direct.real());
  }
  return {worst < 1e-8 && worst_bf < 1e-8,
          detail + fmt("max |integral - lattice| %.1e, max |lattice - brute force| %.1e (limit 1e-8)", worst, worst_bf)};
}

Outcome weil_scan() {
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const auto r = scan_weil(300, default_weil_grid(), 1e-9);
    const double secs = seconds_since(t0);
    return {r.passed && r.worst.ratio <= 1 + 1e-9 && secs < 120,
            fmt("%lld sums, max ratio %.12f at q=%lld chi=%s (m,n)=(%lld,%lld); %.1f s (limits 1+1e-9, 120 s)",
                r.evaluations, r.worst.ratio, static_cast<long long>(r.worst.q), r.worst.character_label.c_str(),
                static_cast<long long>(r.worst.m), static_cast<long long>(r.worst.n), secs)};
  } catch (const ToleranceError& e) {
    return {false, e.what()};
  }
}

Outcome gauss_sums() {
  double worst = 0, worst_oracle = 0;
  std::size_t count = 0;
  for (i64 q = 1; q <= 300; ++q)
    for (const auto& chi : CharacterGroup(q).primitive()) {
      const auto g = gauss_sum(chi);
      std::complex<long double> direct = 0;
      for (i64 n = 0; n < q; ++n)
        direct += std::complex<long double>(chi(n)) *
                  std::polar(1.0L, 2 * std::numbers::pi_v<long double> * static_cast<long double>(n) / static_cast<long double>(q));
      worst = std::max(worst, std::abs(std::abs(g) - std::sqrt(static_cast<double>(q))));
      worst_oracle = std::max(worst_oracle, std::abs(g - std::complex<double>(direct)));
      ++count;
    }
  return {worst < 1e-9 && worst_oracle < 1e-9,
          fmt("%zu primitive characters, max ||g| - sqrt q| %.1e, max |g - direct sum| %.1e (limit 1e-9)", count, worst,
              worst_oracle)};
}

cpp_int big(i128 v) {
  const bool neg = v < 0;
  unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
  cpp_int r = static_cast<std::uint64_t>(u >> 64);
  r <<= 64;
  r += static_cast<std::uint64_t>(u);
  return neg ? cpp_int(-r) : r;
}

Outcome tau_hecke() {
  const auto t0 = std::chrono::steady_clock::now();
  const i64 M = 47LL * 47 * 47 * 47;
  const auto tau = ramanujan_tau(M, TauMethod::Squaring);
  std::vector<i64> primes;
  for (i64 p = 2; p <= 50; ++p)
    if (is_prime(p)) primes.push_back(p);
  long checks = 0, bad = 0;
  // recursion tau(p^(j+1)) = tau(p) tau(p^j) - p^11 tau(p^(j-1)) up to p^4
  for (i64 p : primes) {
    const cpp_int p11 = boost::multiprecision::pow(cpp_int(p), 11);
    i64 pj = p, prev = 1;
    for (int j = 1; j <= 3; ++j, prev = pj, pj *= p) {
      ++checks;
      bad += big(tau[pj * p]) != big(tau[p]) * big(tau[pj]) - p11 * big(tau[prev]);
    }
  }
  // multiplicativity over prime powers p^i r^j (i, j <= 4) inside the table, and coprime m, n <= 300
  for (std::size_t x = 0; x < primes.size(); ++x)
    for (std::size_t y = x + 1; y < primes.size(); ++y) {
      i64 pi = 1;
      for (int i = 1; i <= 4; ++i) {
        pi *= primes[x];
        i64 rj = 1;
        for (int j = 1; j <= 4; ++j) {
          rj *= primes[y];
          if (static_cast<i128>(pi) * rj > M) break;
          ++checks;
          bad += big(tau[pi * rj]) != big(tau[pi]) * big(tau[rj]);
        }
      }
    }
  for (i64 m = 2; m <= 300; ++m)
    for (i64 n = m + 1; n <= 300; ++n)
      if (std::gcd(m, n) == 1) {
        ++checks;
        bad += big(tau[m * n]) != big(tau[m]) * big(tau[n]);
      }
  // x prod (1 - x^n)^24 by repeated multiplication by (1 - x^n), mod two primes
  const i64 K = 10000;
  const auto eta = ramanujan_tau(K, TauMethod::Sparse);
  long series_bad = 0;
  for (std::uint64_t P : {1000000007ULL, 998244353ULL}) {
    std::vector<std::uint64_t> s(K, 0);
    s[0] = 1;
    for (i64 n = 1; n < K; ++n)
      for (int r = 0; r < 24; ++r)
        for (i64 j = K - 1; j >= n; --j) s[j] = (s[j] + P - s[j - n]) % P;
    for (i64 m = 1; m <= K; ++m) {
      const i128 want = ((eta[m] % static_cast<i128>(P)) + P) % P;
      const i128 want2 = ((tau[m] % static_cast<i128>(P)) + P) % P;
      series_bad += static_cast<i128>(s[m - 1]) != want || want2 != want;
    }
  }
  return {bad == 0 && series_bad == 0,
          fmt("table to 47^4 = %lld; %ld exact Hecke checks, %ld mismatches; eta product vs series multiplication "
              "mod two primes at all m <= %lld: %ld mismatches; %.1f s",
              static_cast<long long>(M), checks, bad, static_cast<long long>(K), series_bad, seconds_since(t0))};
}

Outcome rankin_selberg() {
  const auto& src = delta_table(100000);
  double lo = 1e300, hi = 0;
  for (int i = 0; i <= 40; ++i) {
    const double x = std::pow(10.0, 3 + 2.0 * i / 40);
    const double r = rankin_selberg_ratio(src, x);
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  const double r3 = rankin_selberg_ratio(src, 1e3), r5 = rankin_selberg_ratio(src, 1e5);
  // regression baselines from the first certified run
  const double base3 = 0.38209848670975405, base5 = 0.3840294897984346;
  const bool baseline_ok = std::abs(r3 - base3) <= 1e-12 * base3 && std::abs(r5 - base5) <= 1e-12 * base5;
  return {hi / lo < 2 && baseline_ok,
          fmt("ratio in [%.6f, %.6f] over [1e3, 1e5], spread %.4f (limit 2); endpoints %.17g, %.17g (baselines %s)", lo, hi,
              hi / lo, r3, r5, baseline_ok ? "match" : "DIFFER")};
}

Outcome amplifier_grid() {
  const auto& src = delta_table(1 << 12);
  double worst_route = 0, worst_excess = -1e300, worst_parseval = 0;
  bool positivity = true;
  int n = 0;
  for (i64 q : {11, 13, 17}) {
    const auto chi = CharacterGroup(q).primitive().front();
    for (int L : {2, 3, 5})
      for (double M : {8.0, 16.0}) {
        const auto spec = make_amplifier_spec(src, chi, L, M);
        use(spec.k_weight);
        const auto mom = amplifier_moment(spec);
        const auto off = amplifier_offdiagonal(spec);
        const auto pc = parseval_check(spec);
        worst_route = std::max(worst_route, off.max_route_difference);
        worst_excess = std::max(worst_excess, (mom.S - off.rhs) / std::max(1.0, std::abs(off.rhs)));
        worst_parseval = std::max(worst_parseval, std::abs(pc.lhs - pc.rhs) / std::max(1.0, pc.rhs));
        positivity = positivity && mom.target_term >= 0 && mom.target_term <= mom.S;
        for (const auto& c : mom.per_character) positivity = positivity && c.amplifier >= 0;
        ++n;
      }
  }
  return {worst_excess <= 1e-8 && worst_route <= 1e-8 && positivity,
          fmt("%d specs; max (S - rhs)/rhs %.2e (limit 1e-8); max D(h) route difference %.1e (limit 1e-8); "
              "positivity %s; Parseval %.1e",
              n, worst_excess, worst_route, positivity ? "exact" : "VIOLATED", worst_parseval)};
}

Outcome afe_checks() {
  const auto& src = delta_table(1 << 20);
  double worst_dual = 0;
  std::string at;
  std::size_t count = 0;
  for (i64 q = 3; q <= 50; ++q)
    for (const auto& chi : CharacterGroup(q).primitive()) {
      LValueRequest r;
      r.phi = src;
      r.chi = chi;
      r.weight = AfeWeight::flat();
      const auto a = afe_lvalue(r).value;
      r.weight = AfeWeight::gaussian(8);
      const double d = std::abs(afe_lvalue(r).value - a);
      if (d > worst_dual) {
        worst_dual = d;
        at = chi.label();
      }
      ++count;
    }
  // Re s = 2 against the Dirichlet series itself, summed to m = 2^20 (tail far below 1e-6)
  double worst_series = 0;
  std::vector<DirichletCharacter> chis{character_from_label("trivial")};
  for (i64 q : {5, 7, 12})
    for (const auto& c : CharacterGroup(q).primitive()) chis.push_back(c);
  for (const auto& chi : chis)
    for (double t : {0.0, 3.0}) {
      const std::complex<double> s(2, t);
      LValueRequest r;
      r.phi = src;
      r.chi = chi;
      r.s = s;
      const auto v = afe_lvalue(r).value;
      std::complex<long double> acc = 0;
      const std::complex<long double> sl(s);
      for (i64 m = src.m_max(); m >= 1; --m)
        acc += std::complex<long double>(src(m) * chi(m)) * std::exp(-sl * std::log(static_cast<long double>(m)));
      worst_series = std::max(worst_series, std::abs(v - std::complex<double>(acc)));
    }
  return {worst_dual <= 1e-4 && worst_series <= 1e-6,
          fmt("%zu primitive characters q <= 50: max dual-weight difference %.1e at %s (limit 1e-4); "
              "Re s = 2 vs direct series %.1e over %zu characters (limit 1e-6)",
              count, worst_dual, at.c_str(), worst_series, chis.size())};
}

Outcome weights_and_certificates() {
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const long double x = std::pow(10.0L, -3 + 9.0L * i / 99);
    long double s = 0;
    for (int k = -80; k <= 80; ++k) s += rho(std::pow(2.0L, -k / 2.0L) * x);
    worst = std::max(worst, static_cast<double>(std::abs(s - 1)));
  }
  int failed = 0;
  double worst_ratio = 0;
  std::set<std::string> names;
  for (const auto& g : used_1d) {
    if (!names.insert(g.name()).second) continue;
    const auto c = verify_certificate(g);
    failed += !c.passed;
    worst_ratio = std::max(worst_ratio, c.worst_ratio);
  }
  for (const auto& g : used_2d) {
    if (!names.insert(g.name()).second) continue;
    const auto c = verify_certificate(g);
    failed += !c.passed;
    worst_ratio = std::max(worst_ratio, c.worst_ratio);
  }
  return {worst <= 1e-12 && failed == 0 && !names.empty(),
          fmt("partition of unity max error %.1e at 100 points (limit 1e-12); %zu distinct weights certified, %d failed, "
              "worst derivative/bound %.3f",
              worst, names.size(), failed, worst_ratio)};
}

Outcome sweep_report() {
  const auto t = subconvexity_sweep(delta_table(1 << 12), 2, 200);
  std::printf("    q  max|L(1/2)|  argmax\n");
  for (const auto& r : t.rows) std::printf("  %3lld  %.6f  %s\n", static_cast<long long>(r.q), r.max_abs, r.argmax.c_str());
  if (!t.slope) return {true, fmt("report only: %zu rows, no fit", t.rows.size())};
  return {true, fmt("report only: %zu rows, slope %.3f, %.0f%% CI [%.3f, %.3f] (sqrt q would be 0.5, subconvex target 0.481)",
                    t.rows.size(), *t.slope, 100 * t.confidence, *t.ci_low, *t.ci_high)};
}

}  // namespace

int main(int argc, char** argv) {
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> all{
      {"voronoi identity, holomorphic", voronoi_holomorphic},
      {"voronoi identity, mu=0 kernels", voronoi_maass_path},
      {"circle-method l2 error", jutila_l2_grid},
      {"circle-method exactness", circle_exactness},
      {"weil-estermann scan", weil_scan},
      {"gauss sums", gauss_sums},
      {"hecke structure of tau", tau_hecke},
      {"rankin-selberg band", rankin_selberg},
      {"amplifier identities", amplifier_grid},
      {"approximate functional equation", afe_checks},
      {"partition of unity and certificates", weights_and_certificates},
      {"subconvexity sweep", sweep_report},
  };
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::atoi(argv[i]));
  // criterion 11 certifies the weights the others used
  if (wanted.count(11))
    for (int k = 1; k <= 10; ++k) wanted.insert(k);
  int failures = 0;
  for (std::size_t i = 0; i < all.size(); ++i) {
    const int k = static_cast<int>(i) + 1;
    if (!wanted.empty() && !wanted.count(k)) continue;
    Outcome o;
    try {
      o = all[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("%s  %2d  %s: %s\n", o.pass ? "PASS" : "FAIL", k, all[i].name, o.detail.c_str());
    std::fflush(stdout);
  }
  return failures ? 1 : 0;
}
