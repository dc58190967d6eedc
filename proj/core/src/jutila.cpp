#include "shiftconv/jutila.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/multiprecision/cpp_int.hpp>

#include "shiftconv/error.hpp"
#include "shiftconv/expsums.hpp"
#include "shiftconv/parallel.hpp"
#include "shiftconv/quadrature.hpp"

namespace shiftconv {
namespace {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

constexpr long double kPi = std::numbers::pi_v<long double>;

std::complex<long double> to_ld(std::complex<double> z) { return {z.real(), z.imag()}; }
std::complex<double> to_d(std::complex<long double> z) {
  return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

std::complex<long double> expi(long double turns) {
  const long double t = 2 * kPi * turns;
  return {std::cos(t), std::sin(t)};
}

i64 lcm(i64 a, i64 b) { return a / gcd(a, b) * b; }

void finish_scheme(JutilaScheme& s) {
  std::sort(s.moduli.begin(), s.moduli.end());
  s.moduli.erase(std::unique(s.moduli.begin(), s.moduli.end()), s.moduli.end());
  if (s.moduli.empty())
    throw DomainError("Jutila scheme: no admissible modulus in [" + std::to_string(s.Q) + ", " +
                      std::to_string(2 * s.Q) + "]");
  s.L = 0;
  for (const i64 q : s.moduli) s.L += euler_phi(q);
}

// value d/q + s * delta, delta = M / 2^P
struct Breakpoint {
  i64 d, q;
  int s;
  int dc;  // change of the arc count
  int di;  // change of the indicator of [0, 1]
};

}  // namespace

bool delta_in_range(double Q, double delta) noexcept {
  const double lo = 1 / (Q * Q), hi = 1 / Q;
  return delta >= lo * (1 - 1e-12) && delta <= hi * (1 + 1e-12);
}

JutilaScheme scheme_from_moduli(double Q, double delta, std::vector<i64> moduli, bool check_delta) {
  if (!(Q >= 1)) throw DomainError("Jutila scheme: Q must be >= 1");
  if (!(delta > 0 && delta <= 1)) throw DomainError("Jutila scheme: delta must be in (0, 1]");
  if (check_delta && !delta_in_range(Q, delta))
    throw DomainError("Jutila scheme: need Q^-2 <= delta <= Q^-1, got Q=" + std::to_string(Q) +
                      " delta=" + std::to_string(delta));
  for (const i64 q : moduli)
    if (q < 1) throw DomainError("Jutila scheme: moduli must be positive");
  JutilaScheme s;
  s.Q = Q;
  s.delta = delta;
  s.moduli = std::move(moduli);
  finish_scheme(s);
  return s;
}

JutilaScheme build_full_scheme(double Q, double delta) {
  std::vector<i64> qs;
  for (i64 q = static_cast<i64>(std::ceil(Q)); q <= static_cast<i64>(std::floor(2 * Q)); ++q) qs.push_back(q);
  return scheme_from_moduli(Q, delta, std::move(qs));
}

JutilaScheme build_scheme(double Q, double delta, i64 N, i64 a, i64 b, i64 h) {
  if (N < 1 || a < 1 || b < 1 || h < 1) throw DomainError("Jutila scheme: N, a, b, h must be positive");
  if (gcd(a, b) != 1) throw DomainError("Jutila scheme: gcd(a, b) must be 1");
  const i64 nab = N * a * b, target = gcd(h, nab);
  std::vector<i64> qs;
  const i64 lo = static_cast<i64>(std::ceil(Q)), hi = static_cast<i64>(std::floor(2 * Q));
  for (i64 q = lo; q <= hi; ++q)
    if (q % nab == 0 && gcd(h, q) == target) qs.push_back(q);
  if (qs.empty())
    throw DomainError("Jutila scheme: no q in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                      "] with Nab | q and (h, q) = (h, Nab)");
  auto s = scheme_from_moduli(Q, delta, std::move(qs));
  s.N = N;
  s.a = a;
  s.b = b;
  s.h = h;
  s.filtered = true;
  return s;
}

double balanced_delta(double Q, i64 a, i64 b, double c) {
  const double d = c * static_cast<double>(a) * static_cast<double>(b) * std::pow(Q, -5.0 / 3.0);
  return std::clamp(d, 1 / (Q * Q), 1 / Q);
}

double StepFunction::operator()(double x) const {
  if (x < lo || x >= hi || values.empty()) return 0;
  const auto it = std::upper_bound(breaks.begin(), breaks.end(), x);
  return values[static_cast<std::size_t>(it - breaks.begin())];
}

namespace {

struct ExactOrder {
  cpp_int M;  // delta = M / 2^P
  int P = 0;
  i128 M128 = 0;

  explicit ExactOrder(double delta) {
    int e = 0;
    const double f = std::frexp(delta, &e);
    i64 m = static_cast<i64>(std::ldexp(f, 53));
    int p = 53 - e;
    while (p > 0 && (m % 2) == 0) {
      m /= 2;
      --p;
    }
    if (p < 0) {
      m <<= -p;
      p = 0;
    }
    if (p > 99) throw DomainError("l2_error: delta has too fine a binary expansion for exact comparison");
    M = m;
    M128 = m;
    P = p;
  }

  // a < b for values d/q + s delta
  bool less(const Breakpoint& a, const Breakpoint& b) const {
    const i128 lhs = (static_cast<i128>(a.d) * b.q - static_cast<i128>(b.d) * a.q) << P;
    const i128 rhs = static_cast<i128>(b.s - a.s) * M128 * a.q * b.q;
    return lhs < rhs;
  }
  bool equal(const Breakpoint& a, const Breakpoint& b) const { return !less(a, b) && !less(b, a); }
};

}  // namespace

L2Report l2_error(const JutilaScheme& s) {
  if (s.moduli.empty()) throw DomainError("l2_error: empty scheme");
  if (s.moduli.back() > 10000) throw DomainError("l2_error: moduli above 10^4 are not supported");
  const ExactOrder ord(s.delta);

  std::vector<Breakpoint> ev;
  ev.reserve(static_cast<std::size_t>(2 * s.L + 2));
  for (const i64 q : s.moduli)
    for (i64 d = 1; d <= q; ++d)
      if (gcd(d, q) == 1) {
        ev.push_back({d, q, -1, +1, 0});
        ev.push_back({d, q, +1, -1, 0});
      }
  ev.push_back({0, 1, 0, 0, +1});
  ev.push_back({1, 1, 0, 0, -1});
  std::sort(ev.begin(), ev.end(), [&](const Breakpoint& x, const Breakpoint& y) {
    if (ord.less(x, y)) return true;
    if (ord.less(y, x)) return false;
    // ties: any fixed order (the sums below do not depend on it)
    return std::tie(x.q, x.d, x.s, x.dc) < std::tie(y.q, y.d, y.s, y.dc);
  });

  // int f = sum_k b_k (f_before - f_after) over breakpoints b_k = d/q + s delta.
  // Integer changes are accumulated per denominator q and for the delta part.
  const std::size_t qmax = static_cast<std::size_t>(s.moduli.back());
  struct Acc {
    i128 c2 = 0, ci = 0, i = 0, c = 0;
  };
  std::vector<Acc> byq(qmax + 1);
  Acc dpart;
  i64 c = 0;
  int ind = 0;
  std::size_t distinct = 0;
  for (std::size_t k = 0; k < ev.size(); ++k) {
    const auto& e = ev[k];
    if (k == 0 || !ord.equal(ev[k - 1], e)) ++distinct;
    const i64 c_new = c + e.dc;
    const int ind_new = ind + e.di;
    const i128 d_c2 = static_cast<i128>(c) * c - static_cast<i128>(c_new) * c_new;
    const i128 d_ci = static_cast<i128>(c) * ind - static_cast<i128>(c_new) * ind_new;
    const i128 d_i = ind - ind_new;
    const i128 d_c = c - c_new;
    auto& a = byq[static_cast<std::size_t>(e.q)];
    a.c2 += d_c2 * e.d;
    a.ci += d_ci * e.d;
    a.i += d_i * e.d;
    a.c += d_c * e.d;
    dpart.c2 += d_c2 * e.s;
    dpart.ci += d_ci * e.s;
    dpart.i += d_i * e.s;
    dpart.c += d_c * e.s;
    c = c_new;
    ind = ind_new;
  }

  auto to_cpp = [](i128 v) {
    const bool neg = v < 0;
    unsigned __int128 u = neg ? static_cast<unsigned __int128>(-v) : static_cast<unsigned __int128>(v);
    cpp_int r = static_cast<std::uint64_t>(u >> 64);
    r <<= 64;
    r += static_cast<std::uint64_t>(u & ~std::uint64_t{0});
    return neg ? cpp_int(-r) : r;
  };
  const cpp_rational delta(ord.M, cpp_int(1) << ord.P);
  cpp_rational T2 = delta * to_cpp(dpart.c2), T1 = delta * to_cpp(dpart.ci), T0 = delta * to_cpp(dpart.i),
               Tc = delta * to_cpp(dpart.c);
  for (std::size_t q = 1; q <= qmax; ++q) {
    const auto& a = byq[q];
    if (a.c2 == 0 && a.ci == 0 && a.i == 0 && a.c == 0) continue;
    const cpp_int qq = static_cast<std::uint64_t>(q);
    T2 += cpp_rational(to_cpp(a.c2), qq);
    T1 += cpp_rational(to_cpp(a.ci), qq);
    T0 += cpp_rational(to_cpp(a.i), qq);
    Tc += cpp_rational(to_cpp(a.c), qq);
  }
  const cpp_rational K = 2 * delta * s.L;  // 2 delta L
  const cpp_rational l2 = T2 / (K * K) - 2 * T1 / K + T0;

  L2Report r;
  r.l2 = l2.convert_to<double>();
  r.bound = std::pow(s.Q, 2.1) / (s.delta * static_cast<double>(s.L) * static_cast<double>(s.L));
  r.ratio = r.l2 / r.bound;
  r.mass_exact = (Tc == K);
  r.breakpoints = distinct;
  return r;
}

StepFunction approximant(const JutilaScheme& s) {
  const ExactOrder ord(s.delta);
  std::vector<Breakpoint> ev;
  for (const i64 q : s.moduli)
    for (i64 d = 1; d <= q; ++d)
      if (gcd(d, q) == 1) {
        ev.push_back({d, q, -1, +1, 0});
        ev.push_back({d, q, +1, -1, 0});
      }
  std::sort(ev.begin(), ev.end(), [&](const Breakpoint& x, const Breakpoint& y) { return ord.less(x, y); });
  StepFunction f;
  f.lo = -s.delta;
  f.hi = 1 + s.delta;
  const double K = 2 * s.delta * static_cast<double>(s.L);
  i64 c = 0;
  f.values.push_back(0);
  for (std::size_t k = 0; k < ev.size(); ++k) {
    c += ev[k].dc;
    if (k + 1 < ev.size() && ord.equal(ev[k], ev[k + 1])) continue;
    const double x = static_cast<double>(ev[k].d) / static_cast<double>(ev[k].q) + ev[k].s * s.delta;
    if (x <= f.lo || x >= f.hi) {
      f.values.back() = static_cast<double>(c) / K;
      continue;
    }
    f.breaks.push_back(x);
    f.values.push_back(static_cast<double>(c) / K);
  }
  return f;
}

// ---------------------------------------------------------------------------

ExpSum::ExpSum(const ShiftedSumSpec& spec) {
  spec.validate();
  if (spec.f.is_zero()) return;
  spec.require_coefficients();
  const auto [m_lo, m_hi, n_lo, n_hi] = spec.index_box();
  if (m_lo > m_hi || n_lo > n_hi) return;
  const i64 s = spec.sign;
  const i64 k1 = spec.frequency(m_lo, s < 0 ? n_hi : n_lo), k2 = spec.frequency(m_hi, s < 0 ? n_lo : n_hi);
  k_min_ = k1;
  const std::size_t K = static_cast<std::size_t>(k2 - k1 + 1);

  // blocks of m accumulate into private spectra, combined in block order
  const i64 block = 64;
  const std::size_t nblocks = static_cast<std::size_t>((m_hi - m_lo) / block + 1);
  std::vector<std::vector<std::complex<long double>>> part(nblocks);
  parallel_for(nblocks, [&](std::size_t bi) {
    auto& sp = part[bi];
    sp.assign(K, 0.0L);
    const i64 m0 = m_lo + static_cast<i64>(bi) * block, m1 = std::min(m_hi, m0 + block - 1);
    for (i64 m = m0; m <= m1; ++m) {
      const auto lm = to_ld(spec.phi.at_positive(m));
      const long double x = static_cast<long double>(spec.a * m);
      for (i64 n = n_lo; n <= n_hi; ++n) {
        const long double w = spec.f(x, static_cast<long double>(spec.b * n));
        if (w == 0) continue;
        sp[static_cast<std::size_t>(spec.frequency(m, n) - k_min_)] += lm * to_ld(spec.psi.at_positive(n)) * w;
      }
    }
  });
  spectrum_.assign(K, 0.0L);
  for (const auto& sp : part)
    for (std::size_t k = 0; k < K; ++k) spectrum_[k] += sp[k];
  // trim zero ends
  std::size_t first = 0, last = K;
  while (first < last && spectrum_[first] == 0.0L) ++first;
  while (last > first && spectrum_[last - 1] == 0.0L) --last;
  spectrum_ = std::vector<std::complex<long double>>(spectrum_.begin() + static_cast<std::ptrdiff_t>(first),
                                                     spectrum_.begin() + static_cast<std::ptrdiff_t>(last));
  k_min_ += static_cast<i64>(first);
}

i64 ExpSum::max_abs_frequency() const noexcept {
  if (spectrum_.empty()) return 0;
  return std::max(std::abs(k_min()), std::abs(k_max()));
}

std::complex<double> ExpSum::operator()(const Alpha& al) const {
  if (spectrum_.empty()) return 0.0;
  // e(k alpha) = e_den(k num) e(k beta); re-anchored exactly every 256 steps
  auto exact = [&](i64 k) {
    const i64 r = static_cast<i64>(static_cast<i128>(k) * al.num % al.den);
    return e_q_ld(r, al.den) * expi(static_cast<long double>(k) * al.beta);
  };
  const auto step = exact(1);
  CompensatedSum<std::complex<long double>> acc;
  std::complex<long double> z = 0;
  for (std::size_t j = 0; j < spectrum_.size(); ++j) {
    z = (j % 256 == 0) ? exact(k_min_ + static_cast<i64>(j)) : z * step;
    acc.add(spectrum_[j] * z);
  }
  return to_d(acc.value());
}

std::complex<double> exp_sum_G(double alpha, const ShiftedSumSpec& spec) { return ExpSum(spec)(alpha); }

std::complex<double> d_exact_by_integral(const ShiftedSumSpec& spec, i64 n_points) {
  const ExpSum G(spec);
  if (G.empty()) return 0.0;
  const i64 threshold = 2 * G.max_abs_frequency();
  if (n_points == 0) n_points = threshold + 1;
  if (n_points <= threshold)
    throw DomainError("d_exact_by_integral: n_points must exceed " + std::to_string(threshold) +
                      " (twice the largest frequency)");
  const auto sum = deterministic_sum<std::complex<long double>>(static_cast<std::size_t>(n_points), [&](std::size_t j) {
    return to_ld(G(Alpha{static_cast<i64>(j), n_points, 0}));
  });
  return to_d(sum / static_cast<long double>(n_points));
}

int arc_points(const ExpSum& G, double delta, int min_points) {
  const double need = 8 + 2 * delta * static_cast<double>(G.max_abs_frequency());
  return std::max(min_points, static_cast<int>(std::ceil(need)));
}

std::complex<double> arc_integral(const ExpSum& G, i64 d, i64 q, double delta, int points) {
  if (G.empty()) return 0.0;
  const auto& rule = gauss_legendre(points);
  CompensatedSum<std::complex<long double>> acc;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    acc.add(to_ld(G(Alpha{mod_reduce(d, q), q, delta * rule.nodes[i]})) * rule.weights[i]);
  return to_d(acc.value() * static_cast<long double>(delta));
}

DTildeReport d_tilde(const ShiftedSumSpec& spec, const JutilaScheme& s, int points_per_arc) {
  DTildeReport r;
  const ExpSum G(spec);
  std::vector<std::pair<i64, i64>> arcs;
  for (const i64 q : s.moduli)
    for (i64 d = 1; d <= q; ++d)
      if (gcd(d, q) == 1) arcs.emplace_back(d, q);
  r.arcs = arcs.size();
  r.points_per_arc = arc_points(G, s.delta, points_per_arc);
  if (G.empty()) return r;
  const auto sum = deterministic_sum<std::complex<long double>>(arcs.size(), [&](std::size_t i) {
    return to_ld(arc_integral(G, arcs[i].first, arcs[i].second, s.delta, r.points_per_arc));
  });
  r.value = to_d(sum / (2 * static_cast<long double>(s.delta) * static_cast<long double>(s.L)));
  return r;
}

double approximation_error_scale(const ShiftedSumSpec& spec, const JutilaScheme& s) {
  const double A = spec.f.A, B = spec.f.B, ab = static_cast<double>(spec.a * spec.b);
  return std::sqrt(ab) * std::sqrt(s.delta) / s.Q * std::pow(A * B, 1.5) / (A + B);
}

double arc_remainder_scale(const ShiftedSumSpec& spec, const JutilaScheme& s) {
  const double A = spec.f.A, B = spec.f.B, ab = static_cast<double>(spec.a * spec.b);
  return s.delta * s.delta * std::pow(s.Q, 1.5) / ab * std::pow(A * B, 1.5) / (A + B);
}

// ---------------------------------------------------------------------------
// Voronoi inside the arc.
//
// With F = sum_t c_t u_t(x) v_t(y) and the beta integral outside,
//   J_{d/q} = e_q(-dh) int e(-h beta) sum_t c_t A_t(beta) B_t(beta) d beta,
//   A_t = sum_m lambda_phi(m) e_{q/a}(d m) u_t(am) e(am beta),
//   B_t = sum_n lambda_psi(n) e_{q/b}(s d n) v_t(bn) e(s bn beta),
// and each of A_t, B_t goes through Voronoi with modulus q/a resp. q/b.

namespace {

struct ArcSetup {
  i64 q, qa, qb;
  std::vector<long double> beta, bw;  // nodes and weights on [-delta, delta]
  std::vector<SmoothWeight1D> wm, wn;  // per (t, j): re, im
  DualSeries sm, sn;
  ExpSum G;
  std::size_t T = 0, J = 0;
};

SmoothWeight1D phase_weight(const std::function<long double(long double)>& u, long double scale_ab, long double freq,
                            bool imag, double lo, double hi, const std::vector<double>& knots) {
  SmoothWeight1D g(
      [u, scale_ab, freq, imag](long double x) {
        const long double ph = 2 * kPi * freq * scale_ab * x;
        return u(scale_ab * x) * (imag ? std::sin(ph) : std::cos(ph));
      },
      lo, hi, 1 / lo, {1, 1, 1}, "arc-weight");
  for (const double k : knots) g.knots.push_back(k / static_cast<double>(scale_ab));
  return g;
}

ArcSetup setup_arc(i64 q, const ShiftedSumSpec& spec, const JutilaScheme& s, const ArcTransformOptions& opts,
                   std::complex<long double> scale_hint_m, std::complex<long double> scale_hint_n) {
  spec.validate();
  if (spec.f.separable.empty())
    throw DomainError("transformed_arc_sum: the weight must be given as a sum of separable terms");
  const i64 N = lcm(spec.phi.level, spec.psi.level);
  if (q % (N * spec.a * spec.b) != 0)
    throw DomainError("transformed_arc_sum: need N a b | q, got q=" + std::to_string(q));
  ArcSetup st{q, q / spec.a, q / spec.b, {}, {}, {}, {}, {}, {}, ExpSum(spec), 0, 0};
  const int pts = opts.beta_points > 0 ? opts.beta_points : arc_points(st.G, s.delta);
  const auto& rule = gauss_legendre(pts);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    st.beta.push_back(s.delta * rule.nodes[i]);
    st.bw.push_back(s.delta * rule.weights[i]);
  }
  st.T = spec.f.separable.size();
  st.J = st.beta.size();
  const auto& sup = spec.f.support();
  const double mlo = sup[0] / static_cast<double>(spec.a), mhi = sup[1] / static_cast<double>(spec.a);
  const double nlo = sup[2] / static_cast<double>(spec.b), nhi = sup[3] / static_cast<double>(spec.b);
  for (std::size_t t = 0; t < st.T; ++t)
    for (std::size_t j = 0; j < st.J; ++j)
      for (const bool im : {false, true}) {
        st.wm.push_back(phase_weight(spec.f.separable[t].u, static_cast<long double>(spec.a), st.beta[j], im, mlo,
                                     mhi, spec.f.knots_x));
        st.wn.push_back(phase_weight(spec.f.separable[t].v, static_cast<long double>(spec.b),
                                     static_cast<long double>(spec.sign) * st.beta[j], im, nlo, nhi, spec.f.knots_y));
      }
  auto vo_m = opts.voronoi, vo_n = opts.voronoi;
  vo_m.transform.extra_oscillations = s.delta * sup[1];
  vo_n.transform.extra_oscillations = s.delta * sup[3];
  st.sm = dual_series(spec.phi, st.qa, st.wm, static_cast<double>(std::abs(scale_hint_m)), vo_m);
  st.sn = dual_series(spec.psi, st.qb, st.wn, static_cast<double>(std::abs(scale_hint_n)), vo_n);
  return st;
}

// sum_m lambda(m) e_Q(r m) g(m) over the support of g
std::complex<long double> direct_side(const CoefficientSource& src, i64 r, i64 Q, const SmoothWeight1D& g) {
  const i64 lo = std::max<i64>(1, static_cast<i64>(std::ceil(g.lo()))), hi = static_cast<i64>(std::floor(g.hi()));
  CompensatedSum<std::complex<long double>> acc;
  for (i64 m = lo; m <= hi; ++m) {
    const long double w = g(static_cast<long double>(m));
    if (w != 0) acc.add(to_ld(src.at_positive(m)) * e_q_ld(static_cast<i64>(static_cast<i128>(r) * m % Q), Q) * w);
  }
  return acc.value();
}

// one dual branch of one weight, no main term
std::complex<long double> branch_sum(const DualSeries& ds, const CoefficientSource& src, i64 dbar, std::size_t w,
                                     std::size_t b) {
  const auto sg = branch_signs(ds.branches[b]);
  CompensatedSum<std::complex<long double>> acc;
  for (i64 m = 1; m <= ds.m_cut; ++m) {
    const i64 ph = static_cast<i64>(static_cast<i128>(dbar) * m % ds.q);
    acc.add(to_ld(src(sg.coefficient_sign * m)) * e_q_ld(sg.phase_sign * ph, ds.q) *
            ds.values[w][b][static_cast<std::size_t>(m)]);
  }
  return acc.value();
}

// max over the side's weights of |direct sum| for residue r
long double side_scale(const CoefficientSource& src, i64 r, i64 Q, const std::vector<SmoothWeight1D>& ws) {
  long double s = 0;
  for (const auto& w : ws) s = std::max(s, std::abs(direct_side(src, r, Q, w)));
  return s;
}

std::vector<SmoothWeight1D> side_weights(const ShiftedSumSpec& spec, const JutilaScheme& s, bool m_side) {
  // the same weights setup_arc builds, for scale estimation before the dual series exist
  const ExpSum G(spec);
  const int pts = arc_points(G, s.delta);
  const auto& rule = gauss_legendre(pts);
  const auto& sup = spec.f.support();
  std::vector<SmoothWeight1D> out;
  for (const auto& term : spec.f.separable)
    for (std::size_t j = 0; j < rule.nodes.size(); ++j)
      for (const bool im : {false, true}) {
        const long double beta = s.delta * rule.nodes[j];
        if (m_side)
          out.push_back(phase_weight(term.u, static_cast<long double>(spec.a), beta, im, sup[0] / spec.a,
                                     sup[1] / spec.a, spec.f.knots_x));
        else
          out.push_back(phase_weight(term.v, static_cast<long double>(spec.b), spec.sign * beta, im, sup[2] / spec.b,
                                     sup[3] / spec.b, spec.f.knots_y));
      }
  return out;
}

}  // namespace

ArcTransformReport transformed_arc_sum(i64 d, i64 q, const ShiftedSumSpec& spec, const JutilaScheme& s,
                                       const ArcTransformOptions& opts) {
  if (gcd(mod_reduce(d, q), q) != 1) throw DomainError("transformed_arc_sum: gcd(d, q) must be 1");
  ArcTransformReport r;
  r.d = d;
  r.q = q;
  if (spec.f.is_zero()) return r;
  const i64 qa = q / spec.a, qb = q / spec.b;
  const i64 dn = mod_reduce(spec.sign * d, qb);
  const auto scale_m = side_scale(spec.phi, mod_reduce(d, qa), qa, side_weights(spec, s, true));
  const auto scale_n = side_scale(spec.psi, dn, qb, side_weights(spec, s, false));
  auto st = setup_arc(q, spec, s, opts, scale_m, scale_n);
  r.beta_points = static_cast<int>(st.J);
  r.m_cut = st.sm.m_cut;
  r.n_cut = st.sn.m_cut;
  r.m_tail = st.sm.tail_estimate;
  r.n_tail = st.sn.tail_estimate;

  const auto chi_phi = spec.phi.nebentypus_character(), chi_psi = spec.psi.nebentypus_character();
  const auto cm = std::conj(to_ld(chi_phi(mod_reduce(d, qa)))), cn = std::conj(to_ld(chi_psi(dn)));
  const i64 dbar_m = mod_inverse(d, qa).value, dbar_n = mod_inverse(dn, qb).value;
  const std::size_t nbm = st.sm.branches.size(), nbn = st.sn.branches.size();

  // per weight: branch values and main terms (complex weight = re + i im)
  auto side_values = [&](const DualSeries& ds, const CoefficientSource& src, i64 dbar, std::size_t nb) {
    std::vector<std::vector<std::complex<long double>>> v(st.T * st.J, std::vector<std::complex<long double>>(nb + 1));
    parallel_for(st.T * st.J, [&](std::size_t tj) {
      for (std::size_t b = 0; b < nb; ++b)
        v[tj][b] = branch_sum(ds, src, dbar, 2 * tj, b) +
                   std::complex<long double>(0, 1) * branch_sum(ds, src, dbar, 2 * tj + 1, b);
      v[tj][nb] = std::complex<long double>(ds.main_term[2 * tj], ds.main_term[2 * tj + 1]);
    });
    return v;
  };
  const auto Av = side_values(st.sm, spec.phi, dbar_m, nbm);
  const auto Bv = side_values(st.sn, spec.psi, dbar_n, nbn);

  const auto outer = e_q_ld(-static_cast<i64>(static_cast<i128>(d) * spec.h % q), q);
  std::vector<std::vector<std::complex<long double>>> by_branch(nbm + 1, std::vector<std::complex<long double>>(nbn + 1));
  for (std::size_t t = 0; t < st.T; ++t)
    for (std::size_t j = 0; j < st.J; ++j) {
      const auto wj = st.bw[j] * expi(-static_cast<long double>(spec.h) * st.beta[j]) * spec.f.separable[t].c;
      const auto& A = Av[t * st.J + j];
      const auto& B = Bv[t * st.J + j];
      for (std::size_t bm = 0; bm <= nbm; ++bm)
        for (std::size_t bn = 0; bn <= nbn; ++bn) by_branch[bm][bn] += wj * cm * A[bm] * cn * B[bn];
    }
  std::complex<long double> total = 0;
  for (std::size_t bm = 0; bm <= nbm; ++bm)
    for (std::size_t bn = 0; bn <= nbn; ++bn) {
      total += outer * by_branch[bm][bn];
      if (bm < nbm && bn < nbn)
        r.branches.push_back({st.sm.branches[bm], st.sn.branches[bn], to_d(outer * by_branch[bm][bn])});
    }
  r.transformed = to_d(total);
  r.direct = arc_integral(st.G, d, q, s.delta, static_cast<int>(st.J));
  r.difference = std::abs(r.transformed - r.direct);
  return r;
}

ArcTransformReport transformed_arc_sum_over_d(i64 q, const ShiftedSumSpec& spec, const JutilaScheme& s,
                                              const ArcTransformOptions& opts) {
  ArcTransformReport r;
  r.q = q;
  if (spec.f.is_zero()) return r;
  const i64 qa = q / spec.a, qb = q / spec.b;
  // scale: worst residue over d
  long double scale_m = 0, scale_n = 0;
  {
    const auto wm = side_weights(spec, s, true), wn = side_weights(spec, s, false);
    for (i64 d = 1; d <= q; ++d) {
      if (gcd(d, q) != 1) continue;
      scale_m = std::max(scale_m, side_scale(spec.phi, mod_reduce(d, qa), qa, wm));
      scale_n = std::max(scale_n, side_scale(spec.psi, mod_reduce(spec.sign * d, qb), qb, wn));
    }
  }
  auto st = setup_arc(q, spec, s, opts, scale_m, scale_n);
  r.beta_points = static_cast<int>(st.J);
  r.m_cut = st.sm.m_cut;
  r.n_cut = st.sn.m_cut;
  r.m_tail = st.sm.tail_estimate;
  r.n_tail = st.sn.tail_estimate;

  // theta = conj(chi_phi chi_psi) as a table mod q; the conj(chi_psi(s)) factor separately
  const auto chi_phi = spec.phi.nebentypus_character(), chi_psi = spec.psi.nebentypus_character();
  std::vector<std::complex<double>> theta(static_cast<std::size_t>(q), 0.0);
  for (i64 d = 0; d < q; ++d)
    if (gcd(d, q) == 1) theta[static_cast<std::size_t>(d)] = std::conj(chi_phi(d) * chi_psi(d));
  const auto sign_factor = std::conj(to_ld(chi_psi(mod_reduce(spec.sign, std::max<i64>(chi_psi.modulus(), 1)))));
  std::vector<std::complex<long double>> S(static_cast<std::size_t>(q));
  parallel_for(static_cast<std::size_t>(q), [&](std::size_t rr) {
    S[rr] = to_ld(kloosterman(-spec.h, static_cast<i64>(rr), q, &theta));
  });

  // Residue profiles: for the m side in branch b, P_b(r) = sum over m with
  // phase_sign * a * m = r (mod q) of lambda(coef_sign m) * transform(m);
  // the main term sits at r = 0.
  const std::size_t nbm = st.sm.branches.size(), nbn = st.sn.branches.size();
  auto profiles = [&](const DualSeries& ds, const CoefficientSource& src, i64 mult, std::size_t nb, std::size_t tj) {
    std::vector<std::vector<std::complex<long double>>> P(nb + 1, std::vector<std::complex<long double>>(
                                                                      static_cast<std::size_t>(q), 0.0L));
    for (std::size_t b = 0; b < nb; ++b) {
      const auto sg = branch_signs(ds.branches[b]);
      for (i64 m = 1; m <= ds.m_cut; ++m) {
        const auto v = ds.values[2 * tj][b][static_cast<std::size_t>(m)] +
                       std::complex<long double>(0, 1) * ds.values[2 * tj + 1][b][static_cast<std::size_t>(m)];
        const i64 rr = mod_reduce(static_cast<i64>(static_cast<i128>(sg.phase_sign) * mult * m % q), q);
        P[b][static_cast<std::size_t>(rr)] += to_ld(src(sg.coefficient_sign * m)) * v;
      }
    }
    P[nb][0] = std::complex<long double>(ds.main_term[2 * tj], ds.main_term[2 * tj + 1]);
    return P;
  };

  std::vector<std::vector<std::complex<long double>>> by_branch(nbm + 1, std::vector<std::complex<long double>>(nbn + 1));
  std::vector<std::vector<std::vector<std::complex<long double>>>> per_tj(st.T * st.J);
  parallel_for(st.T * st.J, [&](std::size_t tj) {
    const std::size_t t = tj / st.J, j = tj % st.J;
    const auto wj = st.bw[j] * expi(-static_cast<long double>(spec.h) * st.beta[j]) * spec.f.separable[t].c;
    // the m phase is e_q(a dbar m), the n phase e_q(s b dbar n)
    const auto P = profiles(st.sm, spec.phi, spec.a, nbm, tj);
    const auto Qp = profiles(st.sn, spec.psi, spec.sign * spec.b, nbn, tj);
    auto& out = per_tj[tj];
    out.assign(nbm + 1, std::vector<std::complex<long double>>(nbn + 1, 0.0L));
    for (std::size_t bm = 0; bm <= nbm; ++bm)
      for (std::size_t bn = 0; bn <= nbn; ++bn) {
        std::complex<long double> acc = 0;
        for (i64 r1 = 0; r1 < q; ++r1) {
          const auto p = P[bm][static_cast<std::size_t>(r1)];
          if (p == 0.0L) continue;
          for (i64 r2 = 0; r2 < q; ++r2) {
            const auto qv = Qp[bn][static_cast<std::size_t>(r2)];
            if (qv == 0.0L) continue;
            acc += p * qv * S[static_cast<std::size_t>((r1 + r2) % q)];
          }
        }
        out[bm][bn] = wj * acc;
      }
  });
  for (const auto& o : per_tj)
    for (std::size_t bm = 0; bm <= nbm; ++bm)
      for (std::size_t bn = 0; bn <= nbn; ++bn) by_branch[bm][bn] += o[bm][bn];

  std::complex<long double> total = 0;
  for (std::size_t bm = 0; bm <= nbm; ++bm)
    for (std::size_t bn = 0; bn <= nbn; ++bn) {
      const auto v = sign_factor * by_branch[bm][bn];
      total += v;
      if (bm < nbm && bn < nbn) r.branches.push_back({st.sm.branches[bm], st.sn.branches[bn], to_d(v)});
    }
  r.transformed = to_d(total);
  CompensatedSum<std::complex<long double>> direct;
  for (i64 d = 1; d <= q; ++d)
    if (gcd(d, q) == 1) direct.add(to_ld(arc_integral(st.G, d, q, s.delta, static_cast<int>(st.J))));
  r.direct = to_d(direct.value());
  r.difference = std::abs(r.transformed - r.direct);
  return r;
}

WiltonReport wilton_diagnostic(const CoefficientSource& src, const std::vector<double>& alphas, i64 x_max) {
  src.require(x_max, "Wilton diagnostic");
  WiltonReport r;
  for (const double al : alphas) {
    std::complex<long double> S = 0;
    for (i64 m = 1; m <= x_max; ++m) {
      S += to_ld(src.at_positive(m)) * expi(static_cast<long double>(m) * al);
      const double x = static_cast<double>(m);
      const double ratio = static_cast<double>(std::abs(S)) / (std::sqrt(x) * std::log(2 * x));
      if (ratio > r.worst_ratio) {
        r.worst_ratio = ratio;
        r.worst_alpha = al;
        r.worst_x = m;
      }
    }
  }
  return r;
}

}  // namespace shiftconv
