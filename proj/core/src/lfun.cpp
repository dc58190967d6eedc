#include "shiftconv/lfun.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/students_t.hpp>

#include "shiftconv/error.hpp"
#include "shiftconv/gamma.hpp"
#include "shiftconv/parallel.hpp"
#include "shiftconv/quadrature.hpp"
#include "shiftconv/shifted.hpp"

namespace shiftconv {
namespace {

using cld = std::complex<long double>;
constexpr long double kPi = std::numbers::pi_v<long double>;

cld to_ld(std::complex<double> z) { return {z.real(), z.imag()}; }
std::complex<double> to_d(cld z) { return {static_cast<double>(z.real()), static_cast<double>(z.imag())}; }

std::complex<double> i_pow(int k) {
  switch (mod_reduce(k, 4)) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
  }
}

// Trapezoid discretisation of V_s on the line Re u = c, nodes t_k = k h:
//   V_s(y) = y^-c sum_k w_k exp(-i k h log y).
class Cutoff {
 public:
  Cutoff(cld s, const std::vector<std::complex<double>>& shifts, const AfeWeight& G) {
    long double pole = 0;  // right-most pole of the gamma ratio
    for (const auto& mu : shifts) pole = std::max(pole, -s.real() - static_cast<long double>(mu.real()));
    c_ = std::max(0.0L, pole) + 1;
    // analytic in a strip of half-width 1 around the line; exp(-2 pi / h) ~ 1e-19
    h_ = 2 * kPi / 44;
    cld base = 0;
    for (const auto& mu : shifts) base += log_gamma_r(s + to_ld(mu));
    auto weight = [&](long k) {
      const cld u(c_, k * h_);
      cld lg = -base;
      for (const auto& mu : shifts) lg += log_gamma_r(s + u + to_ld(mu));
      return h_ / (2 * kPi) * G(u) * std::exp(lg) / u;
    };
    const cld w0 = weight(0);
    pos_.push_back(w0);
    long double peak = std::abs(w0);
    for (const int dir : {1, -1}) {
      auto& side = dir > 0 ? pos_ : neg_;
      for (long k = 1;; ++k) {
        if (k > 200000) throw ToleranceError("AFE cutoff: contour integrand does not decay", 0);
        const cld w = weight(dir * k);
        side.push_back(w);
        peak = std::max(peak, std::abs(w));
        if (std::abs(w) < 1e-24L * peak && k * h_ > 4) break;
      }
    }
  }

  cld operator()(long double y) const {
    const long double ly = std::log(y);
    return std::exp(-c_ * ly) * (rotate(pos_, -h_ * ly, 0) + rotate(neg_, h_ * ly, 1));
  }

 private:
  // sum_k w[k] exp(i theta (k + offset)), rotation by recurrence re-anchored every 64 steps
  static cld rotate(const std::vector<cld>& w, long double theta, std::size_t offset) {
    const cld step = std::polar(1.0L, theta);
    cld acc = 0, p = 1;
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (k % 64 == 0) p = std::polar(1.0L, theta * static_cast<long double>(k + offset));
      acc += w[k] * p;
      p *= step;
    }
    return acc;
  }

  long double c_ = 1, h_ = 0.1L;
  std::vector<cld> pos_, neg_;  // pos_[k] at t = k h, neg_[k] at t = -(k + 1) h
};

// |V| below tol on [y, 2y] (sampled)
bool negligible_from(const Cutoff& V, long double y, double tol) {
  for (int i = 0; i <= 16; ++i)
    if (std::abs(V(y * (1 + i / 16.0L))) >= tol) return false;
  return true;
}

long double cutoff_point(const Cutoff& V, double tol) {
  long double y = 0.25L;
  while (!negligible_from(V, y, tol)) {
    y *= 1.05L;
    if (y > 1e8L) throw ToleranceError("AFE cutoff: V does not fall below tolerance", tol);
  }
  return y;
}

struct Tables {
  i64 terms = 0;
  std::vector<cld> Vs, Vd;  // V_s(m / sqrt C), V_{1-s}(m / sqrt C), m = 0..terms
  cld R = 1;
};

Tables build_tables(cld s, const TwistData& data, const AfeWeight& G, double tol, i64 forced_terms) {
  std::vector<std::complex<double>> dual_shifts;
  for (const auto& mu : data.shifts) dual_shifts.push_back(std::conj(mu));
  const Cutoff Vs(s, data.shifts, G), Vd(1.0L - s, dual_shifts, G);
  const long double rootC = std::sqrt(static_cast<long double>(data.conductor));
  Tables t;
  if (forced_terms > 0) {
    t.terms = forced_terms;
  } else {
    const long double y = std::max(cutoff_point(Vs, tol), cutoff_point(Vd, tol));
    t.terms = static_cast<i64>(std::ceil(2 * y * rootC));
  }
  t.Vs.resize(static_cast<std::size_t>(t.terms + 1));
  t.Vd.resize(static_cast<std::size_t>(t.terms + 1));
  parallel_for(static_cast<std::size_t>(t.terms), [&](std::size_t i) {
    const long double y = static_cast<long double>(i + 1) / rootC;
    t.Vs[i + 1] = Vs(y);
    t.Vd[i + 1] = Vd(y);
  });
  cld lr = (0.5L - s) * std::log(static_cast<long double>(data.conductor));
  for (std::size_t j = 0; j < data.shifts.size(); ++j)
    lr += log_gamma_r(1.0L - s + to_ld(dual_shifts[j])) - log_gamma_r(s + to_ld(data.shifts[j]));
  t.R = std::exp(lr);
  return t;
}

LValueResult evaluate(cld s, const CoefficientSource& phi, const DirichletCharacter& chi, const TwistData& data,
                      const Tables& t) {
  phi.require(t.terms, "approximate functional equation");
  CompensatedSum<cld> A, B;
  for (i64 m = 1; m <= t.terms; ++m) {
    const auto c = chi(m);
    if (c == 0.0) continue;
    const cld a = to_ld(phi.at_positive(m) * c);
    const long double lm = std::log(static_cast<long double>(m));
    A.add(a * std::exp(-s * lm) * t.Vs[static_cast<std::size_t>(m)]);
    B.add(std::conj(a) * std::exp((s - 1.0L) * lm) * t.Vd[static_cast<std::size_t>(m)]);
  }
  LValueResult r;
  r.T = to_d(A.value());
  r.T_dual = to_d(t.R * B.value());
  r.root_number = data.root_number;
  r.value = r.T + r.root_number * r.T_dual;
  r.conductor = data.conductor;
  r.terms = t.terms;
  if (chi.modulus() > 1)
    r.effective_epsilon = std::log(static_cast<double>(t.terms)) / std::log(static_cast<double>(chi.modulus())) - 1;
  return r;
}

void check_twist(const CoefficientSource& phi, const DirichletCharacter& chi) {
  if (!chi.is_primitive()) throw DomainError("L-value: chi must be primitive, got " + chi.label());
  if (gcd(chi.modulus(), phi.level) != 1)
    throw DomainError("L-value: modulus " + std::to_string(chi.modulus()) + " is not coprime to the level " +
                      std::to_string(phi.level));
  if (phi.kind == FormKind::Divisor && chi.modulus() == 1)
    throw DomainError("L-value: the untwisted divisor analog has a pole at s = 1; twist by a nontrivial character");
  if (!phi.primitive) throw DomainError("L-value: the coefficient source must be primitive");
}

}  // namespace

std::complex<long double> AfeWeight::operator()(std::complex<long double> u) const {
  if (width == 0) return 1;
  return std::exp(u * u / static_cast<long double>(width));
}

std::string AfeWeight::name() const {
  if (width == 0) return "flat";
  std::ostringstream o;
  o << "gaussian(" << width << ")";
  return o.str();
}

std::complex<double> root_number(const CoefficientSource& phi, const DirichletCharacter& chi) {
  const i64 q = chi.modulus();
  const auto tau = gauss_sum(chi);
  const std::complex<double> twist = tau * tau / static_cast<double>(q);
  std::complex<double> eps;
  if (phi.kind == FormKind::Holomorphic && phi.level == 1 && phi.nebentypus == "trivial" && !phi.root_number) {
    eps = i_pow(phi.weight) * twist;
  } else if (phi.kind == FormKind::Divisor && phi.level == 1) {
    eps = static_cast<double>(chi.parity()) * twist;
  } else {
    if (!phi.root_number)
      throw DomainError("root number: level " + std::to_string(phi.level) +
                        " source without a root number in its header");
    const auto psi = phi.nebentypus_character();
    eps = *phi.root_number * chi(phi.level) * psi(q) * twist;
    if (phi.kind == FormKind::Maass) eps *= static_cast<double>(chi.parity());
  }
  if (std::abs(std::abs(eps) - 1) > 1e-8)
    throw ToleranceError("root number: |eps| = " + std::to_string(std::abs(eps)) + " is not 1", std::abs(eps));
  return eps;
}

TwistData twist_data(const CoefficientSource& phi, const DirichletCharacter& chi) {
  check_twist(phi, chi);
  TwistData d;
  const double q = static_cast<double>(chi.modulus());
  d.conductor = static_cast<double>(phi.level) * q * q;
  const int a = chi.parity() == 1 ? 0 : 1;
  switch (phi.kind) {
    case FormKind::Holomorphic: {
      if (phi.weight < 1) throw DomainError("L-value: holomorphic source without a weight");
      const double kappa = (phi.weight - 1) / 2.0;
      d.shifts = {kappa, kappa + 1};
      break;
    }
    case FormKind::Divisor: d.shifts = {static_cast<double>(a), static_cast<double>(a)}; break;
    case FormKind::Maass: {
      if (phi.sign != 1 && phi.sign != -1) throw DomainError("L-value: Maass source without a parity sign");
      const int b = (phi.sign * chi.parity() == 1) ? 0 : 1;
      d.shifts = {{static_cast<double>(b), phi.mu}, {static_cast<double>(b), -phi.mu}};
      break;
    }
  }
  d.root_number = root_number(phi, chi);
  return d;
}

std::complex<double> afe_cutoff(std::complex<double> s, const TwistData& data, const AfeWeight& G, double y) {
  if (!(y > 0)) throw DomainError("afe_cutoff: y must be positive");
  return to_d(Cutoff(to_ld(s), data.shifts, G)(y));
}

LValueResult afe_lvalue(const LValueRequest& req) {
  const auto data = twist_data(req.phi, req.chi);
  i64 forced = 0;
  if (req.cutoff_epsilon > 0 && req.chi.modulus() > 1)
    forced = static_cast<i64>(std::floor(std::pow(static_cast<double>(req.chi.modulus()), 1 + req.cutoff_epsilon)));
  const auto t = build_tables(to_ld(req.s), data, req.weight, req.tolerance, forced);
  return evaluate(to_ld(req.s), req.phi, req.chi, data, t);
}

std::vector<LabeledLValue> afe_lvalues_mod(const CoefficientSource& phi, i64 q, std::complex<double> s,
                                           AfeWeight weight, double tolerance) {
  const auto chis = CharacterGroup(q).primitive();
  // the cutoff tables depend on chi only through its parity
  std::map<int, Tables> tables;
  std::map<int, TwistData> data;
  for (const auto& chi : chis) {
    const int p = chi.parity();
    if (tables.count(p)) continue;
    data[p] = twist_data(phi, chi);
    tables[p] = build_tables(to_ld(s), data[p], weight, tolerance, 0);
  }
  std::vector<LabeledLValue> out(chis.size());
  parallel_for(chis.size(), [&](std::size_t i) {
    auto d = data.at(chis[i].parity());
    d.root_number = root_number(phi, chis[i]);
    out[i] = {chis[i].label(), evaluate(to_ld(s), phi, chis[i], d, tables.at(chis[i].parity()))};
  });
  return out;
}

AmplifierSpec make_amplifier_spec(const CoefficientSource& phi, const DirichletCharacter& chi, int L_amp, double M) {
  AmplifierSpec s;
  s.phi = phi;
  s.q = chi.modulus();
  s.chi = chi;
  s.L_amp = L_amp;
  s.M = M;
  s.k_weight = bump_weight(M);
  return s;
}

namespace {

void check_amplifier(const AmplifierSpec& spec) {
  if (spec.q < 2 || spec.q > 10000) throw DomainError("amplifier: q must lie in [2, 10^4]");
  if (spec.chi.modulus() != spec.q) throw DomainError("amplifier: chi must be a character mod q");
  if (spec.L_amp < 1) throw DomainError("amplifier: L_amp must be >= 1");
  if (!(spec.M >= 1)) throw DomainError("amplifier: M must be >= 1");
  if (spec.k_weight.is_zero()) throw DomainError("amplifier: missing weight k");
  if (spec.k_weight.lo() < spec.M - 1e-9 || spec.k_weight.hi() > 2 * spec.M + 1e-9)
    throw DomainError("amplifier: k must be supported in [M, 2M]");
  spec.phi.require(static_cast<i64>(std::floor(2 * spec.M)), "amplifier");
}

// lambda(m) k(m) on [1, 2M]
std::vector<std::complex<double>> weighted_coefficients(const AmplifierSpec& spec) {
  const i64 top = static_cast<i64>(std::floor(2 * spec.M));
  std::vector<std::complex<double>> v(static_cast<std::size_t>(top + 1), 0.0);
  for (i64 m = 1; m <= top; ++m)
    v[static_cast<std::size_t>(m)] =
        spec.phi.at_positive(m) * static_cast<double>(spec.k_weight(static_cast<long double>(m)));
  return v;
}

std::complex<double> twisted_sum(const std::vector<std::complex<double>>& lk, const DirichletCharacter& w) {
  CompensatedSum<cld> acc;
  for (std::size_t m = 1; m < lk.size(); ++m)
    if (lk[m] != 0.0) acc.add(to_ld(lk[m] * w(static_cast<i64>(m))));
  return to_d(acc.value());
}

}  // namespace

AmplifierMoment amplifier_moment(const AmplifierSpec& spec) {
  check_amplifier(spec);
  const auto lk = weighted_coefficients(spec);
  const auto omegas = CharacterGroup(spec.q).primitive();
  AmplifierMoment out;
  out.per_character.resize(omegas.size());
  parallel_for(omegas.size(), [&](std::size_t i) {
    const auto& w = omegas[i];
    std::complex<double> amp = 0;
    for (int l = 1; l <= spec.L_amp; ++l) amp += std::conj(spec.chi(l)) * w(l);
    out.per_character[i] = {w.label(), twisted_sum(lk, w), std::norm(amp)};
  });
  // ordered reduction by character label
  CompensatedSum<long double> S;
  for (const auto& c : out.per_character) {
    const long double term = static_cast<long double>(c.amplifier) * std::norm(c.S_omega);
    S.add(term);
    if (c.label == spec.chi.label()) out.target_term = static_cast<double>(term);
  }
  out.S = static_cast<double>(S.value());
  return out;
}

std::vector<std::complex<double>> amplifier_coefficients(const AmplifierSpec& spec) {
  check_amplifier(spec);
  const auto lk = weighted_coefficients(spec);
  const i64 N = static_cast<i64>(std::floor(2 * spec.L_amp * spec.M));
  std::vector<cld> a(static_cast<std::size_t>(N + 1), 0);
  for (int l = 1; l <= spec.L_amp; ++l) {
    const auto c = to_ld(std::conj(spec.chi(l)));
    if (c == 0.0L) continue;
    for (std::size_t m = 1; m < lk.size(); ++m) a[static_cast<std::size_t>(l) * m] += c * to_ld(lk[m]);
  }
  std::vector<std::complex<double>> out(a.size());
  for (std::size_t n = 0; n < a.size(); ++n) out[n] = to_d(a[n]);
  return out;
}

OffDiagonal amplifier_offdiagonal(const AmplifierSpec& spec) {
  const auto a = amplifier_coefficients(spec);
  OffDiagonal out;
  out.N = static_cast<i64>(a.size()) - 1;
  const std::size_t N = a.size() - 1;

  auto conv = [&](std::size_t h) {
    CompensatedSum<cld> acc;
    for (std::size_t n = 1; n + h <= N; ++n) acc.add(to_ld(a[n + h] * std::conj(a[n])));
    return to_d(acc.value());
  };
  out.D0 = conv(0).real();
  CompensatedSum<long double> sq;
  for (std::size_t n = 1; n <= N; ++n) sq.add(std::norm(to_ld(a[n])));
  out.D0_direct = static_cast<double>(sq.value());
  out.D.resize(N);
  parallel_for(N, [&](std::size_t i) { out.D[i] = conv(i + 1); });

  // second route: D(h) = sum_{l1, l2} conj(chi(l1)) chi(l2) sum_{l1 m1 - l2 m2 = h} lambda(m1) conj(lambda(m2)) k(m1) k(m2)
  const auto psi = contragredient(spec.phi);
  const SmoothWeight1D k = spec.k_weight;
  out.D_shifted.assign(N, 0.0);
  parallel_for(N, [&](std::size_t i) {
    const i64 h = static_cast<i64>(i + 1);
    CompensatedSum<cld> acc;
    for (i64 l1 = 1; l1 <= spec.L_amp; ++l1)
      for (i64 l2 = 1; l2 <= spec.L_amp; ++l2) {
        const auto c = std::conj(spec.chi(l1)) * spec.chi(l2);
        const i64 g = gcd(l1, l2);
        if (c == 0.0 || h % g != 0) continue;
        ShiftedSumSpec ss;
        ss.a = l1 / g;
        ss.b = l2 / g;
        ss.h = h / g;
        ss.sign = -1;
        ss.phi = spec.phi;
        ss.psi = psi;
        const long double A = static_cast<long double>(ss.a), B = static_cast<long double>(ss.b);
        ss.f = SmoothWeight2D([k, A, B](long double x, long double y) { return k(x / A) * k(y / B); },
                              {static_cast<double>(A) * k.lo(), static_cast<double>(A) * k.hi(),
                               static_cast<double>(B) * k.lo(), static_cast<double>(B) * k.hi()},
                              "amplifier-pair");
        acc.add(to_ld(c * shifted_sum_direct(ss)));
      }
    out.D_shifted[i] = to_d(acc.value());
  });
  for (std::size_t i = 0; i < N; ++i)
    out.max_route_difference = std::max(out.max_route_difference, std::abs(out.D[i] - out.D_shifted[i]));

  // h and -h both appear; D(-h) = conj(D(h))
  long double rhs = out.D0;
  for (std::size_t h = static_cast<std::size_t>(spec.q); h <= N; h += static_cast<std::size_t>(spec.q))
    rhs += 2 * static_cast<long double>(out.D[h - 1].real());
  out.rhs = static_cast<double>(static_cast<long double>(euler_phi(spec.q)) * rhs);
  return out;
}

ParsevalCheck parseval_check(const AmplifierSpec& spec) {
  check_amplifier(spec);
  const auto lk = weighted_coefficients(spec);
  const auto all = CharacterGroup(spec.q).all();
  std::vector<double> norms(all.size());
  parallel_for(all.size(), [&](std::size_t i) { norms[i] = std::norm(twisted_sum(lk, all[i])); });
  ParsevalCheck out;
  CompensatedSum<long double> l, r;
  for (const double v : norms) l.add(v);
  std::vector<cld> by_residue(static_cast<std::size_t>(spec.q), 0);
  for (std::size_t m = 1; m < lk.size(); ++m) by_residue[m % static_cast<std::size_t>(spec.q)] += to_ld(lk[m]);
  for (i64 res = 0; res < spec.q; ++res)
    if (gcd(res, spec.q) == 1) r.add(std::norm(by_residue[static_cast<std::size_t>(res)]));
  out.lhs = static_cast<double>(l.value());
  out.rhs = static_cast<double>(static_cast<long double>(euler_phi(spec.q)) * r.value());
  return out;
}

SweepTable subconvexity_sweep(const CoefficientSource& phi, i64 q_lo, i64 q_hi, std::complex<double> s,
                              bool prime_powers, AfeWeight weight) {
  SweepTable table;
  for (i64 q = std::max<i64>(q_lo, 2); q <= q_hi; ++q) {
    if (gcd(q, phi.level) != 1) continue;
    const auto f = factorize(q);
    if (f.size() != 1 || (!prime_powers && f.front().second != 1)) continue;
    const auto values = afe_lvalues_mod(phi, q, s, weight);
    if (values.empty()) continue;
    SweepRow row;
    row.q = q;
    for (const auto& v : values)
      if (std::abs(v.result.value) > row.max_abs) {
        row.max_abs = std::abs(v.result.value);
        row.argmax = v.label;
      }
    row.sqrt_q = std::sqrt(static_cast<double>(q));
    row.subconvex = std::pow(static_cast<double>(q), 0.5 - 1.0 / 54);
    table.rows.push_back(row);
  }
  // rows whose maximum vanishes (every character with root number -1 and a
  // forced zero, as for q = 3) stay in the table but not in the fit
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : table.rows)
    if (r.max_abs > 1e-10) pts.emplace_back(std::log(static_cast<double>(r.q)), std::log(r.max_abs));
  table.fitted = pts.size();
  const std::size_t n = pts.size();
  if (n >= 2) {
    double mx = 0, my = 0;
    for (const auto& [x, y] : pts) {
      mx += x;
      my += y;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (const auto& [x, y] : pts) {
      sxx += (x - mx) * (x - mx);
      sxy += (x - mx) * (y - my);
    }
    if (sxx > 0) {
      table.slope = sxy / sxx;
      table.intercept = my - *table.slope * mx;
      if (n >= 3) {
        double ssr = 0;
        for (const auto& [x, y] : pts) {
          const double e = y - *table.intercept - *table.slope * x;
          ssr += e * e;
        }
        const double se = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
        const boost::math::students_t dist(static_cast<double>(n - 2));
        const double tq = boost::math::quantile(boost::math::complement(dist, (1 - table.confidence) / 2));
        table.ci_low = *table.slope - tq * se;
        table.ci_high = *table.slope + tq * se;
      }
    }
  }
  return table;
}

}  // namespace shiftconv
