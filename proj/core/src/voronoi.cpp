#include "shiftconv/voronoi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "shiftconv/error.hpp"
#include "shiftconv/parallel.hpp"
#include "shiftconv/quadrature.hpp"

namespace shiftconv {
namespace {

constexpr long double kPi = std::numbers::pi_v<long double>;
constexpr long double kEpsLd = std::numeric_limits<long double>::epsilon();

std::complex<long double> i_power(int k) {
  switch (mod_reduce(k, 4)) {
    case 0: return {1, 0};
    case 1: return {0, 1};
    case 2: return {-1, 0};
    default: return {0, -1};
  }
}

std::complex<double> to_double(std::complex<long double> z) {
  return {static_cast<double>(z.real()), static_cast<double>(z.imag())};
}

std::complex<long double> to_ld(std::complex<double> z) { return {z.real(), z.imag()}; }

std::vector<double> split_points(const SmoothWeight1D& g) {
  std::vector<double> cuts{g.lo()};
  for (const double k : g.knots)
    if (k > g.lo() && k < g.hi()) cuts.push_back(k);
  cuts.push_back(g.hi());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  return cuts;
}

}  // namespace

BesselTransform::BesselTransform(SmoothWeight1D g, i64 q, KernelSpec kernel, TransformOptions opts)
    : BesselTransform(std::vector<SmoothWeight1D>{std::move(g)}, q, kernel, opts) {}

BesselTransform::BesselTransform(std::vector<SmoothWeight1D> gs, i64 q, KernelSpec kernel, TransformOptions opts)
    : gs_(std::move(gs)), q_(q), kernel_(kernel), opts_(opts) {
  if (q < 1) throw DomainError("BesselTransform: q must be >= 1");
  if (gs_.empty()) throw DomainError("BesselTransform: no weights");
  const SmoothWeight1D* ref = nullptr;
  std::vector<double> cuts;
  for (const auto& g : gs_) {
    if (g.is_zero()) continue;
    if (!(g.lo() > 0)) throw DomainError("BesselTransform: weight must be supported in (0, inf)");
    if (!ref) {
      ref = &g;
    } else if (g.lo() != ref->lo() || g.hi() != ref->hi()) {
      throw DomainError("BesselTransform: weights in one batch must share their support");
    }
    for (const double c : split_points(g)) cuts.push_back(c);
  }
  if (!ref) return;
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    pieces_.emplace_back(std::sqrt(static_cast<long double>(cuts[i])), std::sqrt(static_cast<long double>(cuts[i + 1])));
  levels_.resize(pieces_.size());
}

const BesselTransform::Level& BesselTransform::level(std::size_t piece, int lev) const {
  std::lock_guard lock(mutex_);
  auto& slots = levels_[piece];
  if (slots.size() <= static_cast<std::size_t>(lev)) slots.resize(static_cast<std::size_t>(lev) + 1);
  auto& slot = slots[static_cast<std::size_t>(lev)];
  if (!slot) {
    auto L = std::make_unique<Level>();
    const auto& rule = gauss_legendre(opts_.gl_points);
    const long panels = 1L << lev;
    const auto [a, b] = pieces_[piece];
    const long double h = (b - a) / panels;
    L->gw.resize(gs_.size());
    for (long p = 0; p < panels; ++p) {
      const long double mid = a + h * p + h / 2;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const long double u = mid + h / 2 * rule.nodes[i];
        L->u.push_back(u);
        for (std::size_t w = 0; w < gs_.size(); ++w)
          L->gw[w].push_back(h / 2 * rule.weights[i] * gs_[w](u * u) * 2 * u);
      }
    }
    slot = std::move(L);
  }
  return *slot;
}

void BesselTransform::integrals(long double y, Value* out) const {
  const std::size_t W = gs_.size();
  for (std::size_t w = 0; w < W; ++w) out[w] = {};
  if (pieces_.empty()) return;
  if (!(y > 0)) throw DomainError("BesselTransform: y must be positive");
  const long double c = 4 * kPi * std::sqrt(y) / static_cast<long double>(q_);
  std::vector<long double> noise_sq(W, 0), K, amp_sq;
  const long double span = pieces_.back().second - pieces_.front().first;
  const KernelTable& table = kernel_table(kernel_);
  for (std::size_t p = 0; p < pieces_.size(); ++p) {
    const auto [a, b] = pieces_[p];
    const double oscillations = static_cast<double>((b - a) * c / (2 * kPi)) +
                                opts_.extra_oscillations * static_cast<double>((b - a) / span);
    const double needed = opts_.panels_per_oscillation * oscillations + static_cast<double>(opts_.base_panels);
    const int lev = std::max(0, static_cast<int>(std::ceil(std::log2(needed))));
    const auto& L = level(p, lev);
    const std::size_t n = L.u.size();
    K.resize(n);
    amp_sq.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const long double x = c * L.u[i];
      K[i] = table(x);
      const long double amp = (std::abs(K[i]) + 1 / std::sqrt(1 + x)) * (1 + x) * kEpsLd;
      amp_sq[i] = amp * amp;
    }
    // plain long double dot products; the 11 spare bits cover the rounding
    // of a few thousand terms
    for (std::size_t w = 0; w < W; ++w) {
      const long double* gw = L.gw[w].data();
      long double s = 0, e = 0;
      for (std::size_t i = 0; i < n; ++i) {
        s += gw[i] * K[i];
        e += gw[i] * gw[i] * amp_sq[i];
      }
      out[w].integral += s;
      noise_sq[w] += e;
    }
  }
  for (std::size_t w = 0; w < W; ++w) out[w].noise = std::sqrt(noise_sq[w]);
}

BesselTransform::Value BesselTransform::integral(long double y) const {
  std::vector<Value> v(gs_.size());
  integrals(y, v.data());
  return v.front();
}

std::function<std::complex<double>(double)> transform_g_hat(const SmoothWeight1D& g, i64 q, int k,
                                                            TransformOptions opts) {
  if (k < 1) throw DomainError("transform_g_hat: weight k must be >= 1");
  auto T = std::make_shared<BesselTransform>(g, q, KernelSpec::J(k - 1), opts);
  const std::complex<long double> pref = 2 * kPi * i_power(k) / static_cast<long double>(q);
  return [T, pref](double y) { return to_double(pref * T->integral(y).integral); };
}

std::function<double(double)> transform_g_pm(const SmoothWeight1D& g, i64 q, double mu, int sign,
                                              TransformOptions opts) {
  if (mu < 0) throw DomainError("transform_g_pm: mu must be >= 0");
  const auto spec = sign > 0 ? KernelSpec::Mplus(mu) : KernelSpec::Mminus(mu);
  auto T = std::make_shared<BesselTransform>(g, q, spec, opts);
  const long double qq = static_cast<long double>(q);
  return [T, qq](double y) { return static_cast<double>(T->integral(y).integral / qq); };
}

BranchSigns branch_signs(DualBranch b) {
  // the one place the dual-side signs are written down
  switch (b) {
    case DualBranch::J: return {KernelFamily::J, +1, -1};
    case DualBranch::Minus: return {KernelFamily::Mminus, +1, -1};
    case DualBranch::Plus: return {KernelFamily::Mplus, -1, +1};
  }
  throw DomainError("unknown dual branch");
}

std::string to_string(DualBranch b) {
  switch (b) {
    case DualBranch::J: return "J";
    case DualBranch::Minus: return "-";
    case DualBranch::Plus: return "+";
  }
  return "?";
}

std::vector<DualBranch> dual_branches(const CoefficientSource& src) {
  if (src.kind == FormKind::Holomorphic) return {DualBranch::J};
  return {DualBranch::Minus, DualBranch::Plus};
}

std::complex<double> voronoi_lhs(const CoefficientSource& src, i64 d, i64 q, const SmoothWeight1D& g) {
  if (g.is_zero()) return 0.0;
  const i64 m_lo = static_cast<i64>(std::ceil(g.lo())), m_hi = static_cast<i64>(std::floor(g.hi()));
  src.require(m_hi, "Voronoi left side");
  const auto chi = src.nebentypus_character();
  const std::size_t n = static_cast<std::size_t>(std::max<i64>(0, m_hi - std::max<i64>(1, m_lo) + 1));
  const i64 first = std::max<i64>(1, m_lo);
  const auto sum = deterministic_sum<std::complex<long double>>(n, [&](std::size_t j) {
    const i64 m = first + static_cast<i64>(j);
    const long double w = g(static_cast<long double>(m));
    if (w == 0) return std::complex<long double>(0);
    return to_ld(src.at_positive(m)) * e_q_ld(static_cast<i64>(static_cast<i128>(d) * m % q), q) * w;
  });
  return to_double(sum * to_ld(chi(d)));
}

double divisor_voronoi_main_term(const SmoothWeight1D& g, i64 q) {
  if (g.is_zero()) return 0;
  const long double qq = static_cast<long double>(q);
  auto f = [&](long double x) { return (std::log(x / (qq * qq)) + 2 * static_cast<long double>(kEulerGamma)) * g(x); };
  const auto cuts = split_points(g);
  long double s = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    s += adaptive_gauss<long double>(f, cuts[i], cuts[i + 1], 1e-18, 1e-16, 20, 8).value;
  return static_cast<double>(s / qq);
}

DualSeries dual_series(const CoefficientSource& src, i64 q, const std::vector<SmoothWeight1D>& gs, double scale,
                       const VoronoiOptions& opts) {
  if (q < 1) throw DomainError("dual series: q must be >= 1");
  DualSeries out;
  out.q = q;
  out.branches = dual_branches(src);
  const std::size_t W = gs.size(), nb = out.branches.size();
  out.values.assign(W, std::vector<std::vector<std::complex<long double>>>(nb, std::vector<std::complex<long double>>(1)));
  out.main_term.assign(W, 0.0);
  if (src.kind == FormKind::Divisor)
    for (std::size_t w = 0; w < W; ++w) out.main_term[w] = divisor_voronoi_main_term(gs[w], q);
  if (std::all_of(gs.begin(), gs.end(), [](const SmoothWeight1D& g) { return g.is_zero(); })) return out;

  std::vector<std::unique_ptr<BesselTransform>> T;
  std::vector<std::complex<long double>> pref;
  for (const auto b : out.branches) {
    const auto sg = branch_signs(b);
    const KernelSpec spec = sg.family == KernelFamily::J       ? KernelSpec::J(src.weight - 1)
                            : sg.family == KernelFamily::Mplus ? KernelSpec::Mplus(src.mu)
                                                               : KernelSpec::Mminus(src.mu);
    T.push_back(std::make_unique<BesselTransform>(gs, q, spec, opts.transform));
    pref.push_back(sg.family == KernelFamily::J ? 2 * kPi * i_power(src.weight) / static_cast<long double>(q)
                                                : std::complex<long double>(1.0L / static_cast<long double>(q)));
  }

  const i64 cap = opts.m_cap > 0 ? std::min(opts.m_cap, src.m_max()) : src.m_max();
  std::vector<long double> rule_term(1, 0), noise(1, 0);
  long double sum_sq = 0;  // running sum of |lambda|^2 for the local average

  auto extend_to = [&](i64 m_target) {
    const i64 m0 = static_cast<i64>(rule_term.size());
    if (m_target < m0) return;
    const std::size_t n = static_cast<std::size_t>(m_target - m0 + 1);
    std::vector<BesselTransform::Value> block(n * nb * W);
    parallel_for(n * nb, [&](std::size_t idx) {
      const std::size_t b = idx % nb, j = idx / nb;
      T[b]->integrals(static_cast<long double>(m0 + static_cast<i64>(j)), &block[(j * nb + b) * W]);
    });
    for (std::size_t j = 0; j < n; ++j) {
      const i64 m = m0 + static_cast<i64>(j);
      sum_sq += std::norm(src.at_positive(m));
      const long double avg = std::sqrt(sum_sq / static_cast<long double>(m));
      long double mag = 0, nz = 0;
      for (std::size_t w = 0; w < W; ++w) {
        long double mw = 0, nw = 0;
        for (std::size_t b = 0; b < nb; ++b) {
          const auto& v = block[(j * nb + b) * W + w];
          out.values[w][b].push_back(pref[b] * v.integral);
          mw += std::abs(pref[b]) * std::abs(v.integral);
          nw += std::abs(pref[b]) * v.noise;
        }
        mag = std::max(mag, mw);
        nz = std::max(nz, nw);
      }
      rule_term.push_back(mag * avg * static_cast<long double>(m));
      noise.push_back(16 * nz * avg * static_cast<long double>(m));
    }
  };

  i64 m_cut = opts.m_cut;
  if (m_cut > 0) {
    if (m_cut > src.m_max()) throw CoefficientShortfall("Voronoi dual side", m_cut, src.m_max());
    extend_to(m_cut);
  } else {
    // smallest m after which the rule quantity stays below threshold for a
    // window of max(32, m/4) further terms
    const long double thr = static_cast<long double>(opts.cut_tolerance * scale);
    i64 computed = 0, block = 64, candidate = 0;
    while (out.m_rule == 0) {
      const i64 next = std::min(cap, computed + block);
      if (next <= computed) {
        long double tail = 0;
        for (i64 m = std::max<i64>(1, computed - 32); m <= computed; ++m)
          tail = std::max(tail, rule_term[static_cast<std::size_t>(m)]);
        const std::string msg =
            "Voronoi truncation rule not met (measured tail " + std::to_string(static_cast<double>(tail)) + ")";
        if (cap == src.m_max()) throw CoefficientShortfall(msg, computed + 1, src.m_max());
        throw ToleranceError(msg + " within m_cap", static_cast<double>(tail));
      }
      extend_to(next);
      for (i64 m = computed + 1; m <= next; ++m) {
        const auto idx = static_cast<std::size_t>(m);
        if (rule_term[idx] > std::max(thr, noise[idx])) candidate = 0;
        else if (candidate == 0) candidate = m;
      }
      computed = next;
      if (candidate > 0 && computed - candidate + 1 >= std::max<i64>(32, candidate / 4)) out.m_rule = candidate;
      block = std::max<i64>(64, computed / 2);
    }
    m_cut = 2 * out.m_rule;
    if (m_cut > src.m_max()) throw CoefficientShortfall("Voronoi dual side (doubled cut)", m_cut, src.m_max());
    extend_to(m_cut);
  }
  for (auto& per_w : out.values)
    for (auto& v : per_w) v.resize(static_cast<std::size_t>(m_cut) + 1);
  out.m_cut = m_cut;

  long double tail = 0;
  for (i64 m = std::max<i64>(1, m_cut - std::max<i64>(32, m_cut / 8)); m <= m_cut; ++m)
    tail = std::max(tail, rule_term[static_cast<std::size_t>(m)]);
  out.tail_estimate = static_cast<double>(tail);
  return out;
}

std::complex<long double> dual_sum(const DualSeries& ds, const CoefficientSource& src, i64 dbar, std::size_t w) {
  const i64 q = ds.q;
  std::vector<BranchSigns> sg;
  for (const auto b : ds.branches) sg.push_back(branch_signs(b));
  const auto sum = deterministic_sum<std::complex<long double>>(static_cast<std::size_t>(ds.m_cut), [&](std::size_t j) {
    const i64 m = static_cast<i64>(j) + 1;
    const i64 ph = static_cast<i64>(static_cast<i128>(dbar) * m % q);
    std::complex<long double> t = 0;
    for (std::size_t b = 0; b < sg.size(); ++b)
      t += to_ld(src(sg[b].coefficient_sign * m)) * e_q_ld(sg[b].phase_sign * ph, q) * ds.values[w][b][j + 1];
    return t;
  });
  return sum + static_cast<long double>(ds.main_term[w]);
}

std::vector<VoronoiResult> voronoi_residuals(const CoefficientSource& src, i64 q, const std::vector<i64>& ds,
                                             const SmoothWeight1D& g, const VoronoiOptions& opts) {
  if (q < 1) throw DomainError("Voronoi: q must be >= 1");
  if (q % src.level != 0)
    throw DomainError("Voronoi: level " + std::to_string(src.level) + " must divide q=" + std::to_string(q));
  for (const i64 d : ds)
    if (gcd(mod_reduce(d, q), q) != 1) throw DomainError("Voronoi: gcd(d, q) must be 1, d=" + std::to_string(d));

  const bool divisor = src.kind == FormKind::Divisor;
  std::string kernel;
  for (const auto b : dual_branches(src)) {
    const auto f = branch_signs(b).family;
    if (!kernel.empty()) kernel += ",";
    kernel += to_string(f == KernelFamily::J       ? KernelSpec::J(src.weight - 1)
                        : f == KernelFamily::Mplus ? KernelSpec::Mplus(src.mu)
                                                   : KernelSpec::Mminus(src.mu));
  }
  std::vector<VoronoiResult> out(ds.size());
  double scale = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    out[i].q = q;
    out[i].d = ds[i];
    out[i].divisor_analog = divisor;
    out[i].kernel = kernel;
    out[i].lhs = voronoi_lhs(src, ds[i], q, g);
    scale = std::max(scale, std::abs(out[i].lhs));
  }
  if (g.is_zero()) return out;
  if (divisor) scale = std::max(scale, std::abs(divisor_voronoi_main_term(g, q)));

  const auto series = dual_series(src, q, {g}, scale, opts);
  for (auto& r : out) {
    const i64 dbar = mod_inverse(r.d, q).value;
    r.rhs = to_double(dual_sum(series, src, dbar, 0));
    r.main_term = series.main_term[0];
    r.m_cut = series.m_cut;
    r.m_rule = series.m_rule;
    r.tail_estimate = series.tail_estimate;
    r.residual = std::abs(r.lhs - r.rhs) / std::max(std::abs(r.lhs), 1e-12);
  }
  return out;
}

VoronoiResult voronoi_residual(const CoefficientSource& src, i64 d, i64 q, const SmoothWeight1D& g,
                               const VoronoiOptions& opts) {
  return voronoi_residuals(src, q, {d}, g, opts).front();
}

}  // namespace shiftconv
