#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <memory>
#include <nlohmann/json.hpp>
#include <optional>
#include <random>
#include <sstream>

#include "shiftconv/arith.hpp"
#include "shiftconv/characters.hpp"
#include "shiftconv/coeffs.hpp"
#include "shiftconv/error.hpp"
#include "shiftconv/expsums.hpp"
#include "shiftconv/jutila.hpp"
#include "shiftconv/lfun.hpp"
#include "shiftconv/parallel.hpp"
#include "shiftconv/shifted.hpp"
#include "shiftconv/version.hpp"
#include "shiftconv/voronoi.hpp"
#include "shiftconv/weights.hpp"

namespace shiftconv::cli {
namespace {

using json = nlohmann::ordered_json;

json cjson(std::complex<double> z) { return json::array({z.real(), z.imag()}); }

// Options are bound to plain variables; each registration also keeps a
// getter so the resolved configuration can be written back verbatim.
class Params {
 public:
  template <typename T>
  CLI::Option* add(CLI::App* app, const std::string& flag, T& var, const std::string& desc) {
    getters_[app].emplace_back(key(flag), [&var] { return json(var); });
    return app->add_option(flag, var, desc)->capture_default_str();
  }
  CLI::Option* flag(CLI::App* app, const std::string& flag, bool& var, const std::string& desc) {
    getters_[app].emplace_back(key(flag), [&var] { return json(var); });
    return app->add_flag(flag, var, desc);
  }
  void extra(CLI::App* app, const std::string& name, std::function<json()> get) {
    getters_[app].emplace_back(name, std::move(get));
  }
  json resolved(CLI::App* app) const {
    json j = json::object();
    const auto it = getters_.find(app);
    if (it != getters_.end())
      for (const auto& [k, g] : it->second) j[k] = g();
    return j;
  }

 private:
  static std::string key(const std::string& flag) {
    std::string k = flag.substr(0, flag.find(','));
    while (!k.empty() && k.front() == '-') k.erase(k.begin());
    return k;
  }
  std::map<CLI::App*, std::vector<std::pair<std::string, std::function<json()>>>> getters_;
};

struct Report {
  json summary = json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
  std::optional<json> failure;

  void row(std::vector<json> r) { rows.push_back(std::move(r)); }
  void fail(const std::string& reason, json witness = json::object()) {
    if (!failure) failure = json{{"reason", reason}, {"witness", std::move(witness)}};
  }
};

// ---------------------------------------------------------------------------
// coefficient sources

struct SourceArgs {
  std::string form = "delta";  // delta | divisor | file
  std::string coef;            // path, form = file
  i64 mmax = 0;                // 0: sized automatically
};

void add_source(Params& P, CLI::App* app, SourceArgs& s, const std::string& prefix, const std::string& def) {
  s.form = def;
  P.add(app, "--" + prefix + "form", s.form, "coefficient source: delta, divisor or file")
      ->check(CLI::IsMember({"delta", "divisor", "file"}));
  P.add(app, "--" + prefix + "coef", s.coef, "coefficient file (with form = file)");
  P.add(app, "--" + prefix + "mmax", s.mmax, "coefficients to generate (0: grow until enough)");
}

CoefficientSource make_source(const SourceArgs& s, i64 mmax) {
  if (s.form == "delta") return delta_coefficients(mmax);
  if (s.form == "divisor") return divisor_analog(mmax);
  if (s.coef.empty()) throw DomainError("form = file needs a coefficient file");
  return load_coefficients(s.coef);
}

// Runs f(sources...) and, for generated sources of automatic length, retries
// with more coefficients when one of them runs short.
template <typename F>
auto with_sources(std::vector<const SourceArgs*> args, i64 initial, F&& f) {
  std::vector<i64> len;
  for (const auto* a : args) len.push_back(a->mmax > 0 ? a->mmax : initial);
  for (;;) {
    std::vector<CoefficientSource> src;
    for (std::size_t i = 0; i < args.size(); ++i) src.push_back(make_source(*args[i], len[i]));
    try {
      return f(src);
    } catch (const CoefficientShortfall& e) {
      bool grown = false;
      for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i]->form == "file" || args[i]->mmax > 0) continue;
        const i64 want = std::max<i64>(e.required() + e.required() / 4 + 16, 2 * len[i]);
        if (want > i64{1} << 27) continue;
        len[i] = want;
        grown = true;
      }
      if (!grown) throw;
    }
  }
}

json source_json(const CoefficientSource& s) {
  return json{{"kind", to_string(s.kind)}, {"level", s.level}, {"weight", s.weight},
              {"mu", s.mu},                {"m_max", s.m_max()}, {"header", coefficient_header(s)}};
}

std::vector<i64> coprime_residues(i64 q) {
  std::vector<i64> ds;
  for (i64 d = 1; d <= q; ++d)
    if (gcd(d, q) == 1) ds.push_back(d);
  return ds;
}

// ---------------------------------------------------------------------------
// commands

using Command = std::function<Report()>;

Command voronoi_check(Params& P, CLI::App* app) {
  struct A {
    SourceArgs src;
    std::vector<i64> q{1, 2, 3, 5, 7};
    std::vector<double> A{100, 1000, 10000};
    std::vector<i64> d;
    double tol = 1e-6, cut_tol = 1e-10;
  };
  auto a = std::make_shared<A>();
  add_source(P, app, a->src, "", "delta");
  P.add(app, "--q", a->q, "moduli (each a multiple of the level)");
  P.add(app, "--A", a->A, "bump weights rho(x/A) on [A, 2A]");
  P.add(app, "--d", a->d, "residues d (default: every d coprime to q)");
  P.add(app, "--tol", a->tol, "largest accepted relative residual");
  P.add(app, "--cut-tol", a->cut_tol, "dual-sum truncation tolerance");
  app->footer("CSV columns: q,d,A,lhs_re,lhs_im,rhs_re,rhs_im,residual,m_cut,m_rule,tail,kernel");
  return [a] {
    Report r;
    r.columns = {"q", "d", "A", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "residual", "m_cut", "m_rule", "tail", "kernel"};
    const double A_max = *std::max_element(a->A.begin(), a->A.end());
    const i64 q_max = *std::max_element(a->q.begin(), a->q.end());
    json src_info;
    double worst = 0;
    json argmax = json::object();
    with_sources({&a->src}, std::max<i64>(static_cast<i64>(4 * A_max), 64 * q_max * q_max), [&](auto& src) {
      r.rows.clear();
      worst = 0;
      src_info = source_json(src[0]);
      VoronoiOptions opts;
      opts.cut_tolerance = a->cut_tol;
      for (const i64 q : a->q) {
        std::vector<i64> ds;
        for (const i64 d : a->d.empty() ? coprime_residues(q) : a->d)
          if (gcd(d, q) == 1) ds.push_back(d);
        for (const double A : a->A) {
          for (const auto& v : voronoi_residuals(src[0], q, ds, bump_weight(A), opts)) {
            r.row({q, v.d, A, v.lhs.real(), v.lhs.imag(), v.rhs.real(), v.rhs.imag(), v.residual, v.m_cut, v.m_rule,
                   v.tail_estimate, v.kernel});
            if (!(v.residual <= worst)) {
              worst = v.residual;
              argmax = json{{"q", q}, {"d", v.d}, {"A", A}};
            }
          }
        }
      }
      return 0;
    });
    r.summary["source"] = src_info;
    r.summary["checks"] = r.rows.size();
    r.summary["max_residual"] = worst;
    r.summary["argmax"] = argmax;
    if (src_info["kind"] == "divisor") r.summary["note"] = "divisor analog: not a cusp form, main term included";
    if (!(worst < a->tol)) r.fail("Voronoi residual above tolerance", json{{"residual", worst}, {"tol", a->tol}, {"at", argmax}});
    return r;
  };
}

Command jutila_l2(Params& P, CLI::App* app) {
  struct A {
    std::vector<double> Q{100};
    std::vector<double> delta;
    std::vector<double> delta_exp;
    std::string moduli = "full";  // full | filtered | both
    i64 N = 1, a = 2, b = 3, h = 1;
    double factor = 10;
  };
  auto a = std::make_shared<A>();
  P.add(app, "--Q", a->Q, "Q values (2Q <= 10^4)");
  P.add(app, "--delta", a->delta, "explicit delta values");
  P.add(app, "--delta-exp", a->delta_exp, "delta = Q^e for each e (used when --delta is empty; default -2 -1.5 -1)");
  P.add(app, "--moduli", a->moduli, "full: all q in [Q, 2Q]; filtered: Nab | q, (h, q) = (h, Nab); both")
      ->check(CLI::IsMember({"full", "filtered", "both"}));
  P.add(app, "--N", a->N, "level for the filtered set");
  P.add(app, "--a", a->a, "a for the filtered set");
  P.add(app, "--b", a->b, "b for the filtered set");
  P.add(app, "--shift", a->h, "h for the filtered set");
  P.add(app, "--factor", a->factor, "accepted l2 / (delta^-1 L^-2 Q^2.1)");
  app->footer("CSV columns: Q,delta,moduli,count,L,l2,bound,ratio,mass_exact,breakpoints");
  return [a] {
    Report r;
    r.columns = {"Q", "delta", "moduli", "count", "L", "l2", "bound", "ratio", "mass_exact", "breakpoints"};
    double worst = 0;
    for (const double Q : a->Q) {
      std::vector<double> deltas = a->delta;
      if (deltas.empty()) {
        const std::vector<double> ex = a->delta_exp.empty() ? std::vector<double>{-2, -1.5, -1} : a->delta_exp;
        for (const double e : ex) deltas.push_back(std::pow(Q, e));
      }
      for (const double delta : deltas) {
        std::vector<std::string> kinds;
        if (a->moduli != "filtered") kinds.push_back("full");
        if (a->moduli != "full") kinds.push_back("filtered");
        for (const auto& kind : kinds) {
          const JutilaScheme s =
              kind == "full" ? build_full_scheme(Q, delta) : build_scheme(Q, delta, a->N, a->a, a->b, a->h);
          const L2Report l2 = l2_error(s);
          r.row({Q, delta, kind, s.moduli.size(), s.L, l2.l2, l2.bound, l2.ratio, l2.mass_exact, l2.breakpoints});
          worst = std::max(worst, l2.ratio);
          if (!(l2.ratio <= a->factor))
            r.fail("l2 error above bound", json{{"Q", Q}, {"delta", delta}, {"moduli", kind}, {"ratio", l2.ratio}});
          if (!l2.mass_exact) r.fail("approximant mass is not exactly 1", json{{"Q", Q}, {"delta", delta}, {"moduli", kind}});
        }
      }
    }
    r.summary["schemes"] = r.rows.size();
    r.summary["max_ratio"] = worst;
    r.summary["factor"] = a->factor;
    return r;
  };
}

// Box (or dyadic) weighted shifted-sum spec shared by shifted-sum and shifted-compare.
struct SumArgs {
  SourceArgs phi, psi;
  i64 a = 1, b = 1, h = 1;
  int sign = -1;
  std::string weight = "box";
  double A = 100, B = 100, P = 1, X = 100, Y = 100;
};

void add_sum_args(Params& P, CLI::App* app, SumArgs& s) {
  add_source(P, app, s.phi, "phi-", "delta");
  add_source(P, app, s.psi, "psi-", "delta");
  P.add(app, "--a", s.a, "a >= 1");
  P.add(app, "--b", s.b, "b >= 1, gcd(a, b) = 1");
  P.add(app, "--shift", s.h, "shift h >= 1");
  P.add(app, "--sign", s.sign, "-1: am - bn = h, +1: am + bn = h")->check(CLI::IsMember({-1, 1}));
  P.add(app, "--weight", s.weight, "box: rho(x/A) rho(y/B) modulated by P; dyadic: scales X, Y")
      ->check(CLI::IsMember({"box", "dyadic"}));
  P.add(app, "--A", s.A, "box scale in x");
  P.add(app, "--B", s.B, "box scale in y");
  P.add(app, "--P", s.P, "oscillation parameter P >= 1");
  P.add(app, "--X", s.X, "dyadic scale in x");
  P.add(app, "--Y", s.Y, "dyadic scale in y");
}

ShiftedSumSpec make_sum(const SumArgs& s, const CoefficientSource& phi, const CoefficientSource& psi) {
  ShiftedSumSpec spec;
  spec.a = s.a;
  spec.b = s.b;
  spec.h = s.h;
  spec.sign = s.sign;
  spec.phi = phi;
  spec.psi = psi;
  spec.f = s.weight == "box" ? make_box_weight(s.A, s.B, s.P) : make_dyadic_weight(s.P, s.X, s.Y);
  spec.validate();
  return spec;
}

i64 sum_initial_length(const SumArgs& s) {
  const double ext = s.weight == "box" ? 2 * std::max(s.A, s.B) : 64 * std::max(s.X, s.Y);
  return static_cast<i64>(ext) + 16;
}

Command shifted_sum(Params& P, CLI::App* app) {
  struct A {
    SumArgs s;
    double tol = 1e-8;
  };
  auto a = std::make_shared<A>();
  add_sum_args(P, app, a->s);
  P.add(app, "--tol", a->tol, "accepted |lattice sum - circle-method integral|");
  app->footer("CSV columns: quantity,re,im");
  return [a] {
    Report r;
    r.columns = {"quantity", "re", "im"};
    with_sources({&a->s.phi, &a->s.psi}, sum_initial_length(a->s), [&](auto& src) {
      const ShiftedSumSpec spec = make_sum(a->s, src[0], src[1]);
      const auto direct = shifted_sum_direct(spec);
      const auto exact = d_exact_by_integral(spec);
      const auto sc = bound_scales(spec);
      const double diff = std::abs(direct - exact);
      r.row({"direct", direct.real(), direct.imag()});
      r.row({"integral", exact.real(), exact.imag()});
      r.summary["phi"] = source_json(spec.phi);
      r.summary["psi"] = source_json(spec.psi);
      r.summary["direct"] = cjson(direct);
      r.summary["integral"] = cjson(exact);
      r.summary["difference"] = diff;
      r.summary["main_bound_scale"] = sc.main_bound;
      r.summary["trivial_scale"] = sc.trivial;
      r.summary["ratio_main_bound"] = std::abs(direct) / sc.main_bound;
      r.summary["ratio_trivial"] = std::abs(direct) / sc.trivial;
      if (spec.phi.kind == FormKind::Divisor && spec.psi.kind == FormKind::Divisor) {
        const auto mt = divisor_main_term(spec);
        r.row({"main_term", mt.value, 0.0});
        r.summary["main_term"] = json{{"value", mt.value},
                                      {"q_max", mt.q_max},
                                      {"tail_bound", mt.tail_bound},
                                      {"doubling_change", mt.doubling_change}};
        r.summary["after_main_term"] = direct.real() - mt.value;
      }
      if (!(diff <= a->tol)) r.fail("lattice sum and integral disagree", json{{"difference", diff}, {"tol", a->tol}});
      return 0;
    });
    return r;
  };
}

Command shifted_compare(Params& P, CLI::App* app) {
  struct A {
    SumArgs s;
    double Q = 4, delta = 0;
    i64 arc_q = 0, arc_d = 0;
    double arc_tol = 1e-5;
    double arc_cut_tol = 1e-3;
  };
  auto a = std::make_shared<A>();
  add_sum_args(P, app, a->s);
  P.add(app, "--Q", a->Q, "circle-method Q (all q in [Q, 2Q])");
  P.add(app, "--delta", a->delta, "arc half-width (0: balanced choice)");
  P.add(app, "--arc-q", a->arc_q, "modulus for the doubly transformed arc (0: skip)");
  P.add(app, "--arc-d", a->arc_d, "residue for the transformed arc (0: sum over all reduced d)");
  P.add(app, "--arc-tol", a->arc_tol, "accepted |transformed - direct| for the arc");
  P.add(app, "--arc-cut-tol", a->arc_cut_tol, "dual-sum truncation tolerance inside the arc");
  app->footer("CSV columns: quantity,re,im");
  return [a] {
    Report r;
    r.columns = {"quantity", "re", "im"};
    with_sources({&a->s.phi, &a->s.psi}, std::max<i64>(sum_initial_length(a->s), 60000), [&](auto& src) {
      r.rows.clear();
      const ShiftedSumSpec spec = make_sum(a->s, src[0], src[1]);
      const double delta = a->delta > 0 ? a->delta : balanced_delta(a->Q, spec.a, spec.b);
      const JutilaScheme sc = build_full_scheme(a->Q, delta);
      const auto direct = shifted_sum_direct(spec);
      const auto dt = d_tilde(spec, sc);
      r.row({"direct", direct.real(), direct.imag()});
      r.row({"d_tilde", dt.value.real(), dt.value.imag()});
      r.summary["Q"] = a->Q;
      r.summary["delta"] = delta;
      r.summary["L"] = sc.L;
      r.summary["arcs"] = dt.arcs;
      r.summary["points_per_arc"] = dt.points_per_arc;
      r.summary["direct"] = cjson(direct);
      r.summary["d_tilde"] = cjson(dt.value);
      r.summary["difference"] = std::abs(direct - dt.value);
      r.summary["approximation_error_scale"] = approximation_error_scale(spec, sc);
      r.summary["arc_remainder_scale"] = arc_remainder_scale(spec, sc);
      if (a->arc_q > 0) {
        ArcTransformOptions opts;
        opts.voronoi.cut_tolerance = a->arc_cut_tol;
        const JutilaScheme arc_scheme = scheme_from_moduli(a->Q, delta, {a->arc_q}, false);
        const ArcTransformReport t = a->arc_d > 0 ? transformed_arc_sum(a->arc_d, a->arc_q, spec, arc_scheme, opts)
                                                  : transformed_arc_sum_over_d(a->arc_q, spec, arc_scheme, opts);
        r.row({"arc_direct", t.direct.real(), t.direct.imag()});
        r.row({"arc_transformed", t.transformed.real(), t.transformed.imag()});
        json branches = json::array();
        for (const auto& b : t.branches)
          branches.push_back(json{{"m", to_string(b.m_branch)}, {"n", to_string(b.n_branch)}, {"value", cjson(b.value)}});
        r.summary["arc"] = json{{"q", a->arc_q},         {"d", a->arc_d ? json(a->arc_d) : json("all")},
                                {"direct", cjson(t.direct)}, {"transformed", cjson(t.transformed)},
                                {"difference", t.difference}, {"m_cut", t.m_cut},
                                {"n_cut", t.n_cut},           {"m_tail", t.m_tail},
                                {"n_tail", t.n_tail},         {"beta_points", t.beta_points},
                                {"branches", branches}};
        if (!(t.difference <= a->arc_tol))
          r.fail("transformed arc disagrees with the direct arc integral",
                 json{{"difference", t.difference}, {"tol", a->arc_tol}});
      }
      return 0;
    });
    return r;
  };
}

Command kloosterman_scan(Params& P, CLI::App* app, const unsigned long long& seed) {
  struct A {
    i64 qmax = 300;
    double tol = 1e-9;
    i64 sample = 0, range = 1000;
  };
  auto a = std::make_shared<A>();
  P.add(app, "--qmax", a->qmax, "scan every q <= qmax");
  P.add(app, "--tol", a->tol, "accepted ratio 1 + tol");
  P.add(app, "--sample", a->sample, "random (m, n) pairs from the seed (0: fixed 20 x 20 grid)");
  P.add(app, "--range", a->range, "random m, n drawn from [-range, range]");
  app->footer("CSV columns: q,character,m,n,abs_sum,bound,ratio (worst row per q)");
  return [a, &seed] {
    Report r;
    r.columns = {"q", "character", "m", "n", "abs_sum", "bound", "ratio"};
    std::vector<std::pair<i64, i64>> grid;
    if (a->sample > 0) {
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<i64> U(-a->range, a->range);
      for (i64 i = 0; i < a->sample; ++i) {
        const i64 m = U(rng);
        grid.emplace_back(m, U(rng));
      }
    } else {
      grid = default_weil_grid();
    }
    // the bound is checked here so the report survives a failing scan
    const WeilScanReport w = scan_weil(a->qmax, grid, 1e300);
    for (const auto& x : w.per_q) r.row({x.q, x.character_label, x.m, x.n, x.abs_sum, x.bound, x.ratio});
    const auto& x = w.worst;
    const json worst{{"q", x.q}, {"character", x.character_label}, {"m", x.m},         {"n", x.n},
                     {"abs_sum", x.abs_sum}, {"bound", x.bound}, {"ratio", x.ratio}};
    r.summary["q_max"] = w.q_max;
    r.summary["sample_size"] = w.sample_size;
    r.summary["evaluations"] = w.evaluations;
    r.summary["max_ratio"] = x.ratio;
    r.summary["worst"] = worst;
    if (!(x.ratio <= 1 + a->tol)) r.fail("Kloosterman sum above the Weil-Estermann bound", worst);
    return r;
  };
}

Command characters(Params& P, CLI::App* app) {
  struct A {
    std::vector<i64> q{12};
    double tol = 1e-9;
  };
  auto a = std::make_shared<A>();
  P.add(app, "--q", a->q, "moduli");
  P.add(app, "--tol", a->tol, "accepted | |g(chi)| - sqrt q | for primitive chi");
  app->footer("CSV columns: q,label,conductor,parity,primitive,real,gauss_re,gauss_im,gauss_abs,deviation");
  return [a] {
    Report r;
    r.columns = {"q", "label", "conductor", "parity", "primitive", "real", "gauss_re", "gauss_im", "gauss_abs",
                 "deviation"};
    double worst = 0;
    std::size_t primitive = 0;
    for (const i64 q : a->q) {
      for (const auto& chi : CharacterGroup(q).all()) {
        const auto g = gauss_sum(chi);
        const double dev = chi.is_primitive() ? std::abs(std::abs(g) - std::sqrt(static_cast<double>(q))) : 0.0;
        r.row({q, chi.label(), chi.conductor(), chi.parity(), chi.is_primitive(), chi.is_real(), g.real(), g.imag(),
               std::abs(g), dev});
        if (chi.is_primitive()) {
          ++primitive;
          worst = std::max(worst, dev);
          if (!(dev <= a->tol)) r.fail("|g(chi)| differs from sqrt q", json{{"label", chi.label()}, {"deviation", dev}});
        }
        if (conductor_by_search(chi) != chi.conductor())
          r.fail("conductor disagrees with direct search", json{{"label", chi.label()}});
      }
    }
    r.summary["characters"] = r.rows.size();
    r.summary["primitive"] = primitive;
    r.summary["max_gauss_deviation"] = worst;
    return r;
  };
}

AfeWeight afe_weight(const std::string& name, double width) {
  return name == "flat" ? AfeWeight::flat() : AfeWeight::gaussian(width);
}

Command lvalue(Params& P, CLI::App* app) {
  struct A {
    SourceArgs src;
    i64 q = 5;
    std::string chi;
    double s_re = 0.5, s_im = 0;
    std::string weight = "flat";
    double width = 8, tol = 1e-16, cutoff_eps = 0;
    bool dual_check = false;
    double dual_tol = 1e-4;
  };
  auto a = std::make_shared<A>();
  add_source(P, app, a->src, "", "delta");
  P.add(app, "--q", a->q, "modulus of the twist");
  P.add(app, "--chi", a->chi, "character label q:index (default: every primitive chi mod q)");
  P.add(app, "--s-re", a->s_re, "Re s");
  P.add(app, "--s-im", a->s_im, "Im s");
  P.add(app, "--weight", a->weight, "AFE weight G: flat or gaussian")->check(CLI::IsMember({"flat", "gaussian"}));
  P.add(app, "--width", a->width, "gaussian G(u) = exp(u^2 / width)");
  P.add(app, "--tol", a->tol, "cutoff tolerance for |V|");
  P.add(app, "--cutoff-eps", a->cutoff_eps, "> 0: truncate at m <= q^(1 + eps) instead");
  P.flag(app, "--dual-check", a->dual_check, "recompute with the other weight and compare");
  P.add(app, "--dual-tol", a->dual_tol, "accepted difference between the two weights");
  app->footer("CSV columns: label,parity,re,im,abs,root_re,root_im,terms,conductor,dual_difference");
  return [a] {
    Report r;
    r.columns = {"label", "parity", "re", "im", "abs", "root_re", "root_im", "terms", "conductor", "dual_difference"};
    const std::complex<double> s(a->s_re, a->s_im);
    const AfeWeight G = afe_weight(a->weight, a->width);
    const AfeWeight G2 = a->weight == "flat" ? AfeWeight::gaussian(a->width) : AfeWeight::flat();
    double worst_dual = 0, max_abs = 0;
    with_sources({&a->src}, 4096, [&](auto& src) {
      r.rows.clear();
      worst_dual = max_abs = 0;
      std::vector<DirichletCharacter> chis;
      if (a->chi.empty()) chis = CharacterGroup(a->q).primitive();
      else chis.push_back(character_from_label(a->chi));
      for (const auto& chi : chis) {
        LValueRequest req;
        req.s = s;
        req.phi = src[0];
        req.chi = chi;
        req.weight = G;
        req.tolerance = a->tol;
        req.cutoff_epsilon = a->cutoff_eps;
        const LValueResult v = afe_lvalue(req);
        json dual = nullptr;
        if (a->dual_check) {
          req.weight = G2;
          const double d = std::abs(afe_lvalue(req).value - v.value);
          worst_dual = std::max(worst_dual, d);
          dual = d;
          if (!(d <= a->dual_tol))
            r.fail("AFE value depends on the weight", json{{"label", chi.label()}, {"difference", d}});
        }
        max_abs = std::max(max_abs, std::abs(v.value));
        r.row({chi.label(), chi.parity(), v.value.real(), v.value.imag(), std::abs(v.value), v.root_number.real(),
               v.root_number.imag(), v.terms, v.conductor, dual});
      }
      r.summary["source"] = source_json(src[0]);
      return 0;
    });
    r.summary["s"] = cjson(s);
    r.summary["weight"] = G.name();
    r.summary["characters"] = r.rows.size();
    r.summary["max_abs"] = max_abs;
    if (a->dual_check) r.summary["max_dual_difference"] = worst_dual;
    return r;
  };
}

Command amplify(Params& P, CLI::App* app) {
  struct A {
    SourceArgs src;
    i64 q = 11;
    std::string chi;
    int L = 2;
    double M = 8;
    double route_tol = 1e-8;
  };
  auto a = std::make_shared<A>();
  add_source(P, app, a->src, "", "delta");
  P.add(app, "--q", a->q, "prime or composite modulus in [2, 10^4]");
  P.add(app, "--chi", a->chi, "target character q:index (default: first primitive)");
  P.add(app, "--L", a->L, "amplifier length L_amp");
  P.add(app, "--M", a->M, "k supported in [M, 2M]");
  P.add(app, "--route-tol", a->route_tol, "accepted difference between the two D(h) routes");
  app->footer("CSV columns: label,S_re,S_im,amplifier");
  return [a] {
    Report r;
    r.columns = {"label", "S_re", "S_im", "amplifier"};
    with_sources({&a->src}, static_cast<i64>(2 * a->M * a->L) + 16, [&](auto& src) {
      r.rows.clear();
      const DirichletCharacter chi =
          a->chi.empty() ? CharacterGroup(a->q).primitive().at(0) : character_from_label(a->chi);
      const AmplifierSpec spec = make_amplifier_spec(src[0], chi, a->L, a->M);
      const AmplifierMoment mom = amplifier_moment(spec);
      const OffDiagonal off = amplifier_offdiagonal(spec);
      const ParsevalCheck pc = parseval_check(spec);
      bool nonneg = mom.target_term >= 0 && mom.target_term <= mom.S;
      for (const auto& c : mom.per_character) {
        r.row({c.label, c.S_omega.real(), c.S_omega.imag(), c.amplifier});
        nonneg = nonneg && c.amplifier >= 0;
      }
      r.summary["target"] = chi.label();
      r.summary["S"] = mom.S;
      r.summary["target_term"] = mom.target_term;
      r.summary["rhs"] = off.rhs;
      r.summary["D0"] = off.D0;
      r.summary["D0_direct"] = off.D0_direct;
      r.summary["max_route_difference"] = off.max_route_difference;
      r.summary["parseval"] = json{{"lhs", pc.lhs}, {"rhs", pc.rhs}};
      r.summary["positivity"] = nonneg;
      const double slack = 1e-9 * std::max(1.0, std::abs(off.rhs));
      if (!(mom.S <= off.rhs + slack)) r.fail("moment exceeds the off-diagonal bound", json{{"S", mom.S}, {"rhs", off.rhs}});
      if (!(off.max_route_difference <= a->route_tol))
        r.fail("D(h) routes disagree", json{{"difference", off.max_route_difference}});
      if (!nonneg) r.fail("target term not dominated by the moment");
      return 0;
    });
    return r;
  };
}

Command sweep(Params& P, CLI::App* app) {
  struct A {
    SourceArgs src;
    i64 qlo = 2, qhi = 200;
    bool prime_powers = false;
    double s_re = 0.5;
    std::string weight = "flat";
    double width = 8;
  };
  auto a = std::make_shared<A>();
  add_source(P, app, a->src, "", "delta");
  P.add(app, "--qlo", a->qlo, "smallest modulus");
  P.add(app, "--qhi", a->qhi, "largest modulus");
  P.flag(app, "--prime-powers", a->prime_powers, "include prime powers");
  P.add(app, "--s-re", a->s_re, "real point s");
  P.add(app, "--weight", a->weight, "AFE weight: flat or gaussian")->check(CLI::IsMember({"flat", "gaussian"}));
  P.add(app, "--width", a->width, "gaussian width");
  app->footer("CSV columns: q,max_abs,argmax,sqrt_q,subconvex");
  return [a] {
    Report r;
    r.columns = {"q", "max_abs", "argmax", "sqrt_q", "subconvex"};
    with_sources({&a->src}, 4096, [&](auto& src) {
      r.rows.clear();
      const SweepTable t = subconvexity_sweep(src[0], a->qlo, a->qhi, {a->s_re, 0.0}, a->prime_powers,
                                              afe_weight(a->weight, a->width));
      for (const auto& x : t.rows) r.row({x.q, x.max_abs, x.argmax, x.sqrt_q, x.subconvex});
      auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
      r.summary["fit"] = json{{"slope", opt(t.slope)},     {"intercept", opt(t.intercept)},
                              {"ci_low", opt(t.ci_low)},   {"ci_high", opt(t.ci_high)},
                              {"confidence", t.confidence}, {"fitted_rows", t.fitted}};
      r.summary["rows"] = t.rows.size();
      r.summary["note"] = "report only: rows with max|L| <= 1e-10 are left out of the fit";
      return 0;
    });
    return r;
  };
}

struct CoeffsGenArgs {
  std::string form = "delta";
  i64 mmax = 1000;
};

Command coeffs_gen(Params& P, CLI::App* app, std::string& out_path) {
  auto a = std::make_shared<CoeffsGenArgs>();
  P.add(app, "--form", a->form, "delta or divisor")->check(CLI::IsMember({"delta", "divisor"}));
  P.add(app, "--mmax", a->mmax, "number of coefficients")->check(CLI::PositiveNumber);
  app->footer("Writes the coefficient file to --out (required); the report goes to standard output.\n"
              "CSV columns: m_max,header");
  return [a, &out_path] {
    if (out_path.empty()) throw DomainError("coeffs-gen needs --out for the coefficient file");
    const CoefficientSource src = a->form == "delta" ? delta_coefficients(a->mmax) : divisor_analog(a->mmax);
    save_coefficients(src, out_path);
    Report r;
    r.columns = {"m_max", "header"};
    r.row({src.m_max(), coefficient_header(src)});
    r.summary["file"] = out_path;
    r.summary["source"] = source_json(src);
    return r;
  };
}

Command coeffs_validate(Params& P, CLI::App* app) {
  struct A {
    std::string file;
    double tol = 1e-9;
  };
  auto a = std::make_shared<A>();
  P.add(app, "file", a->file, "coefficient file")->required();
  P.add(app, "--tol", a->tol, "relative tolerance for the Hecke relations");
  app->footer("CSV columns: check,count,max_error,passed");
  return [a] {
    std::ifstream in(a->file, std::ios::binary);
    if (!in) throw DomainError("cannot open " + a->file);
    const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::istringstream is(bytes);
    const CoefficientSource src = load_coefficients(is);
    Report r;
    r.columns = {"check", "count", "max_error", "passed"};
    r.summary["source"] = source_json(src);

    std::ostringstream os;
    save_coefficients(src, os);
    const bool round_trip = os.str() == bytes;
    r.row({"round_trip", 1, round_trip ? 0.0 : 1.0, round_trip});
    if (!round_trip) r.fail("file is not in canonical form (save after load differs)");

    const i64 M = src.m_max();
    auto rel = [](std::complex<double> x, std::complex<double> y) {
      return std::abs(x - y) / std::max({1.0, std::abs(x), std::abs(y)});
    };
    if (!src.primitive) {
      r.row({"hecke", 0, 0.0, true});
      r.summary["note"] = "non-primitive source: Hecke relations skipped";
      return r;
    }
    if (M >= 1 && rel(src.at_positive(1), 1.0) > a->tol) r.fail("lambda(1) is not 1");
    const DirichletCharacter chi = src.nebentypus_character();
    const i64 N = src.level;
    // multiplicativity for coprime m, n
    long long count = 0;
    double worst = 0;
    for (i64 m = 2; m * 2 <= M; ++m)
      for (i64 n = 2; n <= m && m * n <= M; ++n)
        if (gcd(m, n) == 1) {
          ++count;
          worst = std::max(worst, rel(src.at_positive(m * n), src.at_positive(m) * src.at_positive(n)));
        }
    r.row({"multiplicative", count, worst, worst <= a->tol});
    if (!(worst <= a->tol)) r.fail("coefficients are not multiplicative", json{{"max_error", worst}});
    // lambda(p) lambda(p^j) = lambda(p^(j+1)) + chi(p) lambda(p^(j-1)) for p not dividing N
    count = 0;
    worst = 0;
    for (i64 p = 2; p * p <= M; ++p) {
      if (!is_prime(p) || N % p == 0) continue;
      const std::complex<double> cp = chi.modulus() == 1 ? 1.0 : chi(p);
      for (i64 pj = p, pjm = 1; pj * p <= M; pjm = pj, pj *= p) {
        ++count;
        const auto lhs = src.at_positive(p) * src.at_positive(pj);
        const auto rhs = src.at_positive(pj * p) + cp * src.at_positive(pjm);
        worst = std::max(worst, rel(lhs, rhs));
      }
    }
    r.row({"hecke_recursion", count, worst, worst <= a->tol});
    if (!(worst <= a->tol)) r.fail("Hecke recursion fails", json{{"max_error", worst}});
    if (src.kind == FormKind::Holomorphic) {
      // Deligne: |lambda(m)| <= d(m)
      worst = 0;
      const auto d = divisor_count_sieve(M);
      for (i64 m = 1; m <= M; ++m)
        worst = std::max(worst, std::abs(src.at_positive(m)) / static_cast<double>(d[static_cast<std::size_t>(m)]));
      const bool ok = worst <= 1 + a->tol;
      r.row({"ramanujan_bound", M, worst, ok});
      if (!ok) r.fail("|lambda(m)| exceeds d(m)", json{{"max_ratio", worst}});
    }
    return r;
  };
}

// ---------------------------------------------------------------------------
// output

std::string csv_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (const char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  if (v.is_number_float()) {
    std::ostringstream os;
    os << std::setprecision(17) << v.get<double>();
    return os.str();
  }
  return v.dump();
}

void write_report(std::ostream& os, const std::string& format, const std::string& command, const json& config,
                  const Report& r) {
  if (format == "csv") {
    for (std::size_t i = 0; i < r.columns.size(); ++i) os << (i ? "," : "") << r.columns[i];
    os << "\n";
    for (const auto& row : r.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
      os << "\n";
    }
    return;
  }
  json j;
  j["command"] = command;
  j["version"] = version();
  j["status"] = r.failure ? "fail" : "pass";
  j["config"] = config;
  j["summary"] = r.summary;
  json rows = json::array();
  for (const auto& row : r.rows) {
    json o = json::object();
    for (std::size_t i = 0; i < row.size() && i < r.columns.size(); ++i) o[r.columns[i]] = row[i];
    rows.push_back(std::move(o));
  }
  j["rows"] = std::move(rows);
  if (r.failure) j["failure"] = *r.failure;
  os << j.dump(2) << "\n";
}

json error_record(const std::string& command, const std::string& type, const std::string& message) {
  return json{{"command", command},
              {"version", version()},
              {"status", "error"},
              {"error", json{{"type", type}, {"message", message}}}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Params P;
  CLI::App app{"Numerical workbench for shifted convolution sums of GL(2) coefficients", "shiftconv"};
  app.fallthrough();
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with the same keys as the flags (sections per command)");
  app.set_version_flag("--version", std::string(version()));

  std::string format = "json", out_path;
  unsigned threads = 0;
  unsigned long long seed = 1;
  P.add(&app, "--format", format, "report format: json or csv")->check(CLI::IsMember({"json", "csv"}));
  P.add(&app, "--out", out_path, "write the report here instead of standard output");
  app.add_option("--threads", threads, "worker threads (0: SHIFTCONV_THREADS or all cores)")->capture_default_str();
  P.add(&app, "--seed", seed, "seed for sampled grids");
  P.extra(&app, "threads", [] { return json(thread_count()); });

  std::vector<std::pair<CLI::App*, Command>> commands;
  auto sub = [&](const std::string& name, const std::string& desc) { return app.add_subcommand(name, desc); };
  CLI::App* s;
  s = sub("voronoi-check", "Voronoi identity residuals for bump weights");
  commands.emplace_back(s, voronoi_check(P, s));
  s = sub("jutila-l2", "exact L2 error of the circle-method approximant");
  commands.emplace_back(s, jutila_l2(P, s));
  s = sub("shifted-sum", "shifted convolution sum by lattice enumeration and by the exact circle integral");
  commands.emplace_back(s, shifted_sum(P, s));
  s = sub("shifted-compare", "shifted sum against its circle-method approximation and a transformed arc");
  commands.emplace_back(s, shifted_compare(P, s));
  s = sub("kloosterman-scan", "twisted Kloosterman sums against the Weil-Estermann bound");
  commands.emplace_back(s, kloosterman_scan(P, s, seed));
  s = sub("characters", "Dirichlet characters, conductors and Gauss sums");
  commands.emplace_back(s, characters(P, s));
  s = sub("lvalue", "twisted L-values by the approximate functional equation");
  commands.emplace_back(s, lvalue(P, s));
  s = sub("amplify", "amplified second moment and its off-diagonal bound");
  commands.emplace_back(s, amplify(P, s));
  s = sub("sweep", "max |L(1/2)| over primitive characters against q");
  commands.emplace_back(s, sweep(P, s));
  s = sub("coeffs-gen", "write a coefficient file");
  commands.emplace_back(s, coeffs_gen(P, s, out_path));
  s = sub("coeffs-validate", "check a coefficient file");
  commands.emplace_back(s, coeffs_validate(P, s));

  std::string command = "";
  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();  // program name
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e, out, err);
    err << error_record("", "usage", e.what()).dump() << "\n";
    return 2;
  }

  for (const auto& [app_sub, fn] : commands) {
    if (!app_sub->parsed()) continue;
    command = app_sub->get_name();
    try {
      set_thread_count(threads);
      Report r = fn();
      json config = P.resolved(&app);
      config[command] = P.resolved(app_sub);
      // coeffs-gen writes its file to --out, the report to standard output
      const bool to_file = !out_path.empty() && command != "coeffs-gen";
      if (to_file) {
        std::ofstream f(out_path, std::ios::binary);
        if (!f) throw DomainError("cannot write " + out_path);
        write_report(f, format, command, config, r);
      } else {
        write_report(out, format, command, config, r);
      }
      if (r.failure) {
        json rec{{"command", command}, {"version", version()}, {"status", "fail"}, {"failure", *r.failure}};
        err << rec.dump() << "\n";
        return 1;
      }
      return 0;
    } catch (const CoefficientShortfall& e) {
      json rec = error_record(command, "coefficient_shortfall", e.what());
      rec["error"]["required"] = e.required();
      rec["error"]["available"] = e.available();
      err << rec.dump() << "\n";
    } catch (const ToleranceError& e) {
      json rec = error_record(command, "tolerance", e.what());
      rec["error"]["achieved"] = e.achieved();
      err << rec.dump() << "\n";
    } catch (const ParseError& e) {
      json rec = error_record(command, "parse", e.what());
      rec["error"]["line"] = e.line();
      err << rec.dump() << "\n";
    } catch (const DomainError& e) {
      err << error_record(command, "domain", e.what()).dump() << "\n";
    } catch (const OverflowError& e) {
      err << error_record(command, "overflow", e.what()).dump() << "\n";
    } catch (const std::exception& e) {
      err << error_record(command, "internal", e.what()).dump() << "\n";
    }
    return 2;
  }
  return 2;
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace shiftconv::cli
