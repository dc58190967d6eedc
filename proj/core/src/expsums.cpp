#include "shiftconv/expsums.hpp"

#include <cmath>
#include <numeric>

#include "shiftconv/error.hpp"
#include "shiftconv/parallel.hpp"

namespace shiftconv {

std::complex<double> kloosterman(i64 m, i64 n, i64 q, const std::vector<std::complex<double>>* twist) {
  if (q < 1) throw DomainError("kloosterman: q must be >= 1");
  if (twist && static_cast<i64>(twist->size()) != q) throw DomainError("kloosterman: twist modulus differs from q");
  CompensatedSum<std::complex<double>> acc;
  const i64 mr = mod_reduce(m, q), nr = mod_reduce(n, q);
  for (i64 d = 0; d < q; ++d) {
    if (std::gcd(d, q) != 1) continue;
    const i64 dbar = mod_inverse(d, q).value;
    const i64 phase = static_cast<i64>((static_cast<i128>(d) * mr + static_cast<i128>(dbar) * nr) % q);
    auto term = e_q(phase, q);
    if (twist) term *= (*twist)[static_cast<std::size_t>(d)];
    acc.add(term);
  }
  return acc.value();
}

std::complex<double> kloosterman(const KloostermanQuery& query) {
  if (query.twist && query.twist->modulus() != query.q)
    throw DomainError("kloosterman: twist modulus " + std::to_string(query.twist->modulus()) + " differs from q=" +
                      std::to_string(query.q));
  return kloosterman(query.m, query.n, query.q, query.twist ? &query.twist->values() : nullptr);
}

double weil_estermann_bound(i64 m, i64 n, i64 q) {
  const double g = static_cast<double>(gcd3(m, n, q));
  return std::sqrt(g) * std::sqrt(static_cast<double>(q)) * static_cast<double>(divisor_tau(q));
}

std::vector<std::pair<i64, i64>> default_weil_grid() {
  const std::vector<i64> axis{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 12, 16, 18, 24, 30, 36, 60, 128, 210};
  std::vector<std::pair<i64, i64>> grid;
  for (const i64 m : axis)
    for (const i64 n : axis) grid.emplace_back(m, n);
  return grid;
}

namespace {

WeilRow scan_one_q(i64 q, const std::vector<std::pair<i64, i64>>& sample, long long& evals) {
  WeilRow worst{q, "", 0, 0, 0, 0, -1};
  const CharacterGroup group(q);
  std::vector<i64> units, inverses;
  for (i64 d = 0; d < q; ++d) {
    if (std::gcd(d, q) != 1) continue;
    units.push_back(d);
    inverses.push_back(mod_inverse(d, q).value);
  }
  const auto roots = additive_character_table(q);
  const auto chars = group.all();
  std::vector<std::complex<double>> ev(units.size());
  for (const auto& [m, n] : sample) {
    const i64 mr = mod_reduce(m, q), nr = mod_reduce(n, q);
    for (std::size_t i = 0; i < units.size(); ++i)
      ev[i] = roots[static_cast<std::size_t>((units[i] * mr + inverses[i] * nr) % q)];
    const double bound = weil_estermann_bound(m, n, q);
    for (const auto& chi : chars) {
      CompensatedSum<std::complex<double>> acc;
      for (std::size_t i = 0; i < units.size(); ++i) acc.add(ev[i] * chi.values()[static_cast<std::size_t>(units[i])]);
      const double a = std::abs(acc.value());
      const double ratio = a / bound;
      ++evals;
      if (ratio > worst.ratio) worst = {q, chi.label(), m, n, a, bound, ratio};
    }
  }
  return worst;
}

}  // namespace

WeilScanReport scan_weil(i64 q_max, const std::vector<std::pair<i64, i64>>& sample, double tol) {
  if (q_max < 1) throw DomainError("scan_weil: q_max must be >= 1");
  WeilScanReport report;
  report.q_max = q_max;
  report.sample_size = sample.size();
  report.per_q.resize(static_cast<std::size_t>(q_max));
  std::vector<long long> evals(static_cast<std::size_t>(q_max), 0);
  parallel_for(static_cast<std::size_t>(q_max), [&](std::size_t i) {
    report.per_q[i] = scan_one_q(static_cast<i64>(i) + 1, sample, evals[i]);
  });
  report.worst = report.per_q.front();
  for (const auto& row : report.per_q)
    if (row.ratio > report.worst.ratio) report.worst = row;
  report.evaluations = std::accumulate(evals.begin(), evals.end(), 0LL);
  report.passed = report.worst.ratio <= 1.0 + tol;
  if (!report.passed) {
    const auto& w = report.worst;
    throw ToleranceError("Weil-Estermann bound violated at q=" + std::to_string(w.q) + " chi=" + w.character_label +
                             " m=" + std::to_string(w.m) + " n=" + std::to_string(w.n),
                         w.ratio);
  }
  return report;
}

}  // namespace shiftconv
