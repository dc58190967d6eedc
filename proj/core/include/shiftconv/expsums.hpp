#pragma once

// Plain and twisted Kloosterman sums by direct summation over reduced
// residues, and an exhaustive scan against the Weil-Estermann bound.

#include <complex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "shiftconv/arith.hpp"
#include "shiftconv/characters.hpp"

namespace shiftconv {

struct KloostermanQuery {
  i64 m = 0;
  i64 n = 0;
  i64 q = 1;
  std::optional<DirichletCharacter> twist;
};

/// S_chi(m, n; q) = sum over d mod q, (d, q) = 1, of chi(d) e_q(dm + dbar n).
std::complex<double> kloosterman(const KloostermanQuery& query);

/// Same sum with the twist given as a raw value table (0 off the units).
std::complex<double> kloosterman(i64 m, i64 n, i64 q, const std::vector<std::complex<double>>* twist);

/// gcd(m, n, q)^(1/2) q^(1/2) tau(q).
double weil_estermann_bound(i64 m, i64 n, i64 q);
inline double weil_estermann_bound(const KloostermanQuery& query) {
  return weil_estermann_bound(query.m, query.n, query.q);
}

struct WeilRow {
  i64 q = 0;
  std::string character_label;
  i64 m = 0;
  i64 n = 0;
  double abs_sum = 0;
  double bound = 0;
  double ratio = 0;
};

struct WeilScanReport {
  i64 q_max = 0;
  std::size_t sample_size = 0;
  long long evaluations = 0;
  WeilRow worst;                 // argmax of the ratio
  std::vector<WeilRow> per_q;    // worst row for each q
  bool passed = true;
};

/// Default (m, n) grid: 20 values per axis including zero and values sharing
/// factors with typical moduli.
std::vector<std::pair<i64, i64>> default_weil_grid();

/// Scans every q <= q_max, every character mod q and every sampled (m, n).
/// Throws ToleranceError carrying the witness when a ratio exceeds 1 + tol.
WeilScanReport scan_weil(i64 q_max, const std::vector<std::pair<i64, i64>>& sample, double tol = 1e-9);

}  // namespace shiftconv
