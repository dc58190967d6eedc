#include "shiftconv/coeffs.hpp"

#include <array>
#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>

#include "shiftconv/error.hpp"
#include "shiftconv/parallel.hpp"

namespace shiftconv {

std::string to_string(FormKind kind) {
  switch (kind) {
    case FormKind::Holomorphic: return "holomorphic";
    case FormKind::Maass: return "maass";
    case FormKind::Divisor: return "divisor";
  }
  return "?";
}

FormKind form_kind_from_string(const std::string& s) {
  if (s == "holomorphic") return FormKind::Holomorphic;
  if (s == "maass") return FormKind::Maass;
  if (s == "divisor") return FormKind::Divisor;
  throw DomainError("unknown form kind '" + s + "'");
}

CoefficientSource::CoefficientSource(std::vector<std::complex<double>> values_from_one) {
  std::vector<std::complex<double>> v;
  v.reserve(values_from_one.size() + 1);
  v.emplace_back(0.0);
  for (const auto& z : values_from_one) {
    v.push_back(z);
    if (z.imag() != 0.0) real_ = false;
  }
  coeffs_ = std::make_shared<const std::vector<std::complex<double>>>(std::move(v));
}

std::complex<double> CoefficientSource::operator()(i64 m) const {
  if (m > 0) {
    if (m > m_max()) throw CoefficientShortfall("coefficient lookup", m, m_max());
    return (*coeffs_)[static_cast<std::size_t>(m)];
  }
  if (m == 0) throw DomainError("lambda(0) is undefined");
  if (kind == FormKind::Holomorphic) throw DomainError("holomorphic source has no negative-index coefficients");
  if (-m > m_max()) throw CoefficientShortfall("coefficient lookup", -m, m_max());
  return static_cast<double>(sign == 0 ? 1 : sign) * (*coeffs_)[static_cast<std::size_t>(-m)];
}

void CoefficientSource::require(i64 required, const std::string& context) const {
  if (required > m_max()) throw CoefficientShortfall(context, required, m_max());
}

DirichletCharacter CoefficientSource::nebentypus_character() const {
  if (nebentypus == "trivial") return CharacterGroup(level).character(0);
  auto chi = character_from_label(nebentypus);
  if (level % chi.modulus() != 0)
    throw DomainError("nebentypus modulus " + std::to_string(chi.modulus()) + " does not divide level " +
                      std::to_string(level));
  if (chi.modulus() == level) return chi;
  return character_product(chi, CharacterGroup(level).character(0));
}

namespace {

std::vector<i128> tau_sparse(i64 m_max) {
  // prod (1 - x^n) truncated at degree D = m_max - 1, from Euler's pentagonal
  // theorem: sum_k (-1)^k x^{k(3k-1)/2} over all integers k.
  const i64 D = m_max - 1;
  std::vector<std::pair<i64, int>> sparse{{0, 1}};
  for (i64 k = 1;; ++k) {
    const i64 e1 = k * (3 * k - 1) / 2, e2 = k * (3 * k + 1) / 2;
    if (e1 > D) break;
    const int s = (k % 2) ? -1 : 1;
    sparse.emplace_back(e1, s);
    if (e2 <= D) sparse.emplace_back(e2, s);
  }

  // 24-fold product, each step a dense-by-sparse multiplication with +-1 entries.
  std::vector<i128> cur(static_cast<std::size_t>(D + 1), 0), next(cur.size());
  for (const auto& [e, s] : sparse) cur[static_cast<std::size_t>(e)] = s;
  for (int step = 1; step < 24; ++step) {
    std::fill(next.begin(), next.end(), 0);
    for (const auto& [e, s] : sparse) {
      const std::size_t off = static_cast<std::size_t>(e);
      for (std::size_t j = 0; j + off < cur.size(); ++j) {
        i128& dst = next[j + off];
        const bool bad = s > 0 ? __builtin_add_overflow(dst, cur[j], &dst) : __builtin_sub_overflow(dst, cur[j], &dst);
        if (bad) throw OverflowError("tau: 128-bit overflow at degree " + std::to_string(j + off));
      }
    }
    cur.swap(next);
  }
  std::vector<i128> tau(static_cast<std::size_t>(m_max + 1), 0);
  for (i64 m = 1; m <= m_max; ++m) tau[static_cast<std::size_t>(m)] = cur[static_cast<std::size_t>(m - 1)];
  return tau;
}

// Number-theoretic transforms modulo primes p = c 2^k + 1 below 2^31. The
// modulus is a template parameter so the reductions compile to multiplies.
template <std::uint32_t P>
struct Ntt {
  static std::uint32_t pow(std::uint64_t b, std::uint64_t e) {
    std::uint64_t r = 1;
    for (b %= P; e; e >>= 1, b = b * b % P)
      if (e & 1) r = r * b % P;
    return static_cast<std::uint32_t>(r);
  }
  static std::uint32_t root() {
    const auto f = factorize(static_cast<i64>(P - 1));
    for (std::uint32_t g = 2;; ++g) {
      bool ok = true;
      for (const auto& [r, e] : f) ok = ok && pow(g, (P - 1) / static_cast<std::uint64_t>(r)) != 1;
      if (ok) return g;
    }
  }
  static void transform(std::vector<std::uint32_t>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
      std::size_t bit = n >> 1;
      for (; j & bit; bit >>= 1) j ^= bit;
      j ^= bit;
      if (i < j) std::swap(a[i], a[j]);
    }
    const std::uint32_t g = root();
    std::vector<std::uint32_t> w;
    for (std::size_t len = 2; len <= n; len <<= 1) {
      std::uint32_t wl = pow(g, (P - 1) / len);
      if (inverse) wl = pow(wl, P - 2);
      w.assign(len / 2, 1);
      for (std::size_t k = 1; k < len / 2; ++k) w[k] = static_cast<std::uint32_t>(std::uint64_t{w[k - 1]} * wl % P);
      for (std::size_t i = 0; i < n; i += len)
        for (std::size_t k = 0; k < len / 2; ++k) {
          const std::uint32_t u = a[i + k];
          const std::uint32_t v = static_cast<std::uint32_t>(std::uint64_t{a[i + k + len / 2]} * w[k] % P);
          a[i + k] = u + v >= P ? u + v - P : u + v;
          a[i + k + len / 2] = u >= v ? u - v : u + P - v;
        }
    }
    if (inverse) {
      const std::uint64_t inv = pow(n, P - 2);
      for (auto& x : a) x = static_cast<std::uint32_t>(x * inv % P);
    }
  }
  // prod (1 - x^n)^24 mod P, degrees 0..D
  static std::vector<std::uint32_t> eta24(i64 D) {
    std::size_t n = 1;
    while (n < static_cast<std::size_t>(2 * D + 1)) n <<= 1;
    if ((P - 1) % n != 0) throw DomainError("ramanujan_tau: m_max too large for the transform length");
    std::vector<std::uint32_t> a(n, 0);
    // Jacobi: prod (1 - x^n)^3 = sum_k (-1)^k (2k + 1) x^(k(k+1)/2)
    for (i64 k = 0; k * (k + 1) / 2 <= D; ++k) {
      const std::uint32_t c = static_cast<std::uint32_t>((2 * k + 1) % P);
      a[static_cast<std::size_t>(k * (k + 1) / 2)] = k % 2 ? P - c : c;
    }
    for (int step = 0; step < 3; ++step) {
      transform(a, false);
      for (auto& x : a) x = static_cast<std::uint32_t>(std::uint64_t{x} * x % P);
      transform(a, true);
      std::fill(a.begin() + D + 1, a.end(), 0);
    }
    a.resize(static_cast<std::size_t>(D + 1));
    return a;
  }
};

std::vector<i128> tau_squaring(i64 m_max) {
  namespace mp = boost::multiprecision;
  constexpr std::array<std::uint32_t, 5> p{167772161u, 469762049u, 754974721u, 2013265921u, 1811939329u};
  const i64 D = m_max - 1;
  std::array<std::vector<std::uint32_t>, 5> r;
  parallel_for(5, [&](std::size_t i) {
    switch (i) {
      case 0: r[0] = Ntt<p[0]>::eta24(D); break;
      case 1: r[1] = Ntt<p[1]>::eta24(D); break;
      case 2: r[2] = Ntt<p[2]>::eta24(D); break;
      case 3: r[3] = Ntt<p[3]>::eta24(D); break;
      default: r[4] = Ntt<p[4]>::eta24(D); break;
    }
  });
  // Garner: x = t0 + p0 (t1 + p1 (t2 + ...)), then the symmetric residue
  std::array<std::array<std::uint64_t, 5>, 5> inv{};
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < i; ++j)
      inv[j][i] = static_cast<std::uint64_t>(mod_inverse(static_cast<i64>(p[j]), static_cast<i64>(p[i])).value);
  mp::int256_t P = 1;
  for (const auto q : p) P *= q;
  const mp::int256_t half = P / 2, limit = (mp::int256_t(1) << 127) - 1;
  std::vector<i128> tau(static_cast<std::size_t>(m_max + 1), 0);
  for (i64 m = 1; m <= m_max; ++m) {
    const auto idx = static_cast<std::size_t>(m - 1);
    std::array<std::uint64_t, 5> t{};
    for (std::size_t i = 0; i < 5; ++i) {
      std::uint64_t x = r[i][idx];
      for (std::size_t j = 0; j < i; ++j) x = (x + p[i] - t[j] % p[i]) % p[i] * inv[j][i] % p[i];
      t[i] = x;
    }
    mp::int256_t v = t[4];
    for (std::size_t i = 4; i-- > 0;) v = v * p[i] + t[i];
    if (v > half) v -= P;
    if (mp::abs(v) > limit) throw OverflowError("tau: 128-bit overflow at degree " + std::to_string(m - 1));
    const bool neg = v < 0;
    const mp::uint256_t u = static_cast<mp::uint256_t>(neg ? -v : v);
    const auto lo = static_cast<std::uint64_t>(u & 0xffffffffffffffffULL);
    const auto hi = static_cast<std::uint64_t>(u >> 64);
    const i128 w = static_cast<i128>((static_cast<unsigned __int128>(hi) << 64) | lo);
    tau[static_cast<std::size_t>(m)] = neg ? -w : w;
  }
  return tau;
}

}  // namespace

std::vector<i128> ramanujan_tau(i64 m_max, TauMethod method) {
  if (m_max < 1) throw DomainError("ramanujan_tau: m_max must be >= 1");
  if (method == TauMethod::Auto) method = m_max < (i64{1} << 15) ? TauMethod::Sparse : TauMethod::Squaring;
  return method == TauMethod::Sparse ? tau_sparse(m_max) : tau_squaring(m_max);
}

CoefficientSource delta_coefficients(i64 m_max) {
  const auto tau = ramanujan_tau(m_max);
  std::vector<std::complex<double>> v(static_cast<std::size_t>(m_max));
  for (i64 m = 1; m <= m_max; ++m) {
    // tau(m) carries up to ~110 bits; long double keeps 64 of them before scaling
    const long double t = static_cast<long double>(tau[static_cast<std::size_t>(m)]);
    v[static_cast<std::size_t>(m - 1)] = static_cast<double>(t * std::pow(static_cast<long double>(m), -5.5L));
  }
  CoefficientSource src(std::move(v));
  src.kind = FormKind::Holomorphic;
  src.level = 1;
  src.weight = 12;
  src.root_number = std::complex<double>(1.0, 0.0);  // i^12
  return src;
}

CoefficientSource divisor_analog(i64 m_max) {
  if (m_max < 1) throw DomainError("divisor_analog: m_max must be >= 1");
  const auto d = divisor_count_sieve(m_max);
  std::vector<std::complex<double>> v(static_cast<std::size_t>(m_max));
  for (i64 m = 1; m <= m_max; ++m) v[static_cast<std::size_t>(m - 1)] = static_cast<double>(d[static_cast<std::size_t>(m)]);
  CoefficientSource src(std::move(v));
  src.kind = FormKind::Divisor;
  src.level = 1;
  src.mu = 0.0;
  src.sign = 1;
  src.root_number = std::complex<double>(1.0, 0.0);
  return src;
}

CoefficientSource contragredient(const CoefficientSource& src) {
  std::vector<std::complex<double>> v(src.data().begin() + 1, src.data().end());
  for (auto& z : v) z = std::conj(z);
  CoefficientSource out(std::move(v));
  out.kind = src.kind;
  out.level = src.level;
  out.weight = src.weight;
  out.mu = src.mu;
  out.sign = src.sign;
  out.primitive = src.primitive;
  if (src.root_number) out.root_number = std::conj(*src.root_number);
  if (src.nebentypus != "trivial") {
    // conjugate nebentypus: the inverse exponent vector
    const auto chi = character_from_label(src.nebentypus);
    const CharacterGroup group(chi.modulus());
    i64 index = 0;
    for (std::size_t f = 0; f < group.factors().size(); ++f) {
      const i64 o = group.factors()[f].order;
      index = index * o + mod_reduce(-chi.exponents()[f], o);
    }
    out.nebentypus = group.character(index).label();
  }
  return out;
}

double rankin_selberg_ratio(const CoefficientSource& src, double x) {
  if (!(x >= 1.0)) throw DomainError("rankin_selberg_ratio: x must be >= 1");
  const i64 top = static_cast<i64>(std::floor(x));
  src.require(top, "rankin_selberg_ratio");
  long double s = 0;
  for (i64 m = 1; m <= top; ++m) s += std::norm(src.at_positive(m));
  return static_cast<double>(s / x);
}

}  // namespace shiftconv
