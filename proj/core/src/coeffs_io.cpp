#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "shiftconv/coeffs.hpp"
#include "shiftconv/error.hpp"

namespace shiftconv {
namespace {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

double parse_double(const std::string& s, std::size_t line, const char* what) {
  double v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError(std::string("bad ") + what + " '" + s + "'", line);
  return v;
}

i64 parse_int(const std::string& s, std::size_t line, const char* what) {
  i64 v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) throw ParseError(std::string("bad ") + what + " '" + s + "'", line);
  return v;
}

}  // namespace

std::string coefficient_header(const CoefficientSource& src) {
  std::ostringstream h;
  h << "#coef v1 kind=" << to_string(src.kind) << " N=" << src.level;
  h << " k=" << (src.kind == FormKind::Holomorphic ? std::to_string(src.weight) : "-");
  h << " mu=" << (src.kind == FormKind::Holomorphic ? "-" : format_double(src.mu));
  h << " neb=" << src.nebentypus;
  // "-" doubles as "not applicable" for holomorphic sources
  h << " sign=" << (src.kind != FormKind::Holomorphic && src.sign > 0 ? "+" : "-");
  h << " root=";
  if (src.root_number)
    h << format_double(src.root_number->real()) << "," << format_double(src.root_number->imag());
  else
    h << "-";
  return h.str();
}

void save_coefficients(const CoefficientSource& src, std::ostream& out) {
  out << coefficient_header(src) << "\n";
  for (i64 m = 1; m <= src.m_max(); ++m) {
    const auto z = src.at_positive(m);
    out << m << " " << format_double(z.real()) << " " << format_double(z.imag()) << "\n";
  }
  if (!out) throw Error("failed writing coefficient stream");
}

void save_coefficients(const CoefficientSource& src, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  save_coefficients(src, f);
}

CoefficientSource load_coefficients(std::istream& in) {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw ParseError("empty coefficient file", 1);
  std::istringstream hs(line);
  std::string tok;
  hs >> tok;
  if (tok != "#coef") throw ParseError("header must start with '#coef'", lineno);
  hs >> tok;
  if (tok != "v1") throw ParseError("unsupported format version '" + tok + "'", lineno);
  std::map<std::string, std::string> kv;
  while (hs >> tok) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw ParseError("header field without '=': '" + tok + "'", lineno);
    const std::string key = tok.substr(0, eq);
    if (kv.count(key)) throw ParseError("duplicate header field '" + key + "'", lineno);
    kv[key] = tok.substr(eq + 1);
  }
  for (const char* key : {"kind", "N", "k", "mu", "neb", "sign", "root"})
    if (!kv.count(key)) throw ParseError(std::string("missing header field '") + key + "'", lineno);
  if (kv.size() != 7) throw ParseError("unknown header field", lineno);

  CoefficientSource meta;
  try {
    meta.kind = form_kind_from_string(kv["kind"]);
  } catch (const DomainError& e) {
    throw ParseError(e.what(), lineno);
  }
  meta.level = parse_int(kv["N"], lineno, "level");
  if (meta.level < 1) throw ParseError("level must be >= 1", lineno);
  if (meta.kind == FormKind::Holomorphic) {
    if (kv["k"] == "-") throw ParseError("holomorphic source needs a weight k", lineno);
    meta.weight = static_cast<int>(parse_int(kv["k"], lineno, "weight"));
    if (meta.weight < 1) throw ParseError("weight must be >= 1", lineno);
  } else {
    if (kv["k"] != "-") throw ParseError("k is only meaningful for holomorphic sources", lineno);
    if (kv["mu"] == "-") throw ParseError("maass/divisor source needs mu", lineno);
    meta.mu = parse_double(kv["mu"], lineno, "mu");
    if (meta.mu < 0) throw ParseError("mu must be >= 0", lineno);
  }
  meta.nebentypus = kv["neb"];
  if (meta.nebentypus != "trivial") {
    try {
      const auto chi = character_from_label(meta.nebentypus);
      if (meta.level % chi.modulus() != 0) throw ParseError("nebentypus modulus does not divide N", lineno);
    } catch (const DomainError& e) {
      throw ParseError(e.what(), lineno);
    }
  }
  const std::string& sg = kv["sign"];
  if (sg != "+" && sg != "-") throw ParseError("sign must be '+' or '-'", lineno);
  if (meta.kind != FormKind::Holomorphic) meta.sign = sg == "+" ? 1 : -1;
  if (kv["root"] != "-") {
    const auto comma = kv["root"].find(',');
    if (comma == std::string::npos) throw ParseError("root must be 're,im'", lineno);
    meta.root_number = std::complex<double>(parse_double(kv["root"].substr(0, comma), lineno, "root"),
                                            parse_double(kv["root"].substr(comma + 1), lineno, "root"));
  }

  std::vector<std::complex<double>> values;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) throw ParseError("blank line", lineno);
    std::istringstream rs(line);
    std::string sm, sre, sim, extra;
    if (!(rs >> sm >> sre >> sim) || (rs >> extra)) throw ParseError("row must be '<m> <re> <im>'", lineno);
    const i64 m = parse_int(sm, lineno, "index");
    const i64 expected = static_cast<i64>(values.size()) + 1;
    if (m < expected) throw ParseError("duplicate or decreasing m=" + std::to_string(m), lineno);
    if (m > expected) throw ParseError("gap at m=" + std::to_string(expected), lineno);
    values.emplace_back(parse_double(sre, lineno, "real part"), parse_double(sim, lineno, "imaginary part"));
  }
  if (values.empty()) throw ParseError("no coefficient rows", lineno);
  if (values.front() != std::complex<double>(1.0, 0.0))
    throw ParseError("lambda(1) must be 1 for a primitive source", 2);

  CoefficientSource src(std::move(values));
  src.kind = meta.kind;
  src.level = meta.level;
  src.weight = meta.weight;
  src.mu = meta.mu;
  src.sign = meta.sign;
  src.nebentypus = meta.nebentypus;
  src.root_number = meta.root_number;
  return src;
}

CoefficientSource load_coefficients(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open coefficient file '" + path + "'");
  return load_coefficients(f);
}

}  // namespace shiftconv
