#ifdef SHIFTCONV_HAVE_CLI

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "cli.hpp"

using nlohmann::json;

namespace {

struct CliRun {
  int code = 0;
  std::string out, err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "shiftconv");
  std::ostringstream out, err;
  CliRun r;
  r.code = shiftconv::cli::run(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("shiftconv_cli_test_" + name)).string();
}

}  // namespace

TEST(Cli, CoefficientFileRoundTrip) {
  const std::string path = temp_path("delta.coef");
  const CliRun gen = run({"coeffs-gen", "--form", "delta", "--mmax", "400", "--out", path});
  ASSERT_EQ(gen.code, 0) << gen.err;
  ASSERT_TRUE(std::filesystem::exists(path));
  const CliRun val = run({"coeffs-validate", path});
  EXPECT_EQ(val.code, 0) << val.err;
  const json j = json::parse(val.out);
  EXPECT_EQ(j["status"], "pass");
  EXPECT_EQ(j["command"], "coeffs-validate");
  for (const auto& row : j["rows"]) EXPECT_TRUE(row["passed"].get<bool>()) << row.dump();

  // a damaged coefficient breaks multiplicativity: exit 1 with a failure record
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  const auto pos = text.find("\n6 ");
  ASSERT_NE(pos, std::string::npos);
  const auto eol = text.find('\n', pos + 1);
  text.replace(pos + 1, eol - pos - 1, "6 1.2500000000000000 0.0000000000000000");
  const std::string bad = temp_path("bad.coef");
  std::ofstream(bad) << text;
  const CliRun v2 = run({"coeffs-validate", bad});
  EXPECT_EQ(v2.code, 1);
  EXPECT_EQ(json::parse(v2.out)["status"], "fail");
  const json rec = json::parse(v2.err);
  EXPECT_EQ(rec["status"], "fail");
  EXPECT_TRUE(rec.contains("failure"));
  std::remove(path.c_str());
  std::remove(bad.c_str());
}

TEST(Cli, ParseErrorCarriesLine) {
  const std::string path = temp_path("gap.coef");
  std::ofstream(path) << "#coef v1 kind=holomorphic N=1 k=12 mu=- neb=trivial sign=- root=-\n1 1 0\n3 0 0\n";
  const CliRun r = run({"coeffs-validate", path});
  EXPECT_EQ(r.code, 2);
  const json e = json::parse(r.err);
  EXPECT_EQ(e["error"]["type"], "parse");
  EXPECT_EQ(e["error"]["line"], 3);
  std::remove(path.c_str());
}

TEST(Cli, JutilaRow) {
  const CliRun r = run({"jutila-l2", "--Q", "10", "--delta", "0.01", "--moduli", "both"});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  ASSERT_EQ(j["rows"].size(), 2u);
  EXPECT_EQ(j["rows"][0]["moduli"], "full");
  EXPECT_EQ(j["rows"][0]["count"], 11);
  EXPECT_TRUE(j["rows"][0]["mass_exact"].get<bool>());
  EXPECT_LE(j["summary"]["max_ratio"].get<double>(), 10);
  EXPECT_EQ(j["config"]["jutila-l2"]["moduli"], "both");
}

TEST(Cli, CsvFormat) {
  const CliRun r = run({"--format", "csv", "jutila-l2", "--Q", "10", "--delta", "0.01"});
  ASSERT_EQ(r.code, 0);
  std::istringstream is(r.out);
  std::string header, row, extra;
  std::getline(is, header);
  std::getline(is, row);
  EXPECT_EQ(header, "Q,delta,moduli,count,L,l2,bound,ratio,mass_exact,breakpoints");
  EXPECT_EQ(row.rfind("10,0.01", 0), 0u);
  EXPECT_FALSE(std::getline(is, extra) && !extra.empty());
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run({}).code, 2);
  EXPECT_EQ(run({"no-such-command"}).code, 2);
  const CliRun bad = run({"jutila-l2", "--moduli", "some"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_EQ(json::parse(bad.err)["error"]["type"], "usage");
  const CliRun dom = run({"jutila-l2", "--Q", "10", "--delta", "0.5"});
  EXPECT_EQ(dom.code, 2);
  EXPECT_EQ(json::parse(dom.err)["error"]["type"], "domain");
  const CliRun v = run({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_FALSE(v.out.empty());
}

TEST(Cli, FailureExitCode) {
  // an impossible factor turns a normal run into a reported failure
  const CliRun r = run({"jutila-l2", "--Q", "10", "--delta", "0.01", "--factor", "1e-9"});
  EXPECT_EQ(r.code, 1);
  const json j = json::parse(r.out);
  EXPECT_EQ(j["status"], "fail");
  EXPECT_TRUE(j.contains("failure"));
}

TEST(Cli, DeterministicAcrossThreads) {
  const std::vector<std::string> args{"voronoi-check", "--q", "2", "--A", "100", "--mmax", "20000"};
  auto with = [&](const std::string& t) {
    std::vector<std::string> a{"--threads", t};
    a.insert(a.end(), args.begin(), args.end());
    const CliRun r = run(a);
    EXPECT_EQ(r.code, 0) << r.err;
    json j = json::parse(r.out);
    return j["rows"].dump();
  };
  EXPECT_EQ(with("1"), with("3"));
}

TEST(Cli, ConfigFilePrecedence) {
  const std::string path = temp_path("config.toml");
  std::ofstream(path) << "format = \"json\"\n[jutila-l2]\nQ = [30]\ndelta = [0.002]\nfactor = 10\n";
  const CliRun a = run({"--config", path, "jutila-l2"});
  ASSERT_EQ(a.code, 0) << a.err;
  const json ja = json::parse(a.out);
  EXPECT_EQ(ja["rows"][0]["Q"], 30.0);
  // the command line wins over the file
  const CliRun b = run({"--config", path, "jutila-l2", "--Q", "10", "--delta", "0.01"});
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(json::parse(b.out)["rows"][0]["Q"], 10.0);
  std::remove(path.c_str());
}

TEST(Cli, OutFile) {
  const std::string path = temp_path("report.json");
  const CliRun r = run({"--out", path, "characters", "--q", "12"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  std::ifstream in(path);
  const json j = json::parse(in);
  EXPECT_EQ(j["command"], "characters");
  EXPECT_EQ(j["rows"].size(), 4u);
  std::remove(path.c_str());
}

#endif
