#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "zvar/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunOutcome {
  int rc = -1;
  std::string out;
  std::string err;
};

RunOutcome run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  std::streambuf* old_out = std::cout.rdbuf(out.rdbuf());
  std::streambuf* old_err = std::cerr.rdbuf(err.rdbuf());
  RunOutcome r;
  try {
    r.rc = zvar::run_cli(args);
  } catch (...) {
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    throw;
  }
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path temp_file(const std::string& name) {
  return fs::temp_directory_path() / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::stringstream ss(text);
  std::string line;
  while (std::getline(ss, line)) lines.push_back(line);
  return lines;
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("usage errors exit with code 2") {
  CHECK(run({}).rc == 2);
  CHECK(run({"bogus-command"}).rc == 2);
  CHECK(run({"variance-mc", "--k", "5", "--samples", "1"}).rc == 2);
  CHECK(run({"variance-mc", "--k", "0"}).rc == 2);
  CHECK(run({"variance-mc", "--k", "5x"}).rc == 2);
  CHECK(run({"number-mc", "--radius", "2.0"}).rc == 2);
  CHECK(run({"number-mc", "--radius", "0.0"}).rc == 2);
  CHECK(run({"variance-exact", "--k", "5", "--testform", "nope"}).rc == 2);
  CHECK(run({"fit", "--k", "100,150"}).rc == 2);
  CHECK(run({"verify", "--format", "xml"}).rc == 2);
  CHECK(run({"verify", "--suite", "nope"}).rc == 2);
  CHECK(run({"kernel-probe", "--k", "400"}).rc == 2);
}

TEST_CASE("help and version exit cleanly") {
  const RunOutcome help = run({"--help"});
  CHECK(help.rc == 0);
  CHECK(help.out.find("variance") != std::string::npos);
  const RunOutcome ver = run({"--version"});
  CHECK(ver.rc == 0);
  CHECK(ver.out.find("zvar 1.0.0") != std::string::npos);
}

TEST_CASE("verify report schema") {
  const RunOutcome r = run({"verify", "--suite", "specfun"});
  REQUIRE(r.rc == 0);
  const json rep = json::parse(r.out);
  CHECK(rep["command"] == "verify");
  CHECK(rep["params"]["suite"] == "specfun");
  CHECK(rep["params"]["format"] == "json");
  REQUIRE(rep["results"].is_array());
  REQUIRE(rep["results"].size() == 1);
  CHECK(rep["results"][0]["suite"] == "specfun");
  const int n_checks = rep["results"][0]["checks_run"].get<int>();
  CHECK(n_checks >= 5);
  CHECK(rep["results"][0]["checks_passed"].get<int>() == n_checks);
  REQUIRE(rep["checks"].is_array());
  CHECK(static_cast<int>(rep["checks"].size()) == n_checks);
  for (const auto& row : rep["checks"]) {
    CHECK(row.contains("name"));
    CHECK(row.contains("expected"));
    CHECK(row.contains("got"));
    CHECK(row.contains("tol"));
    CHECK(row.contains("reference"));
    CHECK(row["pass"].get<bool>());
  }
  CHECK(rep["provenance"]["version"] == "zvar 1.0.0");
  CHECK(rep["provenance"]["seed"].get<std::uint64_t>() == 42);
  CHECK(rep["provenance"]["quadrature"].is_object());
  CHECK(rep["timing"]["wall_s"].get<double>() >= 0.0);
}

TEST_CASE("asymptotics reports the coefficients") {
  const RunOutcome r = run({"asymptotics", "--k", "100"});
  REQUIRE(r.rc == 0);
  const json rep = json::parse(r.out);
  REQUIRE(rep["results"].size() == 2);
  const json& coef = rep["results"][0];
  CHECK(coef["route"] == "coefficients");
  CHECK(coef["i_ff"].get<double>() ==
        doctest::Approx(16.0 * std::numbers::pi / 3.0).epsilon(1e-9));
  const double a0 = coef["a0"].get<double>();
  const double a1 = coef["a1"].get<double>();
  CHECK(a0 == doctest::Approx(1.6027425375461257).epsilon(1e-11));
  CHECK(a1 == doctest::Approx(-4.3292929348445528).epsilon(1e-11));
  const json& pred = rep["results"][1];
  CHECK(pred["k"].get<int>() == 100);
  CHECK(pred["route"] == "asymptotic");
  CHECK(pred["value"].get<double>() ==
        doctest::Approx((a0 + a1 / 100.0) / 100.0).epsilon(1e-14));
  for (const auto& row : rep["checks"]) CHECK(row["pass"].get<bool>());
}

TEST_CASE("reports are deterministic") {
  const RunOutcome a = run({"verify", "--suite", "specfun"});
  const RunOutcome b = run({"verify", "--suite", "specfun"});
  REQUIRE(a.rc == 0);
  REQUIRE(b.rc == 0);
  json ja = json::parse(a.out);
  json jb = json::parse(b.out);
  ja.erase("timing");
  jb.erase("timing");
  CHECK(ja.dump() == jb.dump());
}

TEST_CASE("out file mirrors stdout") {
  const fs::path f = temp_file("zvar_cli_mirror.json");
  const RunOutcome r =
      run({"verify", "--suite", "specfun", "--out", f.string()});
  REQUIRE(r.rc == 0);
  CHECK(slurp(f) == r.out);
  const json rep = json::parse(r.out);
  CHECK(rep["params"]["out"] == f.string());
  fs::remove(f);
}

TEST_CASE("csv output") {
  const fs::path f = temp_file("zvar_cli_rows.csv");
  const RunOutcome r = run({"variance-mc", "--k", "8", "--samples", "200",
                            "--seed", "3", "--format", "csv", "--out",
                            f.string()});
  REQUIRE(r.rc == 0);
  CHECK(slurp(f) == r.out);
  const auto lines = lines_of(r.out);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0] == "k,route,value,error_estimate,seed");
  CHECK(lines[1].rfind("8,mc,", 0) == 0);
  CHECK(lines[1].substr(lines[1].size() - 2) == ",3");
  fs::remove(f);
}

TEST_CASE("config file settings lose to explicit flags") {
  const fs::path cfgf = temp_file("zvar_cli_config.cfg");
  {
    std::ofstream out(cfgf);
    out << "# sampling setup\n"
        << "k = 12\n"
        << "seed = 9\n"
        << "samples = 250   # overridden on the command line\n";
  }
  const RunOutcome r =
      run({"variance-mc", "--config", cfgf.string(), "--samples", "400"});
  REQUIRE(r.rc == 0);
  const json rep = json::parse(r.out);
  CHECK(rep["params"]["k"] == json::array({12}));
  CHECK(rep["params"]["seed"].get<std::uint64_t>() == 9);
  CHECK(rep["params"]["samples"].get<std::int64_t>() == 400);
  CHECK(rep["results"][0]["n_samples"].get<std::int64_t>() == 400);
  fs::remove(cfgf);
}

TEST_CASE("config file rejections") {
  CHECK(run({"variance-mc", "--config", "/nonexistent/zvar.cfg"}).rc == 2);
  const fs::path cfgf = temp_file("zvar_cli_bad.cfg");
  {
    std::ofstream out(cfgf);
    out << "bogus = 5\n";
  }
  CHECK(run({"variance-mc", "--config", cfgf.string()}).rc == 2);
  {
    std::ofstream out(cfgf);
    out << "config = other.cfg\n";
  }
  CHECK(run({"variance-mc", "--config", cfgf.string()}).rc == 2);
  {
    std::ofstream out(cfgf);
    out << "just a line without equals\n";
  }
  CHECK(run({"variance-mc", "--config", cfgf.string()}).rc == 2);
  fs::remove(cfgf);
}

TEST_CASE("disk counting run") {
  const RunOutcome r =
      run({"number-mc", "--k", "10", "--samples", "300", "--seed", "4"});
  REQUIRE(r.rc == 0);
  const json rep = json::parse(r.out);
  const json& row = rep["results"][0];
  CHECK(row["route"] == "number");
  CHECK(row["mean_theory"].get<double>() == doctest::Approx(5.0));
  CHECK(row["n_samples"].get<std::int64_t>() == 300);
  bool found = false;
  for (const auto& c : rep["checks"]) {
    if (c["name"] == "mean_count_k10") {
      found = true;
      CHECK(c["pass"].get<bool>());
    }
  }
  CHECK(found);
}

}  // TEST_SUITE
