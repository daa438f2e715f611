#include "zvar/cli.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "zvar/geometry.hpp"
#include "zvar/kernels.hpp"
#include "zvar/montecarlo.hpp"
#include "zvar/rng.hpp"
#include "zvar/specfun.hpp"
#include "zvar/variance.hpp"

namespace zvar {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kVersion = "zvar 1.0.0";
constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Declared checks: every theoretical comparison a command makes is recorded
// as a row {name, expected, got, tol, pass, reference}; the process exits 0
// iff every row passes.

struct Checks {
  ordered_json rows = ordered_json::array();
  bool all = true;

  void num(const std::string& name, double expected, double got, double tol,
           const std::string& reference) {
    const bool ok = std::isfinite(got) && std::abs(got - expected) <= tol;
    rows.push_back({{"name", name},
                    {"expected", expected},
                    {"got", got},
                    {"tol", tol},
                    {"pass", ok},
                    {"reference", reference}});
    all = all && ok;
  }

  void text(const std::string& name, const std::string& expected,
            const std::string& got, const std::string& reference) {
    const bool ok = expected == got;
    rows.push_back({{"name", name},
                    {"expected", expected},
                    {"got", got},
                    {"tol", 0.0},
                    {"pass", ok},
                    {"reference", reference}});
    all = all && ok;
  }

  void flag(const std::string& name, bool got, const std::string& reference) {
    rows.push_back({{"name", name},
                    {"expected", true},
                    {"got", got},
                    {"tol", 0.0},
                    {"pass", got},
                    {"reference", reference}});
    all = all && got;
  }
};

// ---------------------------------------------------------------------------
// Small utilities.

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<int> parse_k_list(const std::string& text) {
  std::vector<int> ks;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (t.empty()) throw std::invalid_argument("--k: empty entry in list");
    std::size_t used = 0;
    int k = 0;
    try {
      k = std::stoi(t, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("--k: '" + t + "' is not an integer");
    }
    if (used != t.size()) {
      throw std::invalid_argument("--k: '" + t + "' is not an integer");
    }
    if (k < 1) throw std::invalid_argument("--k: values must be >= 1");
    ks.push_back(k);
  }
  if (ks.empty()) throw std::invalid_argument("--k: empty list");
  return ks;
}

// Expand `--config FILE` (key=value lines, # comments) into option tokens
// inserted right after the subcommand, so explicit flags parsed later win.
bool expand_config_file(std::vector<std::string>* args, std::string* err) {
  std::string path;
  for (std::size_t i = 0; i < args->size(); ++i) {
    const std::string& tok = (*args)[i];
    if (tok == "--config") {
      if (i + 1 >= args->size()) {
        *err = "--config requires a file path";
        return false;
      }
      path = (*args)[i + 1];
      args->erase(args->begin() + static_cast<std::ptrdiff_t>(i),
                  args->begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (tok.rfind("--config=", 0) == 0) {
      path = tok.substr(9);
      args->erase(args->begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (path.empty()) return true;
  for (const std::string& tok : *args) {
    if (tok == "--config" || tok.rfind("--config=", 0) == 0) {
      *err = "only one --config is allowed";
      return false;
    }
  }
  if (args->empty() || (*args)[0].empty() || (*args)[0][0] == '-') {
    *err = "--config requires a subcommand";
    return false;
  }

  std::ifstream f(path);
  if (!f) {
    *err = "cannot open config file: " + path;
    return false;
  }
  std::vector<std::string> extra;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      *err = path + ":" + std::to_string(lineno) + ": expected key=value";
      return false;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      *err = path + ":" + std::to_string(lineno) + ": expected key=value";
      return false;
    }
    if (key == "config") {
      *err = path + ":" + std::to_string(lineno) + ": config cannot nest";
      return false;
    }
    extra.push_back("--" + key);
    extra.push_back(value);
  }
  args->insert(args->begin() + 1, extra.begin(), extra.end());
  return true;
}

ordered_json qspec_json(const QuadratureSpec& q) {
  return {{"outer_nodes", q.outer_nodes},
          {"inner_radial", q.inner_radial},
          {"inner_angular", q.inner_angular},
          {"cutoff_b", q.cutoff_b}};
}

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string to_csv(const ordered_json& results, std::uint64_t seed) {
  std::string out = "k,route,value,error_estimate,seed\n";
  for (const auto& row : results) {
    if (!row.contains("k") || !row.contains("value")) continue;
    out += std::to_string(row["k"].get<int>());
    out += ',';
    out += row["route"].get<std::string>();
    out += ',';
    out += fmt_double(row["value"].get<double>());
    out += ',';
    out += fmt_double(row.contains("error_estimate")
                          ? row["error_estimate"].get<double>()
                          : 0.0);
    out += ',';
    out += std::to_string(seed);
    out += '\n';
  }
  return out;
}

std::string hex_words(const std::array<std::uint32_t, 4>& w) {
  char buf[36];
  std::snprintf(buf, sizeof buf, "%08x%08x%08x%08x", w[0], w[1], w[2], w[3]);
  return buf;
}

// Deterministic point pairs for kernel cross-route probes.
std::pair<ProjectivePoint, ProjectivePoint> probe_pair(int i) {
  const std::complex<double> g0 = gaussian_draw(2024, static_cast<std::uint64_t>(i), 0);
  const std::complex<double> g1 = gaussian_draw(2024, static_cast<std::uint64_t>(i), 1);
  const ProjectivePoint p = ProjectivePoint::from_affine(g0);
  const ProjectivePoint q = (i % 2 == 0)
                                ? ProjectivePoint::from_affine(g1)
                                : ProjectivePoint::from_conjugate(0.8 * g1);
  return {p, q};
}

double kernel_route_worst(int k, int pairs) {
  double worst = 0.0;
  for (int i = 0; i < pairs; ++i) {
    const auto [p, q] = probe_pair(i);
    const KernelValue closed = szego_magnitude(p, q, k);
    const KernelValue basis = szego_magnitude_basis(p, q, k);
    const double rel =
        std::abs(std::expm1(basis.log_magnitude - closed.log_magnitude));
    worst = std::max(worst, rel);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Commands.

void cmd_kernel_probe(const RunConfig& cfg, ordered_json& results,
                      Checks& checks) {
  for (int k : cfg.k_list) {
    const double worst = kernel_route_worst(k, 20);
    const DecayReport dec = decay_margin(k, 1.0);
    results.push_back({{"k", k},
                       {"route", "kernel"},
                       {"value", worst},
                       {"error_estimate", 0.0},
                       {"decay_pass", dec.pass},
                       {"q_at_coincidence", q_kernel_at_distance(0.0, k)}});
    checks.num("kernel_route_agreement_k" + std::to_string(k), 0.0, worst,
               1e-10, "monomial basis summation vs closed form");
  }
}

void cmd_variance_exact(const RunConfig& cfg, const TestForm& tf,
                        ordered_json& results, Checks& checks) {
  for (int k : cfg.k_list) {
    const VarianceResult r = exact_variance(tf, k, cfg.quadrature);
    results.push_back({{"k", k},
                       {"route", "exact"},
                       {"testform", tf.name},
                       {"value", r.value},
                       {"error_estimate", r.error_estimate}});
    if (tf.lambda) {
      const double zv = zonal_variance_oracle(tf, k);
      checks.num("exact_vs_zonal_k" + std::to_string(k), zv, r.value,
                 1e-6 * std::abs(zv), "zonal Funk-Hecke reduction");
    }
  }
}

void cmd_variance_mc(const RunConfig& cfg, const TestForm& tf,
                     ordered_json& results, Checks& checks) {
  for (int k : cfg.k_list) {
    const MCEstimate est = mc_variance(k, tf, cfg.n_samples, cfg.seed);
    results.push_back({{"k", k},
                       {"route", "mc"},
                       {"testform", tf.name},
                       {"value", est.variance},
                       {"error_estimate", est.stderr_variance},
                       {"mean", est.mean},
                       {"stderr_mean", est.stderr_mean},
                       {"n_samples", est.n_samples},
                       {"rejected", est.rejected},
                       {"fallbacks", est.fallbacks}});
    if (tf.lambda) {
      const double zv = zonal_variance_oracle(tf, k);
      checks.num("mc_vs_zonal_k" + std::to_string(k), zv, est.variance,
                 4.0 * est.stderr_variance,
                 "zonal oracle within four standard errors");
    }
  }
}

void cmd_number_mc(const RunConfig& cfg, ordered_json& results,
                   Checks& checks) {
  const double r = cfg.disk_radius;
  const double sin_r = std::sin(r);
  const double boundary_length = kPi * std::sin(2.0 * r);
  const double prefactor =
      riemann_zeta(1.5) / (8.0 * std::pow(kPi, 1.5)) * boundary_length;
  for (int k : cfg.k_list) {
    const MCEstimate est =
        mc_number_variance(k, r, cfg.n_samples, cfg.seed);
    const double mean_theory = static_cast<double>(k) * sin_r * sin_r;
    const double ratio = est.variance / (prefactor * std::sqrt(k));
    results.push_back({{"k", k},
                       {"route", "number"},
                       {"value", est.variance},
                       {"error_estimate", est.stderr_variance},
                       {"mean", est.mean},
                       {"stderr_mean", est.stderr_mean},
                       {"mean_theory", mean_theory},
                       {"boundary_length", boundary_length},
                       {"variance_theory_ratio", ratio},
                       {"n_samples", est.n_samples},
                       {"rejected", est.rejected}});
    checks.num("mean_count_k" + std::to_string(k), mean_theory, est.mean,
               4.0 * est.stderr_mean,
               "expected count (k/pi)*area within four standard errors");
  }
}

void cmd_asymptotics(const RunConfig& cfg, const TestForm& tf,
                     ordered_json& results, Checks& checks) {
  const CoefficientIntegrals ci = coefficient_integrals(tf);
  const AsymptoticCoefficients ac = asymptotic_coefficients(1, ci);
  results.push_back({{"route", "coefficients"},
                     {"testform", tf.name},
                     {"i_ff", ci.i_ff},
                     {"i_rff", ci.i_rff},
                     {"i_dbarf", ci.i_dbarf},
                     {"a0", ac.a0},
                     {"a1", ac.a1}});
  for (int k : cfg.k_list) {
    const double kk = static_cast<double>(k);
    results.push_back({{"k", k},
                       {"route", "asymptotic"},
                       {"testform", tf.name},
                       {"value", (ac.a0 + ac.a1 / kk) / kk},
                       {"error_estimate", 0.0}});
  }
  if (tf.lambda) {
    const double fd = dbar_energy(tf);
    checks.num("i_dbarf_route_agreement", fd, ci.i_dbarf,
               1e-6 * std::abs(fd),
               "finite-difference Dirichlet energy vs eigenvalue identity");
  }
}

void cmd_fit(const RunConfig& cfg, const TestForm& tf, ordered_json& results,
             Checks& checks) {
  std::vector<FitPoint> pts;
  ordered_json table = ordered_json::array();
  for (int k : cfg.k_list) {
    const VarianceResult r = exact_variance(tf, k, cfg.quadrature);
    pts.push_back(FitPoint{k, r.value});
    const double kvar = static_cast<double>(k) * r.value;
    results.push_back({{"k", k},
                       {"route", "exact"},
                       {"testform", tf.name},
                       {"value", r.value},
                       {"error_estimate", r.error_estimate},
                       {"kvar", kvar}});
    table.push_back({k, kvar});
  }
  const FitResult fr = fit_expansion(pts);
  results.push_back({{"route", "fit"},
                     {"testform", tf.name},
                     {"a0_hat", fr.a0},
                     {"a1_hat", fr.a1},
                     {"residual_norm", fr.residual_norm},
                     {"table", table}});
  const int min_k = *std::min_element(cfg.k_list.begin(), cfg.k_list.end());
  if (tf.lambda && min_k >= 50) {
    const AsymptoticCoefficients ac =
        asymptotic_coefficients(1, coefficient_integrals(tf));
    checks.num("fit_a0_vs_formula", ac.a0, fr.a0, 0.01 * std::abs(ac.a0),
               "leading coefficient formula");
    checks.num("fit_a1_vs_formula", ac.a1, fr.a1, 0.15 * std::abs(ac.a1),
               "subleading coefficient formula");
  }
}

// ---------------------------------------------------------------------------
// verify suites: fast self-contained invariant checks per module.

void suite_specfun(Checks& c) {
  c.num("g_at_zero", 0.0, g_function(0.0), 1e-15, "empty series");
  c.num("g_at_one", 1.0 / 24.0, g_function(1.0), 1e-12,
        "G(1) = zeta(2)/(4 pi^2) = 1/24");
  c.num("g_at_minus_one", -1.0 / 48.0, g_function(-1.0), 1e-12,
        "G(-1) = -zeta(2)/(8 pi^2) = -1/48");
  c.num("zeta_2", kPi * kPi / 6.0, riemann_zeta(2.0), 1e-12, "pi^2/6");
  c.num("zeta_4", std::pow(kPi, 4) / 90.0, riemann_zeta(4.0), 1e-12,
        "pi^4/90");
  c.num("zeta_3", 1.2020569031595943, riemann_zeta(3.0), 1e-12,
        "Apery's constant");
  c.flag("g_monotone", g_function(0.3) < g_function(0.6),
         "G nondecreasing on [0, 1]");
}

void suite_geometry(Checks& c) {
  const ManifoldRule rule = manifold_quadrature();
  c.num("total_area", kPi,
        integrate(rule, [](const ProjectivePoint&) { return 1.0; }), 1e-11,
        "Fubini-Study area of CP^1");
  const TestForm& psi1 = find_testform("psi1");
  c.num("psi1_mean", 0.0, integrate(rule, psi1.psi), 1e-12,
        "odd zonal harmonic integrates to zero");
  c.num("psi1_norm", kPi / 3.0,
        integrate(rule,
                  [&](const ProjectivePoint& p) {
                    const double v = psi1.psi(p);
                    return v * v;
                  }),
        1e-11, "norm^2 of the first zonal harmonic");
  c.num("scalar_curvature", 2.0,
        scalar_curvature(ProjectivePoint::from_affine({0.3, 0.1})), 1e-14,
        "radius-1/2 round sphere");
  c.num("antipodal_distance", kPi / 2.0,
        geodesic_distance(ProjectivePoint::from_affine(0.0),
                          ProjectivePoint::from_conjugate(0.0)),
        1e-14, "poles at maximal distance");
  const ProjectivePoint p0 = ProjectivePoint::from_affine({0.4, -0.2});
  c.num("psi1_eigen_relation", -(psi1.lambda.value() / 2.0) * psi1.psi(p0),
        psi1.f(p0), 1e-12, "f = -(lambda/2) psi for eigenfunctions");
}

void suite_kernels(Checks& c) {
  const ProjectivePoint p = ProjectivePoint::from_affine({0.3, 0.2});
  c.num("normalized_diagonal", 1.0, normalized_kernel(p, p, 50), 1e-14,
        "P_k(z, z) = 1");
  c.num("basis_route_agreement", 0.0,
        std::max(kernel_route_worst(10, 8), kernel_route_worst(50, 8)),
        1e-10, "monomial basis summation vs closed form");
  c.num("q_at_coincidence", 1.0 / 24.0, q_kernel_at_distance(0.0, 100),
        1e-12, "Q = G(1) on the diagonal");
  c.num("q_frozen_point", 0.010334471862894040,
        q_kernel_at_distance(0.1, 100), 1e-11, "frozen regression value");
  c.flag("decay_margin_k100", decay_margin(100, 1.0).pass,
         "P_k k^p nonincreasing at the threshold distance");
  c.num("expansion_residual_bound", 0.0,
        std::abs(expansion_residual({1.0, 0.0}, 400)), 0.05,
        "near-diagonal expansion O(1/k) window");
}

void suite_variance(Checks& c) {
  const TestForm& psi1 = find_testform("psi1");
  const CoefficientIntegrals ci = coefficient_integrals(psi1);
  c.num("i_ff_psi1", 16.0 * kPi / 3.0, ci.i_ff, 1e-8,
        "lambda^2/4 times the psi1 norm");
  c.num("i_dbarf_psi1", 32.0 * kPi / 3.0, ci.i_dbarf, 1e-8,
        "(lambda/4) i_ff");
  c.num("dbar_energy_route", 32.0 * kPi / 3.0, dbar_energy(psi1),
        1e-6 * 32.0 * kPi / 3.0,
        "finite differences vs eigenvalue identity");
  const AsymptoticCoefficients ac = asymptotic_coefficients(1, ci);
  c.num("a0_psi1", 1.6027425375461257, ac.a0, 1e-10, "4 zeta(3) / 3");
  c.num("zonal_oracle_k20", 0.070408302838252182,
        zonal_variance_oracle(psi1, 20), 1e-10, "frozen regression value");
  std::vector<FitPoint> pts;
  for (int k : {50, 100, 200}) {
    pts.push_back(FitPoint{k, (2.5 - 1.25 / k) / k});
  }
  const FitResult fr = fit_expansion(pts);
  c.num("fit_recovers_a0", 2.5, fr.a0, 1e-10, "synthetic two-term model");
  c.num("fit_recovers_a1", -1.25, fr.a1, 1e-9, "synthetic two-term model");
  const std::vector<int> ones{1, 1};
  const std::vector<int> swap_up{1, 2};
  const std::vector<int> swap_bar{2, 1};
  c.num("wick_pair_moment", 2.0,
        static_cast<double>(wick_moment(1, ones, ones)), 0.0, "E|z|^4 = 2");
  c.num("wick_swap_moment", 1.0,
        static_cast<double>(wick_moment(2, swap_up, swap_bar)), 0.0,
        "permanent of the swap matrix");
  c.num("curvature_contraction_m2", 12.0,
        curvature_wick_contraction(cpm_curvature(2)), 1e-12,
        "equals 2 rho, rho = m(m+1)");
  const std::vector<double> cs{3.0};
  c.num("multinomial_square", 9.0, multinomial_expand(cs, 2, 4), 0.0,
        "(1 + 3 s^2)^2 coefficient of s^4");
}

void suite_montecarlo(Checks& c) {
  c.text("philox_kat_zero", "6627e8d5e169c58dbc57ac4c9b00dbd8",
         hex_words(philox4x32({0, 0, 0, 0}, {0, 0})), "known-answer vector");
  c.text("philox_kat_ones", "408f276d41c83b0ea20bc7c66d5451fd",
         hex_words(philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu,
                               0xffffffffu},
                              {0xffffffffu, 0xffffffffu})),
         "known-answer vector");
  c.flag("gaussian_deterministic",
         gaussian_draw(7, 3, 2) == gaussian_draw(7, 3, 2),
         "counter-based draws are pure functions");

  bool counts_ok = true;
  double worst_cert = 0.0;
  for (int i = 0; i < 30; ++i) {
    const auto zs = zeros_of_section(
        sample_section(12, 5, static_cast<std::uint64_t>(i)));
    if (!zs || zs->points.size() != 12) {
      counts_ok = false;
      continue;
    }
    worst_cert = std::max(worst_cert, zs->max_backward_error);
  }
  c.flag("zero_count_exact", counts_ok, "degree-k divisor has k points");
  c.num("root_certificate", 0.0, worst_cert, 1e-8,
        "backward error bound on accepted roots");

  const TestForm& one = find_testform("one");
  const auto zs0 = zeros_of_section(sample_section(12, 5, 0));
  c.num("constant_statistic", 12.0,
        zs0 ? linear_statistic(*zs0, one) : -1.0, 0.0,
        "psi == 1 counts zeros");

  const TestForm& psi1 = find_testform("psi1");
  const MCEstimate est = mc_variance(8, psi1, 400, 1);
  c.num("mc_vs_zonal_k8", zonal_variance_oracle(psi1, 8), est.variance,
        6.0 * est.stderr_variance, "zonal oracle within six standard errors");
  const MCEstimate nest = mc_number_variance(20, kPi / 4.0, 400, 3);
  c.num("disk_mean_count", 10.0, nest.mean, 4.0 * nest.stderr_mean,
        "(k/pi) * area within four standard errors");
}

void cmd_verify(const RunConfig& cfg, ordered_json& results, Checks& checks) {
  struct Suite {
    const char* name;
    void (*run)(Checks&);
  };
  const std::vector<Suite> suites{{"specfun", suite_specfun},
                                  {"geometry", suite_geometry},
                                  {"kernels", suite_kernels},
                                  {"variance", suite_variance},
                                  {"montecarlo", suite_montecarlo}};
  for (const Suite& s : suites) {
    if (cfg.suite != "all" && cfg.suite != s.name) continue;
    const std::size_t before = checks.rows.size();
    s.run(checks);
    int passed = 0;
    for (std::size_t i = before; i < checks.rows.size(); ++i) {
      passed += checks.rows[i]["pass"].get<bool>() ? 1 : 0;
    }
    results.push_back(
        {{"route", "verify"},
         {"suite", s.name},
         {"checks_run", static_cast<int>(checks.rows.size() - before)},
         {"checks_passed", passed}});
  }
}

// ---------------------------------------------------------------------------

ordered_json params_json(const RunConfig& cfg) {
  ordered_json p;
  if (cfg.command != "verify") p["k"] = cfg.k_list;
  if (cfg.command == "variance-exact" || cfg.command == "variance-mc" ||
      cfg.command == "asymptotics" || cfg.command == "fit") {
    p["testform"] = cfg.testform;
  }
  if (cfg.command == "variance-mc" || cfg.command == "number-mc") {
    p["samples"] = cfg.n_samples;
    p["seed"] = cfg.seed;
  }
  if (cfg.command == "number-mc") p["radius"] = cfg.disk_radius;
  if (cfg.command == "variance-exact" || cfg.command == "fit") {
    p["quadrature"] = qspec_json(cfg.quadrature);
  }
  if (cfg.command == "verify") p["suite"] = cfg.suite;
  p["format"] = cfg.format;
  if (!cfg.output_path.empty()) p["out"] = cfg.output_path;
  return p;
}

int run_command(const RunConfig& cfg) {
  ordered_json results = ordered_json::array();
  Checks checks;

  const auto t0 = std::chrono::steady_clock::now();
  if (cfg.command == "kernel-probe") {
    cmd_kernel_probe(cfg, results, checks);
  } else if (cfg.command == "variance-exact") {
    cmd_variance_exact(cfg, find_testform(cfg.testform), results, checks);
  } else if (cfg.command == "variance-mc") {
    cmd_variance_mc(cfg, find_testform(cfg.testform), results, checks);
  } else if (cfg.command == "number-mc") {
    cmd_number_mc(cfg, results, checks);
  } else if (cfg.command == "asymptotics") {
    cmd_asymptotics(cfg, find_testform(cfg.testform), results, checks);
  } else if (cfg.command == "fit") {
    cmd_fit(cfg, find_testform(cfg.testform), results, checks);
  } else if (cfg.command == "verify") {
    cmd_verify(cfg, results, checks);
  }
  const double wall_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  ordered_json report;
  report["command"] = cfg.command;
  report["params"] = params_json(cfg);
  report["results"] = results;
  report["checks"] = checks.rows;
  report["provenance"] = {{"seed", cfg.seed},
                          {"quadrature", qspec_json(cfg.quadrature)},
                          {"version", kVersion}};
  report["timing"] = {{"wall_s", wall_s}};

  const std::string payload = (cfg.format == "csv")
                                  ? to_csv(results, cfg.seed)
                                  : report.dump(2) + "\n";
  std::cout << payload;
  if (!cfg.output_path.empty()) {
    std::ofstream out(cfg.output_path, std::ios::binary);
    if (!out) {
      throw std::runtime_error("cannot open output file: " + cfg.output_path);
    }
    out << payload;
  }
  return checks.all ? 0 : 1;
}

}  // namespace

int run_cli(const std::vector<std::string>& args_in) {
  std::vector<std::string> args = args_in;
  {
    std::string err;
    if (!expand_config_file(&args, &err)) {
      std::cerr << "error: " << err << "\nRun with --help for usage.\n";
      return 2;
    }
  }

  CLI::App app{"variance of linear statistics of random zero sets on CP^1"};
  app.name("zvar");
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string k_str = "100";
  std::string tf_name = "psi1";
  std::int64_t samples_mc = 20000;
  std::int64_t samples_number = 5000;
  std::uint64_t seed = 42;
  QuadratureSpec quad;
  int inner_radial = quad.inner_radial;
  std::string out_path;
  std::string format = "json";
  double radius = kPi / 4.0;
  std::string suite = "all";

  const auto take_last = [](CLI::Option* o) {
    o->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    return o;
  };
  const auto add_output = [&](CLI::App* s) {
    take_last(s->add_option("--out", out_path, "Write the report here too"));
    take_last(s->add_option("--format", format, "Report format")
                  ->check(CLI::IsMember({"json", "csv"})));
  };
  const auto add_k = [&](CLI::App* s) {
    take_last(s->add_option("--k", k_str, "Comma-separated degree list"));
  };
  const auto add_testform = [&](CLI::App* s) {
    take_last(s->add_option("--testform", tf_name, "Test form name"));
  };
  const auto add_quadrature = [&](CLI::App* s) {
    take_last(s->add_option("--outer-nodes", quad.outer_nodes,
                            "Outer radial nodes per chart"));
    take_last(s->add_option("--inner-nodes", inner_radial,
                            "Inner radial nodes per panel (angular = 2x)"));
    take_last(
        s->add_option("--cutoff-b", quad.cutoff_b, "Near-window constant b"));
  };

  CLI::App* probe =
      app.add_subcommand("kernel-probe", "Cross-check the kernel routes");
  add_k(probe);
  add_output(probe);

  CLI::App* vex = app.add_subcommand("variance-exact",
                                     "Bipotential double-integral variance");
  add_k(vex);
  add_testform(vex);
  add_quadrature(vex);
  add_output(vex);

  CLI::App* vmc =
      app.add_subcommand("variance-mc", "Monte Carlo variance estimate");
  add_k(vmc);
  add_testform(vmc);
  take_last(vmc->add_option("--samples", samples_mc, "Sample count"));
  take_last(vmc->add_option("--seed", seed, "RNG seed"));
  add_output(vmc);

  CLI::App* nmc =
      app.add_subcommand("number-mc", "Zero-count statistics in a disk");
  add_k(nmc);
  take_last(nmc->add_option("--samples", samples_number, "Sample count"));
  take_last(nmc->add_option("--seed", seed, "RNG seed"));
  take_last(nmc->add_option("--radius", radius, "Geodesic disk radius"));
  add_output(nmc);

  CLI::App* asy = app.add_subcommand(
      "asymptotics", "Expansion coefficients A0, A1 and predicted variance");
  add_k(asy);
  add_testform(asy);
  add_output(asy);

  CLI::App* fit = app.add_subcommand(
      "fit", "Fit k*Var = A0 + A1/k over the exact route");
  add_k(fit);
  add_testform(fit);
  add_quadrature(fit);
  add_output(fit);

  CLI::App* ver = app.add_subcommand("verify", "Fast module self-tests");
  take_last(ver->add_option("--suite", suite, "Module suite")
                ->check(CLI::IsMember({"specfun", "geometry", "kernels",
                                       "variance", "montecarlo", "all"})));
  add_output(ver);

  std::vector<const char*> argv;
  argv.reserve(args.size() + 1);
  argv.push_back("zvar");
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  RunConfig cfg;
  CLI::App* sub = app.get_subcommands().front();
  cfg.command = sub->get_name();
  cfg.testform = tf_name;
  cfg.seed = seed;
  cfg.quadrature = quad;
  cfg.quadrature.inner_radial = inner_radial;
  cfg.quadrature.inner_angular = 2 * inner_radial;
  cfg.output_path = out_path;
  cfg.format = format;
  cfg.disk_radius = radius;
  cfg.suite = suite;
  cfg.n_samples = (cfg.command == "number-mc") ? samples_number : samples_mc;

  // Validation beyond flag syntax: still a usage error (exit 2).
  try {
    if (cfg.command != "verify") cfg.k_list = parse_k_list(k_str);
    if (cfg.command == "kernel-probe") {
      for (int k : cfg.k_list) {
        if (k > 300) {
          throw std::invalid_argument(
              "kernel-probe: the basis route is certified for k <= 300");
        }
      }
    }
    if (cfg.command == "variance-exact" || cfg.command == "variance-mc" ||
        cfg.command == "asymptotics" || cfg.command == "fit") {
      find_testform(cfg.testform);  // throws for unknown names
    }
    if (cfg.command == "variance-mc" || cfg.command == "number-mc") {
      if (cfg.n_samples < 2) {
        throw std::invalid_argument("--samples must be >= 2");
      }
    }
    if (cfg.command == "number-mc") {
      if (!(cfg.disk_radius > 0.0) || !(cfg.disk_radius < kPi / 2.0)) {
        throw std::invalid_argument("--radius must lie in (0, pi/2)");
      }
    }
    if (cfg.command == "variance-exact" || cfg.command == "fit") {
      cfg.quadrature.validate();
    }
    if (cfg.command == "fit") {
      std::set<int> distinct(cfg.k_list.begin(), cfg.k_list.end());
      if (distinct.size() < 3) {
        throw std::invalid_argument("fit: need at least 3 distinct k values");
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\nRun with --help for usage.\n";
    return 2;
  }

  try {
    return run_command(cfg);
  } catch (const std::exception& e) {
    ordered_json diag;
    diag["command"] = cfg.command;
    diag["error"] = e.what();
    diag["params"] = params_json(cfg);
    std::cout << diag.dump(2) << "\n";
    return 1;
  }
}

int run_main(int argc, char** argv) {
  std::vector<std::string> args;
  args.reserve(static_cast<std::size_t>(argc > 0 ? argc - 1 : 0));
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace zvar
