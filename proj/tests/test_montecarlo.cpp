#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include <doctest.h>

#include "zvar/montecarlo.hpp"
#include "zvar/polyroots.hpp"
#include "zvar/rng.hpp"
#include "zvar/variance.hpp"

using namespace zvar;

namespace {
constexpr double kPi = std::numbers::pi;

std::vector<std::complex<double>> sorted_roots(
    std::vector<std::complex<double>> r) {
  std::sort(r.begin(), r.end(), [](const auto& a, const auto& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return r;
}

// Distance between a projective point and an affine target in whichever
// chart keeps the coordinate bounded (geodesic_distance bottoms out at
// sqrt(eps) because of the arccos, this does not).
double chart_gap(const ProjectivePoint& p, std::complex<double> z) {
  if (std::abs(z) <= 1.0) return std::abs(p.affine() - z);
  return std::abs(p.conjugate() - 1.0 / z);
}
}  // namespace

TEST_SUITE("montecarlo") {

TEST_CASE("philox known-answer vectors") {
  const auto zero = philox4x32({0u, 0u, 0u, 0u}, {0u, 0u});
  CHECK(zero[0] == 0x6627e8d5u);
  CHECK(zero[1] == 0xe169c58du);
  CHECK(zero[2] == 0xbc57ac4cu);
  CHECK(zero[3] == 0x9b00dbd8u);
  const std::uint32_t ff = 0xffffffffu;
  const auto ones = philox4x32({ff, ff, ff, ff}, {ff, ff});
  CHECK(ones[0] == 0x408f276du);
  CHECK(ones[1] == 0x41c83b0eu);
  CHECK(ones[2] == 0xa20bc7c6u);
  CHECK(ones[3] == 0x6d5451fdu);
}

TEST_CASE("gaussian draw is deterministic and collision-free") {
  const auto a = gaussian_draw(42, 7, 3);
  CHECK(gaussian_draw(42, 7, 3) == a);
  CHECK(gaussian_draw(42, 7, 4) != a);
  CHECK(gaussian_draw(42, 8, 3) != a);
  CHECK(gaussian_draw(43, 7, 3) != a);
}

TEST_CASE("gaussian draw moments") {
  const int n = 20000;
  const double bound = 5.0 / std::sqrt(static_cast<double>(n));
  double sum_sq = 0.0;
  std::complex<double> sum_sq_signed{0.0, 0.0};
  std::complex<double> gram{0.0, 0.0};
  for (int i = 0; i < n; ++i) {
    const std::complex<double> c = gaussian_draw(9001, i, 0);
    const std::complex<double> d = gaussian_draw(9001, i, 1);
    sum_sq += std::norm(c);
    sum_sq_signed += c * c;
    gram += c * std::conj(d);
  }
  // E|c|^2 = 1, E[c^2] = 0, and distinct coefficients are uncorrelated.
  CHECK(std::abs(sum_sq / n - 1.0) <= bound);
  CHECK(std::abs(sum_sq_signed.real() / n) <= bound);
  CHECK(std::abs(sum_sq_signed.imag() / n) <= bound);
  CHECK(std::abs(gram.real() / n) <= bound);
  CHECK(std::abs(gram.imag() / n) <= bound);
}

TEST_CASE("section sampling") {
  const SectionSample s = sample_section(12, 5, 31);
  CHECK(s.k == 12);
  CHECK(s.coeffs.size() == 13);
  for (std::size_t j = 0; j < s.coeffs.size(); ++j) {
    CHECK(s.coeffs[j] ==
          gaussian_draw(5, 31, static_cast<std::uint32_t>(j)));
  }
  const SectionSample again = sample_section(12, 5, 31);
  CHECK(again.coeffs == s.coeffs);
  CHECK_THROWS_AS(sample_section(0, 5, 31), std::invalid_argument);
}

TEST_CASE("polynomial roots on constructed cases") {
  // (z - 1)(z - 2)(z - 3) = -6 + 11 z - 6 z^2 + z^3.
  {
    const std::array<std::complex<double>, 4> c{-6.0, 11.0, -6.0, 1.0};
    const RootResult rr = polynomial_roots(c);
    REQUIRE(rr.roots.size() == 3);
    CHECK(rr.converged);
    CHECK(rr.max_backward_error <= 1e-12);
    const auto r = sorted_roots(rr.roots);
    CHECK(std::abs(r[0] - 1.0) <= 1e-10);
    CHECK(std::abs(r[1] - 2.0) <= 1e-10);
    CHECK(std::abs(r[2] - 3.0) <= 1e-10);
  }
  // Roots straddling both charts: {10, 0.1, -5i}.
  {
    const std::complex<double> i{0.0, 1.0};
    const std::array<std::complex<double>, 4> c{
        5.0 * i, 1.0 - 50.5 * i, -10.1 + 5.0 * i, 1.0};
    const RootResult rr = polynomial_roots(c);
    REQUIRE(rr.roots.size() == 3);
    CHECK(rr.max_backward_error <= 1e-12);
    const auto r = sorted_roots(rr.roots);
    CHECK(std::abs(r[0] - (-5.0 * i)) <= 1e-9);
    CHECK(std::abs(r[1] - 0.1) <= 1e-9);
    CHECK(std::abs(r[2] - 10.0) <= 1e-9);
  }
  // Degree one.
  {
    const std::array<std::complex<double>, 2> c{-3.0, 2.0};
    const RootResult rr = polynomial_roots(c);
    REQUIRE(rr.roots.size() == 1);
    CHECK(std::abs(rr.roots[0] - 1.5) <= 1e-14);
  }
  // Invalid inputs.
  {
    const std::array<std::complex<double>, 1> c{1.0};
    CHECK_THROWS_AS(polynomial_roots(c), std::invalid_argument);
    const std::array<std::complex<double>, 3> lead0{1.0, 1.0, 0.0};
    CHECK_THROWS_AS(polynomial_roots(lead0), std::invalid_argument);
    const std::array<std::complex<double>, 3> tail0{0.0, 1.0, 1.0};
    CHECK_THROWS_AS(polynomial_roots(tail0), std::invalid_argument);
  }
}

TEST_CASE("polynomial roots certify on random high degree") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> nd;
  std::vector<std::complex<double>> c(61);
  for (auto& v : c) v = {nd(rng), nd(rng)};
  if (std::abs(c.front()) < 1e-3) c.front() = 1.0;
  if (std::abs(c.back()) < 1e-3) c.back() = 1.0;
  const RootResult rr = polynomial_roots(c);
  REQUIRE(rr.roots.size() == 60);
  CHECK(rr.converged);
  CHECK(rr.max_backward_error <= 1e-12);
}

TEST_CASE("zeros of a linear section") {
  SectionSample s;
  s.k = 1;
  s.coeffs = {{0.4, -0.3}, {1.2, 0.5}};
  const auto zs = zeros_of_section(s);
  REQUIRE(zs.has_value());
  REQUIRE(zs->points.size() == 1);
  const std::complex<double> root = -s.coeffs[0] / s.coeffs[1];
  CHECK(chart_gap(zs->points[0], root) <= 1e-12);
}

TEST_CASE("zeros of a constructed cubic section") {
  // Coefficients chosen so the section's polynomial is (z-1)(z-2)(z-3):
  // the basis weight on z^j is sqrt(C(3, j)).
  SectionSample s;
  s.k = 3;
  s.coeffs = {{-6.0, 0.0},
              {11.0 / std::sqrt(3.0), 0.0},
              {-6.0 / std::sqrt(3.0), 0.0},
              {1.0, 0.0}};
  const auto zs = zeros_of_section(s);
  REQUIRE(zs.has_value());
  REQUIRE(zs->points.size() == 3);
  for (double r : {1.0, 2.0, 3.0}) {
    double best = 10.0;
    for (const auto& p : zs->points) {
      best = std::min(best, chart_gap(p, r));
    }
    CHECK(best <= 1e-10);
  }
}

TEST_CASE("zero sets are complete and certified across samples") {
  const int k = 40;
  std::int64_t fallbacks = 0;
  for (int i = 0; i < 200; ++i) {
    const auto zs = zeros_of_section(sample_section(k, 123, i));
    REQUIRE(zs.has_value());
    CHECK(zs->points.size() == static_cast<std::size_t>(k));
    CHECK(zs->max_backward_error <= 1e-8);
    fallbacks += zs->used_fallback ? 1 : 0;
  }
  CHECK(fallbacks == 0);
}

TEST_CASE("linear statistic basics") {
  const auto zs = zeros_of_section(sample_section(17, 2, 4));
  REQUIRE(zs.has_value());
  // The constant form counts the zeros exactly.
  CHECK(linear_statistic(*zs, find_testform("one")) == 17.0);
  // psi1 is odd under the antipodal map.
  ZeroSet pair;
  pair.k = 2;
  pair.points = {ProjectivePoint::from_sphere({0.36, 0.48, 0.8}),
                 ProjectivePoint::from_sphere({-0.36, -0.48, -0.8})};
  CHECK(std::abs(linear_statistic(pair, find_testform("psi1"))) <= 1e-15);
}

TEST_CASE("mc variance reproducibility") {
  const TestForm& psi1 = find_testform("psi1");
  CHECK_THROWS_AS(mc_variance(5, psi1, 1, 42), std::invalid_argument);

  const MCEstimate a = mc_variance(8, psi1, 300, 2024);
  const MCEstimate b = mc_variance(8, psi1, 300, 2024);
  CHECK(a.mean == b.mean);
  CHECK(a.variance == b.variance);
  CHECK(a.stderr_mean == b.stderr_mean);
  CHECK(a.stderr_variance == b.stderr_variance);
  CHECK(a.n_samples == 300);
  CHECK(a.seed == 2024);
  CHECK(a.rejected == 0);

  // Thread count must not change a single bit.
  const char* old = std::getenv("ZVAR_THREADS");
  const std::string saved = old ? old : "";
  setenv("ZVAR_THREADS", "1", 1);
  const MCEstimate one_thread = mc_variance(8, psi1, 300, 2024);
  setenv("ZVAR_THREADS", "3", 1);
  const MCEstimate three_threads = mc_variance(8, psi1, 300, 2024);
  if (old) {
    setenv("ZVAR_THREADS", saved.c_str(), 1);
  } else {
    unsetenv("ZVAR_THREADS");
  }
  CHECK(one_thread.mean == three_threads.mean);
  CHECK(one_thread.variance == three_threads.variance);
  CHECK(one_thread.mean == a.mean);
  CHECK(one_thread.variance == a.variance);
}

TEST_CASE("mc variance of a constant statistic vanishes") {
  const MCEstimate est = mc_variance(6, find_testform("one"), 64, 7);
  CHECK(est.mean == 6.0);
  CHECK(est.variance == 0.0);
}

TEST_CASE("mc stderr follows the square-root law") {
  const TestForm& psi1 = find_testform("psi1");
  const MCEstimate small = mc_variance(20, psi1, 3000, 77);
  const MCEstimate large = mc_variance(20, psi1, 12000, 77);
  const double ratio = large.stderr_variance / small.stderr_variance;
  CHECK(ratio == doctest::Approx(0.5).epsilon(0.2));
}

TEST_CASE("mc variance matches the exact value") {
  const TestForm& psi1 = find_testform("psi1");
  const int k = 30;
  const MCEstimate est = mc_variance(k, psi1, 4000, 7);
  const double exact = zonal_variance_oracle(psi1, k);
  CHECK(std::abs(est.variance - exact) <= 4.0 * est.stderr_variance);
  CHECK(est.stderr_variance <= 0.05 * exact);
}

TEST_CASE("linear statistic is approximately symmetric") {
  const TestForm& psi1 = find_testform("psi1");
  const int n = 4000;
  std::vector<double> vals;
  vals.reserve(n);
  for (int i = 0; i < n; ++i) {
    const auto zs = zeros_of_section(sample_section(20, 13, i));
    REQUIRE(zs.has_value());
    vals.push_back(linear_statistic(*zs, psi1));
  }
  double mean = 0.0;
  for (double v : vals) mean += v;
  mean /= n;
  double m2 = 0.0, m3 = 0.0;
  for (double v : vals) {
    const double d = v - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  const double skew = m3 / std::pow(m2, 1.5);
  // The antipodal symmetry of the ensemble kills the third moment; the
  // empirical skewness is within sampling noise of zero.
  CHECK(std::abs(skew) <= 5.0 * std::sqrt(6.0 / n));
}

TEST_CASE("disk count statistics") {
  CHECK_THROWS_AS(mc_number_variance(5, 0.0, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(mc_number_variance(5, -0.2, 10, 1), std::invalid_argument);
  CHECK_THROWS_AS(mc_number_variance(5, kPi / 2.0, 10, 1),
                  std::invalid_argument);

  // A disk of radius pi/2 - eps is all of CP^1 minus a point: the count is
  // k almost surely.
  const MCEstimate full = mc_number_variance(10, kPi / 2.0 - 1e-6, 50, 2);
  CHECK(full.mean == doctest::Approx(10.0).epsilon(1e-15));
  CHECK(full.variance == 0.0);

  // Hemisphere mean count is k/2.
  const MCEstimate hemi = mc_number_variance(50, kPi / 4.0, 2000, 11);
  CHECK(std::abs(hemi.mean - 25.0) <= 4.0 * hemi.stderr_mean);
  CHECK(hemi.variance > 0.0);
}

}  // TEST_SUITE
