// Monte Carlo over the SU(2) ensemble: random sections, their zero sets,
// linear statistics, and empirical variances with reproducible seeding.

#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include "zvar/geometry.hpp"

namespace zvar {

// A random degree-k section expressed by its coefficients c_j in the
// orthonormal monomial basis: i.i.d. standard complex Gaussians.
struct SectionSample {
  int k = 0;
  std::vector<std::complex<double>> coeffs;  // size k + 1
};

// coeffs[j] = gaussian_draw(seed, index, j): deterministic in (seed, index)
// and independent across indices, so sampling parallelizes freely.
SectionSample sample_section(int k, std::uint64_t seed, std::uint64_t index);

// The k zeros of a section, counted with multiplicity, as projective points.
struct ZeroSet {
  std::vector<ProjectivePoint> points;
  int k = 0;
  // Largest backward error |p(z)| / (max|coeff| * k) over the zeros,
  // evaluated in the chart where the root coordinate has modulus <= 1.
  double max_backward_error = 0.0;
  bool used_fallback = false;  // eigenvalue fallback engaged
};

// All k roots of sum_j c_j w_j z^j (w_j the orthonormal basis weights) via
// Aberth-Ehrlich with a companion-matrix eigenvalue fallback.  Roots with
// |z| > 1 are refined in the conjugate chart.  Returns nullopt when the
// sample is degenerate or the certified backward error exceeds 1e-8.
std::optional<ZeroSet> zeros_of_section(const SectionSample& s);

// Sum of psi over the zero set (the pairing (Z_{s^k}, psi) for m = 1).
double linear_statistic(const ZeroSet& zs, const TestForm& tf);

// Empirical summary of a Monte Carlo run.  Bit-for-bit reproducible from
// (seed, n_samples, k, test form) regardless of thread count.
struct MCEstimate {
  double mean = 0.0;
  double variance = 0.0;        // unbiased sample variance
  double stderr_mean = 0.0;     // sqrt(variance / n)
  double stderr_variance = 0.0; // sqrt((mu4 - mu2^2) / n), empirical moments
  std::int64_t n_samples = 0;   // accepted samples
  std::uint64_t seed = 0;
  std::int64_t rejected = 0;    // degenerate / uncertified samples discarded
  std::int64_t fallbacks = 0;   // accepted samples that used the fallback
};

// Sample variance of linear_statistic(tf) over n_samples independent
// sections.  Throws std::runtime_error if more than 1e-3 of the samples are
// rejected by the zero finder.
MCEstimate mc_variance(int k, const TestForm& tf, std::int64_t n_samples,
                       std::uint64_t seed);

// Number statistics of the geodesic disk of radius disk_radius around
// [0 : 1]: mean and variance of the zero count.  Requires
// 0 < disk_radius < pi/2.
MCEstimate mc_number_variance(int k, double disk_radius,
                              std::int64_t n_samples, std::uint64_t seed);

}  // namespace zvar
