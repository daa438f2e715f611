#include "zvar/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <sstream>
#include <stdexcept>

#include "zvar/parallel.hpp"
#include "zvar/polyroots.hpp"
#include "zvar/quadrature.hpp"
#include "zvar/rng.hpp"

namespace zvar {

namespace {

using cd = std::complex<double>;

double log_choose(int n, int j) {
  return std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
}

// One Monte Carlo pass with slot-deterministic parallelism: sample, find
// zeros, evaluate the statistic, then reduce in index order.
MCEstimate run_mc(int k, std::int64_t n_samples, std::uint64_t seed,
                  const std::function<double(const ZeroSet&)>& statistic) {
  if (n_samples < 2) {
    throw std::invalid_argument("monte carlo: need at least 2 samples");
  }

  const auto n = static_cast<std::size_t>(n_samples);
  std::vector<double> slot_value(n, 0.0);
  std::vector<char> slot_ok(n, 0);
  std::vector<char> slot_fallback(n, 0);

  parallel_for(n_samples, [&](std::int64_t i) {
    const auto idx = static_cast<std::size_t>(i);
    const SectionSample s =
        sample_section(k, seed, static_cast<std::uint64_t>(i));
    const std::optional<ZeroSet> zs = zeros_of_section(s);
    if (!zs) return;
    slot_ok[idx] = 1;
    slot_fallback[idx] = zs->used_fallback ? 1 : 0;
    slot_value[idx] = statistic(*zs);
  });

  std::vector<double> values;
  values.reserve(n);
  std::int64_t fallbacks = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (slot_ok[i]) {
      values.push_back(slot_value[i]);
      fallbacks += slot_fallback[i];
    }
  }
  const std::int64_t rejected =
      n_samples - static_cast<std::int64_t>(values.size());
  if (static_cast<double>(rejected) > 1e-3 * static_cast<double>(n_samples)) {
    std::ostringstream msg;
    msg << "monte carlo: rejection rate " << rejected << "/" << n_samples
        << " exceeds 1e-3 (k=" << k << ", seed=" << seed << ")";
    throw std::runtime_error(msg.str());
  }
  if (values.size() < 2) {
    throw std::runtime_error("monte carlo: fewer than 2 accepted samples");
  }

  // Two-pass central moments with fixed-shape pairwise reductions.
  const auto m = static_cast<double>(values.size());
  const double mean = pairwise_sum(values) / m;
  std::vector<double> d2(values.size());
  std::vector<double> d4(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - mean;
    d2[i] = d * d;
    d4[i] = d2[i] * d2[i];
  }
  const double mu2 = pairwise_sum(d2) / m;  // biased second central moment
  const double mu4 = pairwise_sum(d4) / m;

  MCEstimate est;
  est.mean = mean;
  est.variance = mu2 * m / (m - 1.0);
  est.stderr_mean = std::sqrt(std::max(0.0, est.variance / m));
  est.stderr_variance = std::sqrt(std::max(0.0, (mu4 - mu2 * mu2) / m));
  est.n_samples = static_cast<std::int64_t>(values.size());
  est.seed = seed;
  est.rejected = rejected;
  est.fallbacks = fallbacks;
  return est;
}

}  // namespace

SectionSample sample_section(int k, std::uint64_t seed, std::uint64_t index) {
  if (k < 1) throw std::invalid_argument("sample_section: k must be >= 1");
  SectionSample s;
  s.k = k;
  s.coeffs.resize(static_cast<std::size_t>(k) + 1);
  for (int j = 0; j <= k; ++j) {
    s.coeffs[static_cast<std::size_t>(j)] =
        gaussian_draw(seed, index, static_cast<std::uint32_t>(j));
  }
  return s;
}

std::optional<ZeroSet> zeros_of_section(const SectionSample& s) {
  const int k = s.k;
  if (k < 1 || s.coeffs.size() != static_cast<std::size_t>(k) + 1) {
    throw std::invalid_argument("zeros_of_section: malformed sample");
  }
  if (std::abs(s.coeffs.front()) < 1e-300 &&
      std::abs(s.coeffs.back()) < 1e-300) {
    return std::nullopt;  // degenerate at both ends of the chart
  }

  // Scale by the basis weights sqrt(C(k, j)), normalized so the largest
  // weight is 1 (the overall factor does not move the zeros).
  std::vector<double> lw(static_cast<std::size_t>(k) + 1);
  double lmax = -std::numeric_limits<double>::infinity();
  for (int j = 0; j <= k; ++j) {
    lw[static_cast<std::size_t>(j)] = 0.5 * log_choose(k, j);
    lmax = std::max(lmax, lw[static_cast<std::size_t>(j)]);
  }
  std::vector<cd> b(static_cast<std::size_t>(k) + 1);
  for (int j = 0; j <= k; ++j) {
    b[static_cast<std::size_t>(j)] =
        s.coeffs[static_cast<std::size_t>(j)] *
        std::exp(lw[static_cast<std::size_t>(j)] - lmax);
  }

  ZeroSet zs;
  zs.k = k;
  zs.points.reserve(static_cast<std::size_t>(k));

  // Exact zero coefficients at the ends are roots at the chart centers
  // (probability zero for Gaussian draws, handled for robustness).
  std::size_t lo = 0;
  std::size_t hi = b.size();
  while (lo + 1 < hi && b[lo] == 0.0) {
    zs.points.push_back(ProjectivePoint::from_affine(0.0));
    ++lo;
  }
  while (hi - 1 > lo && b[hi - 1] == 0.0) {
    zs.points.push_back(ProjectivePoint::from_conjugate(0.0));  // [1 : 0]
    --hi;
  }

  if (hi - lo >= 2) {
    const std::span<const cd> trimmed(b.data() + lo, hi - lo);
    RootResult rr = polynomial_roots(trimmed);
    if (!rr.converged || rr.max_backward_error > 1e-8) return std::nullopt;
    zs.max_backward_error = rr.max_backward_error;
    zs.used_fallback = rr.used_fallback;
    for (const cd& z : rr.roots) {
      if (std::abs(z) <= 1.0) {
        zs.points.push_back(ProjectivePoint::from_affine(z));
      } else {
        zs.points.push_back(ProjectivePoint::from_conjugate(1.0 / z));
      }
    }
  }

  if (zs.points.size() != static_cast<std::size_t>(k)) return std::nullopt;
  return zs;
}

double linear_statistic(const ZeroSet& zs, const TestForm& tf) {
  std::vector<double> vals(zs.points.size());
  for (std::size_t i = 0; i < zs.points.size(); ++i) {
    vals[i] = tf.psi(zs.points[i]);
  }
  return pairwise_sum(vals);
}

MCEstimate mc_variance(int k, const TestForm& tf, std::int64_t n_samples,
                       std::uint64_t seed) {
  return run_mc(k, n_samples, seed, [&tf](const ZeroSet& zs) {
    return linear_statistic(zs, tf);
  });
}

MCEstimate mc_number_variance(int k, double disk_radius,
                              std::int64_t n_samples, std::uint64_t seed) {
  if (!(disk_radius > 0.0) || !(disk_radius < 1.5707963267948966)) {
    throw std::invalid_argument(
        "mc_number_variance: disk radius must lie in (0, pi/2)");
  }
  const ProjectivePoint center = ProjectivePoint::from_affine(0.0);
  return run_mc(k, n_samples, seed,
                [&center, disk_radius](const ZeroSet& zs) {
                  int count = 0;
                  for (const ProjectivePoint& p : zs.points) {
                    if (geodesic_distance(p, center) < disk_radius) ++count;
                  }
                  return static_cast<double>(count);
                });
}

}  // namespace zvar
