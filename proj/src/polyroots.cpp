// Polynomial root finding for the zero-set sampler.

#include "zvar/polyroots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace zvar {

namespace {

using cd = std::complex<double>;

struct PolyEval {
  cd p;
  cd dp;
};

PolyEval eval_poly(std::span<const cd> c, cd z) {
  cd p = c.back();
  cd dp = 0.0;
  for (std::size_t i = c.size() - 1; i-- > 0;) {
    dp = dp * z + p;
    p = p * z + c[i];
  }
  return {p, dp};
}

// Newton correction p/p' in the bounded chart.  For |z| > 1 the reversed
// polynomial q(w) = w^n p(1/w) gives p/p' = z q / (n q - w q') at w = 1/z,
// which avoids the overflow-prone powers of z.
cd newton_correction(std::span<const cd> c, std::span<const cd> rev, cd z,
                     int n) {
  if (std::abs(z) <= 1.0) {
    const PolyEval e = eval_poly(c, z);
    if (e.p == 0.0) return 0.0;
    return e.p / e.dp;
  }
  const cd w = 1.0 / z;
  const PolyEval e = eval_poly(rev, w);
  if (e.p == 0.0) return 0.0;
  return z * e.p / (static_cast<double>(n) * e.p - w * e.dp);
}

// Initial guesses from the Newton polygon: the upper convex hull of
// (j, log|c_j|) partitions the roots into groups of equal approximate
// modulus exp((v1 - v2)/(j2 - j1)) per hull edge; angles are spread evenly
// with a per-edge stagger so no two guesses coincide.
std::vector<cd> initial_guesses(std::span<const cd> c) {
  const int n = static_cast<int>(c.size()) - 1;
  std::vector<int> idx;
  std::vector<double> logv;
  for (int j = 0; j <= n; ++j) {
    const double a = std::abs(c[static_cast<std::size_t>(j)]);
    if (a > 0.0) {
      idx.push_back(j);
      logv.push_back(std::log(a));
    }
  }
  // Upper convex hull over (idx, logv); endpoints j=0 and j=n are present by
  // the caller's contract.
  std::vector<std::size_t> hull;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2];
      const std::size_t b = hull[hull.size() - 1];
      const double cross = (idx[b] - idx[a]) * (logv[i] - logv[a]) -
                           (idx[i] - idx[a]) * (logv[b] - logv[a]);
      if (cross >= 0.0) {
        hull.pop_back();
      } else {
        break;
      }
    }
    hull.push_back(i);
  }

  std::vector<cd> guesses;
  guesses.reserve(static_cast<std::size_t>(n));
  constexpr double kTwoPi = 2.0 * std::numbers::pi;
  for (std::size_t e = 0; e + 1 < hull.size(); ++e) {
    const int j1 = idx[hull[e]];
    const int j2 = idx[hull[e + 1]];
    const double v1 = logv[hull[e]];
    const double v2 = logv[hull[e + 1]];
    const int count = j2 - j1;
    const double radius = std::exp((v1 - v2) / count);
    const double stagger = 0.69 * static_cast<double>(e) + 0.5;
    for (int t = 0; t < count; ++t) {
      const double angle = kTwoPi * (t + 0.5) / count + stagger;
      guesses.emplace_back(radius * std::cos(angle), radius * std::sin(angle));
    }
  }
  return guesses;
}

std::vector<cd> companion_roots(std::span<const cd> c) {
  const int n = static_cast<int>(c.size()) - 1;
  Eigen::MatrixXcd a = Eigen::MatrixXcd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    a(i, n - 1) = -c[static_cast<std::size_t>(i)] / c[static_cast<std::size_t>(n)];
  }
  for (int i = 1; i < n; ++i) a(i, i - 1) = 1.0;
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(a, false);
  std::vector<cd> roots(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) roots[static_cast<std::size_t>(i)] = solver.eigenvalues()(i);
  return roots;
}

}  // namespace

RootResult polynomial_roots(std::span<const cd> coeffs) {
  const int n = static_cast<int>(coeffs.size()) - 1;
  if (n < 1) {
    throw std::invalid_argument("polynomial_roots: degree must be >= 1");
  }
  if (coeffs.back() == 0.0 || coeffs.front() == 0.0) {
    throw std::invalid_argument(
        "polynomial_roots: leading and constant coefficients must be nonzero "
        "(strip exact zeros first)");
  }

  std::vector<cd> rev(coeffs.rbegin(), coeffs.rend());
  double cmax = 0.0;
  for (const cd& v : coeffs) cmax = std::max(cmax, std::abs(v));

  std::vector<cd> z = initial_guesses(coeffs);
  std::vector<char> frozen(z.size(), 0);

  bool all_frozen = false;
  for (int iter = 0; iter < 100 && !all_frozen; ++iter) {
    all_frozen = true;
    for (std::size_t i = 0; i < z.size(); ++i) {
      if (frozen[i]) continue;
      const cd ni = newton_correction(coeffs, rev, z[i], n);
      cd s = 0.0;
      for (std::size_t j = 0; j < z.size(); ++j) {
        if (j != i) s += 1.0 / (z[i] - z[j]);
      }
      const cd denom = 1.0 - ni * s;
      cd step = (denom == 0.0) ? ni : ni / denom;
      if (!std::isfinite(step.real()) || !std::isfinite(step.imag())) {
        // Colliding estimates: deterministic nudge, then keep iterating.
        const double jitter = 1e-6 * (1.0 + std::abs(z[i]));
        z[i] += cd(jitter, jitter * (static_cast<double>(i) + 1.0) * 0.37);
        all_frozen = false;
        continue;
      }
      z[i] -= step;
      if (std::abs(step) <= 5e-15 * (1.0 + std::abs(z[i]))) {
        frozen[i] = 1;
      } else {
        all_frozen = false;
      }
    }
  }

  RootResult result;
  result.roots = std::move(z);
  if (!all_frozen) {
    result.used_fallback = true;
    result.roots = companion_roots(coeffs);
    for (const cd& r : result.roots) {
      if (!std::isfinite(r.real()) || !std::isfinite(r.imag())) {
        result.converged = false;
        result.max_backward_error = std::numeric_limits<double>::infinity();
        return result;
      }
    }
  }

  // Newton polish in the bounded chart, then certify.
  for (cd& r : result.roots) {
    for (int step = 0; step < 3; ++step) {
      const cd corr = newton_correction(coeffs, rev, r, n);
      if (!std::isfinite(corr.real()) || !std::isfinite(corr.imag())) break;
      r -= corr;
    }
  }
  double worst = 0.0;
  for (const cd& r : result.roots) {
    const double value = (std::abs(r) <= 1.0)
                             ? std::abs(eval_poly(coeffs, r).p)
                             : std::abs(eval_poly(rev, 1.0 / r).p);
    worst = std::max(worst, value / (cmax * n));
  }
  result.max_backward_error = worst;
  return result;
}

}  // namespace zvar
