#include "zvar/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace zvar {

Rule1D gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  Rule1D rule;
  rule.x.resize(n);
  rule.w.resize(n);
  // Nodes are symmetric; solve for the non-negative half.
  int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Tricomi-style initial guess for the i-th root (descending order).
    double theta = std::numbers::pi * (i + 0.75) / (n + 0.5);
    double x = std::cos(theta);
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // Legendre recurrence: p2 = P_n(x), pp = P_n'(x).
      double p0 = 1.0, p1 = x;
      for (int j = 2; j <= n; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) {
        // One final polish after convergence.
        double q0 = 1.0, q1 = x;
        for (int j = 2; j <= n; ++j) {
          double q2 = ((2.0 * j - 1.0) * x * q1 - (j - 1.0) * q0) / j;
          q0 = q1;
          q1 = q2;
        }
        pp = n * (x * q1 - q0) / (x * x - 1.0);
        x -= q1 / pp;
        break;
      }
    }
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.x[i] = -x;  // ascending order
    rule.w[i] = w;
    rule.x[n - 1 - i] = x;
    rule.w[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.x[n / 2] = 0.0;
  return rule;
}

Rule1D gauss_legendre(int n, double a, double b) {
  Rule1D base = gauss_legendre(n);
  double mid = 0.5 * (a + b), hw = 0.5 * (b - a);
  for (int i = 0; i < n; ++i) {
    base.x[i] = mid + hw * base.x[i];
    base.w[i] *= hw;
  }
  return base;
}

Rule1D graded_gauss(int n, double b, int levels) {
  if (levels < 1) throw std::invalid_argument("graded_gauss: levels must be >= 1");
  if (!(b > 0)) throw std::invalid_argument("graded_gauss: b must be > 0");
  Rule1D out;
  out.x.reserve(static_cast<std::size_t>(n) * levels);
  out.w.reserve(static_cast<std::size_t>(n) * levels);
  double hi = b;
  // Assemble panels from the outermost inward; the innermost panel starts at 0.
  std::vector<Rule1D> panels;
  for (int l = 0; l < levels; ++l) {
    double lo = (l == levels - 1) ? 0.0 : hi * 0.5;
    panels.push_back(gauss_legendre(n, lo, hi));
    hi = lo;
  }
  for (auto it = panels.rbegin(); it != panels.rend(); ++it) {
    out.x.insert(out.x.end(), it->x.begin(), it->x.end());
    out.w.insert(out.w.end(), it->w.begin(), it->w.end());
  }
  return out;
}

double pairwise_sum(std::span<const double> v) {
  std::size_t n = v.size();
  if (n == 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

}  // namespace zvar
