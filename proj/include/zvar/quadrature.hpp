// Gauss-Legendre rules and deterministic summation.

#pragma once

#include <span>
#include <vector>

namespace zvar {

// One-dimensional quadrature rule: sum_i w[i] * f(x[i]).
struct Rule1D {
  std::vector<double> x;
  std::vector<double> w;
  [[nodiscard]] int size() const { return static_cast<int>(x.size()); }
};

// n-point Gauss-Legendre rule on [-1, 1] (Newton iteration on the Legendre
// recurrence; nodes accurate to machine precision).
Rule1D gauss_legendre(int n);

// n-point Gauss-Legendre rule mapped to [a, b].
Rule1D gauss_legendre(int n, double a, double b);

// Composite rule on [0, b] graded dyadically toward 0: panels
// [0, b*2^{1-levels}], [b*2^{1-levels}, b*2^{2-levels}], ..., [b/2, b],
// each carrying an n-point Gauss-Legendre rule.  Resolves integrands with
// integrable endpoint singularities (log, mild powers) at the origin.
Rule1D graded_gauss(int n, double b, int levels);

// Pairwise (fixed binary tree) summation; deterministic and O(eps log n)
// accurate regardless of how the values were produced.
double pairwise_sum(std::span<const double> v);

}  // namespace zvar
