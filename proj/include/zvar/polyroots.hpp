// All complex roots of a polynomial: Aberth-Ehrlich iteration seeded by
// Newton-polygon radii, a companion-matrix eigenvalue fallback, per-chart
// Newton polish, and a backward-error certificate for every root.

#pragma once

#include <complex>
#include <span>
#include <vector>

namespace zvar {

struct RootResult {
  std::vector<std::complex<double>> roots;
  // max over roots of |p(z)| / (max|c| * degree), with p evaluated in the
  // bounded chart (the reversed polynomial at 1/z when |z| > 1).
  double max_backward_error = 0.0;
  bool used_fallback = false;  // companion-matrix eigenvalues were needed
  bool converged = true;       // false when even the fallback failed
};

// Roots of c[0] + c[1] z + ... + c[n] z^n.  Requires n >= 1, c[n] != 0, and
// c[0] != 0 (strip exact zeros at 0 and at infinity before calling).
RootResult polynomial_roots(std::span<const std::complex<double>> coeffs);

}  // namespace zvar
