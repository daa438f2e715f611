// Special functions: the Riemann zeta function on (1, inf) and the rescaled
// dilogarithm G(t) = (1/4pi^2) sum_{n>=1} t^n/n^2 on [-1, 1].

#pragma once

namespace zvar {

// Truncation control for the defining series of G.
struct SeriesTolerance {
  double abs_tol = 1e-13;  // absolute error budget on the returned value
  int max_terms = 2000000; // hard cap on summed terms
};

// zeta(s) for real s > 1, absolute error well below 1e-12 across the range
// (Euler-Maclaurin corrected partial sum).  Throws std::domain_error for
// s <= 1.
double riemann_zeta(double s);

// G(t) for t in [-1, 1] with |error| <= tol.abs_tol.  Nonnegative and
// nondecreasing on [0, 1]; G(1) = 1/24, G(-1) = -1/48.  Throws
// std::domain_error for |t| > 1, std::invalid_argument for a bad tolerance,
// and std::runtime_error if max_terms is exhausted before the tail bound
// meets abs_tol.
double g_function(double t, const SeriesTolerance& tol = {});

}  // namespace zvar
