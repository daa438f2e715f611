// Variance of linear statistics of the zero set: the exact bipotential
// double integral, an independent 1-D zonal-reduction oracle, the asymptotic
// coefficients A0/A1 with their three geometric integrals, Wick moments and
// the curvature contraction, the Gaussian-integral series-exchange residual,
// the multinomial expansion coefficients, and least-squares extraction of
// the expansion coefficients from computed data.

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "zvar/geometry.hpp"
#include "zvar/specfun.hpp"

namespace zvar {

// Node counts for the exact bipotential integral.  The outer z-integral uses
// two charts with outer_nodes radial x 2*outer_nodes angular Gauss-Legendre
// points each.  The inner w-integral runs in geodesic polar coordinates
// around z: a dyadically graded radial mesh with inner_radial nodes per panel
// on the near window [0, cutoff_b * sqrt(log k / k)], a coarse far tail, and
// inner_angular equispaced angular nodes.
struct QuadratureSpec {
  int outer_nodes = 32;
  int inner_radial = 12;
  int inner_angular = 24;
  double cutoff_b = 2.0;

  // The near window must capture everything above the far-field decay
  // threshold: cutoff_b^2 >= 4 keeps the tail below k^{-4}.
  void validate() const;
};

enum class Route { mc, exact, asymptotic };

struct VarianceResult {
  double value = 0.0;
  Route route = Route::exact;
  int k = 0;
  std::string testform;
  double error_estimate = 0.0;
};

// The three geometric integrals feeding the expansion coefficients:
//   i_ff    = integral of f^2 over the manifold,
//   i_rff   = integral of (scalar curvature) * f^2,
//   i_dbarf = Dirichlet-type energy of f (equals (lambda/4) * i_ff for a
//             Laplace eigenfunction with Lap psi = -lambda psi).
struct CoefficientIntegrals {
  double i_ff = 0.0;
  double i_rff = 0.0;
  double i_dbarf = 0.0;
};

struct AsymptoticCoefficients {
  double a0 = 0.0;
  double a1 = 0.0;
  int m = 1;
  CoefficientIntegrals integrals;
};

// Exact variance of the linear statistic at degree k:
//   Var = integral over M x M of Q_k(z, w) f(z) f(w) Omega(z) Omega(w).
// The value is the doubled-node evaluation; error_estimate is the difference
// between the doubled and base evaluations.  Throws on k < 1, on an invalid
// spec, and when the doubling difference exceeds ten times the 1e-6 relative
// target (quadrature non-convergence).
VarianceResult exact_variance(const TestForm& tf, int k,
                              const QuadratureSpec& spec = {});

// Independent 1-D oracle for eigenfunction test forms.  Q_k depends only on
// the geodesic distance, so for f in a single spherical-harmonic level l the
// double integral collapses by the Funk-Hecke theorem to
//   Var = (pi/2) * i_ff * integral_{-1}^{1} G(((1+t)/2)^k) P_l(t) dt.
// Requires tf.lambda (throws invalid_argument otherwise); lambda = 0 gives 0.
double zonal_variance_oracle(const TestForm& tf, int k,
                             const SeriesTolerance& tol = {});

// Dirichlet energy of f by finite-difference gradients under the invariant
// chart formula |df/dzbar|^2 (1+|z|^2)^2 integrated over the manifold
// (Richardson-extrapolated central differences).
double dbar_energy(const TestForm& tf);

// i_ff and i_rff by manifold quadrature; i_dbarf by the eigenvalue identity
// (lambda/4) * i_ff when tf carries an eigenvalue, else by dbar_energy.
CoefficientIntegrals coefficient_integrals(const TestForm& tf);

// Expansion coefficients in Var = A0 k^{-m} + A1 k^{-m-1} + ...:
//   A0 = pi^{m-2} zeta(m+2) / 4 * i_ff,
//   A1 = -pi^{m-2} zeta(m+3) * (i_rff / 8 + i_dbarf / 4).
// Requires m >= 1.
AsymptoticCoefficients asymptotic_coefficients(int m,
                                               const CoefficientIntegrals& integrals);

// Gaussian moment E[v_{u1} ... v_{uA} conj(v_{b1}) ... conj(v_{bB})] for a
// standard complex Gaussian vector v with m independent entries: the
// permanent of the 0/1 index-match matrix (0 when the multiset sizes
// differ).  Indices must lie in 1..m.
long long wick_moment(int m, std::span<const int> up_indices,
                      std::span<const int> bar_indices);

// Contraction of the curvature tensor against the quartic Gaussian moment
// E[v_j conj(v_l) v_p conj(v_q)] evaluated through wick_moment; equals
// 2 * rho for the constant-curvature tensor.
double curvature_wick_contraction(const CurvatureData& curvature);

// Polynomial in the radial variable s = |u|^2: p(s) = sum_j c[j] s^j.
struct RadialPolynomial {
  std::vector<double> c;
  [[nodiscard]] double operator()(double s) const;
  [[nodiscard]] int degree() const { return static_cast<int>(c.size()) - 1; }
};

// Residual |LHS - RHS| of the series-exchange identity
//   LHS = integral over C^m of G(e^{-|u|^2} (1 + alpha(u)/k)) F(u) d(vol),
//   RHS = (pi^m / ((m-1)! 4 pi^2)) * sum_p p! [Ft_p zeta(p+3)
//         + (alpha*Ft)_p zeta(p+2) / k],   Ft(s) = F(s) s^{m-1},
// with alpha and F given as radial polynomials, m in {1, 2}.  Requires the
// domination precondition 1 + |alpha(s)|/k <= e^{s/2} (checked on a grid;
// domain_error otherwise).
double gint_identity_residual(const RadialPolynomial& alpha,
                              const RadialPolynomial& F, int k, int m);

// Coefficient B_{pj} of x^j in (1 + sum_{l=2}^{p} C_l x^l)^n:
//   B_{pj} = sum over {r : sum_l l r_l = j} of
//            n(n-1)...(n-|r|+1) / (r_2! ... r_p!) * prod C_l^{r_l}.
// c spans C_2..C_p (c[0] = C_2).  Requires n >= 0 and j >= 2.  Exact when
// the C_l are integers of moderate size.
double multinomial_expand(std::span<const double> c, int n, int j);

struct FitPoint {
  int k = 0;
  double variance = 0.0;
};

struct FitResult {
  double a0 = 0.0;
  double a1 = 0.0;
  double residual_norm = 0.0;  // weighted RMS of the k*Var residuals
};

// Weighted least squares of k*Var against [1, 1/k] with weights k^2 (the
// neglected term is O(k^{-2}) in k*Var, so this keeps the a1 estimate
// unbiased to leading order).  Requires >= 3 distinct k values.
FitResult fit_expansion(std::span<const FitPoint> data);

}  // namespace zvar
