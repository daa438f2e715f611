#include "zvar/specfun.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace zvar {

namespace {

// Bernoulli numbers B_2, B_4, ..., B_16 for the Euler-Maclaurin correction.
constexpr double kBernoulli[] = {
    1.0 / 6.0,     -1.0 / 30.0,    1.0 / 42.0,   -1.0 / 30.0,
    5.0 / 66.0,    -691.0 / 2730.0, 7.0 / 6.0,   -3617.0 / 510.0};

// Dilogarithm Li2(x) for |x| <= 1/2 by the ascending series with Kahan
// compensation.  The tail after term n is bounded by
// |x|^{n+1} / ((n+1)^2 (1-|x|)), which is how convergence is certified.
double li2_series(double x, double abs_tol, int max_terms) {
  double sum = 0.0, comp = 0.0;
  double power = 1.0;
  double ax = std::abs(x);
  for (int n = 1; n <= max_terms; ++n) {
    power *= x;
    double term = power / (static_cast<double>(n) * n);
    double y = term - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
    double tail = std::pow(ax, n + 1) / ((n + 1.0) * (n + 1.0) * (1.0 - ax));
    if (tail <= abs_tol) return sum;
  }
  throw std::runtime_error("g_function: series did not reach tolerance within max_terms");
}

}  // namespace

double riemann_zeta(double s) {
  if (!(s > 1.0)) throw std::domain_error("riemann_zeta: requires s > 1");
  constexpr int N = 32;
  double sum = 0.0, comp = 0.0;
  for (int n = 1; n < N; ++n) {
    double term = std::pow(static_cast<double>(n), -s);
    double y = term - comp;
    double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  // For very large s the partial sum is already exact to double precision and
  // the correction terms underflow; skip them.
  if (s > 200.0) return sum + std::pow(static_cast<double>(N), -s);
  // Euler-Maclaurin tail at N: integral + half term + Bernoulli corrections.
  double ns = std::pow(static_cast<double>(N), -s);
  sum += ns * N / (s - 1.0);  // N^{1-s}/(s-1)
  sum += 0.5 * ns;
  // term_j = B_{2j}/(2j)! * s(s+1)...(s+2j-2) * N^{-s-2j+1}
  // built incrementally; factorials folded into the running product.
  double poch_over_fact = 1.0;       // s(s+1)...(s+2j-2)/(2j)! accumulated
  double npow = ns * N;              // N^{-s-2j+1}, starts at N^{1-s}
  for (int j = 1; j <= 8; ++j) {
    int two_j = 2 * j;
    if (j == 1) {
      poch_over_fact = s / 2.0;
    } else {
      poch_over_fact *= (s + two_j - 3.0) * (s + two_j - 2.0) /
                        (static_cast<double>(two_j - 1) * two_j);
    }
    npow /= static_cast<double>(N) * N;
    sum += kBernoulli[j - 1] * poch_over_fact * npow;
  }
  return sum;
}

double g_function(double t, const SeriesTolerance& tol) {
  if (!(tol.abs_tol > 0.0)) throw std::invalid_argument("g_function: abs_tol must be > 0");
  if (tol.max_terms < 1) throw std::invalid_argument("g_function: max_terms must be >= 1");
  if (!(t >= -1.0 && t <= 1.0)) throw std::domain_error("g_function: requires t in [-1, 1]");
  constexpr double four_pi2 = 4.0 * std::numbers::pi * std::numbers::pi;
  constexpr double pi2_6 = std::numbers::pi * std::numbers::pi / 6.0;
  if (t == 0.0) return 0.0;
  if (t == 1.0) return 1.0 / 24.0;  // zeta(2)/(4 pi^2)
  double li2_tol = tol.abs_tol * four_pi2;
  double li2;
  if (t > 0.5) {
    // Reflection: Li2(t) = pi^2/6 - log(t) log(1-t) - Li2(1-t), argument <= 1/2.
    li2 = pi2_6 - std::log(t) * std::log1p(-t) - li2_series(1.0 - t, li2_tol, tol.max_terms);
  } else if (t < -0.5) {
    // Landen: Li2(t) = -Li2(t/(t-1)) - log^2(1-t)/2, argument in (1/3, 1/2].
    double u = t / (t - 1.0);
    double l = std::log1p(-t);
    li2 = -li2_series(u, li2_tol, tol.max_terms) - 0.5 * l * l;
  } else {
    li2 = li2_series(t, li2_tol, tol.max_terms);
  }
  return li2 / four_pi2;
}

}  // namespace zvar
