#include "zvar/kernels.hpp"

#include <boost/multiprecision/cpp_bin_float.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

#include "zvar/quadrature.hpp"

namespace zvar {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

namespace bmp = boost::multiprecision;
using Big50 = bmp::number<bmp::cpp_bin_float<50>>;
using Big150 = bmp::number<bmp::cpp_bin_float<150>>;
using Big350 = bmp::number<bmp::cpp_bin_float<350>>;
using Big800 = bmp::number<bmp::cpp_bin_float<800>>;

// Gauss-Legendre nodes/weights on [0, 1] refined to Big precision by Newton
// iteration from double-precision starting values (roots are simple, so a
// handful of quadratic-convergence steps reach full precision).
template <class Big>
void gauss_legendre_big(int n, std::vector<Big>& x01, std::vector<Big>& w01) {
  Rule1D seed = gauss_legendre(n);  // on [-1, 1], ascending
  x01.resize(n);
  w01.resize(n);
  int newton_steps = 3;
  for (int d = 16; d < std::numeric_limits<Big>::digits10; d *= 2) ++newton_steps;
  for (int i = 0; i < n; ++i) {
    Big x = seed.x[i];
    Big pp = 0;
    for (int it = 0; it < newton_steps; ++it) {
      Big p0 = 1, p1 = x;
      for (int j = 2; j <= n; ++j) {
        Big p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      pp = n * (x * p1 - p0) / (x * x - 1);
      x -= p1 / pp;
    }
    // One recurrence pass at the converged node for the weight.
    Big p0 = 1, p1 = x;
    for (int j = 2; j <= n; ++j) {
      Big p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    pp = n * (x * p1 - p0) / (x * x - 1);
    Big w = 2 / ((1 - x * x) * pp * pp);
    x01[i] = (x + 1) / 2;
    w01[i] = w / 2;
  }
}

// Reciprocal norms 1/I_j with I_j = integral_0^1 x^j (1-x)^{k-j} dx evaluated
// by Big-precision Gauss-Legendre with floor(k/2)+2 nodes — exact on the
// degree-k integrand up to rounding at the working precision.  (The section
// norm is ||z^j||^2 = pi * I_j; the pi is folded in by the caller in log
// space.)  Cached per k for each precision tier.
template <class Big>
const std::vector<Big>& reciprocal_norms(int k) {
  static std::map<int, std::vector<Big>> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(k);
  if (it != cache.end()) return it->second;

  int n = k / 2 + 2;
  std::vector<Big> x, w;
  gauss_legendre_big<Big>(n, x, w);
  std::vector<Big> acc(static_cast<std::size_t>(k) + 1, Big(0));
  std::vector<Big> powx(static_cast<std::size_t>(k) + 1), pow1(static_cast<std::size_t>(k) + 1);
  for (int i = 0; i < n; ++i) {
    powx[0] = 1;
    pow1[0] = 1;
    Big omx = 1 - x[i];
    for (int j = 1; j <= k; ++j) {
      powx[j] = powx[j - 1] * x[i];
      pow1[j] = pow1[j - 1] * omx;
    }
    for (int j = 0; j <= k; ++j) acc[j] += w[i] * powx[j] * pow1[k - j];
  }
  for (auto& v : acc) v = 1 / v;
  return cache.emplace(k, std::move(acc)).first->second;
}

// Horner evaluation of sum_j (1/I_j) t^j in Big complex arithmetic; returns
// log of the modulus (or -inf if the sum is exactly zero).
template <class Big>
double basis_log_sum(int k, std::complex<double> t) {
  const std::vector<Big>& coeff = reciprocal_norms<Big>(k);
  Big sr = coeff[k], si = 0;
  Big tr = t.real(), ti = t.imag();
  for (int j = k - 1; j >= 0; --j) {
    Big nr = sr * tr - si * ti + coeff[j];
    si = sr * ti + si * tr;
    sr = nr;
  }
  Big mag2 = sr * sr + si * si;
  if (mag2 == 0) return kNegInf;
  return static_cast<double>(log(mag2)) / 2.0;
}

}  // namespace

KernelValue szego_magnitude(const ProjectivePoint& p, const ProjectivePoint& q, int k) {
  if (k < 1) throw std::domain_error("szego_magnitude: requires k >= 1");
  double ip = inner_abs(p, q);
  double lm = ip == 0.0 ? kNegInf
                        : std::log((k + 1.0) / std::numbers::pi) + k * std::log(ip);
  return {lm, k};
}

KernelValue szego_magnitude_basis(const ProjectivePoint& p, const ProjectivePoint& q, int k) {
  if (k < 1) throw std::domain_error("szego_magnitude_basis: requires k >= 1");
  // Common chart with both coordinates' product bounded by 1: affine when
  // |h1_p h1_q| dominates, conjugate otherwise.  In the conjugate chart the
  // monomial basis appears in reversed order; the norms are symmetric under
  // j <-> k-j, so the same coefficient vector serves.
  bool affine = std::abs(p.h1() * q.h1()) >= std::abs(p.h0() * q.h0());
  std::complex<double> zp = affine ? p.affine() : p.conjugate();
  std::complex<double> zq = affine ? q.affine() : q.conjugate();
  if (!std::isfinite(std::abs(zp)) || !std::isfinite(std::abs(zq))) {
    // Only possible for a pair of opposite chart poles ([1:0] with [0:1]):
    // every summand S_j(p) conj(S_j(q)) then contains an exact zero factor,
    // so the sum vanishes identically.
    return {kNegInf, k};
  }
  std::complex<double> t = zp * std::conj(zq);
  // A-priori conditioning of the monomial sum: its terms reach
  // (1+|t|)^k / pi while the result is (k+1)/pi |1+t|^k.
  double amp_nats = k * (std::log1p(std::abs(t)) - std::log(std::abs(1.0 + t)));
  double need_digits = std::isfinite(amp_nats)
                           ? amp_nats / std::numbers::ln10 + 30.0
                           : std::numeric_limits<double>::infinity();
  double log_sum;
  if (need_digits <= 50)
    log_sum = basis_log_sum<Big50>(k, t);
  else if (need_digits <= 150)
    log_sum = basis_log_sum<Big150>(k, t);
  else if (need_digits <= 350)
    log_sum = basis_log_sum<Big350>(k, t);
  else
    log_sum = basis_log_sum<Big800>(k, t);
  double lm = log_sum - std::log(std::numbers::pi) -
              0.5 * k * (std::log1p(std::norm(zp)) + std::log1p(std::norm(zq)));
  return {lm, k};
}

std::vector<double> monomial_norms_quadrature(int k) {
  if (k < 1) throw std::domain_error("monomial_norms_quadrature: requires k >= 1");
  Rule1D rule = gauss_legendre(k / 2 + 2, 0.0, 1.0);
  std::vector<double> out(static_cast<std::size_t>(k) + 1, 0.0);
  for (int i = 0; i < rule.size(); ++i) {
    double x = rule.x[i];
    // Log-domain node evaluation keeps the tiny central norms accurate.
    double lx = std::log(x), l1 = std::log1p(-x);
    for (int j = 0; j <= k; ++j)
      out[j] += rule.w[i] * std::exp(j * lx + (k - j) * l1);
  }
  for (auto& v : out) v *= std::numbers::pi;
  return out;
}

double normalized_kernel(const ProjectivePoint& p, const ProjectivePoint& q, int k) {
  if (k < 1) throw std::domain_error("normalized_kernel: requires k >= 1");
  double ip = inner_abs(p, q);
  if (ip == 0.0) return 0.0;
  return std::exp(k * std::log(ip));
}

double q_kernel(const ProjectivePoint& p, const ProjectivePoint& q, int k,
                const SeriesTolerance& tol) {
  if (k < 1) throw std::domain_error("q_kernel: requires k >= 1");
  double ip = inner_abs(p, q);
  if (ip == 0.0) return 0.0;
  return g_function(std::exp(2.0 * k * std::log(ip)), tol);
}

double q_kernel_at_distance(double dist, int k, const SeriesTolerance& tol) {
  if (k < 1) throw std::domain_error("q_kernel_at_distance: requires k >= 1");
  if (!(dist >= 0.0 && dist <= std::numbers::pi / 2))
    throw std::domain_error("q_kernel_at_distance: requires dist in [0, pi/2]");
  double c = std::cos(dist);
  if (c <= 0.0) return 0.0;
  return g_function(std::exp(2.0 * k * std::log(c)), tol);
}

DecayReport decay_margin(int k, double p_exponent) {
  if (k < 2) throw std::domain_error("decay_margin: requires k >= 2");
  if (!(p_exponent > 0.0)) throw std::domain_error("decay_margin: requires p_exponent > 0");
  DecayReport rep;
  rep.p_exponent = p_exponent;
  for (int i = 0; i < 3; ++i) {
    int kk = k << i;
    double d = std::sqrt((2.0 * p_exponent + 1.0) * std::log(static_cast<double>(kk)) / kk);
    d = std::min(d, std::numbers::pi / 2);
    double c = std::cos(d);
    double pv = c <= 0.0 ? 0.0 : std::exp(kk * std::log(c));
    rep.rows[i] = {kk, d, pv, pv * std::pow(static_cast<double>(kk), p_exponent)};
  }
  rep.pass = rep.rows[1].ratio <= 1.10 * rep.rows[0].ratio &&
             rep.rows[2].ratio <= 1.10 * rep.rows[1].ratio;
  return rep;
}

double expansion_residual(std::complex<double> u, int k) {
  if (k < 2) throw std::domain_error("expansion_residual: requires k >= 2");
  double x = std::norm(u);
  if (!(x <= 5.0 * std::log(static_cast<double>(k))))
    throw std::domain_error("expansion_residual: |u| outside the sqrt(5 log k) window");
  ProjectivePoint z0 = ProjectivePoint::from_affine(0.0);
  ProjectivePoint zu = ProjectivePoint::from_affine(u / std::sqrt(static_cast<double>(k)));
  double ip = inner_abs(zu, z0);
  // e^{|u|^2} P_k^2 - 1 evaluated without cancellation: the exponent
  // x + 2k log|<zu,z0>| is O(x^2/k).
  double d = std::expm1(x + 2.0 * k * std::log(ip));
  return k * d - 0.5 * x * x;
}

}  // namespace zvar
