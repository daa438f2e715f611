// Exact, oracle, and asymptotic variance computations together with the
// combinatorial verifiers (Wick moments, series exchange, multinomial
// coefficients) and the expansion fit.

#include "zvar/variance.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <set>
#include <sstream>
#include <stdexcept>

#include "zvar/kernels.hpp"
#include "zvar/parallel.hpp"
#include "zvar/quadrature.hpp"

namespace zvar {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kHalfPi = kPi / 2.0;

// Dyadic refinement depth of the near-window radial mesh.  The integrand's
// radial derivative behaves like rho log rho at the diagonal; 24 levels push
// the unresolved panel below 1e-7 of the window at spectral per-panel order.
constexpr int kNearLevels = 24;
// Number of geometrically graded radial panels covering the far field.
constexpr int kFarPanels = 6;
// Far-field nodes whose kernel value is below this fraction of the peak are
// dropped; the discarded tail is bounded by pi * 1e-22 * max Q * max f^2,
// far below the 1e-6 relative target.
constexpr double kPruneRel = 1e-22;

// The inner w-integral in geodesic polar coordinates around the outer point:
// Omega = (1/2) sin(2 rho) d rho d theta, and Q_k depends only on rho, so
// each circle carries a single weight pi sin(2 rho) w_rho Q_k(rho) and an
// angular average of f.
struct InnerMesh {
  std::vector<double> cos2rho;
  std::vector<double> sin2rho;
  std::vector<double> weight;
};

InnerMesh build_inner_mesh(int k, const QuadratureSpec& spec) {
  const double keff = static_cast<double>(std::max(k, 3));
  const double rho_c =
      std::min(kHalfPi, spec.cutoff_b * std::sqrt(std::log(keff) / keff));

  Rule1D mesh = graded_gauss(spec.inner_radial, rho_c, kNearLevels);
  if (kHalfPi - rho_c > 1e-12) {
    // Geometrically graded panels, densest next to the near window where the
    // kernel is largest.
    const double span = kHalfPi - rho_c;
    const double denom = std::pow(2.0, kFarPanels) - 1.0;
    double left = rho_c;
    for (int i = 1; i <= kFarPanels; ++i) {
      const double right = rho_c + span * (std::pow(2.0, i) - 1.0) / denom;
      Rule1D panel = gauss_legendre(spec.inner_radial, left, right);
      mesh.x.insert(mesh.x.end(), panel.x.begin(), panel.x.end());
      mesh.w.insert(mesh.w.end(), panel.w.begin(), panel.w.end());
      left = right;
    }
  }

  std::vector<double> q(mesh.x.size());
  double q_max = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = q_kernel_at_distance(mesh.x[i], k);
    q_max = std::max(q_max, q[i]);
  }

  InnerMesh out;
  out.cos2rho.reserve(q.size());
  out.sin2rho.reserve(q.size());
  out.weight.reserve(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    if (q[i] <= q_max * kPruneRel) continue;
    const double rho = mesh.x[i];
    out.cos2rho.push_back(std::cos(2.0 * rho));
    out.sin2rho.push_back(std::sin(2.0 * rho));
    out.weight.push_back(kPi * std::sin(2.0 * rho) * mesh.w[i] * q[i]);
  }
  return out;
}

double bipotential_pass(const TestForm& tf, int k, const QuadratureSpec& spec) {
  const ManifoldRule outer =
      manifold_quadrature(spec.outer_nodes, 2 * spec.outer_nodes);
  const InnerMesh mesh = build_inner_mesh(k, spec);

  const int na = spec.inner_angular;
  std::vector<double> cos_t(static_cast<std::size_t>(na));
  std::vector<double> sin_t(static_cast<std::size_t>(na));
  for (int j = 0; j < na; ++j) {
    const double theta = 2.0 * kPi * (j + 0.5) / na;
    cos_t[static_cast<std::size_t>(j)] = std::cos(theta);
    sin_t[static_cast<std::size_t>(j)] = std::sin(theta);
  }
  const double inv_na = 1.0 / na;

  std::vector<double> partial(outer.points.size(), 0.0);
  parallel_for(outer.points.size(), [&](std::size_t i) {
    const double fz = tf.f(outer.points[i]);
    if (fz == 0.0 || mesh.weight.empty()) {
      partial[i] = 0.0;
      return;
    }
    const GeodesicFrame frame(outer.points[i]);
    double acc = 0.0;
    for (std::size_t r = 0; r < mesh.weight.size(); ++r) {
      const double c2 = mesh.cos2rho[r];
      const double s2 = mesh.sin2rho[r];
      double circle = 0.0;
      for (int j = 0; j < na; ++j) {
        circle += tf.f(frame.at_trig(c2, s2, cos_t[static_cast<std::size_t>(j)],
                                     sin_t[static_cast<std::size_t>(j)]));
      }
      acc += mesh.weight[r] * circle;
    }
    partial[i] = outer.weights[i] * fz * acc * inv_na;
  });
  return pairwise_sum(partial);
}

// P_l by the three-term recurrence.
double legendre_p(int l, double x) {
  if (l == 0) return 1.0;
  double pm = 1.0;
  double pc = x;
  for (int n = 1; n < l; ++n) {
    const double pn = ((2.0 * n + 1.0) * x * pc - n * pm) / (n + 1.0);
    pm = pc;
    pc = pn;
  }
  return pc;
}

double factorial(int n) {
  double f = 1.0;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace

void QuadratureSpec::validate() const {
  if (outer_nodes < 2 || inner_radial < 2 || inner_angular < 2) {
    throw std::invalid_argument(
        "QuadratureSpec: all node counts must be at least 2");
  }
  if (!(cutoff_b * cutoff_b >= 4.0 - 1e-12)) {
    throw std::invalid_argument(
        "QuadratureSpec: cutoff_b^2 must be at least 4 so the far-field tail "
        "stays below k^{-4}");
  }
}

VarianceResult exact_variance(const TestForm& tf, int k,
                              const QuadratureSpec& spec) {
  spec.validate();
  if (k < 1) throw std::invalid_argument("exact_variance: k must be >= 1");

  const double base = bipotential_pass(tf, k, spec);
  QuadratureSpec fine = spec;
  fine.outer_nodes *= 2;
  fine.inner_radial *= 2;
  fine.inner_angular *= 2;
  const double refined = bipotential_pass(tf, k, fine);

  const double err = std::abs(refined - base);
  const double target = 1e-6 * std::max(std::abs(refined), 1e-8);
  if (err > 10.0 * target) {
    std::ostringstream msg;
    msg << "exact_variance: quadrature did not converge for testform '"
        << tf.name << "' at k=" << k << " (base=" << base
        << ", refined=" << refined << ", difference=" << err
        << " exceeds 10 x " << target << "); increase the node counts";
    throw std::runtime_error(msg.str());
  }
  if (refined < -std::max(10.0 * err, 1e-12)) {
    std::ostringstream msg;
    msg << "exact_variance: negative value " << refined
        << " beyond the error estimate " << err << " for testform '" << tf.name
        << "' at k=" << k << "; the variance must be nonnegative";
    throw std::runtime_error(msg.str());
  }

  VarianceResult result;
  result.value = refined;
  result.route = Route::exact;
  result.k = k;
  result.testform = tf.name;
  result.error_estimate = err;
  return result;
}

double zonal_variance_oracle(const TestForm& tf, int k,
                             const SeriesTolerance& tol) {
  if (k < 1) {
    throw std::invalid_argument("zonal_variance_oracle: k must be >= 1");
  }
  if (!tf.lambda.has_value()) {
    throw std::invalid_argument("zonal_variance_oracle: testform '" + tf.name +
                                "' carries no Laplace eigenvalue");
  }
  const double lambda = *tf.lambda;
  if (lambda == 0.0) return 0.0;

  // Eigenvalues of the round metric of area pi are lambda_l = 4 l (l+1).
  const double l_real = 0.5 * (std::sqrt(1.0 + lambda) - 1.0);
  const int l = static_cast<int>(std::lround(l_real));
  if (l < 1 || std::abs(l_real - l) > 1e-9) {
    std::ostringstream msg;
    msg << "zonal_variance_oracle: lambda=" << lambda
        << " is not 4 l (l+1) for an integer level l";
    throw std::invalid_argument(msg.str());
  }

  const ManifoldRule rule = manifold_quadrature(64, 128);
  const double i_ff = integrate(rule, [&](const ProjectivePoint& p) {
    const double v = tf.f(p);
    return v * v;
  });

  // J = int_{-1}^{1} G(((1+t)/2)^k) P_l(t) dt, substituted t = 1 - 2s so the
  // log-singular derivative of G at t = 1 sits at s = 0 under a graded mesh.
  const Rule1D mesh = graded_gauss(16, 1.0, 44);
  std::vector<double> terms(mesh.x.size());
  for (std::size_t i = 0; i < mesh.x.size(); ++i) {
    const double s = mesh.x[i];
    const double t = std::pow(1.0 - s, k);
    terms[i] = mesh.w[i] * g_function(t, tol) * legendre_p(l, 1.0 - 2.0 * s);
  }
  const double j_int = 2.0 * pairwise_sum(terms);

  return 0.5 * kPi * i_ff * j_int;
}

double dbar_energy(const TestForm& tf) {
  const ManifoldRule rule = manifold_quadrature(64, 128);
  std::vector<double> terms(rule.points.size());
  parallel_for(rule.points.size(), [&](std::size_t i) {
    const ProjectivePoint& p = rule.points[i];
    const bool chart_a = p.in_affine_chart();
    const std::complex<double> c = chart_a ? p.affine() : p.conjugate();
    const auto value = [&](const std::complex<double>& z) {
      return tf.f(chart_a ? ProjectivePoint::from_affine(z)
                          : ProjectivePoint::from_conjugate(z));
    };
    const auto central = [&](const std::complex<double>& dir, double h) {
      return (value(c + h * dir) - value(c - h * dir)) / (2.0 * h);
    };
    // Richardson-extrapolated central differences: O(h^4) truncation with
    // roundoff ~ eps/h, balanced near h = 1e-4.
    const double h = 1e-4;
    const std::complex<double> ex{1.0, 0.0};
    const std::complex<double> ey{0.0, 1.0};
    const double fx = (4.0 * central(ex, 0.5 * h) - central(ex, h)) / 3.0;
    const double fy = (4.0 * central(ey, 0.5 * h) - central(ey, h)) / 3.0;
    // |df/dzbar|^2 = (fx^2 + fy^2) / 4 for real f; the inverse metric
    // contributes (1 + |z|^2)^2 in either chart.
    const double grad_sq = 0.25 * (fx * fx + fy * fy);
    const double scale = 1.0 + std::norm(c);
    terms[i] = rule.weights[i] * grad_sq * scale * scale;
  });
  return pairwise_sum(terms);
}

CoefficientIntegrals coefficient_integrals(const TestForm& tf) {
  const ManifoldRule rule = manifold_quadrature(64, 128);
  std::vector<double> ff(rule.points.size());
  std::vector<double> rff(rule.points.size());
  parallel_for(rule.points.size(), [&](std::size_t i) {
    const double v = tf.f(rule.points[i]);
    ff[i] = rule.weights[i] * v * v;
    rff[i] = ff[i] * scalar_curvature(rule.points[i]);
  });

  CoefficientIntegrals out;
  out.i_ff = pairwise_sum(ff);
  out.i_rff = pairwise_sum(rff);
  // For a Laplace eigenfunction, <dbar* dbar f, f> = ||dbar f||^2 =
  // (lambda/4) ||f||^2 (dbar* dbar = -(1/4) Lap on functions); otherwise
  // fall back to the finite-difference Dirichlet energy.
  out.i_dbarf =
      tf.lambda.has_value() ? 0.25 * (*tf.lambda) * out.i_ff : dbar_energy(tf);
  return out;
}

AsymptoticCoefficients asymptotic_coefficients(
    int m, const CoefficientIntegrals& integrals) {
  if (m < 1) {
    throw std::invalid_argument("asymptotic_coefficients: m must be >= 1");
  }
  const double front = std::pow(kPi, m - 2);
  AsymptoticCoefficients out;
  out.m = m;
  out.integrals = integrals;
  out.a0 = front * riemann_zeta(m + 2.0) / 4.0 * integrals.i_ff;
  out.a1 = -front * riemann_zeta(m + 3.0) *
           (integrals.i_rff / 8.0 + integrals.i_dbarf / 4.0);
  return out;
}

long long wick_moment(int m, std::span<const int> up_indices,
                      std::span<const int> bar_indices) {
  if (m < 1) throw std::invalid_argument("wick_moment: m must be >= 1");
  const auto check = [m](std::span<const int> idx) {
    for (const int v : idx) {
      if (v < 1 || v > m) {
        throw std::invalid_argument(
            "wick_moment: indices must lie in 1..m, got " + std::to_string(v));
      }
    }
  };
  check(up_indices);
  check(bar_indices);
  if (up_indices.size() != bar_indices.size()) return 0;

  const int n = static_cast<int>(up_indices.size());
  // Permanent of the 0/1 match matrix by row recursion over unused columns.
  const auto rec = [&](const auto& self, int row, unsigned used) -> long long {
    if (row == n) return 1;
    long long total = 0;
    for (int col = 0; col < n; ++col) {
      if ((used >> col) & 1u) continue;
      if (up_indices[static_cast<std::size_t>(row)] !=
          bar_indices[static_cast<std::size_t>(col)]) {
        continue;
      }
      total += self(self, row + 1, used | (1u << col));
    }
    return total;
  };
  return rec(rec, 0, 0u);
}

double curvature_wick_contraction(const CurvatureData& curvature) {
  const int m = curvature.m;
  double total = 0.0;
  for (int j = 0; j < m; ++j) {
    for (int l = 0; l < m; ++l) {
      for (int p = 0; p < m; ++p) {
        for (int q = 0; q < m; ++q) {
          const std::array<int, 2> up{j + 1, p + 1};
          const std::array<int, 2> bar{l + 1, q + 1};
          total += curvature.r(j, l, p, q) *
                   static_cast<double>(wick_moment(m, up, bar));
        }
      }
    }
  }
  return total;
}

double RadialPolynomial::operator()(double s) const {
  double acc = 0.0;
  for (std::size_t i = c.size(); i-- > 0;) acc = acc * s + c[i];
  return acc;
}

double gint_identity_residual(const RadialPolynomial& alpha,
                              const RadialPolynomial& F, int k, int m) {
  if (m != 1 && m != 2) {
    throw std::invalid_argument("gint_identity_residual: m must be 1 or 2");
  }
  if (k < 1) {
    throw std::invalid_argument("gint_identity_residual: k must be >= 1");
  }

  // Domination precondition 1 + |alpha(s)|/k <= e^{s/2}, checked on a grid
  // wide enough to cover the quadrature support.
  for (int i = 0; i <= 6000; ++i) {
    const double s = 0.01 * i;
    if (1.0 + std::abs(alpha(s)) / k > std::exp(0.5 * s)) {
      std::ostringstream msg;
      msg << "gint_identity_residual: domination 1 + |alpha(s)|/k <= e^{s/2} "
             "fails at s="
          << s << " for k=" << k;
      throw std::domain_error(msg.str());
    }
  }

  const double front = std::pow(kPi, m) / factorial(m - 1);

  // Left side: radial quadrature of G(e^{-s}(1 + alpha/k)) F(s) s^{m-1}.
  // Graded toward s = 0 where G' is log-singular, then geometric panels out
  // to s = 96 (the integrand is below e^{-48} there under the precondition).
  Rule1D mesh = graded_gauss(24, 1.0, 50);
  double left_edge = 1.0;
  for (const double right_edge : {2.0, 4.0, 8.0, 16.0, 32.0, 48.0, 96.0}) {
    const Rule1D panel = gauss_legendre(24, left_edge, right_edge);
    mesh.x.insert(mesh.x.end(), panel.x.begin(), panel.x.end());
    mesh.w.insert(mesh.w.end(), panel.w.begin(), panel.w.end());
    left_edge = right_edge;
  }
  std::vector<double> terms(mesh.x.size());
  for (std::size_t i = 0; i < mesh.x.size(); ++i) {
    const double s = mesh.x[i];
    const double t = std::exp(-s) * (1.0 + alpha(s) / k);
    const double radial = (m == 1) ? 1.0 : s;
    terms[i] = mesh.w[i] * g_function(t) * F(s) * radial;
  }
  const double lhs = front * pairwise_sum(terms);

  // Right side: with Ft(s) = F(s) s^{m-1},
  //   sum_p Ft_p p! zeta(p+3) + (1/k) sum_q (alpha Ft)_q q! zeta(q+2),
  // scaled by front / (4 pi^2).
  std::vector<double> ft(F.c);
  ft.insert(ft.begin(), static_cast<std::size_t>(m - 1), 0.0);
  std::vector<double> aft;
  if (!alpha.c.empty() && !ft.empty()) {
    aft.assign(alpha.c.size() + ft.size() - 1, 0.0);
    for (std::size_t i = 0; i < alpha.c.size(); ++i) {
      for (std::size_t j = 0; j < ft.size(); ++j) {
        aft[i + j] += alpha.c[i] * ft[j];
      }
    }
  }
  double series = 0.0;
  double fact = 1.0;
  for (std::size_t p = 0; p < ft.size(); ++p) {
    if (p > 0) fact *= static_cast<double>(p);
    if (ft[p] != 0.0) {
      series += ft[p] * fact * riemann_zeta(static_cast<double>(p) + 3.0);
    }
  }
  fact = 1.0;
  for (std::size_t q = 0; q < aft.size(); ++q) {
    if (q > 0) fact *= static_cast<double>(q);
    if (aft[q] != 0.0) {
      series +=
          aft[q] * fact * riemann_zeta(static_cast<double>(q) + 2.0) / k;
    }
  }
  const double rhs = front / (4.0 * kPi * kPi) * series;

  return std::abs(lhs - rhs);
}

double multinomial_expand(std::span<const double> c, int n, int j) {
  if (c.empty()) {
    throw std::invalid_argument(
        "multinomial_expand: need coefficients C_2..C_p with p >= 2");
  }
  if (n < 0) throw std::invalid_argument("multinomial_expand: n must be >= 0");
  if (j < 2) throw std::invalid_argument("multinomial_expand: j must be >= 2");

  const int p = static_cast<int>(c.size()) + 1;
  double total = 0.0;
  // Enumerate r_2..r_p with sum lambda r_lambda = j.  Each term is
  // [n(n-1)...(n-|r|+1) / prod r_lambda!] * prod C_lambda^{r_lambda}; the
  // bracket is a multinomial coefficient, hence an exact small integer.
  const auto rec = [&](const auto& self, int lambda, int remaining, int count,
                       double denom, double coeff_prod) -> void {
    if (lambda > p) {
      if (remaining != 0) return;
      double falling = 1.0;
      for (int t = 0; t < count; ++t) falling *= static_cast<double>(n - t);
      total += (falling / denom) * coeff_prod;
      return;
    }
    double cpow = 1.0;
    double rfact = 1.0;
    for (int r = 0; lambda * r <= remaining; ++r) {
      if (r > 0) {
        cpow *= c[static_cast<std::size_t>(lambda - 2)];
        rfact *= static_cast<double>(r);
      }
      self(self, lambda + 1, remaining - lambda * r, count + r, denom * rfact,
           coeff_prod * cpow);
    }
  };
  rec(rec, 2, j, 0, 1.0, 1.0);
  return total;
}

FitResult fit_expansion(std::span<const FitPoint> data) {
  std::set<int> distinct;
  for (const FitPoint& d : data) {
    if (d.k < 1) {
      throw std::invalid_argument("fit_expansion: k values must be >= 1");
    }
    distinct.insert(d.k);
  }
  if (distinct.size() < 3) {
    throw std::invalid_argument(
        "fit_expansion: need at least 3 distinct k values, got " +
        std::to_string(distinct.size()));
  }

  double sw = 0.0, swx = 0.0, swxx = 0.0, swy = 0.0, swxy = 0.0;
  for (const FitPoint& d : data) {
    const double w = static_cast<double>(d.k) * static_cast<double>(d.k);
    const double x = 1.0 / d.k;
    const double y = d.k * d.variance;
    sw += w;
    swx += w * x;
    swxx += w * x * x;
    swy += w * y;
    swxy += w * x * y;
  }
  const double det = sw * swxx - swx * swx;
  if (!(std::abs(det) > 0.0)) {
    throw std::invalid_argument("fit_expansion: singular design matrix");
  }

  FitResult out;
  out.a0 = (swy * swxx - swxy * swx) / det;
  out.a1 = (sw * swxy - swx * swy) / det;

  double rss = 0.0;
  for (const FitPoint& d : data) {
    const double w = static_cast<double>(d.k) * static_cast<double>(d.k);
    const double r = d.k * d.variance - out.a0 - out.a1 / d.k;
    rss += w * r * r;
  }
  out.residual_norm = std::sqrt(rss / sw);
  return out;
}

}  // namespace zvar
