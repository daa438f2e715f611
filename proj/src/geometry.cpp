#include "zvar/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "zvar/parallel.hpp"
#include "zvar/quadrature.hpp"

namespace zvar {

ProjectivePoint::ProjectivePoint(std::complex<double> h0, std::complex<double> h1)
    : h0_(h0), h1_(h1) {
  double n = std::sqrt(std::norm(h0_) + std::norm(h1_));
  if (!(n > 1e-300) || !std::isfinite(n))
    throw std::invalid_argument("ProjectivePoint: homogeneous pair must be finite and nonzero");
  h0_ /= n;
  h1_ /= n;
}

ProjectivePoint ProjectivePoint::from_affine(std::complex<double> z) {
  return ProjectivePoint(z, 1.0);
}

ProjectivePoint ProjectivePoint::from_conjugate(std::complex<double> w) {
  return ProjectivePoint(1.0, w);
}

ProjectivePoint ProjectivePoint::from_sphere(const std::array<double, 3>& n) {
  // Branch on the sign of n3 so the division is by the larger component.
  double n1 = n[0], n2 = n[1], n3 = n[2];
  if (n3 <= 0.0) {
    double h1 = std::sqrt(0.5 * (1.0 - n3));
    return ProjectivePoint(std::complex<double>(n1, n2) / (2.0 * h1), h1);
  }
  double h0 = std::sqrt(0.5 * (1.0 + n3));
  return ProjectivePoint(h0, std::complex<double>(n1, -n2) / (2.0 * h0));
}

std::array<double, 3> ProjectivePoint::sphere() const {
  std::complex<double> cross = h0_ * std::conj(h1_);
  return {2.0 * cross.real(), 2.0 * cross.imag(), std::norm(h0_) - std::norm(h1_)};
}

double inner_abs(const ProjectivePoint& p, const ProjectivePoint& q) {
  std::complex<double> ip = p.h0() * std::conj(q.h0()) + p.h1() * std::conj(q.h1());
  return std::min(std::abs(ip), 1.0);
}

double fs_potential(std::complex<double> z) { return std::log1p(std::norm(z)); }

double metric_density(std::complex<double> z) {
  double d = 1.0 + std::norm(z);
  return 1.0 / (d * d);
}

double scalar_curvature(const ProjectivePoint& p) {
  // rho = g^{1 1bar} g^{1 1bar} R_{1 1bar 1 1bar} with
  // R_{1 1bar 1 1bar}(z) = 2 (1+|z|^2)^{-4} in the chart where |z| <= 1.
  std::complex<double> z = p.in_affine_chart() ? p.affine() : p.conjugate();
  double g = metric_density(z);
  double d = 1.0 + std::norm(z);
  double r1111 = 2.0 / (d * d * d * d);
  return r1111 / (g * g);
}

double geodesic_distance(const ProjectivePoint& p, const ProjectivePoint& q) {
  return std::acos(inner_abs(p, q));
}

GeodesicFrame::GeodesicFrame(const ProjectivePoint& center) : n_(center.sphere()) {
  // e1 = normalized(axis x n) with the axis least aligned with n.
  int amin = 0;
  for (int i = 1; i < 3; ++i)
    if (std::abs(n_[i]) < std::abs(n_[amin])) amin = i;
  std::array<double, 3> a{0.0, 0.0, 0.0};
  a[amin] = 1.0;
  e1_ = {a[1] * n_[2] - a[2] * n_[1], a[2] * n_[0] - a[0] * n_[2],
         a[0] * n_[1] - a[1] * n_[0]};
  double len = std::sqrt(e1_[0] * e1_[0] + e1_[1] * e1_[1] + e1_[2] * e1_[2]);
  for (auto& c : e1_) c /= len;
  e2_ = {n_[1] * e1_[2] - n_[2] * e1_[1], n_[2] * e1_[0] - n_[0] * e1_[2],
         n_[0] * e1_[1] - n_[1] * e1_[0]};
}

ProjectivePoint GeodesicFrame::at(double rho, double theta) const {
  // Geodesic distance rho on CP^1 corresponds to central angle 2*rho on the
  // unit Hopf sphere (radius-1/2 geometry).
  return at_trig(std::cos(2.0 * rho), std::sin(2.0 * rho), std::cos(theta),
                 std::sin(theta));
}

ProjectivePoint GeodesicFrame::at_trig(double cos2rho, double sin2rho,
                                       double cos_theta, double sin_theta) const {
  std::array<double, 3> v;
  for (int i = 0; i < 3; ++i)
    v[i] = cos2rho * n_[i] + sin2rho * (cos_theta * e1_[i] + sin_theta * e2_[i]);
  return ProjectivePoint::from_sphere(v);
}

ProjectivePoint geodesic_point(const ProjectivePoint& center, double rho, double theta) {
  return GeodesicFrame(center).at(rho, theta);
}

CurvatureData cpm_curvature(int m) {
  if (m < 1) throw std::invalid_argument("cpm_curvature: m must be >= 1");
  CurvatureData cd;
  cd.m = m;
  cd.tensor.assign(static_cast<std::size_t>(m) * m * m * m, 0.0);
  for (int j = 0; j < m; ++j)
    for (int l = 0; l < m; ++l)
      for (int p = 0; p < m; ++p)
        for (int q = 0; q < m; ++q) {
          double v = (j == l && p == q ? 1.0 : 0.0) + (j == q && p == l ? 1.0 : 0.0);
          cd.tensor[static_cast<std::size_t>(((j * m + l) * m + p) * m + q)] = v;
        }
  cd.rho = static_cast<double>(m) * (m + 1);
  return cd;
}

namespace {

double third_coordinate(const ProjectivePoint& p) {
  return std::norm(p.h0()) - std::norm(p.h1());
}

std::vector<TestForm> build_library() {
  std::vector<TestForm> lib;

  // psi1 = (1-|z|^2)/(1+|z|^2) = -n3: first zonal harmonic, Lap psi = -8 psi.
  TestForm psi1;
  psi1.name = "psi1";
  psi1.psi = [](const ProjectivePoint& p) { return -third_coordinate(p); };
  psi1.f = [](const ProjectivePoint& p) { return 4.0 * third_coordinate(p); };
  psi1.lambda = 8.0;
  lib.push_back(psi1);

  // psi2 = Re[2z/(1+|z|^2)] = n1: same eigenvalue, equatorial orientation.
  TestForm psi2;
  psi2.name = "psi2";
  psi2.psi = [](const ProjectivePoint& p) {
    return 2.0 * (p.h0() * std::conj(p.h1())).real();
  };
  psi2.f = [](const ProjectivePoint& p) {
    return -8.0 * (p.h0() * std::conj(p.h1())).real();
  };
  psi2.lambda = 8.0;
  lib.push_back(psi2);

  // bump = exp(c*n3), c = 3/2: zonal but not an eigenfunction.  With mu = n3,
  // the radius-1/2 sphere Laplacian of a zonal function is
  // Lap psi = 4 d/dmu[(1-mu^2) psi'(mu)], so
  // f = (1/2) Lap psi = 2c e^{c mu} (c (1-mu^2) - 2 mu).
  TestForm bump;
  bump.name = "bump";
  constexpr double c = 1.5;
  bump.psi = [](const ProjectivePoint& p) { return std::exp(c * third_coordinate(p)); };
  bump.f = [](const ProjectivePoint& p) {
    double mu = third_coordinate(p);
    return 2.0 * c * std::exp(c * mu) * (c * (1.0 - mu * mu) - 2.0 * mu);
  };
  lib.push_back(bump);

  // one: constant statistic (counts zeros); f vanishes identically.
  TestForm one;
  one.name = "one";
  one.psi = [](const ProjectivePoint&) { return 1.0; };
  one.f = [](const ProjectivePoint&) { return 0.0; };
  one.lambda = 0.0;
  lib.push_back(one);

  return lib;
}

}  // namespace

const std::vector<TestForm>& testform_library() {
  static const std::vector<TestForm> lib = build_library();
  return lib;
}

const TestForm& find_testform(std::string_view name) {
  for (const auto& tf : testform_library())
    if (tf.name == name) return tf;
  throw std::invalid_argument("unknown test form: " + std::string(name));
}

ProjectivePoint Su2Rotation::apply(const ProjectivePoint& p) const {
  return ProjectivePoint(a * p.h0() - std::conj(b) * p.h1(),
                         b * p.h0() + std::conj(a) * p.h1());
}

ProjectivePoint Su2Rotation::apply_inverse(const ProjectivePoint& p) const {
  return ProjectivePoint(std::conj(a) * p.h0() + std::conj(b) * p.h1(),
                         -b * p.h0() + a * p.h1());
}

TestForm rotate(const TestForm& tf, const Su2Rotation& rot) {
  TestForm out;
  out.name = tf.name + "-rotated";
  out.psi = [rot, psi = tf.psi](const ProjectivePoint& p) { return psi(rot.apply_inverse(p)); };
  out.f = [rot, f = tf.f](const ProjectivePoint& p) { return f(rot.apply_inverse(p)); };
  out.lambda = tf.lambda;
  return out;
}

ManifoldRule manifold_quadrature(int radial_nodes, int angular_nodes) {
  if (radial_nodes < 1 || angular_nodes < 1)
    throw std::invalid_argument("manifold_quadrature: node counts must be >= 1");
  Rule1D rad = gauss_legendre(radial_nodes, 0.0, 1.0);
  Rule1D ang = gauss_legendre(angular_nodes, 0.0, 2.0 * std::numbers::pi);
  ManifoldRule rule;
  rule.points.reserve(static_cast<std::size_t>(2) * radial_nodes * angular_nodes);
  rule.weights.reserve(rule.points.capacity());
  // The two closed unit chart disks tile CP^1 up to the measure-zero circle
  // |z| = 1; area element r (1+r^2)^{-2} dr dtheta on each.
  for (int chart = 0; chart < 2; ++chart) {
    for (int i = 0; i < radial_nodes; ++i) {
      double r = rad.x[i];
      double wr = rad.w[i] * r * metric_density(r);
      for (int j = 0; j < angular_nodes; ++j) {
        std::complex<double> zc = std::polar(r, ang.x[j]);
        rule.points.push_back(chart == 0 ? ProjectivePoint::from_affine(zc)
                                         : ProjectivePoint::from_conjugate(zc));
        rule.weights.push_back(wr * ang.w[j]);
      }
    }
  }
  return rule;
}

double integrate(const ManifoldRule& rule,
                 const std::function<double(const ProjectivePoint&)>& fn) {
  std::vector<double> slots(rule.points.size());
  parallel_for(static_cast<std::int64_t>(rule.points.size()), [&](std::int64_t i) {
    slots[static_cast<std::size_t>(i)] =
        rule.weights[static_cast<std::size_t>(i)] * fn(rule.points[static_cast<std::size_t>(i)]);
  });
  return pairwise_sum(slots);
}

}  // namespace zvar
