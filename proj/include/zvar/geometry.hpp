// CP^1 with the Fubini-Study metric normalized to total area pi (round sphere
// of radius 1/2): points, charts, curvature, geodesics, quadrature over the
// manifold, and the library of test forms.

#pragma once

#include <array>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace zvar {

// A point of CP^1 stored as a unit-norm homogeneous pair (h0, h1).  The
// overall phase is not fixed; everything downstream consumes phase-invariant
// quantities.  Affine chart z = h0/h1 (valid when |h1| >= 1/sqrt2), conjugate
// chart w = h1/h0; w = 1/z on the overlap.
class ProjectivePoint {
 public:
  ProjectivePoint(std::complex<double> h0, std::complex<double> h1);

  static ProjectivePoint from_affine(std::complex<double> z);     // [z : 1]
  static ProjectivePoint from_conjugate(std::complex<double> w);  // [1 : w]
  // Inverse Hopf map: unit vector n on S^2 -> point with sphere() == n.
  static ProjectivePoint from_sphere(const std::array<double, 3>& n);

  [[nodiscard]] std::complex<double> h0() const { return h0_; }
  [[nodiscard]] std::complex<double> h1() const { return h1_; }

  // Hopf image: n = (2 Re(h0 conj(h1)), 2 Im(h0 conj(h1)), |h0|^2 - |h1|^2).
  [[nodiscard]] std::array<double, 3> sphere() const;

  [[nodiscard]] bool in_affine_chart() const { return std::abs(h1_) >= 0.70710678118654746; }
  [[nodiscard]] std::complex<double> affine() const { return h0_ / h1_; }
  [[nodiscard]] std::complex<double> conjugate() const { return h1_ / h0_; }

 private:
  std::complex<double> h0_, h1_;
};

// |<p,q>| = |h0_p conj(h0_q) + h1_p conj(h1_q)| in [0, 1].
double inner_abs(const ProjectivePoint& p, const ProjectivePoint& q);

// Kaehler potential of the chart frame: log(1 + |z|^2).
double fs_potential(std::complex<double> z);

// Metric density g_{1 1bar}(z) = (1 + |z|^2)^{-2} in either chart.
double metric_density(std::complex<double> z);

// Scalar curvature rho(p) = g^{-2} R_{1 1bar 1 1bar}; constantly 2 here.
double scalar_curvature(const ProjectivePoint& p);

// Geodesic distance arccos |<p,q>| in [0, pi/2].
double geodesic_distance(const ProjectivePoint& p, const ProjectivePoint& q);

// Orthonormal tangent frame at a point of S^2, for walking geodesic circles
// around a center deterministically.
class GeodesicFrame {
 public:
  explicit GeodesicFrame(const ProjectivePoint& center);
  // The point at geodesic distance rho from the center, direction theta.
  [[nodiscard]] ProjectivePoint at(double rho, double theta) const;
  // Same, with cos/sin of the central angle 2*rho and of theta precomputed.
  [[nodiscard]] ProjectivePoint at_trig(double cos2rho, double sin2rho,
                                        double cos_theta, double sin_theta) const;

 private:
  std::array<double, 3> n_, e1_, e2_;
};

// Point at geodesic distance rho from center in direction theta.
ProjectivePoint geodesic_point(const ProjectivePoint& center, double rho, double theta);

// Constant curvature tensor of CP^m at a point where the metric is the
// identity: R[j,l,p,q] = delta_jl delta_pq + delta_jq delta_pl, scalar
// curvature rho = m(m+1).
struct CurvatureData {
  int m = 1;
  std::vector<double> tensor;  // row-major [j][l][p][q], size m^4
  double rho = 2.0;
  [[nodiscard]] double r(int j, int l, int p, int q) const {
    return tensor[static_cast<std::size_t>(((j * m + l) * m + p) * m + q)];
  }
};
CurvatureData cpm_curvature(int m);

// A test function psi with its Laplacian datum f = (1/2) Lap psi, i.e.
// i ddbar psi = f Omega.  For Laplace eigenfunctions (Lap psi = -lambda psi)
// the eigenvalue is carried along and f = -(lambda/2) psi.
struct TestForm {
  std::string name;
  std::function<double(const ProjectivePoint&)> psi;
  std::function<double(const ProjectivePoint&)> f;
  std::optional<double> lambda;
};

// Built-in forms: psi1 (first zonal harmonic, lambda = 8), psi2 (equatorial
// harmonic, lambda = 8), bump (zonal non-eigenfunction exp(3/2 * n3)), one
// (constant, f = 0).
const std::vector<TestForm>& testform_library();
const TestForm& find_testform(std::string_view name);

// SU(2) move p -> (a h0 - conj(b) h1, b h0 + conj(a) h1); |a|^2 + |b|^2 = 1.
struct Su2Rotation {
  std::complex<double> a{1.0, 0.0};
  std::complex<double> b{0.0, 0.0};
  [[nodiscard]] ProjectivePoint apply(const ProjectivePoint& p) const;
  [[nodiscard]] ProjectivePoint apply_inverse(const ProjectivePoint& p) const;
};

// Pullback psi_R(p) = psi(R^{-1} p) (and likewise f); eigenvalue survives.
TestForm rotate(const TestForm& tf, const Su2Rotation& rot);

// Quadrature rule over all of CP^1 with the Fubini-Study area form baked into
// the weights (sum of weights = pi).  Two chart disks, tensor Gauss-Legendre
// in (r, theta) on each.
struct ManifoldRule {
  std::vector<ProjectivePoint> points;
  std::vector<double> weights;
};
ManifoldRule manifold_quadrature(int radial_nodes = 64, int angular_nodes = 128);

double integrate(const ManifoldRule& rule,
                 const std::function<double(const ProjectivePoint&)>& fn);

}  // namespace zvar
