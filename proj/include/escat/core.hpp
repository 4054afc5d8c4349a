// escat/core.hpp -- materials, wavenumbers, incident plane waves, the
// Kupradze and Kelvin fundamental tensors of linear elasticity, and
// quadrature on the unit sphere.

#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace escat {

using Complex = std::complex<double>;
using Vector3 = Eigen::Vector3d;
using Vector3c = Eigen::Vector3cd;
using Matrix3 = Eigen::Matrix3d;
using Matrix3c = Eigen::Matrix3cd;

inline constexpr double pi = 3.14159265358979323846;
inline constexpr Complex iu{0.0, 1.0};

/// Homogeneous isotropic elastic medium, density normalized to one.
/// Admissibility: mu > 0 and 3*lambda + 2*mu > 0.
struct Material {
  double lambda = 2.0;
  double mu = 1.0;

  Material() = default;
  Material(double lambda_, double mu_) : lambda(lambda_), mu(mu_) { validate(); }

  void validate() const {
    if (!(mu > 0.0) || !(3.0 * lambda + 2.0 * mu > 0.0))
      throw std::invalid_argument("Material: need mu > 0 and 3*lambda + 2*mu > 0");
  }
};

/// Compressional and shear wavenumbers at angular frequency omega:
///   kp = omega / sqrt(lambda + 2 mu),  ks = omega / sqrt(mu).
/// kp < ks for every admissible material (lambda + mu > mu/3 > 0).
struct WaveNumbers {
  double omega = 0.0;
  double kp = 0.0;
  double ks = 0.0;
};

WaveNumbers wavenumbers(const Material& m, double omega);

/// Time-harmonic incident plane wave
///   u_in(x) = alpha * d * exp(i kp x.d) + beta * dperp * exp(i ks x.d),
/// d the propagation direction, dperp the (orthogonal) shear polarization.
/// alpha = 1, beta = 0 is the unit pressure wave; alpha = 0, beta = 1 the
/// unit shear wave.
struct IncidentWave {
  Vector3 d{0.0, 0.0, 1.0};
  Vector3 dperp{1.0, 0.0, 0.0};
  Complex alpha{0.0, 0.0};
  Complex beta{1.0, 0.0};
  double omega = 2.0;

  IncidentWave() = default;
  IncidentWave(const Vector3& d_, const Vector3& dperp_, Complex alpha_, Complex beta_,
               double omega_)
      : d(d_), dperp(dperp_), alpha(alpha_), beta(beta_), omega(omega_) {
    validate();
  }

  void validate() const {
    constexpr double tol = 1e-10;
    if (std::abs(d.norm() - 1.0) > tol || std::abs(dperp.norm() - 1.0) > tol)
      throw std::invalid_argument("IncidentWave: d and dperp must be unit vectors");
    if (std::abs(d.dot(dperp)) > tol)
      throw std::invalid_argument("IncidentWave: dperp must be orthogonal to d");
    if (!(omega > 0.0)) throw std::invalid_argument("IncidentWave: omega must be positive");
  }

  bool pure_pressure() const { return beta == Complex(0.0) && alpha != Complex(0.0); }
  bool pure_shear() const { return alpha == Complex(0.0) && beta != Complex(0.0); }
};

Vector3c incident_field(const IncidentWave& wave, const Material& m, const Vector3& x);

/// Kupradze tensor: outgoing fundamental solution of the Navier operator
/// mu*Lap + (lambda+mu)*grad div + omega^2 at angular frequency omega,
///
///   Pi(x,y) = 1/(4 pi mu) e^{i ks r}/r I
///           + 1/(4 pi w^2) grad_x grad_x^T [ e^{i ks r}/r - e^{i kp r}/r ],
///
/// r = |x-y|.  The grad-grad term is evaluated in closed form via
/// f''(r) rr^T/r^2 + f'(r)/r (I - rr^T/r^2).
/// Throws std::domain_error when |x-y| <= singular_eps (never clamps).
Matrix3c kupradze_tensor(const Vector3& x, const Vector3& y, const Material& m, double omega,
                         double singular_eps = 1e-12);

/// Kelvin matrix: static (omega = 0) limit of the Kupradze tensor,
///   Pi0(x,y) = (lambda+3mu)/(8 pi mu (lambda+2mu)) I / r
///            + (lambda+mu)/(8 pi mu (lambda+2mu)) (x-y)(x-y)^T / r^3.
Matrix3 kelvin_tensor(const Vector3& x, const Vector3& y, const Material& m,
                      double singular_eps = 1e-12);

/// Far-field amplitudes of a unit Kupradze point source at the origin are
/// pressure_prefactor * (xx^T) c and shear_prefactor * (I - xx^T) c; all far
/// fields in this library use this normalization ("ps-unit-source-v1").
inline double pressure_prefactor(const Material& m) {
  return 1.0 / (4.0 * pi * (m.lambda + 2.0 * m.mu));
}
inline double shear_prefactor(const Material& m) { return 1.0 / (4.0 * pi * m.mu); }

/// Quadrature nodes/weights on the unit sphere: tensor product of
/// Gauss-Legendre in cos(polar) and the periodic trapezoid rule in azimuth.
/// Weights are positive and sum to 4*pi.
struct SphereGrid {
  int n_polar = 0;
  int n_azimuth = 0;
  std::vector<Vector3> nodes;
  std::vector<double> weights;
  std::vector<double> polar;    // polar angle of each node, radians
  std::vector<double> azimuth;  // azimuth of each node, radians

  int size() const { return static_cast<int>(nodes.size()); }
};

SphereGrid make_sphere_grid(int n_polar, int n_azimuth);

bool same_grid(const SphereGrid& a, const SphereGrid& b, double tol = 1e-13);

/// Gauss-Legendre rule with n nodes on [-1, 1]; weights sum to 2.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

}  // namespace escat
