#include "escat/core.hpp"

#include <cmath>

namespace escat {

WaveNumbers wavenumbers(const Material& m, double omega) {
  m.validate();
  if (!(omega > 0.0)) throw std::invalid_argument("wavenumbers: omega must be positive");
  WaveNumbers k;
  k.omega = omega;
  k.kp = omega / std::sqrt(m.lambda + 2.0 * m.mu);
  k.ks = omega / std::sqrt(m.mu);
  return k;
}

Vector3c incident_field(const IncidentWave& wave, const Material& m, const Vector3& x) {
  wave.validate();
  const WaveNumbers k = wavenumbers(m, wave.omega);
  const double xd = x.dot(wave.d);
  return wave.alpha * std::exp(iu * k.kp * xd) * wave.d.cast<Complex>() +
         wave.beta * std::exp(iu * k.ks * xd) * wave.dperp.cast<Complex>();
}

namespace {

// e^{ikr}/r and its first two radial derivatives.
struct RadialWave {
  Complex f, df, ddf;
};

RadialWave radial_wave(double k, double r) {
  const Complex e = std::exp(iu * k * r);
  const double r2 = r * r;
  RadialWave g;
  g.f = e / r;
  g.df = e * (iu * k * r - 1.0) / r2;
  g.ddf = e * (2.0 - 2.0 * iu * k * r - k * k * r2) / (r2 * r);
  return g;
}

}  // namespace

Matrix3c kupradze_tensor(const Vector3& x, const Vector3& y, const Material& m, double omega,
                         double singular_eps) {
  const Vector3 rvec = x - y;
  const double r = rvec.norm();
  if (r <= singular_eps)
    throw std::domain_error("kupradze_tensor: evaluation at or below the singularity epsilon");
  const WaveNumbers k = wavenumbers(m, omega);
  const Vector3 rhat = rvec / r;
  const Matrix3 rr = rhat * rhat.transpose();

  const RadialWave gs = radial_wave(k.ks, r);
  const RadialWave gp = radial_wave(k.kp, r);
  const Complex psi_d = gs.df - gp.df;
  const Complex psi_dd = gs.ddf - gp.ddf;

  const double w2 = omega * omega;
  Matrix3c out = (gs.f / (4.0 * pi * m.mu)) * Matrix3c::Identity();
  out += (psi_dd / (4.0 * pi * w2)) * rr.cast<Complex>();
  out += (psi_d / (4.0 * pi * w2 * r)) * (Matrix3::Identity() - rr).cast<Complex>();
  return out;
}

Matrix3 kelvin_tensor(const Vector3& x, const Vector3& y, const Material& m,
                      double singular_eps) {
  const Vector3 rvec = x - y;
  const double r = rvec.norm();
  if (r <= singular_eps)
    throw std::domain_error("kelvin_tensor: evaluation at or below the singularity epsilon");
  const double denom = 8.0 * pi * m.mu * (m.lambda + 2.0 * m.mu);
  const double c1 = (m.lambda + 3.0 * m.mu) / denom;
  const double c2 = (m.lambda + m.mu) / denom;
  return (c1 / r) * Matrix3::Identity() + (c2 / (r * r * r)) * (rvec * rvec.transpose());
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
  x.assign(n, 0.0);
  w.assign(n, 0.0);
  // Newton iteration on P_n, nodes symmetric about 0.
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double t = std::cos(pi * (i + 0.75) / (n + 0.5));
    double p0 = 0.0, p1 = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      p0 = 1.0;
      p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
      }
      const double dp = n * (t * p0 - p1) / (t * t - 1.0);
      const double dt = p0 / dp;
      t -= dt;
      if (std::abs(dt) < 1e-15) break;
    }
    p0 = 1.0;
    p1 = 0.0;
    for (int j = 0; j < n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j + 1.0) * t * p1 - j * p2) / (j + 1.0);
    }
    const double dp = n * (t * p0 - p1) / (t * t - 1.0);
    x[i] = -t;
    x[n - 1 - i] = t;
    const double wi = 2.0 / ((1.0 - t * t) * dp * dp);
    w[i] = wi;
    w[n - 1 - i] = wi;
  }
}

SphereGrid make_sphere_grid(int n_polar, int n_azimuth) {
  if (n_polar < 2 || n_azimuth < 4)
    throw std::invalid_argument("make_sphere_grid: need n_polar >= 2 and n_azimuth >= 4");
  std::vector<double> t, wt;
  gauss_legendre(n_polar, t, wt);

  SphereGrid g;
  g.n_polar = n_polar;
  g.n_azimuth = n_azimuth;
  const int n = n_polar * n_azimuth;
  g.nodes.reserve(n);
  g.weights.reserve(n);
  g.polar.reserve(n);
  g.azimuth.reserve(n);
  const double wphi = 2.0 * pi / n_azimuth;
  for (int i = 0; i < n_polar; ++i) {
    const double ct = t[i];                      // cos(theta)
    const double st = std::sqrt(1.0 - ct * ct);  // sin(theta) >= 0
    const double theta = std::acos(ct);
    for (int j = 0; j < n_azimuth; ++j) {
      const double phi = wphi * j;
      g.nodes.emplace_back(st * std::cos(phi), st * std::sin(phi), ct);
      g.weights.push_back(wt[i] * wphi);
      g.polar.push_back(theta);
      g.azimuth.push_back(phi);
    }
  }
  return g;
}

bool same_grid(const SphereGrid& a, const SphereGrid& b, double tol) {
  if (a.size() != b.size()) return false;
  for (int k = 0; k < a.size(); ++k) {
    if ((a.nodes[k] - b.nodes[k]).norm() > tol) return false;
    if (std::abs(a.weights[k] - b.weights[k]) > tol) return false;
  }
  return true;
}

}  // namespace escat
