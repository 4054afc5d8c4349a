#include "escat/farfield.hpp"

#include <cmath>

namespace escat {

std::shared_ptr<const SphereGrid> shared_sphere_grid(int n_polar, int n_azimuth) {
  return std::make_shared<const SphereGrid>(make_sphere_grid(n_polar, n_azimuth));
}

namespace {

void require_grid(const FarField& f) {
  if (!f.grid || f.grid->size() == 0 || f.values.cols() != f.grid->size())
    throw std::invalid_argument("far field has no grid or mismatched sample count");
}

void require_same_grid(const FarField& f, const FarField& g) {
  require_grid(f);
  require_grid(g);
  if (f.grid != g.grid && !same_grid(*f.grid, *g.grid))
    throw std::invalid_argument("far fields sampled on different grids");
}

}  // namespace

std::pair<FarField, FarField> split_ps(const FarField& f) {
  require_grid(f);
  FarField p = f;
  FarField s = f;
  p.producer.reset();
  s.producer.reset();
  for (int k = 0; k < f.size(); ++k) {
    const Vector3& x = f.grid->nodes[k];
    const Vector3c v = f.values.col(k);
    const Complex radial = x.cast<Complex>().dot(v);  // sum_c x_c v_c, x real
    p.values.col(k) = radial * x.cast<Complex>();
    s.values.col(k) = v - p.values.col(k);
  }
  return {std::move(p), std::move(s)};
}

Complex l2_inner(const FarField& f, const FarField& g) {
  require_same_grid(f, g);
  // sum_k w_k f(x_k) . conj(g(x_k)); Eigen's dot conjugates its first arg.
  Complex acc(0.0, 0.0);
  for (int k = 0; k < f.size(); ++k)
    acc += f.grid->weights[k] * g.values.col(k).dot(f.values.col(k));
  return acc;
}

double l2_norm(const FarField& f) {
  require_grid(f);
  double acc = 0.0;
  for (int k = 0; k < f.size(); ++k)
    acc += f.grid->weights[k] * f.values.col(k).squaredNorm();
  return std::sqrt(acc);
}

double rel_l2_error(const FarField& f, const FarField& g) {
  require_same_grid(f, g);
  double num = 0.0, den = 0.0;
  for (int k = 0; k < f.size(); ++k) {
    num += f.grid->weights[k] * (f.values.col(k) - g.values.col(k)).squaredNorm();
    den += f.grid->weights[k] * g.values.col(k).squaredNorm();
  }
  if (den == 0.0) throw std::invalid_argument("rel_l2_error: reference field is zero");
  return std::sqrt(num / den);
}

FarField translate_farfield(const FarField& f, const Vector3& a, Incidence incidence) {
  require_grid(f);
  const IncidentWave& w = f.meta.wave;
  if (w.alpha != Complex(0.0) && w.beta != Complex(0.0))
    throw std::invalid_argument("translate_farfield: mixed incidence (alpha*beta != 0)");
  if (incidence == Incidence::Pressure && !w.pure_pressure())
    throw std::invalid_argument("translate_farfield: field is not pure pressure incidence");
  if (incidence == Incidence::Shear && !w.pure_shear())
    throw std::invalid_argument("translate_farfield: field is not pure shear incidence");

  const WaveNumbers k = f.wavenumbers_of();
  const double kd = (incidence == Incidence::Pressure) ? k.kp : k.ks;
  const Complex din = std::exp(iu * kd * w.d.dot(a));

  FarField out = f;
  out.producer.reset();
  for (int n = 0; n < f.size(); ++n) {
    const Vector3& x = f.grid->nodes[n];
    const Vector3c v = f.values.col(n);
    const Complex radial = x.cast<Complex>().dot(v);
    const Vector3c pf = radial * x.cast<Complex>();
    const Vector3c sf = v - pf;
    const Complex phase_p = din * std::exp(-iu * k.kp * x.dot(a));
    const Complex phase_s = din * std::exp(-iu * k.ks * x.dot(a));
    out.values.col(n) = phase_p * pf + phase_s * sf;
  }
  return out;
}

FarField rotate_farfield(const FarField& f, const Matrix3& rotation, double angular_tol) {
  require_grid(f);
  const Matrix3 rinv = rotation.transpose();
  FarField out = f;
  out.producer.reset();
  if (f.producer) {
    for (int n = 0; n < f.size(); ++n) {
      const Vector3 xr = rinv * f.grid->nodes[n];
      out.values.col(n) = rotation.cast<Complex>() * f.producer->eval(xr);
    }
  } else {
    for (int n = 0; n < f.size(); ++n) {
      const Vector3 xr = rinv * f.grid->nodes[n];
      int best = -1;
      double best_dot = -2.0;
      for (int m = 0; m < f.size(); ++m) {
        const double dot = xr.dot(f.grid->nodes[m]);
        if (dot > best_dot) {
          best_dot = dot;
          best = m;
        }
      }
      const double angle = std::acos(std::min(1.0, std::max(-1.0, best_dot)));
      if (angle > angular_tol)
        throw std::runtime_error(
            "rotate_farfield: no producer and nearest grid node exceeds the angular tolerance");
      out.values.col(n) = rotation.cast<Complex>() * f.values.col(best);
    }
  }
  out.meta.wave.d = rotation * f.meta.wave.d;
  out.meta.wave.dperp = rotation * f.meta.wave.dperp;
  out.meta.provenance = f.meta.provenance + "+rotated";
  return out;
}

PointSourceFarField::PointSourceFarField(std::vector<Vector3> positions,
                                         Eigen::Matrix3Xcd coeffs, const Material& material,
                                         double omega)
    : positions_(std::move(positions)),
      coeffs_(std::move(coeffs)),
      cp_(pressure_prefactor(material)),
      cs_(shear_prefactor(material)),
      k_(wavenumbers(material, omega)) {
  if (static_cast<int>(positions_.size()) != coeffs_.cols())
    throw std::invalid_argument("PointSourceFarField: positions/coefficients mismatch");
}

Vector3c PointSourceFarField::eval(const Vector3& xhat) const {
  Vector3c qp = Vector3c::Zero();
  Vector3c qs = Vector3c::Zero();
  for (size_t j = 0; j < positions_.size(); ++j) {
    const double xy = xhat.dot(positions_[j]);
    qp += std::exp(-iu * k_.kp * xy) * coeffs_.col(j);
    qs += std::exp(-iu * k_.ks * xy) * coeffs_.col(j);
  }
  const Complex radial_p = xhat.cast<Complex>().dot(qp);
  const Complex radial_s = xhat.cast<Complex>().dot(qs);
  return cp_ * radial_p * xhat.cast<Complex>() +
         cs_ * (qs - radial_s * xhat.cast<Complex>());
}

FarField farfield_of_point_sources(const std::vector<Vector3>& positions,
                                   const Eigen::Matrix3Xcd& coeffs, const Material& material,
                                   const IncidentWave& wave,
                                   std::shared_ptr<const SphereGrid> grid,
                                   const std::string& provenance) {
  if (!grid || grid->size() == 0)
    throw std::invalid_argument("farfield_of_point_sources: empty grid");
  auto eval = std::make_shared<PointSourceFarField>(positions, coeffs, material, wave.omega);
  FarField f;
  f.grid = std::move(grid);
  f.values.resize(3, f.grid->size());
  for (int n = 0; n < f.grid->size(); ++n) f.values.col(n) = eval->eval(f.grid->nodes[n]);
  f.meta.material = material;
  f.meta.wave = wave;
  f.meta.provenance = provenance;
  f.producer = std::move(eval);
  return f;
}

FarField add_noise(const FarField& f, double level, std::uint64_t seed) {
  require_grid(f);
  if (level < 0.0) throw std::invalid_argument("add_noise: level must be >= 0");
  FarField out = f;
  out.producer.reset();
  UniformRng rng(seed);
  for (int n = 0; n < f.size(); ++n)
    for (int c = 0; c < 3; ++c) {
      const Complex v = f.values(c, n);
      const double re = v.real() * (1.0 + level * rng.uniform_pm1());
      const double im = v.imag() * (1.0 + level * rng.uniform_pm1());
      out.values(c, n) = Complex(re, im);
    }
  out.meta.noise = NoiseRecord{level, seed, true};
  return out;
}

}  // namespace escat
