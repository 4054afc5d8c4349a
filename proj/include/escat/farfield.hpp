// escat/farfield.hpp -- far-field patterns on a sphere grid and the exact
// operations on them: P/S splitting, L2 inner products, translation and
// rotation identities, and deterministic noise injection.

#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "escat/core.hpp"

namespace escat {

struct NoiseRecord {
  double level = 0.0;
  std::uint64_t seed = 0;
  bool applied = false;
};

struct FarFieldMetadata {
  Material material;
  IncidentWave wave;
  std::string normalization = "ps-unit-source-v1";
  std::string provenance = "unset";
  NoiseRecord noise;
  std::string config_digest;
};

/// Exact far-field evaluation at arbitrary directions; attached by producers
/// (point-source superpositions) so rotations can re-evaluate instead of
/// interpolating. Not serialized.
struct DirectionalEvaluator {
  virtual ~DirectionalEvaluator() = default;
  virtual Vector3c eval(const Vector3& xhat) const = 0;
};

/// Complex 3-vector samples of a far-field pattern on a shared sphere grid.
/// values(:,k) is the sample at grid->nodes[k]. Normalization: a unit
/// Kupradze point source at the origin has P-part pressure_prefactor(m) *
/// (xx^T) c and S-part shear_prefactor(m) * (I - xx^T) c.
struct FarField {
  std::shared_ptr<const SphereGrid> grid;
  Eigen::Matrix3Xcd values;
  FarFieldMetadata meta;
  std::shared_ptr<const DirectionalEvaluator> producer;

  int size() const { return static_cast<int>(values.cols()); }
  WaveNumbers wavenumbers_of() const { return wavenumbers(meta.material, meta.wave.omega); }
};

std::shared_ptr<const SphereGrid> shared_sphere_grid(int n_polar, int n_azimuth);

/// Node-wise radial / tangential split: P(x) = (f.x)x, S(x) = f - P. The two
/// parts are pointwise orthogonal and reassemble exactly.
std::pair<FarField, FarField> split_ps(const FarField& f);

/// L2(S^2)^3 inner product sum_k w_k f(x_k).conj(g(x_k)); fields must share
/// the grid.
Complex l2_inner(const FarField& f, const FarField& g);
double l2_norm(const FarField& f);

/// Relative L2 distance ||f-g|| / ||g||.
double rel_l2_error(const FarField& f, const FarField& g);

enum class Incidence { Pressure, Shear };

/// Far field of the translated scatterer D + a from the far field of D, for a
/// pure incident wave. Pressure incidence multiplies the P-part by
/// e^{i kp (d-x).a} and the S-part by e^{i (kp d - ks x).a}; shear incidence
/// uses e^{i (ks d - kp x).a} and e^{i ks (d-x).a}. Exact identity.
FarField translate_farfield(const FarField& f, const Vector3& a, Incidence incidence);

/// x -> R f(R^-1 x). Re-evaluates exactly through the producer when present;
/// otherwise falls back to nearest-node lookup and throws if the nearest node
/// is farther than angular_tol (radians). Metadata then corresponds to the
/// rotated scatterer with incidence (R d, R dperp).
FarField rotate_farfield(const FarField& f, const Matrix3& rotation, double angular_tol = 1e-8);

/// Multiplicative uniform noise: every real and imaginary part is scaled by
/// (1 + level * xi) with xi i.i.d. uniform on [-1,1] from a deterministic
/// seeded generator. Same seed, same field: bit-identical output.
FarField add_noise(const FarField& f, double level, std::uint64_t seed);

/// Far field of a superposition of Kupradze point sources with vector
/// amplitudes coeffs(:,k) at positions[k]:
///   P(x) = c_p (xx^T) sum_k e^{-i kp x.y_k} c_k,
///   S(x) = c_s (I - xx^T) sum_k e^{-i ks x.y_k} c_k,
/// c_p = pressure_prefactor, c_s = shear_prefactor. Supports evaluation at
/// arbitrary directions (used for exact rotation).
class PointSourceFarField : public DirectionalEvaluator {
 public:
  PointSourceFarField(std::vector<Vector3> positions, Eigen::Matrix3Xcd coeffs,
                      const Material& material, double omega);
  Vector3c eval(const Vector3& xhat) const override;

 private:
  std::vector<Vector3> positions_;
  Eigen::Matrix3Xcd coeffs_;
  double cp_, cs_;
  WaveNumbers k_;
};

/// Sample a point-source far field on a grid, attaching the exact evaluator
/// as producer and filling metadata.
FarField farfield_of_point_sources(const std::vector<Vector3>& positions,
                                   const Eigen::Matrix3Xcd& coeffs, const Material& material,
                                   const IncidentWave& wave,
                                   std::shared_ptr<const SphereGrid> grid,
                                   const std::string& provenance);

/// Deterministic uniform generator used by add_noise (splitmix64 core);
/// platform-independent by construction.
struct UniformRng {
  std::uint64_t state;
  explicit UniformRng(std::uint64_t seed) : state(seed) {}
  std::uint64_t next_u64() {
    state += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }
  /// Uniform on [-1, 1].
  double uniform_pm1() { return 2.0 * ((next_u64() >> 11) * 0x1.0p-53) - 1.0; }
};

}  // namespace escat
