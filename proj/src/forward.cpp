#include "escat/forward.hpp"

#include <cmath>

#include "escat/linalg.hpp"

namespace escat {

namespace {

// Factor a requested total count into (n_s, n_rev) for the revolution
// sampler, keeping roughly twice as many nodes around the revolution.
std::pair<int, int> factor_counts(int total) {
  int n_s = std::max(8, static_cast<int>(std::lround(std::sqrt(total / 2.0))));
  int n_rev = std::max(8, static_cast<int>(std::lround(static_cast<double>(total) / n_s)));
  return {n_s, n_rev};
}

struct Assembly {
  std::vector<std::vector<Vector3>> collocation;  // per component
  std::vector<std::vector<Vector3>> sources;      // per component
  std::vector<Vector3> all_sources;
  Eigen::MatrixXcd matrix;                        // 3*coll x 3*src
};

// Near-uniform point layouts mapped onto the surfaces: collocation on the
// boundary, sources on the boundary shrunk toward the centroid by the
// auxiliary factor. The Fibonacci layout avoids the pole clustering of
// tensor grids, which otherwise dominates the fit error.
Assembly assemble(const Scene& scene, const Material& material, double omega,
                  const MfsConfig& config) {
  config.validate();
  validate_disjoint(scene);

  Assembly a;
  for (const auto& comp : scene.components) {
    std::vector<Vector3> coll;
    for (const auto& p : fibonacci_surface_points(comp.shape, config.n_collocation))
      coll.push_back(apply_placement(comp.placement, p));
    a.collocation.push_back(std::move(coll));

    std::vector<Vector3> src;
    for (const auto& p : fibonacci_surface_points(comp.shape, config.n_sources))
      src.push_back(apply_placement(comp.placement, config.auxiliary_scale * p));
    a.sources.push_back(src);
    a.all_sources.insert(a.all_sources.end(), src.begin(), src.end());
  }

  int n_coll = 0;
  for (const auto& s : a.collocation) n_coll += static_cast<int>(s.size());
  const int n_src = static_cast<int>(a.all_sources.size());

  a.matrix.resize(3 * n_coll, 3 * n_src);
  int row = 0;
  for (const auto& coll : a.collocation)
    for (const auto& point : coll) {
      for (int q = 0; q < n_src; ++q)
        a.matrix.block<3, 3>(row, 3 * q) =
            kupradze_tensor(point, a.all_sources[q], material, omega);
      row += 3;
    }
  return a;
}

// Field of the representation at x.
Vector3c representation_field(const std::vector<Vector3>& sources,
                              const Eigen::Matrix3Xcd& coeffs, const Material& material,
                              double omega, const Vector3& x) {
  Vector3c u = Vector3c::Zero();
  for (size_t q = 0; q < sources.size(); ++q)
    u += kupradze_tensor(x, sources[q], material, omega) * Vector3c(coeffs.col(q));
  return u;
}

double misfit_on_sample(const SurfaceSample& test, const std::vector<Vector3>& sources,
                        const Eigen::Matrix3Xcd& coeffs, const Material& material, double omega,
                        const std::function<Vector3c(const Vector3&)>& target) {
  double num = 0.0, den = 0.0;
  for (int p = 0; p < test.size(); ++p) {
    const Vector3c g = target(test.points[p]);
    const Vector3c u = representation_field(sources, coeffs, material, omega, test.points[p]);
    num += test.weights[p] * (u - g).squaredNorm();
    den += test.weights[p] * g.squaredNorm();
  }
  if (den == 0.0) return num == 0.0 ? 0.0 : 1.0;
  return std::sqrt(num / den);
}

std::vector<std::vector<MfsSolution>> solve_impl(
    const Scene& scene, const Material& material, double omega, const MfsConfig& config,
    const std::vector<std::function<Vector3c(const Vector3&)>>& targets,
    const std::vector<IncidentWave>& meta_waves) {
  std::vector<std::vector<MfsSolution>> results(targets.size());
  if (scene.components.empty()) return results;

  Assembly a = assemble(scene, material, omega, config);
  const int n_src = static_cast<int>(a.all_sources.size());
  int n_coll = 0;
  for (const auto& s : a.collocation) n_coll += static_cast<int>(s.size());

  Eigen::MatrixXcd rhs(3 * n_coll, targets.size());
  for (size_t w = 0; w < targets.size(); ++w) {
    int row = 0;
    for (const auto& coll : a.collocation)
      for (const auto& point : coll) {
        rhs.col(w).segment<3>(row) = targets[w](point);
        row += 3;
      }
  }

  TsvdInfo info;
  const Eigen::MatrixXcd x = tsvd_solve(a.matrix, rhs, config.svd_cutoff, &info);

  const auto [cs, cr] = factor_counts(config.n_collocation);
  for (size_t w = 0; w < targets.size(); ++w) {
    Eigen::Matrix3Xcd all_coeffs(3, n_src);
    for (int q = 0; q < n_src; ++q) all_coeffs.col(q) = x.col(w).segment<3>(3 * q);
    int src_offset = 0;
    for (size_t c = 0; c < scene.components.size(); ++c) {
      const auto& comp = scene.components[c];
      const int nc = static_cast<int>(a.sources[c].size());
      MfsSolution sol;
      sol.component = comp;
      sol.source_points = a.sources[c];
      sol.coefficients = all_coeffs.middleCols(src_offset, nc);
      sol.material = material;
      sol.wave = meta_waves[w];

      // Independent finer check sampling of this component boundary, under
      // the joint field of all sources.
      const SurfaceSample test = sample_surface(comp.shape, comp.placement, cs + 5, cr + 7);
      sol.residual = misfit_on_sample(test, a.all_sources, all_coeffs, material, omega,
                                      targets[w]);
      sol.residual_warning = sol.residual > config.residual_tolerance;
      results[w].push_back(std::move(sol));
      src_offset += nc;
    }
  }
  return results;
}

}  // namespace

std::vector<std::vector<MfsSolution>> solve_mfs_waves(const Scene& scene,
                                                      const std::vector<IncidentWave>& waves,
                                                      const Material& material,
                                                      const MfsConfig& config) {
  if (waves.empty()) return {};
  const double omega = waves.front().omega;
  std::vector<std::function<Vector3c(const Vector3&)>> targets;
  for (const auto& w : waves) {
    w.validate();
    if (w.omega != omega)
      throw std::invalid_argument("solve_mfs_waves: all waves must share omega");
    targets.push_back(
        [w, material](const Vector3& p) { return (-incident_field(w, material, p)).eval(); });
  }
  return solve_impl(scene, material, omega, config, targets, waves);
}

std::vector<MfsSolution> solve_mfs(const Scene& scene, const IncidentWave& wave,
                                   const Material& material, const MfsConfig& config) {
  return solve_mfs_waves(scene, {wave}, material, config).front();
}

std::vector<MfsSolution> solve_mfs_boundary(
    const Scene& scene, const std::function<Vector3c(const Vector3&)>& boundary_values,
    const Material& material, double omega, const MfsConfig& config) {
  IncidentWave meta;
  meta.omega = omega;
  return solve_impl(scene, material, omega, config, {boundary_values}, {meta}).front();
}

FarField farfield_from_mfs(const std::vector<MfsSolution>& solutions,
                           std::shared_ptr<const SphereGrid> grid, const Material& material,
                           double omega) {
  if (solutions.empty())
    throw std::invalid_argument("farfield_from_mfs: no solutions");
  std::vector<Vector3> positions;
  int n = 0;
  for (const auto& s : solutions) n += static_cast<int>(s.source_points.size());
  Eigen::Matrix3Xcd coeffs(3, n);
  int at = 0;
  for (const auto& s : solutions) {
    if (s.material.lambda != material.lambda || s.material.mu != material.mu ||
        s.wave.omega != omega)
      throw std::invalid_argument("farfield_from_mfs: material/omega mismatch with solutions");
    for (size_t q = 0; q < s.source_points.size(); ++q) {
      positions.push_back(s.source_points[q]);
      coeffs.col(at++) = s.coefficients.col(q);
    }
  }
  FarField f = farfield_of_point_sources(positions, coeffs, material, solutions.front().wave,
                                         std::move(grid), "mfs");
  return f;
}

double boundary_residual(const MfsSolution& solution, const IncidentWave& wave,
                         const Material& material, int n_test) {
  return boundary_residual(std::vector<MfsSolution>{solution}, 0, wave, material, n_test);
}

double boundary_residual(const std::vector<MfsSolution>& solutions, int index,
                         const IncidentWave& wave, const Material& material, int n_test) {
  if (index < 0 || index >= static_cast<int>(solutions.size()))
    throw std::invalid_argument("boundary_residual: index out of range");
  const auto [ts, tr] = factor_counts(n_test);
  const auto& comp = solutions[index].component;
  const SurfaceSample test = sample_surface(comp.shape, comp.placement, ts, tr);

  std::vector<Vector3> sources;
  int n = 0;
  for (const auto& s : solutions) n += static_cast<int>(s.source_points.size());
  Eigen::Matrix3Xcd coeffs(3, n);
  int at = 0;
  for (const auto& s : solutions)
    for (size_t q = 0; q < s.source_points.size(); ++q) {
      sources.push_back(s.source_points[q]);
      coeffs.col(at++) = s.coefficients.col(q);
    }

  const double omega = wave.omega;
  return misfit_on_sample(test, sources, coeffs, material, omega,
                          [&](const Vector3& p) {
                            return (-incident_field(wave, material, p)).eval();
                          });
}

}  // namespace escat
