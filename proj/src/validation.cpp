#include "escat/validation.hpp"

#include <cmath>

namespace escat {

namespace {

Scene single(const ReferenceShape& shape, const Vector3& pos, const Vector3& euler,
             double scale) {
  Scene s;
  Placement p;
  p.position = pos;
  p.euler = euler;
  p.scale = scale;
  s.components.push_back({shape, p});
  return s;
}

FarField solve_one(const Scene& scene, const ValidationConfig& cfg, const IncidentWave& wave,
                   std::shared_ptr<const SphereGrid> grid) {
  const auto sol =
      solve_mfs(scene, wave, cfg.material, cfg.mfs_for(scene.components.at(0).shape.id));
  return farfield_from_mfs(sol, std::move(grid), cfg.material, wave.omega);
}

}  // namespace

namespace {

FarField solve_decorrelated(const Scene& scene, const ValidationConfig& cfg,
                            const IncidentWave& wave,
                            std::shared_ptr<const SphereGrid> grid) {
  MfsConfig mfs = cfg.mfs_for(scene.components.at(0).shape.id);
  mfs.auxiliary_scale = cfg.decorrelate_aux;
  const auto sol = solve_mfs(scene, wave, cfg.material, mfs);
  return farfield_from_mfs(sol, std::move(grid), cfg.material, wave.omega);
}

}  // namespace

std::vector<CheckResult> check_translation(const ValidationConfig& cfg) {
  auto grid = shared_sphere_grid(cfg.grid_polar, cfg.grid_azimuth);
  const Vector3 a(1.0, -0.5, 2.0);
  const Incidence inc = cfg.wave.pure_pressure() ? Incidence::Pressure : Incidence::Shear;
  std::vector<CheckResult> out;
  for (ShapeId id : {ShapeId::Ball, ShapeId::Peanut}) {
    const ReferenceShape shape = make_shape(id);
    const FarField base = solve_one(single(shape, Vector3::Zero(), Vector3::Zero(), 1.0), cfg,
                                    cfg.wave, grid);
    const FarField moved =
        solve_decorrelated(single(shape, a, Vector3::Zero(), 1.0), cfg, cfg.wave, grid);
    const double err = rel_l2_error(translate_farfield(base, a, inc), moved);
    out.push_back({"translation/" + shape.name, err, cfg.identity_tol, err < cfg.identity_tol,
                   "|translate(f0,a) - f(D+a)| / |f(D+a)|"});
  }
  return out;
}

std::vector<CheckResult> check_rotation(const ValidationConfig& cfg) {
  auto grid = shared_sphere_grid(cfg.grid_polar, cfg.grid_azimuth);
  const Vector3 euler(0.7, 0.5, 0.3);
  const Matrix3 R = euler_rotation(euler[0], euler[1], euler[2]);
  std::vector<CheckResult> out;
  for (ShapeId id : {ShapeId::Ball, ShapeId::Peanut}) {
    const ReferenceShape shape = make_shape(id);
    // Rotated body under the reference incidence ...
    const FarField rotated_body =
        solve_decorrelated(single(shape, Vector3::Zero(), euler, 1.0), cfg, cfg.wave, grid);
    // ... equals the rotation of the unrotated body's far field under the
    // back-rotated incidence.
    IncidentWave back = cfg.wave;
    back.d = R.transpose() * cfg.wave.d;
    back.dperp = R.transpose() * cfg.wave.dperp;
    const FarField base =
        solve_one(single(shape, Vector3::Zero(), Vector3::Zero(), 1.0), cfg, back, grid);
    const double err = rel_l2_error(rotate_farfield(base, R), rotated_body);
    out.push_back({"rotation/" + shape.name, err, cfg.identity_tol, err < cfg.identity_tol,
                   "|R f(R^-1 x; D, R^-1 d) - f(x; RD, d)| / |f(x; RD, d)|"});
  }
  return out;
}

std::vector<CheckResult> check_scaling(const ValidationConfig& cfg) {
  auto grid = shared_sphere_grid(cfg.grid_polar, cfg.grid_azimuth);
  std::vector<CheckResult> out;
  for (ShapeId id : {ShapeId::Ball, ShapeId::Peanut}) {
    const ReferenceShape shape = make_shape(id);
    Placement p;
    // Two genuinely different solves: the dilation would otherwise map the
    // discretization exactly.
    MfsConfig mfs = cfg.mfs_for(id);
    ScaleCheckResult res;
    {
      Scene scaled;
      Placement ps = p;
      ps.scale = 0.5;
      scaled.components.push_back({shape, ps});
      res.direct = solve_one(scaled, cfg, cfg.wave, grid);
    }
    {
      IncidentWave half = cfg.wave;
      half.omega = 0.5 * cfg.wave.omega;
      Scene base;
      base.components.push_back({shape, p});
      FarField fb = solve_decorrelated(base, cfg, half, grid);
      fb.values *= 0.5;
      fb.producer.reset();
      res.rescaled = std::move(fb);
    }
    res.discrepancy = rel_l2_error(res.rescaled, res.direct);
    out.push_back({"scaling/" + shape.name, res.discrepancy, cfg.identity_tol,
                   res.discrepancy < cfg.identity_tol,
                   "|f(0.5 D, w) - 0.5 f(D, 0.5 w)| / |f(0.5 D, w)|"});
  }
  return out;
}

std::vector<CheckResult> check_additivity(const ValidationConfig& cfg) {
  auto grid = shared_sphere_grid(cfg.grid_polar, cfg.grid_azimuth);
  const ReferenceShape ball = make_shape(ShapeId::Ball);
  std::vector<CheckResult> out;
  double prev = std::numeric_limits<double>::infinity();
  bool monotone = true;
  double last = 0.0;
  // Transverse to the incidence direction (along the polarization); in the
  // incidence direction the forward-scattering coupling is three to four
  // times stronger (0.19 against 0.046 at L = 10).
  for (double sep : {5.0, 10.0, 20.0}) {
    const Vector3 axis = cfg.wave.dperp;
    const Vector3 z1 = -0.5 * sep * axis, z2 = 0.5 * sep * axis;
    Scene joint;
    joint.components.push_back({ball, Placement{z1, Vector3::Zero(), 1.0}});
    joint.components.push_back({ball, Placement{z2, Vector3::Zero(), 1.0}});
    const FarField both = solve_one(joint, cfg, cfg.wave, grid);
    const FarField f1 = solve_one(single(ball, z1, Vector3::Zero(), 1.0), cfg, cfg.wave, grid);
    const FarField f2 = solve_one(single(ball, z2, Vector3::Zero(), 1.0), cfg, cfg.wave, grid);
    FarField sum = f1;
    sum.producer.reset();
    sum.values += f2.values;
    const double err = rel_l2_error(sum, both);
    out.push_back({"additivity/L=" + std::to_string(static_cast<int>(sep)), err,
                   std::numeric_limits<double>::quiet_NaN(), true,
                   "|f(D1)+f(D2) - f(D1 u D2)| / |f(D1 u D2)|"});
    if (err > prev + 1e-12) monotone = false;
    prev = err;
    last = err;
  }
  out.push_back({"additivity/monotone", monotone ? 1.0 : 0.0, 1.0, monotone,
                 "error nonincreasing over L in {5, 10, 20}"});
  out.push_back({"additivity/threshold", last, cfg.additivity_tol, last < cfg.additivity_tol,
                 "error at L = 20"});
  return out;
}

std::vector<CheckResult> check_asymptotic_order(const ValidationConfig& cfg) {
  auto grid = shared_sphere_grid(cfg.grid_polar, cfg.grid_azimuth);
  const ReferenceShape ball = make_shape(ShapeId::Ball);
  // One tensor at unit scale; degree-one homogeneity gives the others.
  const PolarizationTensor unit =
      polarization_tensor(ball, 1.0, cfg.material, cfg.polarization_surface);

  std::vector<CheckResult> out;
  std::vector<double> errs;
  for (double rho : {0.2, 0.1, 0.05}) {
    const FarField mfs =
        solve_one(single(ball, Vector3::Zero(), Vector3::Zero(), rho), cfg, cfg.wave, grid);
    PolarizationTensor t = unit;
    t.matrix *= rho;
    t.scale = rho;
    const FoldySolution foldy =
        foldy_solve({Vector3::Zero()}, {t}, cfg.wave, cfg.material, cfg.wave.omega);
    const FarField asym = asymptotic_farfield(foldy, grid, cfg.material, cfg.wave.omega);
    const double err = rel_l2_error(asym, mfs);
    errs.push_back(err);
    out.push_back({"asymptotic/rho=" + std::to_string(rho), err,
                   std::numeric_limits<double>::quiet_NaN(), true,
                   "|foldy - mfs| / |mfs|"});
  }
  for (size_t i = 0; i + 1 < errs.size(); ++i) {
    const double ratio = errs[i] / errs[i + 1];
    const bool ok = ratio >= 1.5 && ratio <= 3.0;
    out.push_back({"asymptotic/ratio" + std::to_string(i), ratio, 3.0, ok,
                   "error contraction when rho halves, expected in [1.5, 3]"});
  }
  return out;
}

std::vector<CheckResult> run_validation_suite(const ValidationConfig& cfg) {
  std::vector<CheckResult> all;
  for (auto&& part : {check_translation(cfg), check_rotation(cfg), check_scaling(cfg),
                      check_additivity(cfg), check_asymptotic_order(cfg)})
    all.insert(all.end(), part.begin(), part.end());
  return all;
}

}  // namespace escat
