#include "escat/asymptotic.hpp"

#include <cmath>

namespace escat {

namespace {

std::pair<int, int> factor_counts(int total) {
  int n_s = std::max(8, static_cast<int>(std::lround(std::sqrt(total / 2.0))));
  int n_rev = std::max(8, static_cast<int>(std::lround(static_cast<double>(total) / n_s)));
  return {n_s, n_rev};
}

// Revolution-surface sampling that keeps the parameter cells, for the
// singular quadrature below. Placement rotation/scale applied, translation
// omitted (the Kelvin kernel depends on differences only).
struct ParamGrid {
  std::vector<double> s, phi;          // node parameters
  std::vector<double> s_lo, s_hi;      // cell bounds in s per polar index
  double dphi = 0.0;
  int n_s = 0, n_rev = 0;
  Matrix3 rot;
  double scale = 1.0;
  const ReferenceShape* shape = nullptr;

  Vector3 point(double ss, double pp) const {
    return rot * (scale * surface_point(*shape, ss, pp));
  }
  double jacobian(double ss) const {
    const auto p = shape->profile(ss);
    const auto dp = shape->dprofile(ss);
    return scale * scale * p[1] * std::hypot(dp[0], dp[1]);
  }
};

ParamGrid make_param_grid(const ReferenceShape& shape, const Placement& placement, int n_s,
                          int n_rev) {
  std::vector<double> t, wt;
  gauss_legendre(n_s, t, wt);
  ParamGrid g;
  g.n_s = n_s;
  g.n_rev = n_rev;
  g.rot = placement.rotation();
  g.scale = placement.scale;
  g.shape = &shape;
  g.dphi = 2.0 * pi / n_rev;
  g.s.resize(n_s);
  for (int i = 0; i < n_s; ++i) g.s[i] = 0.5 * pi * (t[i] + 1.0);
  g.s_lo.resize(n_s);
  g.s_hi.resize(n_s);
  for (int i = 0; i < n_s; ++i) {
    g.s_lo[i] = (i == 0) ? 0.0 : 0.5 * (g.s[i - 1] + g.s[i]);
    g.s_hi[i] = (i == n_s - 1) ? pi : 0.5 * (g.s[i] + g.s[i + 1]);
  }
  g.phi.resize(n_rev);
  for (int j = 0; j < n_rev; ++j) g.phi[j] = g.dphi * j;
  return g;
}

// int over the cell of Pi0(x0, y(s,phi)) J(s,phi) ds dphi with the 1/r
// singularity at (s0, phi0): four corner rectangles, each split into two
// Duffy triangles.
Matrix3 duffy_cell_integral(const ParamGrid& g, const Material& material, const Vector3& x0,
                            double s0, double phi0, double sa, double sb, double pa, double pb) {
  static thread_local std::vector<double> gx, gw;
  if (gx.empty()) gauss_legendre(8, gx, gw);
  const int m = static_cast<int>(gx.size());

  Matrix3 acc = Matrix3::Zero();
  const double sA[2] = {sa - s0, sb - s0};
  const double pA[2] = {pa - phi0, pb - phi0};
  for (double A : sA)
    for (double B : pA) {
      if (A == 0.0 || B == 0.0) continue;
      for (int tri = 0; tri < 2; ++tri)
        for (int a = 0; a < m; ++a)
          for (int b = 0; b < m; ++b) {
            const double u = 0.5 * (gx[a] + 1.0);
            const double v = 0.5 * (gx[b] + 1.0);
            const double w = 0.25 * gw[a] * gw[b];
            const double ss = s0 + (tri == 0 ? u * A : u * v * A);
            const double pp = phi0 + (tri == 0 ? u * v * B : u * B);
            const Vector3 y = g.point(ss, pp);
            if ((y - x0).norm() < 1e-14) continue;
            acc += (w * std::abs(A * B) * u * g.jacobian(ss)) *
                   kelvin_tensor(x0, y, material, 1e-15);
          }
    }
  return acc;
}

// Non-singular cell integrated with a 6x6 rule (near-diagonal cells).
Matrix3 near_cell_integral(const ParamGrid& g, const Material& material, const Vector3& x0,
                           double sa, double sb, double pa, double pb) {
  static thread_local std::vector<double> gx, gw;
  if (gx.empty()) gauss_legendre(6, gx, gw);
  const int m = static_cast<int>(gx.size());
  Matrix3 acc = Matrix3::Zero();
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      const double ss = 0.5 * (sa + sb) + 0.5 * (sb - sa) * gx[a];
      const double pp = 0.5 * (pa + pb) + 0.5 * (pb - pa) * gx[b];
      const double w = 0.25 * (sb - sa) * (pb - pa) * gw[a] * gw[b];
      acc += (w * g.jacobian(ss)) * kelvin_tensor(x0, g.point(ss, pp), material, 1e-15);
    }
  return acc;
}

}  // namespace

PolarizationTensor polarization_tensor_placed(const ReferenceShape& shape,
                                              const Placement& placement,
                                              const Material& material, int n_surface) {
  if (!(placement.scale > 0.0))
    throw std::invalid_argument("polarization_tensor: scale must be positive");
  const auto [n_s, n_rev] = factor_counts(n_surface);
  const ParamGrid g = make_param_grid(shape, placement, n_s, n_rev);

  const int N = n_s * n_rev;
  std::vector<double> t, wt;
  gauss_legendre(n_s, t, wt);
  std::vector<Vector3> pts(N);
  std::vector<double> wts(N);
  for (int i = 0; i < n_s; ++i)
    for (int j = 0; j < n_rev; ++j) {
      const int k = i * n_rev + j;
      pts[k] = g.point(g.s[i], g.phi[j]);
      wts[k] = 0.5 * pi * wt[i] * g.dphi * g.jacobian(g.s[i]);
    }

  // Near radius: a couple of cell diameters.
  double hmax = 0.0;
  for (int i = 0; i < n_s; ++i) hmax = std::max(hmax, g.s_hi[i] - g.s_lo[i]);
  const double near_radius =
      2.5 * placement.scale * shape.circumradius * std::max(hmax, g.dphi);

  Eigen::MatrixXd M(3 * N, 3 * N);
  for (int p = 0; p < N; ++p) {
    const Vector3& x0 = pts[p];
    for (int q = 0; q < N; ++q) {
      const int qi = q / n_rev, qj = q % n_rev;
      Matrix3 block;
      if (q == p) {
        block = duffy_cell_integral(g, material, x0, g.s[qi], g.phi[qj], g.s_lo[qi],
                                    g.s_hi[qi], g.phi[qj] - 0.5 * g.dphi,
                                    g.phi[qj] + 0.5 * g.dphi);
      } else if ((pts[q] - x0).norm() < near_radius) {
        block = near_cell_integral(g, material, x0, g.s_lo[qi], g.s_hi[qi],
                                   g.phi[qj] - 0.5 * g.dphi, g.phi[qj] + 0.5 * g.dphi);
      } else {
        block = wts[q] * kelvin_tensor(x0, pts[q], material, 1e-15);
      }
      M.block<3, 3>(3 * p, 3 * q) = block;
    }
  }

  Eigen::MatrixXd rhs(3 * N, 3);
  for (int p = 0; p < N; ++p) rhs.block<3, 3>(3 * p, 0) = Matrix3::Identity();

  Eigen::PartialPivLU<Eigen::MatrixXd> lu(M);
  const double rc = lu.rcond();
  if (!(rc > 1e-14)) {
    throw std::runtime_error("polarization_tensor: discrete system is ill-conditioned (rcond=" +
                             std::to_string(rc) + ")");
  }
  const Eigen::MatrixXd theta = lu.solve(rhs);

  Matrix3 C = Matrix3::Zero();
  for (int p = 0; p < N; ++p) C += wts[p] * theta.block<3, 3>(3 * p, 0);

  PolarizationTensor out;
  out.matrix = C.cast<Complex>();
  out.shape = shape.id;
  out.shape_name = shape.name;
  out.scale = placement.scale;
  return out;
}

PolarizationTensor polarization_tensor(const ReferenceShape& shape, double scale,
                                       const Material& material, int n_surface) {
  Placement placement;
  placement.scale = scale;
  return polarization_tensor_placed(shape, placement, material, n_surface);
}

FoldySolution foldy_solve(const std::vector<Vector3>& positions,
                          const std::vector<PolarizationTensor>& tensors,
                          const IncidentWave& wave, const Material& material, double omega) {
  const int l = static_cast<int>(positions.size());
  if (static_cast<int>(tensors.size()) != l)
    throw std::invalid_argument("foldy_solve: one tensor per position required");
  for (int j = 0; j < l; ++j)
    for (int m = j + 1; m < l; ++m)
      if ((positions[j] - positions[m]).norm() < 1e-12)
        throw std::invalid_argument("foldy_solve: positions must be pairwise distinct");

  FoldySolution sol;
  sol.positions = positions;
  sol.material = material;
  sol.wave = wave;
  sol.charges.resize(3, l);
  if (l == 0) return sol;

  Eigen::MatrixXcd A(3 * l, 3 * l);
  Eigen::VectorXcd b(3 * l);
  for (int j = 0; j < l; ++j) {
    A.block<3, 3>(3 * j, 3 * j) = tensors[j].matrix.inverse();
    for (int m = 0; m < l; ++m) {
      if (m == j) continue;
      A.block<3, 3>(3 * j, 3 * m) =
          kupradze_tensor(positions[j], positions[m], material, omega);
    }
    b.segment<3>(3 * j) = -incident_field(wave, material, positions[j]);
  }

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  const double rc = lu.rcond();
  if (!(rc > 1e-14))
    throw std::runtime_error("foldy_solve: singular system (rcond=" + std::to_string(rc) + ")");
  const Eigen::VectorXcd q = lu.solve(b);

  const double bn = b.norm();
  sol.residual = bn == 0.0 ? 0.0 : (A * q - b).norm() / bn;
  for (int j = 0; j < l; ++j) sol.charges.col(j) = q.segment<3>(3 * j);
  return sol;
}

FarField asymptotic_farfield(const FoldySolution& solution,
                             std::shared_ptr<const SphereGrid> grid, const Material& material,
                             double omega) {
  if (solution.material.lambda != material.lambda || solution.material.mu != material.mu ||
      solution.wave.omega != omega)
    throw std::invalid_argument("asymptotic_farfield: material/omega mismatch with solution");
  return farfield_of_point_sources(solution.positions, solution.charges, material,
                                   solution.wave, std::move(grid), "foldy");
}

}  // namespace escat
