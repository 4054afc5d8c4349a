// escat/linalg.hpp -- truncated-SVD least squares for ill-conditioned
// collocation systems.

#pragma once

#include <Eigen/Dense>
#include <complex>

namespace escat {

struct TsvdInfo {
  int rank = 0;              // columns kept after truncation
  double sigma_max = 0.0;
  double sigma_min_kept = 0.0;
};

/// Minimum-norm least-squares solve of A X = B with singular values below
/// cutoff * sigma_max discarded. Backed by LAPACK's divide-and-conquer SVD.
/// Throws std::runtime_error if the factorization fails to converge.
Eigen::MatrixXcd tsvd_solve(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B,
                            double cutoff, TsvdInfo* info = nullptr);

}  // namespace escat
