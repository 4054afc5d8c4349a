#include "escat/linalg.hpp"

#include <algorithm>
#include <stdexcept>
#include <vector>

#include <lapacke.h>

namespace escat {

Eigen::MatrixXcd tsvd_solve(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B,
                            double cutoff, TsvdInfo* info) {
  const lapack_int m = static_cast<lapack_int>(A.rows());
  const lapack_int n = static_cast<lapack_int>(A.cols());
  const lapack_int k = std::min(m, n);
  if (B.rows() != A.rows()) throw std::invalid_argument("tsvd_solve: row mismatch");
  if (!(cutoff > 0.0)) throw std::invalid_argument("tsvd_solve: cutoff must be positive");
  if (k == 0) throw std::invalid_argument("tsvd_solve: empty matrix");

  Eigen::MatrixXcd a = A;  // overwritten by zgesdd
  Eigen::MatrixXcd u(m, k), vt(k, n);
  std::vector<double> s(k);

  // Workspace managed here: the convenience wrapper of some LAPACKE builds
  // under-sizes rwork for jobz='S'.
  const lapack_int mx = std::max(m, n);
  const std::size_t lrwork =
      std::max<std::size_t>(static_cast<std::size_t>(k) *
                                std::max<std::size_t>(5 * static_cast<std::size_t>(k) + 7,
                                                      2 * static_cast<std::size_t>(mx) +
                                                          2 * static_cast<std::size_t>(k) + 1),
                            1) +
      64;
  std::vector<double> rwork(lrwork);
  std::vector<lapack_int> iwork(8 * static_cast<std::size_t>(k) + 8);

  lapack_complex_double wkopt;
  lapack_int ret = LAPACKE_zgesdd_work(
      LAPACK_COL_MAJOR, 'S', m, n, reinterpret_cast<lapack_complex_double*>(a.data()), m,
      s.data(), reinterpret_cast<lapack_complex_double*>(u.data()), m,
      reinterpret_cast<lapack_complex_double*>(vt.data()), k, &wkopt, -1, rwork.data(),
      iwork.data());
  if (ret != 0) throw std::runtime_error("tsvd_solve: SVD workspace query failed");
  const std::size_t lwork =
      static_cast<std::size_t>(*reinterpret_cast<double*>(&wkopt)) + 64;
  std::vector<std::complex<double>> work(lwork);

  ret = LAPACKE_zgesdd_work(
      LAPACK_COL_MAJOR, 'S', m, n, reinterpret_cast<lapack_complex_double*>(a.data()), m,
      s.data(), reinterpret_cast<lapack_complex_double*>(u.data()), m,
      reinterpret_cast<lapack_complex_double*>(vt.data()), k,
      reinterpret_cast<lapack_complex_double*>(work.data()), static_cast<lapack_int>(lwork),
      rwork.data(), iwork.data());
  if (ret != 0) throw std::runtime_error("tsvd_solve: SVD failed to converge");

  const double smax = s.empty() ? 0.0 : s[0];
  const double thresh = cutoff * smax;
  int rank = 0;
  while (rank < k && s[rank] > thresh) ++rank;
  if (rank == 0) throw std::runtime_error("tsvd_solve: matrix is numerically zero");

  if (info) {
    info->rank = rank;
    info->sigma_max = smax;
    info->sigma_min_kept = s[rank - 1];
  }

  Eigen::MatrixXcd c = u.leftCols(rank).adjoint() * B;
  for (int i = 0; i < rank; ++i) c.row(i) /= s[i];
  return vt.topRows(rank).adjoint() * c;
}

}  // namespace escat
