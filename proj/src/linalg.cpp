#include "sensing/linalg.hpp"

#include <lapacke.h>

#include <string>

#include "sensing/errors.hpp"

namespace sensing {

std::vector<double> symmetric_eigenvalues(Eigen::MatrixXd a) {
  if (a.rows() != a.cols()) throw InvalidParameter("eigenvalues need a square matrix");
  const lapack_int n = lapack_int(a.rows());
  std::vector<double> w(n);
  if (n == 0) return w;
  const lapack_int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'N', 'U', n, a.data(), n, w.data());
  if (info != 0) throw NumericError("dsyevd failed with info " + std::to_string(info));
  return w;
}

std::vector<double> singular_values(Eigen::MatrixXd a) {
  const lapack_int m = lapack_int(a.rows()), n = lapack_int(a.cols());
  std::vector<double> s(std::min(m, n));
  if (s.empty()) return s;
  const lapack_int info =
      LAPACKE_dgesdd(LAPACK_COL_MAJOR, 'N', m, n, a.data(), m, s.data(), nullptr, 1, nullptr, 1);
  if (info != 0) throw NumericError("dgesdd failed with info " + std::to_string(info));
  return s;
}

}  // namespace sensing
