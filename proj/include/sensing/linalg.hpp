#pragma once

#include <vector>

#include <Eigen/Dense>

namespace sensing {

// Eigenvalues of a symmetric matrix (upper triangle used), ascending.
std::vector<double> symmetric_eigenvalues(Eigen::MatrixXd a);
// Singular values of a general matrix, descending.
std::vector<double> singular_values(Eigen::MatrixXd a);

}  // namespace sensing
