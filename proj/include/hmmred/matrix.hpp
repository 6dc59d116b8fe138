#ifndef HMMRED_MATRIX_HPP
#define HMMRED_MATRIX_HPP

#include <Eigen/Dense>

namespace hmmred {

// Dense storage is row-major throughout; the kernels walk rows contiguously.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;
using ColVector = Eigen::VectorXd;

using Symbol = int;
using Index = long long;

}  // namespace hmmred

#endif  // HMMRED_MATRIX_HPP
