#pragma once

#include <complex>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace delaytrack {

using Index = Eigen::Index;
using Complex = std::complex<double>;

using SparseMatrix = Eigen::SparseMatrix<double>;
using ComplexSparseMatrix = Eigen::SparseMatrix<Complex>;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using DenseMatrix = Eigen::MatrixXd;
using ComplexDenseMatrix = Eigen::MatrixXcd;
using Triplet = Eigen::Triplet<double>;
using ComplexTriplet = Eigen::Triplet<Complex>;

}  // namespace delaytrack
