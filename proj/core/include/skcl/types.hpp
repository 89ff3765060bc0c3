#pragma once

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace skcl {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using ComplexVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

// N x T, column t is sample x_t.
using DataMatrix = Matrix;

// N x K, column k is centroid c_k.
using Centroids = Matrix;

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws skcl::Error when any entry of the data is non-finite or the shape is empty.
void validate_data(const DataMatrix& data);

}  // namespace skcl
