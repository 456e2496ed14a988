#pragma once

#include <Eigen/Dense>

#include "knotlat/params.hpp"

namespace knotlat {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

// Pauli matrices and the 2x2 identity.
MatrixXcd pauli_x();
MatrixXcd pauli_y();
MatrixXcd pauli_z();
MatrixXcd id2();

MatrixXcd kron(const MatrixXcd& a, const MatrixXcd& b);

struct EigResult {
    VectorXcd values;
    MatrixXcd vectors; // empty when eigenvalues-only
};

// Dense general complex eigensolver (LAPACK zgeev).
EigResult eig_dense(const MatrixXcd& h, bool with_vectors = true);
VectorXcd eig_values(const MatrixXcd& h);

// log(det(m)) for a general complex matrix, via LU. Safe against
// overflow/underflow of the raw determinant.
cplx log_det(const MatrixXcd& m);

// Max-abs-entry norm (the symmetry-residual norm used throughout).
double max_abs(const MatrixXcd& m);

} // namespace knotlat
