#pragma once

#include "knotlat/linalg.hpp"
#include "knotlat/params.hpp"

namespace knotlat {

// Real-space PBC Hamiltonian, 4*cells x 4*cells, site ordering cell-major
// (A,B,C,D). Entry (row, col) is the amplitude of c^dag_row c_col.
MatrixXcd build_real_hamiltonian(const ModelParams& p, const LatticeSpec& spec);

// V(k) = 2 mu sin(qk) + 2i lambda cos(qk).
cplx bloch_potential(const ModelParams& p, double k);

// 4x4 Bloch Hamiltonian H(k), basis (A,B,C,D). First Kronecker factor acts
// on the (AB)/(CD) pair index, second on the intra-pair index.
MatrixXcd build_bloch(const ModelParams& p, double k);

struct SymmetryReport {
    double phs = 0.0;    // max_k |C H(k)* C + H(-k)|
    double t_sym = 0.0;  // max_k |T H(k)^dag T - H(-k)|
    double gamma = 0.0;  // max_k |U H(k)^T U^dag + H(k)|, U = i sx x sy
    bool t1_equals_t3 = false; // T and Gamma hold only in this case
};

SymmetryReport symmetry_residuals(const ModelParams& p, int k_samples);

} // namespace knotlat
