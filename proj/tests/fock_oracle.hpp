#pragma once

// Brute-force many-body reference: builds the full N-particle sector of a
// quadratic fermion Hamiltonian and evaluates ground-state quantities
// directly in Fock space. Exponential in system size; test-only.

#include <Eigen/Dense>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "knotlat/params.hpp"

namespace fock {

struct Sector {
    int sites = 0;
    int n = 0;
    std::vector<uint32_t> states;              // occupation bitmasks, ascending
    std::unordered_map<uint32_t, int> index;   // mask -> row
};

Sector build_sector(int sites, int n);

// Second-quantized matrix of sum_ij h1(i,j) c_i^dag c_j in the sector basis.
Eigen::MatrixXcd many_body_matrix(const Eigen::MatrixXcd& h1, const Sector& s);

struct GroundPair {
    knotlat::cplx energy;
    Eigen::VectorXcd right;   // |G_R>
    Eigen::VectorXcd left;    // |G_L>, scaled so <G_L|G_R> = 1
};

// Ground pair of the N-particle sector: eigenvalue minimal under the same
// jitter-tolerant (Re, Im) ordering the library uses, left partner from the
// adjoint sector matrix.
GroundPair ground_pair(const Eigen::MatrixXcd& h1, int n);

// <G_L| c_i^dag c_j |G_R> for all i, j.
Eigen::MatrixXcd correlation(const GroundPair& g, const Sector& s);

// Entanglement entropy of rho_A = Tr_B |G_R><G_L| over modes [0, la),
// computed from the reduced density matrix itself (no correlation-matrix
// shortcut). Principal-branch logs.
knotlat::cplx rho_a_entropy(const GroundPair& g, const Sector& s, int la);

// <G_L(a)|G_R(b)> <G_L(b)|G_R(a)> at half filling.
knotlat::cplx fidelity_overlap(const Eigen::MatrixXcd& h1a, const Eigen::MatrixXcd& h1b);

} // namespace fock
