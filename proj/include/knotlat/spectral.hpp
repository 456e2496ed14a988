#pragma once

#include <array>
#include <vector>

#include "knotlat/linalg.hpp"
#include "knotlat/model.hpp"

namespace knotlat {

// Four closed-form Bloch eigenenergies at wavevector k, principal-branch
// square roots, fixed sign order (+outer/+inner, -outer/+inner, +outer/-inner,
// -outer/-inner). Use multiset matching against numeric spectra, never
// branch-by-branch comparison.
std::array<cplx, 4> analytic_eigenvalues(const ModelParams& p, double k);

// u = t1^2+t2^2+t3^2+t4^2 and v(k) = t1^2 t3^2 + t2^2 t4^2 - 2 t1 t2 t3 t4 cos k.
double coeff_u(const ModelParams& p);
double coeff_v(const ModelParams& p, double k);

// Continuity-tracked bands over k in [0, 2pi].
struct EnergyStrings {
    ModelParams params;               // retained so downstream refinement can re-diagonalize
    std::vector<double> k_grid;       // n_k + 1 samples, k_0 = 0, k_{n_k} = 2pi
    std::array<std::vector<cplx>, 4> bands;
    std::array<int, 4> endpoint_permutation; // bands[i] ends where bands[perm[i]] starts

    int n_k() const { return static_cast<int>(k_grid.size()) - 1; }
};

// Track the four bands on a uniform grid with minimal-distance matching at
// each step; ambiguous matchings are resolved by local bisection (12 levels),
// persistent ambiguity raises DegenerateSpectrumError. Band labels at k=0 are
// sorted by (Re, Im) ascending.
EnergyStrings track_bands(const ModelParams& p, int n_k);

// One continuity step: labels the eigenvalues at k1 by matching against the
// labeled set at k0, refining by bisection when ambiguous.
std::array<cplx, 4> continue_bands(const ModelParams& p, const std::array<cplx, 4>& at_k0,
                                   double k0, double k1);

struct BiorthogonalBasis {
    VectorXcd values;   // right eigenvalues, cluster-sorted by (Re, Im)
    MatrixXcd right;    // columns = right eigenvectors, same order
    MatrixXcd left;     // columns = left eigenvectors with left^H * right = I
};

// Left/right eigensystem with mutual biorthonormalization. Pairs the spectrum
// of H with the conjugate spectrum of H^H (distance > 1e-6 -> NearEPError),
// then rescales the left vectors through the inverse overlap so that
// left^H right = I exactly; overlap condition numbers above 1e8 raise
// NearEPError as well.
BiorthogonalBasis biorthogonal_eigensystem(const MatrixXcd& h);

// Indices of `values` sorted by (Re, Im, index) with real parts that agree to
// ~1e-8 * scale treated as tied (guards against solver jitter reordering
// +-iy pairs). Shared by the eigensystem pairing and the Fermi-sea filling.
std::vector<int> cluster_sorted_indices(const VectorXcd& values);

} // namespace knotlat
