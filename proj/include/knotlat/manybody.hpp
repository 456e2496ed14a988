#pragma once

// Biorthogonal free-fermion ground states at half filling, correlation-matrix
// entanglement entropy, CFT scaling fits, and fidelity susceptibility.

#include <utility>
#include <vector>

#include "knotlat/model.hpp"
#include "knotlat/spectral.hpp"

namespace knotlat {

struct BiorthogonalGroundState {
    std::vector<int> occupied;     // orbital ids, ascending
    MatrixXcd right_occ, left_occ; // sites x occupied, left_occ^H right_occ = I
    double fermi_gap = 0.0;        // |E_(N+1) - E_(N)| across the filling boundary
    cplx energy_sum;               // sum of occupied eigenvalues
};

struct CorrelationMatrix {
    int first = 0; // first site of the contiguous subsystem
    MatrixXcd entries;
};

enum class EntropyMode { vary_cut, vary_size };

struct EntropyCurve {
    std::vector<double> abscissa; // L_A values (vary_cut) or L values (vary_size)
    std::vector<double> entropy;
    EntropyMode mode = EntropyMode::vary_cut;
};

struct FitResult {
    double c = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
    double c_stderr = 0.0; // least-squares slope error scaled to c
    std::pair<double, double> window = {0.0, 0.0};
    bool poor_fit = false; // rms_residual > 0.05
};

struct FidelityResult {
    cplx f{1.0, 0.0};
    cplx chi{0.0, 0.0};
};

struct FidelityScanPoint {
    double lambda = 0.0;
    double t2 = 0.0;
    bool boundary = false;   // point errored; value holds the clip
    double abs_chi = 0.0;    // |chi| clipped at 2e4
    double log1p_abs_chi = 0.0;
};

struct FidelityGrid {
    std::vector<double> lambda_axis;
    std::vector<double> t2_axis;
    std::vector<std::vector<FidelityScanPoint>> cells; // [i_lambda][j_t2]
    ModelParams params_base;
    int sites = 0;
    double eps = 0.0;
    double clip = 2e4;
};

inline constexpr double kChiClip = 2e4;

// Tolerated |Im(S)|. Genuinely complex correlation spectra arise whenever the
// half-filled sea contains self-conjugate purely imaginary modes; their
// entropy carries an O(1/L) imaginary part that is physics, not breakage, so
// the guard only catches order-unity-and-larger residue from mispaired bases.
inline constexpr double kEntropyImagTol = 4.0;

// Occupies the sites/2 lowest-Re(E) orbitals of the dense real-space
// Hamiltonian; Re ties at the Fermi level break by ascending Im, then solver
// index. fermi_gap below 1e-10 raises a degenerate-filling error.
BiorthogonalGroundState ground_state(const MatrixXcd& h, double filling = 0.5);

// Same contract via per-wave-vector 4x4 blocks of the PBC lattice; equal
// correlation matrices, entropies, and fidelities as the dense path.
BiorthogonalGroundState ground_state_pbc(const ModelParams& params, int cells,
                                         double filling = 0.5);

// entries[i][j] = sum_m conj(left_occ[first+i][m]) * right_occ[first+j][m]
CorrelationMatrix correlation_matrix(const BiorthogonalGroundState& gs, int first, int count);

// S = -sum[eta log eta + (1-eta) log(1-eta)] over correlation-matrix
// eigenvalues with principal-branch logs; eigenvalues within 1e-12 of 0 or 1
// contribute zero. Returns Re(S); |Im(S)| above imag_tol raises an
// imaginary-residue error.
double entanglement_entropy(const CorrelationMatrix& c, double imag_tol = kEntropyImagTol);

// The same sum before discarding the imaginary part.
cplx entanglement_entropy_complex(const CorrelationMatrix& c);

// One ground-state solve, one entropy per cut; subsystem is sites 0..L_A-1.
EntropyCurve entropy_vs_cut(const ModelParams& params, int sites, const std::vector<int>& cuts);

// Half-lattice entropy for each size in `sizes` (each divisible by 4).
EntropyCurve entropy_vs_size(const ModelParams& params, const std::vector<int>& sizes);

// Least-squares S vs (c/3) log[(L/pi) sin(pi L_A / L)] + const over the window
// L/16 <= L_A <= 15 L/16; needs >= 8 windowed points.
FitResult fit_cardy_calabrese(const EntropyCurve& curve, int sites);

// Least-squares S vs (c/3) log L + const; needs >= 4 sizes spanning a factor
// of 4.
FitResult fit_log_scaling(const EntropyCurve& curve);

// F = det(M1) det(M2) with M1 = L_occ(lambda)^H R_occ(lambda+eps) and
// M2 = L_occ(lambda+eps)^H R_occ(lambda); chi = (1 - F) / eps^2.
// eps = 0 returns F = 1, chi = 0 exactly.
FidelityResult fidelity(const ModelParams& params, int sites, double eps);

// Overlap of two precomputed ground states; eps only scales chi.
FidelityResult fidelity_from_states(const BiorthogonalGroundState& a,
                                    const BiorthogonalGroundState& b, double eps);

// lambda scan at fixed t2 with eps = eps_steps * step, reusing each grid
// ground state; errors clip to kChiClip.
std::vector<FidelityScanPoint> fidelity_scan_lambda(const ModelParams& base, double lambda0,
                                                    double step, int n_points, int sites,
                                                    int eps_steps);

// 2D (lambda, t2) grid of log1p(min(|chi|, 2e4)); boundary errors store the
// clip value; independent of worker count.
FidelityGrid fidelity_scan(const ModelParams& base, double lambda_min, double lambda_max,
                           double t2_min, double t2_max, int res_lambda, int res_t2, int sites,
                           double eps);

} // namespace knotlat
