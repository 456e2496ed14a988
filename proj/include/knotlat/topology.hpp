#pragma once

// Spectral winding number, analytic phase boundaries, and parallel
// phase-diagram sweeps over the (lambda, t2) plane.

#include <string>
#include <vector>

#include "knotlat/model.hpp"

namespace knotlat {

struct WindingResult {
    double w_raw = 0.0;  // accumulated argument / 2*pi
    int w = 0;           // nearest integer
    double min_abs_f = 0.0;
    int n_k_used = 0;
};

struct BoundaryRoots {
    std::vector<double> roots; // positive, ascending, deduplicated at 1e-12
    int dropped_complex = 0;   // sign/p slots whose root was not real
};

struct BoundaryCurvePoint {
    double t2 = 0.0;
    double lambda = 0.0;
};

// One (p, sign) branch of the boundary condition 16 lambda^2 = 2u +- sqrt(4u^2 - 16 v(p*pi/q)).
struct BoundaryCurve {
    int p = 0;
    int sign = +1;
    std::vector<BoundaryCurvePoint> points;
};

struct PhaseCell {
    bool boundary = false; // point raised a gapless (or other point-level) error
    int winding = 0;
    double w_raw = 0.0;
    std::string knot_tag; // empty unless the sweep ran with knots
    std::string note;     // error class for flagged cells
};

struct SweepMetadata {
    int n_k = 0;
    int braid_n_k = 0;
    double gap_threshold = 1e-8;
    std::string timestamp; // ISO-8601 UTC
};

struct PhaseDiagramGrid {
    std::vector<double> lambda_axis;
    std::vector<double> t2_axis;
    // cells[i][j] belongs to (lambda_axis[i], t2_axis[j])
    std::vector<std::vector<PhaseCell>> cells;
    ModelParams params_base; // lambda and t2 fields are ignored
    SweepMetadata metadata;
};

// Accumulates principal-branch argument increments of
// f(k) = det(H(k) - Tr[H(k)]/4 * I) around the Brillouin zone. Any increment
// of magnitude >= pi/2 doubles the grid (up to 2^18 samples).
WindingResult winding_number(const ModelParams& params, int n_k = 256);

// Real positive lambda roots of the boundary condition over p in {0..q} and
// both signs; params.lambda itself is ignored.
BoundaryRoots phase_boundary_lambdas(const ModelParams& params);

// Samples every (p, sign) branch over a uniform t2 grid, keeping points where
// the root is real and positive.
std::vector<BoundaryCurve> sample_boundary_curves(const ModelParams& base, double t2_min,
                                                  double t2_max, int n_samples);

// Evaluates winding_number (and optionally the knot class) on a uniform grid.
// Points raising gapless errors are boundary-flagged, not fatal; the result is
// independent of worker count.
PhaseDiagramGrid sweep_phase_diagram(const ModelParams& base, double lambda_min, double lambda_max,
                                     double t2_min, double t2_max, int res_lambda, int res_t2,
                                     int n_k, bool with_knots, int braid_n_k = 512);

} // namespace knotlat
