#include "knotlat/topology.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <limits>
#include <sstream>

#include "knotlat/braid.hpp"
#include "knotlat/errors.hpp"
#include "knotlat/linalg.hpp"
#include "knotlat/parallel.hpp"
#include "knotlat/spectral.hpp"

namespace knotlat {

namespace {

constexpr double kGapThreshold = 1e-8;
constexpr int kMaxWindingGrid = 1 << 18;

cplx traceless_det(const ModelParams& p, double k) {
    MatrixXcd h = build_bloch(p, k);
    const cplx shift = h.trace() / 4.0;
    for (int i = 0; i < 4; ++i) h(i, i) -= shift;
    return h.determinant();
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// Root of 16 lambda^2 = 2u + sign*sqrt(4u^2 - 16 v); NaN when not real positive.
double branch_root(double u, double v, int sign, bool* complex_dropped) {
    *complex_dropped = false;
    const double disc = 4.0 * u * u - 16.0 * v;
    if (disc < 0.0) {
        *complex_dropped = true;
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double rhs = (2.0 * u + sign * std::sqrt(disc)) / 16.0;
    if (rhs < 0.0) {
        *complex_dropped = true;
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (rhs == 0.0) return std::numeric_limits<double>::quiet_NaN(); // real but not positive
    return std::sqrt(rhs);
}

} // namespace

WindingResult winding_number(const ModelParams& params, int n_k) {
    if (n_k < 256) throw ConfigError("winding_number: n_k must be >= 256");
    params.validate();

    for (int grid = n_k; grid <= kMaxWindingGrid; grid *= 2) {
        std::vector<cplx> f(grid);
        double min_abs = std::numeric_limits<double>::infinity();
        double min_abs_k = 0.0;
        for (int m = 0; m < grid; ++m) {
            const double k = 2.0 * M_PI * m / grid;
            f[m] = traceless_det(params, k);
            const double a = std::abs(f[m]);
            if (a < min_abs) {
                min_abs = a;
                min_abs_k = k;
            }
        }
        if (min_abs < kGapThreshold) {
            std::ostringstream os;
            os << "winding_number: |det| = " << min_abs << " at k = " << min_abs_k
               << " (gapless point, on or near a phase boundary)";
            throw GaplessError(os.str());
        }

        double total = 0.0;
        bool ok = true;
        for (int m = 0; m < grid && ok; ++m) {
            const double inc = std::arg(f[(m + 1) % grid] / f[m]);
            if (std::abs(inc) >= M_PI / 2.0)
                ok = false;
            else
                total += inc;
        }
        if (!ok) continue;

        WindingResult r;
        r.w_raw = total / (2.0 * M_PI);
        r.w = static_cast<int>(std::lround(r.w_raw));
        r.min_abs_f = min_abs;
        r.n_k_used = grid;
        return r;
    }
    throw ResolutionError(
        "winding_number: argument increments stayed >= pi/2 at 2^18 samples");
}

BoundaryRoots phase_boundary_lambdas(const ModelParams& params) {
    params.validate();
    const double u = coeff_u(params);
    BoundaryRoots out;
    for (int p = 0; p <= params.q; ++p) {
        const double v = coeff_v(params, p * M_PI / params.q);
        for (int sign : {+1, -1}) {
            bool dropped = false;
            const double root = branch_root(u, v, sign, &dropped);
            if (dropped)
                ++out.dropped_complex;
            else if (std::isfinite(root))
                out.roots.push_back(root);
        }
    }
    std::sort(out.roots.begin(), out.roots.end());
    out.roots.erase(std::unique(out.roots.begin(), out.roots.end(),
                                [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                    out.roots.end());
    return out;
}

std::vector<BoundaryCurve> sample_boundary_curves(const ModelParams& base, double t2_min,
                                                  double t2_max, int n_samples) {
    if (n_samples < 2) throw ConfigError("sample_boundary_curves: n_samples must be >= 2");
    if (!(t2_min < t2_max)) throw ConfigError("sample_boundary_curves: need t2_min < t2_max");
    base.validate();

    std::vector<BoundaryCurve> curves;
    for (int p = 0; p <= base.q; ++p) {
        for (int sign : {+1, -1}) {
            BoundaryCurve c;
            c.p = p;
            c.sign = sign;
            for (int s = 0; s < n_samples; ++s) {
                ModelParams mp = base;
                mp.t2 = t2_min + (t2_max - t2_min) * s / (n_samples - 1);
                const double u = coeff_u(mp);
                const double v = coeff_v(mp, p * M_PI / mp.q);
                bool dropped = false;
                const double root = branch_root(u, v, sign, &dropped);
                if (!dropped && std::isfinite(root)) c.points.push_back({mp.t2, root});
            }
            curves.push_back(std::move(c));
        }
    }
    return curves;
}

PhaseDiagramGrid sweep_phase_diagram(const ModelParams& base, double lambda_min, double lambda_max,
                                     double t2_min, double t2_max, int res_lambda, int res_t2,
                                     int n_k, bool with_knots, int braid_n_k) {
    if (res_lambda < 16 || res_t2 < 16)
        throw ConfigError("sweep_phase_diagram: resolution must be >= 16 per axis");
    if (!(lambda_min < lambda_max) || !(t2_min < t2_max))
        throw ConfigError("sweep_phase_diagram: empty parameter range");
    if (n_k < 256) throw ConfigError("sweep_phase_diagram: n_k must be >= 256");
    if (with_knots && braid_n_k < 64)
        throw ConfigError("sweep_phase_diagram: braid_n_k must be >= 64");
    base.validate();

    PhaseDiagramGrid g;
    g.params_base = base;
    g.metadata.n_k = n_k;
    g.metadata.braid_n_k = with_knots ? braid_n_k : 0;
    g.metadata.gap_threshold = kGapThreshold;
    g.metadata.timestamp = utc_timestamp();
    g.lambda_axis.resize(res_lambda);
    g.t2_axis.resize(res_t2);
    for (int i = 0; i < res_lambda; ++i)
        g.lambda_axis[i] = lambda_min + (lambda_max - lambda_min) * i / (res_lambda - 1);
    for (int j = 0; j < res_t2; ++j)
        g.t2_axis[j] = t2_min + (t2_max - t2_min) * j / (res_t2 - 1);
    g.cells.assign(res_lambda, std::vector<PhaseCell>(res_t2));

    const std::size_t total = static_cast<std::size_t>(res_lambda) * res_t2;
    parallel_for(total, [&](std::size_t idx) {
        const int i = static_cast<int>(idx) / res_t2;
        const int j = static_cast<int>(idx) % res_t2;
        ModelParams p = base;
        p.lambda = g.lambda_axis[i];
        p.t2 = g.t2_axis[j];
        PhaseCell& cell = g.cells[i][j];
        try {
            const WindingResult wr = winding_number(p, n_k);
            cell.winding = wr.w;
            cell.w_raw = wr.w_raw;
            if (with_knots) {
                const EnergyStrings strings = track_bands(p, braid_n_k);
                const KnotClass kc = classify_knot(linking_invariants(extract_braid(strings)));
                cell.knot_tag = kc.label();
            }
        } catch (const ConfigError&) {
            throw; // usage problems must not be masked as boundary cells
        } catch (const GaplessError&) {
            cell.boundary = true;
            cell.note = "gapless";
        } catch (const Error& e) {
            // near-boundary points can also fail band tracking or projection;
            // flag rather than abort the sweep
            cell.boundary = true;
            cell.note = e.what();
        }
    });
    return g;
}

} // namespace knotlat
