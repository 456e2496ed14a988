#include "knotlat/manybody.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <sstream>

#include "knotlat/errors.hpp"
#include "knotlat/parallel.hpp"

namespace knotlat {

namespace {

constexpr double kFermiGapTol = 1e-10;
constexpr double kEtaSkipTol = 1e-12;

int occupation_count(Eigen::Index n, double filling) {
    const double target = filling * static_cast<double>(n);
    const int n_occ = static_cast<int>(std::llround(target));
    if (std::abs(target - n_occ) > 1e-9)
        throw ConfigError("filling does not give an integer occupation");
    if (n_occ < 1 || n_occ >= n)
        throw ConfigError("occupation must satisfy 0 < N_occ < sites");
    return n_occ;
}

struct FillingSelection {
    std::vector<int> occupied; // ascending orbital ids
    double fermi_gap = 0.0;
    cplx energy_sum{0.0, 0.0};
};

// Lowest-Re(E) occupation with Fermi-level Re ties broken by ascending Im,
// then solver index (the cluster ordering).
FillingSelection select_filling(const VectorXcd& values, int n_occ) {
    const std::vector<int> order = cluster_sorted_indices(values);
    FillingSelection sel;
    sel.occupied.assign(order.begin(), order.begin() + n_occ);
    std::sort(sel.occupied.begin(), sel.occupied.end());
    sel.fermi_gap = std::abs(values(order[n_occ]) - values(order[n_occ - 1]));
    if (sel.fermi_gap < kFermiGapTol) {
        std::ostringstream os;
        os << "ground state: degeneracy straddles the Fermi level (gap " << sel.fermi_gap
           << "); parameter point sits on a phase boundary";
        throw DegenerateFillingError(os.str());
    }
    for (int id : sel.occupied) sel.energy_sum += values(id);
    return sel;
}

double clip_chi(double abs_chi) { return std::min(abs_chi, kChiClip); }

} // namespace

BiorthogonalGroundState ground_state(const MatrixXcd& h, double filling) {
    const int n_occ = occupation_count(h.rows(), filling);
    const BiorthogonalBasis b = biorthogonal_eigensystem(h);

    // b.values are cluster-sorted, so the lowest-Re tie-broken occupation is
    // the leading block
    BiorthogonalGroundState gs;
    gs.fermi_gap = std::abs(b.values(n_occ) - b.values(n_occ - 1));
    if (gs.fermi_gap < kFermiGapTol) {
        std::ostringstream os;
        os << "ground_state: degeneracy straddles the Fermi level (gap " << gs.fermi_gap
           << "); parameter point sits on a phase boundary";
        throw DegenerateFillingError(os.str());
    }
    gs.occupied.resize(n_occ);
    for (int i = 0; i < n_occ; ++i) gs.occupied[i] = i;
    gs.right_occ = b.right.leftCols(n_occ);
    gs.left_occ = b.left.leftCols(n_occ);
    gs.energy_sum = b.values.head(n_occ).sum();
    return gs;
}

BiorthogonalGroundState ground_state_pbc(const ModelParams& params, int cells, double filling) {
    params.validate();
    LatticeSpec{cells, Boundary::PBC}.validate(params);
    const int sites = 4 * cells;
    const int n_occ = occupation_count(sites, filling);

    std::vector<BiorthogonalBasis> blocks(cells);
    VectorXcd union_vals(sites);
    for (int m = 0; m < cells; ++m) {
        const double k = 2.0 * M_PI * m / cells;
        blocks[m] = biorthogonal_eigensystem(build_bloch(params, k));
        union_vals.segment(4 * m, 4) = blocks[m].values;
    }

    const FillingSelection sel = select_filling(union_vals, n_occ);

    BiorthogonalGroundState gs;
    gs.occupied = sel.occupied;
    gs.fermi_gap = sel.fermi_gap;
    gs.energy_sum = sel.energy_sum;
    gs.right_occ.resize(sites, n_occ);
    gs.left_occ.resize(sites, n_occ);
    const double norm = 1.0 / std::sqrt(static_cast<double>(cells));
    for (int col = 0; col < n_occ; ++col) {
        const int id = sel.occupied[col];
        const int m = id / 4;
        const int j = id % 4;
        const double k = 2.0 * M_PI * m / cells;
        for (int c = 0; c < cells; ++c) {
            const cplx phase = std::polar(norm, k * c);
            for (int a = 0; a < 4; ++a) {
                gs.right_occ(4 * c + a, col) = phase * blocks[m].right(a, j);
                gs.left_occ(4 * c + a, col) = phase * blocks[m].left(a, j);
            }
        }
    }
    return gs;
}

CorrelationMatrix correlation_matrix(const BiorthogonalGroundState& gs, int first, int count) {
    const int sites = static_cast<int>(gs.right_occ.rows());
    if (first < 0 || count < 1 || first + count > sites)
        throw DimensionError("correlation_matrix: subsystem outside the lattice");
    CorrelationMatrix c;
    c.first = first;
    c.entries = gs.left_occ.middleRows(first, count).conjugate() *
                gs.right_occ.middleRows(first, count).transpose();
    return c;
}

cplx entanglement_entropy_complex(const CorrelationMatrix& c) {
    if (c.entries.rows() != c.entries.cols() || c.entries.rows() == 0)
        throw DimensionError("entanglement_entropy: square correlation block required");
    const VectorXcd eta = eig_values(c.entries);
    cplx s{0.0, 0.0};
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const cplx e = eta(i);
        if (std::abs(e) < kEtaSkipTol || std::abs(e - 1.0) < kEtaSkipTol) continue;
        s -= e * std::log(e) + (1.0 - e) * std::log(1.0 - e);
    }
    return s;
}

double entanglement_entropy(const CorrelationMatrix& c, double imag_tol) {
    const cplx s = entanglement_entropy_complex(c);
    if (std::abs(s.imag()) > imag_tol) {
        std::ostringstream os;
        os << "entanglement_entropy: imaginary residue " << s.imag() << " exceeds " << imag_tol
           << " (broken left/right pairing upstream)";
        throw ImaginaryResidueError(os.str());
    }
    return s.real();
}

EntropyCurve entropy_vs_cut(const ModelParams& params, int sites, const std::vector<int>& cuts) {
    if (sites < 8 || sites % 4 != 0)
        throw DimensionError("entropy_vs_cut: sites must be a positive multiple of 4");
    if (cuts.empty()) throw ConfigError("entropy_vs_cut: no cuts given");
    for (int la : cuts)
        if (la < 1 || la > sites - 1)
            throw ConfigError("entropy_vs_cut: cuts must lie in [1, sites-1]");

    const BiorthogonalGroundState gs = ground_state_pbc(params, sites / 4);
    const MatrixXcd full = gs.left_occ.conjugate() * gs.right_occ.transpose();

    EntropyCurve curve;
    curve.mode = EntropyMode::vary_cut;
    for (int la : cuts) {
        CorrelationMatrix cm;
        cm.first = 0;
        cm.entries = full.topLeftCorner(la, la);
        curve.abscissa.push_back(la);
        curve.entropy.push_back(entanglement_entropy(cm));
    }
    return curve;
}

EntropyCurve entropy_vs_size(const ModelParams& params, const std::vector<int>& sizes) {
    if (sizes.empty()) throw ConfigError("entropy_vs_size: no sizes given");
    EntropyCurve curve;
    curve.mode = EntropyMode::vary_size;
    for (int sites : sizes) {
        if (sites < 8 || sites % 4 != 0)
            throw DimensionError("entropy_vs_size: sizes must be positive multiples of 4");
        const BiorthogonalGroundState gs = ground_state_pbc(params, sites / 4);
        const int half = sites / 2;
        CorrelationMatrix cm;
        cm.first = 0;
        cm.entries = gs.left_occ.topRows(half).conjugate() * gs.right_occ.topRows(half).transpose();
        curve.abscissa.push_back(sites);
        curve.entropy.push_back(entanglement_entropy(cm));
    }
    return curve;
}

namespace {

FitResult least_squares_fit(const std::vector<double>& xs, const std::vector<double>& ys) {
    const int n = static_cast<int>(xs.size());
    double xbar = 0.0, ybar = 0.0;
    for (int i = 0; i < n; ++i) {
        xbar += xs[i];
        ybar += ys[i];
    }
    xbar /= n;
    ybar /= n;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < n; ++i) {
        sxx += (xs[i] - xbar) * (xs[i] - xbar);
        sxy += (xs[i] - xbar) * (ys[i] - ybar);
    }
    if (sxx <= 0.0) throw ConfigError("fit: abscissa has no spread");
    const double slope = sxy / sxx;
    const double intercept = ybar - slope * xbar;
    double ss_res = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = ys[i] - (slope * xs[i] + intercept);
        ss_res += r * r;
    }
    FitResult fit;
    fit.c = 3.0 * slope;
    fit.intercept = intercept;
    fit.rms_residual = std::sqrt(ss_res / n);
    fit.c_stderr = n > 2 ? 3.0 * std::sqrt(ss_res / (n - 2) / sxx) : 0.0;
    fit.poor_fit = fit.rms_residual > 0.05;
    return fit;
}

} // namespace

FitResult fit_cardy_calabrese(const EntropyCurve& curve, int sites) {
    if (curve.mode != EntropyMode::vary_cut)
        throw ConfigError("fit_cardy_calabrese: needs a vary_cut curve");
    if (sites < 16) throw ConfigError("fit_cardy_calabrese: sites too small");
    const double lo = sites / 16.0 - 1e-9;
    const double hi = 15.0 * sites / 16.0 + 1e-9;
    std::vector<double> xs, ys, las;
    for (std::size_t i = 0; i < curve.abscissa.size(); ++i) {
        const double la = curve.abscissa[i];
        if (la < lo || la > hi) continue;
        xs.push_back(std::log(sites / M_PI * std::sin(M_PI * la / sites)));
        ys.push_back(curve.entropy[i]);
        las.push_back(la);
    }
    if (xs.size() < 8)
        throw ConfigError("fit_cardy_calabrese: fewer than 8 cuts in the fit window");
    FitResult fit = least_squares_fit(xs, ys);
    fit.window = {*std::min_element(las.begin(), las.end()),
                  *std::max_element(las.begin(), las.end())};
    return fit;
}

FitResult fit_log_scaling(const EntropyCurve& curve) {
    if (curve.mode != EntropyMode::vary_size)
        throw ConfigError("fit_log_scaling: needs a vary_size curve");
    if (curve.abscissa.size() < 4)
        throw ConfigError("fit_log_scaling: needs at least 4 sizes");
    const auto [mn, mx] = std::minmax_element(curve.abscissa.begin(), curve.abscissa.end());
    if (*mx < 4.0 * *mn - 1e-9)
        throw ConfigError("fit_log_scaling: sizes must span at least a factor of 4");
    std::vector<double> xs;
    xs.reserve(curve.abscissa.size());
    for (double l : curve.abscissa) xs.push_back(std::log(l));
    FitResult fit = least_squares_fit(xs, curve.entropy);
    fit.window = {*mn, *mx};
    return fit;
}

FidelityResult fidelity_from_states(const BiorthogonalGroundState& a,
                                    const BiorthogonalGroundState& b, double eps) {
    if (a.right_occ.rows() != b.right_occ.rows() || a.right_occ.cols() != b.right_occ.cols())
        throw DimensionError("fidelity: ground states have mismatched shapes");
    const MatrixXcd m1 = a.left_occ.adjoint() * b.right_occ;
    const MatrixXcd m2 = b.left_occ.adjoint() * a.right_occ;
    FidelityResult r;
    r.f = std::exp(log_det(m1) + log_det(m2));
    r.chi = eps != 0.0 ? (1.0 - r.f) / (eps * eps) : cplx{0.0, 0.0};
    return r;
}

FidelityResult fidelity(const ModelParams& params, int sites, double eps) {
    if (sites < 8 || sites % 4 != 0)
        throw DimensionError("fidelity: sites must be a positive multiple of 4");
    if (eps < 0.0) throw ConfigError("fidelity: eps must be >= 0");
    if (eps == 0.0) return FidelityResult{cplx{1.0, 0.0}, cplx{0.0, 0.0}};

    const BiorthogonalGroundState a = ground_state_pbc(params, sites / 4);
    ModelParams shifted = params;
    shifted.lambda += eps;
    const BiorthogonalGroundState b = ground_state_pbc(shifted, sites / 4);
    return fidelity_from_states(a, b, eps);
}

std::vector<FidelityScanPoint> fidelity_scan_lambda(const ModelParams& base, double lambda0,
                                                    double step, int n_points, int sites,
                                                    int eps_steps) {
    if (step <= 0.0) throw ConfigError("fidelity_scan_lambda: step must be > 0");
    if (n_points < 1) throw ConfigError("fidelity_scan_lambda: n_points must be >= 1");
    if (eps_steps < 1) throw ConfigError("fidelity_scan_lambda: eps_steps must be >= 1");
    if (sites < 8 || sites % 4 != 0)
        throw DimensionError("fidelity_scan_lambda: sites must be a positive multiple of 4");
    const double eps = eps_steps * step;

    // ring buffer of the last eps_steps+1 grid ground states
    const int span = eps_steps + 1;
    std::vector<std::unique_ptr<BiorthogonalGroundState>> ring(span);
    auto solve_at = [&](int idx) -> std::unique_ptr<BiorthogonalGroundState> {
        ModelParams p = base;
        p.lambda = lambda0 + idx * step;
        try {
            return std::make_unique<BiorthogonalGroundState>(ground_state_pbc(p, sites / 4));
        } catch (const Error&) {
            return nullptr; // boundary point
        }
    };
    for (int j = 0; j < span; ++j) ring[j] = solve_at(j);

    std::vector<FidelityScanPoint> out;
    out.reserve(n_points);
    for (int i = 0; i < n_points; ++i) {
        FidelityScanPoint pt;
        pt.lambda = lambda0 + i * step;
        pt.t2 = base.t2;
        const auto& lo = ring[i % span];
        const auto& hi = ring[(i + eps_steps) % span];
        if (!lo || !hi) {
            pt.boundary = true;
            pt.abs_chi = kChiClip;
        } else {
            const FidelityResult fr = fidelity_from_states(*lo, *hi, eps);
            const double a = std::abs(fr.chi);
            pt.abs_chi = std::isfinite(a) ? clip_chi(a) : kChiClip;
        }
        pt.log1p_abs_chi = std::log1p(pt.abs_chi);
        out.push_back(pt);
        if (i + 1 < n_points) ring[i % span] = solve_at(i + 1 + eps_steps);
    }
    return out;
}

FidelityGrid fidelity_scan(const ModelParams& base, double lambda_min, double lambda_max,
                           double t2_min, double t2_max, int res_lambda, int res_t2, int sites,
                           double eps) {
    if (res_lambda < 2 || res_t2 < 2) throw ConfigError("fidelity_scan: resolution must be >= 2");
    if (!(lambda_min < lambda_max) || !(t2_min < t2_max))
        throw ConfigError("fidelity_scan: empty parameter range");
    if (eps <= 0.0) throw ConfigError("fidelity_scan: eps must be > 0");
    if (sites < 8 || sites % 4 != 0)
        throw DimensionError("fidelity_scan: sites must be a positive multiple of 4");
    base.validate();

    FidelityGrid g;
    g.params_base = base;
    g.sites = sites;
    g.eps = eps;
    g.clip = kChiClip;
    g.lambda_axis.resize(res_lambda);
    g.t2_axis.resize(res_t2);
    for (int i = 0; i < res_lambda; ++i)
        g.lambda_axis[i] = lambda_min + (lambda_max - lambda_min) * i / (res_lambda - 1);
    for (int j = 0; j < res_t2; ++j)
        g.t2_axis[j] = t2_min + (t2_max - t2_min) * j / (res_t2 - 1);
    g.cells.assign(res_lambda, std::vector<FidelityScanPoint>(res_t2));

    const std::size_t total = static_cast<std::size_t>(res_lambda) * res_t2;
    parallel_for(total, [&](std::size_t idx) {
        const int i = static_cast<int>(idx) / res_t2;
        const int j = static_cast<int>(idx) % res_t2;
        FidelityScanPoint& pt = g.cells[i][j];
        pt.lambda = g.lambda_axis[i];
        pt.t2 = g.t2_axis[j];
        ModelParams p = base;
        p.lambda = pt.lambda;
        p.t2 = pt.t2;
        try {
            const FidelityResult fr = fidelity(p, sites, eps);
            const double a = std::abs(fr.chi);
            pt.abs_chi = std::isfinite(a) ? clip_chi(a) : kChiClip;
        } catch (const Error&) {
            pt.boundary = true;
            pt.abs_chi = kChiClip;
        }
        pt.log1p_abs_chi = std::log1p(pt.abs_chi);
    });
    return g;
}

} // namespace knotlat
