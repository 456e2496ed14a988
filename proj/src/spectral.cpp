#include "knotlat/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "knotlat/errors.hpp"

namespace knotlat {

namespace {

std::array<cplx, 4> eig4(const ModelParams& p, double k) {
    VectorXcd v = eig_values(build_bloch(p, k));
    return {v(0), v(1), v(2), v(3)};
}

struct Assignment {
    double best = 0.0;
    double second = 0.0;
    std::array<int, 4> perm{};
};

// Exact minimal-distance matching between two unordered 4-sets, brute-forced
// over all 24 permutations.
Assignment best_assign(const std::array<cplx, 4>& from, const std::array<cplx, 4>& to) {
    std::array<int, 4> idx = {0, 1, 2, 3};
    Assignment a;
    a.best = std::numeric_limits<double>::infinity();
    a.second = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0;
        for (int i = 0; i < 4; ++i) cost += std::abs(from[i] - to[idx[i]]);
        if (cost < a.best) {
            a.second = a.best;
            a.best = cost;
            a.perm = idx;
        } else if (cost < a.second) {
            a.second = cost;
        }
    } while (std::next_permutation(idx.begin(), idx.end()));
    return a;
}

std::array<cplx, 4> apply_perm(const std::array<int, 4>& perm, const std::array<cplx, 4>& v) {
    return {v[perm[0]], v[perm[1]], v[perm[2]], v[perm[3]]};
}

constexpr double kAmbiguityCost = 1e-12;
constexpr int kMaxBisection = 12;

std::array<cplx, 4> step_match(const ModelParams& p, const std::array<cplx, 4>& prev, double k0,
                               double k1, int depth) {
    const auto next = eig4(p, k1);
    const Assignment a = best_assign(prev, next);
    if (a.second - a.best >= kAmbiguityCost) return apply_perm(a.perm, next);
    if (depth >= kMaxBisection) {
        std::ostringstream os;
        os << "track_bands: persistent matching ambiguity near k=" << k1
           << " (band touching or exceptional point)";
        throw DegenerateSpectrumError(os.str());
    }
    const double km = 0.5 * (k0 + k1);
    const auto mid = step_match(p, prev, k0, km, depth + 1);
    return step_match(p, mid, km, k1, depth + 1);
}

} // namespace

double coeff_u(const ModelParams& p) {
    return p.t1 * p.t1 + p.t2 * p.t2 + p.t3 * p.t3 + p.t4 * p.t4;
}

double coeff_v(const ModelParams& p, double k) {
    return p.t1 * p.t1 * p.t3 * p.t3 + p.t2 * p.t2 * p.t4 * p.t4 -
           2.0 * p.t1 * p.t2 * p.t3 * p.t4 * std::cos(k);
}

std::array<cplx, 4> analytic_eigenvalues(const ModelParams& p, double k) {
    const double u = coeff_u(p);
    const double v = coeff_v(p, k);
    const cplx vk = bloch_potential(p, k);
    const cplx inner = std::sqrt(cplx(0.25 * u * u - v, 0.0));
    const cplx e2p = 0.5 * u + inner + vk * vk;
    const cplx e2m = 0.5 * u - inner + vk * vk;
    const cplx rp = std::sqrt(e2p);
    const cplx rm = std::sqrt(e2m);
    return {rp, -rp, rm, -rm};
}

EnergyStrings track_bands(const ModelParams& p, int n_k) {
    if (n_k < 64) throw ConfigError("track_bands: n_k must be >= 64");
    p.validate();

    EnergyStrings s;
    s.params = p;
    s.k_grid.resize(n_k + 1);
    for (int m = 0; m <= n_k; ++m) s.k_grid[m] = 2.0 * M_PI * m / n_k;

    auto first = eig4(p, 0.0);
    std::sort(first.begin(), first.end(), [](const cplx& a, const cplx& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    for (int i = 0; i < 4; ++i) {
        s.bands[i].reserve(n_k + 1);
        s.bands[i].push_back(first[i]);
    }

    std::array<cplx, 4> prev = first;
    for (int m = 1; m <= n_k; ++m) {
        prev = step_match(p, prev, s.k_grid[m - 1], s.k_grid[m], 0);
        for (int i = 0; i < 4; ++i) s.bands[i].push_back(prev[i]);
    }

    std::array<cplx, 4> ends;
    for (int i = 0; i < 4; ++i) ends[i] = s.bands[i].back();
    const Assignment a = best_assign(ends, first);
    s.endpoint_permutation = a.perm;
    return s;
}

std::array<cplx, 4> continue_bands(const ModelParams& p, const std::array<cplx, 4>& at_k0,
                                   double k0, double k1) {
    return step_match(p, at_k0, k0, k1, 0);
}

std::vector<int> cluster_sorted_indices(const VectorXcd& values) {
    const int n = static_cast<int>(values.size());
    double scale = 1.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(values(i)));
    const double tol = 1e-8 * scale;

    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (values(a).real() != values(b).real()) return values(a).real() < values(b).real();
        if (values(a).imag() != values(b).imag()) return values(a).imag() < values(b).imag();
        return a < b;
    });

    // merge real parts that agree to tol into clusters, then order each
    // cluster by (Im, index)
    std::vector<int> cluster(n);
    int cid = 0;
    for (int j = 0; j < n; ++j) {
        if (j > 0 && values(idx[j]).real() - values(idx[j - 1]).real() > tol) ++cid;
        cluster[j] = cid;
    }
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (cluster[a] != cluster[b]) return cluster[a] < cluster[b];
        const cplx va = values(idx[a]), vb = values(idx[b]);
        if (va.imag() != vb.imag()) return va.imag() < vb.imag();
        return idx[a] < idx[b];
    });
    std::vector<int> out(n);
    for (int j = 0; j < n; ++j) out[j] = idx[order[j]];
    return out;
}

BiorthogonalBasis biorthogonal_eigensystem(const MatrixXcd& h) {
    if (h.rows() != h.cols() || h.rows() == 0)
        throw DimensionError("biorthogonal_eigensystem: square matrix required");
    const int n = static_cast<int>(h.rows());

    EigResult right = eig_dense(h, true);
    EigResult left = eig_dense(h.adjoint(), true);
    const VectorXcd left_conj = left.values.conjugate();

    const std::vector<int> ir = cluster_sorted_indices(right.values);
    const std::vector<int> il = cluster_sorted_indices(left_conj);

    BiorthogonalBasis b;
    b.values.resize(n);
    b.right.resize(n, n);
    MatrixXcd left_raw(n, n);
    for (int j = 0; j < n; ++j) {
        b.values(j) = right.values(ir[j]);
        b.right.col(j) = right.vectors.col(ir[j]);
        left_raw.col(j) = left.vectors.col(il[j]);
        const double d = std::abs(b.values(j) - left_conj(il[j]));
        if (d > 1e-6) {
            std::ostringstream os;
            os << "biorthogonal_eigensystem: left/right eigenvalue pairing distance " << d
               << " at index " << j << " (near an exceptional point)";
            throw NearEPError(os.str());
        }
    }

    const MatrixXcd g = left_raw.adjoint() * b.right;
    Eigen::PartialPivLU<MatrixXcd> lu(g);
    const double rc = lu.rcond();
    if (!(rc > 1e-8)) {
        std::ostringstream os;
        os << "biorthogonal_eigensystem: overlap condition number " << (rc > 0 ? 1.0 / rc : 0.0)
           << " exceeds 1e8 (near an exceptional point)";
        throw NearEPError(os.str());
    }
    b.left = lu.solve(left_raw.adjoint()).adjoint();
    return b;
}

} // namespace knotlat
