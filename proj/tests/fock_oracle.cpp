#include "fock_oracle.hpp"

#include <bit>
#include <cmath>
#include <complex>
#include <stdexcept>

#include "knotlat/linalg.hpp"
#include "knotlat/spectral.hpp"

namespace fock {

namespace {

int parity_below(uint32_t mask, int mode) {
    return std::popcount(mask & ((1u << mode) - 1u)) & 1;
}

// c_i^dag c_j |mask>; returns false if annihilated.
bool hop(uint32_t mask, int i, int j, uint32_t* out, int* sign) {
    if (!((mask >> j) & 1u)) return false;
    int s = parity_below(mask, j);
    const uint32_t m1 = mask ^ (1u << j);
    if ((m1 >> i) & 1u) return false;
    s ^= parity_below(m1, i);
    *out = m1 | (1u << i);
    *sign = s ? -1 : 1;
    return true;
}

} // namespace

Sector build_sector(int sites, int n) {
    if (sites <= 0 || sites > 24 || n < 0 || n > sites)
        throw std::invalid_argument("fock sector out of range");
    Sector s;
    s.sites = sites;
    s.n = n;
    for (uint32_t m = 0; m < (1u << sites); ++m)
        if (std::popcount(m) == n) s.states.push_back(m);
    for (int r = 0; r < static_cast<int>(s.states.size()); ++r) s.index[s.states[r]] = r;
    return s;
}

Eigen::MatrixXcd many_body_matrix(const Eigen::MatrixXcd& h1, const Sector& s) {
    const int dim = static_cast<int>(s.states.size());
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim, dim);
    for (int col = 0; col < dim; ++col) {
        const uint32_t m = s.states[col];
        for (int i = 0; i < s.sites; ++i)
            for (int j = 0; j < s.sites; ++j) {
                if (h1(i, j) == knotlat::cplx(0.0, 0.0)) continue;
                uint32_t m2 = 0;
                int sign = 0;
                if (!hop(m, i, j, &m2, &sign)) continue;
                h(s.index.at(m2), col) += h1(i, j) * static_cast<double>(sign);
            }
    }
    return h;
}

GroundPair ground_pair(const Eigen::MatrixXcd& h1, int n) {
    const int sites = static_cast<int>(h1.rows());
    const Sector s = build_sector(sites, n);
    const Eigen::MatrixXcd hmb = many_body_matrix(h1, s);

    const knotlat::EigResult right = knotlat::eig_dense(hmb);
    const std::vector<int> order = knotlat::cluster_sorted_indices(right.values);
    const int gi = order.front();

    GroundPair g;
    g.energy = right.values(gi);
    g.right = right.vectors.col(gi);

    const knotlat::EigResult adj = knotlat::eig_dense(hmb.adjoint());
    int best = 0;
    double bd = std::abs(adj.values(0) - std::conj(g.energy));
    for (int i = 1; i < adj.values.size(); ++i) {
        const double d = std::abs(adj.values(i) - std::conj(g.energy));
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    g.left = adj.vectors.col(best);
    const knotlat::cplx ov = g.left.dot(g.right);
    if (std::abs(ov) < 1e-12) throw std::runtime_error("fock: defective ground pair");
    g.left /= std::conj(ov);
    return g;
}

Eigen::MatrixXcd correlation(const GroundPair& g, const Sector& s) {
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(s.sites, s.sites);
    for (int i = 0; i < s.sites; ++i)
        for (int j = 0; j < s.sites; ++j) {
            knotlat::cplx acc(0.0, 0.0);
            for (int col = 0; col < static_cast<int>(s.states.size()); ++col) {
                uint32_t m2 = 0;
                int sign = 0;
                if (!hop(s.states[col], i, j, &m2, &sign)) continue;
                acc += g.right(col) * static_cast<double>(sign) *
                       std::conj(g.left(s.index.at(m2)));
            }
            c(i, j) = acc;
        }
    return c;
}

knotlat::cplx rho_a_entropy(const GroundPair& g, const Sector& s, int la) {
    // Modes [0, la) sit leftmost in the ordered c^dag string of every basis
    // state, so the amplitude tensor factorizes without extra signs.
    const int da = 1 << la;
    const int lb = s.sites - la;
    const int db = 1 << lb;
    Eigen::MatrixXcd mr = Eigen::MatrixXcd::Zero(da, db);
    Eigen::MatrixXcd ml = Eigen::MatrixXcd::Zero(da, db);
    for (int col = 0; col < static_cast<int>(s.states.size()); ++col) {
        const uint32_t m = s.states[col];
        const int a = static_cast<int>(m & ((1u << la) - 1u));
        const int b = static_cast<int>(m >> la);
        mr(a, b) = g.right(col);
        ml(a, b) = g.left(col);
    }
    const Eigen::MatrixXcd rho = mr * ml.adjoint();
    const Eigen::VectorXcd w = knotlat::eig_values(rho);
    knotlat::cplx entropy(0.0, 0.0);
    for (int i = 0; i < w.size(); ++i) {
        if (std::abs(w(i)) < 1e-12) continue;
        entropy -= w(i) * std::log(w(i));
    }
    return entropy;
}

knotlat::cplx fidelity_overlap(const Eigen::MatrixXcd& h1a, const Eigen::MatrixXcd& h1b) {
    const int n = static_cast<int>(h1a.rows()) / 2;
    const GroundPair ga = ground_pair(h1a, n);
    const GroundPair gb = ground_pair(h1b, n);
    return ga.left.dot(gb.right) * gb.left.dot(ga.right);
}

} // namespace fock
