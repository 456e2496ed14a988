#include "knotlat/model.hpp"

#include <cmath>

namespace knotlat {

MatrixXcd build_real_hamiltonian(const ModelParams& p, const LatticeSpec& spec) {
    p.validate();
    spec.validate(p);
    const int nc = spec.cells;
    const int n = spec.sites();
    const cplx jr = p.j_right();
    const cplx jl = p.j_left();

    MatrixXcd h = MatrixXcd::Zero(n, n);
    auto site = [nc](int cell, int orb) { return 4 * (((cell % nc) + nc) % nc) + orb; };

    for (int c = 0; c < nc; ++c) {
        const int a = site(c, 0), b = site(c, 1), cc = site(c, 2), d = site(c, 3);
        // reciprocal inter-sublattice hops + h.c.
        h(a, b) += p.t1;
        h(b, a) += p.t1;
        h(b, cc) += p.t2;
        h(cc, b) += p.t2;
        h(cc, d) += p.t3;
        h(d, cc) += p.t3;
        h(d, site(c + 1, 0)) += p.t4;
        h(site(c + 1, 0), d) += p.t4;
        // same-sublattice range-q hops, sign s_alpha
        for (int orb = 0; orb < 4; ++orb) {
            const double s = kSublatticeSign[orb];
            const int x = site(c, orb);
            const int xq = site(c + p.q, orb);
            h(x, xq) += s * jl;  // c^dag_n c_{n+q}
            h(xq, x) += s * jr;  // c^dag_{n+q} c_n
        }
    }
    return h;
}

cplx bloch_potential(const ModelParams& p, double k) {
    return cplx(2.0 * p.mu * std::sin(p.q * k), 2.0 * p.lambda * std::cos(p.q * k));
}

MatrixXcd build_bloch(const ModelParams& p, double k) {
    const MatrixXcd sx = pauli_x(), sy = pauli_y(), sz = pauli_z(), i2 = id2();
    const double ck = std::cos(k), sk = std::sin(k);
    MatrixXcd h = 0.5 * (p.t1 + p.t3) * kron(i2, sx);
    h += 0.5 * (p.t1 - p.t3) * kron(sz, sx);
    h += 0.5 * (p.t2 + p.t4 * ck) * kron(sx, sx);
    h += 0.5 * (p.t2 - p.t4 * ck) * kron(sy, sy);
    h += bloch_potential(p, k) * kron(i2, sz);
    h += 0.5 * p.t4 * sk * (kron(sy, sx) + kron(sx, sy));
    return h;
}

SymmetryReport symmetry_residuals(const ModelParams& p, int k_samples) {
    if (k_samples < 2) throw ConfigError("symmetry_residuals: k_samples must be >= 2");
    const MatrixXcd c_op = kron(id2(), pauli_z());
    const MatrixXcd t_op = kron(pauli_x(), pauli_x());
    const MatrixXcd u_op = cplx(0, 1) * kron(pauli_x(), pauli_y());

    SymmetryReport rep;
    rep.t1_equals_t3 = (p.t1 == p.t3);
    for (int j = 0; j < k_samples; ++j) {
        const double k = 2.0 * M_PI * j / k_samples;
        const MatrixXcd hk = build_bloch(p, k);
        const MatrixXcd hmk = build_bloch(p, -k);
        rep.phs = std::max(rep.phs, max_abs(c_op * hk.conjugate() * c_op + hmk));
        rep.t_sym = std::max(rep.t_sym, max_abs(t_op * hk.adjoint() * t_op - hmk));
        rep.gamma = std::max(rep.gamma, max_abs(u_op * hk.transpose() * u_op.adjoint() + hk));
    }
    return rep;
}

} // namespace knotlat
