#pragma once

#include <cmath>
#include <complex>
#include <string>

#include "knotlat/errors.hpp"

namespace knotlat {

using cplx = std::complex<double>;

// Couplings of the four-band chain. The same-sublattice hop amplitudes
// J_R = i(lambda+mu), J_L = i(lambda-mu) are always derived on the fly so
// they cannot drift out of sync with (lambda, mu).
struct ModelParams {
    double t1 = 1.0;
    double t2 = 2.0;
    double t3 = 1.0;
    double t4 = 1.0;
    double lambda = 0.1;
    double mu = 0.5;
    int q = 1;

    cplx j_right() const { return cplx(0.0, lambda + mu); }
    cplx j_left() const { return cplx(0.0, lambda - mu); }

    void validate() const {
        if (q < 1) throw ConfigError("ModelParams: q must be >= 1, got " + std::to_string(q));
        for (double v : {t1, t2, t3, t4, lambda, mu})
            if (!std::isfinite(v)) throw ConfigError("ModelParams: non-finite coupling");
    }
};

// Sublattice sign s_alpha for (A, B, C, D).
inline constexpr int kSublatticeSign[4] = {+1, -1, +1, -1};

enum class Boundary { PBC };

struct LatticeSpec {
    int cells = 0;
    Boundary boundary = Boundary::PBC;

    int sites() const { return 4 * cells; }

    void validate(const ModelParams& p) const {
        if (cells <= p.q)
            throw DimensionError("LatticeSpec: need cells > q (got cells=" + std::to_string(cells) +
                                 ", q=" + std::to_string(p.q) + ")");
    }
};

} // namespace knotlat
