#pragma once

// Shared test utilities: the five representative parameter points, random
// parameter draws, and tolerance-aware multiset matching for spectra.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "knotlat/params.hpp"

namespace testutil {

inline constexpr double kRepLambdas[5] = {0.1, 0.25, 0.7, 1.2, 1.4};

inline knotlat::ModelParams rep_point(int i) {
    knotlat::ModelParams p; // defaults t = (1,2,1,1), mu = 0.5, q = 1
    p.lambda = kRepLambdas[i];
    return p;
}

inline knotlat::ModelParams random_params(std::mt19937& rng, bool force_t1_eq_t3 = false) {
    std::uniform_real_distribution<double> t(-2.0, 2.0);
    std::uniform_real_distribution<double> lam(0.0, 1.5);
    std::uniform_real_distribution<double> mu(0.0, 1.0);
    std::uniform_int_distribution<int> q(1, 3);
    knotlat::ModelParams p;
    p.t1 = t(rng);
    p.t2 = t(rng);
    p.t3 = force_t1_eq_t3 ? p.t1 : t(rng);
    p.t4 = t(rng);
    p.lambda = lam(rng);
    p.mu = mu(rng);
    p.q = q(rng);
    return p;
}

// Greedy nearest-neighbor matching; returns the largest matched distance, or
// +inf when sizes differ. Robust against solver jitter reordering ties.
inline double multiset_distance(std::vector<knotlat::cplx> a, std::vector<knotlat::cplx> b) {
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    std::vector<bool> used(b.size(), false);
    for (const knotlat::cplx& x : a) {
        int best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (used[j]) continue;
            const double d = std::abs(x - b[j]);
            if (d < bd) {
                bd = d;
                best = static_cast<int>(j);
            }
        }
        used[best] = true;
        worst = std::max(worst, bd);
    }
    return worst;
}

} // namespace testutil
