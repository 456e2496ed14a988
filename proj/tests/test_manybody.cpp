#include "doctest.h"

#include <cstdlib>

#include "fock_oracle.hpp"
#include "helpers.hpp"
#include "knotlat/manybody.hpp"
#include "knotlat/model.hpp"

using namespace knotlat;

namespace {

MatrixXcd single_particle(const ModelParams& p, int cells) {
    return build_real_hamiltonian(p, LatticeSpec{cells});
}

} // namespace

TEST_CASE("8-site ground state matches the Fock-space construction") {
    for (int i = 0; i < 5; ++i) {
        CAPTURE(i);
        const ModelParams p = testutil::rep_point(i);
        const MatrixXcd h1 = single_particle(p, 2);
        const BiorthogonalGroundState gs = ground_state(h1);

        const fock::GroundPair exact = fock::ground_pair(h1, 4);
        CHECK(std::abs(gs.energy_sum - exact.energy) < 1e-9);
        CHECK(gs.fermi_gap > 1e-3);

        const fock::Sector sector = fock::build_sector(8, 4);
        const MatrixXcd c_exact = fock::correlation(exact, sector);
        const CorrelationMatrix c_lib = correlation_matrix(gs, 0, 8);
        CHECK(max_abs(MatrixXcd(c_lib.entries - c_exact)) < 1e-8);

        // Half-chain entropy from the exact correlation block. Compare real
        // parts only: Im(S) is branch-fragile whenever an occupation
        // eigenvalue sits near the negative real axis (and at this size it
        // can legitimately exceed the imaginary-residue guard), while Re(S)
        // is branch-stable.
        CorrelationMatrix half_exact{0, c_exact.topLeftCorner(4, 4)};
        const cplx s_exact = entanglement_entropy_complex(half_exact);
        const cplx s_lib = entanglement_entropy_complex(correlation_matrix(gs, 0, 4));
        CHECK(std::abs(s_lib.real() - s_exact.real()) < 1e-8);
    }
}

TEST_CASE("hermitian limit: correlation entropy equals the reduced-density-matrix entropy") {
    ModelParams p;
    p.lambda = 0.0; // V(k) real, H hermitian
    const MatrixXcd h1 = single_particle(p, 2);
    const BiorthogonalGroundState gs = ground_state(h1);
    const double s_lib = entanglement_entropy(correlation_matrix(gs, 0, 4));

    const fock::GroundPair exact = fock::ground_pair(h1, 4);
    const fock::Sector sector = fock::build_sector(8, 4);
    const cplx s_rho = fock::rho_a_entropy(exact, sector, 4);
    CHECK(std::abs(s_rho.imag()) < 1e-10);
    CHECK(std::abs(s_lib - s_rho.real()) < 1e-8);
}

TEST_CASE("dense and per-wave-vector ground states agree") {
    for (int i : {0, 1, 3}) {
        CAPTURE(i);
        const ModelParams p = testutil::rep_point(i);
        const int cells = 6;
        const BiorthogonalGroundState dense = ground_state(single_particle(p, cells));
        const BiorthogonalGroundState fast = ground_state_pbc(p, cells);

        CHECK(dense.occupied.size() == 12);
        CHECK(fast.occupied.size() == 12);
        CHECK(std::abs(dense.energy_sum - fast.energy_sum) < 1e-9);
        CHECK(dense.fermi_gap == doctest::Approx(fast.fermi_gap).epsilon(1e-7));

        const MatrixXcd cd = correlation_matrix(dense, 0, 24).entries;
        const MatrixXcd cf = correlation_matrix(fast, 0, 24).entries;
        CHECK(max_abs(MatrixXcd(cd - cf)) < 1e-8);

        const double sd = entanglement_entropy(correlation_matrix(dense, 0, 12));
        const double sf = entanglement_entropy(correlation_matrix(fast, 0, 12));
        CHECK(sd == doctest::Approx(sf).epsilon(1e-8));
    }
}

TEST_CASE("biorthogonal projector is idempotent") {
    const ModelParams p = testutil::rep_point(2);
    const BiorthogonalGroundState gs = ground_state_pbc(p, 6);
    const MatrixXcd proj = gs.right_occ * gs.left_occ.adjoint();
    CHECK(max_abs(MatrixXcd(proj * proj - proj)) < 1e-7);
    CHECK(max_abs(MatrixXcd(gs.left_occ.adjoint() * gs.right_occ -
                            MatrixXcd::Identity(12, 12))) < 1e-10);
}

TEST_CASE("an exactly degenerate filling boundary fails loudly") {
    // Two occupied and two empty levels with a level pinned on each side of
    // the Fermi line: the gap is exactly zero, so the split is ill-defined.
    MatrixXcd h = MatrixXcd::Zero(4, 4);
    h(0, 0) = cplx(-1.0, 0.0);
    h(1, 1) = cplx(0.0, 0.0);
    h(2, 2) = cplx(0.0, 0.0);
    h(3, 3) = cplx(1.0, 0.0);
    CHECK_THROWS_AS(ground_state(h), DegenerateFillingError);
}

TEST_CASE("entropy curve input validation") {
    ModelParams p;
    CHECK_THROWS_AS(entropy_vs_cut(p, 30, {4, 8}), DimensionError);   // not a multiple of 4
    CHECK_THROWS_AS(entropy_vs_cut(p, 32, {0}), ConfigError);         // cut out of range
    CHECK_THROWS_AS(entropy_vs_cut(p, 32, {32}), ConfigError);
    CHECK_THROWS_AS(entropy_vs_size(p, {20, 40, 30}), DimensionError); // 30 % 4 != 0
}

TEST_CASE("hermitian cut entropy is reflection symmetric") {
    ModelParams p;
    p.lambda = 0.0;
    const EntropyCurve c = entropy_vs_cut(p, 64, {8, 16, 24, 32, 40, 48, 56});
    CHECK(c.mode == EntropyMode::vary_cut);
    REQUIRE(c.entropy.size() == 7);
    CHECK(c.entropy[0] == doctest::Approx(c.entropy[6]).epsilon(1e-9));
    CHECK(c.entropy[1] == doctest::Approx(c.entropy[5]).epsilon(1e-9));
    CHECK(c.entropy[2] == doctest::Approx(c.entropy[4]).epsilon(1e-9));
}

TEST_CASE("entropy formula on hand-built correlation blocks") {
    CorrelationMatrix half{0, MatrixXcd::Identity(2, 2) * 0.5};
    CHECK(entanglement_entropy(half) == doctest::Approx(2 * std::log(2.0)).epsilon(1e-12));

    MatrixXcd pure(2, 2);
    pure << 1, 0, 0, 0;
    CHECK(entanglement_entropy({0, pure}) == doctest::Approx(0.0).epsilon(1e-12));

    MatrixXcd cx(1, 1);
    cx << cplx(0.3, 0.4);
    const cplx s = entanglement_entropy_complex({0, cx});
    CHECK(std::abs(s.imag()) > 1e-3);
    CHECK_THROWS_AS(entanglement_entropy({0, cx}, 1e-9), ImaginaryResidueError);
    CHECK(entanglement_entropy({0, cx}, 10.0) == doctest::Approx(s.real()).epsilon(1e-12));
}

TEST_CASE("cardy fit recovers a synthetic central charge") {
    const int sites = 160;
    const double c_true = 1.7, b_true = 0.3;
    EntropyCurve curve;
    curve.mode = EntropyMode::vary_cut;
    for (int la = 4; la <= 156; la += 4) {
        curve.abscissa.push_back(la);
        const double x = std::log(sites / M_PI * std::sin(M_PI * la / sites));
        curve.entropy.push_back(c_true / 3.0 * x + b_true);
    }
    const FitResult fit = fit_cardy_calabrese(curve, sites);
    CHECK(fit.c == doctest::Approx(c_true).epsilon(1e-9));
    CHECK(fit.intercept == doctest::Approx(b_true).epsilon(1e-9));
    CHECK(fit.rms_residual < 1e-12);
    CHECK(fit.c_stderr < 1e-9);
    CHECK_FALSE(fit.poor_fit);
    CHECK(fit.window.first >= sites / 16.0 - 1e-9);
    CHECK(fit.window.second <= 15.0 * sites / 16.0 + 1e-9);
}

TEST_CASE("cardy fit ignores points outside the window") {
    const int sites = 160;
    EntropyCurve curve;
    curve.mode = EntropyMode::vary_cut;
    for (int la = 10; la <= 150; la += 10) {
        curve.abscissa.push_back(la);
        const double x = std::log(sites / M_PI * std::sin(M_PI * la / sites));
        curve.entropy.push_back(0.5 * x + 0.1);
    }
    // poisoned points outside [L/16, 15L/16] = [10, 150] must not change c
    EntropyCurve poisoned = curve;
    poisoned.abscissa.insert(poisoned.abscissa.begin(), 4);
    poisoned.entropy.insert(poisoned.entropy.begin(), 99.0);
    poisoned.abscissa.push_back(157);
    poisoned.entropy.push_back(-99.0);
    CHECK(fit_cardy_calabrese(curve, sites).c ==
          doctest::Approx(fit_cardy_calabrese(poisoned, sites).c).epsilon(1e-12));
}

TEST_CASE("cardy fit needs at least 8 windowed points") {
    EntropyCurve curve;
    curve.mode = EntropyMode::vary_cut;
    for (int la : {20, 40, 60, 80, 100}) {
        curve.abscissa.push_back(la);
        curve.entropy.push_back(1.0);
    }
    CHECK_THROWS_AS(fit_cardy_calabrese(curve, 160), ConfigError);
}

TEST_CASE("log-scaling fit recovers a synthetic central charge") {
    EntropyCurve curve;
    curve.mode = EntropyMode::vary_size;
    for (int l : {40, 80, 160, 320}) {
        curve.abscissa.push_back(l);
        curve.entropy.push_back(2.4 / 3.0 * std::log(l) - 0.7);
    }
    const FitResult fit = fit_log_scaling(curve);
    CHECK(fit.c == doctest::Approx(2.4).epsilon(1e-9));
    CHECK(fit.intercept == doctest::Approx(-0.7).epsilon(1e-9));

    EntropyCurve short_curve = curve;
    short_curve.abscissa.pop_back();
    short_curve.entropy.pop_back();
    CHECK_THROWS_AS(fit_log_scaling(short_curve), ConfigError);

    EntropyCurve narrow;
    narrow.mode = EntropyMode::vary_size;
    for (int l : {100, 150, 200, 300}) { // span 3 < 4
        narrow.abscissa.push_back(l);
        narrow.entropy.push_back(std::log(l));
    }
    CHECK_THROWS_AS(fit_log_scaling(narrow), ConfigError);
}

TEST_CASE("fit rejects the wrong curve mode") {
    EntropyCurve curve;
    curve.mode = EntropyMode::vary_size;
    for (int l : {40, 80, 160, 320}) {
        curve.abscissa.push_back(l);
        curve.entropy.push_back(std::log(l));
    }
    CHECK_THROWS_AS(fit_cardy_calabrese(curve, 160), ConfigError);
    curve.mode = EntropyMode::vary_cut;
    CHECK_THROWS_AS(fit_log_scaling(curve), ConfigError);
}

TEST_CASE("fidelity at eps = 0 is exactly one") {
    const FidelityResult r = fidelity(testutil::rep_point(2), 24, 0.0);
    CHECK(r.f == cplx(1.0, 0.0));
    CHECK(r.chi == cplx(0.0, 0.0));
    CHECK_THROWS_AS(fidelity(testutil::rep_point(2), 24, -0.01), ConfigError);
}

TEST_CASE("8-site fidelity matches the Fock-space overlap") {
    const double eps = 0.05;
    for (int i = 0; i < 5; ++i) {
        CAPTURE(i);
        const ModelParams p = testutil::rep_point(i);
        ModelParams shifted = p;
        shifted.lambda += eps;
        const cplx f_exact =
            fock::fidelity_overlap(single_particle(p, 2), single_particle(shifted, 2));
        const FidelityResult r = fidelity(p, 8, eps);
        CHECK(std::abs(r.f - f_exact) < 1e-8);
        CHECK(std::abs(r.chi - (1.0 - f_exact) / (eps * eps)) < 1e-6);
    }
}

TEST_CASE("fidelity is symmetric in the state pair") {
    const ModelParams p = testutil::rep_point(1);
    ModelParams shifted = p;
    shifted.lambda += 0.02;
    const BiorthogonalGroundState a = ground_state_pbc(p, 10);
    const BiorthogonalGroundState b = ground_state_pbc(shifted, 10);
    const FidelityResult ab = fidelity_from_states(a, b, 0.02);
    const FidelityResult ba = fidelity_from_states(b, a, 0.02);
    CHECK(std::abs(ab.f - ba.f) < 1e-12);
}

TEST_CASE("susceptibility is stable under eps halving") {
    const ModelParams p = testutil::rep_point(2);
    const cplx chi1 = fidelity(p, 40, 0.01).chi;
    const cplx chi2 = fidelity(p, 40, 0.005).chi;
    CHECK(std::abs(chi1 - chi2) / std::abs(chi2) < 0.1);
}

TEST_CASE("lambda scan reuses states consistently") {
    ModelParams base;
    const auto points = fidelity_scan_lambda(base, 0.60, 0.005, 21, 40, 2);
    REQUIRE(points.size() == 21);
    for (int j : {0, 4, 10}) {
        ModelParams p = base;
        p.lambda = 0.60 + 0.005 * j;
        const FidelityResult direct = fidelity(p, 40, 0.01);
        if (!points[j].boundary) {
            CHECK(points[j].abs_chi ==
                  doctest::Approx(std::min(std::abs(direct.chi), kChiClip)).epsilon(1e-6));
        }
        CHECK(points[j].lambda == doctest::Approx(p.lambda).epsilon(1e-12));
        CHECK(points[j].log1p_abs_chi ==
              doctest::Approx(std::log1p(points[j].abs_chi)).epsilon(1e-12));
        CHECK(points[j].abs_chi <= kChiClip);
    }
    // the window straddles the 0.651388 transition; the scan must register it
    double peak = 0.0;
    for (const auto& pt : points) peak = std::max(peak, pt.abs_chi);
    CHECK(peak > 10.0 * points.front().abs_chi);
}

TEST_CASE("2d fidelity scan: shape, clipping, worker independence") {
    ModelParams base;
    setenv("KNOTLAT_WORKERS", "1", 1);
    const FidelityGrid a = fidelity_scan(base, 0.1, 0.9, 1.8, 2.2, 5, 4, 24, 0.01);
    setenv("KNOTLAT_WORKERS", "3", 1);
    const FidelityGrid b = fidelity_scan(base, 0.1, 0.9, 1.8, 2.2, 5, 4, 24, 0.01);
    unsetenv("KNOTLAT_WORKERS");

    REQUIRE(a.lambda_axis.size() == 5);
    REQUIRE(a.t2_axis.size() == 4);
    CHECK(a.sites == 24);
    for (std::size_t i = 0; i < a.cells.size(); ++i)
        for (std::size_t j = 0; j < a.cells[i].size(); ++j) {
            const FidelityScanPoint& pa = a.cells[i][j];
            const FidelityScanPoint& pb = b.cells[i][j];
            CHECK(pa.abs_chi == pb.abs_chi);
            CHECK(pa.boundary == pb.boundary);
            CHECK(pa.abs_chi <= kChiClip);
            CHECK(pa.log1p_abs_chi == doctest::Approx(std::log1p(pa.abs_chi)).epsilon(1e-12));
        }
}
