#include "doctest.h"

#include <cstdlib>

#include "helpers.hpp"
#include "knotlat/spectral.hpp"
#include "knotlat/topology.hpp"

using namespace knotlat;

namespace {

const double kExpectedRoots[4] = {0.190984, 0.651388, 1.151388, 1.309017};

} // namespace

TEST_CASE("winding numbers at the representative points") {
    const int expected[5] = {0, -1, -2, -3, -4};
    for (int i = 0; i < 5; ++i) {
        const WindingResult r = winding_number(testutil::rep_point(i));
        CHECK(r.w == expected[i]);
        CHECK(std::abs(r.w_raw - r.w) < 1e-6);
        CHECK(r.min_abs_f > 1e-8);
        CHECK(r.n_k_used >= 256);
    }
}

TEST_CASE("hermitian couplings cannot wind") {
    ModelParams p;
    p.lambda = 0.0;
    CHECK(winding_number(p).w == 0);
}

TEST_CASE("evaluating on a phase boundary fails loudly") {
    ModelParams p;
    p.lambda = phase_boundary_lambdas(p).roots.front();
    // the zero of f pins either the gap check or the resolution ladder
    CHECK_THROWS_AS(winding_number(p), Error);
}

TEST_CASE("boundary roots at the defaults") {
    const BoundaryRoots r = phase_boundary_lambdas(ModelParams{});
    REQUIRE(r.roots.size() == 4);
    CHECK(r.dropped_complex == 0);
    for (int i = 0; i < 4; ++i) CHECK(std::abs(r.roots[i] - kExpectedRoots[i]) < 1e-6);
    CHECK(std::is_sorted(r.roots.begin(), r.roots.end()));
}

TEST_CASE("representative points interleave the roots") {
    const BoundaryRoots r = phase_boundary_lambdas(ModelParams{});
    for (int i = 0; i < 5; ++i) {
        const double lo = i == 0 ? 0.0 : r.roots[i - 1];
        const double hi = i == 4 ? 1e9 : r.roots[i];
        CHECK(testutil::kRepLambdas[i] > lo);
        CHECK(testutil::kRepLambdas[i] < hi);
    }
}

TEST_CASE("boundary curves satisfy the defining equation") {
    ModelParams base;
    const auto curves = sample_boundary_curves(base, 0.5, 3.0, 41);
    REQUIRE(curves.size() == 4); // p in {0, 1}, both signs
    int total_points = 0;
    for (const BoundaryCurve& c : curves) {
        CHECK((c.sign == 1 || c.sign == -1));
        for (const BoundaryCurvePoint& pt : c.points) {
            ++total_points;
            ModelParams p = base;
            p.t2 = pt.t2;
            const double u = coeff_u(p);
            const double v = coeff_v(p, M_PI * c.p / p.q);
            const double disc = std::sqrt(4 * u * u - 16 * v);
            CHECK(16 * pt.lambda * pt.lambda ==
                  doctest::Approx(2 * u + c.sign * disc).epsilon(1e-9));
        }
    }
    CHECK(total_points > 100);
}

TEST_CASE("phase-diagram sweep: integrality, flags, axes") {
    ModelParams base;
    const PhaseDiagramGrid g = sweep_phase_diagram(base, 0.05, 1.45, 1.6, 2.4, 16, 16, 256,
                                                   /*with_knots=*/false);
    REQUIRE(g.lambda_axis.size() == 16);
    REQUIRE(g.t2_axis.size() == 16);
    CHECK(g.lambda_axis.front() == doctest::Approx(0.05));
    CHECK(g.lambda_axis.back() == doctest::Approx(1.45));
    CHECK(g.metadata.n_k == 256);
    CHECK_FALSE(g.metadata.timestamp.empty());
    for (const auto& row : g.cells)
        for (const PhaseCell& c : row) {
            if (c.boundary) {
                CHECK_FALSE(c.note.empty());
            } else {
                CHECK(std::abs(c.w_raw - c.winding) < 1e-3);
            }
        }
}

TEST_CASE("sweep results are independent of the worker count") {
    ModelParams base;
    setenv("KNOTLAT_WORKERS", "1", 1);
    const PhaseDiagramGrid a = sweep_phase_diagram(base, 0.1, 1.4, 1.8, 2.2, 16, 16, 256, false);
    setenv("KNOTLAT_WORKERS", "3", 1);
    const PhaseDiagramGrid b = sweep_phase_diagram(base, 0.1, 1.4, 1.8, 2.2, 16, 16, 256, false);
    unsetenv("KNOTLAT_WORKERS");
    for (std::size_t i = 0; i < a.cells.size(); ++i)
        for (std::size_t j = 0; j < a.cells[i].size(); ++j) {
            CHECK(a.cells[i][j].boundary == b.cells[i][j].boundary);
            CHECK(a.cells[i][j].winding == b.cells[i][j].winding);
            CHECK(a.cells[i][j].w_raw == b.cells[i][j].w_raw);
        }
}

TEST_CASE("sweep with knot classification fills the tag") {
    ModelParams base;
    const PhaseDiagramGrid g =
        sweep_phase_diagram(base, 0.1, 0.7, 1.9, 2.1, 16, 16, 256, /*with_knots=*/true, 512);
    CHECK(g.metadata.braid_n_k == 512);
    int tagged = 0;
    for (const auto& row : g.cells)
        for (const PhaseCell& c : row)
            if (!c.boundary) {
                CHECK_FALSE(c.knot_tag.empty());
                ++tagged;
            }
    CHECK(tagged > 200);
}

TEST_CASE("sweep validates its inputs") {
    ModelParams base;
    CHECK_THROWS_AS(sweep_phase_diagram(base, 0.1, 1.4, 1.8, 2.2, 8, 8, 256, false),
                    ConfigError);
    CHECK_THROWS_AS(sweep_phase_diagram(base, 0.1, 1.4, 1.8, 2.2, 16, 16, 32, false),
                    ConfigError);
    CHECK_THROWS_AS(sweep_phase_diagram(base, 1.4, 0.1, 1.8, 2.2, 16, 16, 256, false),
                    ConfigError);
}
