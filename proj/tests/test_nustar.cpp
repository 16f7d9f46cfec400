#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "voltspec/nustar.hpp"
#include "voltspec/perturbation.hpp"

using namespace vs;

namespace {

struct SquaresRun {
    std::shared_ptr<const Spectrum> s;
    GeneratingFunction g;
    std::vector<double> nu0;

    explicit SquaresRun(int count)
        : s(std::make_shared<Spectrum>(generate(FamilySpec::squares(1, count)))),
          g(GeneratingFunction::numeric(s, ProductPolicy{.tail_order = 2})) {
        // |c_n| = 1/|A'(n^2)| = 2 n^2
        for (double t : s->points()) nu0.push_back(2.0 * t);
    }
};

} // namespace

TEST_CASE("initialization") {
    SquaresRun sq(600);
    SUBCASE("squares with |c| weights is a valid start") {
        NuStarRun run(*sq.s, sq.g, sq.nu0);
        CHECK(run.tau(0) == 4.0); // max(4, 2 t_1)
        CHECK(run.base_norm() > 0.0);
        CHECK(std::isfinite(run.base_norm()));
    }
    SUBCASE("all-zero weights are rejected") {
        CHECK_THROWS_AS(NuStarRun(*sq.s, sq.g, std::vector<double>(sq.s->size(), 0.0)),
                        vs::parameter_error);
    }
    SUBCASE("livsic with constant weights is a valid start") {
        auto s = std::make_shared<Spectrum>(generate(FamilySpec::livsic(1.0, 400)));
        ProductPolicy pol;
        pol.tail_order = 2;
        auto g = GeneratingFunction::numeric(s, pol);
        NuStarRun run(*s, g, std::vector<double>(s->size(), 1.0 / M_PI));
        CHECK(std::isfinite(run.base_norm()));
    }
}

TEST_CASE("three steps on the squares spectrum") {
    SquaresRun sq(800);
    NuStarRun run(*sq.s, sq.g, sq.nu0);
    for (int k = 1; k <= 3; ++k) run.step();
    REQUIRE(run.steps_done() == 3);
    for (const auto& st : run.steps()) {
        double tau_prev = run.tau(st.k - 1);
        // monotone data
        CHECK(st.tau > 2.0 * tau_prev);
        CHECK(st.t_nk > 2.0 * tau_prev);
        // mass inequality of the node choice
        CHECK(st.nu_before / (st.t_nk * st.t_nk) <= std::pow(2.0, -st.k - 1) / tau_prev);
        // property (i) bound
        CHECK(st.eta_dev_sup <= std::pow(2.0, -st.k));
        // growth on the ring
        CHECK(st.norm_ring_inv_e >= 0.45);
        // uniform bound (ii) with the explicit constant
        CHECK(1.0 + st.norm_full * st.norm_full <= run.uniform_bound() * 1.01);
    }
}

TEST_CASE("heavy weights keep the outside norm above the case threshold") {
    SquaresRun sq(800);
    NuStarRun run(*sq.s, sq.g, sq.nu0);
    run.step();
    const auto& st = run.steps()[0];
    CHECK(!st.shrunk); // squares base weights leave too much mass outside
    CHECK(st.norm_beyond >= 2.0 / run.tau(0));
    CHECK(st.nu_prime == st.nu_before);
}

TEST_CASE("a light far node exercises the bisection branch") {
    // heavy weights make the mass outside J_0 tiny, so the shrink equality
    // must run at the chosen node
    auto s = std::make_shared<Spectrum>(Spectrum::from_points({5.0, 2000.0, 100000.0}));
    auto g = GeneratingFunction::numeric(s, ProductPolicy{.tail_order = 0});
    NuStarRun run(*s, g, {1.0, 2000.0, 1.0});
    CHECK(run.tau(0) == 10.0);
    run.step();
    const auto& st = run.steps()[0];
    CHECK(st.t_nk == 2000.0);
    CHECK(st.shrunk);
    CHECK(st.nu_prime < st.nu_before);
    CHECK(st.nu_prime > 0.0);
    // the equality the bisection enforces
    CHECK(st.norm_beyond == doctest::Approx(2.0 / run.tau(0)).epsilon(1e-4));
    // and the threshold equality is honest when not saturated
    if (!st.tau_saturated) {
        double tau_prev = run.tau(0);
        CHECK(st.norm_ring == doctest::Approx(1.0 / tau_prev).epsilon(1e-4));
    }
}

TEST_CASE("norm regions and conventions") {
    SquaresRun sq(400);
    NuStarRun run(*sq.s, sq.g, sq.nu0);
    // k = 0: ring convention is all of J_0
    double ring0 = run.norm(NuStarRegion::ring);
    CHECK(ring0 > 0.0);
    double window = run.norm(NuStarRegion::window);
    CHECK(window >= ring0 * 0.999);
    run.step();
    CHECK(run.norm(NuStarRegion::ring) > 0.0);
    CHECK_THROWS_AS(run.norm(NuStarRegion::beyond, false), vs::parameter_error);
}

TEST_CASE("pointwise convergence proxy on J_1") {
    // after a genuine shrink, |1/E_1 - 1/E_0| <= 2^{1-0} sup |1/E_min| on J_1
    auto s = std::make_shared<Spectrum>(Spectrum::from_points({5.0, 2000.0, 100000.0}));
    auto g = GeneratingFunction::numeric(s, ProductPolicy{.tail_order = 0});
    NuStarRun run(*s, g, {1.0, 2000.0, 1.0});
    std::vector<double> probe = {0.3, 1.7, 3.9, -2.6, 50.0, -70.0};
    std::vector<double> e0;
    for (double x : probe) e0.push_back(std::sqrt(run.abs_e_squared(x)));
    run.step();
    REQUIRE(run.steps()[0].shrunk);
    double tau1 = run.tau(1);
    for (std::size_t i = 0; i < probe.size(); ++i) {
        REQUIRE(std::fabs(probe[i]) < tau1);
        double e1 = std::sqrt(run.abs_e_squared(probe[i]));
        double lhs = std::fabs(1.0 / e1 - 1.0 / e0[i]);
        double bound = 2.0 / std::min(e1, e0[i]);
        CHECK(lhs <= bound + 1e-15);
    }
}

TEST_CASE("exhaustion raises a range error") {
    SquaresRun sq(80); // too few nodes for the thresholds to keep doubling
    NuStarRun run(*sq.s, sq.g, sq.nu0);
    CHECK_THROWS_AS(
        [&] {
            for (int k = 0; k < 6; ++k) run.step();
        }(),
        vs::range_error);
}

TEST_CASE("log serializes the per-step state") {
    SquaresRun sq(400);
    NuStarRun run(*sq.s, sq.g, sq.nu0);
    run.step();
    auto text = run.log_json();
    CHECK(text.find("\"tau\"") != std::string::npos);
    CHECK(text.find("\"checks\"") != std::string::npos);
    CHECK(text.find("\"growth\":true") != std::string::npos);
}
