#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "voltspec/model.hpp"

using namespace vs;

namespace {

struct SquaresModel {
    std::shared_ptr<const Spectrum> s;
    GeneratingFunction g;
    PerturbationData data;

    explicit SquaresModel(int count, int tail_order = 0)
        : s(std::make_shared<Spectrum>(generate(FamilySpec::squares(1, count)))),
          g(GeneratingFunction::numeric(s, ProductPolicy{.tail_order = tail_order})),
          data(synthesize(*s, g)) {}

    ModelEvaluator model(ModelOptions opt = {}) const { return {data, g, opt}; }
};

cplx squares_closed(cplx z) {
    cplx w = std::sqrt(z);
    return std::sin(M_PI * w) / (M_PI * w);
}

} // namespace

TEST_CASE("beta recovers 1/A for synthesized squares data") {
    SquaresModel sq(10000);
    auto m = sq.model();
    cplx z(0.0, 1.0);
    CHECK(std::abs(m.beta(z) - 1.0 / squares_closed(z)) < 1e-3);
    for (cplx w : {cplx(2.5, 0.5), cplx(-7.0, 0.0), cplx(0.5, -3.0)})
        CHECK(std::abs(m.beta(w) * squares_closed(w) - 1.0) < 1e-3);
}

TEST_CASE("zero coefficients give constant beta") {
    auto s = generate(FamilySpec::squares(1, 500));
    auto p = arbitrary_from_c(s, std::vector<cplx>(s.size(), 0.0), 1.0);
    ModelEvaluator m(p, GeneratingFunction::numeric(s));
    for (cplx z : {cplx(0.3, 0.1), cplx(-20.0, 5.0)}) CHECK(std::abs(m.beta(z) - 1.0) < 1e-15);
}

TEST_CASE("rho is Herglotz in the upper half plane") {
    SquaresModel sq(2000);
    auto m = sq.model();
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> ux(-50.0, 50.0), uy(0.05, 20.0);
    for (int i = 0; i < 100; ++i) {
        cplx z(ux(rng), uy(rng));
        CHECK(m.rho(z).imag() > 0.0);
    }
}

TEST_CASE("Theta behavior") {
    SquaresModel sq(2000);
    auto m = sq.model();
    SUBCASE("modulus one on the real axis") {
        for (double x : {0.4, 2.2, 6.5, 30.7})
            CHECK(std::abs(std::abs(m.theta(cplx(x, 0.0))) - 1.0) < 1e-8);
    }
    SUBCASE("tends to -1 at the nodes") {
        CHECK(std::abs(m.theta(cplx(4.0 + 1e-9, 0.0)) + 1.0) < 1e-6);
    }
    SUBCASE("contractive inside") { CHECK(std::abs(m.theta(cplx(0.0, 2.0))) < 1.0); }
    SUBCASE("Cayley round trip") {
        for (cplx z : {cplx(1.3, 0.7), cplx(-12.0, 2.0), cplx(3.3, -1.1)}) {
            cplx r = m.rho(z);
            cplx th = (cplx(0.0, 1.0) - r) / (cplx(0.0, 1.0) + r);
            cplx back = cplx(0.0, 1.0) * (1.0 - th) / (1.0 + th);
            CHECK(std::abs(back - r) <= 1e-10 * std::max(1.0, std::abs(r)));
        }
    }
}

TEST_CASE("model identities") {
    SquaresModel sq(10000);
    auto m = sq.model();
    SUBCASE("phi = beta (1 + Theta)/2") {
        for (cplx z : {cplx(0.7, 0.4), cplx(-3.0, 1.0)})
            CHECK(std::abs(m.phi(z) - m.beta(z) * (1.0 + m.theta(z)) / 2.0) < 1e-12);
    }
    SUBCASE("phi E = beta A stays near one") {
        for (cplx z : {cplx(0.7, 0.4), cplx(-3.0, 1.0), cplx(5.5, -0.8)})
            CHECK(std::abs(m.phi(z) * m.E(z) - 1.0) < 1e-3);
    }
    SUBCASE("E*/E = Theta") {
        for (cplx z : {cplx(1.7, 0.9), cplx(-8.0, 2.5)}) {
            cplx estar = std::conj(m.E(std::conj(z)));
            CHECK(std::abs(estar / m.E(z) - m.theta(z)) < 1e-8);
        }
    }
    SUBCASE("A and B are real on the real axis") {
        for (double x : {0.45, 3.3, 17.6}) {
            CHECK(std::fabs(m.A(cplx(x, 0.0)).imag()) < 1e-10);
            CHECK(std::fabs(m.B(cplx(x, 0.0)).imag()) <
                  1e-10 * std::max(1.0, std::abs(m.B(cplx(x, 0.0)))));
        }
    }
    SUBCASE("conjugation symmetry of beta for real data") {
        for (cplx z : {cplx(1.1, 2.2), cplx(-4.0, 0.5)})
            CHECK(std::abs(m.beta(std::conj(z)) - std::conj(m.beta(z))) < 1e-13);
    }
}

TEST_CASE("Hermite-Biehler sampling") {
    SquaresModel sq(4000);
    auto m = sq.model();
    std::mt19937 rng(20240917);
    std::uniform_real_distribution<double> ux(-60.0, 60.0), uy(0.1, 10.0);
    for (int i = 0; i < 200; ++i) {
        cplx z(ux(rng), uy(rng));
        CHECK(std::abs(m.E(z)) > std::abs(m.E(std::conj(z))));
    }
}

TEST_CASE("high-imaginary decay of beta for synthesized data") {
    SquaresModel sq(10000);
    auto m = sq.model();
    double prev = HUGE_VAL;
    for (double y : {10.0, 100.0, 1000.0, 10000.0}) {
        double v = std::abs(m.beta(cplx(0.0, y)));
        // decreasing until the sum's rounding floor takes over
        CHECK((v < prev * 1.05 || v < 1e-12));
        prev = std::min(prev, v);
    }
    CHECK(prev < 1e-6);
}

TEST_CASE("clark masses") {
    SUBCASE("single pole") {
        auto s = Spectrum::from_points({2.0});
        double r5 = std::sqrt(5.0);
        auto p = arbitrary_data(s, {1.0}, {cplx(r5, 0.0)}, {cplx(r5, 0.0)}, 1.0);
        ModelEvaluator m(p, GeneratingFunction::numeric(s, ProductPolicy{.tail_order = 0}));
        CHECK(m.clark_mass(0) == doctest::Approx(5.0).epsilon(1e-6));
    }
    SUBCASE("synthesized squares recover |b|^2 mu") {
        SquaresModel sq(4000);
        auto m = sq.model();
        for (std::size_t pos : {0u, 2u, 7u}) {
            double w = std::norm(sq.data.b[pos]) * sq.data.mu[pos];
            CHECK(m.clark_mass(pos) == doctest::Approx(w).epsilon(1e-3));
        }
    }
    SUBCASE("no mass at infinity") {
        SquaresModel sq(4000);
        auto m = sq.model();
        double first = 0.0, prev = HUGE_VAL;
        for (double y : {100.0, 1000.0, 10000.0}) {
            double ratio = m.rho(cplx(0.0, y)).imag() / y;
            CHECK(ratio < prev);
            if (first == 0.0) first = ratio;
            prev = ratio;
        }
        CHECK(prev < 1e-2 * first);
    }
}

TEST_CASE("count_zeros") {
    SquaresModel sq(10000);
    auto m = sq.model();
    Rect box{-30.0, 30.0, -30.0, 30.0};
    SUBCASE("synthesized squares data is zero free") {
        auto rep = m.count_zeros(box);
        CHECK(rep.zeros == 0);
        CHECK(rep.poles_inside == 5); // nodes 1, 4, 9, 16, 25
        CHECK(rep.winding == -5);
        CHECK(rep.min_abs_on_contour > 1e-10);
    }
    SUBCASE("stable under contour perturbation") {
        for (double shift : {0.9, -0.9}) {
            Rect pert{box.x0 - shift, box.x1 + shift, box.y0 - shift, box.y1 + shift};
            CHECK(m.count_zeros(pert).zeros == 0);
        }
    }
    SUBCASE("flipping one coefficient plants a zero") {
        PerturbationData flipped = sq.data;
        flipped.c[0] = -flipped.c[0];
        flipped.a[0] = -flipped.a[0];
        ModelEvaluator mf(flipped, sq.g);
        auto rep = mf.count_zeros(box);
        CHECK(rep.zeros >= 1);
        // a zero pair sits near |z| = 29.5, so identical counts are not owed
        // under shifts; the count must stay a trustworthy integer and nonzero
        for (double shift : {0.9, -0.9}) {
            Rect pert{box.x0 - shift, box.x1 + shift, box.y0 - shift, box.y1 + shift};
            CHECK(mf.count_zeros(pert).zeros >= 1);
        }
    }
    SUBCASE("constant beta has no zeros and no poles") {
        auto s = generate(FamilySpec::squares(1, 10000));
        auto p = arbitrary_from_c(*sq.s, std::vector<cplx>(s.size(), 0.0), 1.0);
        ModelEvaluator mz(p, sq.g);
        auto rep = mz.count_zeros(box);
        CHECK(rep.zeros == 0);
        CHECK(rep.winding == 0);
        CHECK(rep.poles_inside == 0);
    }
    SUBCASE("rectangle must respect the materialization radius") {
        double r = 0.5 * sq.s->max_abs();
        CHECK_THROWS_AS(m.count_zeros(Rect{-2.0 * r, 2.0 * r, -1.0, 1.0}),
                        vs::parameter_error);
    }
    SUBCASE("contour clearance is enforced") {
        CHECK_THROWS_AS(m.count_zeros(Rect{-30.0, 4.0 + 1e-6, -30.0, 30.0}),
                        vs::contour_error);
    }
}

TEST_CASE("livsic evaluator") {
    auto s = generate(FamilySpec::livsic(1.0, 2000));
    ProductPolicy pol;
    pol.tail_order = 2;
    auto g = GeneratingFunction::numeric(s, pol);
    auto data = livsic_data(s);
    ModelEvaluator m(data, g);

    SUBCASE("matches -exp(-i pi z) on |z| <= 5") {
        std::mt19937 rng(99);
        std::uniform_real_distribution<double> u(-5.0, 5.0);
        for (int i = 0; i < 60; ++i) {
            cplx z(u(rng), u(rng));
            cplx ref = -std::exp(cplx(0.0, -M_PI) * z);
            CHECK(std::abs(m.livsic_g(z) - ref) / std::abs(ref) < 1e-3);
        }
    }
    SUBCASE("winding over the standard box is zero and the slope is pi") {
        auto rep = m.livsic_report(Rect{-10.0, 10.0, -10.0, 10.0});
        CHECK(rep.winding.zeros == 0);
        CHECK(rep.slope == doctest::Approx(M_PI).epsilon(0.01));
        CHECK(rep.slope_residual < 0.05);
    }
    SUBCASE("pattern is enforced") {
        SquaresModel sq(500);
        auto msq = sq.model();
        CHECK_THROWS_AS(msq.livsic_g(cplx(0.0, 1.0)), vs::pattern_error);
    }
}

TEST_CASE("proximity guard on the model sums") {
    SquaresModel sq(500);
    auto m = sq.model();
    CHECK_THROWS_AS(m.beta(cplx(9.0 + 1e-14, 0.0)), vs::proximity_error);
}

TEST_CASE("phi_tilde pairs with phi on the real axis") {
    SquaresModel sq(2000);
    auto m = sq.model();
    // real data: |Theta| = 1 on R makes |phi~| = |phi| there, and the zero
    // sets of the pair mirror across the axis
    for (double x : {0.6, 2.8, 12.4}) {
        cplx z(x, 0.0);
        CHECK(std::abs(std::abs(m.phi_tilde(z)) - std::abs(m.phi(z))) <
              1e-8 * std::abs(m.phi(z)));
    }
    for (cplx z : {cplx(1.3, 0.8), cplx(-6.0, 2.0)}) {
        cplx lhs = m.phi_tilde(z);
        cplx rhs = m.theta(z) * std::conj(m.phi(std::conj(z)));
        CHECK(std::abs(lhs - rhs) == 0.0);
    }
}
