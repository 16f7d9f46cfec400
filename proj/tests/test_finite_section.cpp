#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include <Eigen/Dense>

#include "voltspec/finite_section.hpp"

using namespace vs;

namespace {

PerturbationData squares_data(int count) {
    auto s = std::make_shared<Spectrum>(generate(FamilySpec::squares(1, count)));
    auto g = GeneratingFunction::numeric(s, ProductPolicy{.tail_order = 0});
    return synthesize(*s, g);
}

PerturbationData livsic_section_data(int per_side) {
    return livsic_data(generate(FamilySpec::livsic(1.0, per_side)));
}

void check_multiset_match(const std::vector<cplx>& a, const std::vector<cplx>& b, double tol) {
    REQUIRE(a.size() == b.size());
    // greedy nearest pairing: equal-modulus pairs may sort differently
    std::vector<bool> used(b.size(), false);
    for (std::size_t i = 0; i < a.size(); ++i) {
        double best = HUGE_VAL;
        std::size_t pick = 0;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (used[j]) continue;
            double d = std::abs(a[i] - b[j]);
            if (d < best) {
                best = d;
                pick = j;
            }
        }
        used[pick] = true;
        CHECK(best <= tol * std::max(1e-12, std::abs(a[i])));
    }
}

} // namespace

TEST_CASE("one-node squares section is the single entry -1") {
    auto p = squares_data(1000);
    auto f = build(p, 1);
    CHECK(f.entry(0, 0).real() == doctest::Approx(-1.0).epsilon(1e-3));
    auto eigs = eigenvalues_dense(f);
    REQUIRE(eigs.size() == 1);
    CHECK(eigs[0].real() == doctest::Approx(-1.0).epsilon(1e-3));
    CHECK(std::fabs(eigs[0].imag()) < 1e-12);
}

TEST_CASE("secular root of the one-node section solves 2/(1-z) = 1") {
    auto p = squares_data(1000);
    auto f = build(p, 1);
    auto sec = eigenvalues_secular(f);
    REQUIRE(sec.eigenvalues.size() == 1);
    CHECK(sec.eigenvalues[0].real() == doctest::Approx(-1.0).epsilon(1e-3));
}

TEST_CASE("zero coefficients leave the diagonal") {
    auto s = generate(FamilySpec::squares(1, 200));
    auto p = arbitrary_from_c(s, std::vector<cplx>(s.size(), 0.0), 1.0);
    auto f = build(p, 12);
    auto eigs = eigenvalues_dense(f);
    for (int i = 0; i < 12; ++i)
        CHECK(std::abs(eigs[i] - 1.0 / s.point(i)) < 1e-14);
    auto sec = eigenvalues_secular(f);
    check_multiset_match(eigs, sec.eigenvalues, 1e-8);
    CHECK(sec.at_diagonal.size() == 12);
}

TEST_CASE("hermitian data gives real eigenvalues") {
    auto s = generate(FamilySpec::squares(1, 100));
    std::vector<cplx> ab(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) ab[i] = 1.0 / (1.0 + double(i));
    auto p = arbitrary_data(s, std::vector<double>(s.size(), 1.0), ab, ab, 1.0);
    auto f = build(p, 40);
    for (auto lam : eigenvalues_dense(f)) CHECK(std::fabs(lam.imag()) < 1e-10);
}

TEST_CASE("livsic sections carry a rank-one anti-hermitian part") {
    auto p = livsic_section_data(100);
    auto f = build(p, 4);
    // u = i v under delta = -1
    for (int i = 0; i < 4; ++i)
        CHECK(std::abs(f.u[i] - cplx(0.0, 1.0) * f.v[i]) < 1e-15);
    Eigen::MatrixXcd imag_part(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            cplx k = f.entry(i, j), kh = std::conj(f.entry(j, i));
            imag_part(i, j) = (k - kh) / cplx(0.0, 2.0);
        }
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(imag_part);
    CHECK(svd.singularValues()(1) < 1e-14 * svd.singularValues()(0));
}

TEST_CASE("trace identity is exact algebra") {
    auto p = squares_data(500);
    auto f = build(p, 37);
    cplx expect(0.0, 0.0);
    for (int i = 0; i < 37; ++i) {
        double t = p.spectrum->point(p.spectrum->abs_order()[i]);
        expect += 1.0 / t - (1.0 / p.delta) * f.c[i] / (t * t);
    }
    CHECK(std::abs(f.trace() - expect) <= 1e-12 * std::abs(expect));
}

TEST_CASE("update part has numerical rank one") {
    auto p = squares_data(300);
    auto f = build(p, 50);
    Eigen::MatrixXcd upd(50, 50);
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j < 50; ++j) upd(i, j) = f.entry(i, j) - (i == j ? f.diag[i] : 0.0);
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(upd);
    CHECK(svd.singularValues()(1) < 1e-12 * svd.singularValues()(0));
}

TEST_CASE("dual oracle: dense and secular agree to 1e-8") {
    SUBCASE("squares") {
        auto p = squares_data(2000);
        for (int n : {10, 25, 50}) {
            auto f = build(p, n);
            check_multiset_match(eigenvalues_dense(f), eigenvalues_secular(f).eigenvalues,
                                 1e-8);
        }
    }
    SUBCASE("livsic") {
        auto p = livsic_section_data(1000);
        for (int n : {10, 25, 50}) {
            auto f = build(p, n);
            check_multiset_match(eigenvalues_dense(f), eigenvalues_secular(f).eigenvalues,
                                 1e-8);
        }
    }
}

TEST_CASE("collapse profile") {
    SUBCASE("synthesized squares radii strictly decrease and the window empties") {
        auto p = squares_data(2000);
        auto rows = collapse_profile(p, {25, 50, 100, 200});
        for (std::size_t k = 1; k < rows.size(); ++k) {
            CHECK(rows[k].spectral_radius < rows[k - 1].spectral_radius);
            CHECK(rows[k].zeros_in_window <= rows[k - 1].zeros_in_window);
        }
        CHECK(rows.back().zeros_in_window == 0);
    }
    SUBCASE("zero coefficients keep radius at max |1/t|") {
        auto s = generate(FamilySpec::squares(1, 300));
        auto p = arbitrary_from_c(s, std::vector<cplx>(s.size(), 0.0), 1.0);
        auto rows = collapse_profile(p, {25, 50, 100});
        for (const auto& r : rows) CHECK(r.spectral_radius == doctest::Approx(1.0));
    }
    SUBCASE("flipped coefficient keeps the radius up") {
        auto p = squares_data(2000);
        p.c[0] = -p.c[0];
        p.a[0] = -p.a[0];
        auto rows = collapse_profile(p, {25, 50, 100, 200});
        for (const auto& r : rows) {
            CHECK(r.spectral_radius > 0.2);
            CHECK(r.zeros_in_window >= 1);
        }
    }
}

TEST_CASE("build guards") {
    auto p = squares_data(100);
    CHECK_THROWS_AS(build(p, 0), vs::parameter_error);
    CHECK_THROWS_AS(build(p, 101), vs::parameter_error);
    PerturbationData zero_delta = p;
    zero_delta.delta = 0.0;
    CHECK_THROWS_AS(build(zero_delta, 10), vs::parameter_error);
    auto f = build(p, 30);
    f.n = 513;
    f.diag.resize(513);
    f.u.resize(513);
    f.v.resize(513);
    CHECK_THROWS_AS(eigenvalues_dense(f), vs::parameter_error);
}
