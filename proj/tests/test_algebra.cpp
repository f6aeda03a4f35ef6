#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"

using namespace cyweb;
using fixtures::random_symmetric;

namespace {

Poly poly_from_roots(std::initializer_list<double> roots, double lead = 1.0) {
    Poly p(std::vector<double>{lead});
    for (double r : roots) p = p * Poly(std::vector<double>{-r, 1.0});
    return p;
}

}  // namespace

TEST_CASE("char_poly of the absolute pencil member", "[algebra]") {
    Poly p = char_poly(absolute_form(), absolute_form());
    // det((1-t) J) = -(1-t)^5
    for (double t : {-1.0, 0.0, 0.5, 2.0, 3.5}) {
        REQUIRE(p.eval(t) == Catch::Approx(-std::pow(1.0 - t, 5)).margin(1e-12));
    }
}

TEST_CASE("char_poly roots of the six-family pencil", "[algebra]") {
    Pencil p = fixtures::six_family_pencil();
    auto roots = real_roots(pencil_char_poly(p));
    REQUIRE(roots.size() == 5);
    std::vector<double> want{-2, -1, 0, 1, 2};
    for (size_t i = 0; i < 5; ++i) {
        REQUIRE(roots[i].t == Catch::Approx(want[i]).margin(1e-10));
        REQUIRE(roots[i].multiplicity == 1);
    }
}

TEST_CASE("char_poly of the zero matrix is a pure fifth power", "[algebra]") {
    Poly p = char_poly(Mat5{}, absolute_form());
    auto roots = real_roots(p);
    REQUIRE(roots.size() == 1);
    REQUIRE(roots[0].t == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(roots[0].multiplicity == 5);
    for (double t : {0.5, -2.0, 3.0}) REQUIRE(std::abs(p.eval(t)) == Catch::Approx(std::pow(std::abs(t), 5)));
}

TEST_CASE("real_roots merges multiple roots", "[algebra]") {
    // (t^2+1)(t-3)^3
    Poly p = Poly(std::vector<double>{1, 0, 1}) * poly_from_roots({3, 3, 3});
    auto roots = real_roots(p);
    REQUIRE(roots.size() == 1);
    REQUIRE(roots[0].t == Catch::Approx(3.0).margin(1e-8));
    REQUIRE(roots[0].multiplicity == 3);

    // evaluation oracle: the shifted polynomial vanishes to third order
    Poly sh = p.shifted(roots[0].t);
    REQUIRE(std::abs(sh.c[0]) < 1e-8);
    REQUIRE(std::abs(sh.c[1]) < 1e-7);
    REQUIRE(std::abs(sh.c[2]) < 1e-6);
    REQUIRE(std::abs(sh.c[3]) > 1e-3);
}

TEST_CASE("real_roots matches an independent eigenvalue solver", "[algebra]") {
    std::mt19937_64 rng(20240811);
    for (int trial = 0; trial < 40; ++trial) {
        Mat5 a = random_symmetric(rng);
        auto mine = real_roots(char_poly(a, absolute_form()));
        auto oracle = fixtures::real_pencil_eigenvalues_oracle(a);
        size_t total = 0;
        for (auto& r : mine) total += size_t(r.multiplicity);
        REQUIRE(total == oracle.size());
        size_t k = 0;
        for (auto& r : mine)
            for (int m = 0; m < r.multiplicity; ++m, ++k)
                REQUIRE(r.t == Catch::Approx(oracle[k]).margin(1e-6 * (1.0 + std::abs(oracle[k]))));
    }
}

TEST_CASE("inertia of diagonal cones", "[algebra]") {
    auto in1 = inertia(Mat5::diagonal(Vec5{{-1, 0, 2, 3, -1}}));
    REQUIRE(in1 == Inertia{2, 2, 1});
    auto in2 = inertia(Mat5::diagonal(Vec5{{0, 1, 3, 4, -2}}));
    REQUIRE(in2 == Inertia{3, 1, 1});
    auto in3 = inertia(absolute_form());
    REQUIRE(in3 == Inertia{4, 1, 0});
}

TEST_CASE("inertia is congruence invariant", "[algebra]") {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 40; ++trial) {
        Mat5 c = random_symmetric(rng);
        Mat5 m;
        do {
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j) m(i, j) = g(rng);
        } while (std::abs(determinant(m)) < 1e-3);
        Mat5 mc = (m.transposed() * c * m).symmetrized();
        REQUIRE(inertia(mc) == inertia(c));
    }
}

TEST_CASE("congruence_diagonalize normal form", "[algebra]") {
    SECTION("already in normal form") {
        Mat5 c = Mat5::diagonal(Vec5{{1, 1, -1, -1, 0}});
        auto cg = congruence_diagonalize(c);
        for (int i = 0; i < 5; ++i)
            REQUIRE(cg.d[i] == Catch::Approx(c(i, i)).margin(1e-12));
    }
    SECTION("permutation case") {
        Mat5 c = Mat5::diagonal(Vec5{{-3, -2, 0, 1, 1}});
        auto cg = congruence_diagonalize(c);
        Vec5 want{{1, 1, -3, -2, 0}};
        for (int i = 0; i < 5; ++i) REQUIRE(cg.d[i] == Catch::Approx(want[i]).margin(1e-12));
    }
    SECTION("round trip under random congruence") {
        std::mt19937_64 rng(99);
        std::normal_distribution<double> g;
        Mat5 d0 = Mat5::diagonal(Vec5{{2, 1, -1, -3, 0}});
        for (int trial = 0; trial < 20; ++trial) {
            Mat5 m;
            do {
                for (int i = 0; i < 5; ++i)
                    for (int j = 0; j < 5; ++j) m(i, j) = g(rng);
            } while (std::abs(determinant(m)) < 1e-3);
            Mat5 c = (m.transposed() * d0 * m).symmetrized();
            auto cg = congruence_diagonalize(c);
            Mat5 back = cg.k.transposed() * c * cg.k;
            for (int i = 0; i < 5; ++i)
                for (int j = 0; j < 5; ++j) {
                    double want = (i == j) ? cg.d[i] : 0.0;
                    REQUIRE(back(i, j) == Catch::Approx(want).margin(1e-9 * (1.0 + c.max_abs())));
                }
            REQUIRE(inertia(c) == inertia(d0));
        }
    }
    SECTION("signature mismatch is rejected") {
        REQUIRE_THROWS_AS(congruence_diagonalize(absolute_form()), Error);
    }
}

TEST_CASE("null_space of cone matrices", "[algebra]") {
    Pencil p = fixtures::six_family_pencil();
    auto ker = null_space(cone_matrix(p, 0.0));
    REQUIRE(ker.size() == 1);
    REQUIRE(proj_equal(ker[0], ProjPoint(Vec5{{0, 0, 0, 0, 1}})));

    REQUIRE(null_space(absolute_form()).empty());

    auto ker4 = null_space(Mat5::diagonal(Vec5{{-3, -2, 0, 1, 1}}));
    REQUIRE(ker4.size() == 1);
    REQUIRE(proj_equal(ker4[0], ProjPoint(Vec5{{0, 0, 1, 0, 0}})));

    // residual bound on random singular matrices
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 10; ++trial) {
        Mat5 a = random_symmetric(rng);
        auto roots = real_roots(char_poly(a, absolute_form()));
        REQUIRE(!roots.empty());
        Mat5 c = a - absolute_form() * roots[0].t;
        for (const auto& v : null_space(c, Tolerance{1e-7})) {
            Vec5 cv = c * v.x;
            REQUIRE(norm(cv) <= 1e-7 * (1.0 + c.max_abs()));
        }
    }
}

TEST_CASE("eval_quadric", "[algebra]") {
    ProjPoint on(Vec5{{1, 0, 0, 0, 1}});
    REQUIRE(eval_quadric(absolute_form(), on) == Catch::Approx(0.0).margin(1e-14));
    ProjPoint center(Vec5{{0, 0, 0, 0, 1}});
    REQUIRE(eval_quadric(absolute_form(), center) == Catch::Approx(-1.0));
}
