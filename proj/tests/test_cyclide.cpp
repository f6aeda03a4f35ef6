#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"

using namespace cyweb;
using fixtures::ring_torus;
using fixtures::six_family_pencil;
using fixtures::torus_point;

TEST_CASE("evaluation of quartic coefficients", "[cyclide]") {
    Cyclide sphere;
    sphere.Qquad = Mat3::identity();
    sphere.Qconst = -1;
    REQUIRE(sphere.eval(Vec3{{1, 0, 0}}) == Catch::Approx(0.0).margin(1e-15));

    Cyclide torus = ring_torus();
    REQUIRE(torus.eval(Vec3{{3, 0, 0}}) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(torus.eval(Vec3{{0, 0, 0}}) == Catch::Approx(9.0));
    for (double th : {0.3, 1.1, 2.9})
        for (double ph : {0.0, 0.7, 2.2})
            REQUIRE(std::abs(torus.eval(torus_point(th, ph))) < 1e-12 * torus.scale() * 100);
}

TEST_CASE("lift of the torus to a pencil", "[cyclide]") {
    Cyclide torus = ring_torus();
    Pencil p = to_pencil(torus);
    // sampled surface points lift onto the carrier
    for (double th : {0.1, 1.3, 2.7, 4.0})
        for (double ph : {0.2, 1.5, 3.0, 5.1}) {
            Vec3 x = torus_point(th, ph);
            ProjPoint lifted = stereo_lift(x);
            REQUIRE(std::abs(minkowski(lifted, lifted)) < 1e-12);
            REQUIRE(std::abs(eval_quadric(p.A, lifted)) < 1e-8 * p.A.max_abs());
        }
}

TEST_CASE("pencil round trips", "[cyclide]") {
    SECTION("six-family pencil") {
        Pencil p = six_family_pencil();
        Cyclide d = from_pencil(p);
        Pencil p2 = to_pencil(d);
        // same projective quadric up to the canonical normalization
        Mat5 a = p.A;
        double n = 0;
        for (double x : a.m) n += x * x;
        a = a * (1.0 / std::sqrt(n));
        double dev = std::min((a - p2.A).max_abs(), (a + p2.A).max_abs());
        REQUIRE(dev < 1e-9);
    }
    SECTION("random coefficient round trip") {
        std::mt19937_64 rng(41);
        std::normal_distribution<double> g;
        for (int i = 0; i < 30; ++i) {
            Cyclide d;
            d.lambda = g(rng);
            d.L = Vec3{{g(rng), g(rng), g(rng)}};
            for (int r = 0; r < 3; ++r)
                for (int c = r; c < 3; ++c) d.Qquad(r, c) = d.Qquad(c, r) = g(rng);
            d.Qlin = Vec3{{g(rng), g(rng), g(rng)}};
            d.Qconst = g(rng);
            if (d.is_zero()) continue;
            Cyclide back = from_pencil(to_pencil(d));
            REQUIRE(fixtures::coeff_ratio_deviation(back, d) < 1e-9);
        }
    }
    SECTION("multiple of the absolute sphere is rejected") {
        REQUIRE_THROWS_AS(from_pencil(Pencil{absolute_form()}), Error);
    }
}

TEST_CASE("classification of cyclides", "[cyclide]") {
    Cyclide sphere;
    sphere.Qquad = Mat3::identity();
    sphere.Qconst = -1;
    REQUIRE(classify(sphere) == CyclideClass::trivial);

    // imaginary sphere is still of the trivial shape
    Cyclide imag;
    imag.Qquad = Mat3::identity();
    imag.Qconst = 1;
    REQUIRE(classify(imag) == CyclideClass::trivial);

    // product of two concentric spheres
    Cyclide pair;
    pair.lambda = 1;
    pair.Qquad = Mat3::diagonal(Vec3{{-5, -5, -5}});
    pair.Qconst = 4;
    REQUIRE(classify(pair) == CyclideClass::reducible);
    REQUIRE(classify(fixtures::concentric_pair()) == CyclideClass::reducible);

    REQUIRE(classify(from_pencil(six_family_pencil())) == CyclideClass::irreducible);
    REQUIRE(classify(ring_torus()) == CyclideClass::irreducible);
    REQUIRE(classify(fixtures::rotational_five_family()) == CyclideClass::irreducible);

    // empty quartic (x^2+y^2+z^2)^2 + 1
    Cyclide empty;
    empty.lambda = 1;
    empty.Qconst = 1;
    REQUIRE(classify(empty) == CyclideClass::reducible);

    Cyclide zero;
    REQUIRE_THROWS_AS(classify(zero), Error);
}

TEST_CASE("ideal point lies on the carrier exactly for vanishing quartic part", "[cyclide]") {
    Pencil quadric = to_pencil(fixtures::hyperboloid_quadric());
    REQUIRE(std::abs(eval_quadric(quadric.A, ideal_point())) < 1e-12);
    Pencil torus = to_pencil(ring_torus());
    REQUIRE(std::abs(eval_quadric(torus.A, ideal_point())) > 1e-3 * torus.A.max_abs());
}

TEST_CASE("symmetry spheres of the six-family pencil", "[cyclide]") {
    Pencil p = six_family_pencil();
    auto spheres = symmetry_spheres(p);
    REQUIRE(spheres.size() == 5);
    int planes = 0, imaginary = 0, real = 0;
    for (const auto& s : spheres) {
        if (s.is_plane()) ++planes;
        else if (s.classify() == SphereClass::imaginary_sphere) ++imaginary;
        else if (s.classify() == SphereClass::real_sphere) ++real;
    }
    REQUIRE(planes == 3);
    REQUIRE(imaginary == 1);
    REQUIRE(real == 1);
    for (size_t i = 0; i < spheres.size(); ++i)
        for (size_t j = i + 1; j < spheres.size(); ++j)
            REQUIRE(orthogonal(spheres[i], spheres[j], Tolerance{1e-9}));
}

TEST_CASE("symmetry sphere counts track eigenvalue multiplicities", "[cyclide]") {
    REQUIRE(symmetry_spheres(to_pencil(ring_torus())).size() == 1);
    REQUIRE(symmetry_spheres(to_pencil(fixtures::rotational_five_family())).size() == 3);
}

TEST_CASE("inversion in a symmetry sphere preserves the surface", "[cyclide]") {
    Pencil p = six_family_pencil();
    Cyclide d = from_pencil(p);
    auto spheres = symmetry_spheres(p);
    Mesh mesh = sample_mesh(d, 12);
    int checked = 0;
    for (const auto& b : spheres) {
        Mat5 m = inversion_matrix(b);
        for (size_t i = 0; i < mesh.vertices.size(); i += 7) {
            ProjPoint img = apply(m, stereo_lift(mesh.vertices[i]));
            auto pr = stereo_project(img, Tolerance{1e-7});
            if (pr.infinite) continue;
            REQUIRE(fixtures::surface_residual(d, pr.p) < 1e-7);
            ++checked;
        }
    }
    REQUIRE(checked > 50);
}
