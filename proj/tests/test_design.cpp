#include <catch2/catch_amalgamated.hpp>

#include "oracles.hpp"

using namespace cyweb;
using fixtures::ring_torus;
using fixtures::surface_residual;

namespace {

double max_mc_residual(const Cyclide& d, const MCircle& mc, int n = 64) {
    auto pts = mc.sample(n);
    REQUIRE(!pts.empty());
    double worst = 0;
    for (const Vec3& p : pts) worst = std::max(worst, surface_residual(d, p));
    return worst;
}

Line3 hyperboloid_ruling(double theta) {
    return Line3{Vec3{{std::cos(theta), std::sin(theta), 0}},
                 Vec3{{-std::sin(theta), std::cos(theta), 1}}};
}

}  // namespace

TEST_CASE("ruled quadric through three skew lines", "[design]") {
    SECTION("rulings of a rotational hyperboloid") {
        Mat4 q = ruled_quadric_through_lines(hyperboloid_ruling(0.0), hyperboloid_ruling(1.2),
                                             hyperboloid_ruling(2.9));
        // compare against x^2 + y^2 - z^2 - 1 up to scale
        Mat4 want;
        want(1, 1) = 1; want(2, 2) = 1; want(3, 3) = -1; want(0, 0) = -1;
        double ratio = q(1, 1) / want(1, 1);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                REQUIRE(q(i, j) == Catch::Approx(ratio * want(i, j)).margin(1e-7 * std::abs(ratio)));
        // residual on a fourth ruling
        Line3 extra = hyperboloid_ruling(4.4);
        for (double t : {-1.0, 0.0, 2.0}) {
            Vec3 pt = extra.point + extra.dir * t;
            Vec4 w{{1, pt[0], pt[1], pt[2]}};
            REQUIRE(std::abs(quadratic_form(q, w)) < 1e-7 * (1.0 + dot(w, w)) * std::abs(ratio));
        }
    }
    SECTION("rulings of the saddle z = x y") {
        auto ruling = [](double a) { return Line3{Vec3{{a, 0, 0}}, Vec3{{0, 1, a}}}; };
        Mat4 q = ruled_quadric_through_lines(ruling(-1.0), ruling(0.5), ruling(2.0));
        for (double a : {-2.0, 0.1, 1.3})
            for (double t : {-1.0, 0.7}) {
                Vec3 pt{{a, t, a * t}};
                Vec4 w{{1, pt[0], pt[1], pt[2]}};
                REQUIRE(std::abs(quadratic_form(q, w)) < 1e-7 * (1.0 + dot(w, w)) * q.max_abs());
            }
    }
    SECTION("intersecting lines are rejected") {
        Line3 a{Vec3{{0, 0, 0}}, Vec3{{1, 0, 0}}};
        Line3 b{Vec3{{0, 0, 0}}, Vec3{{0, 1, 0}}};
        Line3 c{Vec3{{0, 0, 1}}, Vec3{{1, 1, 0}}};
        REQUIRE_THROWS_AS(ruled_quadric_through_lines(a, b, c), Error);
    }
}

TEST_CASE("three oblique circles rebuild the torus", "[design]") {
    Cyclide torus = ring_torus();
    auto fams = extract_families(to_pencil(torus));
    const CircleFamily* pair = nullptr;
    for (const auto& f : fams)
        if (!f.is_single() && f.branch == 1) pair = &f;
    REQUIRE(pair != nullptr);

    DesignInputThreeCircles in;
    in.B = MSphere(pair->cone.vertex.at(0));
    in.k1 = circle_at(*pair, 0.3).mc;
    in.k2 = circle_at(*pair, 1.1).mc;
    in.k3 = circle_at(*pair, -0.7).mc;
    Cyclide d = cyclide_from_three_circles(in);
    REQUIRE(fixtures::coeff_ratio_deviation(d, torus) < 1e-6);
}

TEST_CASE("three circles over a plane", "[design]") {
    DesignInputThreeCircles in;
    in.B = MSphere::from_plane(Vec3{{0, 0, 1}}, 0.0);
    in.k1 = MCircle::from_center_radius_normal(Vec3{{0, 0, 0}}, 1.0, Vec3{{0, 1, 0}});
    in.k2 = MCircle::from_center_radius_normal(Vec3{{2.0, 0.5, 0}}, 1.4, Vec3{{1, 0, 0}});
    in.k3 = MCircle::from_center_radius_normal(Vec3{{-1.0, 1.5, 0}}, 0.8,
                                               normalized(Vec3{{1, 1, 0}}));
    Cyclide d = cyclide_from_three_circles(in);

    for (const MCircle* k : {&in.k1, &in.k2, &in.k3})
        REQUIRE(max_mc_residual(d, *k) < 1e-7);

    // mirror symmetry in the plane
    Mesh mesh = sample_mesh(d, 16);
    for (size_t i = 0; i < mesh.vertices.size(); i += 5) {
        Vec3 v = mesh.vertices[i];
        Vec3 mirrored{{v[0], v[1], -v[2]}};
        REQUIRE(surface_residual(d, mirrored) < 1e-7);
    }

    // recovered pair geometry reproduces the input plane
    auto fams = extract_families(to_pencil(d));
    bool found = false;
    for (const auto& f : fams) {
        if (f.is_single() || f.branch != 1) continue;
        auto geo = family_axis_geometry(f, fams[size_t(f.partner)]);
        if (geo.plane_degenerate && geo.B.is_plane(Tolerance{1e-6})) {
            Vec3 n = normalized(geo.B.plane_normal());
            if (std::abs(std::abs(n[2]) - 1.0) < 1e-6) found = true;
        }
    }
    REQUIRE(found);
}

TEST_CASE("co-spherical circles are rejected", "[design]") {
    DesignInputThreeCircles in;
    in.B = MSphere::from_plane(Vec3{{0, 0, 1}}, 0.0);
    // two great circles of the unit sphere
    in.k1 = MCircle::from_center_radius_normal(Vec3{{0, 0, 0}}, 1.0, Vec3{{1, 0, 0}});
    in.k2 = MCircle::from_center_radius_normal(Vec3{{0, 0, 0}}, 1.0, Vec3{{0, 1, 0}});
    in.k3 = MCircle::from_center_radius_normal(Vec3{{3, 0, 0}}, 1.0, Vec3{{0, 1, 0}});
    REQUIRE_THROWS_AS(cyclide_from_three_circles(in), Error);
}

TEST_CASE("non-orthogonal circles are rejected", "[design]") {
    DesignInputThreeCircles in;
    in.B = MSphere::from_center_radius2(Vec3{{0, 0, 0}}, 1.0);
    in.k1 = MCircle::from_center_radius_normal(Vec3{{5, 0, 0}}, 1.0, Vec3{{0, 1, 0}});
    in.k2 = MCircle::from_center_radius_normal(Vec3{{0, 5, 0}}, 1.0, Vec3{{1, 0, 0}});
    in.k3 = MCircle::from_center_radius_normal(Vec3{{0, 0, 5}}, 1.0, Vec3{{1, 0, 0}});
    REQUIRE_THROWS_AS(cyclide_from_three_circles(in), Error);
}

TEST_CASE("cyclide patch from a quad", "[design]") {
    SECTION("generic planar quad over the base plane") {
        DesignInputQuad in;
        in.P = {Vec3{{2, 0.8, 0.5}}, Vec3{{-1.2, 1.5, 0.5}}, Vec3{{-1, -1.8, 0.5}},
                Vec3{{1.5, -1, 0.5}}};
        in.B = MSphere::from_plane(Vec3{{0, 0, 1}}, 0.0);
        in.extra_point = Vec3{{0.4, 0.1, 1.3}};
        auto out = cyclide_from_quad(in);
        for (const auto& arc : out.boundary) {
            REQUIRE(max_mc_residual(out.cyclide, arc.circle) < 1e-7);
            // boundary circles are orthogonal to B
            auto [p1, p2] = arc.circle.polar_line();
            REQUIRE(std::abs(minkowski(p1, in.B.penta)) < 1e-9);
            REQUIRE(std::abs(minkowski(p2, in.B.penta)) < 1e-9);
        }
        REQUIRE(surface_residual(out.cyclide, in.extra_point) < 1e-9);
        for (const Vec3& corner : in.P) REQUIRE(surface_residual(out.cyclide, corner) < 1e-9);
    }
    SECTION("mirror-symmetric planar quad splits into a sphere pair") {
        // mirror images of circles orthogonal to the base plane are always
        // co-spherical, so a symmetric boundary pins a reducible quartic:
        // the symmetric patch through it lies on two spheres
        DesignInputQuad in;
        in.P = {Vec3{{2, 0.8, 0.5}}, Vec3{{-1.2, 1.5, 0.5}}, Vec3{{-1.2, -1.5, 0.5}},
                Vec3{{2, -0.8, 0.5}}};
        in.B = MSphere::from_plane(Vec3{{0, 0, 1}}, 0.0);
        in.extra_point = Vec3{{0.4, 0, 1.3}};
        auto out = cyclide_from_quad(in);
        for (const auto& arc : out.boundary)
            REQUIRE(max_mc_residual(out.cyclide, arc.circle) < 1e-7);
        REQUIRE(surface_residual(out.cyclide, in.extra_point) < 1e-9);
        REQUIRE(classify(out.cyclide) == CyclideClass::reducible);
        // symmetric in y -> -y: mirrored corners stay on the surface
        for (const Vec3& corner : in.P)
            REQUIRE(surface_residual(out.cyclide, Vec3{{corner[0], -corner[1], corner[2]}}) < 1e-9);
    }
    SECTION("quad of web corners reproduces its cyclide") {
        Cyclide known = ring_torus();
        auto fams = extract_families(to_pencil(known));
        const CircleFamily* a = nullptr;
        for (const auto& f : fams)
            if (!f.is_single() && f.branch == 1) a = &f;
        REQUIRE(a != nullptr);
        const CircleFamily& b = fams[size_t(a->partner)];
        // corners where two circles of one family meet two of its partner
        Circle a1 = circle_at(*a, 0.15), a2 = circle_at(*a, 0.85);
        Circle b1 = circle_at(b, -0.2), b2 = circle_at(b, 0.55);
        auto corner = [&](const Circle& u, const Circle& v) {
            auto pts = intersect_circles(u, v);
            REQUIRE(pts.size() == 2);
            return pts[0].p;
        };
        DesignInputQuad in;
        in.P = {corner(a1, b1), corner(a1, b2), corner(a2, b2), corner(a2, b1)};
        in.B = MSphere(a->cone.vertex.at(0));
        in.extra_point = circle_at(*a, 2.3).mc.sample(16).at(5);
        auto out = cyclide_from_quad(in);
        REQUIRE(fixtures::coeff_ratio_deviation(out.cyclide, known) < 1e-6);
    }
    SECTION("degenerate input is rejected") {
        DesignInputQuad in;
        in.P = {Vec3{{1, 1, 0.5}}, Vec3{{1, 1, 0.5}}, Vec3{{-1, -1, 0.5}}, Vec3{{1, -1, 0.5}}};
        in.B = MSphere::from_plane(Vec3{{0, 0, 1}}, 0.0);
        in.extra_point = Vec3{{0, 0, 1.2}};
        REQUIRE_THROWS_AS(cyclide_from_quad(in), Error);
        // extra point on a boundary circle
        DesignInputQuad in2;
        in2.P = {Vec3{{1, 1, 0.5}}, Vec3{{-1, 1, 0.5}}, Vec3{{-1, -1, 0.5}}, Vec3{{1, -1, 0.5}}};
        in2.B = MSphere::from_plane(Vec3{{0, 0, 1}}, 0.0);
        in2.extra_point = Vec3{{1, 1, -0.5}};  // the reflected corner lies on the edge circle
        REQUIRE_THROWS_AS(cyclide_from_quad(in2), Error);
    }
}

TEST_CASE("canal cyclide from conic and coplanar circle", "[design]") {
    SECTION("core circle and the orthogonal circle rebuild the torus") {
        ConicInput g = ConicInput::circle(Vec3{{0, 0, 0}}, 2.0, Vec3{{0, 0, 1}});
        MCircle b = MCircle::from_center_radius_normal(Vec3{{0, 0, 0}}, std::sqrt(3.0), Vec3{{0, 0, 1}});
        Cyclide d = canal_cyclide(g, b);
        REQUIRE(fixtures::coeff_ratio_deviation(d, ring_torus()) < 1e-7);
    }
    SECTION("null circle gives a canal surface through the point") {
        ConicInput g = ConicInput::circle(Vec3{{0, 0, 0}}, 2.0, Vec3{{0, 0, 1}});
        MCircle b = MCircle::from_center_radius2_normal(Vec3{{0, 0, 0}}, 0.0, Vec3{{0, 0, 1}});
        Cyclide d = canal_cyclide(g, b);
        REQUIRE(surface_residual(d, Vec3{{0, 0, 0}}) < 1e-9);
        auto fams = extract_families(to_pencil(d));
        int singles = 0;
        for (const auto& f : fams) singles += f.is_single();
        REQUIRE(singles >= 1);
    }
    SECTION("imaginary circle gives the two-point bundle case") {
        ConicInput g = ConicInput::circle(Vec3{{0, 0, 0}}, 2.0, Vec3{{0, 0, 1}});
        MCircle b = MCircle::from_center_radius2_normal(Vec3{{0, 0, 0}}, -1.0, Vec3{{0, 0, 1}});
        Cyclide d = canal_cyclide(g, b);
        auto fams = extract_families(to_pencil(d));
        // some single family must see the imaginary circle: its polar line
        // cuts the absolute sphere in the two fixed points of the bundle
        bool found = false;
        for (const auto& f : fams) {
            if (!f.is_single()) continue;
            auto geo = canal_geometry(f);
            auto [p1, p2] = geo.b.polar_line();
            if (classify_pencil_line(p1, p2) != PencilClass::hyperbolic) continue;
            found = true;
            double a = minkowski(p1, p1), bb = minkowski(p1, p2), c = minkowski(p2, p2);
            double disc = bb * bb - a * c;
            REQUIRE(disc > 0);
            for (double sgn : {1.0, -1.0}) {
                double u = (-bb + sgn * std::sqrt(disc)) / c;
                ProjPoint fixed_pt(p1.x + p2.x * u);
                auto e = stereo_project(fixed_pt, Tolerance{1e-6});
                REQUIRE(!e.infinite);
                REQUIRE(surface_residual(d, e.p) < 1e-6);
            }
        }
        REQUIRE(found);
    }
    SECTION("ellipse and a real circle give a Darboux canal surface") {
        ConicInput g = ConicInput::ellipse(Vec3{{0, 0, 0}}, Vec3{{1, 0, 0}}, Vec3{{0, 1, 0}}, 2.2, 1.6);
        MCircle b = MCircle::from_center_radius_normal(Vec3{{0.1, 0, 0}}, 1.2, Vec3{{0, 0, 1}});
        Cyclide d = canal_cyclide(g, b);
        auto fams = extract_families(to_pencil(d));
        int singles = 0;
        for (const auto& f : fams) singles += f.is_single();
        REQUIRE(singles >= 1);
        REQUIRE(singles <= 2);
    }
    SECTION("degenerate conic is rejected") {
        ConicInput g = ConicInput::circle(Vec3{{0, 0, 0}}, 2.0, Vec3{{0, 0, 1}});
        g.matrix = Mat3::diagonal(Vec3{{1, 0, 0}});
        MCircle b = MCircle::from_center_radius_normal(Vec3{{0, 0, 0}}, 1.0, Vec3{{0, 0, 1}});
        REQUIRE_THROWS_AS(canal_cyclide(g, b), Error);
    }
    SECTION("non-coplanar circle is rejected") {
        ConicInput g = ConicInput::circle(Vec3{{0, 0, 0}}, 2.0, Vec3{{0, 0, 1}});
        MCircle b = MCircle::from_center_radius_normal(Vec3{{0, 0, 1}}, 1.0, Vec3{{0, 0, 1}});
        REQUIRE_THROWS_AS(canal_cyclide(g, b), Error);
    }
}

TEST_CASE("designed pair geometry round trip", "[design]") {
    Cyclide torus = ring_torus();
    auto fams = extract_families(to_pencil(torus));
    const CircleFamily* pair = nullptr;
    for (const auto& f : fams)
        if (!f.is_single() && f.branch == 1) pair = &f;
    DesignInputThreeCircles in;
    in.B = MSphere(pair->cone.vertex.at(0));
    in.k1 = circle_at(*pair, 0.2).mc;
    in.k2 = circle_at(*pair, 0.9).mc;
    in.k3 = circle_at(*pair, -1.4).mc;
    Cyclide d = cyclide_from_three_circles(in);
    auto fams2 = extract_families(to_pencil(d));
    const CircleFamily* pair2 = nullptr;
    for (const auto& f : fams2)
        if (!f.is_single() && f.branch == 1) pair2 = &f;
    REQUIRE(pair2 != nullptr);
    auto geo = family_axis_geometry(*pair2, fams2[size_t(pair2->partner)]);
    REQUIRE(proj_equal(geo.B.penta, in.B.penta, 1e-7));
}
