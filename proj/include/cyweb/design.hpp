#pragma once

#include <vector>

#include "cyweb/families.hpp"

namespace cyweb {

struct Line3 {
    Vec3 point{};
    Vec3 dir{};
};

namespace detail {

inline std::array<double, 10> quadric3_monomials(const Vec4& p) {
    double w = p[0], x = p[1], y = p[2], z = p[3];
    return {w * w, x * x, y * y, z * z, w * x, w * y, w * z, x * y, x * z, y * z};
}

inline Mat4 quadric3_from_coeffs(const std::vector<double>& q) {
    Mat4 m;
    m(0, 0) = q[0]; m(1, 1) = q[1]; m(2, 2) = q[2]; m(3, 3) = q[3];
    m(0, 1) = m(1, 0) = q[4] / 2;
    m(0, 2) = m(2, 0) = q[5] / 2;
    m(0, 3) = m(3, 0) = q[6] / 2;
    m(1, 2) = m(2, 1) = q[7] / 2;
    m(1, 3) = m(3, 1) = q[8] / 2;
    m(2, 3) = m(3, 2) = q[9] / 2;
    return m;
}

/// Unique quadric through three lines of a projective 3-space, each line
/// given by two spanning points.  Nine point conditions pin the ten
/// coefficients; a second small singular value flags a degenerate
/// configuration.
inline Mat4 quadric_through_lines(const std::array<std::pair<Vec4, Vec4>, 3>& lines) {
    std::vector<double> rows;
    rows.reserve(90);
    for (const auto& [a, b] : lines) {
        for (auto [la, lb] : {std::pair{1.0, 0.0}, std::pair{0.0, 1.0}, std::pair{1.0, 1.0}}) {
            Vec4 p = a * la + b * lb;
            p = p / std::max(norm(p), 1e-300);
            auto mono = quadric3_monomials(p);
            rows.insert(rows.end(), mono.begin(), mono.end());
        }
    }
    SvdRight s = svd_right(rows, 9, 10);
    if (s.sigma[8] <= 1e-7 * s.sigma[0])
        throw Error(ErrorKind::invalid_input,
                    "quadric through lines is not unique (degenerate configuration)");
    return quadric3_from_coeffs(s.v[9]);
}

}  // namespace detail

/// The quadric in R^3 containing three pairwise skew lines, as a symmetric
/// matrix on homogeneous coordinates (1, x, y, z).
inline Quadric3 ruled_quadric_through_lines(const Line3& a1, const Line3& a2, const Line3& a3,
                                            const Tolerance& tol = {}) {
    const Line3* ls[3] = {&a1, &a2, &a3};
    double scale = 1.0;
    for (auto* l : ls) scale = std::max(scale, norm(l->point));
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            Vec3 w = ls[size_t(j)]->point - ls[size_t(i)]->point;
            double vol = std::abs(dot(cross(normalized(ls[size_t(i)]->dir), normalized(ls[size_t(j)]->dir)), w));
            if (vol <= 1e-10 * (1.0 + scale))
                throw Error(ErrorKind::invalid_input, "ruled_quadric_through_lines: lines are not pairwise skew");
        }
    std::array<std::pair<Vec4, Vec4>, 3> plines;
    for (int i = 0; i < 3; ++i) {
        const Vec3& p = ls[size_t(i)]->point;
        Vec3 d = normalized(ls[size_t(i)]->dir);
        plines[size_t(i)] = {Vec4{{1, p[0], p[1], p[2]}}, Vec4{{0, d[0], d[1], d[2]}}};
    }
    Mat4 q = detail::quadric_through_lines(plines);
    // a quadric through three skew lines is ruled: signature (2,2)
    EigenSym<4> e = eigen_sym(q);
    int np = 0, nm = 0;
    for (int i = 0; i < 4; ++i) {
        if (e.values[i] > tol.at(q.max_abs())) ++np;
        if (e.values[i] < -tol.at(q.max_abs())) ++nm;
    }
    if (np != 2 || nm != 2)
        throw Error(ErrorKind::numerical, "ruled_quadric_through_lines: fit is not a ruled quadric");
    double m = q.max_abs();
    return q * (1.0 / m);
}

struct DesignInputThreeCircles {
    MSphere B;
    MCircle k1, k2, k3;
};

namespace detail {

inline Mat5 cone_through_circle_planes(const ProjPoint& v,
                                       const std::array<const MCircle*, 3>& circles,
                                       double ortho_tol) {
    Vec5 jv = absolute_form() * v.x;
    // orthonormal basis of the polar hyperplane of v
    std::vector<double> row(5);
    for (int i = 0; i < 5; ++i) row[size_t(i)] = jv[i];
    auto ns = null_space_of(row, 1, 5, 1e-9);
    if (ns.size() != 4) throw Error(ErrorKind::numerical, "degenerate polar hyperplane");
    std::array<Vec5, 4> e;
    for (int k = 0; k < 4; ++k)
        for (int i = 0; i < 5; ++i) e[size_t(k)][i] = ns[size_t(k)][size_t(i)];

    std::array<std::pair<Vec4, Vec4>, 3> lines;
    for (int c = 0; c < 3; ++c) {
        auto [p1, p2] = circles[size_t(c)]->polar_line();
        for (const ProjPoint* pp : {&p1, &p2}) {
            if (std::abs(minkowski(*pp, v)) > ortho_tol)
                throw Error(ErrorKind::invalid_input,
                            "circle is not orthogonal to the prescribed sphere");
        }
        Vec4 c1, c2;
        for (int k = 0; k < 4; ++k) {
            c1[k] = dot(e[size_t(k)], p1.x);
            c2[k] = dot(e[size_t(k)], p2.x);
        }
        lines[size_t(c)] = {c1, c2};
    }
    // pairwise skew (= circles pairwise non-co-spherical)
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            Mat4 m;
            for (int r = 0; r < 4; ++r) {
                m(r, 0) = lines[size_t(i)].first[r];
                m(r, 1) = lines[size_t(i)].second[r];
                m(r, 2) = lines[size_t(j)].first[r];
                m(r, 3) = lines[size_t(j)].second[r];
            }
            if (std::abs(determinant(m)) <= 1e-10)
                throw Error(ErrorKind::invalid_input, "two of the circles lie on a common sphere");
        }
    Mat4 m4 = quadric_through_lines(lines);

    // extend the dual quadric to P^4 with kernel J v, then dualize back
    Mat5 f;
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 4; ++j) f(i, j) = e[size_t(j)][i];
        f(i, 4) = jv[i];
    }
    Mat5 finv = inverse(f);
    Mat5 ntil;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) ntil(i, j) = m4(i, j);
    Mat5 n = (finv.transposed() * ntil * finv).symmetrized();
    Mat5 c = (absolute_form() * pseudo_inverse_sym(n, 1e-9) * absolute_form()).symmetrized();
    double mx = c.max_abs();
    return c * (1.0 / mx);
}

}  // namespace detail

/// Cyclide through three prescribed circles orthogonal to an M-sphere B.
/// In the spherical model the polar lines of the circles span a ruled
/// quadric inside the polar hyperplane of B*; its dual is a quadratic cone
/// through the carrier.  A plane B is first moved to a sphere by a fixed
/// inversion and the result is transformed back.
inline Cyclide cyclide_from_three_circles(const DesignInputThreeCircles& in,
                                          const Tolerance& tol = {}) {
    const double ortho_tol = std::max(tol.rel, 1e-7);
    if (in.B.classify(Tolerance{1e-9}) == SphereClass::null_sphere && !in.B.is_plane())
        throw Error(ErrorKind::invalid_input, "design sphere must not be a point");

    if (in.B.is_plane(Tolerance{1e-9})) {
        // conjugate by an inversion that maps the plane to a sphere
        Vec3 n = normalized(in.B.plane_normal());
        double offset = in.B.plane_offset() / norm(in.B.plane_normal());
        Vec3 centroid{};
        int cnt = 0;
        for (const MCircle* k : {&in.k1, &in.k2, &in.k3}) {
            CircleView v = k->view();
            if (v.kind == CircleView::Kind::circle) {
                centroid += v.center;
                ++cnt;
            }
        }
        if (cnt > 0) centroid = centroid / double(cnt);
        Vec3 foot = centroid - n * (dot(n, centroid) - offset);
        MSphere inv_sphere = MSphere::from_center_radius2(foot + n, 1.0);
        Mat5 m = inversion_matrix(inv_sphere);
        auto map_circle = [&](const MCircle& k) {
            Mat5 mt = m.transposed();
            return MCircle(ProjPoint(mt * k.h1.x), ProjPoint(mt * k.h2.x));
        };
        DesignInputThreeCircles moved;
        moved.B = MSphere(apply(m, in.B.penta));
        moved.k1 = map_circle(in.k1);
        moved.k2 = map_circle(in.k2);
        moved.k3 = map_circle(in.k3);
        if (moved.B.is_plane(Tolerance{1e-9}))
            throw Error(ErrorKind::numerical, "conjugating inversion failed to move the plane");
        Cyclide d = cyclide_from_three_circles(moved, tol);
        Mat5 a = to_pencil(d).A;
        Mat5 back = (m.transposed() * a * m).symmetrized();
        back = back + absolute_form() * (-frobenius_j(back) / 5.0);
        return from_pencil(Pencil{back});
    }

    std::array<const MCircle*, 3> circles{&in.k1, &in.k2, &in.k3};
    Mat5 cone = detail::cone_through_circle_planes(in.B.penta, circles, ortho_tol);
    Mat5 a = cone + absolute_form() * (-frobenius_j(cone) / 5.0);
    return from_pencil(Pencil{a});
}

struct DesignInputQuad {
    std::array<Vec3, 4> P;
    MSphere B;
    Vec3 extra_point{};
};

struct BoundaryArc {
    MCircle circle;
    Vec3 a{}, b{};  // arc endpoints (consecutive quad corners)
};

struct QuadDesignResult {
    Cyclide cyclide;
    std::array<BoundaryArc, 4> boundary;
    MCircle through_extra;  // the auxiliary circle through the extra point
};

/// Hyperplane through the plane of a circle and one additional point,
/// i.e. the sphere spanned by them; returned as a pole.
inline MSphere sphere_through(const MCircle& k, const ProjPoint& x) {
    double a = dot(k.h1.x, x.x), b = dot(k.h2.x, x.x);
    Vec5 h = k.h1.x * b - k.h2.x * a;
    if (norm(h) <= 1e-12)
        throw Error(ErrorKind::invalid_input, "point lies on the circle; sphere is not unique");
    return MSphere(ProjPoint(absolute_form() * h));
}

/// Cyclide patch from a quad and a surface point: each edge is completed to
/// the circle through the edge and its reflection in B, a fifth circle is
/// drawn through the extra point, and the three-circle construction runs on
/// two opposite boundaries plus that circle.
inline QuadDesignResult cyclide_from_quad(const DesignInputQuad& in, const Tolerance& tol = {}) {
    for (int i = 0; i < 4; ++i) {
        if (norm(in.P[size_t(i)] - in.P[size_t((i + 1) % 4)]) <= 1e-12)
            throw Error(ErrorKind::invalid_input, "quad has coincident consecutive corners");
    }
    Mat5 m = inversion_matrix(in.B);
    auto reflect = [&](const Vec3& x) { return invert_point(in.B, x); };

    QuadDesignResult out;
    std::array<MCircle, 4> edges;
    for (int i = 0; i < 4; ++i) {
        const Vec3& p = in.P[size_t(i)];
        const Vec3& q = in.P[size_t((i + 1) % 4)];
        Vec3 pr = reflect(p);
        if (norm(pr - p) <= 1e-12)
            throw Error(ErrorKind::invalid_input, "quad corner lies on the mirror sphere");
        edges[size_t(i)] = MCircle::through_points(p, q, pr);
        out.boundary[size_t(i)] = BoundaryArc{edges[size_t(i)], p, q};
    }
    (void)m;
    ProjPoint xp = stereo_lift(in.extra_point);
    // the circle through the extra point connects two opposite boundaries
    // and belongs to the family of the other pair; symmetric quads can make
    // one pairing co-spherical, so fall back to the other one
    auto attempt = [&](int first) -> QuadDesignResult {
        MSphere s1 = sphere_through(edges[size_t(first)], xp);
        MSphere s3 = sphere_through(edges[size_t(first + 2)], xp);
        MCircle k5 = MCircle::from_spheres(s1, s3);
        QuadDesignResult r = out;
        r.through_extra = k5;
        DesignInputThreeCircles three{in.B, edges[size_t((first + 1) % 4)],
                                      edges[size_t((first + 3) % 4)], k5};
        r.cyclide = cyclide_from_three_circles(three, tol);
        return r;
    };
    try {
        return attempt(0);
    } catch (const Error& e) {
        if (e.kind != ErrorKind::invalid_input) throw;
    }
    try {
        return attempt(1);
    } catch (const Error& e) {
        if (e.kind != ErrorKind::invalid_input) throw;
    }

    // mirror-symmetric quads defeat both reductions: every opposite edge
    // pair is co-spherical.  Fit the lift quadric through all six circle
    // planes and the extra point instead; when this pins a unique quadric
    // (for symmetric input a sphere pair), return it.
    std::vector<MCircle> all(edges.begin(), edges.end());
    for (int first : {0, 1}) {
        MSphere s1 = sphere_through(edges[size_t(first)], xp);
        MSphere s3 = sphere_through(edges[size_t(first + 2)], xp);
        all.push_back(MCircle::from_spheres(s1, s3));
    }
    out.through_extra = all[4];
    std::vector<double> rows;
    auto push_row = [&](const Vec5& x, const Vec5& y) {
        Mat5 o = (outer(x, y) + outer(y, x)) * 0.5;
        for (int i = 0; i < 5; ++i)
            for (int j = i; j < 5; ++j) rows.push_back(o(i, j) * (i == j ? 1.0 : 2.0));
    };
    for (const MCircle& k : all) {
        auto basis = k.plane_basis();
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) push_row(basis[size_t(i)], basis[size_t(j)]);
    }
    push_row(xp.x, xp.x);
    int nrows = int(rows.size() / 15);
    SvdRight sv = svd_right(rows, nrows, 15);
    if (sv.sigma[13] <= 1e-8 * sv.sigma[0])
        throw Error(ErrorKind::invalid_input, "cyclide_from_quad: boundary does not determine a surface");
    Mat5 c;
    {
        const auto& v = sv.v[14];
        int k = 0;
        for (int i = 0; i < 5; ++i)
            for (int j = i; j < 5; ++j, ++k) c(i, j) = c(j, i) = v[size_t(k)];
    }
    Mat5 a = c + absolute_form() * (-frobenius_j(c) / 5.0);
    out.cyclide = from_pencil(Pencil{a});
    return out;
}

struct ConicInput {
    PlaneFrame plane;
    Mat3 matrix{};  // conic in (u, v, 1) plane coordinates

    static ConicInput circle(const Vec3& center, double r, const Vec3& normal) {
        ConicInput c;
        c.plane.normal = normalized(normal);
        c.plane.origin = center;
        Vec3 seed = std::abs(c.plane.normal[0]) < 0.9 ? Vec3{{1, 0, 0}} : Vec3{{0, 1, 0}};
        c.plane.e1 = normalized(cross(c.plane.normal, seed));
        c.plane.e2 = cross(c.plane.normal, c.plane.e1);
        c.matrix = Mat3::diagonal(Vec3{{1, 1, -r * r}});
        return c;
    }
    static ConicInput ellipse(const Vec3& center, const Vec3& e1, const Vec3& e2, double a, double b) {
        ConicInput c;
        c.plane.origin = center;
        c.plane.e1 = normalized(e1);
        c.plane.normal = normalized(cross(e1, e2));
        c.plane.e2 = cross(c.plane.normal, c.plane.e1);
        c.matrix = Mat3::diagonal(Vec3{{1.0 / (a * a), 1.0 / (b * b), -1.0}});
        return c;
    }
};

/// Envelope of the spheres centered on the conic g and orthogonal to the
/// M-circle b lying in the plane of g.  Assembled dually: the sphere poles
/// trace a conic inside the 2-plane of b, whose polar dual is a rank-3
/// cone through the carrier.
inline Cyclide canal_cyclide(const ConicInput& g, const MCircle& b, const Tolerance& tol = {}) {
    EigenSym<3> ge = eigen_sym(g.matrix);
    int nz = 0;
    for (int i = 0; i < 3; ++i)
        if (std::abs(ge.values[i]) <= 1e-10 * g.matrix.max_abs()) ++nz;
    if (nz > 0) throw Error(ErrorKind::invalid_input, "canal_cyclide: conic is degenerate");

    auto basis = b.plane_basis();
    // projected basis in homogeneous 3-space
    std::array<Vec4, 3> img;
    for (int k = 0; k < 3; ++k) {
        const Vec5& x = basis[size_t(k)];
        img[size_t(k)] = Vec4{{x[0], x[1], x[2], x[4] - x[3]}};
    }
    // plane-coordinate map and coplanarity check
    Mat3 proj;
    double worst = 0;
    for (int k = 0; k < 3; ++k) {
        const Vec4& y = img[size_t(k)];
        Vec3 yy{{y[0], y[1], y[2]}};
        Vec3 rel = yy - g.plane.origin * y[3];
        proj(0, k) = dot(rel, g.plane.e1);
        proj(1, k) = dot(rel, g.plane.e2);
        proj(2, k) = y[3];
        worst = std::max(worst, std::abs(dot(rel, g.plane.normal)) / std::max(1.0, norm(yy)));
    }
    if (worst > std::max(tol.rel, 1e-7) * 10)
        throw Error(ErrorKind::invalid_input, "canal_cyclide: circle b is not coplanar with g");

    Mat3 mc = (proj.transposed() * g.matrix * proj).symmetrized();  // conic in plane-of-b coords

    Mat5 f;
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 3; ++j) f(i, j) = basis[size_t(j)][i];
        f(i, 3) = b.h1[i];
        f(i, 4) = b.h2[i];
    }
    Mat5 finv = inverse(f);
    Mat5 ntil;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) ntil(i, j) = mc(i, j);
    Mat5 n = (finv.transposed() * ntil * finv).symmetrized();
    Mat5 c = (absolute_form() * pseudo_inverse_sym(n, 1e-9) * absolute_form()).symmetrized();
    Mat5 a = c + absolute_form() * (-frobenius_j(c) / 5.0);
    return from_pencil(Pencil{a});
}

}  // namespace cyweb
