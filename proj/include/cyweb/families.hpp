#pragma once

#include <optional>
#include <vector>

#include "cyweb/cyclide.hpp"

namespace cyweb {

struct ConeDatum {
    double t = 0;
    int multiplicity = 1;
    Mat5 c;
    Inertia sig;
    std::vector<ProjPoint> vertex;  // 1 point (rank 4) or 2 spanning a vertex line (rank 3)
    bool vertex_on_absolute = false;
};

enum class FamilyClass { paired_nonspecial, paired_special, single };

/// One family of circles: the planes P_branch(s) of one quadratic cone of
/// the pencil, pushed through the congruence that diagonalizes it.
struct CircleFamily {
    int id = -1;
    int partner = -1;  // other branch of the same cone, -1 for single families
    int branch = 1;    // 1 or 2
    FamilyClass cls = FamilyClass::single;
    ConeDatum cone;
    Mat5 K;   // orthogonal, K' C K = diag(d)
    Vec5 d;
    std::array<double, 4> k{};  // diag = (k1^2, k2^2, -k3^2, -k4^2, 0)
    Mat5 pencilA;               // owning pencil, for residual checks

    bool is_single() const { return cls == FamilyClass::single; }
    bool is_special() const { return cls == FamilyClass::paired_special; }
};

struct Circle {
    int family_id = -1;
    double s = 0;  // parameter on the projective line; +-inf is the point at infinity
    MCircle mc;
};

namespace detail {

inline std::pair<Vec5, Vec5> family_plane_normals(const CircleFamily& f, double s) {
    double k1 = f.k[0], k2 = f.k[1], k3 = f.k[2], k4 = f.k[3];
    Vec5 g1, g2;
    if (std::isinf(s)) {
        if (f.branch == 1) {
            g1 = Vec5{{0, k2, 0, -k4, 0}};
            g2 = Vec5{{k1, 0, k3, 0, 0}};
        } else {
            g1 = Vec5{{0, -k2, 0, -k4, 0}};
            g2 = Vec5{{k1, 0, k3, 0, 0}};
        }
    } else if (f.branch == 1) {
        g1 = Vec5{{k1, s * k2, -k3, -s * k4, 0}};
        g2 = Vec5{{s * k1, -k2, s * k3, -k4, 0}};
    } else {
        g1 = Vec5{{k1, -s * k2, -k3, -s * k4, 0}};
        g2 = Vec5{{s * k1, k2, s * k3, -k4, 0}};
    }
    // K orthogonal: hyperplane vectors transform as h = K g
    return {f.K * g1, f.K * g2};
}

}  // namespace detail

/// Circle families of an irreducible nontrivial cyclide, at most six.
/// A cone of signature (2,2,1) yields a partnered pair of families, one of
/// signature (2,1,2) or (1,2,2) a single family; other cones carry no
/// two-dimensional real plane family.
inline std::vector<CircleFamily> extract_families(const Pencil& p, const Tolerance& tol = {}) {
    CyclideClass cls = classify(from_pencil(p), tol);
    if (cls != CyclideClass::irreducible)
        throw Error(ErrorKind::invalid_input, "extract_families: cyclide must be irreducible and nontrivial");

    std::vector<CircleFamily> fams;
    auto roots = pencil_real_roots(p, tol);
    const Tolerance sig_tol{1e-7};
    for (const auto& rm : roots) {
        Mat5 c = cone_matrix(p, rm.t);
        Inertia sig = inertia(c, sig_tol);
        bool paired = sig == Inertia{2, 2, 1};
        bool single = sig == Inertia{2, 1, 2} || sig == Inertia{1, 2, 2};
        if (!paired && !single) continue;

        ConeDatum cone;
        cone.t = rm.t;
        cone.multiplicity = rm.multiplicity;
        cone.c = c;
        cone.sig = sig;
        cone.vertex = null_space(c, sig_tol);
        if (cone.vertex.size() != size_t(sig.n_zero))
            throw Error(ErrorKind::numerical, "extract_families: inconsistent cone kernel");
        cone.vertex_on_absolute =
            cone.vertex.size() == 1 && std::abs(minkowski(cone.vertex[0], cone.vertex[0])) <= 1e-7;

        Congruence cg = congruence_diagonalize(c, sig_tol);
        std::array<double, 4> k{};
        for (int i = 0; i < 4; ++i) k[size_t(i)] = std::sqrt(std::abs(cg.d[i]));

        CircleFamily f;
        f.cone = cone;
        f.K = cg.k;
        f.d = cg.d;
        f.k = k;
        f.pencilA = p.A;
        if (paired) {
            f.cls = cone.vertex_on_absolute ? FamilyClass::paired_special : FamilyClass::paired_nonspecial;
            f.branch = 1;
            f.id = int(fams.size());
            fams.push_back(f);
            f.branch = 2;
            f.id = int(fams.size());
            fams.push_back(f);
            fams[fams.size() - 2].partner = fams.back().id;
            fams.back().partner = int(fams.size()) - 2;
        } else {
            f.cls = FamilyClass::single;
            f.branch = 1;
            f.id = int(fams.size());
            fams.push_back(f);
        }
    }
    if (fams.size() > 6)
        throw Error(ErrorKind::numerical, "extract_families: more than six families is impossible");
    return fams;
}

inline Circle circle_at(const CircleFamily& f, double s) {
    auto [h1, h2] = detail::family_plane_normals(f, s);
    Circle c;
    c.family_id = f.id;
    c.s = s;
    c.mc = MCircle(ProjPoint(h1), ProjPoint(h2));
    return c;
}

/// Parameter of the family plane through a surface point.  Both plane
/// equations are linear in s; the 2x2 homogeneous system is rank one on
/// the carrier, so we read s off its kernel and verify consistency.
inline std::pair<double, Circle> circle_through_point(const CircleFamily& f, const Vec3& x,
                                                      const Tolerance& tol = {}) {
    Cyclide d = from_pencil(Pencil{f.pencilA});
    double resid = std::abs(d.eval(x));
    double local = (1.0 + dot(x, x)) * (1.0 + dot(x, x));
    if (resid > std::max(tol.rel, 1e-7) * local * d.scale())
        throw Error(ErrorKind::invalid_input, "circle_through_point: point is not on the cyclide");

    ProjPoint X = stereo_lift(x);
    Vec5 y = f.K.transposed() * X.x;
    double a = f.k[0] * y[0], b = f.k[1] * y[1], c = f.k[2] * y[2], dd = f.k[3] * y[3];
    // rows of the 2x2 system M (1,s)' = 0
    double m00, m01, m10, m11;
    if (f.branch == 1) {
        m00 = a - c; m01 = b - dd;
        m10 = -(b + dd); m11 = a + c;
    } else {
        m00 = a - c; m01 = -(b + dd);
        m10 = b - dd; m11 = a + c;
    }
    double scale = std::max({std::abs(m00), std::abs(m01), std::abs(m10), std::abs(m11)});
    if (scale <= 1e-14)
        throw Error(ErrorKind::numerical, "circle_through_point: family plane degenerate at the point");
    double det = m00 * m11 - m01 * m10;
    if (std::abs(det) > std::max(tol.rel, 1e-6) * scale * scale)
        throw Error(ErrorKind::numerical, "circle_through_point: inconsistent parameter equations");
    // kernel of the better-conditioned row
    double sig, tau;
    if (std::max(std::abs(m00), std::abs(m01)) >= std::max(std::abs(m10), std::abs(m11))) {
        sig = m01; tau = -m00;
    } else {
        sig = m11; tau = -m10;
    }
    double s = (std::abs(sig) <= 1e-12 * std::abs(tau))
                   ? std::numeric_limits<double>::infinity()
                   : tau / sig;
    Circle circ = circle_at(f, s);
    return {s, circ};
}

/// Intersection of two circles as 2-planes of P^4: a generic pair of
/// planes meets in one projective point (kept only if it lies on the
/// absolute sphere); planes sharing a line (co-spherical circles) meet the
/// absolute in 0 or 2 points.
inline std::vector<Point3OrInf> intersect_circles(const Circle& c1, const Circle& c2,
                                                  const Tolerance& tol = {}) {
    std::vector<double> rows(20);
    const ProjPoint* hs[4] = {&c1.mc.h1, &c1.mc.h2, &c2.mc.h1, &c2.mc.h2};
    for (int r = 0; r < 4; ++r)
        for (int j = 0; j < 5; ++j) rows[size_t(r * 5 + j)] = (*hs[size_t(r)])[j];
    auto ns = null_space_of(rows, 4, 5, std::max(tol.rel, 1e-8) * 10.0);
    std::vector<Point3OrInf> out;
    auto to_point = [&](const Vec5& raw) -> std::optional<Point3OrInf> {
        ProjPoint X(raw);
        if (std::abs(minkowski(X, X)) > 1e-6) return std::nullopt;
        double den = X[4] - X[3];
        if (std::abs(den) <= 1e-9) return Point3OrInf::inf();
        return Point3OrInf::at(Vec3{{X[0] / den, X[1] / den, X[2] / den}});
    };
    if (ns.size() >= 3)
        throw Error(ErrorKind::invalid_input, "intersect_circles: identical circles");
    if (ns.size() == 1) {
        Vec5 v;
        for (int i = 0; i < 5; ++i) v[i] = ns[0][size_t(i)];
        if (auto q = to_point(v)) out.push_back(*q);
        return out;
    }
    if (ns.size() == 2) {
        Vec5 pv, qv;
        for (int i = 0; i < 5; ++i) { pv[i] = ns[0][size_t(i)]; qv[i] = ns[1][size_t(i)]; }
        double a = minkowski(pv, pv), b = minkowski(pv, qv), cc = minkowski(qv, qv);
        double disc = b * b - a * cc;
        if (disc < 0) return out;
        double sd = std::sqrt(disc);
        if (std::abs(cc) > 1e-12 * std::max({std::abs(a), std::abs(b), 1e-30})) {
            for (double sgn : {1.0, -1.0}) {
                double u = (-b + sgn * sd) / cc;
                if (auto q = to_point(pv + qv * u)) out.push_back(*q);
            }
        } else {
            if (auto q = to_point(qv)) out.push_back(*q);
            if (std::abs(b) > 1e-13) {
                double u = -a / (2 * b);
                if (auto q = to_point(pv + qv * u)) out.push_back(*q);
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// polar-dual geometry of a family
// ---------------------------------------------------------------------------

/// Quadric in homogeneous 3-space coordinates (x, y, z, 1).
using Quadric3 = Mat4;

struct PairedFamilyGeometry {
    MSphere B;                    // all circles of the pair are orthogonal to B
    bool plane_degenerate = false;  // B is a plane; axes envelope a conic instead
    std::optional<Quadric3> axes_quadric;  // ruled quadric carrying the circle axes
};

namespace detail {

/// Point-set polar dual of the cone quadric with respect to the absolute.
inline Mat5 dual_quadric(const Mat5& c) {
    Mat5 cp = pseudo_inverse_sym(c, 1e-7);
    return (absolute_form() * cp * absolute_form()).symmetrized();
}

/// Linear map w in (x,y,z,w)-homogeneous 3-space -> the point of the
/// hyperplane {<V,.> = 0} projecting to it from the ideal point.
inline std::array<Vec5, 4> section_lift(const ProjPoint& v) {
    double den = v[3] - v[4];  // <V, Z>
    if (std::abs(den) <= 1e-12)
        throw Error(ErrorKind::numerical, "hyperplane through the projection center");
    std::array<Vec5, 4> cols;
    // X = (w1, w2, w3, xi, w4 + xi), xi = (v5 w4 - v1 w1 - v2 w2 - v3 w3) / (v4 - v5)
    for (int j = 0; j < 4; ++j) {
        Vec5 col{};
        if (j < 3) {
            col[j] = 1.0;
            double xi = -v[j] / den;
            col[3] = xi;
            col[4] = xi;
        } else {
            double xi = v[4] / den;
            col[3] = xi;
            col[4] = 1.0 + xi;
        }
        cols[size_t(j)] = col;
    }
    return cols;
}

}  // namespace detail

/// Geometry attached to a partnered pair: the orthogonality sphere B from
/// the cone vertex and the ruled quadric swept by the circle axes (the
/// extended stereographic image of the polar dual of the cone).
inline PairedFamilyGeometry family_axis_geometry(const CircleFamily& f1, const CircleFamily& f2,
                                                 const Tolerance& tol = {}) {
    if (f1.partner != f2.id || f2.partner != f1.id)
        throw Error(ErrorKind::invalid_input, "family_axis_geometry: families are not partners");
    const ProjPoint& v = f1.cone.vertex.at(0);
    PairedFamilyGeometry out;
    out.B = MSphere(v);
    out.plane_degenerate = std::abs(minkowski(v, ideal_point())) <= tol.at(1.0);
    if (!out.plane_degenerate) {
        Mat5 dual = detail::dual_quadric(f1.cone.c);
        auto cols = detail::section_lift(v);
        Mat4 g;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) g(i, j) = dot(cols[size_t(i)], dual * cols[size_t(j)]);
        double m = g.max_abs();
        if (m > 0) g = g * (1.0 / m);
        out.axes_quadric = g;
    }
    return out;
}

struct PlaneFrame {
    Vec3 origin{};
    Vec3 e1{}, e2{};  // orthonormal in-plane basis
    Vec3 normal{};
};

struct CanalFamilyGeometry {
    bool rotational = false;  // sphere centers on a straight line
    PlaneFrame plane;         // plane of the center conic (when not rotational)
    Mat3 center_conic{};      // conic of sphere centers in (u, v, 1) plane coordinates
    Vec3 axis_point{}, axis_dir{};  // the center line in the rotational case
    MCircle b;                // every envelope sphere is orthogonal to this M-circle
};

/// Canal-surface data of a single family: the conic of sphere centers and
/// the coplanar M-circle all spheres are orthogonal to.
inline CanalFamilyGeometry canal_geometry(const CircleFamily& f, const Tolerance& tol = {}) {
    if (!f.is_single())
        throw Error(ErrorKind::invalid_input, "canal_geometry: family is not single");
    const auto& vline = f.cone.vertex;
    if (vline.size() != 2) throw Error(ErrorKind::numerical, "canal_geometry: vertex line missing");
    CanalFamilyGeometry out;
    Vec5 h1 = absolute_form() * vline[0].x;
    Vec5 h2 = absolute_form() * vline[1].x;
    out.b = MCircle(ProjPoint(h1), ProjPoint(h2));

    // basis of the plane carrying the center conic
    auto basis = out.b.plane_basis();
    Mat5 dual = detail::dual_quadric(f.cone.c);
    Mat3 mb;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) mb(i, j) = dot(basis[size_t(i)], dual * basis[size_t(j)]);

    // image of the plane under extended stereographic projection
    std::array<Vec4, 3> img;
    for (int k = 0; k < 3; ++k) {
        const Vec5& x = basis[size_t(k)];
        img[size_t(k)] = Vec4{{x[0], x[1], x[2], x[4] - x[3]}};
    }
    bool contains_center = true;
    {
        // rotational <=> the ideal point lies in the plane
        const ProjPoint z = ideal_point();
        for (const Vec5& hv : {h1, h2})
            if (std::abs(dot(hv, z.x)) > tol.at(1.0) * norm(hv)) contains_center = false;
    }
    out.rotational = contains_center;
    if (out.rotational) {
        // image is a straight line: project two plane points away from the center
        std::vector<Vec3> pts;
        for (const Vec5& raw : {basis[0], basis[1], basis[2], basis[0] + basis[1], basis[1] + basis[2]}) {
            ProjPoint pp(raw);
            if (proj_equal(pp, ideal_point(), 1e-9)) continue;
            double den = pp[4] - pp[3];
            if (std::abs(den) <= 1e-10) continue;
            pts.push_back(Vec3{{pp[0] / den, pp[1] / den, pp[2] / den}});
            if (pts.size() == 2) break;
        }
        if (pts.size() < 2) throw Error(ErrorKind::numerical, "canal_geometry: degenerate axis line");
        out.axis_point = pts[0];
        out.axis_dir = normalized(pts[1] - pts[0]);
        return out;
    }

    // plane of the image conic from the three projected basis points
    std::vector<double> rows(12);
    for (int k = 0; k < 3; ++k)
        for (int j = 0; j < 4; ++j) rows[size_t(k * 4 + j)] = img[size_t(k)][j];
    auto ns = null_space_of(rows, 3, 4, 1e-9);
    if (ns.size() != 1) throw Error(ErrorKind::numerical, "canal_geometry: degenerate conic plane");
    Vec3 n{{ns[0][0], ns[0][1], ns[0][2]}};
    double nn = norm(n);
    if (nn <= 1e-12) throw Error(ErrorKind::numerical, "canal_geometry: conic plane at infinity");
    out.plane.normal = n / nn;
    double offset = -ns[0][3] / nn;  // normal . y = offset
    out.plane.origin = out.plane.normal * offset;
    Vec3 seed = std::abs(out.plane.normal[0]) < 0.9 ? Vec3{{1, 0, 0}} : Vec3{{0, 1, 0}};
    out.plane.e1 = normalized(cross(out.plane.normal, seed));
    out.plane.e2 = cross(out.plane.normal, out.plane.e1);

    // G: plane coordinates (u, v, 1) -> coefficients on the P^4 plane basis
    // via the inverse of the projection restricted to the plane
    Mat3 proj;  // columns: plane-coordinates of the projected basis vectors
    for (int k = 0; k < 3; ++k) {
        const Vec4& y = img[size_t(k)];
        Vec3 yy{{y[0], y[1], y[2]}};
        proj(0, k) = dot(yy - out.plane.origin * y[3], out.plane.e1);
        proj(1, k) = dot(yy - out.plane.origin * y[3], out.plane.e2);
        proj(2, k) = y[3];
    }
    Mat3 ginv = inverse(proj);  // (u,v,1) -> basis coefficients
    out.center_conic = (ginv.transposed() * mb * ginv).symmetrized();
    double m = out.center_conic.max_abs();
    if (m > 0) out.center_conic = out.center_conic * (1.0 / m);
    return out;
}

}  // namespace cyweb
