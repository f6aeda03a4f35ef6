#pragma once

#include <optional>
#include <vector>

#include "cyweb/algebra.hpp"

namespace cyweb {

/// Matrix of the absolute quadric x1^2+..+x4^2 - x5^2 = 0.
inline const Mat5& absolute_form() {
    static const Mat5 j = Mat5::diagonal(Vec5{{1, 1, 1, 1, -1}});
    return j;
}

/// <A,B> = a1 b1 + .. + a4 b4 - a5 b5.
inline double minkowski(const Vec5& a, const Vec5& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3] - a[4] * b[4];
}
inline double minkowski(const ProjPoint& a, const ProjPoint& b) { return minkowski(a.x, b.x); }

/// Projection center of the stereographic map; the ideal point of 3-space.
inline ProjPoint ideal_point() { return ProjPoint(Vec5{{0, 0, 0, 1, 1}}); }

struct Point3OrInf {
    bool infinite = false;
    Vec3 p{};

    static Point3OrInf inf() { return {true, {}}; }
    static Point3OrInf at(const Vec3& q) { return {false, q}; }
};

inline ProjPoint stereo_lift(const Vec3& x) {
    double n2 = dot(x, x);
    return ProjPoint(Vec5{{2 * x[0], 2 * x[1], 2 * x[2], n2 - 1, n2 + 1}});
}

inline bool on_absolute(const ProjPoint& x, const Tolerance& tol = {}) {
    return std::abs(minkowski(x, x)) <= tol.at(1.0);
}

inline Point3OrInf stereo_project(const ProjPoint& x, const Tolerance& tol = {}) {
    if (!on_absolute(x, Tolerance{std::max(tol.rel, 1e-7)}))
        throw Error(ErrorKind::invalid_input, "stereo_project: point not on the absolute sphere");
    double den = x[4] - x[3];
    if (std::abs(den) <= tol.at(1.0)) return Point3OrInf::inf();
    return Point3OrInf::at(Vec3{{x[0] / den, x[1] / den, x[2] / den}});
}

/// Central projection from the ideal point onto the x4 = 0 hyperplane.
/// Defined for every point except the center itself; maps the pole of a
/// sphere to the sphere's midpoint.
inline Point3OrInf extended_stereo(const ProjPoint& x, const Tolerance& tol = {}) {
    if (proj_equal(x, ideal_point(), 1e-12))
        throw Error(ErrorKind::invalid_input, "extended_stereo: undefined at the projection center");
    double den = x[4] - x[3];
    if (std::abs(den) <= tol.at(1.0)) return Point3OrInf::inf();
    return Point3OrInf::at(Vec3{{x[0] / den, x[1] / den, x[2] / den}});
}

enum class SphereClass { real_sphere, null_sphere, imaginary_sphere };

/// M-sphere: plane or sphere of Moebius geometry, stored by the
/// pentaspherical coordinates of its carrier-hyperplane pole.
struct MSphere {
    ProjPoint penta;

    MSphere() = default;
    explicit MSphere(const ProjPoint& p) : penta(p) {}

    /// lambda*(x.x) + a.x + d = 0 encoded as (a, lambda-d, -lambda-d).
    static MSphere from_equation(double lambda, const Vec3& a, double d) {
        return MSphere(ProjPoint(Vec5{{a[0], a[1], a[2], lambda - d, -lambda - d}}));
    }
    static MSphere from_center_radius2(const Vec3& m, double r2) {
        return from_equation(1.0, -2.0 * m, dot(m, m) - r2);
    }
    /// Plane n.x = offset.
    static MSphere from_plane(const Vec3& n, double offset) {
        if (norm(n) == 0.0) throw Error(ErrorKind::invalid_input, "plane normal must be nonzero");
        return from_equation(0.0, n, -offset);
    }

    double self_product() const { return minkowski(penta, penta); }
    SphereClass classify(const Tolerance& tol = {}) const {
        double s = self_product();
        if (s > tol.at(1.0)) return SphereClass::real_sphere;
        if (s < -tol.at(1.0)) return SphereClass::imaginary_sphere;
        return SphereClass::null_sphere;
    }
    bool is_plane(const Tolerance& tol = {}) const {
        return std::abs(penta[3] - penta[4]) <= tol.at(1.0);
    }
    /// lambda, d of the affine equation (valid in the stored scale).
    double lambda() const { return 0.5 * (penta[3] - penta[4]); }
    double offset_d() const { return -0.5 * (penta[3] + penta[4]); }

    Vec3 center() const {
        double l = lambda();
        if (l == 0.0) throw Error(ErrorKind::invalid_input, "plane has no center");
        return Vec3{{penta[0], penta[1], penta[2]}} * (-0.5 / l);
    }
    double radius2() const {
        double l = lambda();
        if (l == 0.0) throw Error(ErrorKind::invalid_input, "plane has no radius");
        Vec3 m = center();
        return dot(m, m) - offset_d() / l;
    }
    Vec3 plane_normal() const { return Vec3{{penta[0], penta[1], penta[2]}}; }
    double plane_offset() const { return penta[3]; }  // n.x = offset at stored scale

    /// Hyperplane coefficient vector of the carrier (h with h.X = 0).
    Vec5 hyperplane() const { return absolute_form() * penta.x; }
};

inline bool orthogonal(const MSphere& s1, const MSphere& s2, const Tolerance& tol = {}) {
    return std::abs(minkowski(s1.penta, s2.penta)) <= tol.at(1.0);
}

enum class PencilClass { elliptic, parabolic, hyperbolic };

/// Classifies the line through p, q against the absolute sphere.
inline PencilClass classify_pencil_line(const ProjPoint& p, const ProjPoint& q,
                                        const Tolerance& tol = {}) {
    double a = minkowski(p, p), b = minkowski(p, q), c = minkowski(q, q);
    double disc = b * b - a * c;
    if (disc > tol.at(1.0)) return PencilClass::hyperbolic;
    if (disc < -tol.at(1.0)) return PencilClass::elliptic;
    return PencilClass::parabolic;
}

/// Harmonic perspective collineation with center B* and axis the polar
/// hyperplane of B*; realizes the inversion in the M-sphere B.
inline Mat5 inversion_matrix(const MSphere& b) {
    double g = b.self_product();
    if (std::abs(g) <= 1e-12)
        throw Error(ErrorKind::invalid_input, "inversion in a null sphere is undefined");
    return Mat5::identity() - outer(b.penta.x, absolute_form() * b.penta.x) * (2.0 / g);
}

inline ProjPoint apply(const Mat5& m, const ProjPoint& x) { return ProjPoint(m * x.x); }

inline ProjPoint inversion(const MSphere& b, const ProjPoint& x) {
    return apply(inversion_matrix(b), x);
}

inline Vec3 invert_point(const MSphere& b, const Vec3& x) {
    Point3OrInf r = stereo_project(inversion(b, stereo_lift(x)), Tolerance{1e-7});
    if (r.infinite) throw Error(ErrorKind::numerical, "inversion sent point to infinity");
    return r.p;
}

inline bool is_moebius_matrix(const Mat5& m, const Tolerance& tol = {}) {
    Mat5 s = (m.transposed() * absolute_form() * m).symmetrized();
    const Mat5& j = absolute_form();
    double lam = (s(0, 0) + s(1, 1) + s(2, 2) + s(3, 3) - s(4, 4)) / 5.0;
    Mat5 resid = s - j * lam;
    double sn = s.max_abs();
    if (sn == 0.0) return false;
    double thr = std::max(tol.rel, 1e-9) * sn;
    return resid.max_abs() <= thr && std::abs(lam) > thr;
}

// ---------------------------------------------------------------------------
// M-circles
// ---------------------------------------------------------------------------

struct CircleView {
    enum class Kind { circle, line, point, imaginary } kind = Kind::imaginary;
    // circle / point
    Vec3 center{};
    double radius = 0;
    Vec3 normal{};
    // line
    Vec3 line_point{};
    Vec3 line_dir{};
};

/// M-circle as a 2-plane of P^4, the intersection of the two hyperplanes
/// h1.X = 0 and h2.X = 0.  The plane is the source of truth; Euclidean
/// views are derived on demand.
struct MCircle {
    ProjPoint h1, h2;

    MCircle() = default;
    MCircle(const ProjPoint& a, const ProjPoint& b) : h1(a), h2(b) {
        if (proj_equal(h1, h2, 1e-10))
            throw Error(ErrorKind::invalid_input, "M-circle needs two independent hyperplanes");
    }

    static MCircle from_spheres(const MSphere& s1, const MSphere& s2) {
        if (proj_equal(s1.penta, s2.penta, 1e-10))
            throw Error(ErrorKind::invalid_input, "circle_from_spheres: dependent spheres");
        return MCircle(ProjPoint(s1.hyperplane()), ProjPoint(s2.hyperplane()));
    }
    static MCircle from_three_points(const ProjPoint& a, const ProjPoint& b, const ProjPoint& c) {
        std::vector<double> rows(15);
        for (int j = 0; j < 5; ++j) {
            rows[size_t(j)] = a[j];
            rows[size_t(5 + j)] = b[j];
            rows[size_t(10 + j)] = c[j];
        }
        auto ns = null_space_of(rows, 3, 5, 1e-9);
        if (ns.size() != 2)
            throw Error(ErrorKind::invalid_input, "three points do not span a circle plane");
        Vec5 u, v;
        for (int i = 0; i < 5; ++i) { u[i] = ns[0][size_t(i)]; v[i] = ns[1][size_t(i)]; }
        return MCircle(ProjPoint(u), ProjPoint(v));
    }
    static MCircle through_points(const Vec3& a, const Vec3& b, const Vec3& c) {
        return from_three_points(stereo_lift(a), stereo_lift(b), stereo_lift(c));
    }
    /// Circle with center c, radius r in the plane with unit normal n.
    static MCircle from_center_radius_normal(const Vec3& c, double r, const Vec3& n) {
        MSphere s = MSphere::from_center_radius2(c, r * r);
        MSphere pl = MSphere::from_plane(n, dot(n, c));
        return from_spheres(s, pl);
    }
    /// Possibly imaginary circle: the section of the sphere (c, r2) by the
    /// plane through c with unit normal n.
    static MCircle from_center_radius2_normal(const Vec3& c, double r2, const Vec3& n) {
        MSphere s = MSphere::from_center_radius2(c, r2);
        MSphere pl = MSphere::from_plane(n, dot(n, c));
        return from_spheres(s, pl);
    }

    /// Two points spanning the polar line (the pencil of spheres through
    /// the circle).
    std::pair<ProjPoint, ProjPoint> polar_line() const {
        return {ProjPoint(absolute_form() * h1.x), ProjPoint(absolute_form() * h2.x)};
    }

    bool contains(const ProjPoint& x, double tol = 1e-9) const {
        return std::abs(dot(h1.x, x.x)) <= tol && std::abs(dot(h2.x, x.x)) <= tol;
    }

    /// Orthonormal basis of the plane's 3-dimensional linear span.
    std::array<Vec5, 3> plane_basis() const {
        std::vector<double> rows(10);
        for (int j = 0; j < 5; ++j) {
            rows[size_t(j)] = h1[j];
            rows[size_t(5 + j)] = h2[j];
        }
        auto ns = null_space_of(rows, 2, 5, 1e-9);
        if (ns.size() != 3) throw Error(ErrorKind::numerical, "degenerate circle plane");
        std::array<Vec5, 3> b;
        for (int k = 0; k < 3; ++k)
            for (int i = 0; i < 5; ++i) b[size_t(k)][i] = ns[size_t(k)][size_t(i)];
        return b;
    }

    CircleView view(const Tolerance& tol = {}) const;

    /// Samples the real locus; points at the ideal point are skipped.
    std::vector<Vec3> sample(int n, const Tolerance& tol = {}) const;
};

inline CircleView MCircle::view(const Tolerance& tol) const {
    CircleView out;
    const ProjPoint& z = ideal_point();
    bool is_line = std::abs(dot(h1.x, z.x)) <= tol.at(1.0) && std::abs(dot(h2.x, z.x)) <= tol.at(1.0);
    auto [p, q] = polar_line();
    if (is_line) {
        // every sphere of the pencil is a plane; intersect two of them
        MSphere sp(p), sq(q);
        Vec3 n1 = sp.plane_normal(), n2 = sq.plane_normal();
        double o1 = sp.plane_offset(), o2 = sq.plane_offset();
        Vec3 d = cross(n1, n2);
        if (norm(d) <= tol.at(1.0)) throw Error(ErrorKind::numerical, "degenerate line circle");
        // point on both planes: least squares via 2x2 on the span of n1, n2
        double a11 = dot(n1, n1), a12 = dot(n1, n2), a22 = dot(n2, n2);
        double det = a11 * a22 - a12 * a12;
        double c1 = (o1 * a22 - o2 * a12) / det;
        double c2 = (o2 * a11 - o1 * a12) / det;
        out.kind = CircleView::Kind::line;
        out.line_point = n1 * c1 + n2 * c2;
        out.line_dir = normalized(d);
        return out;
    }
    // plane member of the pencil: lambda(u) = 0 along p + u q
    double lp = p[3] - p[4], lq = q[3] - q[4];
    Vec5 plane_pole;
    Vec5 sphere_pole;
    if (std::abs(lq) >= std::abs(lp)) {
        plane_pole = p.x * lq - q.x * lp;        // lambda = 0 member
        sphere_pole = (std::abs(lp) > 1e-13) ? p.x : q.x;
    } else {
        plane_pole = q.x * lp - p.x * lq;
        sphere_pole = p.x;
    }
    MSphere pl{ProjPoint(plane_pole)};
    // choose the best-conditioned genuine sphere in the pencil
    double best = -1;
    for (double u : {0.0, 1.0, -1.0, 0.5, 2.0}) {
        Vec5 cand = p.x + q.x * u;
        double l = 0.5 * (cand[3] - cand[4]);
        double score = std::abs(l) / std::max(norm(cand), 1e-300);
        if (score > best) { best = score; sphere_pole = cand; }
    }
    MSphere sp{ProjPoint(sphere_pole)};
    Vec3 n = pl.plane_normal();
    double nn = norm(n);
    if (nn <= tol.at(1.0)) throw Error(ErrorKind::numerical, "degenerate circle plane member");
    Vec3 nh = n / nn;
    double offset = pl.plane_offset() / nn;  // nh . x = offset
    Vec3 m = sp.center();
    double r2 = sp.radius2();
    double gap = offset - dot(nh, m);
    Vec3 c = m + nh * gap;
    double rho2 = r2 - gap * gap;
    out.center = c;
    out.normal = nh;
    if (rho2 > tol.at(1.0 + std::abs(r2))) {
        out.kind = CircleView::Kind::circle;
        out.radius = std::sqrt(rho2);
    } else if (rho2 < -tol.at(1.0 + std::abs(r2))) {
        out.kind = CircleView::Kind::imaginary;
        out.radius = 0;
    } else {
        out.kind = CircleView::Kind::point;
        out.radius = 0;
    }
    return out;
}

inline std::vector<Vec3> MCircle::sample(int n, const Tolerance& tol) const {
    auto b = plane_basis();
    Mat3 q;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) q(i, j) = minkowski(b[size_t(i)], b[size_t(j)]);
    EigenSym<3> e = eigen_sym(q);
    // real circle/line needs signature (2,1) on the plane
    if (!(e.values[0] < 0 && e.values[1] > 0 && e.values[2] > 0)) return {};
    Vec3 vneg, v1, v2;
    for (int i = 0; i < 3; ++i) {
        vneg[i] = e.vectors(i, 0) / std::sqrt(-e.values[0]);
        v1[i] = e.vectors(i, 1) / std::sqrt(e.values[1]);
        v2[i] = e.vectors(i, 2) / std::sqrt(e.values[2]);
    }
    std::vector<Vec3> pts;
    pts.reserve(size_t(n));
    for (int i = 0; i < n; ++i) {
        double th = 2.0 * 3.14159265358979323846 * i / n;
        Vec3 cth = v1 * std::cos(th) + v2 * std::sin(th) + vneg;
        Vec5 x = b[0] * cth[0] + b[1] * cth[1] + b[2] * cth[2];
        ProjPoint pp(x);
        double den = pp[4] - pp[3];
        if (std::abs(den) <= tol.at(1.0)) continue;  // passes through the ideal point
        pts.push_back(Vec3{{pp[0] / den, pp[1] / den, pp[2] / den}});
    }
    return pts;
}

inline MCircle circle_from_spheres(const MSphere& s1, const MSphere& s2) {
    return MCircle::from_spheres(s1, s2);
}

}  // namespace cyweb
