#pragma once

#include <vector>

#include "cyweb/moebius.hpp"

namespace cyweb {

/// Quartic surface lambda*(x.x)^2 + (x.x)*(L.x) + x'Qquad x + Qlin.x + Qconst = 0.
struct Cyclide {
    double lambda = 0;
    Vec3 L{};
    Mat3 Qquad{};
    Vec3 Qlin{};
    double Qconst = 0;

    double eval(const Vec3& x) const {
        double u = dot(x, x);
        return lambda * u * u + u * dot(L, x) + quadratic_form(Qquad, x) + dot(Qlin, x) + Qconst;
    }
    Vec3 gradient(const Vec3& x) const {
        double u = dot(x, x);
        double lx = dot(L, x);
        Vec3 g = x * (4.0 * lambda * u + 2.0 * lx) + L * u + (Qquad * x) * 2.0 + Qlin;
        return g;
    }

    std::array<double, 14> coefficients() const {
        return {lambda,
                L[0], L[1], L[2],
                Qquad(0, 0), Qquad(0, 1), Qquad(0, 2), Qquad(1, 1), Qquad(1, 2), Qquad(2, 2),
                Qlin[0], Qlin[1], Qlin[2],
                Qconst};
    }
    double scale() const {
        double m = 0;
        for (double c : coefficients()) m = std::max(m, std::abs(c));
        return m;
    }
    bool is_zero(double tol = 1e-14) const { return scale() <= tol; }

    /// Canonical scale: max-abs coefficient 1, first significant coefficient positive.
    Cyclide normalized() const {
        double s = scale();
        if (s == 0.0) throw Error(ErrorKind::invalid_input, "zero cyclide");
        double sign = 1.0;
        for (double c : coefficients()) {
            if (std::abs(c) > 1e-13 * s) {
                sign = c > 0 ? 1.0 : -1.0;
                break;
            }
        }
        double f = sign / s;
        Cyclide r = *this;
        r.lambda *= f;
        r.L *= f;
        r.Qquad = r.Qquad * f;
        r.Qlin *= f;
        r.Qconst *= f;
        return r;
    }
};

/// Pencil A - t J through the absolute sphere; A is the canonical
/// trace-J-orthogonal representative.
struct Pencil {
    Mat5 A;
};

enum class CyclideClass { trivial, reducible, irreducible };

inline double frobenius_j(const Mat5& a) {
    return a(0, 0) + a(1, 1) + a(2, 2) + a(3, 3) - a(4, 4);
}

/// Lift of the cyclide to the spherical model: the quadric obtained by the
/// stereographic substitution, shifted along J so <A,J>_F = 0 and scaled to
/// unit Frobenius norm with a deterministic sign.
inline Pencil to_pencil(const Cyclide& d) {
    if (d.is_zero()) throw Error(ErrorKind::invalid_input, "to_pencil: zero cyclide");
    Mat5 a;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) a(i, j) = d.Qquad(i, j);
    for (int i = 0; i < 3; ++i) {
        a(i, 3) = a(3, i) = 0.5 * (d.L[i] - d.Qlin[i]);
        a(i, 4) = a(4, i) = 0.5 * (d.L[i] + d.Qlin[i]);
    }
    a(3, 3) = d.lambda + d.Qconst;
    a(4, 4) = d.lambda + d.Qconst;
    a(3, 4) = a(4, 3) = d.lambda - d.Qconst;
    a = a + absolute_form() * (-frobenius_j(a) / 5.0);
    double n = 0;
    for (double x : a.m) n += x * x;
    n = std::sqrt(n);
    if (n == 0.0) throw Error(ErrorKind::invalid_input, "to_pencil: cyclide is the absolute sphere");
    double sign = 1.0;
    for (double x : a.m) {
        if (std::abs(x) > 1e-13 * n) { sign = x > 0 ? 1.0 : -1.0; break; }
    }
    return Pencil{a * (sign / n)};
}

/// Stereographic image of the carrier of A - tJ, i.e. the substitution of
/// the lift into X'AX = 0, collected back into the quartic coefficients.
inline Cyclide from_pencil(const Pencil& p) {
    const Mat5& a = p.A;
    double al = a(3, 3), be = a(4, 4), ga = a(3, 4);
    Vec3 u{{a(0, 3), a(1, 3), a(2, 3)}};
    Vec3 v{{a(0, 4), a(1, 4), a(2, 4)}};
    Cyclide d;
    d.lambda = al + be + 2 * ga;
    d.L = (u + v) * 4.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) d.Qquad(i, j) = 4.0 * a(i, j);
    for (int i = 0; i < 3; ++i) d.Qquad(i, i) += 2.0 * (be - al);
    d.Qlin = (v - u) * 4.0;
    d.Qconst = al + be - 2 * ga;
    double ascale = a.max_abs();
    if (d.scale() <= 1e-10 * std::max(ascale, 1e-300))
        throw Error(ErrorKind::invalid_input, "from_pencil: quadric is a multiple of the absolute sphere");
    return d.normalized();
}

inline Poly pencil_char_poly(const Pencil& p) { return char_poly(p.A, absolute_form()); }

inline std::vector<RootMult> pencil_real_roots(const Pencil& p, const Tolerance& tol = {}) {
    return real_roots(pencil_char_poly(p), tol);
}

inline Mat5 cone_matrix(const Pencil& p, double t) {
    return p.A - absolute_form() * t;
}

inline CyclideClass classify(const Cyclide& d_in, const Tolerance& tol = {}) {
    if (d_in.is_zero()) throw Error(ErrorKind::invalid_input, "classify: zero cyclide");
    Cyclide d = d_in.normalized();
    double thr = tol.at(1.0);

    // trivial: a(x.x) + b x + c y + d z + e
    bool trivial = std::abs(d.lambda) <= thr && norm(d.L) <= thr;
    if (trivial) {
        double a00 = d.Qquad(0, 0);
        for (int i = 0; i < 3 && trivial; ++i)
            for (int j = 0; j < 3; ++j) {
                double want = (i == j) ? a00 : 0.0;
                if (std::abs(d.Qquad(i, j) - want) > thr) { trivial = false; break; }
            }
    }
    if (trivial) return CyclideClass::trivial;

    Pencil p = to_pencil(d);
    auto roots = pencil_real_roots(p, tol);
    bool any_surface_cone = false;
    for (const auto& rm : roots) {
        Mat5 c = cone_matrix(p, rm.t);
        Inertia in = inertia(c, Tolerance{1e-7});
        int rank = 5 - in.n_zero;
        if (rank <= 2) return CyclideClass::reducible;
        if (std::min(in.n_plus, in.n_minus) >= 1) any_surface_cone = true;
    }
    if (!any_surface_cone) return CyclideClass::reducible;  // curve-like or empty carrier
    return CyclideClass::irreducible;
}

/// Inversion spheres fixing the surface: one for each simple real
/// eigenvalue whose cone vertex avoids the absolute sphere.  The resulting
/// spheres are pairwise orthogonal.
inline std::vector<MSphere> symmetry_spheres(const Pencil& p, const Tolerance& tol = {}) {
    std::vector<MSphere> out;
    for (const auto& rm : pencil_real_roots(p, tol)) {
        if (rm.multiplicity != 1) continue;
        Mat5 c = cone_matrix(p, rm.t);
        auto ker = null_space(c, Tolerance{1e-7});
        if (ker.size() != 1) continue;
        const ProjPoint& v = ker[0];
        if (std::abs(minkowski(v, v)) <= tol.at(1.0)) continue;  // vertex on the absolute
        out.push_back(MSphere(v));
    }
    return out;
}

}  // namespace cyweb
