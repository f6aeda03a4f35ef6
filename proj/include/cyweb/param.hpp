#pragma once

#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "cyweb/families.hpp"

namespace cyweb {

/// Bivariate polynomial in (s, t), dense storage up to total degree 8.
struct Poly2 {
    static constexpr int kMax = 8;
    std::array<double, (kMax + 1) * (kMax + 1)> c{};

    double& at(int i, int j) { return c[size_t(i) * (kMax + 1) + size_t(j)]; }
    double at(int i, int j) const { return c[size_t(i) * (kMax + 1) + size_t(j)]; }

    static Poly2 constant(double v) {
        Poly2 p;
        p.at(0, 0) = v;
        return p;
    }
    static Poly2 affine(double c0, double cs, double ct) {
        Poly2 p;
        p.at(0, 0) = c0;
        p.at(1, 0) = cs;
        p.at(0, 1) = ct;
        return p;
    }

    Poly2 operator+(const Poly2& o) const {
        Poly2 r;
        for (size_t i = 0; i < c.size(); ++i) r.c[i] = c[i] + o.c[i];
        return r;
    }
    Poly2 operator-(const Poly2& o) const {
        Poly2 r;
        for (size_t i = 0; i < c.size(); ++i) r.c[i] = c[i] - o.c[i];
        return r;
    }
    Poly2 operator*(double s) const {
        Poly2 r;
        for (size_t i = 0; i < c.size(); ++i) r.c[i] = c[i] * s;
        return r;
    }
    Poly2 operator*(const Poly2& o) const {
        Poly2 r;
        for (int i = 0; i <= kMax; ++i)
            for (int j = 0; j + i <= kMax; ++j) {
                double a = at(i, j);
                if (a == 0.0) continue;
                for (int k = 0; i + k <= kMax; ++k)
                    for (int l = 0; j + l + k + i <= 2 * kMax; ++l) {
                        if (k + l > kMax - 0 || j + l > kMax || i + k > kMax) continue;
                        double b = o.at(k, l);
                        if (b == 0.0) continue;
                        r.at(i + k, j + l) += a * b;
                    }
            }
        return r;
    }

    double eval(double s, double t) const {
        double sum = 0;
        double spow = 1;
        for (int i = 0; i <= kMax; ++i) {
            double row = 0, tpow = 1;
            for (int j = 0; j <= kMax; ++j) {
                row += at(i, j) * tpow;
                tpow *= t;
            }
            sum += row * spow;
            spow *= s;
        }
        return sum;
    }
    double max_coeff() const {
        double m = 0;
        for (double x : c) m = std::max(m, std::abs(x));
        return m;
    }
    int total_degree(double rel_tol = 1e-12) const {
        double m = max_coeff();
        int d = 0;
        for (int i = 0; i <= kMax; ++i)
            for (int j = 0; j <= kMax; ++j)
                if (std::abs(at(i, j)) > rel_tol * m) d = std::max(d, i + j);
        return d;
    }
};

enum class ParamCase { vertex_on_sphere, vertex_outside, vertex_inside };

/// x = (X1 + X2 sqrt(P)) / (W1 + W2 sqrt(P)) and cyclically; all nine
/// polynomials have total degree at most four.
struct SqrtRationalMap {
    Poly2 X1, X2, Y1, Y2, Z1, Z2, W1, W2, P;
    ParamCase kind = ParamCase::vertex_outside;

    // construction data, used by the mesher
    double cone_t = 0;
    Mat5 reflect = Mat5::identity();  // involution moving the vertex to its model position
    Mat4 base_q;                       // base quadric of the cone in model coordinates
    Vec4 p0;                           // rational point on the base quadric
    Vec4 w1, w2, w3;                   // chart plane of the stereographic parametrization
    std::array<Vec5, 4> lift_cols;     // columns embedding base points into P^4 model coords
    Vec5 sqrt_col;                     // direction carrying the sqrt coordinate (cases 2/3)
    Vec5 vertex;                       // cone vertex (original coordinates)
    Inertia base_sig;
};

enum class MapPointKind { point, infinite, not_real };

struct MapPoint {
    MapPointKind kind = MapPointKind::not_real;
    Vec3 p{};
};

inline MapPoint eval_map(const SqrtRationalMap& m, double s, double t, int branch) {
    double pv = m.P.eval(s, t);
    if (pv < -1e-13 * std::max(1.0, m.P.max_coeff()) * std::pow(1 + s * s + t * t, 2))
        return {MapPointKind::not_real, {}};
    double root = std::sqrt(std::max(pv, 0.0)) * (branch >= 0 ? 1.0 : -1.0);
    double den = m.W1.eval(s, t) + m.W2.eval(s, t) * root;
    double nx = m.X1.eval(s, t) + m.X2.eval(s, t) * root;
    double ny = m.Y1.eval(s, t) + m.Y2.eval(s, t) * root;
    double nz = m.Z1.eval(s, t) + m.Z2.eval(s, t) * root;
    double scale = std::max({std::abs(nx), std::abs(ny), std::abs(nz), 1e-300});
    if (std::abs(den) <= 1e-13 * scale) return {MapPointKind::infinite, {}};
    return {MapPointKind::point, Vec3{{nx / den, ny / den, nz / den}}};
}

namespace detail {

inline Mat5 reflection_moving(const ProjPoint& v, const Vec5& target) {
    double sv = minkowski(v, v), st = minkowski(target, target);
    Vec5 nv = v.x * (1.0 / std::sqrt(std::abs(sv)));
    Vec5 nt = target * (1.0 / std::sqrt(std::abs(st)));
    for (const Vec5& b : {nv - nt, nv + nt}) {
        double g = minkowski(b, b);
        if (std::abs(g) > 1e-8) {
            return Mat5::identity() - outer(b, absolute_form() * b) * (2.0 / g);
        }
    }
    throw Error(ErrorKind::numerical, "no reflection between vertex and model position");
}

inline Vec4 base_point_on(const Mat4& q) {
    EigenSym<4> e = eigen_sym(q);
    if (!(e.values[0] < 0 && e.values[3] > 0))
        throw Error(ErrorKind::numerical, "base quadric has no real points");
    Vec4 vp, vm;
    for (int i = 0; i < 4; ++i) {
        vp[i] = e.vectors(i, 3) / std::sqrt(e.values[3]);
        vm[i] = e.vectors(i, 0) / std::sqrt(-e.values[0]);
    }
    return normalized(vp + vm);
}

struct ConeChoice {
    double t;
    Mat5 c;
    ProjPoint vertex;
    ParamCase kind;
};

inline ConeChoice choose_param_cone(const Pencil& p, const Tolerance& tol) {
    std::vector<ConeChoice> cands;
    for (const auto& rm : pencil_real_roots(p, tol)) {
        Mat5 c = cone_matrix(p, rm.t);
        Inertia sig = inertia(c, Tolerance{1e-7});
        if (sig.n_zero != 1) continue;                       // need a rank-4 cone
        if (std::min(sig.n_plus, sig.n_minus) < 1) continue;  // base must be real
        ProjPoint v = null_space(c, Tolerance{1e-7}).at(0);
        double sv = minkowski(v, v);
        ParamCase kind = std::abs(sv) <= 1e-7 ? ParamCase::vertex_on_sphere
                          : (sv > 0 ? ParamCase::vertex_outside : ParamCase::vertex_inside);
        cands.push_back({rm.t, c, v, kind});
    }
    if (cands.empty())
        throw Error(ErrorKind::numerical, "parametrize: no usable cone (degenerate or empty carrier)");
    for (const auto& cc : cands)
        if (cc.kind == ParamCase::vertex_on_sphere) return cc;
    return *std::max_element(cands.begin(), cands.end(), [](const ConeChoice& a, const ConeChoice& b) {
        return std::abs(minkowski(a.vertex, a.vertex)) < std::abs(minkowski(b.vertex, b.vertex));
    });
}

}  // namespace detail

/// Square-root-rational parametrization from one quadratic cone of the
/// pencil.  The vertex position against the absolute sphere selects the
/// route: on the sphere, project stereographically from the vertex; outside,
/// move it to infinity and parametrize the cylinder base; inside, move it to
/// the center and project centrally.
inline SqrtRationalMap parametrize(const Pencil& p, const Tolerance& tol = {}) {
    detail::ConeChoice cc = detail::choose_param_cone(p, tol);
    SqrtRationalMap m;
    m.kind = cc.kind;
    m.cone_t = cc.t;
    m.vertex = cc.vertex.x;

    if (cc.kind == ParamCase::vertex_on_sphere) {
        // chart the base quadric cut by the tangent hyperplane at the
        // antipode, then send each base point to the second intersection of
        // its vertex ray with the absolute sphere
        Vec5 v = cc.vertex.x;
        if (v[4] < 0) v = -v;
        Vec5 vop{{-v[0], -v[1], -v[2], -v[3], v[4]}};
        Vec5 jv = absolute_form() * vop;
        std::vector<double> row(5);
        for (int i = 0; i < 5; ++i) row[size_t(i)] = jv[i];
        auto ns = null_space_of(row, 1, 5, 1e-9);
        if (ns.size() != 4) throw Error(ErrorKind::numerical, "parametrize: bad tangent hyperplane");
        for (int k = 0; k < 4; ++k)
            for (int i = 0; i < 5; ++i) m.lift_cols[size_t(k)][i] = ns[size_t(k)][size_t(i)];
        Mat4 q4;
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j)
                q4(i, j) = dot(m.lift_cols[size_t(i)], cc.c * m.lift_cols[size_t(j)]);
        m.base_q = q4.symmetrized();
        m.p0 = detail::base_point_on(m.base_q);
        {
            std::vector<double> prow(4);
            for (int i = 0; i < 4; ++i) prow[size_t(i)] = m.p0[i];
            auto pns = null_space_of(prow, 1, 4, 1e-9);
            m.w1 = Vec4{{pns[0][0], pns[0][1], pns[0][2], pns[0][3]}};
            m.w2 = Vec4{{pns[1][0], pns[1][1], pns[1][2], pns[1][3]}};
            m.w3 = Vec4{{pns[2][0], pns[2][1], pns[2][2], pns[2][3]}};
        }
        // u(s,t) on the base quadric, degree 2
        std::array<Poly2, 4> r, u;
        for (int i = 0; i < 4; ++i) r[size_t(i)] = Poly2::affine(m.w1[i], m.w2[i], m.w3[i]);
        Poly2 rqr, p0qr;
        for (int i = 0; i < 4; ++i) {
            Poly2 qri;  // (Q r)_i
            for (int j = 0; j < 4; ++j) qri = qri + r[size_t(j)] * m.base_q(i, j);
            rqr = rqr + r[size_t(i)] * qri;
            p0qr = p0qr + qri * m.p0[i];
        }
        for (int i = 0; i < 4; ++i) u[size_t(i)] = rqr * m.p0[i] - (p0qr * r[size_t(i)]) * 2.0;
        // lift to P^4 and take the second vertex-ray intersection
        std::array<Poly2, 5> bigu;
        for (int c5 = 0; c5 < 5; ++c5)
            for (int k = 0; k < 4; ++k) bigu[size_t(c5)] = bigu[size_t(c5)] + u[size_t(k)] * m.lift_cols[size_t(k)][c5];
        Poly2 uu, vu;
        for (int i = 0; i < 4; ++i) uu = uu + bigu[size_t(i)] * bigu[size_t(i)];
        uu = uu - bigu[4] * bigu[4];
        for (int i = 0; i < 4; ++i) vu = vu + bigu[size_t(i)] * v[i];
        vu = vu - bigu[4] * v[4];
        std::array<Poly2, 5> x;
        for (int i = 0; i < 5; ++i) x[size_t(i)] = uu * v[i] - (vu * bigu[size_t(i)]) * 2.0;
        m.X1 = x[0];
        m.Y1 = x[1];
        m.Z1 = x[2];
        m.W1 = x[4] - x[3];
        m.P = Poly2::constant(1.0);
        return m;
    }

    bool outside = cc.kind == ParamCase::vertex_outside;
    Vec5 target = outside ? Vec5{{1, 0, 0, 0, 0}} : Vec5{{0, 0, 0, 0, 1}};
    m.reflect = detail::reflection_moving(cc.vertex, target);
    Mat5 cp = (m.reflect.transposed() * cc.c * m.reflect).symmetrized();
    std::array<int, 4> slots = outside ? std::array<int, 4>{1, 2, 3, 4} : std::array<int, 4>{0, 1, 2, 3};
    int sqrt_slot = outside ? 0 : 4;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) m.base_q(i, j) = cp(slots[size_t(i)], slots[size_t(j)]);
    m.base_q = m.base_q.symmetrized();
    for (int k = 0; k < 4; ++k) {
        Vec5 col{};
        col[slots[size_t(k)]] = 1.0;
        m.lift_cols[size_t(k)] = col;
    }
    m.sqrt_col = Vec5{};
    m.sqrt_col[sqrt_slot] = 1.0;
    m.p0 = detail::base_point_on(m.base_q);
    {
        std::vector<double> prow(4);
        for (int i = 0; i < 4; ++i) prow[size_t(i)] = m.p0[i];
        auto pns = null_space_of(prow, 1, 4, 1e-9);
        m.w1 = Vec4{{pns[0][0], pns[0][1], pns[0][2], pns[0][3]}};
        m.w2 = Vec4{{pns[1][0], pns[1][1], pns[1][2], pns[1][3]}};
        m.w3 = Vec4{{pns[2][0], pns[2][1], pns[2][2], pns[2][3]}};
    }
    std::array<Poly2, 4> r, u;
    for (int i = 0; i < 4; ++i) r[size_t(i)] = Poly2::affine(m.w1[i], m.w2[i], m.w3[i]);
    Poly2 rqr, p0qr;
    for (int i = 0; i < 4; ++i) {
        Poly2 qri;
        for (int j = 0; j < 4; ++j) qri = qri + r[size_t(j)] * m.base_q(i, j);
        rqr = rqr + r[size_t(i)] * qri;
        p0qr = p0qr + qri * m.p0[i];
    }
    for (int i = 0; i < 4; ++i) u[size_t(i)] = rqr * m.p0[i] - (p0qr * r[size_t(i)]) * 2.0;

    // P: the absolute-sphere condition on the missing coordinate
    Poly2 sig;
    for (int k = 0; k < 4; ++k) {
        double coef = (slots[size_t(k)] == 4) ? -1.0 : 1.0;
        sig = sig + u[size_t(k)] * u[size_t(k)] * coef;
    }
    m.P = outside ? sig * -1.0 : sig;  // inside: sum of squares

    // X(s,t,branch) = reflect * (u embedded + branch*sqrt(P) * sqrt_col)
    std::array<Poly2, 5> a;
    std::array<double, 5> b{};
    for (int i = 0; i < 5; ++i) {
        for (int k = 0; k < 4; ++k) a[size_t(i)] = a[size_t(i)] + u[size_t(k)] * m.reflect(i, slots[size_t(k)]);
        b[size_t(i)] = m.reflect(i, sqrt_slot);
    }
    m.X1 = a[0];
    m.X2 = Poly2::constant(b[0]);
    m.Y1 = a[1];
    m.Y2 = Poly2::constant(b[1]);
    m.Z1 = a[2];
    m.Z2 = Poly2::constant(b[2]);
    m.W1 = a[4] - a[3];
    m.W2 = Poly2::constant(b[4] - b[3]);
    return m;
}

// ---------------------------------------------------------------------------
// meshing
// ---------------------------------------------------------------------------

struct MeshVertexTag {
    double s = 0, t = 0;
    int branch = 1;
};

struct Mesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> triangles;
    std::vector<MeshVertexTag> tags;
    bool complete = true;  // false when unbounded parts were clipped

    int euler_characteristic() const {
        std::vector<std::pair<int, int>> edges;
        edges.reserve(triangles.size() * 3);
        std::vector<char> used(vertices.size(), 0);
        for (const auto& t : triangles) {
            for (int e = 0; e < 3; ++e) {
                int a = t[size_t(e)], b = t[size_t((e + 1) % 3)];
                edges.push_back({std::min(a, b), std::max(a, b)});
                used[size_t(a)] = 1;
            }
        }
        std::sort(edges.begin(), edges.end());
        edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
        int v = 0;
        for (char u : used) v += u;
        return v - int(edges.size()) + int(triangles.size());
    }
};

namespace detail {

struct BaseGrid {
    std::vector<Vec4> points;                  // base-quadric points
    std::vector<std::array<int, 4>> quads;     // cells (triangulated downstream)
    std::vector<std::array<int, 3>> tris;      // polar caps of the sphere chart
};

inline Vec4 torus_base_point(const Mat4& q, double alpha, double beta) {
    EigenSym<4> e = eigen_sym(q);
    Vec4 u{};
    double cs[4] = {std::cos(alpha), std::sin(alpha), std::cos(beta), std::sin(beta)};
    int ip = 0, im = 0;
    for (int k = 0; k < 4; ++k) {
        Vec4 col;
        for (int i = 0; i < 4; ++i) col[i] = e.vectors(i, k);
        if (e.values[k] > 0) {
            u += col * (cs[size_t(ip)] / std::sqrt(e.values[k]));
            ++ip;
        } else {
            u += col * (cs[size_t(2 + im)] / std::sqrt(-e.values[k]));
            ++im;
        }
    }
    return u;
}

}  // namespace detail

/// Triangulated sampling of the real surface, evaluated through the
/// square-root-rational map on a grid adapted to the base quadric.  Both
/// branches are emitted and stitched along the P = 0 curve.
inline Mesh sample_mesh(const Cyclide& d_in, int res, const Tolerance& tol = {}) {
    if (res < 4) throw Error(ErrorKind::invalid_input, "sample_mesh: resolution must be at least 4");
    res += res & 1;  // even grids keep the wrap rules simple
    Cyclide d = d_in.normalized();
    Pencil p = to_pencil(d);
    SqrtRationalMap m = parametrize(p, tol);

    EigenSym<4> be = eigen_sym(m.base_q);
    int np = 0, nm = 0;
    double lmax = 0;
    for (int i = 0; i < 4; ++i) lmax = std::max(lmax, std::abs(be.values[i]));
    for (int i = 0; i < 4; ++i) {
        if (be.values[i] > 1e-7 * lmax) ++np;
        if (be.values[i] < -1e-7 * lmax) ++nm;
    }
    Mat4 q = m.base_q;
    if (np < nm) {
        q = q * -1.0;
        std::swap(np, nm);
    }
    if (np + nm < 4) throw Error(ErrorKind::numerical, "sample_mesh: degenerate base quadric");

    const bool ruled_base = (np == 2);
    const bool on_sphere = m.kind == ParamCase::vertex_on_sphere;
    const bool outside = m.kind == ParamCase::vertex_outside;

    // sigma: value whose sign gates the real branches (case 2 only)
    Mat4 sig_mat;
    for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l)
            sig_mat(k, l) = minkowski(m.lift_cols[size_t(k)], m.lift_cols[size_t(l)]);
    auto sigma_of = [&](const Vec4& u) -> double {
        if (!outside) return -1.0;  // always real
        return quadratic_form(sig_mat, u);
    };

    auto lift_to_space = [&](const Vec4& u, int branch) -> Vec5 {
        if (on_sphere) {
            Vec5 big{};
            for (int k = 0; k < 4; ++k) big += m.lift_cols[size_t(k)] * u[k];
            double uu = minkowski(big, big);
            double vu = minkowski(big, m.vertex);
            return m.vertex * uu - big * (2.0 * vu);
        }
        Vec5 y{};
        for (int k = 0; k < 4; ++k) y += m.lift_cols[size_t(k)] * u[k];
        double sg = sigma_of(u);
        double root = outside ? std::sqrt(std::max(-sg, 0.0)) : std::sqrt(std::max(dot(u, u), 0.0));
        y += m.sqrt_col * (double(branch) * root);
        return m.reflect * y;
    };

    auto chart_tag = [&](const Vec4& u, int branch) -> MeshVertexTag {
        // decompose u over (p0, w1, w2, w3); the chart misses b ~ 0
        double a0 = dot(u, m.p0), b0 = dot(u, m.w1), c0 = dot(u, m.w2), d0 = dot(u, m.w3);
        MeshVertexTag tag;
        tag.branch = branch;
        if (std::abs(b0) < 1e-9 * norm(u)) {
            tag.s = std::numeric_limits<double>::infinity();
            tag.t = std::numeric_limits<double>::infinity();
            return tag;
        }
        tag.s = c0 / b0;
        tag.t = d0 / b0;
        (void)a0;
        if (!on_sphere) {
            // sign of the chart scale decides which map branch this point carries
            Vec4 rr = m.w1 + m.w2 * tag.s + m.w3 * tag.t;
            Vec4 qr = q * rr;
            double rqr = dot(rr, qr);
            Vec4 uc = m.p0 * rqr - rr * (2.0 * dot(m.p0, qr));
            double mu = dot(uc, u) / std::max(dot(u, u), 1e-300);
            tag.branch = mu >= 0 ? branch : -branch;
        }
        return tag;
    };

    // --- base grids ---
    detail::BaseGrid grid;
    const double pi = 3.14159265358979323846;
    std::vector<int> index;
    if (ruled_base) {
        bool quotient = on_sphere;  // antipodal base points give the same surface point
        int nb = quotient ? res / 2 : res;
        index.assign(size_t(res) * size_t(nb), 0);
        for (int i = 0; i < res; ++i)
            for (int j = 0; j < nb; ++j) {
                grid.points.push_back(detail::torus_base_point(q, 2 * pi * i / res, 2 * pi * j / res));
                index[size_t(i) * size_t(nb) + size_t(j)] = int(grid.points.size()) - 1;
            }
        auto at = [&](int i, int j) {
            if (quotient) {
                if (j >= nb) {
                    j -= nb;
                    i += res / 2;
                }
            }
            i = ((i % res) + res) % res;
            j = ((j % (quotient ? nb : res)) + (quotient ? nb : res)) % (quotient ? nb : res);
            return index[size_t(i) * size_t(nb) + size_t(j)];
        };
        int jmax = nb;
        for (int i = 0; i < res; ++i)
            for (int j = 0; j < jmax; ++j)
                grid.quads.push_back({at(i, j), at(i + 1, j), at(i + 1, j + 1), at(i, j + 1)});
    } else {
        // oval base: latitude-longitude chart of the projective sphere
        EigenSym<4> e = eigen_sym(q);
        std::array<Vec4, 4> cols;
        for (int k = 0; k < 4; ++k)
            for (int i = 0; i < 4; ++i) cols[size_t(k)][i] = e.vectors(i, k);
        auto oval_point = [&](const Vec3& n) {
            Vec4 u{};
            int ip = 0;
            for (int k = 0; k < 4; ++k) {
                if (e.values[k] > 0) {
                    u += cols[size_t(k)] * (n[ip] / std::sqrt(e.values[k]));
                    ++ip;
                } else {
                    u += cols[size_t(k)] * (1.0 / std::sqrt(-e.values[k]));
                }
            }
            return u;
        };
        int rows = res, segs = res;
        std::vector<std::vector<int>> ring(size_t(rows) + 1);
        for (int i = 0; i <= rows; ++i) {
            double th = pi * i / rows;
            if (i == 0 || i == rows) {
                grid.points.push_back(oval_point(Vec3{{0, 0, i == 0 ? 1.0 : -1.0}}));
                ring[size_t(i)].push_back(int(grid.points.size()) - 1);
                continue;
            }
            for (int j = 0; j < segs; ++j) {
                double ph = 2 * pi * j / segs;
                grid.points.push_back(oval_point(
                    Vec3{{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)}}));
                ring[size_t(i)].push_back(int(grid.points.size()) - 1);
            }
        }
        for (int j = 0; j < segs; ++j) {
            grid.tris.push_back({ring[0][0], ring[1][size_t(j)], ring[1][size_t((j + 1) % segs)]});
            grid.tris.push_back({ring[size_t(rows)][0], ring[size_t(rows - 1)][size_t((j + 1) % segs)],
                                 ring[size_t(rows - 1)][size_t(j)]});
        }
        for (int i = 1; i + 1 < rows; ++i)
            for (int j = 0; j < segs; ++j) {
                int a = ring[size_t(i)][size_t(j)], b = ring[size_t(i)][size_t((j + 1) % segs)];
                int c = ring[size_t(i + 1)][size_t((j + 1) % segs)], dd = ring[size_t(i + 1)][size_t(j)];
                grid.quads.push_back({a, b, c, dd});
            }
    }

    // --- assemble surface vertices ---
    Mesh mesh;
    const double geom_scale = 1.0;  // cyclide is normalized
    std::vector<double> sigma(grid.points.size());
    for (size_t i = 0; i < grid.points.size(); ++i) sigma[i] = sigma_of(grid.points[i]);
    bool any_negative = false, any_positive = false;
    for (double s : sigma) {
        if (s <= 0) any_negative = true;
        if (s > 0) any_positive = true;
    }
    bool clipping = outside && any_positive && any_negative;
    if (outside && !any_negative) throw Error(ErrorKind::invalid_input, "sample_mesh: empty real surface");

    int nbranches = (on_sphere || ruled_base) ? 1 : 2;
    std::vector<std::array<int, 2>> vid(grid.points.size(), {-1, -1});
    auto emit_vertex = [&](const Vec4& u, int branch) -> int {
        Vec5 x = lift_to_space(u, branch);
        ProjPoint pp(x);
        double den = pp[4] - pp[3];
        if (std::abs(den) <= 1e-10) {
            mesh.complete = false;
            return -1;
        }
        mesh.vertices.push_back(Vec3{{pp[0] / den, pp[1] / den, pp[2] / den}});
        mesh.tags.push_back(chart_tag(u, branch));
        return int(mesh.vertices.size()) - 1;
    };

    std::map<std::pair<int, int>, int> seam_cache;  // clipped-edge crossings, shared by both branches
    auto seam_vertex = [&](int ia, int ib) -> int {
        auto key = std::minmax(ia, ib);
        auto it = seam_cache.find(key);
        if (it != seam_cache.end()) return it->second;
        Vec4 ua = grid.points[size_t(ia)], ub = grid.points[size_t(ib)];
        double sa = sigma[size_t(ia)], sb = sigma[size_t(ib)];
        double tau = sa / (sa - sb);
        Vec4 u = normalized(ua + (ub - ua) * tau);
        // polish onto {u'Qu = 0, sigma(u) = 0}
        for (int it2 = 0; it2 < 12; ++it2) {
            double f1 = dot(u, q * u), f2 = sigma_of(u);
            Vec4 g1 = (q * u) * 2.0;
            Vec4 g2 = (sig_mat * u) * 2.0;
            double a11 = dot(g1, g1), a12 = dot(g1, g2), a22 = dot(g2, g2);
            double det = a11 * a22 - a12 * a12;
            if (std::abs(det) < 1e-18) break;
            double l1 = (f1 * a22 - f2 * a12) / det;
            double l2 = (f2 * a11 - f1 * a12) / det;
            u = normalized(u - g1 * l1 - g2 * l2);
            if (std::abs(f1) + std::abs(f2) < 1e-14) break;
        }
        int idx = emit_vertex(u, +1);
        seam_cache[key] = idx;
        return idx;
    };

    auto add_polygon = [&](std::vector<int>& poly) {
        for (size_t k = 1; k + 1 < poly.size(); ++k) {
            if (poly[0] < 0 || poly[k] < 0 || poly[k + 1] < 0) {
                mesh.complete = false;
                continue;
            }
            mesh.triangles.push_back({poly[0], int(poly[k]), int(poly[k + 1])});
        }
    };

    auto cell_polygons = [&](const std::vector<int>& corners, int branch) {
        if (!clipping) {
            bool inside_all = true;
            for (int c : corners)
                if (sigma[size_t(c)] > 0) inside_all = false;
            if (!inside_all && outside) return;  // fully outside
            std::vector<int> poly;
            for (int c : corners) {
                int& slot = vid[size_t(c)][branch > 0 ? 0 : 1];
                if (slot < 0) slot = emit_vertex(grid.points[size_t(c)], branch);
                poly.push_back(slot);
            }
            add_polygon(poly);
            return;
        }
        std::vector<int> poly;
        int n = int(corners.size());
        for (int e = 0; e < n; ++e) {
            int a = corners[size_t(e)], b = corners[size_t((e + 1) % n)];
            bool ina = sigma[size_t(a)] <= 0, inb = sigma[size_t(b)] <= 0;
            if (ina) {
                int& slot = vid[size_t(a)][branch > 0 ? 0 : 1];
                if (slot < 0) slot = emit_vertex(grid.points[size_t(a)], branch);
                poly.push_back(slot);
            }
            if (ina != inb) poly.push_back(seam_vertex(a, b));
        }
        if (poly.size() >= 3) add_polygon(poly);
    };

    for (int branch = 0; branch < nbranches; ++branch) {
        int bsign = branch == 0 ? +1 : -1;
        if (branch == 1) {
            for (auto& vv : vid) vv[1] = -1;
        }
        for (const auto& qd : grid.quads) {
            std::vector<int> cs(qd.begin(), qd.end());
            cell_polygons(cs, bsign);
        }
        for (const auto& tr : grid.tris) {
            std::vector<int> cs(tr.begin(), tr.end());
            cell_polygons(cs, bsign);
        }
    }

    // weld coincident vertices (branch seams of the full-torus chart)
    {
        std::map<std::array<long long, 3>, int> bucket;
        std::vector<int> remap(mesh.vertices.size());
        std::vector<Vec3> verts;
        std::vector<MeshVertexTag> tags;
        const double weld = 1e-7 * (1.0 + geom_scale);
        for (size_t i = 0; i < mesh.vertices.size(); ++i) {
            const Vec3& v = mesh.vertices[i];
            std::array<long long, 3> key{};
            for (int k = 0; k < 3; ++k) key[size_t(k)] = llround(v[k] / weld / 16.0);
            auto it = bucket.find(key);
            if (it != bucket.end() && norm(verts[size_t(it->second)] - v) <= weld * 16.0) {
                remap[i] = it->second;
            } else {
                verts.push_back(v);
                tags.push_back(mesh.tags[i]);
                remap[i] = int(verts.size()) - 1;
                bucket[key] = remap[i];
            }
        }
        std::vector<std::array<int, 3>> tris;
        for (auto& t : mesh.triangles) {
            std::array<int, 3> nt{remap[size_t(t[0])], remap[size_t(t[1])], remap[size_t(t[2])]};
            if (nt[0] == nt[1] || nt[1] == nt[2] || nt[0] == nt[2]) continue;
            tris.push_back(nt);
        }
        std::sort(tris.begin(), tris.end(), [](auto a, auto b) {
            auto ka = a, kb = b;
            std::sort(ka.begin(), ka.end());
            std::sort(kb.begin(), kb.end());
            return ka < kb || (ka == kb && a < b);
        });
        std::vector<std::array<int, 3>> dedup;
        std::array<int, 3> last{-1, -1, -1};
        for (auto& t : tris) {
            auto k = t;
            std::sort(k.begin(), k.end());
            if (k == last) continue;
            last = k;
            dedup.push_back(t);
        }
        mesh.vertices = std::move(verts);
        mesh.tags = std::move(tags);
        mesh.triangles = std::move(dedup);
    }

    if (mesh.triangles.empty()) throw Error(ErrorKind::invalid_input, "sample_mesh: empty real surface");
    double worst = 0;
    const Vec3* worst_at = nullptr;
    for (const Vec3& v : mesh.vertices) {
        double local = std::pow(1.0 + dot(v, v), 2);
        double r = std::abs(d.eval(v)) / local;
        if (r > worst) {
            worst = r;
            worst_at = &v;
        }
    }
    if (worst > 1e-6 * d.scale()) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "sample_mesh: vertex residual %.3e above tolerance near (%g, %g, %g)", worst,
                      (*worst_at)[0], (*worst_at)[1], (*worst_at)[2]);
        throw Error(ErrorKind::numerical, buf);
    }
    return mesh;
}

}  // namespace cyweb
