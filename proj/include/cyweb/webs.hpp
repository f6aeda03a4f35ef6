#pragma once

#include <map>
#include <optional>
#include <random>
#include <vector>

#include "cyweb/param.hpp"

namespace cyweb {

enum class WebType { type1, type2, type3, type4, type5, non_web };

inline const char* web_type_name(WebType t) {
    switch (t) {
        case WebType::type1: return "Type1";
        case WebType::type2: return "Type2";
        case WebType::type3: return "Type3";
        case WebType::type4: return "Type4";
        case WebType::type5: return "Type5";
        default: return "NonWeb";
    }
}

/// Decision table over the family classes of a triple: two nonspecial
/// partners plus any further non-single family never form a web; every
/// other combination does.
inline WebType classify_triple(const std::vector<CircleFamily>& fams, int i, int j, int k) {
    if (i == j || j == k || i == k)
        throw Error(ErrorKind::invalid_input, "classify_triple: family indices must be distinct");
    const CircleFamily* f[3] = {&fams.at(size_t(i)), &fams.at(size_t(j)), &fams.at(size_t(k))};
    int singles = 0;
    for (auto* g : f) singles += g->is_single() ? 1 : 0;
    bool partners = false, special_pair = false;
    for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b)
            if (f[a]->partner == f[b]->id && f[b]->partner == f[a]->id) {
                partners = true;
                special_pair = f[a]->is_special();
            }
    if (singles == 0) {
        if (!partners) return WebType::type1;
        return special_pair ? WebType::type2 : WebType::non_web;
    }
    if (singles == 1) return partners ? WebType::type3 : WebType::type4;
    if (singles == 2) return WebType::type5;
    throw Error(ErrorKind::invalid_input, "classify_triple: three single families are not realizable");
}

namespace detail {

struct Marcher {
    const std::vector<CircleFamily>& fams;
    Cyclide surface;
    Tolerance tol;

    explicit Marcher(const std::vector<CircleFamily>& f, const Tolerance& t = {})
        : fams(f), tol(t) {
        if (f.empty()) throw Error(ErrorKind::invalid_input, "no families");
        surface = from_pencil(Pencil{f[0].pencilA});
    }

    Circle circle_of(int fam, const Vec3& x) const {
        return circle_through_point(fams.at(size_t(fam)), x, tol).second;
    }
    double param_of(int fam, const Vec3& x) const {
        return circle_through_point(fams.at(size_t(fam)), x, tol).first;
    }

    /// Draw the circle of family `fam` through `cur` and move to its
    /// intersection with `target`.  Of two candidates the one continuing
    /// past `cur` (positive projection on the last step) wins; ties fall
    /// to the nearest.
    std::optional<Vec3> step(int fam, const Vec3& cur, const Circle& target,
                             const Vec3* prev = nullptr) const {
        Circle moving = circle_of(fam, cur);
        auto pts = intersect_circles(moving, target, tol);
        std::vector<Vec3> cand;
        for (const auto& q : pts) {
            if (q.infinite) continue;
            if (norm(q.p - cur) <= 1e-8 * (1.0 + norm(cur))) continue;
            cand.push_back(q.p);
        }
        if (cand.empty()) return std::nullopt;
        if (cand.size() == 1) return cand[0];
        if (prev) {
            Vec3 dir = cur - *prev;
            if (norm(dir) > 1e-12) {
                std::vector<Vec3> ahead;
                for (const auto& c : cand)
                    if (dot(c - cur, dir) > 0) ahead.push_back(c);
                if (ahead.size() == 1) return ahead[0];
                if (!ahead.empty()) cand = ahead;
            }
        }
        std::sort(cand.begin(), cand.end(),
                  [&](const Vec3& a, const Vec3& b) { return norm(a - cur) < norm(b - cur); });
        return cand[0];
    }
};

/// Three marching legs advance the hexagon around o: seeded with a row
/// neighbour a1 they return the opposite row neighbour, seeded again they
/// close the figure.
inline std::optional<Vec3> half_hexagon(const Marcher& m, const std::array<int, 3>& triple,
                                        const Circle& k1, const Circle& k2, const Circle& k3,
                                        const Vec3& a1, const Vec3& o) {
    struct Leg { int fam; const Circle* target; };
    const Leg legs[3] = {{triple[1], &k3}, {triple[0], &k2}, {triple[2], &k1}};
    Vec3 cur = a1, prev = o;
    for (const Leg& leg : legs) {
        auto nxt = m.step(leg.fam, cur, *leg.target, &prev);
        if (!nxt) return std::nullopt;
        prev = cur;
        cur = *nxt;
    }
    return cur;
}

/// Row continuation: the node extending the first-family row through o
/// away from its neighbour a1.
inline std::optional<Vec3> hexagon_extend(const Marcher& m, const std::array<int, 3>& triple,
                                          const Vec3& o, const Vec3& a1) {
    Circle k1 = m.circle_of(triple[0], o);
    Circle k2 = m.circle_of(triple[1], o);
    Circle k3 = m.circle_of(triple[2], o);
    return half_hexagon(m, triple, k1, k2, k3, a1, o);
}

}  // namespace detail

/// Distance |A7 - A1| of the six-step hexagon figure around O seeded at A1.
/// Vanishes identically (to numerical noise) on genuine webs.
inline double closure_defect(const std::vector<CircleFamily>& fams, const std::array<int, 3>& triple,
                             const Vec3& o, const Vec3& a1, const Tolerance& tol = {}) {
    detail::Marcher m(fams, tol);
    Circle k1 = m.circle_of(triple[0], o);
    Circle k2 = m.circle_of(triple[1], o);
    Circle k3 = m.circle_of(triple[2], o);
    auto a4 = detail::half_hexagon(m, triple, k1, k2, k3, a1, o);
    if (!a4) throw Error(ErrorKind::numerical, "closure_defect: marching left the real locus");
    auto a7 = detail::half_hexagon(m, triple, k1, k2, k3, *a4, o);
    if (!a7) throw Error(ErrorKind::numerical, "closure_defect: marching left the real locus");
    return norm(*a7 - a1);
}

struct WebCircleRef {
    int family_id = -1;
    double s = 0;
};

struct WebInstance {
    std::array<int, 3> triple{};
    WebType type = WebType::non_web;
    Vec3 seed_o{}, seed_a1{};
    std::vector<WebCircleRef> circles;
    std::vector<std::vector<Vec3>> polylines;  // one sampled run per circle
    std::vector<Vec3> nodes;
    bool complete = true;
    bool closed = false;     // finite webs: lattice wraps in both directions
    double sigma_error = 0;  // finite webs: |sigma - 1| at convergence
    Mesh triangulation;      // finite webs: the closed web triangulation
};

namespace detail {

struct Lattice {
    std::map<std::pair<int, int>, Vec3> node;
    bool complete = true;

    bool has(int i, int j) const { return node.count({i, j}) > 0; }
    const Vec3& at(int i, int j) const { return node.at({i, j}); }
};

/// node(i, j+1) from the column circle at (i, j) and the diagonal circle
/// at (i+1, j); `prev` supplies the continuation direction.
inline std::optional<Vec3> lattice_step(const Marcher& m, const std::array<int, 3>& triple,
                                        const Vec3& col_pt, const Vec3& diag_pt, const Vec3& prev) {
    Circle c3 = m.circle_of(triple[2], diag_pt);
    return m.step(triple[1], col_pt, c3, &prev);
}

inline void collect_circles(const Marcher& m, const std::array<int, 3>& triple, const Lattice& lat,
                            int n, bool wrap, WebInstance& web) {
    std::map<std::pair<int, int>, bool> done;
    auto add_circle = [&](int slot, int index, const Vec3& x) {
        if (done.count({slot, index})) return;
        done[{slot, index}] = true;
        auto [s, c] = circle_through_point(m.fams.at(size_t(triple[size_t(slot)])), x, m.tol);
        web.circles.push_back({c.family_id, s});
        web.polylines.push_back(c.mc.sample(96));  // aligned with `circles`
    };
    for (auto& [ij, pt] : lat.node) {
        auto [i, j] = ij;
        int diag = wrap ? ((i + j) % n + n) % n : i + j;
        if (j >= 0 && j < n) add_circle(0, j, pt);
        if (i >= 0 && i < n) add_circle(1, i, pt);
        if (diag >= 0 && diag < n) add_circle(2, diag, pt);
        web.nodes.push_back(pt);
    }
}

}  // namespace detail

/// Discrete web patch: n curves of each family arranged as a triangular
/// lattice seeded at O, A1.  Marching that leaves the real locus returns a
/// partial instance with `complete = false`.
inline WebInstance discrete_web(const std::vector<CircleFamily>& fams, const std::array<int, 3>& triple,
                                const Vec3& o, const Vec3& a1, int n, const Tolerance& tol = {}) {
    WebType wt = classify_triple(fams, triple[0], triple[1], triple[2]);
    if (wt == WebType::non_web)
        throw Error(ErrorKind::invalid_input, "discrete_web: the triple does not form a web");
    if (n < 1) throw Error(ErrorKind::invalid_input, "discrete_web: n must be positive");
    detail::Marcher m(fams, tol);
    detail::Lattice lat;
    lat.node[{0, 0}] = o;
    lat.node[{1, 0}] = a1;

    for (int i = 1; i < n - 1 && lat.complete; ++i) {
        auto nxt = detail::hexagon_extend(m, triple, lat.at(i, 0), lat.at(i - 1, 0));
        if (!nxt) { lat.complete = false; break; }
        lat.node[{i + 1, 0}] = *nxt;
    }
    for (int j = 0; j + 1 < n && lat.complete; ++j) {
        for (int i = 0; i + j + 1 < n; ++i) {
            if (!lat.has(i, j) || !lat.has(i + 1, j)) { lat.complete = false; break; }
            Vec3 prev = (j > 0 && lat.has(i, j - 1)) ? lat.at(i, j - 1) : lat.at(i + 1, j);
            auto nxt = detail::lattice_step(m, triple, lat.at(i, j), lat.at(i + 1, j), prev);
            if (!nxt) { lat.complete = false; break; }
            lat.node[{i, j + 1}] = *nxt;
        }
    }

    WebInstance web;
    web.triple = triple;
    web.type = wt;
    web.seed_o = o;
    web.seed_a1 = a1;
    web.complete = lat.complete;
    detail::collect_circles(m, triple, lat, n, false, web);
    return web;
}

namespace detail {

/// Loop coordinate of a family parameter on the projective line.
inline double loop_angle(double s) {
    if (std::isinf(s)) return 3.14159265358979323846;
    return 2.0 * std::atan(s);
}

/// Marches `n` first-family rows from (o, a1) and accumulates the loop
/// fraction swept by the first-family parameter.
inline std::optional<double> march_winding(const Marcher& m, const std::array<int, 3>& triple,
                                           const Vec3& o, const Vec3& a1, int n) {
    Vec3 b = o, c = a1;
    double prev_angle = loop_angle(m.param_of(triple[0], b));
    double acc = 0;
    for (int j = 0; j < n; ++j) {
        Circle diag_b = m.circle_of(triple[2], b);
        auto b_next = m.step(triple[1], c, diag_b, &b);
        if (!b_next) return std::nullopt;
        Circle row_next = m.circle_of(triple[0], *b_next);
        auto c_next = m.step(triple[2], c, row_next, &b);
        if (!c_next) return std::nullopt;
        double ang = loop_angle(m.param_of(triple[0], *b_next));
        double dphi = ang - prev_angle;
        const double pi = 3.14159265358979323846;
        while (dphi > pi) dphi -= 2 * pi;
        while (dphi < -pi) dphi += 2 * pi;
        acc += dphi;
        prev_angle = ang;
        b = *b_next;
        c = *c_next;
    }
    return std::abs(acc) / (2 * 3.14159265358979323846);
}

}  // namespace detail

/// Finite web on a ring-shaped cyclide: iterates the seed spacing until
/// the n-th first-family curve returns to the starting curve, then builds
/// the closed n x n lattice and its triangulation.
inline WebInstance finite_web(const std::vector<CircleFamily>& fams, const std::array<int, 3>& triple,
                              int n, const std::pair<Vec3, Vec3>& seed, double tol_sigma = 1e-6,
                              const Tolerance& tol = {}) {
    WebType wt = classify_triple(fams, triple[0], triple[1], triple[2]);
    if (wt == WebType::non_web)
        throw Error(ErrorKind::invalid_input, "finite_web: the triple does not form a web");
    if (n < 3) throw Error(ErrorKind::invalid_input, "finite_web: n must be at least 3");
    detail::Marcher m(fams, tol);
    {
        Mesh probe = sample_mesh(m.surface, 24, tol);
        if (probe.euler_characteristic() != 0)
            throw Error(ErrorKind::invalid_input, "finite_web: surface is not ring-shaped");
    }
    const Vec3& o = seed.first;

    Circle k1 = m.circle_of(triple[0], o);
    CircleView k1v = k1.mc.view();
    if (k1v.kind != CircleView::Kind::circle)
        throw Error(ErrorKind::numerical, "finite_web: seed curve is not a bounded circle");
    Vec3 e1 = normalized(o - k1v.center);
    Vec3 e2 = cross(k1v.normal, e1);
    auto point_at_angle = [&](double phi) {
        return k1v.center + (e1 * std::cos(phi) + e2 * std::sin(phi)) * k1v.radius;
    };
    auto angle_of = [&](const Vec3& x) {
        Vec3 r = x - k1v.center;
        return std::atan2(dot(r, e2), dot(r, e1));
    };

    double phi = angle_of(seed.second);
    double sigma = 0;
    std::optional<double> prev_phi, prev_log;
    for (int it = 0; it < 50; ++it) {
        auto sg = detail::march_winding(m, triple, o, point_at_angle(phi), n);
        if (!sg) throw Error(ErrorKind::numerical, "finite_web: marching left the real locus");
        sigma = *sg;
        if (sigma <= 0) throw Error(ErrorKind::numerical, "finite_web: no winding detected");
        if (std::abs(sigma - 1.0) <= tol_sigma) break;
        double lg = std::log(sigma);
        double next;
        if (prev_phi && std::abs(lg - *prev_log) > 1e-14) {
            next = phi - lg * (phi - *prev_phi) / (lg - *prev_log);  // secant on log sigma
        } else {
            next = phi / sigma;
        }
        prev_phi = phi;
        prev_log = lg;
        phi = next;
    }
    if (std::abs(sigma - 1.0) > tol_sigma)
        throw Error(ErrorKind::numerical, "finite_web: sigma iteration did not converge");

    // closed n x n lattice
    Vec3 a1 = point_at_angle(phi);
    detail::Lattice lat;
    lat.node[{0, 0}] = o;
    lat.node[{1, 0}] = a1;
    double wrap_err = 0;
    auto fail = [&]() -> WebInstance {
        throw Error(ErrorKind::numerical, "finite_web: marching left the real locus");
    };
    for (int i = 1; i < n; ++i) {
        auto nxt = detail::hexagon_extend(m, triple, lat.at(i, 0), lat.at(i - 1, 0));
        if (!nxt) return fail();
        if (i + 1 < n) lat.node[{i + 1, 0}] = *nxt;
        else wrap_err = std::max(wrap_err, norm(*nxt - lat.at(0, 0)));
    }
    for (int j = 0; j + 1 < n; ++j) {
        for (int i = 0; i < n; ++i) {
            Vec3 prev = (j > 0) ? lat.at(i, j - 1) : lat.at((i + 1) % n, j);
            auto nxt = detail::lattice_step(m, triple, lat.at(i, j), lat.at((i + 1) % n, j), prev);
            if (!nxt) return fail();
            lat.node[{i, j + 1}] = *nxt;
        }
    }
    // closing row: j = n wraps to j = 0
    for (int i = 0; i < n; ++i) {
        Vec3 prev = lat.at(i, n - 1 - 1 >= 0 ? n - 2 : 0);
        auto nxt = detail::lattice_step(m, triple, lat.at(i, n - 1), lat.at((i + 1) % n, n - 1), prev);
        if (!nxt) return fail();
        // the wrapped column index of the closing row is shifted by the
        // diagonal drift; match against the nearest node of row 0
        double best = std::numeric_limits<double>::max();
        for (int i2 = 0; i2 < n; ++i2) best = std::min(best, norm(*nxt - lat.at(i2, 0)));
        wrap_err = std::max(wrap_err, best);
    }

    WebInstance web;
    web.triple = triple;
    web.type = wt;
    web.seed_o = o;
    web.seed_a1 = a1;
    web.sigma_error = std::abs(sigma - 1.0);
    detail::collect_circles(m, triple, lat, n, true, web);

    // welded triangulation of the closed lattice
    Mesh tri;
    auto idx = [&](int i, int j) { return ((i % n + n) % n) * n + ((j % n + n) % n); };
    tri.vertices.resize(size_t(n) * size_t(n));
    tri.tags.resize(tri.vertices.size());
    for (auto& [ij, pt] : lat.node) {
        auto [i, j] = ij;
        if (j < n) tri.vertices[size_t(idx(i, j))] = pt;
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            tri.triangles.push_back({idx(i, j), idx(i + 1, j), idx(i, j + 1)});
            tri.triangles.push_back({idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)});
        }
    web.triangulation = std::move(tri);
    double scale = 0;
    for (auto& [ij, pt] : lat.node) scale = std::max(scale, norm(pt));
    web.closed = wrap_err <= std::max(1e-4 * (1.0 + scale), 10 * tol_sigma * (1.0 + scale));
    return web;
}

/// Default seed: a surface point clear of the singular locus, plus the
/// companion point one nominal web step along the first family circle.
inline std::pair<Vec3, Vec3> default_seed(const std::vector<CircleFamily>& fams,
                                          const std::array<int, 3>& triple, int n, uint64_t seed_value,
                                          const Tolerance& tol = {}) {
    detail::Marcher m(fams, tol);
    Cyclide d = m.surface;
    Mesh probe = sample_mesh(d, 24, tol);
    std::vector<Vec3> sing;
    for (const Vec3& v : probe.vertices) {
        if (norm(d.gradient(v)) < 1e-3 * d.scale()) sing.push_back(v);
    }
    std::mt19937_64 rng(seed_value);
    std::vector<size_t> order(probe.vertices.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const Vec3* best = nullptr;
    double best_score = -1;
    int tried = 0;
    for (size_t i : order) {
        if (tried++ > 250) break;
        const Vec3& v = probe.vertices[i];
        double score = norm(d.gradient(v));
        for (const Vec3& s : sing) score = std::min(score, norm(v - s));
        bool ok = true;
        for (int slot = 0; slot < 3 && ok; ++slot) {
            try {
                Circle c = m.circle_of(triple[size_t(slot)], v);
                if (c.mc.view().kind != CircleView::Kind::circle) ok = false;
            } catch (const Error&) {
                ok = false;
            }
        }
        if (!ok) continue;
        if (score > best_score) {
            best_score = score;
            best = &probe.vertices[i];
        }
    }
    if (!best) throw Error(ErrorKind::numerical, "no admissible web seed found");
    Vec3 o = *best;
    Circle k1 = m.circle_of(triple[0], o);
    CircleView v = k1.mc.view();
    if (v.kind != CircleView::Kind::circle)
        throw Error(ErrorKind::numerical, "seed circle is not bounded");
    double delta = 2 * 3.14159265358979323846 * v.radius / (3.0 * n);
    Vec3 e1 = normalized(o - v.center);
    Vec3 e2 = cross(v.normal, e1);
    double phi = delta / v.radius;
    Vec3 a1 = v.center + (e1 * std::cos(phi) + e2 * std::sin(phi)) * v.radius;
    return {o, a1};
}

/// Offsets a seed pair to chordal distance `delta` along the first-family
/// circle through o.
inline Vec3 seed_at_distance(const std::vector<CircleFamily>& fams, int family, const Vec3& o,
                             double delta, const Tolerance& tol = {}) {
    Circle k1 = circle_through_point(fams.at(size_t(family)), o, tol).second;
    CircleView v = k1.mc.view();
    if (v.kind != CircleView::Kind::circle)
        throw Error(ErrorKind::numerical, "seed circle is not bounded");
    double phi = 2.0 * std::asin(std::min(1.0, delta / (2.0 * v.radius)));
    Vec3 e1 = normalized(o - v.center);
    Vec3 e2 = cross(v.normal, e1);
    return v.center + (e1 * std::cos(phi) + e2 * std::sin(phi)) * v.radius;
}

}  // namespace cyweb
