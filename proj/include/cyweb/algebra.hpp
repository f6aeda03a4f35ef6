#pragma once

#include <algorithm>
#include <optional>
#include <vector>

#include "cyweb/common.hpp"
#include "cyweb/numerics.hpp"

namespace cyweb {

/// Homogeneous point of P^4, stored at unit norm with the first
/// non-negligible coordinate positive so projective equality is a plain
/// vector comparison.
struct ProjPoint {
    Vec5 x;

    ProjPoint() = default;
    explicit ProjPoint(const Vec5& raw) : x(raw) { canonicalize(); }

    void canonicalize() {
        double n = norm(x);
        if (n == 0.0) throw Error(ErrorKind::invalid_input, "zero projective point");
        x = x / n;
        for (int i = 0; i < 5; ++i) {
            if (std::abs(x[i]) > 1e-12) {
                if (x[i] < 0) x = -x;
                break;
            }
        }
    }
    double operator[](int i) const { return x[i]; }
};

inline bool proj_equal(const ProjPoint& a, const ProjPoint& b, double tol = 1e-9) {
    return std::abs(std::abs(dot(a.x, b.x)) - 1.0) <= tol;
}

struct Inertia {
    int n_plus = 0, n_minus = 0, n_zero = 0;
    bool operator==(const Inertia& o) const {
        return n_plus == o.n_plus && n_minus == o.n_minus && n_zero == o.n_zero;
    }
};

/// Real univariate polynomial, coefficients ascending in the degree.
class Poly {
  public:
    std::vector<double> c;  // c[0] + c[1] t + ...

    Poly() : c{0.0} {}
    explicit Poly(std::vector<double> coeffs) : c(std::move(coeffs)) {
        if (c.empty()) c.push_back(0.0);
    }

    int degree() const {
        for (int i = int(c.size()) - 1; i >= 0; --i)
            if (c[size_t(i)] != 0.0) return i;
        return 0;
    }
    double max_coeff() const {
        double m = 0;
        for (double x : c) m = std::max(m, std::abs(x));
        return m;
    }
    Poly trimmed(double tol) const {
        Poly r = *this;
        int d = int(r.c.size()) - 1;
        while (d > 0 && std::abs(r.c[size_t(d)]) <= tol) --d;
        r.c.resize(size_t(d) + 1);
        return r;
    }
    bool is_zero(double tol) const { return max_coeff() <= tol; }

    double eval(double t) const {
        double s = 0;
        for (int i = int(c.size()) - 1; i >= 0; --i) s = s * t + c[size_t(i)];
        return s;
    }
    Poly derivative() const {
        if (c.size() <= 1) return Poly();
        std::vector<double> d(c.size() - 1);
        for (size_t i = 1; i < c.size(); ++i) d[i - 1] = double(i) * c[i];
        return Poly(d);
    }
    Poly operator*(const Poly& o) const {
        std::vector<double> r(c.size() + o.c.size() - 1, 0.0);
        for (size_t i = 0; i < c.size(); ++i)
            for (size_t j = 0; j < o.c.size(); ++j) r[i + j] += c[i] * o.c[j];
        return Poly(r);
    }
    Poly operator+(const Poly& o) const {
        std::vector<double> r(std::max(c.size(), o.c.size()), 0.0);
        for (size_t i = 0; i < c.size(); ++i) r[i] += c[i];
        for (size_t i = 0; i < o.c.size(); ++i) r[i] += o.c[i];
        return Poly(r);
    }
    Poly operator-(const Poly& o) const {
        std::vector<double> r(std::max(c.size(), o.c.size()), 0.0);
        for (size_t i = 0; i < c.size(); ++i) r[i] += c[i];
        for (size_t i = 0; i < o.c.size(); ++i) r[i] -= o.c[i];
        return Poly(r);
    }
    Poly operator*(double s) const {
        Poly r = *this;
        for (double& x : r.c) x *= s;
        return r;
    }

    /// Remainder of *this divided by d (degrees are tiny; classical schoolbook).
    Poly remainder(const Poly& d) const {
        Poly r = *this;
        int dd = d.degree();
        double lead = d.c[size_t(dd)];
        while (r.degree() >= dd && !(r.degree() == 0 && r.c[0] == 0.0)) {
            int rd = r.degree();
            if (rd < dd) break;
            double q = r.c[size_t(rd)] / lead;
            for (int i = 0; i <= dd; ++i) r.c[size_t(rd - dd + i)] -= q * d.c[size_t(i)];
            r.c[size_t(rd)] = 0.0;
            r = r.trimmed(0.0);
        }
        return r;
    }
    Poly quotient(const Poly& d) const {
        Poly r = *this;
        int dd = d.degree();
        double lead = d.c[size_t(dd)];
        std::vector<double> q(size_t(std::max(r.degree() - dd + 1, 1)), 0.0);
        while (r.degree() >= dd) {
            int rd = r.degree();
            if (rd < dd) break;
            double f = r.c[size_t(rd)] / lead;
            q[size_t(rd - dd)] = f;
            for (int i = 0; i <= dd; ++i) r.c[size_t(rd - dd + i)] -= f * d.c[size_t(i)];
            r.c[size_t(rd)] = 0.0;
            r = r.trimmed(0.0);
            if (rd == dd) break;
        }
        return Poly(q);
    }
    /// Coefficients of p(t + shift) by repeated synthetic division.
    Poly shifted(double shift) const {
        std::vector<double> a = c;
        int n = int(a.size());
        for (int k = 0; k < n; ++k)
            for (int i = n - 2; i >= k; --i) a[size_t(i)] += shift * a[size_t(i) + 1];
        return Poly(a);
    }
};

struct RootMult {
    double t;
    int multiplicity;
};

namespace detail {

inline std::vector<Poly> sturm_chain(const Poly& p, double tol) {
    std::vector<Poly> chain;
    chain.push_back(p.trimmed(tol));
    Poly d = p.derivative().trimmed(tol);
    if (d.degree() == 0 && d.c[0] == 0.0) return chain;
    chain.push_back(d);
    while (chain.back().degree() > 0) {
        Poly r = chain[chain.size() - 2].remainder(chain.back());
        r = r.trimmed(tol * std::max(p.max_coeff(), 1.0));
        if (r.is_zero(tol * std::max(p.max_coeff(), 1.0))) break;
        chain.push_back(r * -1.0);
    }
    return chain;
}

inline int sign_changes(const std::vector<Poly>& chain, double x) {
    int changes = 0, prev = 0;
    for (const Poly& q : chain) {
        double v = q.eval(x);
        int s = (v > 0) - (v < 0);
        if (s == 0) continue;
        if (prev != 0 && s != prev) ++changes;
        prev = s;
    }
    return changes;
}

/// gcd(p, p') with coefficient trimming; used to strip repeated roots so
/// every root of the square-free part is a clean sign change.
inline Poly square_free_part(const Poly& p, double tol) {
    double scale = std::max(p.max_coeff(), 1.0);
    Poly a = p.trimmed(tol * scale);
    Poly b = a.derivative().trimmed(tol * scale);
    while (b.degree() > 0 || std::abs(b.c[0]) > tol * scale) {
        Poly r = a.remainder(b).trimmed(tol * scale * 10.0);
        if (r.is_zero(tol * scale * 10.0)) {
            // b is (up to tolerance) the gcd
            return p.quotient(b);
        }
        a = b;
        b = r;
        if (b.degree() == 0) break;
    }
    return p;
}

}  // namespace detail

/// All real roots of p, ascending, with multiplicities.  Roots closer than
/// the cluster width 1e-8 * (1 + max|coeff|) of the magnitude-balanced
/// polynomial are merged.  Balancing substitutes t = sigma * tau so that
/// wildly scaled inputs (tiny roots under a unit leading coefficient) stay
/// well conditioned.
inline std::vector<RootMult> real_roots(const Poly& p_raw, const Tolerance& tol = {}) {
    double raw_scale = p_raw.max_coeff();
    if (raw_scale == 0.0) throw Error(ErrorKind::invalid_input, "zero polynomial has no root set");
    Poly p_top = p_raw.trimmed(1e-13 * raw_scale);
    int deg = p_top.degree();
    if (deg == 0) return {};
    double sigma = 0.0;
    double lead = std::abs(p_top.c[size_t(deg)]);
    for (int k = 0; k < deg; ++k) {
        double ck = std::abs(p_top.c[size_t(k)]);
        if (ck > 0) sigma = std::max(sigma, std::pow(ck / lead, 1.0 / double(deg - k)));
    }
    if (sigma <= 0) sigma = 1.0;
    Poly p_in;
    {
        std::vector<double> balanced(p_top.c.size());
        double pw = 1.0;
        for (size_t k = 0; k < p_top.c.size(); ++k) {
            balanced[k] = p_top.c[k] * pw;
            pw *= sigma;
        }
        p_in = Poly(balanced);
        p_in = p_in * (1.0 / p_in.max_coeff());
    }

    double scale = p_in.max_coeff();
    Poly p = p_in.trimmed(1e-13 * scale);
    if (p.degree() == 0) return {};

    Poly sf = detail::square_free_part(p, 1e-10);
    sf = sf.trimmed(1e-13 * std::max(sf.max_coeff(), 1.0));
    std::vector<Poly> chain = detail::sturm_chain(sf, 1e-13);

    double bound = 0;
    double lead = std::abs(sf.c[size_t(sf.degree())]);
    for (int i = 0; i < sf.degree(); ++i) bound = std::max(bound, std::abs(sf.c[size_t(i)]) / lead);
    bound += 1.0;

    std::vector<std::pair<double, double>> intervals;
    struct Seg { double a, b; int count; };
    std::vector<Seg> work{{-bound, bound, detail::sign_changes(chain, -bound) - detail::sign_changes(chain, bound)}};
    while (!work.empty()) {
        Seg s = work.back();
        work.pop_back();
        if (s.count <= 0) continue;
        if (s.count == 1 || s.b - s.a < 1e-14 * (1.0 + std::abs(s.a) + std::abs(s.b))) {
            intervals.push_back({s.a, s.b});
            continue;
        }
        // off-center split keeps sample points away from typical exact roots
        double m = s.a + (s.b - s.a) * 0.50000137371;
        if (sf.eval(m) == 0.0) m = s.a + (s.b - s.a) * 0.493151;
        int cm = detail::sign_changes(chain, m);
        int ca = detail::sign_changes(chain, s.a);
        int cb = detail::sign_changes(chain, s.b);
        work.push_back({s.a, m, ca - cm});
        work.push_back({m, s.b, cm - cb});
    }
    std::sort(intervals.begin(), intervals.end());

    std::vector<double> roots;
    for (auto [a, b] : intervals) {
        double fa = sf.eval(a), fb = sf.eval(b);
        double lo = a, hi = b;
        if (fa == 0.0) { roots.push_back(a); continue; }
        if (fb == 0.0) { roots.push_back(b); continue; }
        if (fa * fb > 0) {
            // splitting landed on a near-boundary root; fall back to derivative
            // sampling inside the interval
            double best = 0.5 * (a + b), bestv = std::abs(sf.eval(best));
            for (int i = 0; i <= 64; ++i) {
                double x = a + (b - a) * i / 64.0;
                double v = std::abs(sf.eval(x));
                if (v < bestv) { best = x; bestv = v; }
            }
            roots.push_back(best);
            continue;
        }
        for (int it = 0; it < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo) + std::abs(hi)); ++it) {
            double m = 0.5 * (lo + hi);
            double fm = sf.eval(m);
            if (fm == 0.0) { lo = hi = m; break; }
            if ((fa < 0) == (fm < 0)) lo = m; else hi = m;
        }
        double r = 0.5 * (lo + hi);
        // Newton polish on the square-free part
        Poly dsf = sf.derivative();
        for (int it = 0; it < 4; ++it) {
            double d = dsf.eval(r);
            if (std::abs(d) < 1e-300) break;
            double step = sf.eval(r) / d;
            if (!std::isfinite(step)) break;
            r -= step;
        }
        roots.push_back(r);
    }
    std::sort(roots.begin(), roots.end());

    // multiplicities from the shifted coefficients of the original p
    double cluster = 1e-8 * (1.0 + scale) / std::max(1.0, scale) * scale;  // == 1e-8*(1+scale)
    cluster = 1e-8 * (1.0 + scale);
    std::vector<RootMult> out;
    for (double r : roots) {
        Poly sh = p.shifted(r);
        double m = sh.max_coeff();
        int mult = 0;
        while (mult < int(sh.c.size()) &&
               std::abs(sh.c[size_t(mult)]) <= 1e-7 * m * std::pow(1.0 + std::abs(r), double(mult)))
            ++mult;
        if (mult == 0) mult = 1;
        if (!out.empty() && std::abs(r - out.back().t) <= cluster) {
            out.back().multiplicity += mult;
            out.back().t = 0.5 * (out.back().t + r);
        } else {
            out.push_back({r, mult});
        }
    }
    // degree bookkeeping: never report more roots than the degree
    int total = 0;
    for (auto& rm : out) total += rm.multiplicity;
    if (total > p.degree())
        for (auto& rm : out) rm.multiplicity = std::max(1, rm.multiplicity * p.degree() / total);
    for (auto& rm : out) rm.t *= sigma;  // undo the balancing substitution
    (void)tol;
    return out;
}

// ---------------------------------------------------------------------------
// pencil linear algebra on the homogeneous 5-space
// ---------------------------------------------------------------------------

/// det(A - t J) expanded exactly (Leibniz over the 5x5, entries linear in t).
inline Poly char_poly(const Mat5& a, const Mat5& j) {
    // recursive expansion along the first free row with degree-1 entries
    struct Entry { double c0, c1; };
    std::array<std::array<Entry, 5>, 5> e{};
    for (int i = 0; i < 5; ++i)
        for (int k = 0; k < 5; ++k) e[size_t(i)][size_t(k)] = {a(i, k), -j(i, k)};

    std::vector<double> acc(6, 0.0);
    std::array<int, 5> cols{};
    std::array<bool, 5> used{};
    std::array<double, 6> prod{};
    auto rec = [&](auto&& self, int row, int sign, std::array<double, 6> cur, int deg) -> void {
        if (row == 5) {
            for (int d = 0; d <= deg; ++d) acc[size_t(d)] += sign * cur[size_t(d)];
            return;
        }
        for (int col = 0; col < 5; ++col) {
            if (used[size_t(col)]) continue;
            const Entry& en = e[size_t(row)][size_t(col)];
            if (en.c0 == 0.0 && en.c1 == 0.0) continue;
            std::array<double, 6> nxt{};
            for (int d = 0; d <= deg; ++d) {
                nxt[size_t(d)] += cur[size_t(d)] * en.c0;
                nxt[size_t(d) + 1] += cur[size_t(d)] * en.c1;
            }
            used[size_t(col)] = true;
            // permutation sign: count used columns greater than col before this row
            int inv = 0;
            for (int cc = col + 1; cc < 5; ++cc)
                if (used[size_t(cc)]) ++inv;
            self(self, row + 1, sign * (inv % 2 ? -1 : 1), nxt, deg + 1);
            used[size_t(col)] = false;
        }
    };
    (void)cols;
    std::array<double, 6> one{};
    one[0] = 1.0;
    rec(rec, 0, 1, one, 0);
    (void)prod;
    return Poly(acc).trimmed(0.0);
}

inline Inertia inertia(const Mat5& c, const Tolerance& tol = {}) {
    EigenSym<5> e = eigen_sym(c);
    double lmax = 0;
    for (int i = 0; i < 5; ++i) lmax = std::max(lmax, std::abs(e.values[i]));
    double thr = tol.rel * (1.0 + lmax);
    Inertia r;
    for (int i = 0; i < 5; ++i) {
        if (e.values[i] > thr) ++r.n_plus;
        else if (e.values[i] < -thr) ++r.n_minus;
        else ++r.n_zero;
    }
    return r;
}

inline double eval_quadric(const Mat5& c, const ProjPoint& x) { return quadratic_form(c, x.x); }

struct Congruence {
    Mat5 k;   // orthogonal; k^T C k = diag(d)
    Vec5 d;   // (k1^2, k2^2, -k3^2, -k4^2, 0) ordering, zeros snapped
};

/// Orders an eigen-decomposition into the normal form
/// diag(k1^2, k2^2, -k3^2, -k4^2, 0): positives first, negatives next,
/// zero last; for the two-zero signatures the spare zero sits in slot 2
/// or 4 so the plane formulas read k2 = 0 resp. k4 = 0.
inline Congruence congruence_diagonalize(const Mat5& c, const Tolerance& tol = {}) {
    EigenSym<5> e = eigen_sym(c);
    double lmax = 0;
    for (int i = 0; i < 5; ++i) lmax = std::max(lmax, std::abs(e.values[i]));
    double thr = tol.rel * (1.0 + lmax);
    std::vector<int> pos, neg, zer;
    for (int i = 0; i < 5; ++i) {
        if (e.values[i] > thr) pos.push_back(i);
        else if (e.values[i] < -thr) neg.push_back(i);
        else zer.push_back(i);
    }
    std::sort(pos.begin(), pos.end(), [&](int i, int j) { return e.values[i] > e.values[j]; });
    std::sort(neg.begin(), neg.end(), [&](int i, int j) { return e.values[i] < e.values[j]; });

    Inertia sig{int(pos.size()), int(neg.size()), int(zer.size())};
    std::array<int, 5> order{};
    if (sig == Inertia{2, 2, 1}) {
        order = {pos[0], pos[1], neg[0], neg[1], zer[0]};
    } else if (sig == Inertia{2, 1, 2}) {
        order = {pos[0], pos[1], neg[0], zer[0], zer[1]};  // k4 = 0
    } else if (sig == Inertia{1, 2, 2}) {
        order = {pos[0], zer[0], neg[0], neg[1], zer[1]};  // k2 = 0
    } else {
        throw Error(ErrorKind::invalid_input, "congruence_diagonalize: unsupported signature");
    }
    Congruence r;
    for (int j = 0; j < 5; ++j) {
        int src = order[size_t(j)];
        double val = e.values[src];
        r.d[j] = (std::abs(val) <= thr) ? 0.0 : val;
        for (int i = 0; i < 5; ++i) r.k(i, j) = e.vectors(i, src);
    }
    return r;
}

inline std::vector<ProjPoint> null_space(const Mat5& c, const Tolerance& tol = {}) {
    EigenSym<5> e = eigen_sym(c);
    double lmax = 0;
    for (int i = 0; i < 5; ++i) lmax = std::max(lmax, std::abs(e.values[i]));
    double thr = tol.rel * (1.0 + lmax);
    std::vector<ProjPoint> out;
    for (int k = 0; k < 5; ++k) {
        if (std::abs(e.values[k]) > thr) continue;
        Vec5 v;
        for (int i = 0; i < 5; ++i) v[i] = e.vectors(i, k);
        out.push_back(ProjPoint(v));
    }
    return out;
}

}  // namespace cyweb
