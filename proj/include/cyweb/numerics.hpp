#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "cyweb/common.hpp"

namespace cyweb {

template <int N>
struct EigenSym {
    Vec<N> values;   // ascending
    Mat<N> vectors;  // columns, orthonormal
};

/// Cyclic Jacobi for symmetric matrices.  Unconditionally stable at the
/// sizes used here (N <= 5) and accurate to machine precision.
template <int N>
EigenSym<N> eigen_sym(const Mat<N>& a_in) {
    Mat<N> a = a_in.symmetrized();
    Mat<N> v = Mat<N>::identity();
    const double scale = std::max(a.max_abs(), 1e-300);
    for (int sweep = 0; sweep < 60; ++sweep) {
        double off = 0;
        for (int p = 0; p < N; ++p)
            for (int q = p + 1; q < N; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off <= 1e-16 * scale) break;
        for (int p = 0; p < N; ++p)
            for (int q = p + 1; q < N; ++q) {
                double apq = a(p, q);
                if (std::abs(apq) <= 1e-18 * scale) continue;
                double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = (tau >= 0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                      : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;
                for (int k = 0; k < N; ++k) {
                    double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < N; ++k) {
                    double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < N; ++k) {
                    double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
    }
    std::array<int, size_t(N)> idx{};
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return a(i, i) < a(j, j); });
    EigenSym<N> r;
    for (int j = 0; j < N; ++j) {
        r.values[j] = a(idx[size_t(j)], idx[size_t(j)]);
        // deterministic sign: largest-magnitude component positive
        int imax = 0;
        for (int i = 1; i < N; ++i)
            if (std::abs(v(i, idx[size_t(j)])) > std::abs(v(imax, idx[size_t(j)]))) imax = i;
        double sgn = v(imax, idx[size_t(j)]) >= 0 ? 1.0 : -1.0;
        for (int i = 0; i < N; ++i) r.vectors(i, j) = sgn * v(i, idx[size_t(j)]);
    }
    return r;
}

/// Right singular vectors and singular values of an m x n matrix
/// (row-major, m*n doubles) by one-sided Jacobi orthogonalization.
/// Avoids forming A^T A, so small singular values are trustworthy.
struct SvdRight {
    std::vector<double> sigma;           // size n, descending
    std::vector<std::vector<double>> v;  // n right singular vectors, length n
};

inline SvdRight svd_right(const std::vector<double>& a_in, int m, int n) {
    std::vector<double> a = a_in;  // m x n, column j at a[i*n+j]
    std::vector<double> v(size_t(n) * size_t(n), 0.0);
    for (int j = 0; j < n; ++j) v[size_t(j) * size_t(n) + size_t(j)] = 1.0;
    auto col_dot = [&](int p, int q) {
        double s = 0;
        for (int i = 0; i < m; ++i) s += a[size_t(i) * size_t(n) + size_t(p)] * a[size_t(i) * size_t(n) + size_t(q)];
        return s;
    };
    double scale = 0;
    for (double x : a) scale = std::max(scale, std::abs(x));
    scale = std::max(scale, 1e-300);
    for (int sweep = 0; sweep < 80; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                double app = col_dot(p, p), aqq = col_dot(q, q), apq = col_dot(p, q);
                if (std::abs(apq) <= 1e-17 * scale * scale + 1e-15 * std::sqrt(app * aqq)) continue;
                rotated = true;
                double tau = (aqq - app) / (2.0 * apq);
                double t = (tau >= 0) ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                      : 1.0 / (tau - std::sqrt(1.0 + tau * tau));
                double c = 1.0 / std::sqrt(1.0 + t * t);
                double s = t * c;
                for (int i = 0; i < m; ++i) {
                    double& aip = a[size_t(i) * size_t(n) + size_t(p)];
                    double& aiq = a[size_t(i) * size_t(n) + size_t(q)];
                    double x = aip, y = aiq;
                    aip = c * x - s * y;
                    aiq = s * x + c * y;
                }
                for (int i = 0; i < n; ++i) {
                    double& vip = v[size_t(i) * size_t(n) + size_t(p)];
                    double& viq = v[size_t(i) * size_t(n) + size_t(q)];
                    double x = vip, y = viq;
                    vip = c * x - s * y;
                    viq = s * x + c * y;
                }
            }
        if (!rotated) break;
    }
    SvdRight r;
    std::vector<int> idx(static_cast<size_t>(n), 0);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> sig(static_cast<size_t>(n), 0.0);
    for (int j = 0; j < n; ++j) sig[size_t(j)] = std::sqrt(std::max(col_dot(j, j), 0.0));
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return sig[size_t(i)] > sig[size_t(j)]; });
    for (int j = 0; j < n; ++j) {
        r.sigma.push_back(sig[size_t(idx[size_t(j)])]);
        std::vector<double> col(static_cast<size_t>(n), 0.0);
        for (int i = 0; i < n; ++i) col[size_t(i)] = v[size_t(i) * size_t(n) + size_t(idx[size_t(j)])];
        r.v.push_back(std::move(col));
    }
    return r;
}

/// Null-space basis (right singular vectors with sigma <= tol * sigma_max).
inline std::vector<std::vector<double>> null_space_of(const std::vector<double>& a, int m, int n,
                                                      double rel_tol) {
    SvdRight s = svd_right(a, m, n);
    double smax = s.sigma.empty() ? 0.0 : s.sigma[0];
    std::vector<std::vector<double>> out;
    for (size_t j = 0; j < s.sigma.size(); ++j)
        if (s.sigma[j] <= rel_tol * std::max(smax, 1e-300) || s.sigma[j] == 0.0) out.push_back(s.v[j]);
    // m < n: svd reports only n sigmas but rank <= m; missing directions have sigma 0 already.
    return out;
}

template <int N>
struct Lu {
    Mat<N> lu;
    std::array<int, size_t(N)> piv{};
    double det = 0;
    bool singular = false;
};

template <int N>
Lu<N> lu_decompose(const Mat<N>& a_in) {
    Lu<N> r;
    r.lu = a_in;
    r.det = 1.0;
    for (int i = 0; i < N; ++i) r.piv[size_t(i)] = i;
    for (int k = 0; k < N; ++k) {
        int p = k;
        for (int i = k + 1; i < N; ++i)
            if (std::abs(r.lu(i, k)) > std::abs(r.lu(p, k))) p = i;
        if (p != k) {
            for (int j = 0; j < N; ++j) std::swap(r.lu(p, j), r.lu(k, j));
            std::swap(r.piv[size_t(p)], r.piv[size_t(k)]);
            r.det = -r.det;
        }
        double pivot = r.lu(k, k);
        r.det *= pivot;
        if (pivot == 0.0) {
            r.singular = true;
            continue;
        }
        for (int i = k + 1; i < N; ++i) {
            r.lu(i, k) /= pivot;
            for (int j = k + 1; j < N; ++j) r.lu(i, j) -= r.lu(i, k) * r.lu(k, j);
        }
    }
    return r;
}

template <int N>
Vec<N> lu_solve(const Lu<N>& f, const Vec<N>& b) {
    Vec<N> x;
    for (int i = 0; i < N; ++i) x[i] = b[f.piv[size_t(i)]];
    for (int i = 1; i < N; ++i)
        for (int j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
    for (int i = N - 1; i >= 0; --i) {
        for (int j = i + 1; j < N; ++j) x[i] -= f.lu(i, j) * x[j];
        x[i] /= f.lu(i, i);
    }
    return x;
}

template <int N>
Mat<N> inverse(const Mat<N>& a) {
    Lu<N> f = lu_decompose(a);
    if (f.singular) throw Error(ErrorKind::numerical, "singular matrix");
    Mat<N> inv;
    for (int j = 0; j < N; ++j) {
        Vec<N> e;
        e[j] = 1.0;
        Vec<N> x = lu_solve(f, e);
        for (int i = 0; i < N; ++i) inv(i, j) = x[i];
    }
    return inv;
}

template <int N>
double determinant(const Mat<N>& a) {
    return lu_decompose(a).det;
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix.
template <int N>
Mat<N> pseudo_inverse_sym(const Mat<N>& a, double rel_tol) {
    EigenSym<N> e = eigen_sym(a);
    double lmax = 0;
    for (int i = 0; i < N; ++i) lmax = std::max(lmax, std::abs(e.values[i]));
    Mat<N> r;
    for (int k = 0; k < N; ++k) {
        if (std::abs(e.values[k]) <= rel_tol * std::max(lmax, 1e-300)) continue;
        Vec<N> vk;
        for (int i = 0; i < N; ++i) vk[i] = e.vectors(i, k);
        r = r + outer(vk, vk) * (1.0 / e.values[k]);
    }
    return r;
}

}  // namespace cyweb
