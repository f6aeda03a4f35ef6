#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace cyweb {

/// One relative tolerance knob threaded through every classification and
/// zero test in the library.  `at(s)` gives an absolute threshold for
/// quantities of magnitude `s`.
struct Tolerance {
    double rel = 1e-9;
    constexpr double at(double scale) const noexcept { return rel * (1.0 + scale); }
};

enum class ErrorKind { invalid_input, numerical };

struct Error : std::runtime_error {
    ErrorKind kind;
    Error(ErrorKind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

template <int N>
struct Vec {
    std::array<double, N> v{};

    double& operator[](int i) noexcept { return v[static_cast<size_t>(i)]; }
    double operator[](int i) const noexcept { return v[static_cast<size_t>(i)]; }

    Vec operator+(const Vec& o) const {
        Vec r;
        for (int i = 0; i < N; ++i) r[i] = v[size_t(i)] + o[i];
        return r;
    }
    Vec operator-(const Vec& o) const {
        Vec r;
        for (int i = 0; i < N; ++i) r[i] = v[size_t(i)] - o[i];
        return r;
    }
    Vec operator*(double s) const {
        Vec r;
        for (int i = 0; i < N; ++i) r[i] = v[size_t(i)] * s;
        return r;
    }
    Vec operator/(double s) const { return *this * (1.0 / s); }
    Vec operator-() const { return *this * -1.0; }
    Vec& operator+=(const Vec& o) { return *this = *this + o; }
    Vec& operator-=(const Vec& o) { return *this = *this - o; }
    Vec& operator*=(double s) { return *this = *this * s; }
};

template <int N>
inline Vec<N> operator*(double s, const Vec<N>& a) { return a * s; }

template <int N>
inline double dot(const Vec<N>& a, const Vec<N>& b) {
    double s = 0;
    for (int i = 0; i < N; ++i) s += a[i] * b[i];
    return s;
}

template <int N>
inline double norm(const Vec<N>& a) { return std::sqrt(dot(a, a)); }

template <int N>
inline Vec<N> normalized(const Vec<N>& a) {
    double n = norm(a);
    return n > 0 ? a / n : a;
}

using Vec3 = Vec<3>;
using Vec4 = Vec<4>;
using Vec5 = Vec<5>;

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return Vec3{{a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]}};
}

/// Dense N x N matrix, row major.
template <int N>
struct Mat {
    std::array<double, size_t(N) * N> m{};

    double& operator()(int i, int j) noexcept { return m[size_t(i) * N + size_t(j)]; }
    double operator()(int i, int j) const noexcept { return m[size_t(i) * N + size_t(j)]; }

    static Mat identity() {
        Mat r;
        for (int i = 0; i < N; ++i) r(i, i) = 1.0;
        return r;
    }
    static Mat diagonal(const Vec<N>& d) {
        Mat r;
        for (int i = 0; i < N; ++i) r(i, i) = d[i];
        return r;
    }

    Mat operator+(const Mat& o) const {
        Mat r;
        for (size_t i = 0; i < m.size(); ++i) r.m[i] = m[i] + o.m[i];
        return r;
    }
    Mat operator-(const Mat& o) const {
        Mat r;
        for (size_t i = 0; i < m.size(); ++i) r.m[i] = m[i] - o.m[i];
        return r;
    }
    Mat operator*(double s) const {
        Mat r;
        for (size_t i = 0; i < m.size(); ++i) r.m[i] = m[i] * s;
        return r;
    }
    Mat operator*(const Mat& o) const {
        Mat r;
        for (int i = 0; i < N; ++i)
            for (int k = 0; k < N; ++k) {
                double a = (*this)(i, k);
                if (a == 0.0) continue;
                for (int j = 0; j < N; ++j) r(i, j) += a * o(k, j);
            }
        return r;
    }
    Vec<N> operator*(const Vec<N>& x) const {
        Vec<N> r;
        for (int i = 0; i < N; ++i) {
            double s = 0;
            for (int j = 0; j < N; ++j) s += (*this)(i, j) * x[j];
            r[i] = s;
        }
        return r;
    }
    Mat transposed() const {
        Mat r;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) r(j, i) = (*this)(i, j);
        return r;
    }
    double max_abs() const {
        double s = 0;
        for (double x : m) s = std::max(s, std::abs(x));
        return s;
    }
    Mat symmetrized() const {
        Mat r;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) r(i, j) = 0.5 * ((*this)(i, j) + (*this)(j, i));
        return r;
    }
};

template <int N>
inline Mat<N> operator*(double s, const Mat<N>& a) { return a * s; }

template <int N>
inline Mat<N> outer(const Vec<N>& a, const Vec<N>& b) {
    Mat<N> r;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) r(i, j) = a[i] * b[j];
    return r;
}

template <int N>
inline double quadratic_form(const Mat<N>& q, const Vec<N>& x) {
    return dot(x, q * x);
}

using Mat3 = Mat<3>;
using Mat4 = Mat<4>;
using Mat5 = Mat<5>;

}  // namespace cyweb
