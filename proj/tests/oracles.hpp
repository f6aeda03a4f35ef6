// Shared fixtures and independent oracles for the test suites.
#pragma once

#include <random>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "cyweb/design.hpp"
#include "cyweb/io.hpp"
#include "cyweb/webs.hpp"

namespace fixtures {

using namespace cyweb;

/// Diagonal pencil carrying six circle families (paired cones at -1, 0, 1).
inline Pencil six_family_pencil() {
    return Pencil{Mat5::diagonal(Vec5{{-2, -1, 1, 2, 0}})};
}

/// Ring torus R = 2, r = 1: (x^2+y^2+z^2+3)^2 = 16 (x^2+y^2).
inline Cyclide ring_torus() {
    Cyclide d;
    d.lambda = 1;
    d.Qquad = Mat3::diagonal(Vec3{{-10, -10, 6}});
    d.Qconst = 9;
    return d;
}

inline Vec3 torus_point(double theta, double phi) {
    double w = 2.0 + std::cos(phi);
    return Vec3{{w * std::cos(theta), w * std::sin(theta), std::sin(phi)}};
}

/// Surface of revolution of a tilted circle: one single family plus two
/// paired pairs (five families).
inline Cyclide rotational_five_family() {
    Cyclide d;
    d.lambda = 1;
    d.Qquad = Mat3::diagonal(Vec3{{-10, -10, -2}});
    d.Qconst = 17;
    return d;
}

/// Non-rotational one-sheet hyperboloid x^2/4 + y^2 - z^2/2 = 1 as a cyclide.
inline Cyclide hyperboloid_quadric() {
    Cyclide d;
    d.Qquad = Mat3::diagonal(Vec3{{0.25, 1.0, -0.5}});
    d.Qconst = -1;
    return d;
}

/// The hyperboloid pushed through an inversion: carries a special pair.
inline Pencil inverted_hyperboloid() {
    Pencil p = to_pencil(hyperboloid_quadric());
    MSphere s = MSphere::from_center_radius2(Vec3{{0, 0, 3}}, 1.0);
    Mat5 m = inversion_matrix(s);
    Mat5 a = (m.transposed() * p.A * m).symmetrized();
    a = a + absolute_form() * (-frobenius_j(a) / 5.0);
    return Pencil{a};
}

/// Ellipsoid x^2/4 + y^2 + z^2/2 = 1 inverted in a unit sphere off the
/// surface; bounded quartic with the parametrization vertex on the absolute.
inline Pencil inverted_ellipsoid() {
    Cyclide e;
    e.Qquad = Mat3::diagonal(Vec3{{0.25, 1.0, 0.5}});
    e.Qconst = -1;
    Pencil p = to_pencil(e);
    MSphere s = MSphere::from_center_radius2(Vec3{{3, 0, 0}}, 1.0);
    Mat5 m = inversion_matrix(s);
    Mat5 a = (m.transposed() * p.A * m).symmetrized();
    a = a + absolute_form() * (-frobenius_j(a) / 5.0);
    return Pencil{a};
}

/// Two concentric spheres written as one quartic; disconnected zero set.
inline Cyclide concentric_pair() {
    Cyclide d;
    d.lambda = 1;
    d.Qquad = Mat3::diagonal(Vec3{{-3, -3, -3}});
    d.Qconst = 2.1;
    return d;
}

inline Mat5 random_symmetric(std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Mat5 a;
    for (int i = 0; i < 5; ++i)
        for (int j = i; j < 5; ++j) a(i, j) = a(j, i) = g(rng);
    return a;
}

inline Pencil random_irreducible_pencil(std::mt19937_64& rng) {
    for (int tries = 0; tries < 200; ++tries) {
        Mat5 a = random_symmetric(rng);
        a = a + absolute_form() * (-frobenius_j(a) / 5.0);
        Pencil p{a};
        try {
            if (classify(from_pencil(p)) == CyclideClass::irreducible) return p;
        } catch (const Error&) {
        }
    }
    throw Error(ErrorKind::numerical, "random irreducible pencil generation failed");
}

/// A surface point of the cyclide, from the sampled mesh.
inline Vec3 surface_point(const Cyclide& d, size_t idx = 0) {
    Mesh m = sample_mesh(d, 16);
    return m.vertices.at(idx % m.vertices.size());
}

/// Independent eigenvalue oracle: real eigenvalues of J^-1 A via Eigen.
inline std::vector<double> real_pencil_eigenvalues_oracle(const Mat5& a) {
    Eigen::Matrix<double, 5, 5> ja;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) ja(i, j) = (i == 4 ? -1.0 : 1.0) * a(i, j);
    Eigen::EigenSolver<Eigen::Matrix<double, 5, 5>> es(ja);
    std::vector<double> out;
    for (int i = 0; i < 5; ++i) {
        auto ev = es.eigenvalues()[i];
        if (std::abs(ev.imag()) < 1e-8 * (1.0 + std::abs(ev.real()))) out.push_back(ev.real());
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline double circle_distance(const Vec3& x, const CircleView& v) {
    if (v.kind == CircleView::Kind::line) {
        Vec3 r = x - v.line_point;
        return norm(r - v.line_dir * dot(r, v.line_dir));
    }
    Vec3 r = x - v.center;
    double h = dot(r, v.normal);
    Vec3 inplane = r - v.normal * h;
    double d = norm(inplane) - v.radius;
    return std::sqrt(h * h + d * d);
}

/// Normalized algebraic residual of a point against the quartic.
inline double surface_residual(const Cyclide& d, const Vec3& x) {
    double local = 1.0 + dot(x, x);
    return std::abs(d.eval(x)) / (local * local * d.scale());
}

inline std::array<double, 14> coeff_vector(const Cyclide& d) { return d.coefficients(); }

/// Max relative deviation between two coefficient vectors up to scale.
inline double coeff_ratio_deviation(const Cyclide& a, const Cyclide& b) {
    auto va = coeff_vector(a.normalized()), vb = coeff_vector(b.normalized());
    double m = 0;
    for (size_t i = 0; i < va.size(); ++i) m = std::max(m, std::abs(std::abs(va[i]) - std::abs(vb[i])));
    // sign-consistent comparison
    double dev_plus = 0, dev_minus = 0;
    for (size_t i = 0; i < va.size(); ++i) {
        dev_plus = std::max(dev_plus, std::abs(va[i] - vb[i]));
        dev_minus = std::max(dev_minus, std::abs(va[i] + vb[i]));
    }
    return std::min(dev_plus, dev_minus);
}

}  // namespace fixtures
