#include <cmath>
#include <random>

#include "doctest.h"
#include "mvpb/quadrature.hpp"
#include "mvpb/velocity_basis.hpp"

using namespace mvpb;

namespace {

const VelocityBasis& default_basis() {
    static VelocityBasis b = VelocityBasis::build({});
    return b;
}

// Independent high-order quadrature oracle for radial Gaussian moments:
// int_0^R r^p e^{-r^2/2} dr with 400 nodes.
Real radial_moment_oracle(int p, Real R) {
    GaussRule r = gauss_legendre(400, 0.0, R);
    Real s = 0;
    for (int i = 0; i < 400; ++i)
        s += r.weights[i] * std::pow(r.nodes[i], p) * std::exp(-0.5 * r.nodes[i] * r.nodes[i]);
    return s;
}

}  // namespace

TEST_CASE("build validates configuration") {
    CHECK_THROWS_AS(VelocityBasis::build({3, 48, 8.0, "gauss-legendre"}), ConfigError);
    CHECK_THROWS_AS(VelocityBasis::build({9, 8, 8.0, "gauss-legendre"}), ConfigError);
    CHECK_THROWS_AS(VelocityBasis::build({9, 48, 3.5, "gauss-legendre"}), ConfigError);
    CHECK_THROWS_AS(VelocityBasis::build({9, 48, 8.0, "trapezoid"}), ConfigError);
}

TEST_CASE("gaussian moments reproduced to 1e-6") {
    const VelocityBasis& b = default_basis();
    CHECK(b.moment_relative_error() < 1e-6);
    // Mass of the Maxwellian: (chi0, chi0) = 1.
    CHECK(b.chi0().squaredNorm() == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("chi vectors are orthonormal and match gaussian-moment oracles") {
    const VelocityBasis& b = default_basis();
    CHECK(b.chi4().squaredNorm() == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(std::abs(b.chi0().dot(b.chi4())) < 1e-12);
    CHECK(std::abs(b.chi0().dot(b.chi_long())) < 1e-12);

    // (chi4, chi4) before Gram correction comes out 1 by the moment oracle:
    // E(|v|^2-3)^2/6 = (E|v|^4 - 6 E|v|^2 + 9)/6 = (15 - 18 + 9)/6 = 1.
    const Real c = 4.0 * kPi * std::pow(2.0 * kPi, -1.5) / 6.0;
    const Real raw = c * (radial_moment_oracle(6, b.r_max()) -
                          6.0 * radial_moment_oracle(4, b.r_max()) +
                          9.0 * radial_moment_oracle(2, b.r_max()));
    CHECK(raw == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("inner product against v1 chi1 matches sqrt(2/3)") {
    const VelocityBasis& b = default_basis();
    MatrixXr v1 = b.v1_matrix(0);
    const Real got = b.chi4().dot(v1 * b.chi_long());
    CHECK(got == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-9));
    // odd-even parity: (chi1, chi4) involves an odd power of v_par.
    CHECK(std::abs(b.chi_long().dot(b.chi4())) < 1e-12);
}

TEST_CASE("inner product is conjugate symmetric") {
    const VelocityBasis& b = default_basis();
    std::mt19937 rng(7);
    std::normal_distribution<Real> gauss;
    VectorXc f(b.dim(0)), g(b.dim(0));
    for (int i = 0; i < b.dim(0); ++i) {
        f[i] = Complex(gauss(rng), gauss(rng));
        g[i] = Complex(gauss(rng), gauss(rng));
    }
    CHECK(std::abs(inner_product(f, g) - std::conj(inner_product(g, f))) < 1e-12);
    VectorXc h(b.dim(1));
    CHECK_THROWS_AS(inner_product(f, (VectorXc)VectorXc::Zero(b.dim(1))), ConfigError);
    (void)h;
}

TEST_CASE("projections behave as orthogonal projectors") {
    const VelocityBasis& b = default_basis();
    ProjectionSet proj(b, 0);

    // P0(chi1) = chi1, P1(chi0) = 0.
    CHECK((proj.apply(Projector::P0, b.chi_long()) - b.chi_long()).norm() < 1e-12);
    CHECK(proj.apply(Projector::P1, b.chi0()).norm() < 1e-12);

    std::mt19937 rng(13);
    std::normal_distribution<Real> gauss;
    VectorXr f(b.dim(0));
    for (int i = 0; i < b.dim(0); ++i) f[i] = gauss(rng);

    VectorXr p0 = proj.apply(Projector::P0, f);
    VectorXr p1 = proj.apply(Projector::P1, f);
    CHECK((f - p0 - p1).norm() < 1e-12 * f.norm());
    CHECK(std::abs(p0.dot(p1)) < 1e-10 * f.squaredNorm());
    // idempotence
    CHECK((proj.apply(Projector::P0, p0) - p0).norm() < 1e-10);
    CHECK((proj.apply(Projector::P1, p1) - p1).norm() < 1e-10);
    // decomposition into the three macroscopic slots
    VectorXr sum = proj.apply(Projector::P0_1, f) + proj.apply(Projector::P0_2, f) +
                   proj.apply(Projector::P0_3, f);
    CHECK((sum - p0).norm() < 1e-12 * f.norm());
}

TEST_CASE("P1 of v1 chi1 equals v1^2 sqrt(M) minus its macroscopic part") {
    const VelocityBasis& b = default_basis();
    ProjectionSet proj(b, 0);
    MatrixXr v1 = b.v1_matrix(0);
    VectorXr f = v1 * b.chi_long();  // v1^2 sqrt(M) expressed in the basis
    VectorXr p1 = proj.apply(Projector::P1, f);
    // Gaussian-moment oracle: P0(v1^2 sqrt M) = chi0 + sqrt(2/3) chi4.
    VectorXr expected = f - b.chi0() - std::sqrt(2.0 / 3.0) * b.chi4();
    CHECK((p1 - expected).norm() < 1e-9);
}

TEST_CASE("parity: even and odd l blocks are orthogonal by construction") {
    const VelocityBasis& b = default_basis();
    VectorXr even = b.sector_function(0, [](int l, Real r) {
        return (l % 2 == 0) ? std::exp(-0.3 * r * r) * (1.0 + r) : 0.0;
    });
    VectorXr odd = b.sector_function(0, [](int l, Real r) {
        return (l % 2 == 1) ? std::exp(-0.2 * r * r) * r : 0.0;
    });
    CHECK(std::abs(even.dot(odd)) < 1e-12 * even.norm() * odd.norm());
}

TEST_CASE("refinement convergence of chi inner products") {
    BasisConfig coarse{9, 48, 8.0, "gauss-legendre"};
    BasisConfig fine{9, 96, 8.0, "gauss-legendre"};
    VelocityBasis b1 = VelocityBasis::build(coarse);
    VelocityBasis b2 = VelocityBasis::build(fine);
    // Compare a non-corrected moment: (v1 chi1, chi4).
    const Real m1 = b1.chi4().dot(b1.v1_matrix(0) * b1.chi_long());
    const Real m2 = b2.chi4().dot(b2.v1_matrix(0) * b2.chi_long());
    CHECK(std::abs(m1 - m2) < 1e-8);
}
