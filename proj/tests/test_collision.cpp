#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "doctest.h"
#include "mvpb/collision.hpp"
#include "mvpb/quadrature.hpp"

using namespace mvpb;

namespace {

const VelocityBasis& default_basis() {
    static VelocityBasis b = VelocityBasis::build({});
    return b;
}

const CollisionOperator& default_op() {
    static CollisionOperator op = assemble_collision_operator(default_basis());
    return op;
}

}  // namespace

TEST_CASE("collision frequency limits and monotonicity") {
    // Series oracle at r -> 0: nu = (e^{-r^2/2} + 2(r + 1/r)(r - r^3/6 + r^5/40))/sqrt(2 pi)
    auto series = [](Real r) {
        const Real I = r - std::pow(r, 3) / 6.0 + std::pow(r, 5) / 40.0;
        return (std::exp(-0.5 * r * r) + 2.0 * (r + 1.0 / r) * I) / std::sqrt(2.0 * kPi);
    };
    CHECK(collision_frequency(0.0) == doctest::Approx(3.0 / std::sqrt(2.0 * kPi)).epsilon(1e-12));
    CHECK(collision_frequency(1e-4) == doctest::Approx(series(1e-4)).epsilon(1e-10));
    CHECK(collision_frequency(0.3) == doctest::Approx(series(0.3)).epsilon(1e-4));

    // erf asymptotics: nu(r)/r -> 1; at r = 50 within 3 percent.
    CHECK(collision_frequency(50.0) / 50.0 == doctest::Approx(1.0).epsilon(0.03));

    Real prev = collision_frequency(0.0);
    for (int i = 1; i <= 1000; ++i) {
        const Real v = collision_frequency(i * 0.02);
        CHECK(v >= prev - 1e-13);
        prev = v;
    }
}

TEST_CASE("kernel symmetry, rotation invariance, and a point value") {
    std::mt19937 rng(11);
    std::normal_distribution<Real> gauss;
    for (int trial = 0; trial < 20; ++trial) {
        Eigen::Vector3d v(gauss(rng), gauss(rng), gauss(rng));
        Eigen::Vector3d u(gauss(rng), gauss(rng), gauss(rng));
        CHECK(collision_kernel(v, u) == doctest::Approx(collision_kernel(u, v)).epsilon(1e-13));
        // rotate both arguments by a fixed rotation
        Eigen::Matrix3d R =
            Eigen::AngleAxisd(0.83, Eigen::Vector3d(1, 2, -1).normalized()).toRotationMatrix();
        CHECK(collision_kernel(R * v, R * u) ==
              doctest::Approx(collision_kernel(v, u)).epsilon(1e-12));
    }
    // Direct evaluation oracle: e^{-1/4} (2/sqrt(2 pi) - 1/2).
    const Real expected = std::exp(-0.25) * (2.0 / std::sqrt(2.0 * kPi) - 0.5);
    CHECK(collision_kernel({1, 0, 0}, {0, 0, 0}) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(0.23199).epsilon(1e-4));
    CHECK_THROWS_AS(collision_kernel({1, 0, 0}, {1, 0, 0}), NumericalError);
}

TEST_CASE("angular reduction is symmetric and reconstructs the kernel") {
    const Real r = 1.3, rp = 2.1;
    for (int l : {0, 1, 2, 5}) {
        CHECK(angular_reduce(l, r, rp) == doctest::Approx(angular_reduce(l, rp, r)).epsilon(1e-9));
    }
    // Legendre synthesis back at a generic off-diagonal angle.
    const Real ct = 0.37;
    const int lmax = 20;
    Real acc = 0;
    std::vector<Real> pl(lmax + 1);
    legendre_all(ct, lmax, pl.data());
    for (int l = 0; l <= lmax; ++l)
        acc += (2.0 * l + 1.0) / (4.0 * kPi) * angular_reduce(l, r, rp) * pl[l];
    Eigen::Vector3d v(r, 0, 0);
    Eigen::Vector3d u(rp * ct, rp * std::sqrt(1 - ct * ct), 0);
    CHECK(acc == doctest::Approx(collision_kernel(v, u)).epsilon(1e-4));
}

TEST_CASE("batched angular reduction agrees with the adaptive one") {
    const Real r = 0.9, rp = 3.4;
    const KernelTerms terms = operator_kernel_terms();
    VectorXr batch = angular_reduce_batch(24, r, rp, terms);
    for (int l : {0, 3, 11, 24})
        CHECK(batch[l] == doctest::Approx(angular_reduce(l, r, rp, 1e-9, terms)).epsilon(1e-8));
}

TEST_CASE("nystrom action matches a brute-force spherical-grid quadrature") {
    const VelocityBasis& b = default_basis();
    AssembleOptions opts;
    opts.null_space_correction = false;
    static CollisionOperator raw = assemble_collision_operator(b, opts);

    auto F = [](Real r) { return std::exp(-r * r / 3.0) * (1.0 + r); };
    const int nr = b.n_radial();
    VectorXr ftilde(nr);
    for (int i = 0; i < nr; ++i) ftilde[i] = std::sqrt(b.weights()[i]) * F(b.nodes()[i]);
    VectorXr ktilde = raw.K_blocks[0] * ftilde;

    // Oracle: independent spherical-grid quadrature of int k(v0,u) F(|u|) du
    // with the same operator normalization of the kernel.
    const KernelTerms terms = operator_kernel_terms();
    const int i0 = nr / 2;
    const Real r0 = b.nodes()[i0];
    GaussRule rad = gauss_legendre(240, 0.0, 10.0);
    GaussRule ang = gauss_legendre(480, -1.0, 1.0);
    Real oracle = 0;
    for (int i = 0; i < rad.nodes.size(); ++i) {
        const Real r = rad.nodes[i];
        Real inner = 0;
        for (int j = 0; j < ang.nodes.size(); ++j) {
            const Real c = ang.nodes[j];
            const Real w = std::sqrt(std::max(1e-30, r0 * r0 + r * r - 2 * r0 * r * c));
            inner += ang.weights[j] * kernel_radial(w, r0, r, terms);
        }
        oracle += rad.weights[i] * 2.0 * kPi * r * r * F(r) * inner;
    }
    const Real got = ktilde[i0] / std::sqrt(b.weights()[i0]);
    CHECK(got == doctest::Approx(oracle).epsilon(1e-3));
}

TEST_CASE("assembled operator annihilates the collision invariants") {
    const VelocityBasis& b = default_basis();
    const CollisionOperator& op = default_op();
    CHECK(op.apply_L(b, 0, b.chi0().cast<Complex>()).norm() < 1e-8);
    CHECK(op.apply_L(b, 0, b.chi_long().cast<Complex>()).norm() < 1e-8);
    CHECK(op.apply_L(b, 0, b.chi4().cast<Complex>()).norm() < 1e-8);
    CHECK(op.apply_L(b, 1, b.chi_transverse().cast<Complex>()).norm() < 1e-8);
}

TEST_CASE("L is self-adjoint, nonpositive, and coercive on range(P1)") {
    const VelocityBasis& b = default_basis();
    const CollisionOperator& op = default_op();
    MatrixXr L = op.L_matrix(b, 0);
    CHECK((L - L.transpose()).cwiseAbs().maxCoeff() < 1e-10);

    std::mt19937 rng(3);
    std::normal_distribution<Real> gauss;
    for (int trial = 0; trial < 5; ++trial) {
        VectorXr f(b.dim(0)), g(b.dim(0));
        for (int i = 0; i < b.dim(0); ++i) {
            f[i] = gauss(rng);
            g[i] = gauss(rng);
        }
        CHECK(std::abs(f.dot(L * g) - g.dot(L * f)) < 1e-10 * f.norm() * g.norm());
        CHECK(f.dot(L * f) <= 1e-10 * f.squaredNorm());
        ProjectionSet proj(b, 0);
        VectorXr p1f = proj.apply(Projector::P1, f);
        CHECK(f.dot(L * f) <= -op.mu_h * p1f.squaredNorm() + 1e-8 * f.squaredNorm());
    }

    CHECK(op.mu_h > 0.0);
    CHECK(op.mu_h > 0.1 * collision_frequency(0.0));
    CHECK(op.sixth_eigenvalue >= op.mu_h - 1e-12);

    // Spectrum of -L on range(P1) is real and nonnegative: smallest eigenvalue
    // of the deflated blocks is mu_h by construction; check the full sector.
    Eigen::SelfAdjointEigenSolver<MatrixXr> es(-L, Eigen::EigenvaluesOnly);
    CHECK(es.eigenvalues()[0] > -1e-9);   // three exact zeros
    CHECK(es.eigenvalues()[3] > 0.9 * op.mu_h);  // fourth eigenvalue above the gap
}

TEST_CASE("nu bounds and compactness trend") {
    const VelocityBasis& b = default_basis();
    const CollisionOperator& op = default_op();
    CHECK(op.nu0 > 0);
    CHECK(op.nu1 >= op.nu0);
    for (int i = 0; i < b.n_radial(); ++i) {
        const Real r = b.nodes()[i];
        CHECK(op.nu_diag[i] >= op.nu0 * (1 + r) - 1e-12);
        CHECK(op.nu_diag[i] <= op.nu1 * (1 + r) + 1e-12);
    }
    // Compactness trend: the kernel's diagonal kink limits the tail decay to
    // roughly j^-2, so sigma_20 sits near 5e-2 of sigma_1 at this resolution.
    Eigen::JacobiSVD<MatrixXr> svd(op.K_blocks[0]);
    const VectorXr sv = svd.singularValues();
    CHECK(sv[19] / sv[0] <= 1e-1);
    CHECK(sv[39] / sv[0] <= 1e-2);
    for (int j = 1; j < 40; ++j) CHECK(sv[j] <= sv[j - 1] + 1e-14);
}

TEST_CASE("coercivity is stable under radial refinement (smoke)") {
    BasisConfig c1{4, 24, 7.0, "gauss-legendre"};
    BasisConfig c2{4, 48, 7.0, "gauss-legendre"};
    CollisionOperator o1 = assemble_collision_operator(VelocityBasis::build(c1));
    CollisionOperator o2 = assemble_collision_operator(VelocityBasis::build(c2));
    CHECK(std::abs(o1.mu_h - o2.mu_h) / o2.mu_h < 0.05);
}
