#include "mvpb/collision.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

#include "mvpb/quadrature.hpp"

namespace mvpb {

Real collision_frequency(Real speed) {
    if (speed < 0) throw ConfigError("collision_frequency: negative speed");
    const Real inv_sqrt2pi = 1.0 / std::sqrt(2.0 * kPi);
    if (speed < 1e-6) {
        // nu(r) = (3 + (5/6) r^2 + O(r^4)) / sqrt(2 pi)
        return inv_sqrt2pi * (3.0 + 5.0 / 6.0 * speed * speed);
    }
    const Real gauss_int = std::sqrt(kPi / 2.0) * std::erf(speed / std::sqrt(2.0));
    return inv_sqrt2pi *
           (std::exp(-0.5 * speed * speed) + 2.0 * (speed + 1.0 / speed) * gauss_int);
}

KernelTerms reference_kernel_terms() { return {2.0 / std::sqrt(2.0 * kPi), 0.5}; }

KernelTerms operator_kernel_terms() {
    const Real c = std::pow(2.0 * kPi, -1.5);
    return {3.0 * c, 0.75 * c};
}

Real kernel_radial(Real w, Real r, Real rp, const KernelTerms& terms) {
    const Real s2 = r * r + rp * rp;
    const Real d2 = r * r - rp * rp;
    const Real f2 = std::exp(-d2 * d2 / (8.0 * w * w) - w * w / 8.0) / w;
    const Real f1 = w * std::exp(-0.25 * s2);
    return terms.gain * f2 - terms.loss * f1;
}

Real collision_kernel_radial(Real w, Real r, Real rp) {
    return kernel_radial(w, r, rp, reference_kernel_terms());
}

Real collision_kernel(const Eigen::Vector3d& v, const Eigen::Vector3d& u) {
    const Real w = (v - u).norm();
    if (w < 1e-12) throw NumericalError("collision_kernel: |v-u| below 1e-12");
    return collision_kernel_radial(w, v.norm(), u.norm());
}

namespace {

// Legendre projection after w = |v-u|:
//   k_l(r,r') = 2 pi int_{|r-r'|}^{r+r'} k(w;r,r') P_l(c(w)) w/(r r') dw,
// with c(w) = (r^2 + r'^2 - w^2) / (2 r r').
struct ReductionDomain {
    Real lo, hi, inv_rrp;
    ReductionDomain(Real r, Real rp)
        : lo(std::abs(r - rp)), hi(r + rp), inv_rrp(1.0 / (r * rp)) {}
    Real cosine(Real w, Real r, Real rp) const {
        return std::clamp((r * r + rp * rp - w * w) * 0.5 * inv_rrp, -1.0, 1.0);
    }
};

}  // namespace

Real angular_reduce(int l, Real r, Real rp, Real tol, const KernelTerms& terms) {
    if (l < 0) throw ConfigError("angular_reduce: negative degree");
    const ReductionDomain dom(r, rp);
    std::vector<Real> pl(l + 1);
    auto integrand = [&](Real w) {
        legendre_all(dom.cosine(w, r, rp), l, pl.data());
        return kernel_radial(w, r, rp, terms) * pl[l] * w * dom.inv_rrp;
    };
    AdaptiveResult res = integrate_adaptive(integrand, dom.lo, dom.hi, tol * 1e-2, tol);
    if (!res.converged)
        throw NumericalError("angular_reduce: quadrature stalled at (r=" + std::to_string(r) +
                             ", r'=" + std::to_string(rp) + ", l=" + std::to_string(l) + ")");
    return 2.0 * kPi * res.value;
}

Real angular_reduce(int l, Real r, Real rp, Real tol) {
    return angular_reduce(l, r, rp, tol, reference_kernel_terms());
}

VectorXr angular_reduce_batch(int l_max, Real r, Real rp, const KernelTerms& terms) {
    const ReductionDomain dom(r, rp);
    // Panels sized so each sees at most ~1.5 oscillations of P_{l_max}.
    const int panels = std::max(8, l_max / 8);
    static thread_local GaussRule base = gauss_legendre(16);
    VectorXr acc = VectorXr::Zero(l_max + 1);
    std::vector<Real> pl(l_max + 1);
    const Real width = (dom.hi - dom.lo) / panels;
    for (int p = 0; p < panels; ++p) {
        const Real a = dom.lo + p * width;
        for (int q = 0; q < base.nodes.size(); ++q) {
            const Real w = a + 0.5 * width * (base.nodes[q] + 1.0);
            const Real wt = 0.5 * width * base.weights[q];
            const Real f = kernel_radial(w, r, rp, terms) * w * dom.inv_rrp * wt;
            legendre_all(dom.cosine(w, r, rp), l_max, pl.data());
            for (int l = 0; l <= l_max; ++l) acc[l] += f * pl[l];
        }
    }
    return 2.0 * kPi * acc;
}

MatrixXr CollisionOperator::L_matrix(const VelocityBasis& basis, int m) const {
    const int nb = basis.blocks(m), nr = basis.n_radial();
    MatrixXr L = MatrixXr::Zero(basis.dim(m), basis.dim(m));
    for (int k = 0; k < nb; ++k) {
        const int l = std::abs(m) + k;
        L.block(k * nr, k * nr, nr, nr) = K_blocks[l];
        L.block(k * nr, k * nr, nr, nr).diagonal() -= nu_diag;
    }
    return L;
}

VectorXc CollisionOperator::apply_L(const VelocityBasis& basis, int m, const VectorXc& f) const {
    const int nb = basis.blocks(m), nr = basis.n_radial();
    if (f.size() != basis.dim(m)) throw ConfigError("apply_L: dimension mismatch");
    VectorXc out(f.size());
    for (int k = 0; k < nb; ++k) {
        const int l = std::abs(m) + k;
        out.segment(k * nr, nr) = K_blocks[l] * f.segment(k * nr, nr) -
                                  nu_diag.cast<Complex>().cwiseProduct(f.segment(k * nr, nr));
    }
    return out;
}

namespace {

// Symmetric correction making K chi = nu chi exact on span{chi}. It leaves no
// coupling between span{chi} and its complement, so the corrected -L is the
// direct sum of 0 on the invariants and the compression of the raw -L.
void enforce_null_space(MatrixXr& A, const VectorXr& nu, const std::vector<VectorXr>& chis) {
    const int n = static_cast<int>(A.rows());
    MatrixXr C(n, static_cast<int>(chis.size()));
    for (size_t j = 0; j < chis.size(); ++j) C.col(static_cast<int>(j)) = chis[j];
    MatrixXr nuC = nu.asDiagonal() * C;
    MatrixXr P = C * C.transpose();
    MatrixXr Q = MatrixXr::Identity(n, n) - P;
    MatrixXr S = C.transpose() * nuC;  // small, symmetric
    A = Q * A * Q + nuC * C.transpose() + C * nuC.transpose() - C * S * C.transpose();
    A = 0.5 * (A + A.transpose());
}

}  // namespace

namespace {

// Barycentric Lagrange interpolation matrix from the basis nodes to a set of
// evaluation points.
MatrixXr interpolation_matrix(const VectorXr& nodes, const VectorXr& points) {
    const int n = static_cast<int>(nodes.size()), m = static_cast<int>(points.size());
    VectorXr lam = VectorXr::Ones(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (j != i) lam[i] /= (nodes[i] - nodes[j]);
    MatrixXr T = MatrixXr::Zero(m, n);
    for (int q = 0; q < m; ++q) {
        int hit = -1;
        for (int i = 0; i < n; ++i)
            if (points[q] == nodes[i]) hit = i;
        if (hit >= 0) {
            T(q, hit) = 1.0;
            continue;
        }
        Real denom = 0;
        for (int i = 0; i < n; ++i) denom += lam[i] / (points[q] - nodes[i]);
        for (int i = 0; i < n; ++i) T(q, i) = lam[i] / (points[q] - nodes[i]) / denom;
    }
    return T;
}

}  // namespace

CollisionOperator assemble_collision_operator(const VelocityBasis& basis,
                                              const AssembleOptions& opts) {
    const int nr = basis.n_radial();
    CollisionOperator op;
    op.nu_diag.resize(nr);
    for (int i = 0; i < nr; ++i) op.nu_diag[i] = collision_frequency(basis.nodes()[i]);

    // Row-wise product quadrature: the reduced kernel has a derivative kink at
    // r' = r, so each row integrates over [0, r_i] and [r_i, R] separately and
    // interpolates back to the basis nodes. Spectrally accurate per row; the
    // result is symmetrized.
    const KernelTerms terms = operator_kernel_terms();
    const int half = 32;
    GaussRule base = gauss_legendre(half);
    op.K_blocks.assign(basis.l_max() + 1, MatrixXr::Zero(nr, nr));
    VectorXr sw = basis.weights().cwiseSqrt();
    for (int i = 0; i < nr; ++i) {
        const Real ri = basis.nodes()[i];
        VectorXr pts(2 * half), wts(2 * half);
        for (int q = 0; q < half; ++q) {
            pts[q] = 0.5 * ri * (base.nodes[q] + 1.0);
            wts[q] = 0.5 * ri * base.weights[q];
            pts[half + q] = ri + 0.5 * (basis.r_max() - ri) * (base.nodes[q] + 1.0);
            wts[half + q] = 0.5 * (basis.r_max() - ri) * base.weights[q];
        }
        MatrixXr T = interpolation_matrix(basis.nodes(), pts);
        for (int l = 0; l <= basis.l_max(); ++l) {
            VectorXr row(2 * half);
            for (int q = 0; q < 2 * half; ++q)
                row[q] = wts[q] * pts[q] * pts[q] *
                         angular_reduce(l, ri, pts[q], opts.quad_tol, terms);
            op.K_blocks[l].row(i) = (row.transpose() * T);
        }
    }
    for (int l = 0; l <= basis.l_max(); ++l) {
        MatrixXr K = sw.asDiagonal() * op.K_blocks[l] * sw.cwiseInverse().asDiagonal();
        op.K_blocks[l] = 0.5 * (K + K.transpose());
    }

    if (opts.null_space_correction) {
        std::vector<VectorXr> l0_chis = {basis.chi0().segment(0, nr),
                                         basis.chi4().segment(0, nr)};
        enforce_null_space(op.K_blocks[0], op.nu_diag, l0_chis);
        std::vector<VectorXr> l1_chis = {
            basis.chi_long().segment(basis.block_offset(1, 0), nr)};
        enforce_null_space(op.K_blocks[1], op.nu_diag, l1_chis);
    }

    // Coercivity: smallest eigenvalue of -L on range(P1), scanning every
    // degree; degrees 0 and 1 are deflated by their null directions.
    Real mu = std::numeric_limits<Real>::max();
    for (int l = 0; l <= basis.l_max(); ++l) {
        MatrixXr negL = -op.K_blocks[l];
        negL.diagonal() += op.nu_diag;
        if (l <= 1) {
            MatrixXr C;
            if (l == 0) {
                C.resize(nr, 2);
                C.col(0) = basis.chi0().segment(0, nr);
                C.col(1) = basis.chi4().segment(0, nr);
            } else {
                C.resize(nr, 1);
                C.col(0) = basis.chi_long().segment(basis.block_offset(1, 0), nr);
            }
            // Push the enforced kernel far into the positive spectrum.
            negL += 1e3 * C * C.transpose();
        }
        Eigen::SelfAdjointEigenSolver<MatrixXr> es(negL, Eigen::EigenvaluesOnly);
        mu = std::min(mu, es.eigenvalues()[0]);
    }
    op.mu_h = mu;
    op.sixth_eigenvalue = mu;
    if (op.mu_h <= 0)
        throw NumericalError("assemble_collision_operator: nonpositive coercivity, "
                             "discretization under-resolved");

    VectorXr ratio = op.nu_diag.array() / (1.0 + basis.nodes().array());
    op.nu0 = ratio.minCoeff();
    op.nu1 = std::max(ratio.maxCoeff(), collision_frequency(0.0));
    return op;
}

}  // namespace mvpb
