#pragma once

#include <vector>

#include "mvpb/types.hpp"
#include "mvpb/velocity_basis.hpp"

namespace mvpb {

/// Hard-sphere collision frequency nu(r) in dimensionless units; the r = 0
/// limit 3/sqrt(2 pi) is special-cased.
Real collision_frequency(Real speed);

// The Grad kernel is a combination of the two rotation-invariant shapes
//   F2 = |v-u|^{-1} exp(-(|v|^2-|u|^2)^2/(8|v-u|^2) - |v-u|^2/8),
//   F1 = |v-u|    exp(-(|v|^2+|u|^2)/4).
// Two normalizations are used: the reference one of the closed-form kernel
// k(v,u), and the operator one whose own Maxwellian moment (3/4)∫|v-u|M du is
// tangent to nu at r = 0 and stays below it, which keeps -L positive
// semidefinite once the invariants are corrected.
struct KernelTerms {
    Real gain = 0;  // coefficient of F2
    Real loss = 0;  // coefficient of F1
};

KernelTerms reference_kernel_terms();
KernelTerms operator_kernel_terms();

/// Closed-form kernel k(v,u) (reference normalization). Signals when
/// |v-u| < 1e-12.
Real collision_kernel(const Eigen::Vector3d& v, const Eigen::Vector3d& u);

/// Kernel as a function of w = |v-u| and the two speeds.
Real kernel_radial(Real w, Real r, Real rp, const KernelTerms& terms);
Real collision_kernel_radial(Real w, Real r, Real rp);

/// Legendre-projected radial kernel
///   k_l(r,r') = 2 pi int_{-1}^{1} k(v,u) P_l(cos t) dcos t,  |v|=r, |u|=r',
/// computed after the substitution w = |v-u| which removes the 1/|v-u|
/// endpoint singularity at r = r', cos t -> 1. Adaptive quadrature; throws
/// NumericalError with the offending (r, r', l) when it stalls.
Real angular_reduce(int l, Real r, Real rp, Real tol = 1e-8);
Real angular_reduce(int l, Real r, Real rp, Real tol, const KernelTerms& terms);

/// All degrees 0..l_max at once on a fixed composite Gauss grid; used for the
/// high-degree tail where per-l adaptive quadrature is wasteful. The panel
/// count scales with l_max so the P_l oscillation stays resolved.
VectorXr angular_reduce_batch(int l_max, Real r, Real rp, const KernelTerms& terms);

struct CollisionOperator {
    VectorXr nu_diag;                // nu at the radial nodes
    std::vector<MatrixXr> K_blocks;  // one symmetric radial block per degree l
    Real mu_h = 0;                   // measured coercivity on range(P1)
    Real nu0 = 0, nu1 = 0;           // extremal ratios nu(r)/(1+r)
    Real sixth_eigenvalue = 0;       // smallest nonzero eigenvalue of -L (the
                                     // 6th counting angular multiplicity)
    /// L = K - nu restricted to sector m (dense, real symmetric).
    MatrixXr L_matrix(const VelocityBasis& basis, int m) const;
    /// Apply L to a sector function without forming the dense matrix.
    VectorXc apply_L(const VelocityBasis& basis, int m, const VectorXc& f) const;
};

struct AssembleOptions {
    Real quad_tol = 1e-8;
    bool null_space_correction = true;
};

/// Assemble L = K - nu on the given basis: per-l Nystrom blocks of the
/// reduced kernels (operator normalization), symmetrized, with a symmetric
/// low-rank correction that makes K chi = nu chi exact for the five collision
/// invariants. Measures mu_h as the smallest eigenvalue of -L on range(P1)
/// and fails if it is not positive.
CollisionOperator assemble_collision_operator(const VelocityBasis& basis,
                                              const AssembleOptions& opts = {});

}  // namespace mvpb
