#pragma once

#include <vector>

#include "mvpb/collision.hpp"
#include "mvpb/types.hpp"
#include "mvpb/velocity_basis.hpp"

namespace mvpb {

// Frequency-reduced operator of the linearized system after rotating the
// frequency onto the polar axis:
//   B(eta) = L - i v1 eta - i v1 eta / (1 + eta^2) P0^1,
// acting on one azimuthal sector. The natural inner product carries the
// electrostatic weight
//   (f,g)_eta = (f,g) + (P0^1 f, P0^1 g) / (1 + eta^2),
// in which B(eta) is dissipative and symmetric under the associated bilinear
// form; the Poisson term and the weight exist only in sector m = 0.
struct SymbolOperator {
    Real eta = 0;
    int sector = 0;
    MatrixXc matrix;
    Real metric_coeff = 0;  // 1/(1+eta^2); 0 outside sector 0
    VectorXr chi0;          // weight direction (empty outside sector 0)

    /// Weighted sesquilinear inner product (f,g)_eta.
    Complex weighted_inner(const VectorXc& f, const VectorXc& g) const;
    /// Weighted bilinear form <f,g> = (f, conj g)_eta; eigenvectors of B are
    /// orthogonal under it and S1 is built from it.
    Complex weighted_bilinear(const VectorXc& f, const VectorXc& g) const;
    /// Operator norm in the weighted metric (power iteration).
    Real weighted_operator_norm(const MatrixXc& A, int iterations = 60) const;
};

SymbolOperator assemble_symbol(const VelocityBasis& basis, const CollisionOperator& op,
                               Real eta, int sector);

/// Eigenpairs of the 5x5 macroscopic matrix P0 v1 P0 + v1/(1+eta^2) P0^1,
/// orthonormal in the weighted metric. Order j = -1, 0, 1, 2, 3; the pair
/// u_{\pm 1} = \mp sqrt(5/3 + 1/(1+eta^2)), the rest zero. E_{-1}, E_0, E_1
/// live in sector 0, E_2 = E_3 = transverse chi in sectors |m| = 1.
struct MacroMatrixD {
    Real eta = 0;
    Eigen::Matrix<Real, 5, 5> matrix;  // in the basis chi0, chi1, chi2, chi3, chi4
    Real u[3];                         // u_{-1}, u_0, u_1
    VectorXr E[3];                     // sector-0 coefficient vectors
    VectorXr E2;                       // transverse eigenvector, sector 1
};

MacroMatrixD macro_matrix_eigs(const VelocityBasis& basis, Real eta);

}  // namespace mvpb
