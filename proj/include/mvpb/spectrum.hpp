#pragma once

#include <optional>
#include <vector>

#include "mvpb/symbol.hpp"

namespace mvpb {

struct BranchPoint {
    Real eta = 0;
    Complex lambda;
    VectorXc vector;     // eigenvector, unit in the weighted metric
    Real overlap = 1.0;  // matching overlap with the previous grid point
};

struct SpectralBranch {
    int j = 0;  // -1, 0, 1 (sector 0); 2 stands for the double transverse pair
    int sector = 0;
    std::vector<BranchPoint> points;
    Real fitted_speed = 0;     // acoustic branches only
    Real fitted_damping = 0;   // curvature A_j
    Real fit_residual = 0;
};

struct BranchScan {
    std::vector<SpectralBranch> branches;  // j = -1, 0, 1, 2
    std::vector<Real> eta_grid;
    Real r0_est = 0;       // largest eta with exactly five isolated selected eigenvalues
    Real mu_h = 0;
    bool window_violated = false;
    Real violation_eta = 0;
};

/// Track the five low-frequency eigenvalue branches of B(eta) over an
/// ascending grid starting at 0. Eigenvalues with Re >= -mu_h/2 are selected;
/// branches are matched by weighted eigenvector overlap with hysteresis.
BranchScan low_freq_branches(const VelocityBasis& basis, const CollisionOperator& op,
                             const std::vector<Real>& eta_grid);

struct DispersionCoefficients {
    Real c_fit = 0;          // route (i): fitted sound speed
    Real c_exact = 0;        // |u_1(0)| from the macroscopic matrix
    Real A_fit[3] = {0, 0, 0};      // A_0, A_1, A_2 from branch curvature fits
    Real A_formula[3] = {0, 0, 0};  // -(L^{-1} P1 v1 E_j, v1 E_j)
    Real fit_residual = 0;
    Eigen::Matrix3d A_table;  // A_{i,j}, i,j in {-1,0,1} (row/col index j+1)
    Real A2_formula = 0;      // transverse entry
};

/// Route (i): weighted least-squares fits of the tracked branches on
/// eta <= fit_fraction * r0_est; route (ii): direct resolvent formulas.
DispersionCoefficients expansion_coefficients(const VelocityBasis& basis,
                                              const CollisionOperator& op,
                                              const BranchScan& scan,
                                              Real fit_fraction = 0.2);

/// R_kj(gamma, eta) = ((L - eta gamma - i eta P1 v1)^{-1} P1 (v1 E_{k-1}),
/// v1 E_{j-1}); k, j = 0..2 use E_{-1},E_0,E_1 in sector 0, k = j = 3 uses the
/// transverse E_2 in sector 1. Throws on a near-singular restricted solve.
Complex resolvent_entry(const VelocityBasis& basis, const CollisionOperator& op,
                        Complex gamma, Real eta, int k, int j, Real mu_h);

struct DispersionRoots {
    Complex gamma_d0;       // root of D_0 (transverse, real)
    Complex gamma_d1[3];    // roots of D_1 for j = -1, 0, 1
    Complex beta_d0;        // eta * gamma
    Complex beta_d1[3];
    int newton_iterations = 0;
};

/// Newton solves of D_0(gamma,eta) = 0 and D_1(gamma,eta) = 0 seeded at
/// gamma = 0 and gamma_j = -i u_j(0).
DispersionRoots dispersion_roots(const VelocityBasis& basis, const CollisionOperator& op,
                                 Real eta, Real mu_h, int max_iter = 50, Real tol = 1e-12);

struct EigenfunctionCoefficients {
    // Extrapolated eta -> 0 projections of the tracked eigenfunctions onto
    // chi0, chi_long, chi4 under the normalization (e, conj e)_eta = 1 with
    // real macroscopic part at eta = 0.
    Real a0 = 0, b0 = 0, c0 = 0, c2 = 0;
    Real a10 = 0, a11 = 0, b10 = 0, b11 = 0, c10 = 0, c11 = 0;
    // Closed forms evaluated with the computed A_{i,j} table.
    Real a0_ref = 0, b0_ref = 0, c0_ref = 0, c2_ref = 0;
    Real a10_ref = 0, a11_ref = 0, b10_ref = 0, b11_ref = 0, c10_ref = 0, c11_ref = 0;
};

EigenfunctionCoefficients eigenfunction_coefficients(const VelocityBasis& basis,
                                                     const CollisionOperator& op,
                                                     const BranchScan& scan,
                                                     const DispersionCoefficients& disp);

struct GapSample {
    Real eta = 0;
    Real max_re = 0;  // spectral abscissa over both mandatory sectors
};

/// Spectral-gap scan for eta >= r0_est; a nonnegative abscissa is reported,
/// never thrown.
std::vector<GapSample> spectral_gap_scan(const VelocityBasis& basis, const CollisionOperator& op,
                                         const std::vector<Real>& eta_grid);

struct SemigroupSplit {
    MatrixXc S;    // e^{t B(eta)}
    MatrixXc S1;   // five-branch eigenprojection part (zero beyond r0)
    MatrixXc S2;   // S - S1
    bool defective_fallback = false;  // scaling-and-squaring used
};

class SymbolSemigroup {
  public:
    /// Eigendecomposition of B(eta) computed once; exponentials reused per t.
    SymbolSemigroup(const SymbolOperator& sym);

    MatrixXc evaluate(Real t) const;           // e^{tB}
    VectorXc apply(Real t, const VectorXc& f) const;
    bool defective() const { return defective_; }
    const VectorXc& eigenvalues() const { return values_; }
    const MatrixXc& eigenvectors() const { return vectors_; }

  private:
    const SymbolOperator* sym_;
    VectorXc values_;
    MatrixXc vectors_;
    MatrixXc vinv_;
    bool defective_ = false;
};

/// Split S(t,eta) into the tracked-branch part S1 (bilinear eigenprojections)
/// and the remainder S2. `branch_vectors` are the tracked eigenpairs at this
/// eta; pass empty beyond r0 so S1 = 0.
SemigroupSplit semigroup_split(const SymbolOperator& sym, const SymbolSemigroup& sg, Real t,
                               const std::vector<std::pair<Complex, VectorXc>>& branch_pairs);

}  // namespace mvpb
