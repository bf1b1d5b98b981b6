#include "mvpb/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <unsupported/Eigen/MatrixFunctions>

namespace mvpb {

namespace {

// Restricted operator (P1 (L - i eta v1) P1 - eta gamma) on range(P1), made
// invertible on the whole sector by -P_null on the enforced kernel. For a
// right-hand side in range(P1) the solution stays in range(P1).
struct RestrictedResolvent {
    MatrixXc M;
    Eigen::PartialPivLU<MatrixXc> lu;
    MatrixXr p1;  // projector onto range(P1)

    RestrictedResolvent(const VelocityBasis& basis, const CollisionOperator& op, int sector,
                        Complex eta_gamma, Real eta) {
        const int n = basis.dim(sector);
        ProjectionSet proj(basis, sector);
        p1 = MatrixXr::Identity(n, n);
        MatrixXr pnull = MatrixXr::Zero(n, n);
        for (const VectorXr& chi : proj.null_directions()) pnull += chi * chi.transpose();
        p1 -= pnull;
        MatrixXc C = op.L_matrix(basis, sector).cast<Complex>();
        if (eta != 0) C -= Complex(0, eta) * basis.v1_matrix(sector).cast<Complex>();
        M = p1.cast<Complex>() * C * p1.cast<Complex>();
        M -= eta_gamma * p1.cast<Complex>();
        M -= pnull.cast<Complex>();
        lu.compute(M);
        if (lu.rcond() < 1e-13)
            throw NumericalError("restricted resolvent solve is near-singular (rcond " +
                                 std::to_string(lu.rcond()) + ")");
    }

    VectorXc solve(const VectorXc& b) const { return lu.solve(b); }
};

struct SectorEigs {
    VectorXc values;
    MatrixXc vectors;
};

SectorEigs eigensolve(const SymbolOperator& sym, bool vectors) {
    Eigen::ComplexEigenSolver<MatrixXc> es(sym.matrix, vectors);
    if (es.info() != Eigen::Success)
        throw NumericalError("complex eigensolve failed at eta=" + std::to_string(sym.eta));
    SectorEigs out;
    out.values = es.eigenvalues();
    if (vectors) out.vectors = es.eigenvectors();
    return out;
}

Real weighted_overlap(const SymbolOperator& sym, const VectorXc& a, const VectorXc& b) {
    const Complex num = sym.weighted_inner(b, a);
    const Real na = std::sqrt(std::abs(sym.weighted_inner(a, a)));
    const Real nb = std::sqrt(std::abs(sym.weighted_inner(b, b)));
    return std::abs(num) / (na * nb);
}

}  // namespace

BranchScan low_freq_branches(const VelocityBasis& basis, const CollisionOperator& op,
                             const std::vector<Real>& eta_grid) {
    if (eta_grid.empty() || eta_grid.front() != 0.0)
        throw ConfigError("low_freq_branches: grid must start at 0");
    if (!std::is_sorted(eta_grid.begin(), eta_grid.end()))
        throw ConfigError("low_freq_branches: grid must ascend");

    BranchScan scan;
    scan.eta_grid = eta_grid;
    scan.mu_h = op.mu_h;
    const Real window = -0.5 * op.mu_h;
    const Real hysteresis = 0.8;

    MacroMatrixD macro0 = macro_matrix_eigs(basis, 0.0);
    scan.branches.resize(4);
    const int labels[4] = {-1, 0, 1, 2};
    std::vector<VectorXc> prev(4);
    for (int b = 0; b < 4; ++b) {
        scan.branches[b].j = labels[b];
        scan.branches[b].sector = (labels[b] == 2) ? 1 : 0;
        prev[b] = (labels[b] == 2) ? macro0.E2.cast<Complex>()
                                   : macro0.E[labels[b] + 1].cast<Complex>();
    }

    for (Real eta : eta_grid) {
        SymbolOperator sym0 = assemble_symbol(basis, op, eta, 0);
        SymbolOperator sym1 = assemble_symbol(basis, op, eta, 1);
        SectorEigs eig0 = eigensolve(sym0, true);
        SectorEigs eig1 = eigensolve(sym1, true);

        std::vector<int> sel0, sel1;
        for (int i = 0; i < eig0.values.size(); ++i)
            if (eig0.values[i].real() >= window) sel0.push_back(i);
        for (int i = 0; i < eig1.values.size(); ++i)
            if (eig1.values[i].real() >= window) sel1.push_back(i);

        if (sel0.size() != 3 || sel1.size() != 1) {
            scan.window_violated = true;
            scan.violation_eta = eta;
            break;
        }

        if (eta == 0.0) {
            // The kernel of B(0) = L is degenerate, so the solver basis is an
            // arbitrary mixture; seed the branches with the macroscopic limits
            // and record the near-zero eigenvalues.
            for (int b = 0; b < 4; ++b) {
                const SectorEigs& eig = (labels[b] == 2) ? eig1 : eig0;
                const std::vector<int>& sel = (labels[b] == 2) ? sel1 : sel0;
                BranchPoint pt;
                pt.eta = 0;
                pt.lambda = 0;
                for (int s : sel)
                    if (std::abs(eig.values[s]) > std::abs(pt.lambda)) pt.lambda = eig.values[s];
                pt.vector = prev[b];
                scan.branches[b].points.push_back(pt);
            }
            scan.r0_est = 0;
            continue;
        }

        bool matched_all = true;
        std::vector<bool> used0(3, false);
        for (int b = 0; b < 4 && matched_all; ++b) {
            const SymbolOperator& sym = (labels[b] == 2) ? sym1 : sym0;
            const SectorEigs& eig = (labels[b] == 2) ? eig1 : eig0;
            const std::vector<int>& sel = (labels[b] == 2) ? sel1 : sel0;
            int best = -1;
            Real best_overlap = 0;
            for (size_t s = 0; s < sel.size(); ++s) {
                if (labels[b] != 2 && used0[s]) continue;
                const Real ov = weighted_overlap(sym, prev[b], eig.vectors.col(sel[s]));
                if (ov > best_overlap) {
                    best_overlap = ov;
                    best = static_cast<int>(s);
                }
            }
            if (best < 0 || best_overlap < hysteresis) {
                matched_all = false;
                break;
            }
            if (labels[b] != 2) used0[best] = true;
            BranchPoint pt;
            pt.eta = eta;
            pt.lambda = eig.values[sel[best]];
            pt.vector = eig.vectors.col(sel[best]);
            pt.vector /= std::sqrt(std::abs(sym.weighted_inner(pt.vector, pt.vector)));
            pt.overlap = best_overlap;
            scan.branches[b].points.push_back(pt);
            prev[b] = pt.vector;
        }
        if (!matched_all) {
            scan.window_violated = true;
            scan.violation_eta = eta;
            for (auto& br : scan.branches)
                while (!br.points.empty() && br.points.back().eta >= eta) br.points.pop_back();
            break;
        }
        scan.r0_est = eta;
    }
    return scan;
}

namespace {

// Least squares of y against columns {x^p} for p in powers.
VectorXr poly_fit(const std::vector<Real>& x, const std::vector<Real>& y,
                  const std::vector<int>& powers, Real& residual) {
    const int n = static_cast<int>(x.size()), m = static_cast<int>(powers.size());
    MatrixXr A(n, m);
    VectorXr b(n);
    for (int i = 0; i < n; ++i) {
        b[i] = y[i];
        for (int j = 0; j < m; ++j) A(i, j) = std::pow(x[i], powers[j]);
    }
    VectorXr coef = A.colPivHouseholderQr().solve(b);
    residual = (A * coef - b).norm() / std::max(1e-300, b.norm());
    return coef;
}

}  // namespace

DispersionCoefficients expansion_coefficients(const VelocityBasis& basis,
                                              const CollisionOperator& op,
                                              const BranchScan& scan, Real fit_fraction) {
    DispersionCoefficients out;
    MacroMatrixD macro = macro_matrix_eigs(basis, 0.0);
    out.c_exact = std::abs(macro.u[2]);

    // Route (ii): A_{i,j} = -(L^{-1} P1 v1 E_i, v1 E_j) at eta = 0.
    {
        RestrictedResolvent res(basis, op, 0, Complex(0, 0), 0.0);
        MatrixXr v1 = basis.v1_matrix(0);
        VectorXc rhs[3], sol[3];
        for (int i = 0; i < 3; ++i) {
            rhs[i] = (res.p1 * (v1 * macro.E[i])).cast<Complex>();
            sol[i] = res.solve(rhs[i]);
        }
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                out.A_table(i, j) = -(v1 * macro.E[j]).cast<Complex>().dot(sol[i]).real();
        out.A_formula[0] = out.A_table(1, 1);  // A_0 = A_{0,0}
        out.A_formula[1] = out.A_table(2, 2);  // A_1 = A_{1,1}
    }
    {
        RestrictedResolvent res(basis, op, 1, Complex(0, 0), 0.0);
        MatrixXr v1 = basis.v1_matrix(1);
        VectorXc rhs = (res.p1 * (v1 * macro.E2)).cast<Complex>();
        VectorXc sol = res.solve(rhs);
        out.A2_formula = -(v1 * macro.E2).cast<Complex>().dot(sol).real();
        out.A_formula[2] = out.A2_formula;
    }

    // Route (i): branch fits on eta <= fit_fraction * r0_est.
    const Real eta_cap = fit_fraction * scan.r0_est;
    Real worst_residual = 0;
    for (const SpectralBranch& br : scan.branches) {
        std::vector<Real> eta, re, im;
        for (const BranchPoint& p : br.points) {
            if (p.eta <= 0 || p.eta > eta_cap) continue;
            eta.push_back(p.eta);
            re.push_back(p.lambda.real());
            im.push_back(p.lambda.imag());
        }
        if (eta.size() < 8)
            throw ConfigError("expansion_coefficients: need >= 8 branch samples below "
                              "fit_fraction * r0_est");
        Real res_re = 0, res_im = 0;
        VectorXr curv = poly_fit(eta, re, {2, 4}, res_re);
        const Real A = -curv[0];
        if (br.j == 0) out.A_fit[0] = A;
        if (br.j == 1) out.A_fit[1] = A;
        if (br.j == 2) out.A_fit[2] = A;
        if (br.j == 1) {
            VectorXr speed = poly_fit(eta, im, {1, 3}, res_im);
            out.c_fit = speed[0];
        }
        worst_residual = std::max({worst_residual, res_re, res_im});
    }
    out.fit_residual = worst_residual;
    if (out.fit_residual > 1e-2)
        throw NumericalError("expansion_coefficients: dispersion fit residual above threshold");
    return out;
}

Complex resolvent_entry(const VelocityBasis& basis, const CollisionOperator& op, Complex gamma,
                        Real eta, int k, int j, Real mu_h) {
    if ((eta * gamma).real() <= -mu_h)
        throw ConfigError("resolvent_entry: Re(eta gamma) must exceed -mu_h");
    MacroMatrixD macro = macro_matrix_eigs(basis, eta);
    if (k == 3 && j == 3) {
        RestrictedResolvent res(basis, op, 1, eta * gamma, eta);
        MatrixXr v1 = basis.v1_matrix(1);
        VectorXc b = (res.p1 * (v1 * macro.E2)).cast<Complex>();
        VectorXc x = res.solve(b);
        return (v1 * macro.E2).transpose().cast<Complex>() * x;
    }
    if (k < 0 || k > 2 || j < 0 || j > 2)
        throw ConfigError("resolvent_entry: indices must be 0..2 or (3,3)");
    RestrictedResolvent res(basis, op, 0, eta * gamma, eta);
    MatrixXr v1 = basis.v1_matrix(0);
    VectorXc b = (res.p1 * (v1 * macro.E[k])).cast<Complex>();
    VectorXc x = res.solve(b);
    return (v1 * macro.E[j]).transpose().cast<Complex>() * x;
}

namespace {

struct RkjTable {
    Eigen::Matrix3cd R;
    Eigen::Matrix3cd dR;  // derivative with respect to gamma
};

RkjTable rkj_with_derivative(const VelocityBasis& basis, const CollisionOperator& op,
                             const MacroMatrixD& macro, Complex gamma, Real eta) {
    RkjTable t;
    RestrictedResolvent res(basis, op, 0, eta * gamma, eta);
    MatrixXr v1 = basis.v1_matrix(0);
    for (int k = 0; k < 3; ++k) {
        VectorXc b = (res.p1 * (v1 * macro.E[k])).cast<Complex>();
        VectorXc x = res.solve(b);
        VectorXc dx = res.solve((eta * x).eval());  // d/dgamma of the resolvent action
        for (int j = 0; j < 3; ++j) {
            VectorXc w = (v1 * macro.E[j]).cast<Complex>();
            t.R(k, j) = w.transpose() * x;
            t.dR(k, j) = w.transpose() * dx;
        }
    }
    return t;
}

}  // namespace

DispersionRoots dispersion_roots(const VelocityBasis& basis, const CollisionOperator& op,
                                 Real eta, Real mu_h, int max_iter, Real tol) {
    DispersionRoots out;
    MacroMatrixD macro = macro_matrix_eigs(basis, eta);
    const Complex i(0, 1);

    // D_0(gamma,eta) = gamma - eta R_33(gamma,eta), seeded at gamma = 0.
    {
        Complex gamma(0, 0);
        MatrixXr v1 = basis.v1_matrix(1);
        int it = 0;
        for (; it < max_iter; ++it) {
            RestrictedResolvent res(basis, op, 1, eta * gamma, eta);
            VectorXc b = (res.p1 * (v1 * macro.E2)).cast<Complex>();
            VectorXc x = res.solve(b);
            VectorXc dx = res.solve((eta * x).eval());
            VectorXc w = (v1 * macro.E2).cast<Complex>();
            const Complex r33 = w.transpose() * x;
            const Complex dr33 = w.transpose() * dx;
            const Complex f = gamma - eta * r33;
            const Complex df = 1.0 - eta * dr33;
            const Complex step = f / df;
            gamma -= step;
            if (std::abs(step) < tol) break;
        }
        if (it >= max_iter) throw NumericalError("dispersion_roots: D0 Newton stalled");
        out.gamma_d0 = gamma;
        out.beta_d0 = eta * gamma;
    }

    // D_1 = 0 for j = -1, 0, 1, seeded at gamma_j = -i u_j(0).
    MacroMatrixD macro0 = macro_matrix_eigs(basis, 0.0);
    for (int jj = 0; jj < 3; ++jj) {
        Complex gamma = -i * macro0.u[jj];
        int it = 0;
        for (; it < max_iter; ++it) {
            RkjTable t = rkj_with_derivative(basis, op, macro, gamma, eta);
            Eigen::Matrix3cd M, dM;
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) {
                    M(r, c) = -eta * t.R(c, r);
                    dM(r, c) = -eta * t.dR(c, r);
                }
            for (int r = 0; r < 3; ++r) {
                M(r, r) += gamma + i * macro.u[r];
                dM(r, r) += 1.0;
            }
            const Complex det = M.determinant();
            const Complex ddet = det * (M.inverse() * dM).trace();
            const Complex step = det / ddet;
            gamma -= step;
            if (std::abs(step) < tol) break;
        }
        if (it >= max_iter) throw NumericalError("dispersion_roots: D1 Newton stalled");
        out.gamma_d1[jj] = gamma;
        out.beta_d1[jj] = eta * gamma;
        out.newton_iterations = std::max(out.newton_iterations, it);
    }
    return out;
}

EigenfunctionCoefficients eigenfunction_coefficients(const VelocityBasis& basis,
                                                     const CollisionOperator& op,
                                                     const BranchScan& scan,
                                                     const DispersionCoefficients& disp) {
    EigenfunctionCoefficients out;
    const Real c = disp.c_exact;
    const Real A1m = disp.A_table(2, 0);  // A_{1,-1}
    const Real A10 = disp.A_table(2, 1);  // A_{1,0}
    const Real A0m = disp.A_table(1, 0);  // A_{0,-1}
    const Real A0p = disp.A_table(1, 2);  // A_{0,1}

    out.a0_ref = std::sqrt(2.0) / 4.0;
    out.c0_ref = -std::sqrt(3.0) / 2.0;
    out.b10_ref = -std::sqrt(0.5);
    out.a10_ref = std::sqrt(3.0) / 4.0;
    out.c10_ref = std::sqrt(2.0) / 4.0;
    out.c2_ref = 1.0;
    out.b0_ref = -std::sqrt(2.0) * (A0m + A0p) / (2.0 * c);
    out.a11_ref = (std::sqrt(3.0) * A1m + 2.0 * std::sqrt(2.0) * A10) / (8.0 * c);
    out.b11_ref = A1m / (2.0 * std::sqrt(2.0) * c);
    out.c11_ref = (std::sqrt(2.0) * A1m - 4.0 * std::sqrt(3.0) * A10) / (8.0 * c);

    // Smallest two positive grid etas give a Richardson extrapolation in eta^2.
    auto coefficients_at = [&](const SpectralBranch& br, int which_point, Complex coef[3]) {
        const BranchPoint& pt = br.points[which_point];
        SymbolOperator sym = assemble_symbol(basis, op, pt.eta, br.sector);
        VectorXc e = pt.vector;
        Complex q = sym.weighted_bilinear(e, e);
        if (std::abs(q) < 1e-12)
            throw NumericalError("eigenfunction_coefficients: defective normalization");
        e /= std::sqrt(q);
        if (br.sector == 0) {
            coef[0] = basis.chi0().cast<Complex>().dot(e);
            coef[1] = basis.chi_long().cast<Complex>().dot(e);
            coef[2] = basis.chi4().cast<Complex>().dot(e);
            if (coef[0].real() < 0)
                for (int k = 0; k < 3; ++k) coef[k] = -coef[k];
        } else {
            coef[0] = basis.chi_transverse().cast<Complex>().dot(e);
            if (coef[0].real() < 0) coef[0] = -coef[0];
        }
    };

    auto extrapolate = [](Real eta1, Real f1, Real eta2, Real f2) {
        // f(eta) = f0 + f2 eta^2
        return (eta2 * eta2 * f1 - eta1 * eta1 * f2) / (eta2 * eta2 - eta1 * eta1);
    };

    for (const SpectralBranch& br : scan.branches) {
        if (br.points.size() < 3) throw ConfigError("eigenfunction_coefficients: too few points");
        int i1 = 0;
        while (i1 < static_cast<int>(br.points.size()) && br.points[i1].eta <= 0) ++i1;
        const int i2 = i1 + 1;
        Complex c1[3], c2v[3];
        coefficients_at(br, i1, c1);
        coefficients_at(br, i2, c2v);
        const Real e1 = br.points[i1].eta, e2 = br.points[i2].eta;
        if (br.j == 0) {
            out.a0 = extrapolate(e1, c1[0].real(), e2, c2v[0].real());
            out.c0 = extrapolate(e1, c1[2].real(), e2, c2v[2].real());
            out.b0 = extrapolate(e1, c1[1].imag() / e1, e2, c2v[1].imag() / e2);
        } else if (br.j == 1) {
            out.a10 = extrapolate(e1, c1[0].real(), e2, c2v[0].real());
            out.b10 = extrapolate(e1, c1[1].real(), e2, c2v[1].real());
            out.c10 = extrapolate(e1, c1[2].real(), e2, c2v[2].real());
            out.a11 = extrapolate(e1, c1[0].imag() / e1, e2, c2v[0].imag() / e2);
            out.b11 = extrapolate(e1, c1[1].imag() / e1, e2, c2v[1].imag() / e2);
            out.c11 = extrapolate(e1, c1[2].imag() / e1, e2, c2v[2].imag() / e2);
        } else if (br.j == 2) {
            out.c2 = extrapolate(e1, c1[0].real(), e2, c2v[0].real());
        }
    }
    return out;
}

std::vector<GapSample> spectral_gap_scan(const VelocityBasis& basis, const CollisionOperator& op,
                                         const std::vector<Real>& eta_grid) {
    std::vector<GapSample> out;
    out.reserve(eta_grid.size());
    for (Real eta : eta_grid) {
        GapSample g;
        g.eta = eta;
        Real mx = -std::numeric_limits<Real>::max();
        for (int sector : {0, 1}) {
            SymbolOperator sym = assemble_symbol(basis, op, eta, sector);
            Eigen::ComplexEigenSolver<MatrixXc> es(sym.matrix, false);
            mx = std::max(mx, es.eigenvalues().real().maxCoeff());
        }
        g.max_re = mx;
        out.push_back(g);
    }
    return out;
}

SymbolSemigroup::SymbolSemigroup(const SymbolOperator& sym) : sym_(&sym) {
    Eigen::ComplexEigenSolver<MatrixXc> es(sym.matrix, true);
    if (es.info() != Eigen::Success) throw NumericalError("semigroup eigensolve failed");
    values_ = es.eigenvalues();
    vectors_ = es.eigenvectors();
    Eigen::PartialPivLU<MatrixXc> lu(vectors_);
    if (lu.rcond() < 1e-8) {
        defective_ = true;
    } else {
        vinv_ = lu.inverse();
    }
}

MatrixXc SymbolSemigroup::evaluate(Real t) const {
    if (defective_) {
        return (t * sym_->matrix).exp();
    }
    return vectors_ * (values_ * t).array().exp().matrix().asDiagonal() * vinv_;
}

VectorXc SymbolSemigroup::apply(Real t, const VectorXc& f) const {
    if (defective_) return evaluate(t) * f;
    VectorXc y = vinv_ * f;
    y.array() *= (values_ * t).array().exp();
    return vectors_ * y;
}

SemigroupSplit semigroup_split(const SymbolOperator& sym, const SymbolSemigroup& sg, Real t,
                               const std::vector<std::pair<Complex, VectorXc>>& branch_pairs) {
    SemigroupSplit split;
    split.S = sg.evaluate(t);
    split.defective_fallback = sg.defective();
    const int n = static_cast<int>(split.S.rows());
    split.S1 = MatrixXc::Zero(n, n);
    for (const auto& [lambda, psi] : branch_pairs) {
        const Complex q = sym.weighted_bilinear(psi, psi);
        VectorXc wpsi = psi;
        if (sym.metric_coeff > 0 && sym.chi0.size() > 0)
            wpsi += sym.metric_coeff * sym.chi0.cast<Complex>() *
                    (sym.chi0.cast<Complex>().dot(psi));
        split.S1 += (std::exp(lambda * t) / q) * psi * wpsi.transpose();
    }
    split.S2 = split.S - split.S1;
    return split;
}

}  // namespace mvpb
