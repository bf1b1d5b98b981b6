#include "mvpb/symbol.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace mvpb {

Complex SymbolOperator::weighted_inner(const VectorXc& f, const VectorXc& g) const {
    Complex v = g.dot(f);
    if (metric_coeff > 0 && chi0.size() > 0) {
        const Complex a = chi0.cast<Complex>().dot(f);
        const Complex b = chi0.cast<Complex>().dot(g);
        v += metric_coeff * a * std::conj(b);
    }
    return v;
}

Complex SymbolOperator::weighted_bilinear(const VectorXc& f, const VectorXc& g) const {
    Complex v = f.transpose() * g;
    if (metric_coeff > 0 && chi0.size() > 0) {
        const Complex a = chi0.cast<Complex>().dot(f);
        const Complex b = chi0.cast<Complex>().dot(g);
        v += metric_coeff * a * b;
    }
    return v;
}

Real SymbolOperator::weighted_operator_norm(const MatrixXc& A, int iterations) const {
    // ||A||_eta = ||W^{1/2} A W^{-1/2}||_2 with W = I + metric_coeff chi0 chi0^T.
    const int n = static_cast<int>(A.rows());
    VectorXc c0 = chi0.size() ? chi0.cast<Complex>().eval() : VectorXc();
    const Real s = metric_coeff;
    const Real alpha = chi0.size() ? std::sqrt(1.0 + s) - 1.0 : 0.0;
    const Real beta = chi0.size() ? 1.0 / std::sqrt(1.0 + s) - 1.0 : 0.0;
    auto whalf = [&](const VectorXc& x, Real coef) {
        if (!chi0.size()) return x;
        return (x + coef * c0 * c0.dot(x)).eval();
    };
    VectorXc x = VectorXc::Zero(n);
    for (int i = 0; i < n; ++i) x[i] = Complex(std::cos(0.7 * i + 0.3), std::sin(1.3 * i));
    x.normalize();
    Real norm = 0;
    for (int it = 0; it < iterations; ++it) {
        VectorXc y = whalf(A * whalf(x, beta), alpha);
        VectorXc z = whalf(A.adjoint() * whalf(y, alpha), beta);
        const Real nz = z.norm();
        if (nz == 0) return 0;
        norm = std::sqrt(y.squaredNorm());
        x = z / nz;
    }
    return norm;
}

SymbolOperator assemble_symbol(const VelocityBasis& basis, const CollisionOperator& op,
                               Real eta, int sector) {
    if (eta < 0) throw ConfigError("assemble_symbol: eta must be nonnegative");
    SymbolOperator sym;
    sym.eta = eta;
    sym.sector = sector;
    const Complex i(0, 1);
    MatrixXr v1 = basis.v1_matrix(sector);
    sym.matrix = op.L_matrix(basis, sector).cast<Complex>();
    sym.matrix -= (i * eta) * v1.cast<Complex>();
    if (sector == 0) {
        sym.metric_coeff = 1.0 / (1.0 + eta * eta);
        sym.chi0 = basis.chi0();
        const VectorXr v1chi0 = v1 * basis.chi0();
        sym.matrix -= (i * eta * sym.metric_coeff) * (v1chi0 * basis.chi0().transpose()).cast<Complex>();
    }
    return sym;
}

MacroMatrixD macro_matrix_eigs(const VelocityBasis& basis, Real eta) {
    if (eta < 0) throw ConfigError("macro_matrix_eigs: eta must be nonnegative");
    MacroMatrixD d;
    d.eta = eta;
    const Real s = 1.0 / (1.0 + eta * eta);

    // Discrete moments of the longitudinal multiplication between the chi's.
    MatrixXr v1 = basis.v1_matrix(0);
    const VectorXr vchi0 = v1 * basis.chi0();
    const VectorXr vchi1 = v1 * basis.chi_long();
    const VectorXr vchi4 = v1 * basis.chi4();
    const Real m01 = basis.chi_long().dot(vchi0);  // (v1 chi0, chi1) = 1
    const Real m14 = basis.chi4().dot(vchi1);      // (v1 chi1, chi4) = sqrt(2/3)

    d.matrix.setZero();
    d.matrix(1, 0) = (1.0 + s) * m01;
    d.matrix(0, 1) = m01;
    d.matrix(4, 1) = m14;
    d.matrix(1, 4) = m14;

    // Restricted to (chi0, chi1, chi4); self-adjoint under G = diag(1+s,1,1).
    Eigen::Matrix3d D3;
    D3 << 0, m01, 0, (1.0 + s) * m01, 0, m14, 0, m14, 0;
    Eigen::Vector3d g(1.0 + s, 1.0, 1.0);
    Eigen::Vector3d gh = g.cwiseSqrt();
    Eigen::Matrix3d sym = gh.asDiagonal() * D3 * gh.cwiseInverse().asDiagonal();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(sym);

    // Ascending eigenvalues: u_1 < u_0 = 0 < u_{-1}.
    const int order[3] = {2, 1, 0};  // map to j = -1, 0, 1
    for (int k = 0; k < 3; ++k) {
        const int col = order[k];
        d.u[k] = es.eigenvalues()[col];
        Eigen::Vector3d y = gh.cwiseInverse().asDiagonal() * es.eigenvectors().col(col);
        // Normalized in the weighted metric already; fix sign chi0 > 0.
        if (y[0] < 0) y = -y;
        d.E[k] = y[0] * basis.chi0() + y[1] * basis.chi_long() + y[2] * basis.chi4();
    }
    d.E2 = basis.chi_transverse();
    return d;
}

}  // namespace mvpb
