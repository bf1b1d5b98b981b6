#include "mvpb/velocity_basis.hpp"

#include <cmath>

#include "mvpb/quadrature.hpp"

namespace mvpb {

namespace {

Real sqrt_maxwellian(Real r) { return std::pow(2.0 * kPi, -0.75) * std::exp(-0.25 * r * r); }

// Coupling a_{l,m} in v_par Y_l^m = r (a_{l,m} Y_{l+1}^m + a_{l-1,m} Y_{l-1}^m).
Real v1_coupling(int l, int m) {
    const Real num = (Real(l + 1) * (l + 1) - Real(m) * m);
    return std::sqrt(num / ((2.0 * l + 1.0) * (2.0 * l + 3.0)));
}

}  // namespace

VelocityBasis VelocityBasis::build(const BasisConfig& config) {
    if (config.l_max < 4) throw ConfigError("basis: l_max must be >= 4");
    if (config.n_radial < 16) throw ConfigError("basis: n_radial must be >= 16");
    if (config.r_max < 4.0)
        throw ConfigError("basis: r_max < 4 loses more than 1e-3 of the Maxwellian mass");
    if (config.quadrature_rule != "gauss-legendre")
        throw ConfigError("basis: unknown quadrature rule '" + config.quadrature_rule + "'");

    VelocityBasis b;
    b.l_max_ = config.l_max;
    b.n_radial_ = config.n_radial;
    b.r_max_ = config.r_max;
    b.rule_ = config.quadrature_rule;

    GaussRule rule = gauss_legendre(config.n_radial, 0.0, config.r_max);
    b.nodes_ = rule.nodes;
    b.weights_ = rule.weights.cwiseProduct(rule.nodes.cwiseAbs2());

    if (b.moment_relative_error() > 1e-6)
        throw NumericalError("basis: radial quadrature fails the Gaussian moment check");

    // chi vectors, then Gram correction so orthonormality is exact.
    const Real c0 = std::sqrt(4.0 * kPi);
    const Real c1 = std::sqrt(4.0 * kPi / 3.0);
    b.chi0_ = b.sector_function(0, [&](int l, Real r) {
        return l == 0 ? c0 * sqrt_maxwellian(r) : 0.0;
    });
    b.chi4_ = b.sector_function(0, [&](int l, Real r) {
        return l == 0 ? c0 * (r * r - 3.0) * sqrt_maxwellian(r) / std::sqrt(6.0) : 0.0;
    });
    b.chi_long_ = b.sector_function(0, [&](int l, Real r) {
        return l == 1 ? c1 * r * sqrt_maxwellian(r) : 0.0;
    });

    b.chi0_.normalize();
    b.chi4_ -= b.chi0_ * b.chi0_.dot(b.chi4_);
    b.chi4_.normalize();
    b.chi_long_.normalize();

    b.chi_t_ = VectorXr::Zero(b.dim(1));
    b.chi_t_.segment(b.block_offset(1, 1), b.n_radial_) =
        b.chi_long_.segment(b.block_offset(1, 0), b.n_radial_);
    b.chi_t_.normalize();
    return b;
}

VectorXr VelocityBasis::sector_function(int m,
                                        const std::function<Real(int, Real)>& radial) const {
    VectorXr f = VectorXr::Zero(dim(m));
    for (int l = std::abs(m); l <= l_max_; ++l) {
        const int off = block_offset(l, m);
        for (int i = 0; i < n_radial_; ++i)
            f[off + i] = std::sqrt(weights_[i]) * radial(l, nodes_[i]);
    }
    return f;
}

MatrixXr VelocityBasis::v1_matrix(int m) const {
    const int nb = blocks(m);
    MatrixXr v = MatrixXr::Zero(dim(m), dim(m));
    const int mabs = std::abs(m);
    for (int k = 0; k + 1 < nb; ++k) {
        const int l = mabs + k;
        const Real a = v1_coupling(l, mabs);
        for (int i = 0; i < n_radial_; ++i) {
            const Real val = a * nodes_[i];
            v(block_offset(l + 1, m) + i, block_offset(l, m) + i) = val;
            v(block_offset(l, m) + i, block_offset(l + 1, m) + i) = val;
        }
    }
    return v;
}

VectorXr VelocityBasis::speed_diagonal(int m) const {
    VectorXr d(dim(m));
    for (int k = 0; k < blocks(m); ++k) d.segment(k * n_radial_, n_radial_) = nodes_;
    return d;
}

Real VelocityBasis::moment_relative_error() const {
    // m_p = int_0^R r^{2p+2} e^{-r^2/2} dr via the downward-stable recurrence
    // m_p = (2p+1) m_{p-1} - R^{2p+1} e^{-R^2/2}.
    const Real R = r_max_;
    const Real eR = std::exp(-0.5 * R * R);
    Real analytic = std::sqrt(kPi / 2.0) * std::erf(R / std::sqrt(2.0)) - R * eR;
    Real worst = 0;
    Real rpow = R;  // R^{2p+1}
    for (int p = 0; p <= 4; ++p) {
        if (p > 0) {
            rpow *= R * R;
            analytic = (2.0 * p + 1.0) * analytic - rpow * eR;
        }
        Real discrete = 0;
        for (int i = 0; i < n_radial_; ++i)
            discrete += weights_[i] * std::pow(nodes_[i], 2.0 * p) * std::exp(-0.5 * nodes_[i] * nodes_[i]);
        worst = std::max(worst, std::abs(discrete - analytic) / std::abs(analytic));
    }
    return worst;
}

ProjectionSet::ProjectionSet(const VelocityBasis& basis, int m) : m_(m), dim_(basis.dim(m)) {
    if (m == 0) {
        dirs_ = {basis.chi0(), basis.chi_long(), basis.chi4()};
        which_slot_ = {1, 2, 3};
    } else if (std::abs(m) == 1) {
        dirs_ = {basis.chi_transverse()};
        which_slot_ = {2};
    }
}

namespace {

bool takes_direction(Projector which, int slot) {
    return which == Projector::P0 || which == Projector::P1 ||
           (which == Projector::P0_1 && slot == 1) || (which == Projector::P0_2 && slot == 2) ||
           (which == Projector::P0_3 && slot == 3);
}

}  // namespace

VectorXc ProjectionSet::apply(Projector which, const VectorXc& f) const {
    if (f.size() != dim_) throw ConfigError("project: dimension mismatch");
    VectorXc p = VectorXc::Zero(dim_);
    for (size_t k = 0; k < dirs_.size(); ++k)
        if (takes_direction(which, which_slot_[k])) {
            const Complex a = dirs_[k].cast<Complex>().dot(f);
            p += a * dirs_[k].cast<Complex>();
        }
    if (which == Projector::P1) return f - p;
    return p;
}

VectorXr ProjectionSet::apply(Projector which, const VectorXr& f) const {
    if (f.size() != dim_) throw ConfigError("project: dimension mismatch");
    VectorXr p = VectorXr::Zero(dim_);
    for (size_t k = 0; k < dirs_.size(); ++k)
        if (takes_direction(which, which_slot_[k])) p += dirs_[k] * dirs_[k].dot(f);
    if (which == Projector::P1) return f - p;
    return p;
}

}  // namespace mvpb
