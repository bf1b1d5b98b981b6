#pragma once

#include <functional>
#include <string>
#include <vector>

#include "mvpb/types.hpp"

namespace mvpb {

// Velocity space is discretized by spherical harmonics Y_l^m in the direction
// and Gauss-Legendre point values in the speed r in (0, r_max]. The frequency
// direction is rotated onto the polar axis, so everything block-diagonalizes
// over the azimuthal index m, and within a sector a function is the stack of
// radial coefficient vectors for l = |m| .. l_max.
//
// All coefficient vectors are stored in orthonormal coordinates: the sqrt of
// the radial quadrature weight (which includes the r^2 factor) is absorbed
// into the coefficients, so the L^2_v inner product is the plain dot product
// summed over sectors.

struct BasisConfig {
    int l_max = 9;
    int n_radial = 48;
    Real r_max = 8.0;
    std::string quadrature_rule = "gauss-legendre";
};

class VelocityBasis {
  public:
    static VelocityBasis build(const BasisConfig& config);

    int l_max() const { return l_max_; }
    int n_radial() const { return n_radial_; }
    Real r_max() const { return r_max_; }
    const std::string& rule_name() const { return rule_; }

    const VectorXr& nodes() const { return nodes_; }
    const VectorXr& weights() const { return weights_; }

    /// Number of l blocks in sector m.
    int blocks(int m) const { return l_max_ - std::abs(m) + 1; }
    /// Dimension of sector m.
    int dim(int m) const { return blocks(m) * n_radial_; }
    /// Offset of the radial block for degree l within sector m.
    int block_offset(int l, int m) const { return (l - std::abs(m)) * n_radial_; }

    /// Assemble a sector-m coefficient vector from radial profiles R_l(r),
    /// f(v) = sum_l R_l(r) Y_l^m(vhat).
    VectorXr sector_function(int m, const std::function<Real(int, Real)>& radial) const;

    /// chi_0 = sqrt(M), chi_long = v_par sqrt(M), chi_4 = (|v|^2-3)sqrt(M)/sqrt(6),
    /// as Gram-corrected orthonormal vectors in sector m = 0.
    const VectorXr& chi0() const { return chi0_; }
    const VectorXr& chi_long() const { return chi_long_; }
    const VectorXr& chi4() const { return chi4_; }
    /// Transverse chi (the radial profile of v_perp sqrt(M)) in sector |m| = 1.
    const VectorXr& chi_transverse() const { return chi_t_; }

    /// v_par multiplication in sector m (couples adjacent l, symmetric, real).
    MatrixXr v1_matrix(int m) const;
    /// Speed multiplication (diagonal).
    VectorXr speed_diagonal(int m) const;

    /// Maxwellian radial moments check used as the build-time sanity gate:
    /// discrete vs analytic int_0^{r_max} r^{2+2p} e^{-r^2/2} dr, p = 0..4.
    Real moment_relative_error() const;

  private:
    int l_max_ = 0;
    int n_radial_ = 0;
    Real r_max_ = 0;
    std::string rule_;
    VectorXr nodes_;    // speeds, ascending
    VectorXr weights_;  // GL weight times r^2
    VectorXr chi0_, chi_long_, chi4_, chi_t_;
};

/// Sesquilinear inner product (f,g) = int f conj(g) dv restricted to one sector.
inline Complex inner_product(const VectorXc& f, const VectorXc& g) {
    if (f.size() != g.size()) throw ConfigError("inner_product: dimension mismatch");
    return g.dot(f);
}
inline Real inner_product(const VectorXr& f, const VectorXr& g) {
    if (f.size() != g.size()) throw ConfigError("inner_product: dimension mismatch");
    return g.dot(f);
}

enum class Projector { P0_1, P0_2, P0_3, P0, P1 };

/// Macro-micro projections within a sector. In sector 0 the null-space
/// directions are {chi0, chi_long, chi4}; in sectors |m| = 1 the single
/// transverse direction; higher sectors are purely microscopic.
class ProjectionSet {
  public:
    ProjectionSet(const VelocityBasis& basis, int m);

    VectorXc apply(Projector which, const VectorXc& f) const;
    VectorXr apply(Projector which, const VectorXr& f) const;

    /// Orthonormal null-space directions present in this sector.
    const std::vector<VectorXr>& null_directions() const { return dirs_; }
    int sector() const { return m_; }

  private:
    int m_;
    int dim_;
    std::vector<VectorXr> dirs_;   // all null directions in this sector
    std::vector<int> which_slot_;  // 1, 2 or 3: which P0^k each direction feeds
};

}  // namespace mvpb
