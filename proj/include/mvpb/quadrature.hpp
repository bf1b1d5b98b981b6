#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "mvpb/types.hpp"

namespace mvpb {

/// Gauss-Legendre rule on [-1,1]; nodes ascending, weights positive.
struct GaussRule {
    VectorXr nodes;
    VectorXr weights;
};

GaussRule gauss_legendre(int n);

/// Same rule mapped onto [a,b].
GaussRule gauss_legendre(int n, Real a, Real b);

/// Legendre polynomial values P_0..P_lmax at x via the three-term recurrence.
void legendre_all(Real x, int lmax, Real* out);

/// Orthonormal Legendre on [-1,1]: Pt_l = sqrt((2l+1)/2) P_l.
void legendre_orthonormal_all(Real x, int lmax, Real* out);

struct AdaptiveResult {
    Real value = 0;
    Real error_estimate = 0;
    bool converged = false;
    int evaluations = 0;
};

/// Adaptive Gauss-Kronrod (G7/K15) on [a,b].
AdaptiveResult integrate_adaptive(const std::function<Real(Real)>& f, Real a, Real b,
                                  Real abs_tol, Real rel_tol, int max_subdivisions = 4000);

/// Filon-Simpson quadrature of I = int_a^b u(x) sin(omega x) dx where u is
/// sampled on a uniform grid with an odd number of points. The sine factor is
/// integrated exactly against the per-panel-pair quadratic interpolant of u,
/// so the rule stays accurate for omega*h >> 1.
Real filon_sin(const VectorXr& u, Real a, Real h, Real omega);

/// Plain composite Simpson for u on a uniform grid (odd point count).
Real simpson(const VectorXr& u, Real h);

}  // namespace mvpb
