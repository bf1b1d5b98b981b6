#include "mvpb/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace mvpb {

GaussRule gauss_legendre(int n) {
    if (n < 1) throw ConfigError("gauss_legendre: n must be positive");
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    // Newton iteration from the Chebyshev-angle initial guess.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        Real x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        Real pp = 0;
        for (int iter = 0; iter < 100; ++iter) {
            Real p0 = 1.0, p1 = x;
            for (int l = 1; l < n; ++l) {
                Real p2 = ((2 * l + 1) * x * p1 - l * p0) / (l + 1);
                p0 = p1;
                p1 = p2;
            }
            pp = n * (x * p1 - p0) / (x * x - 1.0);
            Real dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        Real w = 2.0 / ((1.0 - x * x) * pp * pp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

GaussRule gauss_legendre(int n, Real a, Real b) {
    GaussRule rule = gauss_legendre(n);
    const Real mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (int i = 0; i < n; ++i) {
        rule.nodes[i] = mid + half * rule.nodes[i];
        rule.weights[i] *= half;
    }
    return rule;
}

void legendre_all(Real x, int lmax, Real* out) {
    out[0] = 1.0;
    if (lmax == 0) return;
    out[1] = x;
    for (int l = 1; l < lmax; ++l)
        out[l + 1] = ((2 * l + 1) * x * out[l] - l * out[l - 1]) / (l + 1);
}

void legendre_orthonormal_all(Real x, int lmax, Real* out) {
    legendre_all(x, lmax, out);
    for (int l = 0; l <= lmax; ++l) out[l] *= std::sqrt((2.0 * l + 1.0) / 2.0);
}

namespace {

// Gauss 7 / Kronrod 15 nodes and weights on [-1,1] (positive half shown).
const Real kKronrodNodes[8] = {
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329};
const Real kKronrodWeights[8] = {
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970};
const Real kGaussWeights[4] = {
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082};

struct Panel {
    Real a, b, value, error;
    bool operator<(const Panel& o) const { return error < o.error; }
};

Panel evaluate_panel(const std::function<Real(Real)>& f, Real a, Real b) {
    const Real mid = 0.5 * (a + b), half = 0.5 * (b - a);
    Real fk[15];
    fk[7] = f(mid);
    for (int i = 1; i < 8; ++i) {
        Real dx = half * kKronrodNodes[i];
        fk[7 - i] = f(mid - dx);
        fk[7 + i] = f(mid + dx);
    }
    Real kron = kKronrodWeights[0] * fk[7];
    for (int i = 1; i < 8; ++i) kron += kKronrodWeights[i] * (fk[7 - i] + fk[7 + i]);
    Real gauss = kGaussWeights[0] * fk[7];
    for (int i = 1; i < 4; ++i) gauss += kGaussWeights[i] * (fk[7 - 2 * i] + fk[7 + 2 * i]);
    Panel p{a, b, kron * half, std::abs(kron - gauss) * half};
    return p;
}

}  // namespace

AdaptiveResult integrate_adaptive(const std::function<Real(Real)>& f, Real a, Real b,
                                  Real abs_tol, Real rel_tol, int max_subdivisions) {
    AdaptiveResult res;
    if (a == b) {
        res.converged = true;
        return res;
    }
    std::priority_queue<Panel> queue;
    queue.push(evaluate_panel(f, a, b));
    res.evaluations = 15;
    Real total = queue.top().value, err = queue.top().error;
    int splits = 0;
    while (splits < max_subdivisions) {
        if (err <= abs_tol || err <= rel_tol * std::abs(total)) break;
        Panel worst = queue.top();
        queue.pop();
        const Real mid = 0.5 * (worst.a + worst.b);
        Panel left = evaluate_panel(f, worst.a, mid);
        Panel right = evaluate_panel(f, mid, worst.b);
        res.evaluations += 30;
        total += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++splits;
    }
    res.value = total;
    res.error_estimate = err;
    res.converged = (err <= abs_tol || err <= rel_tol * std::abs(total));
    return res;
}

namespace {

// Panel-pair moments int_{-1}^{1} s^k {sin,cos}(theta s) ds needed by Filon.
void filon_moments(Real theta, Real& c0, Real& s1, Real& c2) {
    if (std::abs(theta) < 0.08) {
        const Real t2 = theta * theta;
        c0 = 2.0 * (1.0 - t2 / 6.0 + t2 * t2 / 120.0 - t2 * t2 * t2 / 5040.0);
        s1 = 2.0 * theta * (1.0 / 3.0 - t2 / 30.0 + t2 * t2 / 840.0 - t2 * t2 * t2 / 45360.0);
        c2 = 2.0 * (1.0 / 3.0 - t2 / 10.0 + t2 * t2 / 168.0 - t2 * t2 * t2 / 6480.0);
        return;
    }
    const Real st = std::sin(theta), ct = std::cos(theta);
    c0 = 2.0 * st / theta;
    s1 = 2.0 * (st - theta * ct) / (theta * theta);
    c2 = 2.0 * ((theta * theta - 2.0) * st + 2.0 * theta * ct) / (theta * theta * theta);
}

}  // namespace

Real filon_sin(const VectorXr& u, Real a, Real h, Real omega) {
    const int n = static_cast<int>(u.size());
    if (n < 3 || n % 2 == 0)
        throw ConfigError("filon_sin: need an odd number (>=3) of samples");
    const Real theta = omega * h;
    Real c0, s1, c2;
    filon_moments(theta, c0, s1, c2);
    Real total = 0;
    for (int i = 0; i + 2 < n; i += 2) {
        const Real xm = a + (i + 1) * h;
        const Real u0 = u[i], u1 = u[i + 1], u2 = u[i + 2];
        const Real d1 = 0.5 * (u2 - u0);
        const Real d2 = 0.5 * (u0 - 2.0 * u1 + u2);
        total += h * (std::sin(omega * xm) * (u1 * c0 + d2 * c2) + std::cos(omega * xm) * d1 * s1);
    }
    return total;
}

Real simpson(const VectorXr& u, Real h) {
    const int n = static_cast<int>(u.size());
    if (n < 3 || n % 2 == 0) throw ConfigError("simpson: need an odd number (>=3) of samples");
    Real total = u[0] + u[n - 1];
    for (int i = 1; i < n - 1; ++i) total += u[i] * ((i % 2) ? 4.0 : 2.0);
    return total * h / 3.0;
}

}  // namespace mvpb
