// validation.hpp — Independent oracles: adaptive quadrature for Gaussian
// expectations and flux, an independently written right-hand side, and a
// classical Langevin Monte-Carlo sampler whose moments must match the moment
// ODEs on linear-force segments.

#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "lindblad/dynamics.hpp"
#include "lindblad/errors.hpp"
#include "lindblad/potential.hpp"

namespace lindblad {

namespace detail {

template <class F>
double simpson_rec(const F& f, double a, double m, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth);

}  // namespace detail

// Adaptive Simpson quadrature of f over [a, b] to the given absolute
// tolerance. Throws QuadratureFailure on non-convergence.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol) {
    const double m = 0.5 * (a + b);
    const double fa = f(a), fm = f(m), fb = f(b);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, 0);
}

enum class ExpectationTag { slope, curvature };

// Gaussian expectation of V' or V'' by adaptive quadrature (1e-12 hybrid
// absolute/relative tolerance), split at segment joins so every panel is
// smooth. Oracle for gaussian_force_moments.
double quadrature_expectation(ExpectationTag tag, const PiecewisePotential& v, double mean_q,
                              double var_q);

// Phase-space flux int dp (p/m) W(q_barrier, p) by adaptive quadrature.
// Oracle for the decay-rate numerator.
double flux_quadrature(const MomentState& s, double q_barrier, double mass);

// Tail mass int_{q_barrier}^inf of the coordinate marginal by quadrature.
// Oracle for tunneling_probability.
double tail_quadrature(const MomentState& s, double q_barrier);

// Independently written evaluation of the moment equations: the force and
// curvature come from finite differences of evaluate() (exact for piecewise
// quadratics) in centroid mode, and from quadrature_expectation in
// gaussian_smeared mode.
MomentRates reference_rhs(const MomentState& s, const PiecewisePotential& v,
                          const LindbladParams& par, ClosureMode mode);

struct LangevinRow {
    double t = 0.0;
    double mean_q = 0.0, mean_p = 0.0;
    double cov_qq = 0.0, cov_pp = 0.0, cov_pq = 0.0;
    double se_mean_q = 0.0, se_mean_p = 0.0;
    double se_cov_qq = 0.0, se_cov_pp = 0.0, se_cov_pq = 0.0;
};

struct LangevinStats {
    std::vector<LangevinRow> rows;
};

// Euler-Maruyama ensemble of the classical SDE
//   dq = (p/m - lambda q) dt + sqrt(2 D_qq) dW1
//   dp = (-V'(q) - lambda p) dt + sqrt(2 D_pp) dW2,   corr(dW1,dW2) from D_pq,
// whose first and second moments obey the moment equations exactly while the
// force is linear. Trajectories are sampled from the Gaussian of s0 and use
// per-trajectory generators split deterministically from the seed, so the
// result depends only on (inputs, seed). Requires n >= 1000. Row 0 reports
// the statistics of the initial draw; one row follows per output_dt.
LangevinStats langevin_sample(const ParabolicSegment& seg, const LindbladParams& par,
                              const MomentState& s0, double dt, double t_end, std::size_t n,
                              std::uint64_t seed, double output_dt = 1.0);

namespace detail {

template <class F>
double simpson_rec(const F& f, double a, double m, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) {
    if (depth > 60) throw QuadratureFailure("adaptive_simpson: maximum depth exceeded");
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
    return simpson_rec(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
           simpson_rec(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
}

}  // namespace detail

}  // namespace lindblad
