// dynamics.hpp — Five-moment Lindblad dynamics: equations of motion, RK4 and
// adaptive integration with segment-crossing event location, time series.

#pragma once

#include <vector>

#include "lindblad/potential.hpp"
#include "lindblad/units.hpp"

namespace lindblad {

// The five dynamical moments of the Gaussian state, plus time.
struct MomentState {
    double t = 0.0;       // T
    double mean_q = 0.0;  // fm
    double mean_p = 0.0;  // MeV*T/fm
    double cov_qq = 0.0;  // fm^2
    double cov_pp = 0.0;  // (MeV*T/fm)^2
    double cov_pq = 0.0;  // MeV*T

    // sigma_qq*sigma_pp - sigma_pq^2, bounded below by (hbar/2)^2 for
    // admissible states.
    double uncertainty_product() const { return cov_qq * cov_pp - cov_pq * cov_pq; }
};

// Friction and diffusion coefficients of the Lindblad generator.
struct LindbladParams {
    double friction = 0.0;            // 1/T
    double d_qq = 0.0;                // fm^2/T
    double d_pp = 0.0;                // (MeV*T/fm)^2/T
    double d_pq = 0.0;                // MeV*T/T
    double mass = 1.0;                // MeV*T^2/fm^2
    double hbar = units::hbar;        // MeV*T

    void validate() const;  // throws DomainError on hard invariant violations

    // D_qq*D_pp - D_pq^2 >= (friction*hbar/2)^2. Warn-level: the rotating-wave
    // coefficients saturate it exactly, so a small slack is tolerated.
    bool lindblad_constraint_ok(double rel_slack = 1e-12) const;
};

// How the force traces over the piecewise potential are closed:
//   centroid         — V', V'' at the mean position (piecewise-linear system,
//                      exactly solvable per segment)
//   gaussian_smeared — exact Gaussian expectations E[V'], E[V''] with Stein
//                      closure of the mixed traces
enum class ClosureMode { centroid, gaussian_smeared };

struct MomentRates {
    double mean_q = 0.0;
    double mean_p = 0.0;
    double cov_qq = 0.0;
    double cov_pp = 0.0;
    double cov_pq = 0.0;
};

// Equations of motion. With (F, K) the closed force and curvature:
//   d mean_q = -lambda*mean_q + mean_p/m
//   d mean_p = -F - lambda*mean_p
//   d cov_qq = -2 lambda cov_qq + 2 cov_pq/m + 2 D_qq
//   d cov_pp = -2 lambda cov_pp - 2 K cov_pq + 2 D_pp
//   d cov_pq = -2 lambda cov_pq + cov_pp/m - K cov_qq + 2 D_pq
MomentRates rhs(const MomentState& s, const PiecewisePotential& v, const LindbladParams& par,
                ClosureMode mode);

// One classical 4th-order step (no event handling; see integrate for that).
MomentState step_rk4(const MomentState& s, const PiecewisePotential& v, const LindbladParams& par,
                     ClosureMode mode, double dt);

struct TimeSeries {
    std::vector<MomentState> states;
};

struct IntegrationControls {
    double dt = 1e-3;        // base step (T); also the output-time unit
    double t_end = 100.0;    // T
    int stride = 100;        // record every stride-th base step
    bool adaptive = false;   // embedded Dormand-Prince 5(4) error control
    double rel_tol = 1e-10;  // adaptive relative tolerance on the 5-vector
    double min_step = 1e-8;  // adaptive: below this, StepFailure

    void validate() const;  // throws DomainError
};

// Integrate and record states every stride*dt (plus the initial and final
// state). In centroid mode, steps are shortened to land on segment crossings
// to within 1e-12 fm so the force law is never averaged across a join.
// Throws StepFailure when adaptive control cannot meet the tolerance at the
// minimum step.
TimeSeries integrate(const MomentState& s0, const PiecewisePotential& v,
                     const LindbladParams& par, ClosureMode mode,
                     const IntegrationControls& controls);

}  // namespace lindblad
