// potential.hpp — Piecewise-quadratic potentials built from smoothly joined
// parabolic segments, with exact Gaussian expectations of V' and V''.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace lindblad {

// One quadratic piece V(q) = offset + stiffness/2 * (q - center)^2 on [lo, hi].
// Stiffness is signed and mass-weighted (units MeV/fm^2, i.e. m*omega^2):
// positive for wells, negative for the barrier piece.
struct ParabolicSegment {
    double center = 0.0;     // fm
    double stiffness = 0.0;  // MeV/fm^2
    double offset = 0.0;     // MeV
    double lo = 0.0;         // fm, -inf allowed
    double hi = 0.0;         // fm, +inf allowed

    double value(double q) const {
        const double d = q - center;
        return offset + 0.5 * stiffness * d * d;
    }
    double slope(double q) const { return stiffness * (q - center); }
};

// Ordered segments tiling the real line; joins[i] separates segment i from i+1.
// V and V' are continuous at every join by construction; V'' jumps.
struct PiecewisePotential {
    std::vector<ParabolicSegment> segments;
    std::vector<double> joins;

    double q_well_a = 0.0;           // left well minimum (fm)
    double q_barrier = 0.0;          // barrier top location (fm)
    double barrier_height = 0.0;     // V(q_barrier) - V(q_well_a) (MeV)
    std::optional<double> q_well_c;  // right well minimum, three-segment case
};

// Well + inverted barrier joined smoothly. The well stiffness and the join
// location follow from continuity of V and V':
//   well_stiffness = 2*C_b*B / (C_b*(q_b-q_a)^2 - 2B)
//   q_t = (q_a*well_stiffness + q_b*C_b) / (well_stiffness + C_b)
// Throws DomainError when q_a >= q_b, B <= 0, C_b <= 0, or
// C_b*(q_b-q_a)^2 <= 2B (barrier too wide/low for a smooth join).
PiecewisePotential build_two_parabola(double q_a, double q_b, double barrier_height,
                                      double barrier_stiffness, double v_a = 0.0);

// Attach a third (right-well) segment to a two-segment potential, joined
// smoothly at q_t2. Throws DomainError on violated preconditions.
PiecewisePotential build_three_parabola(const PiecewisePotential& base, double q_c, double v_c);

// Single segment covering the whole line (stiffness >= 0; 0 gives a free
// particle). Used for single-well studies and as the Monte-Carlo reference.
PiecewisePotential harmonic_well(double center, double stiffness, double offset = 0.0);

// Index of the active segment; at an exact join the lower-index segment wins.
std::size_t segment_at(const PiecewisePotential& v, double q);

double evaluate(const PiecewisePotential& v, double q);    // MeV
double derivative(const PiecewisePotential& v, double q);  // MeV/fm
double curvature(const PiecewisePotential& v, double q);   // MeV/fm^2

// Exact E[V'(q)] and E[V''(q)] for q ~ Normal(mean_q, var_q), as closed-form
// sums of erf and Gaussian-density terms over the segment boundaries.
// By Stein's identity, E[V'(q)(q-mean_q)] = var_q * mean_curvature.
struct ForceMoments {
    double mean_slope = 0.0;      // MeV/fm
    double mean_curvature = 0.0;  // MeV/fm^2
};
ForceMoments gaussian_force_moments(const PiecewisePotential& v, double mean_q, double var_q);

// Deterministic structured-text dump of the constructed segments (for golden
// tests and run provenance).
std::string describe(const PiecewisePotential& v);

}  // namespace lindblad
