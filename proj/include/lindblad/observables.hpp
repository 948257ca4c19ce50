// observables.hpp — Phase-space density, tunneling probability past the
// barrier top, and the decay rate of a Gaussian moment state.

#pragma once

#include "lindblad/dynamics.hpp"

namespace lindblad {

// Bivariate normal phase-space density with mean (mean_q, mean_p) and
// covariance [[cov_qq, cov_pq], [cov_pq, cov_pp]]. Normalized to 1.
// Throws DegenerateCovariance when the covariance determinant is <= 0.
double wigner_density(const MomentState& s, double q, double p);

// Probability mass to the right of the barrier top:
//   P = 1/2 * erfc((q_barrier - mean_q) / sqrt(2 cov_qq)).
double tunneling_probability(const MomentState& s, double q_barrier);

// Decay rate through the barrier top: the phase-space flux
// J = int dp (p/m) W(q_barrier, p) divided by the tunneling probability.
// With normalize_by_mass unset, evaluates the historical closed form instead
// (no 1/m, no 1/2 from the probability normalization), which equals
// mass/2 times the flux ratio. Throws RateUndefined when the probability
// underflows (below 1e-300).
double decay_rate(const MomentState& s, double q_barrier, double mass,
                  bool normalize_by_mass = true);

}  // namespace lindblad
