// propagator.hpp — Exact affine propagator of the moment equations on one
// segment, valid while the dynamics stays within that segment. Serves as the
// integration oracle and as a fast path for single-segment runs.

#pragma once

#include <array>

#include "lindblad/dynamics.hpp"
#include "lindblad/potential.hpp"

namespace lindblad {

// Affine update on the 5-moment vector: the mean pair and the covariance
// triple evolve under independent constant-coefficient linear systems, so the
// exact flow over dt is a matrix exponential of each block plus an
// inhomogeneous (force-offset / diffusion) shift.
struct SegmentPropagator {
    std::array<double, 4> mean_mat{};   // row-major 2x2 acting on (mean_q, mean_p)
    std::array<double, 2> mean_shift{};
    std::array<double, 9> cov_mat{};    // row-major 3x3 acting on (cov_qq, cov_pp, cov_pq)
    std::array<double, 3> cov_shift{};
    double dt = 0.0;

    MomentState apply(const MomentState& s) const;

    // Composition: (later.after(*this)) maps s over this->dt then later.dt.
    SegmentPropagator then(const SegmentPropagator& later) const;
};

SegmentPropagator segment_propagator_exact(const ParabolicSegment& seg, const LindbladParams& par,
                                           double dt);

// Fast path for runs confined to one segment: records the exact flow every
// out_dt up to t_end. Independent of integrate(), which keeps the
// RK4-vs-propagator cross-check two-sided.
TimeSeries propagate_exact(const MomentState& s0, const ParabolicSegment& seg,
                           const LindbladParams& par, double out_dt, double t_end);

}  // namespace lindblad
