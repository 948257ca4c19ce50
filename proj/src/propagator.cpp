#include "lindblad/propagator.hpp"

#include <cmath>

#include "lindblad/errors.hpp"
#include "lindblad/expm.hpp"

namespace lindblad {

MomentState SegmentPropagator::apply(const MomentState& s) const {
    MomentState r = s;
    r.t = s.t + dt;
    r.mean_q = mean_mat[0] * s.mean_q + mean_mat[1] * s.mean_p + mean_shift[0];
    r.mean_p = mean_mat[2] * s.mean_q + mean_mat[3] * s.mean_p + mean_shift[1];
    r.cov_qq = cov_mat[0] * s.cov_qq + cov_mat[1] * s.cov_pp + cov_mat[2] * s.cov_pq + cov_shift[0];
    r.cov_pp = cov_mat[3] * s.cov_qq + cov_mat[4] * s.cov_pp + cov_mat[5] * s.cov_pq + cov_shift[1];
    r.cov_pq = cov_mat[6] * s.cov_qq + cov_mat[7] * s.cov_pp + cov_mat[8] * s.cov_pq + cov_shift[2];
    return r;
}

SegmentPropagator SegmentPropagator::then(const SegmentPropagator& later) const {
    SegmentPropagator r;
    r.dt = dt + later.dt;
    // means: L*(E*x + e) + l
    r.mean_mat[0] = later.mean_mat[0] * mean_mat[0] + later.mean_mat[1] * mean_mat[2];
    r.mean_mat[1] = later.mean_mat[0] * mean_mat[1] + later.mean_mat[1] * mean_mat[3];
    r.mean_mat[2] = later.mean_mat[2] * mean_mat[0] + later.mean_mat[3] * mean_mat[2];
    r.mean_mat[3] = later.mean_mat[2] * mean_mat[1] + later.mean_mat[3] * mean_mat[3];
    r.mean_shift[0] =
        later.mean_mat[0] * mean_shift[0] + later.mean_mat[1] * mean_shift[1] + later.mean_shift[0];
    r.mean_shift[1] =
        later.mean_mat[2] * mean_shift[0] + later.mean_mat[3] * mean_shift[1] + later.mean_shift[1];
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            double acc = 0.0;
            for (int k = 0; k < 3; ++k) acc += later.cov_mat[i * 3 + k] * cov_mat[k * 3 + j];
            r.cov_mat[i * 3 + j] = acc;
        }
        double acc = later.cov_shift[i];
        for (int k = 0; k < 3; ++k) acc += later.cov_mat[i * 3 + k] * cov_shift[k];
        r.cov_shift[i] = acc;
    }
    return r;
}

SegmentPropagator segment_propagator_exact(const ParabolicSegment& seg, const LindbladParams& par,
                                           double dt) {
    if (!(dt >= 0.0)) throw DomainError("segment_propagator_exact: requires dt >= 0");
    par.validate();
    const double lam = par.friction;
    const double inv_m = 1.0 / par.mass;
    const double c = seg.stiffness;

    // Augmented mean block: d/dt (q, p, 1) with the constant force offset
    // c*center folded into the third column.
    detail::Mat<3> mean;
    mean(0, 0) = -lam;
    mean(0, 1) = inv_m;
    mean(1, 0) = -c;
    mean(1, 1) = -lam;
    mean(1, 2) = c * seg.center;
    const detail::Mat<3> mean_exp = detail::expm(detail::mat_scale(mean, dt));

    // Augmented covariance block: d/dt (qq, pp, pq, 1) with the diffusion
    // inhomogeneity in the fourth column.
    detail::Mat<4> cov;
    cov(0, 0) = -2.0 * lam;
    cov(0, 2) = 2.0 * inv_m;
    cov(0, 3) = 2.0 * par.d_qq;
    cov(1, 1) = -2.0 * lam;
    cov(1, 2) = -2.0 * c;
    cov(1, 3) = 2.0 * par.d_pp;
    cov(2, 0) = -c;
    cov(2, 1) = inv_m;
    cov(2, 2) = -2.0 * lam;
    cov(2, 3) = 2.0 * par.d_pq;
    const detail::Mat<4> cov_exp = detail::expm(detail::mat_scale(cov, dt));

    SegmentPropagator p;
    p.dt = dt;
    p.mean_mat = {mean_exp(0, 0), mean_exp(0, 1), mean_exp(1, 0), mean_exp(1, 1)};
    p.mean_shift = {mean_exp(0, 2), mean_exp(1, 2)};
    p.cov_mat = {cov_exp(0, 0), cov_exp(0, 1), cov_exp(0, 2), cov_exp(1, 0), cov_exp(1, 1),
                 cov_exp(1, 2), cov_exp(2, 0), cov_exp(2, 1), cov_exp(2, 2)};
    p.cov_shift = {cov_exp(0, 3), cov_exp(1, 3), cov_exp(2, 3)};
    return p;
}

TimeSeries propagate_exact(const MomentState& s0, const ParabolicSegment& seg,
                           const LindbladParams& par, double out_dt, double t_end) {
    if (!(out_dt > 0.0) || !(t_end > 0.0))
        throw DomainError("propagate_exact: requires out_dt > 0 and t_end > 0");
    const SegmentPropagator step = segment_propagator_exact(seg, par, out_dt);
    TimeSeries out;
    const long n = static_cast<long>(std::floor(t_end / out_dt + 1e-9));
    out.states.reserve(static_cast<std::size_t>(n) + 2);
    MomentState s = s0;
    out.states.push_back(s);
    for (long k = 1; k <= n; ++k) {
        s = step.apply(s);
        s.t = s0.t + static_cast<double>(k) * out_dt;
        out.states.push_back(s);
    }
    const double rest = s0.t + t_end - s.t;
    if (rest > 1e-9 * out_dt) {
        s = segment_propagator_exact(seg, par, rest).apply(s);
        s.t = s0.t + t_end;
        out.states.push_back(s);
    }
    return out;
}

}  // namespace lindblad
