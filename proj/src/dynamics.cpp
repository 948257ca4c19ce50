#include "lindblad/dynamics.hpp"

#include <cmath>
#include <functional>
#include <limits>

#include "lindblad/errors.hpp"

namespace lindblad {

namespace {

// Distance below which a crossing counts as landed on the join.
constexpr double kJoinTol = 1e-12;  // fm

struct LinearForce {
    double stiffness = 0.0;
    double center = 0.0;
};

MomentRates rates_from(const MomentState& s, double force, double curvature,
                       const LindbladParams& par) {
    const double lam = par.friction;
    const double inv_m = 1.0 / par.mass;
    MomentRates r;
    r.mean_q = -lam * s.mean_q + s.mean_p * inv_m;
    r.mean_p = -force - lam * s.mean_p;
    r.cov_qq = -2.0 * lam * s.cov_qq + 2.0 * s.cov_pq * inv_m + 2.0 * par.d_qq;
    r.cov_pp = -2.0 * lam * s.cov_pp - 2.0 * curvature * s.cov_pq + 2.0 * par.d_pp;
    r.cov_pq = -2.0 * lam * s.cov_pq + s.cov_pp * inv_m - curvature * s.cov_qq + 2.0 * par.d_pq;
    return r;
}

MomentState advance(const MomentState& s, const MomentRates& r, double h) {
    MomentState n = s;
    n.t = s.t + h;
    n.mean_q = s.mean_q + h * r.mean_q;
    n.mean_p = s.mean_p + h * r.mean_p;
    n.cov_qq = s.cov_qq + h * r.cov_qq;
    n.cov_pp = s.cov_pp + h * r.cov_pp;
    n.cov_pq = s.cov_pq + h * r.cov_pq;
    return n;
}

template <class Rates>
MomentState rk4_step(const MomentState& s, const Rates& rates, double h) {
    const MomentRates k1 = rates(s);
    const MomentRates k2 = rates(advance(s, k1, 0.5 * h));
    const MomentRates k3 = rates(advance(s, k2, 0.5 * h));
    const MomentRates k4 = rates(advance(s, k3, h));
    MomentState n = s;
    n.t = s.t + h;
    const double w = h / 6.0;
    n.mean_q += w * (k1.mean_q + 2.0 * k2.mean_q + 2.0 * k3.mean_q + k4.mean_q);
    n.mean_p += w * (k1.mean_p + 2.0 * k2.mean_p + 2.0 * k3.mean_p + k4.mean_p);
    n.cov_qq += w * (k1.cov_qq + 2.0 * k2.cov_qq + 2.0 * k3.cov_qq + k4.cov_qq);
    n.cov_pp += w * (k1.cov_pp + 2.0 * k2.cov_pp + 2.0 * k3.cov_pp + k4.cov_pp);
    n.cov_pq += w * (k1.cov_pq + 2.0 * k2.cov_pq + 2.0 * k3.cov_pq + k4.cov_pq);
    return n;
}

struct EmbeddedResult {
    MomentState y;
    double err = 0.0;  // scaled error norm; accept when <= 1
};

// Dormand-Prince 5(4) embedded pair.
template <class Rates>
EmbeddedResult dp54_step(const MomentState& s, const Rates& rates, double h, double rel_tol) {
    static const double a21 = 1.0 / 5.0;
    static const double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
    static const double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
    static const double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                        a54 = -212.0 / 729.0;
    static const double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                        a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
    static const double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                        b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
    static const double e1 = 35.0 / 384.0 - 5179.0 / 57600.0, e3 = 500.0 / 1113.0 - 7571.0 / 16695.0,
                        e4 = 125.0 / 192.0 - 393.0 / 640.0,
                        e5 = -2187.0 / 6784.0 + 92097.0 / 339200.0,
                        e6 = 11.0 / 84.0 - 187.0 / 2100.0, e7 = -1.0 / 40.0;

    const auto axpy = [&](std::initializer_list<const MomentRates*> ks,
                          std::initializer_list<double> ws) {
        MomentState y = s;
        auto kit = ks.begin();
        auto wit = ws.begin();
        for (; kit != ks.end(); ++kit, ++wit) {
            const MomentRates& k = **kit;
            const double w = h * (*wit);
            y.mean_q += w * k.mean_q;
            y.mean_p += w * k.mean_p;
            y.cov_qq += w * k.cov_qq;
            y.cov_pp += w * k.cov_pp;
            y.cov_pq += w * k.cov_pq;
        }
        return y;
    };

    const MomentRates k1 = rates(s);
    const MomentRates k2 = rates(axpy({&k1}, {a21}));
    const MomentRates k3 = rates(axpy({&k1, &k2}, {a31, a32}));
    const MomentRates k4 = rates(axpy({&k1, &k2, &k3}, {a41, a42, a43}));
    const MomentRates k5 = rates(axpy({&k1, &k2, &k3, &k4}, {a51, a52, a53, a54}));
    const MomentRates k6 = rates(axpy({&k1, &k2, &k3, &k4, &k5}, {a61, a62, a63, a64, a65}));
    MomentState y5 = axpy({&k1, &k3, &k4, &k5, &k6}, {b1, b3, b4, b5, b6});
    y5.t = s.t + h;
    const MomentRates k7 = rates(y5);

    const auto err_comp = [&](double c1, double c3, double c4, double c5, double c6, double c7) {
        return h * (e1 * c1 + e3 * c3 + e4 * c4 + e5 * c5 + e6 * c6 + e7 * c7);
    };
    const auto scaled = [&](double err, double y0, double y1) {
        return std::abs(err) / (rel_tol * (1.0 + std::max(std::abs(y0), std::abs(y1))));
    };
    double norm = scaled(err_comp(k1.mean_q, k3.mean_q, k4.mean_q, k5.mean_q, k6.mean_q, k7.mean_q),
                         s.mean_q, y5.mean_q);
    norm = std::max(
        norm, scaled(err_comp(k1.mean_p, k3.mean_p, k4.mean_p, k5.mean_p, k6.mean_p, k7.mean_p),
                     s.mean_p, y5.mean_p));
    norm = std::max(
        norm, scaled(err_comp(k1.cov_qq, k3.cov_qq, k4.cov_qq, k5.cov_qq, k6.cov_qq, k7.cov_qq),
                     s.cov_qq, y5.cov_qq));
    norm = std::max(
        norm, scaled(err_comp(k1.cov_pp, k3.cov_pp, k4.cov_pp, k5.cov_pp, k6.cov_pp, k7.cov_pp),
                     s.cov_pp, y5.cov_pp));
    norm = std::max(
        norm, scaled(err_comp(k1.cov_pq, k3.cov_pq, k4.cov_pq, k5.cov_pq, k6.cov_pq, k7.cov_pq),
                     s.cov_pq, y5.cov_pq));
    return {y5, norm};
}

// Active segment for the centroid closure. On a join (within kJoinTol) the
// side is chosen by the direction of motion so the next step starts in the
// segment actually being entered.
std::size_t pin_segment(const PiecewisePotential& v, const MomentState& s,
                        const LindbladParams& par) {
    std::size_t idx = segment_at(v, s.mean_q);
    for (std::size_t j = 0; j < v.joins.size(); ++j) {
        if (std::abs(s.mean_q - v.joins[j]) <= kJoinTol) {
            const double vel = -par.friction * s.mean_q + s.mean_p / par.mass;
            if (vel > 0.0) {
                idx = j + 1;
            } else if (vel < 0.0) {
                idx = j;
            } else {
                // Stationary on the join: decide by the (continuous) force.
                const double acc = -v.segments[j].slope(s.mean_q) - par.friction * s.mean_p;
                idx = (acc > 0.0) ? j + 1 : j;
            }
            break;
        }
    }
    return idx;
}

bool inside(const ParabolicSegment& seg, double q) {
    return q >= seg.lo - kJoinTol && q <= seg.hi + kJoinTol;
}

// Shrink the step until the trajectory lands on the crossed boundary.
template <class Step>
MomentState locate_crossing(const MomentState& s, const ParabolicSegment& seg,
                            const MomentState& trial, double full, const Step& substep,
                            double& used) {
    const double target = (trial.mean_q > seg.hi) ? seg.hi : seg.lo;
    double lo = 0.0, hi = full;
    double tau = full;
    MomentState landed = trial;
    for (int it = 0; it < 200; ++it) {
        tau = 0.5 * (lo + hi);
        landed = substep(s, tau);
        const double miss = landed.mean_q - target;
        if (std::abs(miss) <= kJoinTol) break;
        const bool past = (target == seg.hi) ? (miss > 0.0) : (miss < 0.0);
        (past ? hi : lo) = tau;
    }
    used = tau;
    return landed;
}

// Advance by exactly `span` with fixed-step RK4, never integrating across a
// join: the step is shortened to land on the crossing to within kJoinTol and
// the active parabola is switched there.
MomentState advance_centroid_fixed(MomentState s, const PiecewisePotential& v,
                                   const LindbladParams& par, double span) {
    double remaining = span;
    int guard = 0;
    while (remaining > 1e-15 * span) {
        if (++guard > 10000)
            throw StepFailure("integrate: too many segment crossings within one step");
        const ParabolicSegment& seg = v.segments[pin_segment(v, s, par)];
        const auto rates = [&](const MomentState& y) {
            return rates_from(y, seg.slope(y.mean_q), seg.stiffness, par);
        };
        const MomentState trial = rk4_step(s, rates, remaining);
        if (inside(seg, trial.mean_q)) return trial;
        double used = remaining;
        s = locate_crossing(
            s, seg, trial, remaining,
            [&](const MomentState& y0, double tau) { return rk4_step(y0, rates, tau); }, used);
        remaining -= used;
    }
    return s;
}

template <class RatesForSegment>
MomentState advance_adaptive(MomentState s, const PiecewisePotential& v, const LindbladParams& par,
                             double t_target, const IntegrationControls& ctl, double& h,
                             bool with_events, const RatesForSegment& rates_for) {
    while (s.t < t_target - 1e-12 * std::max(1.0, std::abs(t_target))) {
        h = std::min(h, t_target - s.t);
        const ParabolicSegment& seg = v.segments[pin_segment(v, s, par)];
        const auto rates = rates_for(seg);
        const EmbeddedResult r = dp54_step(s, rates, h, ctl.rel_tol);
        if (r.err > 1.0) {
            h *= std::max(0.2, 0.9 * std::pow(r.err, -0.2));
            if (h < ctl.min_step)
                throw StepFailure(
                    "integrate: adaptive control cannot meet tolerance at minimum step");
            continue;
        }
        const double h_used = h;
        h *= (r.err > 0.0) ? std::min(5.0, 0.9 * std::pow(r.err, -0.2)) : 5.0;
        h = std::max(h, ctl.min_step);
        if (!with_events || inside(seg, r.y.mean_q)) {
            s = r.y;
            continue;
        }
        double used = h_used;
        s = locate_crossing(
            s, seg, r.y, h_used,
            [&](const MomentState& y0, double tau) { return dp54_step(y0, rates, tau, ctl.rel_tol).y; },
            used);
    }
    s.t = t_target;
    return s;
}

}  // namespace

void LindbladParams::validate() const {
    if (!(friction >= 0.0)) throw DomainError("LindbladParams: requires friction >= 0");
    if (!(mass > 0.0)) throw DomainError("LindbladParams: requires mass > 0");
    if (!(hbar > 0.0)) throw DomainError("LindbladParams: requires hbar > 0");
    if (!(d_qq >= 0.0) || !(d_pp >= 0.0))
        throw DomainError("LindbladParams: requires D_qq >= 0 and D_pp >= 0");
}

bool LindbladParams::lindblad_constraint_ok(double rel_slack) const {
    const double lhs = d_qq * d_pp - d_pq * d_pq;
    const double rhs = 0.25 * friction * friction * hbar * hbar;
    return lhs >= rhs * (1.0 - rel_slack);
}

void IntegrationControls::validate() const {
    if (!(dt > 0.0)) throw DomainError("IntegrationControls: requires dt > 0");
    if (!(t_end > 0.0)) throw DomainError("IntegrationControls: requires t_end > 0");
    if (stride < 1) throw DomainError("IntegrationControls: requires stride >= 1");
    if (!(rel_tol > 0.0)) throw DomainError("IntegrationControls: requires rel_tol > 0");
    if (!(min_step > 0.0)) throw DomainError("IntegrationControls: requires min_step > 0");
}

MomentRates rhs(const MomentState& s, const PiecewisePotential& v, const LindbladParams& par,
                ClosureMode mode) {
    if (mode == ClosureMode::centroid) {
        const ParabolicSegment& seg = v.segments[segment_at(v, s.mean_q)];
        return rates_from(s, seg.slope(s.mean_q), seg.stiffness, par);
    }
    const ForceMoments fm = gaussian_force_moments(v, s.mean_q, s.cov_qq);
    return rates_from(s, fm.mean_slope, fm.mean_curvature, par);
}

MomentState step_rk4(const MomentState& s, const PiecewisePotential& v, const LindbladParams& par,
                     ClosureMode mode, double dt) {
    if (!(dt > 0.0)) throw DomainError("step_rk4: requires dt > 0");
    if (mode == ClosureMode::centroid) {
        const ParabolicSegment& seg = v.segments[segment_at(v, s.mean_q)];
        const auto rates = [&](const MomentState& y) {
            return rates_from(y, seg.slope(y.mean_q), seg.stiffness, par);
        };
        return rk4_step(s, rates, dt);
    }
    const auto rates = [&](const MomentState& y) {
        const ForceMoments fm = gaussian_force_moments(v, y.mean_q, y.cov_qq);
        return rates_from(y, fm.mean_slope, fm.mean_curvature, par);
    };
    return rk4_step(s, rates, dt);
}

TimeSeries integrate(const MomentState& s0, const PiecewisePotential& v, const LindbladParams& par,
                     ClosureMode mode, const IntegrationControls& ctl) {
    ctl.validate();
    par.validate();

    const double t0 = s0.t;
    const double t_final = t0 + ctl.t_end;
    const long n_base = static_cast<long>(std::floor(ctl.t_end / ctl.dt + 1e-9));

    TimeSeries out;
    out.states.reserve(static_cast<std::size_t>(n_base / ctl.stride) + 3);
    MomentState s = s0;
    out.states.push_back(s);

    const auto rates_for = [&](const ParabolicSegment& seg) {
        if (mode == ClosureMode::centroid)
            return std::function<MomentRates(const MomentState&)>([&seg, &par](const MomentState& y) {
                return rates_from(y, seg.slope(y.mean_q), seg.stiffness, par);
            });
        return std::function<MomentRates(const MomentState&)>([&v, &par](const MomentState& y) {
            const ForceMoments fm = gaussian_force_moments(v, y.mean_q, y.cov_qq);
            return rates_from(y, fm.mean_slope, fm.mean_curvature, par);
        });
    };

    double h_adaptive = ctl.dt;
    if (ctl.adaptive) {
        // Advance record-to-record so the step size is free to grow past dt.
        const double out_dt = ctl.dt * static_cast<double>(ctl.stride);
        const long n_out = static_cast<long>(std::floor(ctl.t_end / out_dt + 1e-9));
        for (long j = 1; j <= n_out; ++j) {
            double t_target = t0 + static_cast<double>(j) * out_dt;
            if (t_target > t_final) t_target = t_final;
            if (t_target <= s.t) continue;
            s = advance_adaptive(s, v, par, t_target, ctl, h_adaptive,
                                 mode == ClosureMode::centroid, rates_for);
            out.states.push_back(s);
        }
        if (t_final - s.t > 1e-9 * ctl.dt) {
            s = advance_adaptive(s, v, par, t_final, ctl, h_adaptive,
                                 mode == ClosureMode::centroid, rates_for);
            out.states.push_back(s);
        }
        return out;
    }

    const auto advance_to = [&](double t_target) {
        const double span = t_target - s.t;
        if (mode == ClosureMode::centroid) {
            s = advance_centroid_fixed(s, v, par, span);
        } else {
            const auto rates = [&](const MomentState& y) {
                const ForceMoments fm = gaussian_force_moments(v, y.mean_q, y.cov_qq);
                return rates_from(y, fm.mean_slope, fm.mean_curvature, par);
            };
            s = rk4_step(s, rates, span);
        }
        s.t = t_target;  // suppress accumulated round-off in the time stamps
    };

    for (long k = 1; k <= n_base; ++k) {
        double t_target = t0 + static_cast<double>(k) * ctl.dt;
        if (t_target > t_final) t_target = t_final;
        if (t_target <= s.t) continue;
        advance_to(t_target);
        if (k % ctl.stride == 0) out.states.push_back(s);
    }
    if (t_final - s.t > 1e-9 * ctl.dt) advance_to(t_final);
    if (s.t - out.states.back().t > 1e-12 * std::max(1.0, std::abs(s.t))) out.states.push_back(s);
    return out;
}

}  // namespace lindblad
