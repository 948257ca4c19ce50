#include "lindblad/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include "lindblad/errors.hpp"
#include "lindblad/observables.hpp"

namespace lindblad {

PiecewisePotential ScenarioConfig::make_potential() const {
    PiecewisePotential v = build_two_parabola(q_a, q_b, barrier_height, barrier_stiffness, v_a);
    if (q_c) v = build_three_parabola(v, *q_c, v_c.value_or(v_a));
    return v;
}

DiffusionTriple rwa_diffusion(double lambda, double mass, double well_stiffness, double hbar) {
    if (!(lambda >= 0.0)) throw DomainError("rwa_diffusion: requires lambda >= 0");
    if (!(mass > 0.0)) throw DomainError("rwa_diffusion: requires mass > 0");
    if (!(well_stiffness > 0.0)) throw DomainError("rwa_diffusion: requires well stiffness > 0");
    DiffusionTriple d;
    d.d_qq = lambda * hbar / (2.0 * std::sqrt(mass * well_stiffness));
    d.d_pp = mass * well_stiffness * d.d_qq;
    d.d_pq = 0.0;
    return d;
}

LindbladParams make_params(const ScenarioConfig& cfg, double lambda) {
    const PiecewisePotential v = cfg.make_potential();
    const DiffusionTriple d = rwa_diffusion(lambda, cfg.mass, v.segments[0].stiffness);
    LindbladParams par;
    par.friction = lambda;
    par.d_qq = d.d_qq;
    par.d_pp = d.d_pp;
    par.d_pq = d.d_pq;
    par.mass = cfg.mass;
    par.validate();
    return par;
}

MomentState initial_state(const ScenarioConfig& cfg, double lambda, const DiffusionTriple& d) {
    const PiecewisePotential v = cfg.make_potential();
    MomentState s;
    s.t = 0.0;
    s.mean_q = cfg.q_a;
    s.mean_p = units::momentum_from_mev_c(cfg.momentum_mev_c);
    s.cov_pq = 0.0;
    if (lambda > 0.0) {
        s.cov_qq = d.d_qq / lambda;
    } else {
        // Stationary-width limit: D_qq/lambda is lambda-independent under the
        // rotating-wave coefficients.
        s.cov_qq = units::hbar / (2.0 * std::sqrt(cfg.mass * v.segments[0].stiffness));
    }
    s.cov_pp = units::hbar * units::hbar / (4.0 * s.cov_qq);
    return s;
}

std::string to_string(Classification c) {
    switch (c) {
        case Classification::escaped: return "escaped";
        case Classification::trapped: return "trapped";
        case Classification::settled_right: return "settled_right";
        case Classification::oscillating: return "oscillating";
    }
    return "unknown";
}

namespace {

Classification classify(const ScenarioConfig& cfg, const PiecewisePotential& v,
                        const LindbladParams& par, const MomentState& final_state) {
    const double q = final_state.mean_q;
    const double vel = -par.friction * final_state.mean_q + final_state.mean_p / par.mass;
    if (!cfg.three_segments()) {
        if (q > v.q_barrier && vel > 0.0) return Classification::escaped;
        return par.friction > 0.0 ? Classification::trapped : Classification::oscillating;
    }
    if (par.friction == 0.0) return Classification::oscillating;
    return q > v.q_barrier ? Classification::settled_right : Classification::trapped;
}

}  // namespace

Trajectory run_scenario(const ScenarioConfig& cfg, double lambda) {
    const PiecewisePotential v = cfg.make_potential();
    const LindbladParams par = make_params(cfg, lambda);
    const DiffusionTriple d{par.d_qq, par.d_pp, par.d_pq};
    const MomentState s0 = initial_state(cfg, lambda, d);

    Trajectory tr;
    tr.lambda = lambda;
    tr.series = integrate(s0, v, par, cfg.mode, cfg.controls);
    tr.prob.reserve(tr.series.states.size());
    tr.rate.reserve(tr.series.states.size());
    for (const MomentState& s : tr.series.states) {
        tr.prob.push_back(tunneling_probability(s, v.q_barrier));
        double rate = std::numeric_limits<double>::quiet_NaN();
        try {
            rate = decay_rate(s, v.q_barrier, par.mass);
        } catch (const RateUndefined&) {
        }
        tr.rate.push_back(rate);
    }
    tr.classification = classify(cfg, v, par, tr.series.states.back());
    return tr;
}

AsymptoteResult asymptote(const std::vector<double>& times, const std::vector<double>& prob,
                          double window, double tol) {
    AsymptoteResult res;
    if (times.size() != prob.size() || times.size() < 3) return res;
    const double t_end = times.back();
    const double span = t_end - times.front();
    if (!(span > 2.0 * window)) return res;

    const double t_from = t_end - window;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (times[i] < t_from - 1e-12) continue;
        lo = std::min(lo, prob[i]);
        hi = std::max(hi, prob[i]);
        sum += prob[i];
        ++n;
    }
    if (n < 2 || hi - lo > tol) return res;

    res.p_inf = sum / static_cast<double>(n);
    // Tiny absolute floor so an exactly-constant series still reports t90 = 0.
    const double band = 0.1 * std::abs(*res.p_inf - prob.front()) +
                        1e-12 * std::max(1.0, std::abs(*res.p_inf));
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (std::abs(prob[i] - *res.p_inf) <= band) {
            res.t90 = times[i];
            break;
        }
    }
    return res;
}

AsymptoteResult asymptote(const Trajectory& tr, double window, double tol) {
    std::vector<double> times;
    times.reserve(tr.series.states.size());
    for (const MomentState& s : tr.series.states) times.push_back(s.t);
    return asymptote(times, tr.prob, window, tol);
}

namespace {

bool crossed(const Trajectory& tr) {
    return tr.classification == Classification::escaped ||
           tr.classification == Classification::settled_right;
}

}  // namespace

CriticalResult critical_lambda(const ScenarioConfig& cfg, double lambda_lo, double lambda_hi,
                               double tol) {
    if (!(lambda_lo < lambda_hi)) throw DomainError("critical_lambda: requires lambda_lo < lambda_hi");
    if (!(tol > 0.0)) throw DomainError("critical_lambda: requires tol > 0");
    const bool c_lo = crossed(run_scenario(cfg, lambda_lo));
    const bool c_hi = crossed(run_scenario(cfg, lambda_hi));
    if (c_lo == c_hi)
        throw BracketError("critical_lambda: endpoints classify identically (" +
                           std::string(c_lo ? "both crossed" : "both trapped") + ")");

    const double lo0 = lambda_lo, hi0 = lambda_hi;
    double lo = lambda_lo, hi = lambda_hi;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (crossed(run_scenario(cfg, mid)) == c_lo)
            lo = mid;
        else
            hi = mid;
    }

    CriticalResult res;
    res.lambda_cr = 0.5 * (lo + hi);
    res.bracket_lo = lo;
    res.bracket_hi = hi;

    // Monotonicity spot check: classification must switch exactly once across
    // the original bracket.
    res.monotone_ok = true;
    for (int i = 1; i <= 5; ++i) {
        const double probe = lo0 + (hi0 - lo0) * static_cast<double>(i) / 6.0;
        const bool c = crossed(run_scenario(cfg, probe));
        const bool expected = probe < res.lambda_cr ? c_lo : c_hi;
        if (c != expected) res.monotone_ok = false;
    }
    return res;
}

SweepResult friction_sweep(const ScenarioConfig& cfg, const std::vector<double>& lambdas,
                           int threads) {
    for (std::size_t i = 1; i < lambdas.size(); ++i)
        if (!(lambdas[i] > lambdas[i - 1]))
            throw DomainError("friction_sweep: lambda grid must be strictly increasing");

    SweepResult result;
    result.entries.resize(lambdas.size());

    const auto work = [&](std::size_t i) {
        SweepEntry& e = result.entries[i];
        e.lambda = lambdas[i];
        try {
            const Trajectory tr = run_scenario(cfg, lambdas[i]);
            e.classification = tr.classification;
            const AsymptoteResult as = asymptote(tr, cfg.asym_window, cfg.asym_tol);
            e.p_inf = as.p_inf;
            e.t90 = as.t90;
        } catch (const std::exception& ex) {
            e.error = ex.what();
        }
    };

    const int n_threads = std::max(
        1, std::min<int>(threads, static_cast<int>(std::thread::hardware_concurrency())));
    if (n_threads <= 1 || lambdas.size() <= 1) {
        for (std::size_t i = 0; i < lambdas.size(); ++i) work(i);
        return result;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int t = 0; t < n_threads; ++t) {
        pool.emplace_back([&, t] {
            for (std::size_t i = static_cast<std::size_t>(t); i < lambdas.size();
                 i += static_cast<std::size_t>(n_threads))
                work(i);
        });
    }
    for (std::thread& th : pool) th.join();
    return result;
}

}  // namespace lindblad
