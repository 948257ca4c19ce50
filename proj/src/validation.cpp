#include "lindblad/validation.hpp"

#include <algorithm>
#include <cmath>

#include "lindblad/errors.hpp"
#include "lindblad/observables.hpp"

namespace lindblad {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;

double normal_pdf(double x, double mean, double var) {
    const double d = x - mean;
    return std::exp(-0.5 * d * d / var) / std::sqrt(kTwoPi * var);
}

// splitmix64: seeds the per-trajectory generators.
struct SplitMix64 {
    std::uint64_t state;
    std::uint64_t next() {
        state += 0x9E3779B97F4A7C15ull;
        std::uint64_t z = state;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }
};

// xoshiro256++, public-domain reference construction.
struct Xoshiro256pp {
    std::uint64_t s[4];

    explicit Xoshiro256pp(std::uint64_t seed) {
        SplitMix64 sm{seed};
        for (std::uint64_t& w : s) w = sm.next();
    }
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t next() {
        const std::uint64_t result = rotl(s[0] + s[3], 23) + s[0];
        const std::uint64_t t = s[1] << 17;
        s[2] ^= s[0];
        s[3] ^= s[1];
        s[1] ^= s[2];
        s[0] ^= s[3];
        s[2] ^= t;
        s[3] = rotl(s[3], 45);
        return result;
    }
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
};

struct GaussPair {
    double z1, z2;
};

// Box-Muller: exact transform, accurate in the tails.
GaussPair gauss_pair(Xoshiro256pp& g) {
    const double u1 = 1.0 - g.uniform01();  // (0, 1]
    const double u2 = g.uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double th = kTwoPi * u2;
    return {r * std::cos(th), r * std::sin(th)};
}

}  // namespace

double quadrature_expectation(ExpectationTag tag, const PiecewisePotential& v, double mean_q,
                              double var_q) {
    if (!(var_q > 0.0)) throw DomainError("quadrature_expectation: requires var_q > 0");
    const double sd = std::sqrt(var_q);
    const double lo_all = mean_q - 12.0 * sd;
    const double hi_all = mean_q + 12.0 * sd;

    // Coarse pass to set the hybrid tolerance scale.
    double coarse = 0.0;
    for (const ParabolicSegment& seg : v.segments) {
        const double a = std::max(seg.lo, lo_all);
        const double b = std::min(seg.hi, hi_all);
        if (!(a < b)) continue;
        const auto f = [&](double q) {
            const double w = normal_pdf(q, mean_q, var_q);
            return tag == ExpectationTag::slope ? seg.slope(q) * w : seg.stiffness * w;
        };
        const double m = 0.5 * (a + b);
        coarse += (b - a) / 6.0 * (std::abs(f(a)) + 4.0 * std::abs(f(m)) + std::abs(f(b)));
    }
    const double tol = 1e-12 * std::max(1.0, coarse);

    double total = 0.0;
    for (const ParabolicSegment& seg : v.segments) {
        const double a = std::max(seg.lo, lo_all);
        const double b = std::min(seg.hi, hi_all);
        if (!(a < b)) continue;
        const auto f = [&](double q) {
            const double w = normal_pdf(q, mean_q, var_q);
            return tag == ExpectationTag::slope ? seg.slope(q) * w : seg.stiffness * w;
        };
        total += adaptive_simpson(f, a, b, tol);
    }
    return total;
}

double flux_quadrature(const MomentState& s, double q_barrier, double mass) {
    if (!(mass > 0.0)) throw DomainError("flux_quadrature: requires mass > 0");
    if (!(s.uncertainty_product() > 0.0))
        throw DomainError("flux_quadrature: requires positive covariance determinant");
    // W(q_b, .) is a scaled Gaussian in p centered at the conditional mean.
    const double cond_mean = s.mean_p + s.cov_pq / s.cov_qq * (q_barrier - s.mean_q);
    const double sp = std::sqrt(s.cov_pp);
    const double a = cond_mean - 14.0 * sp;
    const double b = cond_mean + 14.0 * sp;
    const auto f = [&](double p) { return p / mass * wigner_density(s, q_barrier, p); };
    const double m = 0.5 * (a + b);
    const double coarse =
        (b - a) / 6.0 * (std::abs(f(a)) + 4.0 * std::abs(f(m)) + std::abs(f(b)));
    return adaptive_simpson(f, a, b, 1e-12 * std::max(1.0, coarse));
}

double tail_quadrature(const MomentState& s, double q_barrier) {
    if (!(s.cov_qq > 0.0)) throw DomainError("tail_quadrature: requires cov_qq > 0");
    const double sd = std::sqrt(s.cov_qq);
    const double b = std::max(q_barrier, s.mean_q) + 14.0 * sd;
    if (q_barrier >= b) return 0.0;
    const auto f = [&](double q) { return normal_pdf(q, s.mean_q, s.cov_qq); };
    const double m = 0.5 * (q_barrier + b);
    const double coarse = (b - q_barrier) / 6.0 * (f(q_barrier) + 4.0 * f(m) + f(b));
    return adaptive_simpson(f, q_barrier, b, std::max(1e-16, 1e-13 * std::abs(coarse)));
}

MomentRates reference_rhs(const MomentState& s, const PiecewisePotential& v,
                          const LindbladParams& par, ClosureMode mode) {
    double force = 0.0, curv = 0.0;
    if (mode == ClosureMode::centroid) {
        const ParabolicSegment& seg = v.segments[segment_at(v, s.mean_q)];
        double h = 1e-2;
        if (std::isfinite(seg.lo) && std::isfinite(seg.hi))
            h = std::min(h, (seg.hi - seg.lo) / 16.0);
        // Expansion point nudged inward so the finite differences never span a
        // join; central differences of a quadratic are exact, so extrapolating
        // back to mean_q loses nothing.
        double qc = s.mean_q;
        if (std::isfinite(seg.hi)) qc = std::min(qc, seg.hi - 4.0 * h);
        if (std::isfinite(seg.lo)) qc = std::max(qc, seg.lo + 4.0 * h);
        const double vm = evaluate(v, qc - h);
        const double v0 = evaluate(v, qc);
        const double vp = evaluate(v, qc + h);
        curv = (vp - 2.0 * v0 + vm) / (h * h);
        force = (vp - vm) / (2.0 * h) + curv * (s.mean_q - qc);
    } else {
        force = quadrature_expectation(ExpectationTag::slope, v, s.mean_q, s.cov_qq);
        curv = quadrature_expectation(ExpectationTag::curvature, v, s.mean_q, s.cov_qq);
    }
    MomentRates r;
    r.mean_q = s.mean_p / par.mass - par.friction * s.mean_q;
    r.mean_p = -(force + par.friction * s.mean_p);
    r.cov_qq = 2.0 * (s.cov_pq / par.mass - par.friction * s.cov_qq + par.d_qq);
    r.cov_pp = 2.0 * (par.d_pp - par.friction * s.cov_pp - curv * s.cov_pq);
    r.cov_pq = s.cov_pp / par.mass - curv * s.cov_qq + 2.0 * (par.d_pq - par.friction * s.cov_pq);
    return r;
}

LangevinStats langevin_sample(const ParabolicSegment& seg, const LindbladParams& par,
                              const MomentState& s0, double dt, double t_end, std::size_t n,
                              std::uint64_t seed, double output_dt) {
    if (n < 1000) throw DomainError("langevin_sample: requires n >= 1000");
    if (!(dt > 0.0) || !(t_end > 0.0) || !(output_dt > 0.0))
        throw DomainError("langevin_sample: requires dt, t_end, output_dt > 0");
    par.validate();

    const long steps_per_out = std::lround(output_dt / dt);
    if (steps_per_out < 1 || std::abs(steps_per_out * dt - output_dt) > 1e-9 * output_dt)
        throw DomainError("langevin_sample: output_dt must be an integer multiple of dt");
    const long n_out = std::lround(std::floor(t_end / output_dt + 1e-9));
    if (n_out < 1) throw DomainError("langevin_sample: t_end shorter than output_dt");

    // Cholesky factor of the initial covariance.
    if (!(s0.cov_qq > 0.0) || !(s0.uncertainty_product() > 0.0))
        throw DegenerateCovariance("langevin_sample: initial covariance not positive definite");
    const double l11 = std::sqrt(s0.cov_qq);
    const double l21 = s0.cov_pq / l11;
    const double l22 = std::sqrt(s0.cov_pp - l21 * l21);

    const double lam = par.friction;
    const double inv_m = 1.0 / par.mass;
    const double amp_q = std::sqrt(2.0 * par.d_qq * dt);
    const double amp_p = std::sqrt(2.0 * par.d_pp * dt);
    double rho = 0.0;
    if (par.d_qq > 0.0 && par.d_pp > 0.0) rho = par.d_pq / std::sqrt(par.d_qq * par.d_pp);
    if (std::abs(rho) > 1.0)
        throw DomainError("langevin_sample: |D_pq| exceeds sqrt(D_qq*D_pp)");
    const double rho_perp = std::sqrt(1.0 - rho * rho);

    // Row 0 holds the statistics of the initial draw itself.
    const std::size_t total_out = static_cast<std::size_t>(n_out) + 1;
    std::vector<double> qs(total_out * n);
    std::vector<double> ps(total_out * n);

    for (std::size_t i = 0; i < n; ++i) {
        // Stable splitting: the trajectory stream depends only on (seed, i).
        Xoshiro256pp gen(seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(i + 1)));
        const GaussPair init = gauss_pair(gen);
        double q = s0.mean_q + l11 * init.z1;
        double p = s0.mean_p + l21 * init.z1 + l22 * init.z2;
        qs[i] = q;
        ps[i] = p;
        for (long out = 1; out <= n_out; ++out) {
            for (long k = 0; k < steps_per_out; ++k) {
                const GaussPair noise = gauss_pair(gen);
                const double qn =
                    q + (p * inv_m - lam * q) * dt + amp_q * noise.z1;
                const double pn = p - (seg.slope(q) + lam * p) * dt +
                                  amp_p * (rho * noise.z1 + rho_perp * noise.z2);
                q = qn;
                p = pn;
            }
            qs[static_cast<std::size_t>(out) * n + i] = q;
            ps[static_cast<std::size_t>(out) * n + i] = p;
        }
    }

    LangevinStats stats;
    stats.rows.resize(total_out);
    const double nf = static_cast<double>(n);
    for (std::size_t out = 0; out < total_out; ++out) {
        const double* q_row = qs.data() + out * n;
        const double* p_row = ps.data() + out * n;
        double mq = 0.0, mp = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            mq += q_row[i];
            mp += p_row[i];
        }
        mq /= nf;
        mp /= nf;
        double sqq = 0.0, spp = 0.0, spq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double dq = q_row[i] - mq;
            const double dp = p_row[i] - mp;
            sqq += dq * dq;
            spp += dp * dp;
            spq += dq * dp;
        }
        const double denom = nf - 1.0;
        LangevinRow& row = stats.rows[out];
        row.t = s0.t + static_cast<double>(out) * output_dt;
        row.mean_q = mq;
        row.mean_p = mp;
        row.cov_qq = sqq / denom;
        row.cov_pp = spp / denom;
        row.cov_pq = spq / denom;
        row.se_mean_q = std::sqrt(row.cov_qq / nf);
        row.se_mean_p = std::sqrt(row.cov_pp / nf);
        row.se_cov_qq = row.cov_qq * std::sqrt(2.0 / denom);
        row.se_cov_pp = row.cov_pp * std::sqrt(2.0 / denom);
        row.se_cov_pq = std::sqrt((row.cov_qq * row.cov_pp + row.cov_pq * row.cov_pq) / denom);
    }
    return stats;
}

}  // namespace lindblad
