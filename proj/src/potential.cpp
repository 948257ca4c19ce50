#include "lindblad/potential.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "lindblad/errors.hpp"

namespace lindblad {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt_g(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

// Continuity self-check at a join; construction guarantees this, so a failure
// here is a programming error, not bad user input.
void check_join(const ParabolicSegment& left, const ParabolicSegment& right, double q_join) {
    const double v_l = left.value(q_join);
    const double v_r = right.value(q_join);
    const double s_l = left.slope(q_join);
    const double s_r = right.slope(q_join);
    const double v_tol = 1e-10 * std::max(1.0, std::max(std::abs(v_l), std::abs(v_r)));
    const double s_tol = 1e-10 * std::max(1.0, std::max(std::abs(s_l), std::abs(s_r)));
    if (std::abs(v_l - v_r) > v_tol || std::abs(s_l - s_r) > s_tol)
        throw std::logic_error("piecewise potential: discontinuous join");
}

double normal_pdf_std(double z) {
    static const double inv_sqrt_2pi = 0.39894228040143267794;
    return inv_sqrt_2pi * std::exp(-0.5 * z * z);
}

double normal_cdf_std(double z) { return 0.5 * std::erfc(-z * 0.70710678118654752440); }

}  // namespace

PiecewisePotential build_two_parabola(double q_a, double q_b, double barrier_height,
                                      double barrier_stiffness, double v_a) {
    if (!(q_a < q_b)) throw DomainError("build_two_parabola: requires q_a < q_b");
    if (!(barrier_height > 0.0)) throw DomainError("build_two_parabola: requires B > 0");
    if (!(barrier_stiffness > 0.0)) throw DomainError("build_two_parabola: requires C_b > 0");
    const double d = q_b - q_a;
    const double denom = barrier_stiffness * d * d - 2.0 * barrier_height;
    if (!(denom > 0.0))
        throw DomainError(
            "build_two_parabola: C_b*(q_b-q_a)^2 <= 2B (barrier too wide/low for a smooth join)");

    const double well_stiffness = 2.0 * barrier_stiffness * barrier_height / denom;
    const double q_t =
        (q_a * well_stiffness + q_b * barrier_stiffness) / (well_stiffness + barrier_stiffness);

    PiecewisePotential v;
    v.segments = {
        {q_a, well_stiffness, v_a, -kInf, q_t},
        {q_b, -barrier_stiffness, v_a + barrier_height, q_t, kInf},
    };
    v.joins = {q_t};
    v.q_well_a = q_a;
    v.q_barrier = q_b;
    v.barrier_height = barrier_height;
    check_join(v.segments[0], v.segments[1], q_t);
    return v;
}

PiecewisePotential build_three_parabola(const PiecewisePotential& base, double q_c, double v_c) {
    if (base.segments.size() != 2)
        throw DomainError("build_three_parabola: base must have exactly 2 segments");
    const double q_b = base.q_barrier;
    if (!(q_c > q_b)) throw DomainError("build_three_parabola: requires q_c > q_b");
    const double barrier_stiffness = -base.segments[1].stiffness;
    const double v_top = base.segments[1].offset;  // V(q_b)
    const double drop = v_top - v_c;               // barrier top minus second-well bottom
    if (!(drop > 0.0)) throw DomainError("build_three_parabola: requires V(q_b) - V_c > 0");
    const double d = q_c - q_b;
    const double denom = barrier_stiffness * d * d - 2.0 * drop;
    if (!(denom > 0.0))
        throw DomainError(
            "build_three_parabola: C_b*(q_c-q_b)^2 <= 2*(V(q_b)-V_c) (no smooth join exists)");

    const double well_stiffness = 2.0 * barrier_stiffness * drop / denom;
    const double q_t2 =
        (q_c * well_stiffness + q_b * barrier_stiffness) / (well_stiffness + barrier_stiffness);

    PiecewisePotential v = base;
    v.segments[1].hi = q_t2;
    v.segments.push_back({q_c, well_stiffness, v_c, q_t2, kInf});
    v.joins.push_back(q_t2);
    v.q_well_c = q_c;
    check_join(v.segments[1], v.segments[2], q_t2);
    return v;
}

PiecewisePotential harmonic_well(double center, double stiffness, double offset) {
    if (stiffness < 0.0) throw DomainError("harmonic_well: stiffness must be >= 0");
    PiecewisePotential v;
    v.segments = {{center, stiffness, offset, -kInf, kInf}};
    v.q_well_a = center;
    v.q_barrier = kInf;
    v.barrier_height = 0.0;
    return v;
}

std::size_t segment_at(const PiecewisePotential& v, double q) {
    // Count joins strictly below q: at an exact join the left segment wins.
    return static_cast<std::size_t>(
        std::lower_bound(v.joins.begin(), v.joins.end(), q) - v.joins.begin());
}

double evaluate(const PiecewisePotential& v, double q) { return v.segments[segment_at(v, q)].value(q); }

double derivative(const PiecewisePotential& v, double q) {
    return v.segments[segment_at(v, q)].slope(q);
}

double curvature(const PiecewisePotential& v, double q) {
    return v.segments[segment_at(v, q)].stiffness;
}

ForceMoments gaussian_force_moments(const PiecewisePotential& v, double mean_q, double var_q) {
    if (!(var_q > 0.0)) throw DomainError("gaussian_force_moments: requires var_q > 0");
    const double sd = std::sqrt(var_q);

    // Per segment, with z = (q - mean)/sd:
    //   int_a^b V'' N dq      = C * (Phi(z_b) - Phi(z_a))
    //   int_a^b (q - mean) N dq = sd * (phi(z_a) - phi(z_b))
    // so int_a^b V' N dq = C * [ sd*(phi(z_a)-phi(z_b)) + (mean - center)*(Phi(z_b)-Phi(z_a)) ].
    ForceMoments out;
    for (const ParabolicSegment& seg : v.segments) {
        double pdf_lo = 0.0, cdf_lo = 0.0;
        double pdf_hi = 0.0, cdf_hi = 1.0;
        if (std::isfinite(seg.lo)) {
            const double z = (seg.lo - mean_q) / sd;
            pdf_lo = normal_pdf_std(z);
            cdf_lo = normal_cdf_std(z);
        }
        if (std::isfinite(seg.hi)) {
            const double z = (seg.hi - mean_q) / sd;
            pdf_hi = normal_pdf_std(z);
            cdf_hi = normal_cdf_std(z);
        }
        const double mass = cdf_hi - cdf_lo;
        out.mean_slope += seg.stiffness * (sd * (pdf_lo - pdf_hi) + (mean_q - seg.center) * mass);
        out.mean_curvature += seg.stiffness * mass;
    }
    return out;
}

std::string describe(const PiecewisePotential& v) {
    std::ostringstream os;
    os << "piecewise potential: " << v.segments.size() << " segment"
       << (v.segments.size() == 1 ? "" : "s") << "\n";
    for (std::size_t i = 0; i < v.segments.size(); ++i) {
        const ParabolicSegment& s = v.segments[i];
        os << "  segment " << i << ": kind=" << (s.stiffness < 0.0 ? "barrier" : "well")
           << " center=" << fmt_g(s.center) << " stiffness=" << fmt_g(s.stiffness)
           << " offset=" << fmt_g(s.offset) << " domain=[" << fmt_g(s.lo) << "," << fmt_g(s.hi)
           << "]\n";
    }
    os << "joins:";
    if (v.joins.empty()) os << " none";
    for (double j : v.joins) os << " " << fmt_g(j);
    os << "\n";
    os << "well_a=" << fmt_g(v.q_well_a) << " barrier_top=" << fmt_g(v.q_barrier)
       << " barrier_height=" << fmt_g(v.barrier_height);
    if (v.q_well_c) os << " well_c=" << fmt_g(*v.q_well_c);
    os << "\n";
    return os.str();
}

}  // namespace lindblad
