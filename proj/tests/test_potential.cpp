#include <doctest.h>

#include <cmath>
#include <random>

#include "lindblad/errors.hpp"
#include "lindblad/potential.hpp"
#include "lindblad/validation.hpp"
#include "scenarios.hpp"

using namespace lindblad;

TEST_CASE("two-parabola join: symmetric case gives equal stiffness and midpoint join") {
    // B = C_b*(q_b-q_a)^2/4 forces well stiffness == C_b and q_t at the midpoint.
    const double q_a = 10.0, q_b = 13.0, c_b = 5.0;
    const double height = c_b * (q_b - q_a) * (q_b - q_a) / 4.0;
    const PiecewisePotential v = build_two_parabola(q_a, q_b, height, c_b);
    CHECK(v.segments[0].stiffness == doctest::Approx(c_b).epsilon(1e-12));
    CHECK(v.joins[0] == doctest::Approx(0.5 * (q_a + q_b)).epsilon(1e-12));
}

TEST_CASE("two-parabola join: hand-evaluated reference values") {
    // q_a=10, q_b=13, B=10, C_b=5: well stiffness 2*5*10/(5*9-20) = 4 exactly,
    // join at (10*4+13*5)/9 = 105/9.
    const PiecewisePotential v = build_two_parabola(10.0, 13.0, 10.0, 5.0);
    CHECK(v.segments[0].stiffness == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(v.joins[0] == doctest::Approx(105.0 / 9.0).epsilon(1e-14));

    // Continuity of V and V' at the join.
    const double q_t = v.joins[0];
    CHECK(v.segments[0].value(q_t) == doctest::Approx(v.segments[1].value(q_t)).epsilon(1e-12));
    CHECK(v.segments[0].slope(q_t) == doctest::Approx(v.segments[1].slope(q_t)).epsilon(1e-12));
}

TEST_CASE("two-parabola join: impossible geometry is rejected") {
    // 5*9 = 45 < 50 = 2B: the denominator of the well-stiffness formula is
    // non-positive.
    CHECK_THROWS_AS(build_two_parabola(10.0, 13.0, 25.0, 5.0), DomainError);
    CHECK_THROWS_AS(build_two_parabola(13.0, 10.0, 10.0, 5.0), DomainError);
    CHECK_THROWS_AS(build_two_parabola(10.0, 13.0, -1.0, 5.0), DomainError);
    CHECK_THROWS_AS(build_two_parabola(10.0, 13.0, 10.0, 0.0), DomainError);
    // Boundary case: equality is still rejected.
    CHECK_THROWS_AS(build_two_parabola(10.0, 13.0, 22.5, 5.0), DomainError);
}

TEST_CASE("three-parabola join: hand-evaluated reference values") {
    // Base as above, q_c=16.5, V_c=0: drop = 10, second-well stiffness
    // 100/41.25 = 80/33, join at 105/(80/33+5) = 99/7.
    const PiecewisePotential base = build_two_parabola(10.0, 13.0, 10.0, 5.0);
    const PiecewisePotential v = build_three_parabola(base, 16.5, 0.0);
    CHECK(v.segments.size() == 3);
    CHECK(v.segments[2].stiffness == doctest::Approx(80.0 / 33.0).epsilon(1e-14));
    CHECK(v.joins[1] == doctest::Approx(99.0 / 7.0).epsilon(1e-14));
    CHECK(v.q_well_c.has_value());
    // q_b < q_t2 < q_c
    CHECK(v.joins[1] > v.q_barrier);
    CHECK(v.joins[1] < *v.q_well_c);
}

TEST_CASE("three-parabola join: mirror symmetry") {
    // q_c - q_b == q_b - q_a with equal well bottoms mirrors the left join.
    const PiecewisePotential base = build_two_parabola(10.0, 13.0, 10.0, 5.0, 1.5);
    const PiecewisePotential v = build_three_parabola(base, 16.0, 1.5);
    CHECK(v.segments[2].stiffness == doctest::Approx(v.segments[0].stiffness).epsilon(1e-12));
    CHECK(v.joins[1] - v.q_barrier == doctest::Approx(v.q_barrier - v.joins[0]).epsilon(1e-12));
}

TEST_CASE("three-parabola join: degenerate denominator is rejected") {
    const PiecewisePotential base = build_two_parabola(10.0, 13.0, 10.0, 5.0);
    // C_b*(q_c-q_b)^2 == 2*drop exactly: q_c = 13 + 2 with drop = 10, C_b = 5.
    CHECK_THROWS_AS(build_three_parabola(base, 15.0, 0.0), DomainError);
    CHECK_THROWS_AS(build_three_parabola(base, 12.0, 0.0), DomainError);
    CHECK_THROWS_AS(build_three_parabola(base, 16.5, 12.0), DomainError);
}

TEST_CASE("randomized joins stay continuous and book energy exactly") {
    std::mt19937_64 rng(7001);
    int three_count = 0;
    for (int iter = 0; iter < 1000; ++iter) {
        const double q_a = testing_scenarios::uniform(rng, -5.0, 15.0);
        const double q_b = q_a + testing_scenarios::uniform(rng, 0.5, 4.0);
        const double c_b = testing_scenarios::uniform(rng, 0.5, 6.0);
        const double max_b = 0.5 * c_b * (q_b - q_a) * (q_b - q_a);
        const double height = testing_scenarios::uniform(rng, 0.05, 0.9) * max_b;
        const double v_a = testing_scenarios::uniform(rng, -5.0, 5.0);
        PiecewisePotential v = build_two_parabola(q_a, q_b, height, c_b, v_a);

        if (iter % 2 == 0) {
            const double drop = testing_scenarios::uniform(rng, 0.2, 1.2) * height;
            const double min_d = std::sqrt(2.0 * drop / c_b);
            const double q_c = q_b + min_d * testing_scenarios::uniform(rng, 1.05, 2.0);
            v = build_three_parabola(v, q_c, v_a + height - drop);
            ++three_count;
        }

        const double eps = 1e-8;
        for (double q_t : v.joins) {
            CHECK(std::abs(evaluate(v, q_t - eps) - evaluate(v, q_t + eps)) < 1e-6);
            CHECK(std::abs(derivative(v, q_t - eps) - derivative(v, q_t + eps)) < 1e-6);
        }

        // Energy bookkeeping across the first join: the well and barrier
        // pieces split the height exactly.
        const double q_t = v.joins[0];
        const double lhs = 0.5 * v.segments[0].stiffness * (q_t - q_a) * (q_t - q_a) +
                           0.5 * c_b * (q_b - q_t) * (q_b - q_t);
        CHECK(lhs == doctest::Approx(height).epsilon(1e-10));
    }
    CHECK(three_count == 500);
}

TEST_CASE("segment lookup: the left segment wins at a join") {
    const PiecewisePotential v = build_two_parabola(10.0, 13.0, 10.0, 5.0);
    const double q_t = v.joins[0];
    CHECK(segment_at(v, q_t) == 0);
    CHECK(segment_at(v, std::nextafter(q_t, 100.0)) == 1);
    CHECK(segment_at(v, q_t - 1.0) == 0);
    CHECK(segment_at(v, q_t + 1.0) == 1);

    // Value and slope agree at the join by construction; curvature jumps.
    CHECK(curvature(v, q_t) == doctest::Approx(v.segments[0].stiffness));
    CHECK(curvature(v, std::nextafter(q_t, 100.0)) == doctest::Approx(-5.0));
}

TEST_CASE("potential evaluation at the anchor points") {
    const PiecewisePotential v = build_two_parabola(10.0, 13.0, 10.0, 5.0, 2.0);
    CHECK(evaluate(v, 10.0) == doctest::Approx(2.0));
    CHECK(derivative(v, 10.0) == doctest::Approx(0.0));
    CHECK(evaluate(v, 13.0) == doctest::Approx(12.0));
    CHECK(derivative(v, 13.0) == doctest::Approx(0.0));
}

TEST_CASE("gaussian force moments: single harmonic segment is exact") {
    const PiecewisePotential v = harmonic_well(3.0, 2.5, 1.0);
    for (double var : {1e-3, 0.5, 4.0}) {
        const ForceMoments fm = gaussian_force_moments(v, 5.0, var);
        CHECK(fm.mean_slope == doctest::Approx(2.5 * (5.0 - 3.0)).epsilon(1e-14));
        CHECK(fm.mean_curvature == doctest::Approx(2.5).epsilon(1e-14));
    }
}

TEST_CASE("gaussian force moments: delta-function limit") {
    const PiecewisePotential v = build_two_parabola(10.0, 13.0, 10.0, 5.0);
    const double q = 11.0;
    const ForceMoments fm = gaussian_force_moments(v, q, 1e-14);
    CHECK(fm.mean_slope == doctest::Approx(derivative(v, q)).epsilon(1e-10));
    CHECK(fm.mean_curvature == doctest::Approx(curvature(v, q)).epsilon(1e-10));
}

TEST_CASE("gaussian force moments: rejects non-positive variance") {
    const PiecewisePotential v = harmonic_well(0.0, 1.0);
    CHECK_THROWS_AS(gaussian_force_moments(v, 0.0, 0.0), DomainError);
    CHECK_THROWS_AS(gaussian_force_moments(v, 0.0, -1.0), DomainError);
}

TEST_CASE("gaussian force moments match quadrature on randomized cases") {
    std::mt19937_64 rng(7002);
    for (int iter = 0; iter < 100; ++iter) {
        const double q_a = testing_scenarios::uniform(rng, 0.0, 12.0);
        const double q_b = q_a + testing_scenarios::uniform(rng, 1.0, 6.0);
        const double c_b = testing_scenarios::uniform(rng, 1.0, 10.0);
        const double height =
            testing_scenarios::uniform(rng, 0.1, 0.9) * 0.5 * c_b * (q_b - q_a) * (q_b - q_a);
        PiecewisePotential v = build_two_parabola(q_a, q_b, height, c_b);
        if (iter % 3 == 0) {
            const double min_d = std::sqrt(2.0 * height / c_b);
            v = build_three_parabola(v, q_b + 1.2 * min_d, 0.0);
        }
        const double mean_q = testing_scenarios::uniform(rng, q_a - 2.0, q_b + 2.0);
        const double var_q = testing_scenarios::uniform(rng, 0.05, 3.0);

        const ForceMoments fm = gaussian_force_moments(v, mean_q, var_q);
        const double slope_q = quadrature_expectation(ExpectationTag::slope, v, mean_q, var_q);
        const double curv_q = quadrature_expectation(ExpectationTag::curvature, v, mean_q, var_q);
        CHECK(fm.mean_slope ==
              doctest::Approx(slope_q).epsilon(1e-9).scale(std::max(1.0, std::abs(slope_q))));
        CHECK(fm.mean_curvature ==
              doctest::Approx(curv_q).epsilon(1e-9).scale(std::max(1.0, std::abs(curv_q))));
    }
}

TEST_CASE("Stein identity: E[V'(q)(q-mean)] equals var * E[V'']") {
    std::mt19937_64 rng(7003);
    const PiecewisePotential v = build_two_parabola(10.0, 13.0, 10.0, 5.0);
    for (int iter = 0; iter < 40; ++iter) {
        const double mean_q = testing_scenarios::uniform(rng, 9.0, 14.0);
        const double var_q = testing_scenarios::uniform(rng, 0.1, 2.0);
        const double sd = std::sqrt(var_q);
        // Quadrature of V'(q)(q-mean) N(q) dq, split at the join.
        double lhs = 0.0;
        for (const ParabolicSegment& seg : v.segments) {
            const double a = std::max(seg.lo, mean_q - 12.0 * sd);
            const double b = std::min(seg.hi, mean_q + 12.0 * sd);
            if (!(a < b)) continue;
            lhs += adaptive_simpson(
                [&](double q) {
                    const double w = std::exp(-0.5 * (q - mean_q) * (q - mean_q) / var_q) /
                                     std::sqrt(2.0 * 3.14159265358979323846 * var_q);
                    return seg.slope(q) * (q - mean_q) * w;
                },
                a, b, 1e-13);
        }
        const ForceMoments fm = gaussian_force_moments(v, mean_q, var_q);
        const double rhs_val = var_q * fm.mean_curvature;
        CHECK(lhs == doctest::Approx(rhs_val).epsilon(1e-9).scale(std::max(1.0, std::abs(rhs_val))));
    }
}

TEST_CASE("describe summarizes the construction") {
    const PiecewisePotential v = build_two_parabola(10.0, 13.0, 10.0, 5.0);
    const std::string text = describe(v);
    CHECK(text.find("2 segments") != std::string::npos);
    CHECK(text.find("kind=well") != std::string::npos);
    CHECK(text.find("kind=barrier") != std::string::npos);
    CHECK(text.find("barrier_height=10") != std::string::npos);
}
