#include <doctest.h>

#include <cmath>
#include <random>

#include "lindblad/errors.hpp"
#include "lindblad/observables.hpp"
#include "lindblad/validation.hpp"
#include "scenarios.hpp"

using namespace lindblad;

namespace {

MomentState gaussian_state(double mq, double mp, double qq, double pp, double pq) {
    MomentState s;
    s.mean_q = mq;
    s.mean_p = mp;
    s.cov_qq = qq;
    s.cov_pp = pp;
    s.cov_pq = pq;
    return s;
}

constexpr double kTwoPi = 6.28318530717958647692;

}  // namespace

TEST_CASE("wigner density peak value and factorization") {
    const MomentState s = gaussian_state(10.0, 5.0, 0.5, 20.0, 0.0);
    const double det = s.uncertainty_product();
    CHECK(wigner_density(s, 10.0, 5.0) ==
          doctest::Approx(1.0 / (kTwoPi * std::sqrt(det))).epsilon(1e-14));

    // With cov_pq = 0 the density factorizes into two univariate normals.
    const double q = 10.7, p = 3.1;
    const double nq = std::exp(-0.5 * (q - 10.0) * (q - 10.0) / 0.5) / std::sqrt(kTwoPi * 0.5);
    const double np = std::exp(-0.5 * (p - 5.0) * (p - 5.0) / 20.0) / std::sqrt(kTwoPi * 20.0);
    CHECK(wigner_density(s, q, p) == doctest::Approx(nq * np).epsilon(1e-13));
}

TEST_CASE("wigner density normalizes over a 12-sigma grid") {
    const MomentState s = gaussian_state(10.0, 5.0, 0.5, 20.0, 1.5);
    const double sq = std::sqrt(s.cov_qq), sp = std::sqrt(s.cov_pp);
    const auto inner = [&](double q) {
        return adaptive_simpson([&](double p) { return wigner_density(s, q, p); },
                                s.mean_p - 12.0 * sp, s.mean_p + 12.0 * sp, 1e-13);
    };
    const double total =
        adaptive_simpson(inner, s.mean_q - 12.0 * sq, s.mean_q + 12.0 * sq, 1e-11);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("wigner marginal over p equals the tunneling-probability Gaussian") {
    const MomentState s = gaussian_state(10.0, 5.0, 0.5, 20.0, 1.5);
    const double sp = std::sqrt(s.cov_pp);
    for (double q : {9.0, 10.0, 11.3}) {
        const double marginal =
            adaptive_simpson([&](double p) { return wigner_density(s, q, p); },
                             s.mean_p - 14.0 * sp, s.mean_p + 14.0 * sp, 1e-13);
        const double expected = std::exp(-0.5 * (q - s.mean_q) * (q - s.mean_q) / s.cov_qq) /
                                std::sqrt(kTwoPi * s.cov_qq);
        CHECK(marginal == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("wigner density rejects a degenerate covariance") {
    MomentState s = gaussian_state(0.0, 0.0, 1.0, 1.0, 1.0);  // det = 0
    CHECK_THROWS_AS(wigner_density(s, 0.0, 0.0), DegenerateCovariance);
    s.cov_pq = 2.0;  // det < 0
    CHECK_THROWS_AS(wigner_density(s, 0.0, 0.0), DegenerateCovariance);
}

TEST_CASE("tunneling probability: half the mass sits past the top when centered there") {
    const MomentState s = gaussian_state(13.0, 0.0, 0.5, 20.0, 0.0);
    CHECK(tunneling_probability(s, 13.0) == 0.5);
}

TEST_CASE("tunneling probability: tail limits") {
    const double qq = 0.5;
    const double sd = std::sqrt(qq);
    const MomentState past = gaussian_state(13.0 + 10.0 * sd, 0.0, qq, 20.0, 0.0);
    CHECK(tunneling_probability(past, 13.0) == doctest::Approx(1.0).epsilon(1e-15));
    const MomentState before = gaussian_state(13.0 - 10.0 * sd, 0.0, qq, 20.0, 0.0);
    CHECK(tunneling_probability(before, 13.0) < 1e-20);
}

TEST_CASE("tunneling probability: symmetry and monotonicity") {
    std::mt19937_64 rng(9001);
    for (int i = 0; i < 50; ++i) {
        const double qq = testing_scenarios::uniform(rng, 0.05, 3.0);
        const double x = testing_scenarios::uniform(rng, 0.0, 5.0);
        const MomentState right = gaussian_state(13.0 + x, 0.0, qq, 20.0, 0.0);
        const MomentState left = gaussian_state(13.0 - x, 0.0, qq, 20.0, 0.0);
        CHECK(tunneling_probability(right, 13.0) + tunneling_probability(left, 13.0) ==
              doctest::Approx(1.0).epsilon(1e-14));
    }
    double prev = -1.0;
    for (double mq = 9.0; mq <= 17.0; mq += 0.25) {
        const double p = tunneling_probability(gaussian_state(mq, 0.0, 0.5, 20.0, 0.0), 13.0);
        CHECK(p > prev);
        prev = p;
    }
}

TEST_CASE("tunneling probability matches tail quadrature on randomized states") {
    std::mt19937_64 rng(9002);
    for (int i = 0; i < 100; ++i) {
        const double qq = testing_scenarios::uniform(rng, 0.05, 4.0);
        const double mq = testing_scenarios::uniform(rng, 9.0, 17.0);
        const double qb = testing_scenarios::uniform(rng, 11.0, 15.0);
        const MomentState s = gaussian_state(mq, 0.0, qq, 20.0, 0.0);
        const double p = tunneling_probability(s, qb);
        const double oracle = tail_quadrature(s, qb);
        CHECK(p == doctest::Approx(oracle).epsilon(1e-10).scale(std::max(1e-4, oracle)));
    }
}

TEST_CASE("decay rate: no flux means no decay") {
    const MomentState s = gaussian_state(11.0, 0.0, 0.5, 20.0, 0.0);
    CHECK(decay_rate(s, 13.0, 13.57) == 0.0);
}

TEST_CASE("decay rate vanishes once the packet has fully escaped") {
    double prev = decay_rate(gaussian_state(15.0, 10.0, 0.5, 20.0, 0.0), 13.0, 13.57);
    for (double mq : {18.0, 25.0, 40.0}) {
        const double rate = decay_rate(gaussian_state(mq, 10.0, 0.5, 20.0, 0.0), 13.0, 13.57);
        CHECK(rate < prev);
        prev = rate;
    }
    CHECK(prev < 1e-100);
}

TEST_CASE("decay rate equals flux quadrature over tunneling probability") {
    std::mt19937_64 rng(9003);
    for (int i = 0; i < 100; ++i) {
        const double qq = testing_scenarios::uniform(rng, 0.1, 2.0);
        const double pp = testing_scenarios::uniform(rng, 5.0, 50.0);
        const double max_pq = 0.9 * std::sqrt(qq * pp);
        const double pq = testing_scenarios::uniform(rng, -max_pq, max_pq);
        const double mq = testing_scenarios::uniform(rng, 11.0, 15.0);
        const double mp = testing_scenarios::uniform(rng, -20.0, 40.0);
        const MomentState s = gaussian_state(mq, mp, qq, pp, pq);
        const double mass = 13.57;
        const double rate = decay_rate(s, 13.0, mass);
        const double oracle = flux_quadrature(s, 13.0, mass) / tunneling_probability(s, 13.0);
        CHECK(rate == doctest::Approx(oracle).epsilon(1e-8).scale(std::max(1.0, std::abs(oracle))));
    }
}

TEST_CASE("decay rate: mass-normalized form is invariant under momentum rescaling") {
    const MomentState base = gaussian_state(11.5, 12.0, 0.5, 30.0, 1.0);
    const double mass = 13.57;
    const double r0 = decay_rate(base, 13.0, mass);
    for (double c : {2.0, 10.0}) {
        MomentState scaled = base;
        scaled.mean_p = c * base.mean_p;
        scaled.cov_pq = c * base.cov_pq;
        scaled.cov_pp = c * c * base.cov_pp;  // keeps the covariance admissible
        const double r = decay_rate(scaled, 13.0, c * mass);
        CHECK(r == doctest::Approx(r0).epsilon(1e-13));
    }
}

TEST_CASE("decay rate: historical closed form is mass/2 times the flux ratio") {
    const MomentState s = gaussian_state(11.5, 12.0, 0.5, 30.0, 1.0);
    const double mass = 13.57;
    const double normalized = decay_rate(s, 13.0, mass, true);
    const double verbatim = decay_rate(s, 13.0, mass, false);
    CHECK(verbatim == doctest::Approx(normalized * mass / 2.0).epsilon(1e-14));
}

TEST_CASE("decay rate: asymptotic branch joins the direct branch") {
    // At z in [20, 26] both the direct ratio exp(-z^2)/erfc(z) and the
    // implementation's asymptotic series are computable; they must agree.
    const double qq = 0.5;
    const double sd2 = std::sqrt(2.0 * qq);
    for (double z : {20.0, 22.0, 25.0}) {
        const MomentState s = gaussian_state(13.0 - z * sd2, 10.0, qq, 30.0, 0.5);
        const double direct_ratio = std::exp(-z * z) / std::erfc(z);
        const double flux_num = s.cov_qq * s.mean_p + s.cov_pq * (13.0 - s.mean_q);
        const double norm = std::sqrt(kTwoPi * s.cov_qq * s.cov_qq * s.cov_qq);
        const double expected = 2.0 * flux_num * direct_ratio / (norm * 13.57);
        CHECK(decay_rate(s, 13.0, 13.57) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("decay rate: underflowing probability raises RateUndefined") {
    const double qq = 0.5;
    const double sd2 = std::sqrt(2.0 * qq);
    const MomentState s = gaussian_state(13.0 - 28.0 * sd2, 10.0, qq, 30.0, 0.0);
    CHECK_THROWS_AS(decay_rate(s, 13.0, 13.57), RateUndefined);
}
