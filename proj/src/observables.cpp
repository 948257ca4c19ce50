#include "lindblad/observables.hpp"

#include <cmath>

#include "lindblad/errors.hpp"

namespace lindblad {

namespace {

constexpr double kTwoPi = 6.28318530717958647692;
constexpr double kSqrtPi = 1.77245385090551602730;
constexpr double kProbFloor = 1e-300;

// exp(-z^2)/erfc(z), stable over the whole admissible range. For large z the
// direct ratio walks into the denormal range; switch to the asymptotic
// expansion erfc(z) ~ exp(-z^2)/(z sqrt(pi)) * sum_k (-1)^k (2k-1)!!/(2z^2)^k.
double exp_over_erfc(double z) {
    if (z < 20.0) return std::exp(-z * z) / std::erfc(z);
    const double inv2z2 = 1.0 / (2.0 * z * z);
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k <= 9; ++k) {
        term *= -static_cast<double>(2 * k - 1) * inv2z2;
        sum += term;
    }
    return z * kSqrtPi / sum;
}

}  // namespace

double wigner_density(const MomentState& s, double q, double p) {
    const double det = s.uncertainty_product();
    if (!(det > 0.0)) throw DegenerateCovariance("wigner_density: covariance determinant <= 0");
    const double dq = q - s.mean_q;
    const double dp = p - s.mean_p;
    const double quad = (s.cov_pp * dq * dq - 2.0 * s.cov_pq * dq * dp + s.cov_qq * dp * dp) / det;
    return std::exp(-0.5 * quad) / (kTwoPi * std::sqrt(det));
}

double tunneling_probability(const MomentState& s, double q_barrier) {
    if (!(s.cov_qq > 0.0)) throw DomainError("tunneling_probability: requires cov_qq > 0");
    return 0.5 * std::erfc((q_barrier - s.mean_q) / std::sqrt(2.0 * s.cov_qq));
}

double decay_rate(const MomentState& s, double q_barrier, double mass, bool normalize_by_mass) {
    if (!(s.cov_qq > 0.0)) throw DomainError("decay_rate: requires cov_qq > 0");
    if (!(mass > 0.0)) throw DomainError("decay_rate: requires mass > 0");
    const double z = (q_barrier - s.mean_q) / std::sqrt(2.0 * s.cov_qq);
    if (0.5 * std::erfc(z) < kProbFloor)
        throw RateUndefined("decay_rate: tunneling probability underflows");

    const double flux_num = s.cov_qq * s.mean_p + s.cov_pq * (q_barrier - s.mean_q);
    const double norm = std::sqrt(kTwoPi * s.cov_qq * s.cov_qq * s.cov_qq);
    const double ratio = exp_over_erfc(z);  // exp(-z^2)/erfc(z)
    if (normalize_by_mass) return 2.0 * flux_num * ratio / (norm * mass);
    return flux_num * ratio / norm;
}

}  // namespace lindblad
