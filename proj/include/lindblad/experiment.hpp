// experiment.hpp — Scenario assembly, friction sweeps, trajectory
// classification, asymptotic tunneling probabilities, and the critical
// friction search.

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lindblad/dynamics.hpp"
#include "lindblad/potential.hpp"

namespace lindblad {

struct SweepSpec {
    double lambda_lo = 0.0;
    double lambda_hi = 0.0;
    int count = 0;
};

struct BracketSpec {
    double lambda_lo = 0.0;
    double lambda_hi = 0.0;
    double tol = 1e-4;
};

// Full experiment description. Potential preconditions are checked when the
// potential is built; asymptote defaults are window 20 T, tolerance 1e-4.
struct ScenarioConfig {
    // [potential]
    double q_a = 0.0;
    double q_b = 0.0;
    double barrier_height = 0.0;     // B, MeV
    double barrier_stiffness = 0.0;  // C_b, MeV/fm^2
    double v_a = 0.0;
    std::optional<double> q_c;
    std::optional<double> v_c;  // defaults to v_a when q_c is set

    // [dynamics]
    double mass = 13.57;  // MeV*T^2/fm^2
    double friction = 0.0;
    ClosureMode mode = ClosureMode::centroid;
    IntegrationControls controls;
    double asym_window = 20.0;  // T
    double asym_tol = 1e-4;

    // [initial]
    double momentum_mev_c = 0.0;  // sigma_p(0), quoted in MeV/c

    // [sweep]
    std::optional<SweepSpec> sweep;
    std::optional<BracketSpec> bracket;

    // [output]
    std::string out_dir = ".";

    PiecewisePotential make_potential() const;
    bool three_segments() const { return q_c.has_value(); }
};

struct DiffusionTriple {
    double d_qq = 0.0;
    double d_pp = 0.0;
    double d_pq = 0.0;
};

// Rotating-wave (zero-temperature) diffusion coefficients:
//   D_qq = lambda*hbar / (2 sqrt(m * well_stiffness)),  D_pp = m*well_stiffness*D_qq,
//   D_pq = 0;  they saturate D_qq*D_pp - D_pq^2 = (lambda*hbar/2)^2 exactly.
DiffusionTriple rwa_diffusion(double lambda, double mass, double well_stiffness,
                              double hbar = units::hbar);

LindbladParams make_params(const ScenarioConfig& cfg, double lambda);

// Stationary-width initial state: mean at q_a, momentum from the config,
// cov_pq = 0, cov_qq = D_qq/lambda (or its lambda-independent rotating-wave
// limit hbar/(2 sqrt(m*well_stiffness)) at lambda = 0), cov_pp = hbar^2/(4 cov_qq).
MomentState initial_state(const ScenarioConfig& cfg, double lambda, const DiffusionTriple& d);

enum class Classification { escaped, trapped, settled_right, oscillating };

std::string to_string(Classification c);

struct Trajectory {
    TimeSeries series;
    std::vector<double> prob;  // tunneling probability per recorded state
    std::vector<double> rate;  // decay rate per recorded state (NaN if undefined)
    Classification classification = Classification::oscillating;
    double lambda = 0.0;
};

// Integrate the configured scenario at the given friction and attach
// observables and a classification:
//   escaped       — two segments, ends past the barrier top still moving out
//   trapped       — damped back into (or never out of) the first well
//   settled_right — three segments, ends right of the barrier top (lambda > 0)
//   oscillating   — lambda = 0 without escape (undamped motion persists)
Trajectory run_scenario(const ScenarioConfig& cfg, double lambda);

struct AsymptoteResult {
    std::optional<double> p_inf;
    std::optional<double> t90;  // first time P is within 10% of the gap to p_inf
};

// Declare an asymptote when max-min of P over the trailing window is <= tol.
AsymptoteResult asymptote(const std::vector<double>& times, const std::vector<double>& prob,
                          double window, double tol);
AsymptoteResult asymptote(const Trajectory& tr, double window = 20.0, double tol = 1e-4);

struct CriticalResult {
    double lambda_cr = 0.0;
    double bracket_lo = 0.0;  // final bracket
    double bracket_hi = 0.0;
    bool monotone_ok = true;  // five interior probes agree with a single threshold
};

// Bisect the trajectory classification (barrier crossed vs trapped) to
// |hi - lo| <= tol. Throws BracketError when both endpoints classify the same.
CriticalResult critical_lambda(const ScenarioConfig& cfg, double lambda_lo, double lambda_hi,
                               double tol = 1e-4);

struct SweepEntry {
    double lambda = 0.0;
    std::optional<double> p_inf;
    std::optional<double> t90;
    Classification classification = Classification::oscillating;
    std::optional<std::string> error;
};

struct SweepResult {
    std::vector<SweepEntry> entries;  // ordered by lambda, strictly increasing
};

// Run one scenario per lambda; entries are independent, failures are recorded
// per entry and the sweep continues. threads caps the worker count.
SweepResult friction_sweep(const ScenarioConfig& cfg, const std::vector<double>& lambdas,
                           int threads = 1);

}  // namespace lindblad
