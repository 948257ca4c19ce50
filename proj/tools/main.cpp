// lindblad-tunnel — simulate dissipative tunneling scenarios, sweep the
// friction constant, locate the critical friction, reproduce the standard
// figure layouts, and run the validation oracle suite.

#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lindblad/config.hpp"
#include "lindblad/errors.hpp"
#include "lindblad/io.hpp"
#include "lindblad/observables.hpp"
#include "lindblad/propagator.hpp"
#include "lindblad/validation.hpp"

namespace {

using namespace lindblad;

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

std::string resolve_out_dir(const ScenarioConfig& cfg, const std::string& cli_override) {
    if (const char* env = std::getenv("LINDBLAD_TUNNEL_OUT"); env && *env) return env;
    if (!cli_override.empty()) return cli_override;
    return cfg.out_dir;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory: " + dir);
}

std::string join_path(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

void warn_if_constraint_violated(const ScenarioConfig& cfg, double lambda) {
    const LindbladParams par = make_params(cfg, lambda);
    if (!par.lindblad_constraint_ok())
        std::cerr << "warning: D_qq*D_pp - D_pq^2 < (lambda*hbar/2)^2 at lambda=" << lambda
                  << "\n";
}

std::string lambda_tag(double lambda) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", lambda);
    return buf;
}

int cmd_simulate(const ScenarioConfig& cfg, const std::string& out_dir) {
    ensure_dir(out_dir);
    warn_if_constraint_violated(cfg, cfg.friction);
    const Trajectory tr = run_scenario(cfg, cfg.friction);
    const AsymptoteResult as = asymptote(tr, cfg.asym_window, cfg.asym_tol);

    write_file(join_path(out_dir, "trajectory.csv"), trajectory_csv(tr));
    write_file(join_path(out_dir, "effective-config.ini"), effective_config(cfg));
    write_file(join_path(out_dir, "potential.txt"), describe(cfg.make_potential()));

    nlohmann::json j;
    j["lambda"] = tr.lambda;
    j["classification"] = to_string(tr.classification);
    j["p_end"] = tr.prob.back();
    j["p_inf"] = as.p_inf ? nlohmann::json(*as.p_inf) : nlohmann::json(nullptr);
    j["t90"] = as.t90 ? nlohmann::json(*as.t90) : nlohmann::json(nullptr);
    write_file(join_path(out_dir, "summary.json"), j.dump(2) + "\n");

    std::cout << "classification: " << to_string(tr.classification)
              << "  P(t_end): " << format_full(tr.prob.back()) << "\n";
    return 0;
}

int cmd_sweep(const ScenarioConfig& cfg, const std::string& out_dir, int threads) {
    if (!cfg.sweep) throw ValidationError("sweep: config has no [sweep] lambda grid");
    ensure_dir(out_dir);
    std::vector<double> lambdas;
    lambdas.reserve(static_cast<std::size_t>(cfg.sweep->count));
    for (int i = 0; i < cfg.sweep->count; ++i)
        lambdas.push_back(cfg.sweep->lambda_lo + (cfg.sweep->lambda_hi - cfg.sweep->lambda_lo) *
                                                     static_cast<double>(i) /
                                                     static_cast<double>(cfg.sweep->count - 1));
    const SweepResult sweep = friction_sweep(cfg, lambdas, threads);
    write_file(join_path(out_dir, "sweep.csv"), sweep_csv(sweep));
    write_file(join_path(out_dir, "sweep.json"), sweep_json(sweep));
    write_file(join_path(out_dir, "effective-config.ini"), effective_config(cfg));
    for (const SweepEntry& e : sweep.entries)
        std::cout << "lambda=" << lambda_tag(e.lambda) << "  " << to_string(e.classification)
                  << (e.error ? "  error: " + *e.error : std::string()) << "\n";
    return 0;
}

int cmd_critical(ScenarioConfig cfg, const std::string& out_dir, double lo_opt, double hi_opt,
                 double tol_opt) {
    ensure_dir(out_dir);
    BracketSpec br = cfg.bracket.value_or(BracketSpec{0.0, 2.0, 1e-4});
    if (lo_opt >= 0.0) br.lambda_lo = lo_opt;
    if (hi_opt >= 0.0) br.lambda_hi = hi_opt;
    if (tol_opt > 0.0) br.tol = tol_opt;
    const CriticalResult res = critical_lambda(cfg, br.lambda_lo, br.lambda_hi, br.tol);

    nlohmann::json j;
    j["lambda_cr"] = res.lambda_cr;
    j["bracket_lo"] = res.bracket_lo;
    j["bracket_hi"] = res.bracket_hi;
    j["tol"] = br.tol;
    j["monotone_ok"] = res.monotone_ok;
    write_file(join_path(out_dir, "critical.json"), j.dump(2) + "\n");
    write_file(join_path(out_dir, "effective-config.ini"), effective_config(cfg));
    if (!res.monotone_ok)
        std::cerr << "warning: classification is not monotone across the bracket\n";
    std::cout << "lambda_cr = " << format_full(res.lambda_cr) << "\n";
    return 0;
}

// One CSV per curve, following the standard figure layouts: means (fig 2),
// covariances (fig 3), tunneling probability (fig 4) for the two-parabola
// case; means (fig 6) and probability (fig 7) across q_c choices for the
// three-parabola case.
int cmd_figures(const ScenarioConfig& cfg, const std::string& out_dir, int which, int threads) {
    ensure_dir(out_dir);
    (void)threads;

    ScenarioConfig two = cfg;
    two.q_c.reset();
    two.v_c.reset();

    const BracketSpec br = cfg.bracket.value_or(BracketSpec{0.0, 2.0, 1e-4});
    const double lambda_cr = critical_lambda(two, br.lambda_lo, br.lambda_hi, br.tol).lambda_cr;
    std::cout << "two-parabola lambda_cr = " << format_full(lambda_cr) << "\n";

    if (which == 2 || which == 3 || which == 4) {
        const std::vector<double> factors{0.0, 0.25, 0.75, 1.25};
        for (double f : factors) {
            const double lam = f * lambda_cr;
            const Trajectory tr = run_scenario(two, lam);
            const std::string tag = lambda_tag(lam);
            if (which == 2)
                write_file(join_path(out_dir, "fig2_lambda_" + tag + ".csv"), means_csv(tr));
            else if (which == 3)
                write_file(join_path(out_dir, "fig3_lambda_" + tag + ".csv"), covariances_csv(tr));
            else
                write_file(join_path(out_dir, "fig4_lambda_" + tag + ".csv"), probability_csv(tr));
        }
        write_file(join_path(out_dir, "effective-config.ini"), effective_config(two));
        return 0;
    }

    if (which == 6 || which == 7) {
        const std::vector<double> qc_choices{16.5, 18.0, 20.0, 22.0};
        const std::vector<double> factors{0.0, 0.25, 0.75};
        for (int variant = 0; variant < 2; ++variant) {
            for (double qc : qc_choices) {
                ScenarioConfig three = cfg;
                three.q_c = qc;
                three.v_c = (variant == 0) ? cfg.v_a : 0.0;
                validate_config(three);
                for (double f : factors) {
                    const double lam = f * lambda_cr;
                    const Trajectory tr = run_scenario(three, lam);
                    const std::string name = std::string("fig") + std::to_string(which) +
                                             (variant == 0 ? "a" : "b") + "_qc" + lambda_tag(qc) +
                                             "_lambda_" + lambda_tag(lam) + ".csv";
                    write_file(join_path(out_dir, name),
                               which == 6 ? means_csv(tr) : probability_csv(tr));
                }
            }
        }
        write_file(join_path(out_dir, "effective-config.ini"), effective_config(cfg));
        return 0;
    }

    throw ValidationError("figures: --which must be one of 2, 3, 4, 6, 7");
}

struct OracleCheck {
    std::string name;
    double measured = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

// The oracle suite exercised by `validate`: closed forms against quadrature,
// the exact propagator against the integrator, and the Langevin ensemble
// against the moment ODEs.
std::vector<OracleCheck> run_oracle_suite(std::size_t langevin_n) {
    std::vector<OracleCheck> checks;
    const PiecewisePotential two = build_two_parabola(10.0, 13.0, 10.0, 5.0, 0.0);

    {
        OracleCheck c{"gaussian_force_moments vs quadrature", 0.0, 1e-9, false};
        std::uint64_t rng_state = 12345;
        const auto next_uniform = [&rng_state]() {
            rng_state = rng_state * 6364136223846793005ull + 1442695040888963407ull;
            return static_cast<double>(rng_state >> 11) * 0x1.0p-53;
        };
        for (int i = 0; i < 100; ++i) {
            const double mean_q = 8.0 + 8.0 * next_uniform();
            const double var_q = 0.1 + 2.0 * next_uniform();
            const ForceMoments fm = gaussian_force_moments(two, mean_q, var_q);
            const double slope_q =
                quadrature_expectation(ExpectationTag::slope, two, mean_q, var_q);
            const double curv_q =
                quadrature_expectation(ExpectationTag::curvature, two, mean_q, var_q);
            const double scale = std::max({1.0, std::abs(slope_q), std::abs(curv_q)});
            c.measured = std::max(c.measured, std::abs(fm.mean_slope - slope_q) / scale);
            c.measured = std::max(c.measured, std::abs(fm.mean_curvature - curv_q) / scale);
        }
        c.pass = c.measured <= c.tolerance;
        checks.push_back(c);
    }

    {
        OracleCheck c{"tunneling_probability vs tail quadrature", 0.0, 1e-10, false};
        MomentState s;
        for (int i = 0; i < 25; ++i) {
            s.mean_q = 10.0 + 0.25 * i;
            s.cov_qq = 0.3 + 0.05 * i;
            s.cov_pp = 25.0;
            const double p = tunneling_probability(s, 13.0);
            const double qd = tail_quadrature(s, 13.0);
            c.measured = std::max(c.measured, std::abs(p - qd) / std::max(1e-6, qd));
        }
        c.pass = c.measured <= c.tolerance;
        checks.push_back(c);
    }

    {
        OracleCheck c{"decay_rate vs flux/probability", 0.0, 1e-8, false};
        MomentState s;
        for (int i = 0; i < 25; ++i) {
            s.mean_q = 11.0 + 0.15 * i;
            s.mean_p = 10.0 + i;
            s.cov_qq = 0.4 + 0.04 * i;
            s.cov_pp = 30.0 + i;
            s.cov_pq = 0.2 * (i % 5);
            const double mass = 13.57;
            const double rate = decay_rate(s, 13.0, mass);
            const double oracle =
                flux_quadrature(s, 13.0, mass) / tunneling_probability(s, 13.0);
            c.measured = std::max(c.measured, std::abs(rate - oracle) / std::abs(oracle));
        }
        c.pass = c.measured <= c.tolerance;
        checks.push_back(c);
    }

    {
        OracleCheck c{"rk4 vs exact segment propagator", 0.0, 1e-8, false};
        LindbladParams par;
        par.friction = 0.1;
        par.mass = 13.57;
        const DiffusionTriple d = rwa_diffusion(par.friction, par.mass, 4.0);
        par.d_qq = d.d_qq;
        par.d_pp = d.d_pp;
        const PiecewisePotential well = harmonic_well(10.0, 4.0);
        MomentState s0;
        s0.mean_q = 10.5;
        s0.mean_p = 2.0;
        s0.cov_qq = 0.45;
        s0.cov_pp = 24.0;
        IntegrationControls ctl;
        ctl.dt = 1e-3;
        ctl.t_end = 10.0;
        ctl.stride = 10000;
        const TimeSeries ts = integrate(s0, well, par, ClosureMode::centroid, ctl);
        const MomentState exact = segment_propagator_exact(well.segments[0], par, 10.0).apply(s0);
        const MomentState got = ts.states.back();
        const auto rel = [](double a, double b) {
            return std::abs(a - b) / std::max(1.0, std::abs(b));
        };
        c.measured = std::max({rel(got.mean_q, exact.mean_q), rel(got.mean_p, exact.mean_p),
                               rel(got.cov_qq, exact.cov_qq), rel(got.cov_pp, exact.cov_pp),
                               rel(got.cov_pq, exact.cov_pq)});
        c.pass = c.measured <= c.tolerance;
        checks.push_back(c);
    }

    {
        OracleCheck c{"rhs vs independently written rhs", 0.0, 1e-10, false};
        LindbladParams par;
        par.friction = 0.1;
        par.mass = 13.57;
        const DiffusionTriple d = rwa_diffusion(par.friction, par.mass, 4.0);
        par.d_qq = d.d_qq;
        par.d_pp = d.d_pp;
        MomentState s;
        s.mean_q = two.joins[0];
        s.mean_p = 40.0;
        s.cov_qq = 0.5;
        s.cov_pp = 0.5 * units::hbar * units::hbar;
        for (ClosureMode mode : {ClosureMode::centroid, ClosureMode::gaussian_smeared}) {
            const MomentRates a = rhs(s, two, par, mode);
            const MomentRates b = reference_rhs(s, two, par, mode);
            const auto rel = [](double x, double y) {
                return std::abs(x - y) / std::max(1.0, std::abs(y));
            };
            c.measured = std::max({c.measured, rel(a.mean_q, b.mean_q), rel(a.mean_p, b.mean_p),
                                   rel(a.cov_qq, b.cov_qq), rel(a.cov_pp, b.cov_pp),
                                   rel(a.cov_pq, b.cov_pq)});
        }
        c.pass = c.measured <= c.tolerance;
        checks.push_back(c);
    }

    {
        OracleCheck c{"langevin ensemble vs moment ODEs (3 SE)", 0.0, 3.0, false};
        LindbladParams par;
        par.friction = 0.1;
        par.mass = 13.57;
        const double stiffness = 4.0;
        const DiffusionTriple d = rwa_diffusion(par.friction, par.mass, stiffness);
        par.d_qq = d.d_qq;
        par.d_pp = d.d_pp;
        const double inf = std::numeric_limits<double>::infinity();
        const ParabolicSegment seg{10.0, stiffness, 0.0, -inf, inf};
        const double attractor =
            10.0 * stiffness / (stiffness + par.mass * par.friction * par.friction);
        MomentState s0;
        s0.mean_q = attractor + 0.5;
        s0.mean_p = par.mass * par.friction * attractor;
        s0.cov_qq = units::hbar / (2.0 * std::sqrt(par.mass * stiffness));
        s0.cov_pp = units::hbar * units::hbar / (4.0 * s0.cov_qq);
        const LangevinStats stats =
            langevin_sample(seg, par, s0, 2e-3, 10.0, langevin_n, 20260808ull, 1.0);
        for (const LangevinRow& row : stats.rows) {
            if (row.t != 1.0 && row.t != 5.0 && row.t != 10.0) continue;
            const MomentState ode = segment_propagator_exact(seg, par, row.t).apply(s0);
            c.measured = std::max(c.measured, std::abs(row.mean_q - ode.mean_q) / row.se_mean_q);
            c.measured = std::max(c.measured, std::abs(row.mean_p - ode.mean_p) / row.se_mean_p);
            c.measured = std::max(c.measured, std::abs(row.cov_qq - ode.cov_qq) / row.se_cov_qq);
            c.measured = std::max(c.measured, std::abs(row.cov_pp - ode.cov_pp) / row.se_cov_pp);
            c.measured = std::max(c.measured, std::abs(row.cov_pq - ode.cov_pq) / row.se_cov_pq);
        }
        c.pass = c.measured <= c.tolerance;
        checks.push_back(c);
    }

    return checks;
}

int cmd_validate(const std::string& out_dir, std::size_t langevin_n) {
    ensure_dir(out_dir);
    const std::vector<OracleCheck> checks = run_oracle_suite(langevin_n);
    nlohmann::json j;
    j["checks"] = nlohmann::json::array();
    bool all_pass = true;
    for (const OracleCheck& c : checks) {
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << "  measured=" << c.measured
                  << " tolerance=" << c.tolerance << "\n";
        nlohmann::json jc;
        jc["name"] = c.name;
        jc["measured"] = c.measured;
        jc["tolerance"] = c.tolerance;
        jc["pass"] = c.pass;
        j["checks"].push_back(jc);
        all_pass = all_pass && c.pass;
    }
    j["all_pass"] = all_pass;
    write_file(join_path(out_dir, "validation-report.json"), j.dump(2) + "\n");
    return all_pass ? 0 : kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Dissipative tunneling of a Gaussian wave packet in piecewise parabolic "
        "potentials via five-moment Lindblad dynamics.\n"
        "Config defaults: V_a=0, mass=13.57, lambda=0, mode=centroid, dt=1e-3, "
        "t_end=100, stride=100, adaptive=false, rel_tol=1e-10, asym_window=20, "
        "asym_tol=1e-4, dir=.; every run echoes the fully resolved values to "
        "effective-config.ini."};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    int threads = 1;
    app.add_option("--threads", threads, "Cap on sweep parallelism")->capture_default_str();

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        if (needs_config)
            sub->add_option("-c,--config", config_path, "Scenario config file")->required();
        sub->add_option("-o,--out", out_override,
                        "Output directory (overrides [output] dir; LINDBLAD_TUNNEL_OUT wins)");
    };

    CLI::App* simulate = app.add_subcommand("simulate", "Run one scenario and emit trajectory.csv");
    add_common(simulate, true);

    CLI::App* sweep = app.add_subcommand("sweep", "Run the [sweep] lambda grid");
    add_common(sweep, true);

    CLI::App* critical = app.add_subcommand("critical", "Bisect the critical friction constant");
    add_common(critical, true);
    double cr_lo = -1.0, cr_hi = -1.0, cr_tol = -1.0;
    critical->add_option("--lo", cr_lo, "Bracket lower end (overrides config)");
    critical->add_option("--hi", cr_hi, "Bracket upper end (overrides config)");
    critical->add_option("--tol", cr_tol, "Bisection tolerance (overrides config)");

    CLI::App* figures = app.add_subcommand("figures", "Emit one CSV per figure curve");
    add_common(figures, true);
    int which = 4;
    figures->add_option("--which", which, "Figure layout: 2, 3, 4, 6 or 7")->required();

    CLI::App* validate = app.add_subcommand("validate", "Run the oracle suite, emit a JSON report");
    add_common(validate, false);
    std::size_t langevin_n = 100000;
    validate->add_option("--langevin-n", langevin_n, "Langevin trajectory count")
        ->capture_default_str();

    CLI11_PARSE(app, argc, argv);

    try {
        if (validate->parsed()) {
            const std::string out = out_override.empty() ? std::string(".") : out_override;
            const char* env = std::getenv("LINDBLAD_TUNNEL_OUT");
            return cmd_validate(env && *env ? env : out, langevin_n);
        }
        const ScenarioConfig cfg = parse_config(config_path);
        const std::string out_dir = resolve_out_dir(cfg, out_override);
        if (simulate->parsed()) return cmd_simulate(cfg, out_dir);
        if (sweep->parsed()) return cmd_sweep(cfg, out_dir, threads);
        if (critical->parsed()) return cmd_critical(cfg, out_dir, cr_lo, cr_hi, cr_tol);
        if (figures->parsed()) return cmd_figures(cfg, out_dir, which, threads);
    } catch (const ParseError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const ValidationError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DomainError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return 0;
}
