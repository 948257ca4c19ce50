#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "lindblad/config.hpp"
#include "lindblad/errors.hpp"
#include "lindblad/io.hpp"
#include "scenarios.hpp"

using namespace lindblad;

namespace {

const char* kMinimalConfig =
    "[potential]\n"
    "q_a = 10\n"
    "q_b = 13\n"
    "B = 10\n"
    "C_b = 5\n"
    "\n"
    "[initial]\n"
    "sigma_p0 = 1200\n";

}  // namespace

TEST_CASE("minimal config: defaults fill in") {
    const ScenarioConfig cfg = parse_config_text(kMinimalConfig);
    CHECK(cfg.q_a == 10.0);
    CHECK(cfg.q_b == 13.0);
    CHECK(cfg.barrier_height == 10.0);
    CHECK(cfg.barrier_stiffness == 5.0);
    CHECK(cfg.v_a == 0.0);
    CHECK(!cfg.q_c.has_value());
    CHECK(cfg.mass == 13.57);
    CHECK(cfg.friction == 0.0);
    CHECK(cfg.mode == ClosureMode::centroid);
    CHECK(cfg.controls.dt == 1e-3);
    CHECK(cfg.controls.t_end == 100.0);
    CHECK(cfg.controls.stride == 100);
    CHECK(!cfg.controls.adaptive);
    CHECK(cfg.asym_window == 20.0);
    CHECK(cfg.asym_tol == 1e-4);
    CHECK(cfg.momentum_mev_c == 1200.0);
    CHECK(cfg.out_dir == ".");
}

TEST_CASE("violated join precondition surfaces as a validation error") {
    const std::string text =
        "[potential]\nq_a = 10\nq_b = 13\nB = 25\nC_b = 5\n\n[initial]\nsigma_p0 = 1200\n";
    try {
        parse_config_text(text);
        FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find("C_b*(q_b-q_a)^2 <= 2B") != std::string::npos);
    }
}

TEST_CASE("unknown keys and malformed lines carry line/column positions") {
    try {
        parse_config_text("[potential]\nq_a = 10\nbogus_key = 1\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 3);
        CHECK(std::string(e.what()).find("bogus_key") != std::string::npos);
    }
    CHECK_THROWS_AS(parse_config_text("[nonsense]\n"), ParseError);
    CHECK_THROWS_AS(parse_config_text("[potential]\nq_a 10\n"), ParseError);
    CHECK_THROWS_AS(parse_config_text("q_a = 10\n"), ParseError);          // outside a section
    CHECK_THROWS_AS(parse_config_text("[potential]\nq_a = ten\n"), ParseError);
    CHECK_THROWS_AS(parse_config_text("[potential]\nq_a = 10\nq_a = 11\n"), ParseError);
    CHECK_THROWS_AS(parse_config_text("[potential\n"), ParseError);
}

TEST_CASE("more validation failures") {
    // V_c without q_c
    CHECK_THROWS_AS(parse_config_text("[potential]\nq_a = 10\nq_b = 13\nB = 10\nC_b = 5\n"
                                      "V_c = 0\n\n[initial]\nsigma_p0 = 1200\n"),
                    ValidationError);
    // missing required key
    CHECK_THROWS_AS(parse_config_text("[potential]\nq_a = 10\nq_b = 13\nB = 10\nC_b = 5\n"),
                    ValidationError);
    // bad mode string
    CHECK_THROWS_AS(parse_config_text("[potential]\nq_a = 10\nq_b = 13\nB = 10\nC_b = 5\n\n"
                                      "[dynamics]\nmode = magic\n\n[initial]\nsigma_p0 = 1200\n"),
                    ParseError);
    // three-parabola geometry without a smooth join
    CHECK_THROWS_AS(parse_config_text("[potential]\nq_a = 10\nq_b = 13\nB = 10\nC_b = 5\n"
                                      "q_c = 14\nV_c = 0\n\n[initial]\nsigma_p0 = 1200\n"),
                    ValidationError);
    // sweep grid missing its point count
    CHECK_THROWS_AS(parse_config_text("[potential]\nq_a = 10\nq_b = 13\nB = 10\nC_b = 5\n\n"
                                      "[initial]\nsigma_p0 = 1200\n\n"
                                      "[sweep]\nlambda_lo = 0\nlambda_hi = 0.1\n"),
                    ValidationError);
}

TEST_CASE("comments, blank lines and whitespace are tolerated") {
    const ScenarioConfig cfg = parse_config_text(
        "# two-parabola run\n"
        "[potential]\n"
        "  q_a =  10  \n"
        "q_b = 13   # barrier top in fm\n"
        "; alt comment\n"
        "B = 10\n"
        "C_b = 5 ; stiffness\n"
        "\n"
        "[initial]\n"
        "sigma_p0 = 1200\n");
    CHECK(cfg.q_a == 10.0);
    CHECK(cfg.q_b == 13.0);
    CHECK(cfg.barrier_stiffness == 5.0);
}

TEST_CASE("empty output directory is rejected") {
    ScenarioConfig cfg = testing_scenarios::reference_two_parabola();
    cfg.out_dir = "";
    CHECK_THROWS_AS(validate_config(cfg), ValidationError);
}

TEST_CASE("effective config echo round-trips to an identical configuration") {
    ScenarioConfig cfg = testing_scenarios::reference_three_parabola(18.0, 0.25);
    cfg.friction = 0.07;
    cfg.mode = ClosureMode::gaussian_smeared;
    cfg.controls.dt = 2.5e-4;
    cfg.controls.t_end = 37.5;
    cfg.controls.stride = 17;
    cfg.controls.adaptive = true;
    cfg.controls.rel_tol = 3e-11;
    cfg.asym_window = 12.0;
    cfg.asym_tol = 2e-5;
    cfg.sweep = SweepSpec{0.01, 0.2, 7};
    cfg.bracket = BracketSpec{0.0, 0.9, 5e-5};
    cfg.out_dir = "results";

    const std::string echo1 = effective_config(cfg);
    const ScenarioConfig again = parse_config_text(echo1);
    const std::string echo2 = effective_config(again);
    CHECK(echo1 == echo2);

    CHECK(again.q_c == cfg.q_c);
    CHECK(again.v_c == cfg.v_c);
    CHECK(again.friction == cfg.friction);
    CHECK(again.mode == cfg.mode);
    CHECK(again.controls.dt == cfg.controls.dt);
    CHECK(again.controls.rel_tol == cfg.controls.rel_tol);
    CHECK(again.sweep->count == 7);
    CHECK(again.bracket->tol == 5e-5);
    CHECK(again.out_dir == "results");
}

TEST_CASE("full-precision formatting round-trips doubles exactly") {
    std::mt19937_64 rng(13001);
    for (int i = 0; i < 200; ++i) {
        double x = testing_scenarios::uniform(rng, -1.0, 1.0) *
                   std::pow(10.0, testing_scenarios::uniform(rng, -12.0, 12.0));
        const std::string text = format_full(x);
        CHECK(std::strtod(text.c_str(), nullptr) == x);
    }
    CHECK(format_full(0.5) == "0.5");
}

TEST_CASE("trajectory CSV has the documented header and is byte-stable") {
    ScenarioConfig cfg = testing_scenarios::reference_two_parabola();
    cfg.controls.t_end = 5.0;
    const Trajectory tr = run_scenario(cfg, 0.05);
    const std::string csv1 = trajectory_csv(tr);
    const std::string csv2 = trajectory_csv(run_scenario(cfg, 0.05));
    CHECK(csv1 == csv2);
    CHECK(csv1.rfind("t,sigma_q,sigma_p,sigma_qq,sigma_pp,sigma_pq,P,Gamma_f\n", 0) == 0);
    // one line per recorded state plus the header
    std::size_t lines = 0;
    for (char c : csv1)
        if (c == '\n') ++lines;
    CHECK(lines == tr.series.states.size() + 1);
}

TEST_CASE("per-curve CSV writers emit the documented columns") {
    ScenarioConfig cfg = testing_scenarios::reference_two_parabola();
    cfg.controls.t_end = 2.0;
    const Trajectory tr = run_scenario(cfg, 0.05);
    CHECK(probability_csv(tr).rfind("t,P\n", 0) == 0);
    CHECK(means_csv(tr).rfind("t,sigma_q,sigma_p\n", 0) == 0);
    CHECK(covariances_csv(tr).rfind("t,sigma_qq,sigma_pp,sigma_pq\n", 0) == 0);
    const std::string means = means_csv(tr);
    std::size_t lines = 0;
    for (char c : means)
        if (c == '\n') ++lines;
    CHECK(lines == tr.series.states.size() + 1);
}

TEST_CASE("sweep CSV and JSON list entries in grid order") {
    ScenarioConfig cfg = testing_scenarios::reference_two_parabola();
    cfg.controls.t_end = 30.0;
    const SweepResult sweep = friction_sweep(cfg, {0.02, 0.3}, 1);
    const std::string csv = sweep_csv(sweep);
    CHECK(csv.rfind("lambda,P_inf,classification,t90\n", 0) == 0);
    CHECK(csv.find("escaped") != std::string::npos);
    CHECK(csv.find("trapped") != std::string::npos);
    const std::string json = sweep_json(sweep);
    CHECK(json.find("\"entries\"") != std::string::npos);
    CHECK(json.find("\"classification\"") != std::string::npos);
}
