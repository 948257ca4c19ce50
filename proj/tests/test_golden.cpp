#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "lindblad/config.hpp"
#include "lindblad/io.hpp"
#include "scenarios.hpp"

using namespace lindblad;

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(bool(in), "missing golden file: ", path,
                    " (set LINDBLAD_REGEN_GOLDEN=1 and rerun to regenerate)");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool regen() { return std::getenv("LINDBLAD_REGEN_GOLDEN") != nullptr; }

void check_against_golden(const std::string& name, const std::string& got) {
    const std::string golden_path = std::string(TEST_GOLDEN_DIR) + "/" + name;
    if (regen()) {
        write_file(golden_path, got);
        return;
    }
    const std::string expected = read_file(golden_path);
    if (got != expected) {
        const std::string dump = std::string(TEST_BINARY_DIR) + "/" + name + ".got";
        write_file(dump, got);
        FAIL_CHECK("golden mismatch for ", name, "; actual output dumped to ", dump);
    } else {
        CHECK(got == expected);
    }
}

}  // namespace

TEST_CASE("golden: describe of the reference potentials") {
    const ScenarioConfig two = testing_scenarios::reference_two_parabola();
    check_against_golden("describe_two_parabola.txt", describe(two.make_potential()));
    const ScenarioConfig three = testing_scenarios::reference_three_parabola();
    check_against_golden("describe_three_parabola.txt", describe(three.make_potential()));
}

TEST_CASE("golden: effective config echo of the minimal scenario") {
    ScenarioConfig cfg = testing_scenarios::reference_two_parabola();
    check_against_golden("effective_config_reference.ini", effective_config(cfg));
}

TEST_CASE("golden: probability trace of a short damped reference run") {
    // Matches the per-curve layout of the figure driver (columns t,P).
    ScenarioConfig cfg = testing_scenarios::reference_two_parabola();
    cfg.controls.t_end = 20.0;
    cfg.controls.stride = 100;
    const Trajectory tr = run_scenario(cfg, 0.05);
    check_against_golden("fig4_reference_lambda_0.05.csv", probability_csv(tr));
}
