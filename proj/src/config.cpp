#include "lindblad/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

#include "lindblad/errors.hpp"
#include "lindblad/io.hpp"

namespace lindblad {

namespace {

struct RawEntry {
    std::string value;
    int line = 0;
    int column = 0;
};

using Section = std::map<std::string, RawEntry>;

const std::map<std::string, std::vector<std::string>> kSchema = {
    {"potential", {"q_a", "q_b", "B", "C_b", "V_a", "q_c", "V_c"}},
    {"dynamics",
     {"mass", "lambda", "mode", "dt", "t_end", "stride", "adaptive", "rel_tol", "asym_window",
      "asym_tol"}},
    {"initial", {"sigma_p0"}},
    {"sweep", {"lambda_lo", "lambda_hi", "count", "bracket_lo", "bracket_hi", "bracket_tol"}},
    {"output", {"dir"}},
};

bool known_key(const std::string& section, const std::string& key) {
    const auto it = kSchema.find(section);
    if (it == kSchema.end()) return false;
    for (const std::string& k : it->second)
        if (k == key) return true;
    return false;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::map<std::string, Section> tokenize(const std::string& text) {
    std::map<std::string, Section> sections;
    std::istringstream in(text);
    std::string line;
    std::string current;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        // Inline comments: strip from the first '#' or ';' preceded by blank.
        for (std::size_t i = 0; i < line.size(); ++i) {
            if ((line[i] == '#' || line[i] == ';') &&
                (i == 0 || line[i - 1] == ' ' || line[i - 1] == '\t')) {
                line.erase(i);
                break;
            }
        }
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#' || stripped[0] == ';') continue;
        if (stripped.front() == '[') {
            if (stripped.back() != ']')
                throw ParseError("unterminated section header", lineno, 1);
            current = trim(stripped.substr(1, stripped.size() - 2));
            if (kSchema.find(current) == kSchema.end())
                throw ParseError("unknown section [" + current + "]", lineno, 1);
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected key = value", lineno, 1);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const int key_col = static_cast<int>(line.find_first_not_of(" \t")) + 1;
        if (current.empty())
            throw ParseError("key '" + key + "' outside any section", lineno, key_col);
        if (!known_key(current, key))
            throw ParseError("unknown key '" + key + "' in section [" + current + "]", lineno,
                             key_col);
        if (key.empty()) throw ParseError("empty key", lineno, key_col);
        if (sections[current].count(key))
            throw ParseError("duplicate key '" + key + "'", lineno, key_col);
        sections[current][key] = {value, lineno, static_cast<int>(eq) + 2};
    }
    return sections;
}

double to_double(const RawEntry& e, const std::string& key) {
    const char* begin = e.value.c_str();
    char* end = nullptr;
    const double x = std::strtod(begin, &end);
    if (end == begin || *end != '\0' || !std::isfinite(x))
        throw ParseError("key '" + key + "': expected a finite number, got '" + e.value + "'",
                         e.line, e.column);
    return x;
}

int to_int(const RawEntry& e, const std::string& key) {
    const double x = to_double(e, key);
    const int i = static_cast<int>(std::lround(x));
    if (std::abs(x - i) > 1e-12)
        throw ParseError("key '" + key + "': expected an integer, got '" + e.value + "'", e.line,
                         e.column);
    return i;
}

bool to_bool(const RawEntry& e, const std::string& key) {
    if (e.value == "true" || e.value == "1") return true;
    if (e.value == "false" || e.value == "0") return false;
    throw ParseError("key '" + key + "': expected true/false, got '" + e.value + "'", e.line,
                     e.column);
}

ClosureMode to_mode(const RawEntry& e) {
    if (e.value == "centroid") return ClosureMode::centroid;
    if (e.value == "gaussian_smeared") return ClosureMode::gaussian_smeared;
    throw ParseError("key 'mode': expected centroid or gaussian_smeared, got '" + e.value + "'",
                     e.line, e.column);
}

const RawEntry* find(const std::map<std::string, Section>& sections, const std::string& sec,
                     const std::string& key) {
    const auto s = sections.find(sec);
    if (s == sections.end()) return nullptr;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    return &k->second;
}

double require_double(const std::map<std::string, Section>& sections, const std::string& sec,
                      const std::string& key) {
    const RawEntry* e = find(sections, sec, key);
    if (!e) throw ValidationError("missing required key '" + key + "' in section [" + sec + "]");
    return to_double(*e, key);
}

}  // namespace

ScenarioConfig parse_config_text(const std::string& text) {
    const auto sections = tokenize(text);
    ScenarioConfig cfg;

    cfg.q_a = require_double(sections, "potential", "q_a");
    cfg.q_b = require_double(sections, "potential", "q_b");
    cfg.barrier_height = require_double(sections, "potential", "B");
    cfg.barrier_stiffness = require_double(sections, "potential", "C_b");
    if (const RawEntry* e = find(sections, "potential", "V_a")) cfg.v_a = to_double(*e, "V_a");
    if (const RawEntry* e = find(sections, "potential", "q_c")) cfg.q_c = to_double(*e, "q_c");
    if (const RawEntry* e = find(sections, "potential", "V_c")) cfg.v_c = to_double(*e, "V_c");

    if (const RawEntry* e = find(sections, "dynamics", "mass")) cfg.mass = to_double(*e, "mass");
    if (const RawEntry* e = find(sections, "dynamics", "lambda"))
        cfg.friction = to_double(*e, "lambda");
    if (const RawEntry* e = find(sections, "dynamics", "mode")) cfg.mode = to_mode(*e);
    if (const RawEntry* e = find(sections, "dynamics", "dt")) cfg.controls.dt = to_double(*e, "dt");
    if (const RawEntry* e = find(sections, "dynamics", "t_end"))
        cfg.controls.t_end = to_double(*e, "t_end");
    if (const RawEntry* e = find(sections, "dynamics", "stride"))
        cfg.controls.stride = to_int(*e, "stride");
    if (const RawEntry* e = find(sections, "dynamics", "adaptive"))
        cfg.controls.adaptive = to_bool(*e, "adaptive");
    if (const RawEntry* e = find(sections, "dynamics", "rel_tol"))
        cfg.controls.rel_tol = to_double(*e, "rel_tol");
    if (const RawEntry* e = find(sections, "dynamics", "asym_window"))
        cfg.asym_window = to_double(*e, "asym_window");
    if (const RawEntry* e = find(sections, "dynamics", "asym_tol"))
        cfg.asym_tol = to_double(*e, "asym_tol");

    cfg.momentum_mev_c = require_double(sections, "initial", "sigma_p0");

    const bool has_sweep = find(sections, "sweep", "lambda_lo") ||
                           find(sections, "sweep", "lambda_hi") || find(sections, "sweep", "count");
    if (has_sweep) {
        SweepSpec sp;
        sp.lambda_lo = require_double(sections, "sweep", "lambda_lo");
        sp.lambda_hi = require_double(sections, "sweep", "lambda_hi");
        const RawEntry* count = find(sections, "sweep", "count");
        if (!count) throw ValidationError("missing required key 'count' in section [sweep]");
        sp.count = to_int(*count, "count");
        cfg.sweep = sp;
    }
    const bool has_bracket =
        find(sections, "sweep", "bracket_lo") || find(sections, "sweep", "bracket_hi");
    if (has_bracket) {
        BracketSpec br;
        br.lambda_lo = require_double(sections, "sweep", "bracket_lo");
        br.lambda_hi = require_double(sections, "sweep", "bracket_hi");
        if (const RawEntry* e = find(sections, "sweep", "bracket_tol"))
            br.tol = to_double(*e, "bracket_tol");
        cfg.bracket = br;
    }

    if (const RawEntry* e = find(sections, "output", "dir")) cfg.out_dir = e->value;

    validate_config(cfg);
    return cfg;
}

ScenarioConfig parse_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

void validate_config(const ScenarioConfig& cfg) {
    if (!(cfg.q_a < cfg.q_b)) throw ValidationError("potential: requires q_a < q_b");
    if (!(cfg.barrier_height > 0.0)) throw ValidationError("potential: requires B > 0");
    if (!(cfg.barrier_stiffness > 0.0)) throw ValidationError("potential: requires C_b > 0");
    const double d = cfg.q_b - cfg.q_a;
    if (!(cfg.barrier_stiffness * d * d > 2.0 * cfg.barrier_height))
        throw ValidationError(
            "potential: C_b*(q_b-q_a)^2 <= 2B (barrier too wide/low for a smooth join)");
    if (cfg.q_c) {
        if (!(*cfg.q_c > cfg.q_b)) throw ValidationError("potential: requires q_c > q_b");
        const double v_c = cfg.v_c.value_or(cfg.v_a);
        const double drop = cfg.v_a + cfg.barrier_height - v_c;
        if (!(drop > 0.0)) throw ValidationError("potential: requires V(q_b) - V_c > 0");
        const double dc = *cfg.q_c - cfg.q_b;
        if (!(cfg.barrier_stiffness * dc * dc > 2.0 * drop))
            throw ValidationError(
                "potential: C_b*(q_c-q_b)^2 <= 2*(V(q_b)-V_c) (no smooth join exists)");
    } else if (cfg.v_c) {
        throw ValidationError("potential: V_c given without q_c");
    }
    if (!(cfg.mass > 0.0)) throw ValidationError("dynamics: requires mass > 0");
    if (!(cfg.friction >= 0.0)) throw ValidationError("dynamics: requires lambda >= 0");
    try {
        cfg.controls.validate();
    } catch (const DomainError& e) {
        throw ValidationError(std::string("dynamics: ") + e.what());
    }
    if (!(cfg.asym_window > 0.0)) throw ValidationError("dynamics: requires asym_window > 0");
    if (!(cfg.asym_tol > 0.0)) throw ValidationError("dynamics: requires asym_tol > 0");
    if (!std::isfinite(cfg.momentum_mev_c))
        throw ValidationError("initial: sigma_p0 must be finite");
    if (cfg.sweep) {
        if (!(cfg.sweep->lambda_lo >= 0.0)) throw ValidationError("sweep: requires lambda_lo >= 0");
        if (!(cfg.sweep->lambda_hi > cfg.sweep->lambda_lo))
            throw ValidationError("sweep: requires lambda_hi > lambda_lo");
        if (cfg.sweep->count < 2) throw ValidationError("sweep: requires count >= 2");
    }
    if (cfg.bracket) {
        if (!(cfg.bracket->lambda_lo >= 0.0))
            throw ValidationError("sweep: requires bracket_lo >= 0");
        if (!(cfg.bracket->lambda_hi > cfg.bracket->lambda_lo))
            throw ValidationError("sweep: requires bracket_hi > bracket_lo");
        if (!(cfg.bracket->tol > 0.0)) throw ValidationError("sweep: requires bracket_tol > 0");
    }
    if (cfg.out_dir.empty()) throw ValidationError("output: dir must not be empty");
}

std::string effective_config(const ScenarioConfig& cfg) {
    std::ostringstream os;
    os << "[potential]\n";
    os << "q_a = " << format_full(cfg.q_a) << "\n";
    os << "q_b = " << format_full(cfg.q_b) << "\n";
    os << "B = " << format_full(cfg.barrier_height) << "\n";
    os << "C_b = " << format_full(cfg.barrier_stiffness) << "\n";
    os << "V_a = " << format_full(cfg.v_a) << "\n";
    if (cfg.q_c) os << "q_c = " << format_full(*cfg.q_c) << "\n";
    if (cfg.v_c) os << "V_c = " << format_full(*cfg.v_c) << "\n";
    os << "\n[dynamics]\n";
    os << "mass = " << format_full(cfg.mass) << "\n";
    os << "lambda = " << format_full(cfg.friction) << "\n";
    os << "mode = " << (cfg.mode == ClosureMode::centroid ? "centroid" : "gaussian_smeared")
       << "\n";
    os << "dt = " << format_full(cfg.controls.dt) << "\n";
    os << "t_end = " << format_full(cfg.controls.t_end) << "\n";
    os << "stride = " << cfg.controls.stride << "\n";
    os << "adaptive = " << (cfg.controls.adaptive ? "true" : "false") << "\n";
    os << "rel_tol = " << format_full(cfg.controls.rel_tol) << "\n";
    os << "asym_window = " << format_full(cfg.asym_window) << "\n";
    os << "asym_tol = " << format_full(cfg.asym_tol) << "\n";
    os << "\n[initial]\n";
    os << "sigma_p0 = " << format_full(cfg.momentum_mev_c) << "\n";
    if (cfg.sweep || cfg.bracket) {
        os << "\n[sweep]\n";
        if (cfg.sweep) {
            os << "lambda_lo = " << format_full(cfg.sweep->lambda_lo) << "\n";
            os << "lambda_hi = " << format_full(cfg.sweep->lambda_hi) << "\n";
            os << "count = " << cfg.sweep->count << "\n";
        }
        if (cfg.bracket) {
            os << "bracket_lo = " << format_full(cfg.bracket->lambda_lo) << "\n";
            os << "bracket_hi = " << format_full(cfg.bracket->lambda_hi) << "\n";
            os << "bracket_tol = " << format_full(cfg.bracket->tol) << "\n";
        }
    }
    os << "\n[output]\n";
    os << "dir = " << cfg.out_dir << "\n";
    return os.str();
}

}  // namespace lindblad
