#include "lindblad/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace lindblad {

std::string format_full(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

std::string trajectory_csv(const Trajectory& tr) {
    std::ostringstream os;
    os << "t,sigma_q,sigma_p,sigma_qq,sigma_pp,sigma_pq,P,Gamma_f\n";
    for (std::size_t i = 0; i < tr.series.states.size(); ++i) {
        const MomentState& s = tr.series.states[i];
        os << format_full(s.t) << ',' << format_full(s.mean_q) << ',' << format_full(s.mean_p)
           << ',' << format_full(s.cov_qq) << ',' << format_full(s.cov_pp) << ','
           << format_full(s.cov_pq) << ',' << format_full(tr.prob[i]) << ','
           << format_full(tr.rate[i]) << '\n';
    }
    return os.str();
}

std::string sweep_csv(const SweepResult& sweep) {
    std::ostringstream os;
    os << "lambda,P_inf,classification,t90\n";
    for (const SweepEntry& e : sweep.entries) {
        os << format_full(e.lambda) << ','
           << (e.p_inf ? format_full(*e.p_inf) : std::string("nan")) << ','
           << to_string(e.classification) << ','
           << (e.t90 ? format_full(*e.t90) : std::string("nan")) << '\n';
    }
    return os.str();
}

std::string sweep_json(const SweepResult& sweep) {
    nlohmann::json j;
    j["entries"] = nlohmann::json::array();
    for (const SweepEntry& e : sweep.entries) {
        nlohmann::json je;
        je["lambda"] = e.lambda;
        je["p_inf"] = e.p_inf ? nlohmann::json(*e.p_inf) : nlohmann::json(nullptr);
        je["t90"] = e.t90 ? nlohmann::json(*e.t90) : nlohmann::json(nullptr);
        je["classification"] = to_string(e.classification);
        if (e.error) je["error"] = *e.error;
        j["entries"].push_back(je);
    }
    return j.dump(2) + "\n";
}

std::string probability_csv(const Trajectory& tr) {
    std::ostringstream os;
    os << "t,P\n";
    for (std::size_t i = 0; i < tr.series.states.size(); ++i)
        os << format_full(tr.series.states[i].t) << ',' << format_full(tr.prob[i]) << '\n';
    return os.str();
}

std::string means_csv(const Trajectory& tr) {
    std::ostringstream os;
    os << "t,sigma_q,sigma_p\n";
    for (const MomentState& s : tr.series.states)
        os << format_full(s.t) << ',' << format_full(s.mean_q) << ',' << format_full(s.mean_p)
           << '\n';
    return os.str();
}

std::string covariances_csv(const Trajectory& tr) {
    std::ostringstream os;
    os << "t,sigma_qq,sigma_pp,sigma_pq\n";
    for (const MomentState& s : tr.series.states)
        os << format_full(s.t) << ',' << format_full(s.cov_qq) << ',' << format_full(s.cov_pp)
           << ',' << format_full(s.cov_pq) << '\n';
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace lindblad
