// io.hpp — CSV and JSON emission. All numeric output uses 17 significant
// digits so files round-trip exactly and are byte-stable for identical inputs.

#pragma once

#include <string>

#include "lindblad/experiment.hpp"

namespace lindblad {

std::string format_full(double x);  // %.17g

// Header t,sigma_q,sigma_p,sigma_qq,sigma_pp,sigma_pq,P,Gamma_f.
std::string trajectory_csv(const Trajectory& tr);

// Header lambda,P_inf,classification,t90 (absent values written as nan).
std::string sweep_csv(const SweepResult& sweep);

std::string sweep_json(const SweepResult& sweep);

// Two columns t,P (used by the figure-reproduction driver).
std::string probability_csv(const Trajectory& tr);

// Columns t,sigma_q,sigma_p.
std::string means_csv(const Trajectory& tr);

// Columns t,sigma_qq,sigma_pp,sigma_pq.
std::string covariances_csv(const Trajectory& tr);

void write_file(const std::string& path, const std::string& content);

}  // namespace lindblad
