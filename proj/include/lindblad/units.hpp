// units.hpp — Unit system: lengths in fm, energies in MeV, time unit T = 1e-22 s.

#pragma once

namespace lindblad::units {

// hbar = 6.58212e-22 MeV s expressed in MeV*T.
inline constexpr double hbar = 6.58212;

// Speed of light in fm per T (rounded convention of this unit system).
inline constexpr double light_speed = 30.0;

// Masses are MeV*T^2/fm^2; one nucleon is ~939 MeV / c^2.
inline constexpr double nucleon_mass = 939.0 / (light_speed * light_speed);

// Config files quote momenta in MeV (meaning MeV/c); internally we use MeV*T/fm.
inline constexpr double momentum_from_mev_c(double p_mev_c) { return p_mev_c / light_speed; }
inline constexpr double momentum_to_mev_c(double p_internal) { return p_internal * light_speed; }

}  // namespace lindblad::units
