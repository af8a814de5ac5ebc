#pragma once

// Canonical operating points used across the test suites.

#include "ryd/model.hpp"

namespace ryd::fixtures {

// Strong drive: Omega1/2pi = 20 MHz, Omega2 = 2*Omega1, omega/2pi = 250 kHz,
// gamma0/2pi = gamma1/2pi = 3.03 MHz, V_rr = Omega1, gammaR/2pi = 1 kHz.
inline ModelParams strong_drive() {
    return ModelParams::from_mhz(20.0, 40.0, 0.25, 0.0, 3.03, 3.03, 0.001, 20.0);
}

inline ModelParams strong_drive_no_rydberg_decay() {
    return ModelParams::from_mhz(20.0, 40.0, 0.25, 0.0, 3.03, 3.03, 0.0, 20.0);
}

// Same drive with the weaker Raman coupling used for the interaction sweeps.
inline ModelParams sweep_base() {
    return ModelParams::from_mhz(20.0, 40.0, 0.125, 0.0, 3.03, 3.03, 0.001, 20.0);
}

// Moderate drive: Omega1/2pi = 10 MHz, Omega2 = 2*Omega1, V_rr = Omega1,
// gamma_p/2pi = 6 MHz split evenly, no Rydberg decay.
inline ModelParams moderate_drive(double omega_raman_mhz = 0.1) {
    return ModelParams::from_mhz(10.0, 20.0, omega_raman_mhz, 0.0, 3.0, 3.0, 0.0, 10.0);
}

}  // namespace ryd::fixtures
