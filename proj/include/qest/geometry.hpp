#pragma once

// Fidelity, Bures distance, and the finite-difference check that the Bures
// metric coincides with a quarter of the quantum Fisher information.

#include "qest/state_model.hpp"

#include <string>

namespace qest {

// (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2, symmetric, in [0, 1].
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

// Squared Bures distance 2(1 - sqrt(F)).
double bures_distance_sq(const DensityMatrix& rho, const DensityMatrix& sigma);

struct BuresReport {
    double fidelity = 0.0;     // between rho_l and rho_{l+step}
    double bures_sq = 0.0;     // squared distance at the full step
    double metric_fd = 0.0;    // Richardson-refined D^2/step^2
    double qfi_quarter = 0.0;  // H/4 at l
    double rel_err = 0.0;      // |metric_fd - qfi_quarter| / max(qfi_quarter, 1e-12)
    bool rank_warning = false;
    std::string warning;  // set when the support rank changes across the step
};

// One-sided metric probe: m(s) = D^2(rho_l, rho_{l+s})/s^2 at s = step and
// step/2, Richardson-combined to 2 m(step/2) - m(step). Step must lie in
// [1e-6, 1e-2]. A rank change across the step attaches a warning instead of
// failing (the metric-information identity may not hold at support
// boundaries).
BuresReport bures_metric_check(const StateFamily& fam, const ParamPoint& p, double step);

}  // namespace qest
