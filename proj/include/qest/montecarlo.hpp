#pragma once

// Simulated measurement runs: multinomial sampling, maximum-likelihood
// estimation, and empirical comparison against the Cramér-Rao bounds.

#include "qest/measure.hpp"
#include "qest/rng.hpp"
#include "qest/state_model.hpp"

#include <cstdint>
#include <vector>

namespace qest {

// Multinomial counts over the outcome distribution; deterministic for a
// fixed generator state.
std::vector<long> sample_outcomes(const RVector& probs, long shots, SplitMix64& rng);

struct MLResult {
    double estimate = 0.0;
    bool at_boundary = false;  // maximum sits at an edge of the search interval
};

// Maximize sum_x counts_x log p_x(lambda) over [lo, hi]: a 256-point coarse
// grid followed by golden-section refinement (tolerance 1e-8). Grid points
// where the model cannot be evaluated, or where an observed outcome has zero
// probability, are treated as log-likelihood -inf; if that kills the whole
// grid the likelihood is undefined and a numerical error is raised.
MLResult ml_estimate(const StateFamily& fam, const POVM& povm, const std::vector<long>& counts,
                     double lo, double hi);

struct Experiment {
    StateFamily fam;
    double true_lambda = 0.0;
    POVM povm;
    long shots = 1;     // measurements per estimate
    long reps = 1;      // independent repetitions
    std::uint64_t seed = 0;
    double lo = 0.0;    // ML search interval
    double hi = 1.0;
};

struct ExperimentReport {
    std::vector<double> estimates;
    double mean = 0.0;
    double bias = 0.0;           // reported, never corrected
    double empirical_var = 0.0;  // (R-1)-denominator sample variance
    double crb_classical = 0.0;  // 1/(M F) for the supplied measurement
    double crb_quantum = 0.0;    // 1/(M H)
    double ratio_classical = 0.0;
    double ratio_quantum = 0.0;
    int boundary_hits = 0;
    int fisher_skipped = 0;  // outcomes excluded from F for p <= 1e-12
};

// R repetitions of an M-shot experiment, each on its own derived substream,
// estimating by ML and comparing the spread against 1/(MF) and 1/(MH).
ExperimentReport crb_experiment(const Experiment& exp);

}  // namespace qest
