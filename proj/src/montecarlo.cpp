#include "qest/montecarlo.hpp"

#include "qest/errors.hpp"
#include "qest/qfi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace qest {

namespace {

constexpr int kGridPoints = 256;
constexpr double kGoldenTol = 1e-8;
constexpr double kInf = std::numeric_limits<double>::infinity();

// log-likelihood at one lambda; -inf marks an infeasible point
double log_likelihood(const StateFamily& fam, const POVM& povm, const std::vector<long>& counts,
                      double lambda) {
    RVector p;
    try {
        p = born_probs(fam.evaluate({lambda}), povm);
    } catch (const std::runtime_error&) {
        return -kInf;
    }
    double ll = 0.0;
    for (int x = 0; x < povm.size(); ++x) {
        if (counts[x] == 0) {
            continue;
        }
        if (p[x] <= 0.0) {
            return -kInf;
        }
        ll += static_cast<double>(counts[x]) * std::log(p[x]);
    }
    return ll;
}

}  // namespace

std::vector<long> sample_outcomes(const RVector& probs, long shots, SplitMix64& rng) {
    if (shots < 0) {
        throw ValidationError("shot count must be non-negative");
    }
    const Eigen::Index k = probs.size();
    if (k < 1) {
        throw ValidationError("need at least one outcome");
    }
    double total = 0.0;
    RVector clamped(k);
    for (Eigen::Index x = 0; x < k; ++x) {
        double p = probs[x];
        if (p < 0.0) {
            if (p < -1e-12) {
                std::ostringstream os;
                os << "outcome " << x << " has probability " << p;
                throw ValidationError(os.str());
            }
            p = 0.0;
        }
        clamped[x] = p;
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-8) {
        std::ostringstream os;
        os << "outcome probabilities sum to " << total << ", expected 1 within 1e-8";
        throw ValidationError(os.str());
    }

    std::vector<long> counts(k, 0);
    for (long s = 0; s < shots; ++s) {
        double u = rng.next_double() * total;
        double acc = 0.0;
        Eigen::Index pick = k - 1;  // round-off falls into the last bucket
        for (Eigen::Index x = 0; x < k; ++x) {
            acc += clamped[x];
            if (u < acc) {
                pick = x;
                break;
            }
        }
        ++counts[pick];
    }
    return counts;
}

MLResult ml_estimate(const StateFamily& fam, const POVM& povm, const std::vector<long>& counts,
                     double lo, double hi) {
    if (fam.nparams() != 1) {
        throw ValidationError("maximum-likelihood estimation here is single-parameter");
    }
    if (static_cast<int>(counts.size()) != povm.size()) {
        throw ValidationError("counts length does not match the POVM size");
    }
    for (long c : counts) {
        if (c < 0) {
            throw ValidationError("counts must be non-negative");
        }
    }
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
        throw ValidationError("search interval must be finite with lo < hi");
    }

    double best_ll = -kInf;
    int best_i = -1;
    for (int i = 0; i < kGridPoints; ++i) {
        double x = lo + (hi - lo) * i / (kGridPoints - 1);
        double ll = log_likelihood(fam, povm, counts, x);
        if (ll > best_ll) {
            best_ll = ll;
            best_i = i;
        }
    }
    if (best_i < 0) {
        throw NumericalError(
            "likelihood is undefined everywhere on the grid: an observed outcome has zero "
            "probability at every candidate value");
    }

    double grid_step = (hi - lo) / (kGridPoints - 1);
    double a = std::max(lo, lo + (best_i - 1) * grid_step);
    double b = std::min(hi, lo + (best_i + 1) * grid_step);

    // golden-section search for the maximum on [a, b]
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = log_likelihood(fam, povm, counts, x1);
    double f2 = log_likelihood(fam, povm, counts, x2);
    while (b - a > kGoldenTol) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = log_likelihood(fam, povm, counts, x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = log_likelihood(fam, povm, counts, x1);
        }
    }

    MLResult out;
    out.estimate = 0.5 * (a + b);
    double edge_eps = 1e-6 * (hi - lo);
    out.at_boundary = out.estimate - lo <= edge_eps || hi - out.estimate <= edge_eps;
    return out;
}

ExperimentReport crb_experiment(const Experiment& exp) {
    if (exp.shots < 1) {
        throw ValidationError("shots must be at least 1");
    }
    if (exp.reps < 1) {
        throw ValidationError("repetitions must be at least 1");
    }
    if (!(exp.lo < exp.true_lambda) || !(exp.true_lambda < exp.hi)) {
        throw ValidationError("the true parameter must lie strictly inside the search interval");
    }

    ParamPoint p{exp.true_lambda};
    DensityMatrix rho = exp.fam.evaluate(p);
    RVector probs = born_probs(rho, exp.povm);
    FisherResult fisher = classical_fisher(rho, exp.fam.derivative(p, 0), exp.povm);
    double h = qfi_scalar(exp.fam, p).H;
    if (!(fisher.value > 1e-12) || !(h > 1e-12)) {
        throw NumericalError("the measurement carries no information at the true parameter; "
                             "estimation is impossible");
    }

    ExperimentReport out;
    out.fisher_skipped = fisher.skipped;
    out.crb_classical = 1.0 / (static_cast<double>(exp.shots) * fisher.value);
    out.crb_quantum = 1.0 / (static_cast<double>(exp.shots) * h);

    SplitMix64 root(exp.seed);
    out.estimates.reserve(exp.reps);
    double sum = 0.0;
    for (long r = 0; r < exp.reps; ++r) {
        SplitMix64 stream = root.substream(static_cast<std::uint64_t>(r));
        std::vector<long> counts = sample_outcomes(probs, exp.shots, stream);
        MLResult ml = ml_estimate(exp.fam, exp.povm, counts, exp.lo, exp.hi);
        if (ml.at_boundary) {
            ++out.boundary_hits;
        }
        out.estimates.push_back(ml.estimate);
        sum += ml.estimate;
    }

    const double r_count = static_cast<double>(exp.reps);
    out.mean = sum / r_count;
    out.bias = out.mean - exp.true_lambda;
    if (exp.reps > 1) {
        double ss = 0.0;
        for (double e : out.estimates) {
            double d = e - out.mean;
            ss += d * d;
        }
        out.empirical_var = ss / (r_count - 1.0);
    }
    out.ratio_classical = out.empirical_var / out.crb_classical;
    out.ratio_quantum = out.empirical_var / out.crb_quantum;
    return out;
}

}  // namespace qest
