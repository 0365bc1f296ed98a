#include "qest/geometry.hpp"

#include "qest/errors.hpp"
#include "qest/qfi.hpp"
#include "qest/sld.hpp"

#include <cmath>
#include <sstream>

namespace qest {

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
    if (rho.dim() != sigma.dim()) {
        throw ValidationError("fidelity needs two states of equal dimension");
    }
    CMatrix root = mat_func(rho.matrix(), [](double x) { return std::sqrt(x); });
    CMatrix inner = hermitize(root * sigma.matrix() * root);
    CMatrix outer_root = mat_func(inner, [](double x) { return std::sqrt(x); });
    double trace = outer_root.trace().real();
    double f = trace * trace;
    if (f > 1.0 + 1e-10) {
        std::ostringstream os;
        os << "fidelity " << f << " exceeds 1 beyond round-off";
        throw NumericalError(os.str());
    }
    return std::clamp(f, 0.0, 1.0);
}

double bures_distance_sq(const DensityMatrix& rho, const DensityMatrix& sigma) {
    return 2.0 * (1.0 - std::sqrt(fidelity(rho, sigma)));
}

namespace {

int support_rank(const DensityMatrix& rho) {
    EigenSystem es = eigh(rho.matrix());
    int rank = 0;
    for (Eigen::Index i = 0; i < es.values.size(); ++i) {
        if (es.values[i] > kRankTol) {
            ++rank;
        }
    }
    return rank;
}

}  // namespace

BuresReport bures_metric_check(const StateFamily& fam, const ParamPoint& p, double step) {
    if (fam.nparams() != 1) {
        throw ValidationError("the metric probe is single-parameter");
    }
    if (!(step >= 1e-6) || !(step <= 1e-2)) {
        throw ValidationError("step must lie in [1e-6, 1e-2]");
    }

    DensityMatrix at = fam.evaluate(p);
    DensityMatrix full = fam.evaluate({p[0] + step});
    DensityMatrix half = fam.evaluate({p[0] + 0.5 * step});

    double d_full = bures_distance_sq(at, full);
    double d_half = bures_distance_sq(at, half);
    double m_full = d_full / (step * step);
    double m_half = d_half / (0.25 * step * step);

    BuresReport out;
    out.fidelity = fidelity(at, full);
    out.bures_sq = d_full;
    out.metric_fd = 2.0 * m_half - m_full;
    out.qfi_quarter = 0.25 * qfi_scalar(fam, p).H;
    out.rel_err = std::abs(out.metric_fd - out.qfi_quarter) / std::max(out.qfi_quarter, 1e-12);

    int rank_at = support_rank(at);
    int rank_shifted = support_rank(full);
    if (rank_at != rank_shifted) {
        out.rank_warning = true;
        std::ostringstream os;
        os << "support rank changes from " << rank_at << " to " << rank_shifted
           << " across the step; the metric-information identity may fail at support boundaries";
        out.warning = os.str();
    }
    return out;
}

}  // namespace qest
