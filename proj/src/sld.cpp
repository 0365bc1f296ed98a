#include "qest/sld.hpp"

#include "qest/errors.hpp"

#include <cmath>
#include <sstream>

namespace qest {

namespace {

constexpr double kDrhoTraceTol = 1e-8;

void check_drho(const DensityMatrix& rho, const CMatrix& drho) {
    if (drho.rows() != rho.matrix().rows() || drho.cols() != rho.matrix().cols()) {
        throw ValidationError("state and derivative dimensions differ");
    }
    if (!drho.allFinite()) {
        throw ValidationError("state derivative has non-finite entries");
    }
    double defect = hermiticity_defect(drho);
    if (defect > kHermTol) {
        std::ostringstream os;
        os << "state derivative is not Hermitian: max |D - D^dagger| element is " << defect;
        throw ValidationError(os.str());
    }
    double trace = std::abs(drho.trace().real()) + std::abs(drho.trace().imag());
    if (trace > kDrhoTraceTol) {
        std::ostringstream os;
        os << "state derivative has trace " << drho.trace().real() << ", expected 0 within "
           << kDrhoTraceTol;
        throw ValidationError(os.str());
    }
}

int count_support(const RVector& evals, double rank_tol) {
    int rank = 0;
    for (Eigen::Index i = 0; i < evals.size(); ++i) {
        if (evals[i] > rank_tol) {
            ++rank;
        }
    }
    return rank;
}

}  // namespace

SLDOperator sld_eigen(const DensityMatrix& rho, const CMatrix& drho, double rank_tol) {
    check_drho(rho, drho);
    if (!(rank_tol >= 0.0) || !std::isfinite(rank_tol)) {
        throw ValidationError("rank tolerance must be non-negative and finite");
    }
    EigenSystem es = eigh(rho.matrix());
    const Eigen::Index d = es.values.size();
    CMatrix dtilde = es.vectors.adjoint() * hermitize(drho) * es.vectors;

    CMatrix ltilde = CMatrix::Zero(d, d);
    bool any_pair = false;
    for (Eigen::Index m = 0; m < d; ++m) {
        for (Eigen::Index n = 0; n < d; ++n) {
            double sum = es.values[n] + es.values[m];
            if (sum > rank_tol) {
                ltilde(m, n) = 2.0 * dtilde(m, n) / sum;
                any_pair = true;
            }
        }
    }
    if (!any_pair) {
        throw NumericalError(
            "every eigenvalue pair-sum is below the rank tolerance; the state has no usable "
            "support");
    }

    SLDOperator out;
    out.op = hermitize(es.vectors * ltilde * es.vectors.adjoint());
    out.support_rank = count_support(es.values, rank_tol);
    out.rank_tol = rank_tol;
    return out;
}

SLDOperator sld_integral(const DensityMatrix& rho, const CMatrix& drho) {
    check_drho(rho, drho);
    EigenSystem es = eigh(rho.matrix());
    const Eigen::Index d = es.values.size();
    constexpr double kPositivityFloor = 1e-8;
    double min_eig = es.values.minCoeff();
    if (min_eig <= kPositivityFloor) {
        std::ostringstream os;
        os << "integral form needs a strictly positive state (min eigenvalue " << min_eig
           << " <= " << kPositivityFloor << "); use the eigenbasis route for rank-deficient states";
        throw NumericalError(os.str());
    }

    // In the eigenbasis of rho, exp(-rho t) is diagonal with entries
    // exp(-r_n t), so entry (m, n) of the integrand decays as
    // exp(-(r_n + r_m) t) and the time integral is 1/(r_n + r_m).
    CMatrix dtilde = es.vectors.adjoint() * hermitize(drho) * es.vectors;
    CMatrix ltilde(d, d);
    for (Eigen::Index m = 0; m < d; ++m) {
        for (Eigen::Index n = 0; n < d; ++n) {
            double decay_rate = es.values[n] + es.values[m];
            ltilde(m, n) = 2.0 * dtilde(m, n) / decay_rate;
        }
    }

    SLDOperator out;
    out.op = hermitize(es.vectors * ltilde * es.vectors.adjoint());
    out.support_rank = static_cast<int>(d);
    out.rank_tol = kRankTol;
    return out;
}

double lyapunov_residual(const SLDOperator& sld, const DensityMatrix& rho, const CMatrix& drho) {
    const CMatrix& r = rho.matrix();
    CMatrix residual = 0.5 * (sld.op * r + r * sld.op) - drho;

    // Drop the kernel-kernel block: the defining equation does not constrain
    // it, and finite-difference derivatives leave harmless noise there.
    EigenSystem es = eigh(r);
    CMatrix in_basis = es.vectors.adjoint() * residual * es.vectors;
    double worst = 0.0;
    for (Eigen::Index m = 0; m < es.values.size(); ++m) {
        for (Eigen::Index n = 0; n < es.values.size(); ++n) {
            bool kernel_pair = es.values[m] <= sld.rank_tol && es.values[n] <= sld.rank_tol;
            if (!kernel_pair) {
                worst = std::max(worst, std::abs(in_basis(m, n)));
            }
        }
    }
    return worst;
}

SLDOperator sld_unitary(const StateFamily& fam, const ParamPoint& p, double rank_tol) {
    if (fam.kind() != FamilyKind::unitary) {
        throw ValidationError("this route needs a unitary family");
    }
    if (p.size() != 1) {
        throw ValidationError("unitary families have exactly one parameter");
    }
    if (!(rank_tol >= 0.0) || !std::isfinite(rank_tol)) {
        throw ValidationError("rank tolerance must be non-negative and finite");
    }

    EigenSystem es = eigh(fam.base_state());
    const Eigen::Index d = es.values.size();
    CMatrix gtilde = es.vectors.adjoint() * fam.generator() * es.vectors;

    CMatrix l0 = CMatrix::Zero(d, d);
    bool any_pair = false;
    for (Eigen::Index m = 0; m < d; ++m) {
        for (Eigen::Index n = 0; n < d; ++n) {
            double sum = es.values[m] + es.values[n];
            if (sum > rank_tol) {
                any_pair = true;
                if (m != n) {
                    double weight = (es.values[m] - es.values[n]) / sum;
                    l0(m, n) = Complex(0.0, 2.0) * weight * gtilde(m, n);
                }
            }
        }
    }
    if (!any_pair) {
        throw NumericalError(
            "every eigenvalue pair-sum is below the rank tolerance; the state has no usable "
            "support");
    }

    CMatrix l0_full = es.vectors * l0 * es.vectors.adjoint();
    CMatrix u = generator_exp(fam.generator(), -p[0]);

    SLDOperator out;
    out.op = hermitize(u * l0_full * u.adjoint());
    out.support_rank = count_support(es.values, rank_tol);
    out.rank_tol = rank_tol;
    return out;
}

}  // namespace qest
