#include "qest/multiparam.hpp"

#include "qest/errors.hpp"
#include "qest/sld.hpp"

#include <cmath>
#include <sstream>

namespace qest {

namespace {

constexpr double kPsdSlack = -1e-8;
constexpr double kMaxCondition = 1e12;

QFIMatrix checked_info(RMatrix h) {
    h = 0.5 * (h + h.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<RMatrix> solver(h);
    double min_eig = solver.eigenvalues().minCoeff();
    if (min_eig < kPsdSlack) {
        std::ostringstream os;
        os << "information matrix has eigenvalue " << min_eig << "; it must be PSD";
        throw NumericalError(os.str());
    }
    QFIMatrix out;
    out.n = static_cast<int>(h.rows());
    out.H = std::move(h);
    return out;
}

}  // namespace

QFIMatrix qfi_matrix(const StateFamily& fam, const ParamPoint& p) {
    const int n = fam.nparams();
    DensityMatrix rho = fam.evaluate(p);

    // Each entry reuses two SLDs, so compute all of them once up front.
    std::vector<CMatrix> slds;
    slds.reserve(n);
    for (int mu = 0; mu < n; ++mu) {
        slds.push_back(sld_eigen(rho, fam.derivative(p, mu)).op);
    }

    RMatrix h(n, n);
    for (int mu = 0; mu < n; ++mu) {
        for (int nu = mu; nu < n; ++nu) {
            CMatrix anti = 0.5 * (slds[mu] * slds[nu] + slds[nu] * slds[mu]);
            double value = (rho.matrix() * anti).trace().real();
            h(mu, nu) = value;
            h(nu, mu) = value;
        }
    }
    return checked_info(std::move(h));
}

CRBBounds crb_bounds(const QFIMatrix& info, long measurements) {
    if (measurements < 1) {
        throw ValidationError("the number of measurements must be at least 1");
    }
    if (info.n < 1 || info.H.rows() != info.n || info.H.cols() != info.n) {
        throw ValidationError("information matrix shape is inconsistent");
    }
    Eigen::SelfAdjointEigenSolver<RMatrix> solver(info.H);
    const RVector& w = solver.eigenvalues();
    double max_abs = w.cwiseAbs().maxCoeff();
    double min_abs = w.cwiseAbs().minCoeff();
    if (min_abs <= 0.0 || max_abs / min_abs >= kMaxCondition) {
        Eigen::Index null_index = 0;
        w.cwiseAbs().minCoeff(&null_index);
        std::ostringstream os;
        os << "information matrix is singular or ill-conditioned; null direction approximately (";
        for (int i = 0; i < info.n; ++i) {
            os << (i ? ", " : "") << solver.eigenvectors()(i, null_index);
        }
        os << ")";
        throw NumericalError(os.str());
    }

    RMatrix inverse = solver.eigenvectors() * w.cwiseInverse().asDiagonal() *
                      solver.eigenvectors().transpose();
    CRBBounds out;
    out.covariance = inverse / static_cast<double>(measurements);
    out.per_parameter = out.covariance.diagonal();
    out.condition = max_abs / min_abs;
    out.note = "scalar bounds are tight per parameter; the full covariance matrix bound may "
               "not be achievable by a single measurement";
    return out;
}

QFIMatrix reparametrize(const QFIMatrix& info, const RMatrix& b) {
    if (b.rows() != info.n || b.cols() != info.n) {
        throw ValidationError("coordinate-change matrix shape does not match the information "
                              "matrix");
    }
    if (!b.allFinite()) {
        throw ValidationError("coordinate-change matrix has non-finite entries");
    }
    return checked_info(b * info.H * b.transpose());
}

RMatrix reparam_from_map(const std::vector<Expr>& coord_map,
                         const std::vector<double>& tilde_point, double step) {
    const int n = static_cast<int>(coord_map.size());
    if (n < 1 || tilde_point.size() != coord_map.size()) {
        throw ValidationError("coordinate map and evaluation point sizes must match");
    }
    if (!(step > 0.0) || !std::isfinite(step)) {
        throw ValidationError("finite-difference step must be positive and finite");
    }
    for (const Expr& e : coord_map) {
        if (e.max_var_index() > n) {
            throw ValidationError("coordinate map references a variable beyond its arity");
        }
    }
    RMatrix b(n, n);
    std::vector<double> plus(tilde_point.begin(), tilde_point.end());
    std::vector<double> minus(tilde_point.begin(), tilde_point.end());
    for (int mu = 0; mu < n; ++mu) {
        plus[mu] += step;
        minus[mu] -= step;
        for (int nu = 0; nu < n; ++nu) {
            b(mu, nu) = (coord_map[nu].eval(plus) - coord_map[nu].eval(minus)) / (2.0 * step);
        }
        plus[mu] = tilde_point[mu];
        minus[mu] = tilde_point[mu];
    }
    return b;
}

}  // namespace qest
