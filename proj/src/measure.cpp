#include "qest/measure.hpp"

#include "qest/errors.hpp"

#include <cmath>
#include <sstream>

namespace qest {

namespace {

constexpr double kProbFloor = 1e-12;
constexpr double kCompletenessTol = 1e-8;
constexpr double kMergeTol = 1e-8;

}  // namespace

POVM POVM::create(std::vector<CMatrix> elements, std::vector<std::string> labels) {
    if (elements.empty()) {
        throw ValidationError("a POVM needs at least one element");
    }
    const Eigen::Index d = elements.front().rows();
    if (d < 1 || d > kMaxDim) {
        throw ValidationError("POVM element dimension out of range");
    }
    CMatrix sum = CMatrix::Zero(d, d);
    for (std::size_t x = 0; x < elements.size(); ++x) {
        CMatrix& e = elements[x];
        if (e.rows() != d || e.cols() != d) {
            throw ValidationError("POVM elements must be square matrices of one common dimension");
        }
        if (!e.allFinite()) {
            throw ValidationError("POVM element has non-finite entries");
        }
        if (!is_hermitian(e)) {
            std::ostringstream os;
            os << "POVM element " << x << " is not Hermitian";
            throw ValidationError(os.str());
        }
        e = hermitize(e);
        double min_eig = eigh(e).values.minCoeff();
        if (min_eig < -1e-10) {
            std::ostringstream os;
            os << "POVM element " << x << " is not positive semidefinite: min eigenvalue is "
               << min_eig;
            throw ValidationError(os.str());
        }
        sum += e;
    }
    double defect = (sum - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
    if (defect > kCompletenessTol) {
        std::ostringstream os;
        os << "POVM elements do not resolve the identity: max |sum - I| element is " << defect;
        throw ValidationError(os.str());
    }

    if (labels.empty()) {
        labels.reserve(elements.size());
        for (std::size_t x = 0; x < elements.size(); ++x) {
            labels.push_back(std::to_string(x));
        }
    } else if (labels.size() != elements.size()) {
        throw ValidationError("POVM label count does not match the element count");
    }

    POVM out;
    out.elements = std::move(elements);
    out.labels = std::move(labels);
    return out;
}

RVector born_probs(const DensityMatrix& rho, const POVM& povm) {
    if (povm.dim() != rho.dim()) {
        throw ValidationError("state and POVM dimensions differ");
    }
    RVector p(povm.size());
    for (int x = 0; x < povm.size(); ++x) {
        double px = (povm.elements[x] * rho.matrix()).trace().real();
        if (px < 0.0) {
            if (px < -kProbFloor) {
                std::ostringstream os;
                os << "outcome " << x << " has probability " << px;
                throw NumericalError(os.str());
            }
            px = 0.0;
        }
        p[x] = px;
    }
    return p;
}

FisherResult classical_fisher(const DensityMatrix& rho, const CMatrix& drho, const POVM& povm) {
    RVector p = born_probs(rho, povm);
    FisherResult out;
    bool any = false;
    for (int x = 0; x < povm.size(); ++x) {
        if (p[x] <= kProbFloor) {
            ++out.skipped;
            continue;
        }
        any = true;
        double dp = (drho * povm.elements[x]).trace().real();
        out.value += dp * dp / p[x];
    }
    if (!any) {
        throw NumericalError("every outcome probability is below 1e-12; Fisher information "
                             "is undefined for this measurement");
    }
    return out;
}

FisherResult classical_fisher(const StateFamily& fam, const POVM& povm, const ParamPoint& p) {
    if (fam.nparams() != 1) {
        throw ValidationError("classical Fisher information here is single-parameter");
    }
    return classical_fisher(fam.evaluate(p), fam.derivative(p, 0), povm);
}

POVM optimal_povm(const StateFamily& fam, const ParamPoint& p) {
    if (fam.nparams() != 1) {
        throw ValidationError("the optimal measurement is computed per scalar parameter");
    }
    DensityMatrix rho = fam.evaluate(p);
    SLDOperator sld = sld_eigen(rho, fam.derivative(p, 0));
    EigenSystem es = eigh(sld.op);
    const Eigen::Index d = es.values.size();

    // Group eigenvalues within the merge tolerance (values are sorted).
    std::vector<CMatrix> elements;
    std::vector<std::string> labels;
    Eigen::Index start = 0;
    while (start < d) {
        Eigen::Index stop = start + 1;
        while (stop < d && es.values[stop] - es.values[stop - 1] <= kMergeTol) {
            ++stop;
        }
        CMatrix proj = CMatrix::Zero(d, d);
        double value = 0.0;
        for (Eigen::Index k = start; k < stop; ++k) {
            proj += es.vectors.col(k) * es.vectors.col(k).adjoint();
            value += es.values[k];
        }
        value /= static_cast<double>(stop - start);
        elements.push_back(hermitize(proj));
        std::ostringstream label;
        label << "L=" << value;
        labels.push_back(label.str());
        start = stop;
    }
    return POVM::create(std::move(elements), std::move(labels));
}

EstimatorOp optimal_estimator(const StateFamily& fam, const ParamPoint& p) {
    if (fam.nparams() != 1) {
        throw ValidationError("the optimal estimator is computed per scalar parameter");
    }
    DensityMatrix rho = fam.evaluate(p);
    SLDOperator sld = sld_eigen(rho, fam.derivative(p, 0));
    double h = (rho.matrix() * sld.op * sld.op).trace().real();
    if (!(h > 1e-12)) {
        std::ostringstream os;
        os << "information " << h << " is too small to invert; the estimator op is undefined";
        throw NumericalError(os.str());
    }
    EstimatorOp out;
    out.at_lambda = p[0];
    out.op = hermitize(p[0] * CMatrix::Identity(rho.dim(), rho.dim()) + sld.op / h);
    return out;
}

CMatrix haar_unitary(int dim, SplitMix64& rng) {
    if (dim < 1 || dim > kMaxDim) {
        throw ValidationError("unitary dimension out of range");
    }
    CMatrix g(dim, dim);
    for (int i = 0; i < dim; ++i) {
        for (int j = 0; j < dim; ++j) {
            g(i, j) = Complex(rng.next_normal(), rng.next_normal());
        }
    }
    Eigen::HouseholderQR<CMatrix> qr(g);
    CMatrix q = qr.householderQ();
    CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    // Fix the phase ambiguity so the distribution is exactly Haar.
    for (int j = 0; j < dim; ++j) {
        Complex rjj = r(j, j);
        double mag = std::abs(rjj);
        q.col(j) *= (mag > 0.0) ? rjj / mag : Complex(1.0, 0.0);
    }
    return q;
}

POVM projective_povm(const CMatrix& unitary) {
    const Eigen::Index d = unitary.rows();
    if (unitary.cols() != d || d < 1) {
        throw ValidationError("projective POVM needs a square unitary");
    }
    double defect = (unitary.adjoint() * unitary - CMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
    if (defect > 1e-8) {
        std::ostringstream os;
        os << "matrix is not unitary: max |U^dagger U - I| element is " << defect;
        throw ValidationError(os.str());
    }
    std::vector<CMatrix> elements;
    elements.reserve(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        elements.push_back(hermitize(unitary.col(j) * unitary.col(j).adjoint()));
    }
    return POVM::create(std::move(elements));
}

POVM bin_povm(const POVM& povm, const std::vector<int>& assignment, int nbins) {
    if (static_cast<int>(assignment.size()) != povm.size()) {
        throw ValidationError("bin assignment length does not match the POVM size");
    }
    if (nbins < 1) {
        throw ValidationError("need at least one bin");
    }
    std::vector<CMatrix> elements(nbins, CMatrix::Zero(povm.dim(), povm.dim()));
    for (int x = 0; x < povm.size(); ++x) {
        int b = assignment[x];
        if (b < 0 || b >= nbins) {
            throw ValidationError("bin assignment index out of range");
        }
        elements[b] += povm.elements[x];
    }
    return POVM::create(std::move(elements));
}

}  // namespace qest
