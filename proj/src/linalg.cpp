#include "qest/linalg.hpp"

#include "qest/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace qest {

double hermiticity_defect(const CMatrix& a) {
    return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const CMatrix& a, double tol) {
    return a.rows() == a.cols() && hermiticity_defect(a) <= tol;
}

CMatrix hermitize(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }

EigenSystem eigh(const CMatrix& a) {
    if (a.rows() != a.cols() || a.rows() < 1) {
        throw ValidationError("eigh: matrix must be square and non-empty");
    }
    if (!a.allFinite()) {
        throw ValidationError("eigh: matrix has non-finite entries");
    }
    const double defect = hermiticity_defect(a);
    if (defect > kHermTol) {
        std::ostringstream os;
        os << "eigh: matrix is not Hermitian, max |A - A^H| entry = " << defect;
        throw ValidationError(os.str());
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> solver(hermitize(a));
    if (solver.info() != Eigen::Success) {
        throw NumericalError("eigh: eigensolver did not converge");
    }
    return EigenSystem{solver.eigenvalues(), solver.eigenvectors()};
}

CMatrix mat_func(const CMatrix& a, const std::function<double(double)>& f) {
    EigenSystem es = eigh(a);
    RVector mapped(es.values.size());
    for (Eigen::Index i = 0; i < es.values.size(); ++i) {
        double lam = es.values[i];
        if (lam < 0.0 && lam >= -kEigenClamp) lam = 0.0;
        const double y = f(lam);
        if (!std::isfinite(y)) {
            std::ostringstream os;
            os << "mat_func: function undefined at eigenvalue " << lam;
            throw NumericalError(os.str());
        }
        mapped[i] = y;
    }
    return es.vectors * mapped.asDiagonal() * es.vectors.adjoint();
}

CMatrix generator_exp(const CMatrix& g, double s) {
    if (s == 0.0) {
        return CMatrix::Identity(g.rows(), g.cols());
    }
    EigenSystem es = eigh(g);
    CVector phases(es.values.size());
    for (Eigen::Index i = 0; i < es.values.size(); ++i) {
        phases[i] = std::exp(Complex(0.0, s * es.values[i]));
    }
    return es.vectors * phases.asDiagonal() * es.vectors.adjoint();
}

}  // namespace qest
