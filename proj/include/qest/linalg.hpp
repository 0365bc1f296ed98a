#pragma once

// Dense complex matrix kernel: Hermitian eigendecomposition and matrix
// functions on top of Eigen. Everything here is a pure function; matrices
// are capped at dimension 64.

#include <Eigen/Dense>

#include <complex>
#include <functional>

namespace qest {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

inline constexpr int kMaxDim = 64;
inline constexpr double kHermTol = 1e-10;    // max |A - A^H| entry accepted
inline constexpr double kEigenClamp = 1e-12; // eigenvalues in [-clamp, 0) -> 0

struct EigenSystem {
    RVector values;  // ascending
    CMatrix vectors; // orthonormal columns, values[i] <-> vectors.col(i)
};

// Max-entry norm of A - A^H.
double hermiticity_defect(const CMatrix& a);

bool is_hermitian(const CMatrix& a, double tol = kHermTol);

// (A + A^H) / 2
CMatrix hermitize(const CMatrix& a);

// Hermitian eigendecomposition with ascending eigenvalues. Rejects
// non-Hermitian input (defect > kHermTol) and symmetrizes before solving.
EigenSystem eigh(const CMatrix& a);

// V f(Lambda) V^H. Eigenvalues in [-kEigenClamp, 0) are clamped to zero
// before f is applied; a non-finite f value raises NumericalError.
CMatrix mat_func(const CMatrix& a, const std::function<double(double)>& f);

// exp(i s G) for Hermitian G, via the spectral decomposition.
CMatrix generator_exp(const CMatrix& g, double s);

}  // namespace qest
