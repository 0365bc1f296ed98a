#pragma once

// Symmetric logarithmic derivative: the Hermitian L solving
// (L rho + rho L)/2 = drho on the support of rho.

#include "qest/state_model.hpp"

namespace qest {

inline constexpr double kRankTol = 1e-10;  // on eigenvalue pair-sums

struct SLDOperator {
    CMatrix op;            // Hermitian; kernel-kernel block of rho set to zero
    int support_rank = 0;  // number of eigenvalues of rho above rank_tol
    double rank_tol = kRankTol;
};

// Eigenbasis route: L = 2 sum_{nm} <psi_m|drho|psi_n>/(r_n+r_m) |psi_m><psi_n|,
// keeping only index pairs with r_n + r_m > rank_tol. Works for any rank.
SLDOperator sld_eigen(const DensityMatrix& rho, const CMatrix& drho, double rank_tol = kRankTol);

// Integral route: L = 2 int_0^inf exp(-rho t) drho exp(-rho t) dt, evaluated
// in the eigenbasis of rho where each pair integrates in closed form to
// 1/(r_n + r_m). Requires strictly positive rho (min eigenvalue > 1e-8);
// kept as a separately derived code path to cross-check sld_eigen.
SLDOperator sld_integral(const DensityMatrix& rho, const CMatrix& drho);

// Max-entry norm of (L rho + rho L)/2 - drho over the blocks the defining
// equation constrains (everything except the kernel-kernel block).
double lyapunov_residual(const SLDOperator& sld, const DensityMatrix& rho, const CMatrix& drho);

// Unitary-family shortcut: L_lambda = U_lambda L0 U_lambda^dag with L0 built
// from the generator matrix elements in the eigenbasis of the base state,
// L0_mn = 2i (r_m - r_n)/(r_m + r_n) G_mn.
SLDOperator sld_unitary(const StateFamily& fam, const ParamPoint& p, double rank_tol = kRankTol);

}  // namespace qest
