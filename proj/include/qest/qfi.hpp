#pragma once

// Quantum Fisher information for scalar parameters, its classical/quantum
// split, estimability figures, and the Bayesian (Van Trees) bound.

#include "qest/expr.hpp"
#include "qest/measure.hpp"
#include "qest/sld.hpp"
#include "qest/state_model.hpp"

#include <functional>
#include <optional>

namespace qest {

enum class QFIMethod { generic, pure, unitary, decomposed };

struct QFIReport {
    double H = 0.0;
    double classical_part = 0.0;  // meaningful for the decomposed route
    double quantum_part = 0.0;
    QFIMethod method = QFIMethod::generic;
};

// Eigen-kernel form H = 2 sum_{nm} |<psi_m|drho|psi_n>|^2 / (r_n + r_m)
// over pairs with r_n + r_m > rank_tol.
double qfi_from_state(const DensityMatrix& rho, const CMatrix& drho, double rank_tol = kRankTol);

// Generic single-parameter QFI through the eigen-kernel.
QFIReport qfi_scalar(const StateFamily& fam, const ParamPoint& p);

// Split H into the Fisher information of the eigenvalue distribution and the
// eigenvector ("truly quantum") part, sigma_nm = (r_n - r_m)^2 / (r_n + r_m).
// Needs a non-degenerate spectrum (min gap > 1e-8); eigen-paths are followed
// by eigenvalue continuity with phase-aligned vectors.
QFIReport qfi_decomposed(const StateFamily& fam, const ParamPoint& p);

// Pure-state shortcut H = 4[<dpsi|dpsi> + (<dpsi|psi>)^2] on the normalized
// vector path.
QFIReport qfi_pure(const StateFamily& fam, const ParamPoint& p);

// Unitary-family QFI; independent of the parameter value. Pure base state:
// H = 4<\Delta G^2>; mixed: H = 2 sum_{n != m} sigma_nm |G_nm|^2 in the
// eigenbasis of the base state.
QFIReport qfi_unitary(const StateFamily& fam);

// Alternative mixed-state route H = 4 Tr[dG^2 rho0]
//   + 4 sum_n r_n (<G>^2 - 2 <phi_n| G K_n G |phi_n>),
// K_n = sum_m r_m/(r_n + r_m) |phi_m><phi_m|. Kept solely as a numerical
// comparison hook for qfi_unitary (see README for the observed agreement);
// not used as a computational path and not asserted in tests.
double qfi_unitary_mixing_form(const StateFamily& fam);

struct Estimability {
    double snr = 0.0;      // lambda^2 H, dimensionless signal-to-noise ratio
    bool bounded = false;  // false when snr vanishes

    // Measurements needed to reach relative error delta: ceil(9/(delta^2 snr));
    // +infinity when unbounded. Throws on delta <= 0.
    double measurements(double delta) const;
};

Estimability estimability(double lambda, double H);

// Adaptive Simpson quadrature, absolute tolerance `tol`, at most `max_splits`
// interval subdivisions before giving up with a numerical error.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-8,
                 long max_splits = 1000000);

// Normalized prior density on a closed interval. Construction checks
// normalization (within 1e-6 by quadrature) and non-negativity on a grid.
class Prior {
public:
    Prior(Expr density, double lo, double hi);

    double lo() const { return lo_; }
    double hi() const { return hi_; }
    double density(double lambda) const;

    // d/dlambda log z by central difference; errors where z <= 0.
    double log_derivative(double lambda) const;

private:
    Expr density_;
    double lo_;
    double hi_;
    double step_;
};

struct VanTreesReport {
    double z_f = 0.0;     // M * int z F  + prior information (POVM route)
    double z_h = 0.0;     // M * int z H  + prior information (quantum route)
    double prior_information = 0.0;  // int z (d log z)^2
    double bound = 0.0;   // 1 / z_h, the Bayesian variance bound
};

// Z = M * int z(l) F(l) dl + int z(l) (d log z)^2 dl over the prior support.
// Without a POVM the measurement term uses F = H; with one it uses that
// measurement's Fisher information (so z_f <= z_h).
VanTreesReport van_trees(const StateFamily& fam, const Prior& prior, long measurements,
                         const POVM* povm = nullptr);

}  // namespace qest
