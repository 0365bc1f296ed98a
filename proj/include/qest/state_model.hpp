#pragma once

// Parametric families of density matrices and their derivatives.

#include "qest/expr.hpp"
#include "qest/linalg.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace qest {

using ParamPoint = std::vector<double>;

// Hermitian, positive semidefinite, unit-trace state. Construction validates
// (trace within 1e-10, eigenvalues >= -1e-10, Hermitian within 1e-10), stores
// the symmetrized input and clamps round-off negative eigenvalues to zero.
class DensityMatrix {
public:
    explicit DensityMatrix(const CMatrix& rho);

    const CMatrix& matrix() const { return rho_; }
    int dim() const { return static_cast<int>(rho_.rows()); }

    static constexpr double kTraceTol = 1e-10;
    static constexpr double kPsdTol = 1e-10;

private:
    CMatrix rho_;
};

// Complex-valued matrix entry given as a pair of real expressions.
struct EntryExpr {
    Expr re;
    std::optional<Expr> im;  // absent means identically zero

    Complex eval(std::span<const double> vars) const {
        return Complex(re.eval(vars), im ? im->eval(vars) : 0.0);
    }
};

using ExprMatrix = std::vector<std::vector<EntryExpr>>;
using ExprVector = std::vector<EntryExpr>;

enum class FamilyKind { unitary, kraus, mixture, pure_path, diagonal, expression };
enum class DerivMode { analytic, central_difference };

struct DerivSpec {
    DerivMode mode = DerivMode::analytic;
    double step = 1e-5;  // central-difference step, also used for expression entries
};

// Immutable declarative model of lambda -> rho_lambda. Evaluation and
// differentiation are pure and safe to call concurrently.
class StateFamily {
public:
    static StateFamily unitary(CMatrix generator, CMatrix rho0, DerivSpec deriv = {},
                               std::vector<std::pair<double, double>> ranges = {});
    static StateFamily kraus(int dim, int nparams, std::vector<ExprMatrix> operators,
                             CMatrix rho0, DerivSpec deriv = {},
                             std::vector<std::pair<double, double>> ranges = {});
    static StateFamily mixture(int nparams, std::vector<CMatrix> states,
                               std::vector<Expr> weights, DerivSpec deriv = {},
                               std::vector<std::pair<double, double>> ranges = {});
    static StateFamily pure_path(int nparams, ExprVector amplitudes, DerivSpec deriv = {},
                                 std::vector<std::pair<double, double>> ranges = {});
    static StateFamily diagonal(int nparams, std::vector<Expr> probs, DerivSpec deriv = {},
                                std::vector<std::pair<double, double>> ranges = {});
    static StateFamily expression(int dim, int nparams, ExprMatrix entries, DerivSpec deriv = {},
                                  std::vector<std::pair<double, double>> ranges = {});

    int dim() const { return dim_; }
    int nparams() const { return nparams_; }
    FamilyKind kind() const { return kind_; }
    const DerivSpec& deriv() const { return deriv_; }
    const std::vector<std::pair<double, double>>& ranges() const { return ranges_; }

    // rho_lambda. Checks the kind-level invariants at the probed point (Kraus
    // completeness within 1e-8, weight/probability normalization within 1e-8,
    // pure-path norm within 1e-8) and returns a validated state.
    DensityMatrix evaluate(const ParamPoint& p) const;

    // d rho / d lambda_mu, Hermitian and traceless. Analytic mode uses the
    // structural rule per kind (exact for unitary, product rule with
    // central-difference entry derivatives otherwise); central_difference
    // mode differences the assembled state.
    CMatrix derivative(const ParamPoint& p, int mu) const;

    // Accessors used by the fast paths in the sld/qfi modules.
    const CMatrix& generator() const;      // unitary kind
    const CMatrix& base_state() const;     // unitary / kraus kind
    CVector pure_state(const ParamPoint& p) const;  // pure_path kind, normalized

private:
    StateFamily() = default;

    CMatrix evaluate_raw(const ParamPoint& p) const;  // before trace normalization
    void check_point(const ParamPoint& p) const;

    int dim_ = 0;
    int nparams_ = 0;
    FamilyKind kind_ = FamilyKind::diagonal;
    DerivSpec deriv_;
    std::vector<std::pair<double, double>> ranges_;

    // kind payloads
    CMatrix generator_;
    CMatrix rho0_;
    std::vector<ExprMatrix> kraus_ops_;
    std::vector<CMatrix> mix_states_;
    std::vector<Expr> weights_;  // mixture weights or diagonal probabilities
    ExprVector amplitudes_;
    ExprMatrix entries_;
};

// Checked wrapper around a raw matrix (the validate_state operation).
DensityMatrix validate_state(const CMatrix& rho);

}  // namespace qest
