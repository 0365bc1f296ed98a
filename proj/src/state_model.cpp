#include "qest/state_model.hpp"

#include "qest/errors.hpp"

#include <cmath>
#include <sstream>
#include <utility>

namespace qest {

namespace {

constexpr double kKindTol = 1e-8;  // per-kind normalization / completeness checks

void check_dim(int dim) {
    if (dim < 1) {
        throw ValidationError("state dimension must be positive");
    }
    if (dim > kMaxDim) {
        std::ostringstream os;
        os << "state dimension " << dim << " exceeds the supported maximum " << kMaxDim;
        throw ValidationError(os.str());
    }
}

void check_nparams(int nparams) {
    if (nparams < 1) {
        throw ValidationError("family must have at least one parameter");
    }
}

void check_deriv(const DerivSpec& deriv) {
    if (!(deriv.step > 0.0) || !std::isfinite(deriv.step)) {
        throw ValidationError("finite-difference step must be positive and finite");
    }
}

void check_ranges(const std::vector<std::pair<double, double>>& ranges, int nparams) {
    if (ranges.empty()) {
        return;
    }
    if (static_cast<int>(ranges.size()) != nparams) {
        throw ValidationError("parameter range list length does not match the parameter count");
    }
    for (const auto& [lo, hi] : ranges) {
        if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
            throw ValidationError("each parameter range must be a finite interval with lo < hi");
        }
    }
}

void check_entry_vars(const EntryExpr& e, int nparams, const char* what) {
    int used = e.re.max_var_index();
    if (e.im) {
        used = std::max(used, e.im->max_var_index());
    }
    if (used > nparams) {
        std::ostringstream os;
        os << what << " references variable x" << used << " but the family has " << nparams
           << " parameter(s)";
        throw ValidationError(os.str());
    }
}

// d/d(vars[mu]) of an entry expression, central difference with step h.
Complex entry_derivative(const EntryExpr& e, const ParamPoint& p, int mu, double h) {
    ParamPoint plus = p;
    ParamPoint minus = p;
    plus[mu] += h;
    minus[mu] -= h;
    return (e.eval(plus) - e.eval(minus)) / (2.0 * h);
}

double real_derivative(const Expr& e, const ParamPoint& p, int mu, double h) {
    ParamPoint plus = p;
    ParamPoint minus = p;
    plus[mu] += h;
    minus[mu] -= h;
    return (e.eval(plus) - e.eval(minus)) / (2.0 * h);
}

}  // namespace

DensityMatrix::DensityMatrix(const CMatrix& rho) {
    if (rho.rows() != rho.cols() || rho.rows() < 1) {
        throw ValidationError("density matrix must be square and non-empty");
    }
    check_dim(static_cast<int>(rho.rows()));
    if (!rho.allFinite()) {
        throw ValidationError("density matrix has non-finite entries");
    }
    double defect = hermiticity_defect(rho);
    if (defect > kTraceTol) {
        std::ostringstream os;
        os << "density matrix is not Hermitian: max |rho - rho^dagger| element is " << defect;
        throw ValidationError(os.str());
    }
    CMatrix sym = hermitize(rho);
    double trace = sym.trace().real();
    if (std::abs(trace - 1.0) > kTraceTol) {
        std::ostringstream os;
        os << "density matrix trace is " << trace << ", expected 1 within " << kTraceTol;
        throw ValidationError(os.str());
    }
    EigenSystem es = eigh(sym);
    double min_eig = es.values.minCoeff();
    if (min_eig < -kPsdTol) {
        std::ostringstream os;
        os << "density matrix is not positive semidefinite: min eigenvalue is " << min_eig;
        throw ValidationError(os.str());
    }
    if (min_eig < 0.0) {
        // Round-off negativity: clamp and renormalize. Exact inputs skip
        // this branch so they are stored verbatim.
        RVector clamped = es.values.cwiseMax(0.0);
        sym = es.vectors * clamped.asDiagonal().toDenseMatrix().cast<Complex>() *
              es.vectors.adjoint();
        sym = hermitize(sym);
        sym /= sym.trace().real();
    }
    rho_ = std::move(sym);
}

DensityMatrix validate_state(const CMatrix& rho) { return DensityMatrix(rho); }

StateFamily StateFamily::unitary(CMatrix generator, CMatrix rho0, DerivSpec deriv,
                                 std::vector<std::pair<double, double>> ranges) {
    if (generator.rows() != generator.cols()) {
        throw ValidationError("generator must be square");
    }
    if (!generator.allFinite()) {
        throw ValidationError("generator has non-finite entries");
    }
    if (!is_hermitian(generator)) {
        std::ostringstream os;
        os << "generator is not Hermitian: max |G - G^dagger| element is "
           << hermiticity_defect(generator);
        throw ValidationError(os.str());
    }
    DensityMatrix base(rho0);
    if (generator.rows() != base.matrix().rows()) {
        throw ValidationError("generator and base state dimensions differ");
    }
    check_deriv(deriv);
    check_ranges(ranges, 1);

    StateFamily fam;
    fam.dim_ = base.dim();
    fam.nparams_ = 1;
    fam.kind_ = FamilyKind::unitary;
    fam.deriv_ = deriv;
    fam.ranges_ = std::move(ranges);
    fam.generator_ = hermitize(generator);
    fam.rho0_ = base.matrix();
    return fam;
}

StateFamily StateFamily::kraus(int dim, int nparams, std::vector<ExprMatrix> operators,
                               CMatrix rho0, DerivSpec deriv,
                               std::vector<std::pair<double, double>> ranges) {
    check_dim(dim);
    check_nparams(nparams);
    if (operators.empty()) {
        throw ValidationError("kraus family needs at least one operator");
    }
    for (std::size_t k = 0; k < operators.size(); ++k) {
        const ExprMatrix& op = operators[k];
        if (static_cast<int>(op.size()) != dim) {
            throw ValidationError("kraus operator row count does not match the dimension");
        }
        for (const auto& row : op) {
            if (static_cast<int>(row.size()) != dim) {
                throw ValidationError("kraus operator column count does not match the dimension");
            }
            for (const EntryExpr& e : row) {
                check_entry_vars(e, nparams, "kraus operator entry");
            }
        }
    }
    DensityMatrix base(rho0);
    if (base.dim() != dim) {
        throw ValidationError("kraus base state dimension does not match the family dimension");
    }
    check_deriv(deriv);
    check_ranges(ranges, nparams);

    StateFamily fam;
    fam.dim_ = dim;
    fam.nparams_ = nparams;
    fam.kind_ = FamilyKind::kraus;
    fam.deriv_ = deriv;
    fam.ranges_ = std::move(ranges);
    fam.kraus_ops_ = std::move(operators);
    fam.rho0_ = base.matrix();
    return fam;
}

StateFamily StateFamily::mixture(int nparams, std::vector<CMatrix> states,
                                 std::vector<Expr> weights, DerivSpec deriv,
                                 std::vector<std::pair<double, double>> ranges) {
    check_nparams(nparams);
    if (states.empty() || states.size() != weights.size()) {
        throw ValidationError("mixture needs matching, non-empty state and weight lists");
    }
    std::vector<CMatrix> checked;
    checked.reserve(states.size());
    int dim = 0;
    for (const CMatrix& s : states) {
        DensityMatrix d(s);
        if (dim == 0) {
            dim = d.dim();
        } else if (d.dim() != dim) {
            throw ValidationError("mixture components have differing dimensions");
        }
        checked.push_back(d.matrix());
    }
    for (const Expr& w : weights) {
        if (w.max_var_index() > nparams) {
            throw ValidationError("mixture weight references a variable beyond the parameter count");
        }
    }
    check_deriv(deriv);
    check_ranges(ranges, nparams);

    StateFamily fam;
    fam.dim_ = dim;
    fam.nparams_ = nparams;
    fam.kind_ = FamilyKind::mixture;
    fam.deriv_ = deriv;
    fam.ranges_ = std::move(ranges);
    fam.mix_states_ = std::move(checked);
    fam.weights_ = std::move(weights);
    return fam;
}

StateFamily StateFamily::pure_path(int nparams, ExprVector amplitudes, DerivSpec deriv,
                                   std::vector<std::pair<double, double>> ranges) {
    check_nparams(nparams);
    check_dim(static_cast<int>(amplitudes.size()));
    for (const EntryExpr& e : amplitudes) {
        check_entry_vars(e, nparams, "state-vector amplitude");
    }
    check_deriv(deriv);
    check_ranges(ranges, nparams);

    StateFamily fam;
    fam.dim_ = static_cast<int>(amplitudes.size());
    fam.nparams_ = nparams;
    fam.kind_ = FamilyKind::pure_path;
    fam.deriv_ = deriv;
    fam.ranges_ = std::move(ranges);
    fam.amplitudes_ = std::move(amplitudes);
    return fam;
}

StateFamily StateFamily::diagonal(int nparams, std::vector<Expr> probs, DerivSpec deriv,
                                  std::vector<std::pair<double, double>> ranges) {
    check_nparams(nparams);
    check_dim(static_cast<int>(probs.size()));
    for (const Expr& p : probs) {
        if (p.max_var_index() > nparams) {
            throw ValidationError(
                "diagonal probability references a variable beyond the parameter count");
        }
    }
    check_deriv(deriv);
    check_ranges(ranges, nparams);

    StateFamily fam;
    fam.dim_ = static_cast<int>(probs.size());
    fam.nparams_ = nparams;
    fam.kind_ = FamilyKind::diagonal;
    fam.deriv_ = deriv;
    fam.ranges_ = std::move(ranges);
    fam.weights_ = std::move(probs);
    return fam;
}

StateFamily StateFamily::expression(int dim, int nparams, ExprMatrix entries, DerivSpec deriv,
                                    std::vector<std::pair<double, double>> ranges) {
    check_dim(dim);
    check_nparams(nparams);
    if (static_cast<int>(entries.size()) != dim) {
        throw ValidationError("expression matrix row count does not match the dimension");
    }
    for (const auto& row : entries) {
        if (static_cast<int>(row.size()) != dim) {
            throw ValidationError("expression matrix column count does not match the dimension");
        }
        for (const EntryExpr& e : row) {
            check_entry_vars(e, nparams, "matrix entry");
        }
    }
    check_deriv(deriv);
    check_ranges(ranges, nparams);

    StateFamily fam;
    fam.dim_ = dim;
    fam.nparams_ = nparams;
    fam.kind_ = FamilyKind::expression;
    fam.deriv_ = deriv;
    fam.ranges_ = std::move(ranges);
    fam.entries_ = std::move(entries);
    return fam;
}

void StateFamily::check_point(const ParamPoint& p) const {
    if (static_cast<int>(p.size()) != nparams_) {
        std::ostringstream os;
        os << "parameter point has " << p.size() << " entries, family expects " << nparams_;
        throw ValidationError(os.str());
    }
    for (double v : p) {
        if (!std::isfinite(v)) {
            throw ValidationError("parameter point has a non-finite entry");
        }
    }
}

CVector StateFamily::pure_state(const ParamPoint& p) const {
    if (kind_ != FamilyKind::pure_path) {
        throw ValidationError("pure_state is only defined for state-vector families");
    }
    check_point(p);
    CVector psi(dim_);
    for (int i = 0; i < dim_; ++i) {
        psi[i] = amplitudes_[i].eval(p);
    }
    double norm = psi.norm();
    if (std::abs(norm - 1.0) > kKindTol) {
        std::ostringstream os;
        os << "state vector norm is " << norm << " at the probed point, expected 1 within "
           << kKindTol;
        throw ValidationError(os.str());
    }
    return psi / norm;
}

CMatrix StateFamily::evaluate_raw(const ParamPoint& p) const {
    switch (kind_) {
        case FamilyKind::unitary: {
            CMatrix u = generator_exp(generator_, -p[0]);
            return u * rho0_ * u.adjoint();
        }
        case FamilyKind::kraus: {
            CMatrix completeness = CMatrix::Zero(dim_, dim_);
            CMatrix rho = CMatrix::Zero(dim_, dim_);
            for (const ExprMatrix& op : kraus_ops_) {
                CMatrix m(dim_, dim_);
                for (int i = 0; i < dim_; ++i) {
                    for (int j = 0; j < dim_; ++j) {
                        m(i, j) = op[i][j].eval(p);
                    }
                }
                completeness += m.adjoint() * m;
                rho += m * rho0_ * m.adjoint();
            }
            double defect =
                (completeness - CMatrix::Identity(dim_, dim_)).cwiseAbs().maxCoeff();
            if (defect > kKindTol) {
                std::ostringstream os;
                os << "kraus completeness violated at the probed point: max |sum K^dagger K - I| "
                      "element is "
                   << defect;
                throw ValidationError(os.str());
            }
            return rho;
        }
        case FamilyKind::mixture: {
            double sum = 0.0;
            CMatrix rho = CMatrix::Zero(dim_, dim_);
            for (std::size_t i = 0; i < weights_.size(); ++i) {
                double w = weights_[i].eval(p);
                sum += w;
                rho += w * mix_states_[i];
            }
            if (std::abs(sum - 1.0) > kKindTol) {
                std::ostringstream os;
                os << "mixture weights sum to " << sum << " at the probed point, expected 1 within "
                   << kKindTol;
                throw ValidationError(os.str());
            }
            return rho;
        }
        case FamilyKind::pure_path: {
            CVector psi = pure_state(p);
            return psi * psi.adjoint();
        }
        case FamilyKind::diagonal: {
            double sum = 0.0;
            CMatrix rho = CMatrix::Zero(dim_, dim_);
            for (int i = 0; i < dim_; ++i) {
                double w = weights_[i].eval(p);
                sum += w;
                rho(i, i) = w;
            }
            if (std::abs(sum - 1.0) > kKindTol) {
                std::ostringstream os;
                os << "diagonal probabilities sum to " << sum
                   << " at the probed point, expected 1 within " << kKindTol;
                throw ValidationError(os.str());
            }
            return rho;
        }
        case FamilyKind::expression: {
            CMatrix rho(dim_, dim_);
            for (int i = 0; i < dim_; ++i) {
                for (int j = 0; j < dim_; ++j) {
                    rho(i, j) = entries_[i][j].eval(p);
                }
            }
            double trace = rho.trace().real();
            if (std::abs(trace - 1.0) > kKindTol) {
                std::ostringstream os;
                os << "matrix trace is " << trace << " at the probed point, expected 1 within "
                   << kKindTol;
                throw ValidationError(os.str());
            }
            return rho;
        }
    }
    throw ValidationError("unknown family kind");
}

DensityMatrix StateFamily::evaluate(const ParamPoint& p) const {
    check_point(p);
    CMatrix rho = evaluate_raw(p);
    double trace = rho.trace().real();
    if (!(trace > 0.0) || !std::isfinite(trace)) {
        throw NumericalError("family evaluation produced a non-positive trace");
    }
    // The per-kind checks above bound the deviation at 1e-8; renormalizing
    // here tightens it to the 1e-10 state contract.
    return DensityMatrix(rho / trace);
}

CMatrix StateFamily::derivative(const ParamPoint& p, int mu) const {
    check_point(p);
    if (mu < 0 || mu >= nparams_) {
        std::ostringstream os;
        os << "parameter index " << mu << " out of range for a family with " << nparams_
           << " parameter(s)";
        throw ValidationError(os.str());
    }
    const double h = deriv_.step;

    if (deriv_.mode == DerivMode::central_difference) {
        ParamPoint plus = p;
        ParamPoint minus = p;
        plus[mu] += h;
        minus[mu] -= h;
        CMatrix diff = (evaluate(plus).matrix() - evaluate(minus).matrix()) / (2.0 * h);
        return hermitize(diff);
    }

    switch (kind_) {
        case FamilyKind::unitary: {
            // rho_l = U rho0 U^dagger with U = exp(-i l G), so
            // d rho / d l = -i [G, rho_l].
            CMatrix rho = evaluate(p).matrix();
            CMatrix comm = generator_ * rho - rho * generator_;
            return hermitize(Complex(0.0, -1.0) * comm);
        }
        case FamilyKind::kraus: {
            CMatrix raw = CMatrix::Zero(dim_, dim_);
            CMatrix draw = CMatrix::Zero(dim_, dim_);
            for (const ExprMatrix& op : kraus_ops_) {
                CMatrix m(dim_, dim_);
                CMatrix dm(dim_, dim_);
                for (int i = 0; i < dim_; ++i) {
                    for (int j = 0; j < dim_; ++j) {
                        m(i, j) = op[i][j].eval(p);
                        dm(i, j) = entry_derivative(op[i][j], p, mu, h);
                    }
                }
                raw += m * rho0_ * m.adjoint();
                draw += dm * rho0_ * m.adjoint() + m * rho0_ * dm.adjoint();
            }
            double t = raw.trace().real();
            double dt = draw.trace().real();
            return hermitize(draw / t - raw * (dt / (t * t)));
        }
        case FamilyKind::mixture: {
            CMatrix raw = CMatrix::Zero(dim_, dim_);
            CMatrix draw = CMatrix::Zero(dim_, dim_);
            for (std::size_t i = 0; i < weights_.size(); ++i) {
                raw += weights_[i].eval(p) * mix_states_[i];
                draw += real_derivative(weights_[i], p, mu, h) * mix_states_[i];
            }
            double t = raw.trace().real();
            double dt = draw.trace().real();
            return hermitize(draw / t - raw * (dt / (t * t)));
        }
        case FamilyKind::pure_path: {
            CVector psi(dim_);
            CVector dpsi(dim_);
            for (int i = 0; i < dim_; ++i) {
                psi[i] = amplitudes_[i].eval(p);
                dpsi[i] = entry_derivative(amplitudes_[i], p, mu, h);
            }
            double n = psi.squaredNorm();
            double dn = 2.0 * (psi.dot(dpsi)).real();
            CMatrix raw = psi * psi.adjoint();
            CMatrix draw = dpsi * psi.adjoint() + psi * dpsi.adjoint();
            return hermitize(draw / n - raw * (dn / (n * n)));
        }
        case FamilyKind::diagonal: {
            CMatrix raw = CMatrix::Zero(dim_, dim_);
            CMatrix draw = CMatrix::Zero(dim_, dim_);
            for (int i = 0; i < dim_; ++i) {
                raw(i, i) = weights_[i].eval(p);
                draw(i, i) = real_derivative(weights_[i], p, mu, h);
            }
            double t = raw.trace().real();
            double dt = draw.trace().real();
            return hermitize(draw / t - raw * (dt / (t * t)));
        }
        case FamilyKind::expression: {
            CMatrix raw(dim_, dim_);
            CMatrix draw(dim_, dim_);
            for (int i = 0; i < dim_; ++i) {
                for (int j = 0; j < dim_; ++j) {
                    raw(i, j) = entries_[i][j].eval(p);
                    draw(i, j) = entry_derivative(entries_[i][j], p, mu, h);
                }
            }
            double t = raw.trace().real();
            double dt = draw.trace().real();
            return hermitize(draw / t - raw * (dt / (t * t)));
        }
    }
    throw ValidationError("unknown family kind");
}

const CMatrix& StateFamily::generator() const {
    if (kind_ != FamilyKind::unitary) {
        throw ValidationError("generator is only defined for unitary families");
    }
    return generator_;
}

const CMatrix& StateFamily::base_state() const {
    if (kind_ != FamilyKind::unitary && kind_ != FamilyKind::kraus) {
        throw ValidationError("base state is only defined for unitary and kraus families");
    }
    return rho0_;
}

}  // namespace qest
