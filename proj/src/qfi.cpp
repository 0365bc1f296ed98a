#include "qest/qfi.hpp"

#include "qest/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace qest {

namespace {

constexpr double kGapTol = 1e-8;
constexpr double kEvalFloor = 1e-12;

void require_scalar(const StateFamily& fam) {
    if (fam.nparams() != 1) {
        throw ValidationError("this quantity is defined for single-parameter families");
    }
}

double finite_or_throw(double v, double at) {
    if (!std::isfinite(v)) {
        std::ostringstream os;
        os << "integrand is not finite at " << at;
        throw NumericalError(os.str());
    }
    return v;
}

struct Quad {
    const std::function<double(double)>& f;
    long splits_left;

    double simpson(double a, double b, double fa, double fm, double fb) const {
        return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    }

    double refine(double a, double b, double fa, double fm, double fb, double whole, double tol) {
        double m = 0.5 * (a + b);
        double lm = 0.5 * (a + m);
        double rm = 0.5 * (m + b);
        double flm = finite_or_throw(f(lm), lm);
        double frm = finite_or_throw(f(rm), rm);
        double left = simpson(a, m, fa, flm, fm);
        double right = simpson(m, b, fm, frm, fb);
        double delta = left + right - whole;
        if (std::abs(delta) <= 15.0 * tol || b - a <= 1e-14 * std::abs(a)) {
            return left + right + delta / 15.0;
        }
        if ((splits_left -= 2) < 0) {
            throw NumericalError("quadrature did not converge within the subdivision budget");
        }
        return refine(a, m, fa, flm, fm, left, 0.5 * tol) +
               refine(m, b, fm, frm, fb, right, 0.5 * tol);
    }
};

}  // namespace

double integrate(const std::function<double(double)>& f, double a, double b, double tol,
                 long max_splits) {
    if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
        throw ValidationError("integration needs a finite interval with a < b");
    }
    if (!(tol > 0.0)) {
        throw ValidationError("quadrature tolerance must be positive");
    }
    double fa = finite_or_throw(f(a), a);
    double fb = finite_or_throw(f(b), b);
    double m = 0.5 * (a + b);
    double fm = finite_or_throw(f(m), m);
    Quad quad{f, max_splits};
    double whole = quad.simpson(a, b, fa, fm, fb);
    return quad.refine(a, b, fa, fm, fb, whole, tol);
}

double qfi_from_state(const DensityMatrix& rho, const CMatrix& drho, double rank_tol) {
    EigenSystem es = eigh(rho.matrix());
    const Eigen::Index d = es.values.size();
    CMatrix dtilde = es.vectors.adjoint() * hermitize(drho) * es.vectors;
    double h = 0.0;
    for (Eigen::Index m = 0; m < d; ++m) {
        for (Eigen::Index n = 0; n < d; ++n) {
            double sum = es.values[n] + es.values[m];
            if (sum > rank_tol) {
                h += 2.0 * std::norm(dtilde(m, n)) / sum;
            }
        }
    }
    return h;
}

QFIReport qfi_scalar(const StateFamily& fam, const ParamPoint& p) {
    require_scalar(fam);
    QFIReport out;
    out.H = qfi_from_state(fam.evaluate(p), fam.derivative(p, 0), kRankTol);
    out.method = QFIMethod::generic;
    return out;
}

QFIReport qfi_decomposed(const StateFamily& fam, const ParamPoint& p) {
    require_scalar(fam);
    const double h = fam.deriv().step;

    EigenSystem center = eigh(fam.evaluate(p).matrix());
    const Eigen::Index d = center.values.size();
    for (Eigen::Index n = 1; n < d; ++n) {
        double gap = center.values[n] - center.values[n - 1];
        if (gap <= kGapTol) {
            std::ostringstream os;
            os << "eigenvalue gap " << gap
               << " is too small; the classical/quantum split needs a non-degenerate spectrum";
            throw NumericalError(os.str());
        }
    }

    ParamPoint plus = p;
    ParamPoint minus = p;
    plus[0] += h;
    minus[0] -= h;
    EigenSystem above = eigh(fam.evaluate(plus).matrix());
    EigenSystem below = eigh(fam.evaluate(minus).matrix());

    // Ascending order matches branches across lambda +- h (the gap test keeps
    // orderings stable); the residual gauge freedom is a per-vector phase,
    // removed by aligning each displaced vector against the central one.
    CMatrix dvec(d, d);
    RVector dval(d);
    for (Eigen::Index n = 0; n < d; ++n) {
        dval[n] = (above.values[n] - below.values[n]) / (2.0 * h);
        CVector va = above.vectors.col(n);
        CVector vb = below.vectors.col(n);
        Complex oa = center.vectors.col(n).dot(va);
        Complex ob = center.vectors.col(n).dot(vb);
        if (std::abs(oa) < 0.5 || std::abs(ob) < 0.5) {
            throw NumericalError(
                "eigenvector branches could not be followed across the difference step");
        }
        va *= std::abs(oa) / oa;
        vb *= std::abs(ob) / ob;
        dvec.col(n) = (va - vb) / (2.0 * h);
    }

    QFIReport out;
    out.method = QFIMethod::decomposed;
    for (Eigen::Index n = 0; n < d; ++n) {
        if (center.values[n] > kEvalFloor) {
            out.classical_part += dval[n] * dval[n] / center.values[n];
        }
    }
    for (Eigen::Index n = 0; n < d; ++n) {
        for (Eigen::Index m = 0; m < d; ++m) {
            if (n == m) {
                continue;
            }
            double sum = center.values[n] + center.values[m];
            if (sum <= kRankTol) {
                continue;
            }
            double diff = center.values[n] - center.values[m];
            double sigma = diff * diff / sum;
            out.quantum_part += 2.0 * sigma * std::norm(center.vectors.col(m).dot(dvec.col(n)));
        }
    }
    out.H = out.classical_part + out.quantum_part;

    double reference = qfi_scalar(fam, p).H;
    if (std::abs(out.H - reference) > 1e-6 * std::max(1.0, std::abs(reference))) {
        std::ostringstream os;
        os << "classical+quantum split " << out.H << " disagrees with the direct value "
           << reference;
        throw NumericalError(os.str());
    }
    return out;
}

QFIReport qfi_pure(const StateFamily& fam, const ParamPoint& p) {
    if (fam.kind() != FamilyKind::pure_path) {
        throw ValidationError("this route needs a state-vector family");
    }
    require_scalar(fam);
    const double h = fam.deriv().step;
    ParamPoint plus = p;
    ParamPoint minus = p;
    plus[0] += h;
    minus[0] -= h;
    CVector psi = fam.pure_state(p);
    CVector dpsi = (fam.pure_state(plus) - fam.pure_state(minus)) / (2.0 * h);

    Complex overlap = dpsi.dot(psi);  // <dpsi|psi>
    double value = 4.0 * (dpsi.squaredNorm() + (overlap * overlap).real());

    QFIReport out;
    out.H = std::max(0.0, value);
    out.quantum_part = out.H;  // spectrum is constant along a pure path
    out.method = QFIMethod::pure;
    return out;
}

QFIReport qfi_unitary(const StateFamily& fam) {
    if (fam.kind() != FamilyKind::unitary) {
        throw ValidationError("this route needs a unitary family");
    }
    const CMatrix& g = fam.generator();
    EigenSystem es = eigh(fam.base_state());
    const Eigen::Index d = es.values.size();

    QFIReport out;
    out.method = QFIMethod::unitary;
    double purity = (fam.base_state() * fam.base_state()).trace().real();
    if (purity >= 1.0 - 1e-10) {
        CVector psi = es.vectors.col(d - 1);  // top eigenvector carries the state
        double g2 = (psi.adjoint() * g * g * psi).value().real();
        double g1 = (psi.adjoint() * g * psi).value().real();
        out.H = 4.0 * (g2 - g1 * g1);
    } else {
        CMatrix gtilde = es.vectors.adjoint() * g * es.vectors;
        for (Eigen::Index n = 0; n < d; ++n) {
            for (Eigen::Index m = 0; m < d; ++m) {
                if (n == m) {
                    continue;
                }
                double sum = es.values[n] + es.values[m];
                if (sum <= kRankTol) {
                    continue;
                }
                double diff = es.values[n] - es.values[m];
                out.H += 2.0 * (diff * diff / sum) * std::norm(gtilde(n, m));
            }
        }
    }
    out.H = std::max(0.0, out.H);
    out.quantum_part = out.H;  // unitary evolution preserves the spectrum
    return out;
}

double qfi_unitary_mixing_form(const StateFamily& fam) {
    if (fam.kind() != FamilyKind::unitary) {
        throw ValidationError("this route needs a unitary family");
    }
    const CMatrix& g = fam.generator();
    const CMatrix& rho0 = fam.base_state();
    EigenSystem es = eigh(rho0);
    const Eigen::Index d = es.values.size();

    double mean = (rho0 * g).trace().real();
    CMatrix dg = g - mean * CMatrix::Identity(d, d);
    double fluct = 4.0 * (dg * dg * rho0).trace().real();

    CMatrix gtilde = es.vectors.adjoint() * g * es.vectors;
    double correction = 0.0;
    for (Eigen::Index n = 0; n < d; ++n) {
        double rn = es.values[n];
        if (rn <= kEvalFloor) {
            continue;
        }
        double gkg = 0.0;  // <phi_n| G K_n G |phi_n>
        for (Eigen::Index m = 0; m < d; ++m) {
            double sum = rn + es.values[m];
            if (sum > kRankTol) {
                gkg += es.values[m] / sum * std::norm(gtilde(n, m));
            }
        }
        correction += rn * (mean * mean - 2.0 * gkg);
    }
    return fluct + 4.0 * correction;
}

double Estimability::measurements(double delta) const {
    if (!(delta > 0.0) || !std::isfinite(delta)) {
        throw ValidationError("target relative error must be positive and finite");
    }
    if (!bounded) {
        return std::numeric_limits<double>::infinity();
    }
    return std::ceil(9.0 / (delta * delta * snr));
}

Estimability estimability(double lambda, double H) {
    if (!std::isfinite(lambda)) {
        throw ValidationError("parameter value must be finite");
    }
    if (!(H >= 0.0) || !std::isfinite(H)) {
        throw ValidationError("information must be non-negative and finite");
    }
    Estimability out;
    out.snr = lambda * lambda * H;
    out.bounded = out.snr > 0.0;
    if (!out.bounded) {
        out.snr = 0.0;
    }
    return out;
}

Prior::Prior(Expr density, double lo, double hi) : density_(std::move(density)), lo_(lo), hi_(hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
        throw ValidationError("prior support must be a finite interval with lo < hi");
    }
    if (density_.max_var_index() > 1) {
        throw ValidationError("prior density must depend on a single variable");
    }
    step_ = (hi_ - lo_) * 1e-6;

    constexpr int kGrid = 1001;
    for (int i = 0; i < kGrid; ++i) {
        double x = lo_ + (hi_ - lo_) * i / (kGrid - 1);
        double z = this->density(x);
        if (z < -1e-12) {
            std::ostringstream os;
            os << "prior density is negative at " << x << " (value " << z << ")";
            throw ValidationError(os.str());
        }
    }
    double total = integrate([this](double x) { return this->density(x); }, lo_, hi_, 1e-9);
    if (std::abs(total - 1.0) > 1e-6) {
        std::ostringstream os;
        os << "prior integrates to " << total << " on its support, expected 1 within 1e-6";
        throw ValidationError(os.str());
    }
}

double Prior::density(double lambda) const {
    double args[1] = {lambda};
    return density_.eval(args);
}

double Prior::log_derivative(double lambda) const {
    double zp = density(lambda + step_);
    double zm = density(lambda - step_);
    if (!(zp > 0.0) || !(zm > 0.0)) {
        std::ostringstream os;
        os << "prior density vanishes near " << lambda
           << "; the prior-information integrand diverges there";
        throw NumericalError(os.str());
    }
    return (std::log(zp) - std::log(zm)) / (2.0 * step_);
}

VanTreesReport van_trees(const StateFamily& fam, const Prior& prior, long measurements,
                         const POVM* povm) {
    require_scalar(fam);
    if (measurements < 1) {
        throw ValidationError("the number of measurements must be at least 1");
    }

    auto h_at = [&fam](double x) { return qfi_scalar(fam, {x}).H; };
    auto f_at = [&fam, povm](double x) {
        return classical_fisher(fam, *povm, {x}).value;
    };

    VanTreesReport out;
    out.prior_information = integrate(
        [&prior](double x) {
            double g = prior.log_derivative(x);
            return prior.density(x) * g * g;
        },
        prior.lo(), prior.hi(), 1e-8);

    double m = static_cast<double>(measurements);
    double avg_h = integrate([&](double x) { return prior.density(x) * h_at(x); }, prior.lo(),
                             prior.hi(), 1e-8);
    out.z_h = m * avg_h + out.prior_information;
    if (povm != nullptr) {
        double avg_f = integrate([&](double x) { return prior.density(x) * f_at(x); }, prior.lo(),
                                 prior.hi(), 1e-8);
        out.z_f = m * avg_f + out.prior_information;
    } else {
        out.z_f = out.z_h;
    }
    if (!(out.z_h > 0.0)) {
        throw NumericalError("total Bayesian information is not positive; no variance bound");
    }
    out.bound = 1.0 / out.z_h;
    return out;
}

}  // namespace qest
