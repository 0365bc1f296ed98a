#include "qest/state_model.hpp"

#include "qest/errors.hpp"
#include "util.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

using namespace qest;
using test::max_abs;

namespace {

EntryExpr entry(const char* re) { return EntryExpr{Expr::parse(re), std::nullopt}; }

CMatrix plus_state() {
    CMatrix m(2, 2);
    m << 0.5, 0.5, 0.5, 0.5;
    return m;
}

CMatrix diag2(double a, double b) {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

StateFamily damping_family(DerivSpec deriv = {}) {
    ExprMatrix keep{{entry("1"), entry("0")}, {entry("0"), entry("sqrt(1-x)")}};
    ExprMatrix decay{{entry("0"), entry("sqrt(x)")}, {entry("0"), entry("0")}};
    return StateFamily::kraus(2, 1, {keep, decay}, diag2(0.0, 1.0), deriv, {{0.01, 0.99}});
}

StateFamily rotation_family(DerivSpec deriv = {}) {
    return StateFamily::pure_path(1, {entry("cos(x)"), entry("sin(x)")}, deriv, {{0.01, 1.55}});
}

}  // namespace

TEST_CASE("valid density matrices are stored verbatim") {
    DensityMatrix half(0.5 * CMatrix::Identity(2, 2));
    CHECK(half.dim() == 2);
    CHECK(half.matrix()(0, 0) == Complex(0.5, 0.0));

    DensityMatrix plus(plus_state());
    CHECK(plus.matrix()(0, 1) == Complex(0.5, 0.0));  // no eigensolver round-trip

    DensityMatrix pure(diag2(1.0, 0.0));
    CHECK(pure.matrix()(1, 1) == Complex(0.0, 0.0));
}

TEST_CASE("round-off negative eigenvalues are clamped to zero") {
    DensityMatrix d(diag2(1.00000000005, -5e-11));
    CHECK(d.matrix()(1, 1).real() == 0.0);
    CHECK(d.matrix()(0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(d.matrix().trace() - Complex(1, 0)) < 1e-14);
}

TEST_CASE("invalid density matrices are rejected") {
    CHECK_THROWS_WITH_AS(validate_state(diag2(0.6, 0.6)), doctest::Contains("trace"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(validate_state(diag2(1.5, -0.5)),
                         doctest::Contains("positive semidefinite"), ValidationError);
    CMatrix skew(2, 2);
    skew << 1, 1, 0, 0;
    CHECK_THROWS_WITH_AS(validate_state(skew), doctest::Contains("Hermitian"), ValidationError);
    CHECK_THROWS_AS(validate_state(CMatrix::Zero(2, 3)), ValidationError);
    CMatrix nan = diag2(1.0, 0.0);
    nan(0, 1) = std::nan("");
    CHECK_THROWS_AS(validate_state(nan), ValidationError);
    CHECK_THROWS_WITH_AS(validate_state(CMatrix::Identity(65, 65) / 65.0),
                         doctest::Contains("maximum"), ValidationError);
}

TEST_CASE("diagonal family: evaluation and exact linear derivative") {
    StateFamily fam = StateFamily::diagonal(1, {Expr::parse("x"), Expr::parse("1-x")});
    DensityMatrix rho = fam.evaluate({0.25});
    CHECK(rho.matrix()(0, 0).real() == doctest::Approx(0.25));
    CHECK(rho.matrix()(1, 1).real() == doctest::Approx(0.75));
    CHECK(rho.matrix()(0, 1) == Complex(0, 0));

    CMatrix d = fam.derivative({0.25}, 0);
    CHECK(d(0, 0).real() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(d(1, 1).real() == doctest::Approx(-1.0).epsilon(1e-9));
}

TEST_CASE("unitary family: conjugation, derivative sign, spectrum preservation") {
    CMatrix g = 0.5 * diag2(1.0, -1.0);
    StateFamily fam = StateFamily::unitary(g, plus_state());
    CHECK(fam.kind() == FamilyKind::unitary);
    CHECK(max_abs(fam.evaluate({0.0}).matrix() - plus_state()) < 1e-14);

    // exp(-i l G) rotates the coherence phase by -l
    const double half_pi = std::numbers::pi / 2;
    CHECK(std::abs(fam.evaluate({half_pi}).matrix()(0, 1) - Complex(0.0, -0.5)) < 1e-12);

    CMatrix d0 = fam.derivative({0.0}, 0);
    CHECK(std::abs(d0(0, 1) - Complex(0.0, -0.5)) < 1e-12);
    CHECK(std::abs(d0(1, 0) - Complex(0.0, 0.5)) < 1e-12);
    CHECK(std::abs(d0(0, 0)) < 1e-12);

    CMatrix gx(2, 2);
    gx << 0, 0.5, 0.5, 0;
    StateFamily mixed = StateFamily::unitary(gx, diag2(0.75, 0.25));
    for (double lambda : {0.3, 1.1, 2.7}) {
        EigenSystem es = eigh(mixed.evaluate({lambda}).matrix());
        CHECK(es.values[0] == doctest::Approx(0.25).epsilon(1e-10));
        CHECK(es.values[1] == doctest::Approx(0.75).epsilon(1e-10));
    }
}

TEST_CASE("kraus family: amplitude damping populates the ground state") {
    StateFamily fam = damping_family();
    CHECK(max_abs(fam.evaluate({0.3}).matrix() - diag2(0.3, 0.7)) < 1e-12);
    CMatrix d = fam.derivative({0.3}, 0);
    CHECK(d(0, 0).real() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(d(1, 1).real() == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(max_abs(fam.base_state() - diag2(0.0, 1.0)) == 0.0);
}

TEST_CASE("mixture family: convex combination with expression weights") {
    StateFamily fam = StateFamily::mixture(1, {diag2(1.0, 0.0), plus_state()},
                                           {Expr::parse("x"), Expr::parse("1-x")});
    CMatrix expected = 0.4 * diag2(1.0, 0.0) + 0.6 * plus_state();
    CHECK(max_abs(fam.evaluate({0.4}).matrix() - expected) < 1e-12);
    CMatrix d = fam.derivative({0.4}, 0);
    CHECK(max_abs(d - (diag2(1.0, 0.0) - plus_state())) < 1e-9);
}

TEST_CASE("pure path family: projector onto the normalized vector") {
    StateFamily fam = rotation_family();
    const double quarter_pi = std::numbers::pi / 4;
    CHECK(max_abs(fam.evaluate({quarter_pi}).matrix() - plus_state()) < 1e-12);
    CVector psi = fam.pure_state({quarter_pi});
    CHECK(std::abs(psi.norm() - 1.0) < 1e-14);

    CMatrix d = fam.derivative({quarter_pi}, 0);
    CHECK(d(0, 0).real() == doctest::Approx(-1.0).epsilon(1e-8));
    CHECK(d(1, 1).real() == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(std::abs(d(0, 1)) < 1e-8);
}

TEST_CASE("expression family: entries evaluated verbatim") {
    ExprMatrix entries{{entry("1-x"), entry("0")}, {entry("0"), entry("x")}};
    StateFamily fam = StateFamily::expression(2, 1, entries);
    CHECK(max_abs(fam.evaluate({0.3}).matrix() - diag2(0.7, 0.3)) < 1e-12);
    CMatrix d = fam.derivative({0.3}, 0);
    CHECK(d(0, 0).real() == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(d(1, 1).real() == doctest::Approx(1.0).epsilon(1e-9));

    // complex off-diagonals through explicit imaginary parts
    ExprMatrix cx{{entry("0.5"), EntryExpr{Expr::parse("0"), Expr::parse("-0.25")}},
                  {EntryExpr{Expr::parse("0"), Expr::parse("0.25")}, entry("0.5")}};
    StateFamily cfam = StateFamily::expression(2, 1, cx);
    CHECK(std::abs(cfam.evaluate({0.1}).matrix()(0, 1) - Complex(0.0, -0.25)) < 1e-14);
}

TEST_CASE("analytic and finite-difference derivatives agree on every kind") {
    DerivSpec fd{DerivMode::central_difference, 1e-5};
    const ParamPoint p{0.3};

    auto check_pair = [&](const StateFamily& an, const StateFamily& num, const ParamPoint& at) {
        CMatrix da = an.derivative(at, 0);
        CMatrix dn = num.derivative(at, 0);
        CHECK(max_abs(da - dn) < 1e-6);
        for (const CMatrix& d : {da, dn}) {
            CHECK(is_hermitian(d, 1e-10));
            CHECK(std::abs(d.trace()) < 1e-8);
        }
    };

    CMatrix gx(2, 2);
    gx << 0, 0.5, 0.5, 0;
    check_pair(StateFamily::unitary(gx, diag2(0.75, 0.25)),
               StateFamily::unitary(gx, diag2(0.75, 0.25), fd), p);
    check_pair(damping_family(), damping_family(fd), p);
    check_pair(rotation_family(), rotation_family(fd), p);
    check_pair(StateFamily::diagonal(1, {Expr::parse("x^2"), Expr::parse("1-x^2")}),
               StateFamily::diagonal(1, {Expr::parse("x^2"), Expr::parse("1-x^2")}, fd), p);
    check_pair(StateFamily::mixture(1, {diag2(1.0, 0.0), plus_state()},
                                    {Expr::parse("sin(x)^2"), Expr::parse("cos(x)^2")}),
               StateFamily::mixture(1, {diag2(1.0, 0.0), plus_state()},
                                    {Expr::parse("sin(x)^2"), Expr::parse("cos(x)^2")}, fd),
               p);
    ExprMatrix entries{{entry("1-x"), entry("x/2")}, {entry("x/2"), entry("x")}};
    check_pair(StateFamily::expression(2, 1, entries),
               StateFamily::expression(2, 1, entries, fd), p);
}

TEST_CASE("kind-level invariants are checked at the probed point") {
    ExprMatrix half{{entry("0.5"), entry("0")}, {entry("0"), entry("0.5")}};
    StateFamily leaky = StateFamily::kraus(2, 1, {half}, diag2(0.0, 1.0));
    CHECK_THROWS_WITH_AS(leaky.evaluate({0.1}), doctest::Contains("completeness"),
                         ValidationError);

    StateFamily badmix = StateFamily::mixture(1, {diag2(1.0, 0.0), diag2(0.0, 1.0)},
                                              {Expr::parse("x"), Expr::parse("1-2*x")});
    CHECK_THROWS_WITH_AS(badmix.evaluate({0.2}), doctest::Contains("sum"), ValidationError);

    StateFamily badprob = StateFamily::diagonal(1, {Expr::parse("x"), Expr::parse("1-2*x")});
    CHECK_THROWS_AS(badprob.evaluate({0.2}), ValidationError);

    StateFamily shrink = StateFamily::pure_path(1, {entry("x"), entry("0")});
    CHECK_THROWS_WITH_AS(shrink.evaluate({0.5}), doctest::Contains("norm"), ValidationError);

    ExprMatrix drift{{entry("x"), entry("0")}, {entry("0"), entry("x")}};
    StateFamily badtrace = StateFamily::expression(2, 1, drift);
    CHECK_THROWS_WITH_AS(badtrace.evaluate({0.3}), doctest::Contains("trace"), ValidationError);

    // normalization fine at the kind level, but the state itself is invalid
    StateFamily negprob = StateFamily::diagonal(1, {Expr::parse("x"), Expr::parse("1-x")});
    CHECK_THROWS_WITH_AS(negprob.evaluate({-0.1}), doctest::Contains("positive semidefinite"),
                         ValidationError);
}

TEST_CASE("factories validate their inputs") {
    CMatrix skew(2, 2);
    skew << 0, 1, 0, 0;
    CHECK_THROWS_AS(StateFamily::unitary(skew, 0.5 * CMatrix::Identity(2, 2)), ValidationError);
    CHECK_THROWS_AS(StateFamily::unitary(CMatrix::Identity(3, 3), 0.5 * CMatrix::Identity(2, 2)),
                    ValidationError);
    CHECK_THROWS_AS(StateFamily::kraus(2, 1, {ExprMatrix{{entry("1")}}}, diag2(0.0, 1.0)),
                    ValidationError);
    CHECK_THROWS_AS(StateFamily::diagonal(1, {Expr::parse("x2"), Expr::parse("1-x2")}),
                    ValidationError);
    CHECK_THROWS_AS(StateFamily::diagonal(0, {Expr::parse("1")}), ValidationError);
    CHECK_THROWS_AS(
        StateFamily::diagonal(1, {Expr::parse("x"), Expr::parse("1-x")}, {}, {{0.5, 0.1}}),
        ValidationError);
    CHECK_THROWS_AS(StateFamily::diagonal(1, {Expr::parse("x"), Expr::parse("1-x")},
                                          DerivSpec{DerivMode::analytic, -1.0}),
                    ValidationError);
    CHECK_THROWS_AS(StateFamily::mixture(1, {diag2(1.0, 0.0)}, {}), ValidationError);
}

TEST_CASE("parameter points are validated") {
    StateFamily fam = StateFamily::diagonal(1, {Expr::parse("x"), Expr::parse("1-x")});
    CHECK_THROWS_AS(fam.evaluate({0.1, 0.2}), ValidationError);
    CHECK_THROWS_AS(fam.evaluate({std::nan("")}), ValidationError);
    CHECK_THROWS_AS(fam.derivative({0.1}, 1), ValidationError);
    CHECK_THROWS_AS(fam.derivative({0.1}, -1), ValidationError);
    CHECK_THROWS_AS(fam.pure_state({0.1}), ValidationError);
    CHECK_THROWS_AS(fam.generator(), ValidationError);
    CHECK_THROWS_AS(fam.base_state(), ValidationError);
}
