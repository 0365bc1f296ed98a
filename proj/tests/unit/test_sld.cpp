#include "qest/sld.hpp"

#include "qest/errors.hpp"
#include "util.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace qest;
using test::max_abs;
using test::random_state;
using test::random_traceless;

namespace {

CMatrix diag2(double a, double b) {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

CMatrix sigma_y() {
    CMatrix m(2, 2);
    m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
    return m;
}

}  // namespace

TEST_CASE("diagonal state: the logarithmic derivative is the score") {
    DensityMatrix rho(diag2(0.25, 0.75));
    SLDOperator sld = sld_eigen(rho, diag2(1.0, -1.0));
    CHECK(sld.op(0, 0).real() == doctest::Approx(4.0).epsilon(1e-12));
    CHECK(sld.op(1, 1).real() == doctest::Approx(-4.0 / 3.0).epsilon(1e-12));
    CHECK(std::abs(sld.op(0, 1)) < 1e-14);
    CHECK(sld.support_rank == 2);
    CHECK(lyapunov_residual(sld, rho, diag2(1.0, -1.0)) < 1e-12);
}

TEST_CASE("pure state support: kernel block zeroed, equation still solved") {
    DensityMatrix rho(diag2(1.0, 0.0));
    CMatrix sx(2, 2);
    sx << 0, 1, 1, 0;
    SLDOperator sld = sld_eigen(rho, sx);
    CHECK(max_abs(sld.op - 2.0 * sx) < 1e-12);
    CHECK(sld.support_rank == 1);
    CHECK(sld.op(1, 1) == Complex(0, 0));  // kernel-kernel block
    CHECK(lyapunov_residual(sld, rho, sx) < 1e-12);
}

TEST_CASE("projector path at the balanced point") {
    CMatrix plus(2, 2);
    plus << 0.5, 0.5, 0.5, 0.5;
    CMatrix drho = diag2(-1.0, 1.0);
    SLDOperator sld = sld_eigen(DensityMatrix(plus), drho);
    CHECK(sld.op(0, 0).real() == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(sld.op(1, 1).real() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(std::abs(sld.op(0, 1)) < 1e-12);
}

TEST_CASE("integral and eigenbasis routes agree on full-rank states") {
    SplitMix64 rng(0x51d51dULL);
    for (int dim : {2, 3, 5}) {
        for (int rep = 0; rep < 5; ++rep) {
            DensityMatrix rho = random_state(dim, rng);
            CMatrix drho = random_traceless(dim, rng);
            SLDOperator a = sld_eigen(rho, drho);
            SLDOperator b = sld_integral(rho, drho);
            CHECK(max_abs(a.op - b.op) < 1e-9);
            CHECK(lyapunov_residual(a, rho, drho) < 1e-10);
            CHECK(is_hermitian(a.op, 1e-10));
            CHECK(std::abs((rho.matrix() * a.op).trace()) < 1e-10);
        }
    }
}

TEST_CASE("integral route refuses rank-deficient states") {
    CMatrix sx(2, 2);
    sx << 0, 1, 1, 0;
    CHECK_THROWS_WITH_AS(sld_integral(DensityMatrix(diag2(1.0, 0.0)), sx),
                         doctest::Contains("eigenbasis"), NumericalError);
}

TEST_CASE("derivative input is validated") {
    DensityMatrix rho(diag2(0.5, 0.5));
    CMatrix skew(2, 2);
    skew << 0, 1, 0, 0;
    CHECK_THROWS_AS(sld_eigen(rho, skew), ValidationError);
    CHECK_THROWS_AS(sld_eigen(rho, CMatrix::Identity(2, 2)), ValidationError);  // trace 2
    CHECK_THROWS_AS(sld_eigen(rho, CMatrix::Identity(3, 3)), ValidationError);  // shape
}

TEST_CASE("support rank respects a custom tolerance") {
    SLDOperator sld = sld_eigen(DensityMatrix(diag2(0.25, 0.75)), diag2(1.0, -1.0), 0.3);
    CHECK(sld.support_rank == 1);
    CHECK(sld.rank_tol == 0.3);
}

TEST_CASE("residuals on the family producing rank-deficient states") {
    StateFamily rot = StateFamily::pure_path(
        1, {EntryExpr{Expr::parse("cos(x)"), {}}, EntryExpr{Expr::parse("sin(x)"), {}}});
    const ParamPoint p{std::numbers::pi / 4};
    DensityMatrix rho = rot.evaluate(p);
    CMatrix drho = rot.derivative(p, 0);
    SLDOperator sld = sld_eigen(rho, drho);
    CHECK(lyapunov_residual(sld, rho, drho) < 1e-8);
    CHECK(sld.support_rank == 1);
    // pure-state frozen value: in the +/- eigenbasis the score is +/-2
    EigenSystem es = eigh(sld.op);
    CHECK(es.values[0] == doctest::Approx(-2.0).epsilon(1e-8));
    CHECK(es.values[1] == doctest::Approx(2.0).epsilon(1e-8));
}

TEST_CASE("unitary shortcut matches the generic route") {
    CMatrix gz = 0.5 * diag2(1.0, -1.0);
    CMatrix plus(2, 2);
    plus << 0.5, 0.5, 0.5, 0.5;
    StateFamily pure_fam = StateFamily::unitary(gz, plus);
    SLDOperator at0 = sld_unitary(pure_fam, {0.0});
    CHECK(max_abs(at0.op - sigma_y()) < 1e-12);

    CMatrix gx(2, 2);
    gx << 0, 0.5, 0.5, 0;
    StateFamily mixed_fam = StateFamily::unitary(gx, diag2(0.75, 0.25));
    SLDOperator m0 = sld_unitary(mixed_fam, {0.0});
    CHECK(std::abs(m0.op(0, 1)) == doctest::Approx(0.5).epsilon(1e-12));

    for (double lambda : {0.0, 0.7, -1.3}) {
        const ParamPoint p{lambda};
        for (const StateFamily* fam : {&pure_fam, &mixed_fam}) {
            SLDOperator fast = sld_unitary(*fam, p);
            SLDOperator slow = sld_eigen(fam->evaluate(p), fam->derivative(p, 0));
            CHECK(max_abs(fast.op - slow.op) < 1e-9);
            CHECK(lyapunov_residual(fast, fam->evaluate(p), fam->derivative(p, 0)) < 1e-9);
        }
    }
}

TEST_CASE("unitary shortcut rejects other kinds") {
    StateFamily fam = StateFamily::diagonal(1, {Expr::parse("x"), Expr::parse("1-x")});
    CHECK_THROWS_AS(sld_unitary(fam, {0.25}), ValidationError);
}
