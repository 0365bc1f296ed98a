#include "qest/measure.hpp"

#include "qest/errors.hpp"
#include "qest/qfi.hpp"
#include "util.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace qest;
using test::max_abs;
using test::random_state;
using test::random_traceless;

namespace {

EntryExpr entry(const char* re) { return EntryExpr{Expr::parse(re), std::nullopt}; }

CMatrix diag2(double a, double b) {
    CMatrix m = CMatrix::Zero(2, 2);
    m(0, 0) = a;
    m(1, 1) = b;
    return m;
}

POVM computational(int dim) {
    std::vector<CMatrix> elements;
    for (int i = 0; i < dim; ++i) {
        CMatrix e = CMatrix::Zero(dim, dim);
        e(i, i) = 1.0;
        elements.push_back(e);
    }
    return POVM::create(std::move(elements));
}

POVM tilted_povm() {
    const double c2 = 0.8535533905932737;   // cos^2(pi/8)
    const double s2 = 0.14644660940672624;  // sin^2(pi/8)
    const double cs = 0.3535533905932738;
    CMatrix e0(2, 2);
    e0 << c2, cs, cs, s2;
    return POVM::create({e0, CMatrix::Identity(2, 2) - e0}, {"plus", "minus"});
}

StateFamily diag_family() {
    return StateFamily::diagonal(1, {Expr::parse("x"), Expr::parse("1-x")});
}

}  // namespace

TEST_CASE("POVM construction validates and labels") {
    POVM basis = computational(2);
    CHECK(basis.size() == 2);
    CHECK(basis.dim() == 2);
    CHECK(basis.labels[0] == "0");
    CHECK(basis.labels[1] == "1");
    CHECK(tilted_povm().labels[0] == "plus");

    CMatrix sx(2, 2);
    sx << 0, 1, 1, 0;
    CHECK_THROWS_WITH_AS(POVM::create({sx, CMatrix::Identity(2, 2) - sx}),
                         doctest::Contains("positive semidefinite"), ValidationError);
    CHECK_THROWS_WITH_AS(POVM::create({diag2(1.0, 0.0)}), doctest::Contains("identity"),
                         ValidationError);
    CHECK_THROWS_AS(POVM::create({}), ValidationError);
    CHECK_THROWS_AS(POVM::create({diag2(1.0, 0.0), CMatrix::Identity(3, 3)}), ValidationError);
    CHECK_THROWS_AS(POVM::create({diag2(1.0, 0.0), diag2(0.0, 1.0)}, {"only-one"}),
                    ValidationError);
}

TEST_CASE("Born probabilities") {
    DensityMatrix rho(diag2(0.25, 0.75));
    RVector p = born_probs(rho, computational(2));
    CHECK(p[0] == doctest::Approx(0.25).epsilon(1e-14));
    CHECK(p[1] == doctest::Approx(0.75).epsilon(1e-14));

    RVector q = born_probs(rho, tilted_povm());
    CHECK(q[0] == doctest::Approx(0.3232233047033631).epsilon(1e-12));
    CHECK(q.sum() == doctest::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS_AS(born_probs(DensityMatrix(CMatrix::Identity(3, 3) / 3.0), computational(2)),
                    ValidationError);
}

TEST_CASE("classical Fisher information: frozen values") {
    StateFamily fam = diag_family();
    FisherResult aligned = classical_fisher(fam, computational(2), {0.25});
    CHECK(aligned.value == doctest::Approx(16.0 / 3.0).epsilon(1e-8));
    CHECK(aligned.skipped == 0);

    // rotating the projectors by pi/8 throws information away: 16/7 < 16/3
    FisherResult tilted = classical_fisher(fam, tilted_povm(), {0.25});
    CHECK(tilted.value == doctest::Approx(16.0 / 7.0).epsilon(1e-8));

    StateFamily rot = StateFamily::pure_path(1, {entry("cos(x)"), entry("sin(x)")});
    CHECK(classical_fisher(rot, computational(2), {std::numbers::pi / 4}).value ==
          doctest::Approx(4.0).epsilon(1e-8));

    DensityMatrix rho = fam.evaluate({0.25});
    CMatrix drho = fam.derivative({0.25}, 0);
    CHECK(classical_fisher(rho, drho, tilted_povm()).value ==
          doctest::Approx(tilted.value).epsilon(1e-12));
}

TEST_CASE("outcomes at the edge of support are skipped and counted") {
    // the state is |0><0|: the second outcome has probability exactly zero
    DensityMatrix rho(diag2(1.0, 0.0));
    CMatrix sx(2, 2);
    sx << 0, 1, 1, 0;
    FisherResult r = classical_fisher(rho, sx, computational(2));
    CHECK(r.skipped == 1);
    CHECK(r.value == doctest::Approx(0.0));
}

TEST_CASE("no measurement beats the quantum information") {
    SplitMix64 rng(0xc0ffee11ULL);
    for (int dim : {2, 3}) {
        for (int rep = 0; rep < 6; ++rep) {
            DensityMatrix rho = random_state(dim, rng);
            CMatrix drho = random_traceless(dim, rng);
            double h = qfi_from_state(rho, drho);
            POVM proj = projective_povm(haar_unitary(dim, rng));
            FisherResult f = classical_fisher(rho, drho, proj);
            CHECK(f.value <= h * (1.0 + 1e-8) + 1e-12);

            // coarse-graining can only lose information
            std::vector<int> halves(static_cast<std::size_t>(dim));
            for (int x = 0; x < dim; ++x) halves[static_cast<std::size_t>(x)] = x % 2;
            FisherResult binned = classical_fisher(rho, drho, bin_povm(proj, halves, 2));
            CHECK(binned.value <= f.value + 1e-10);
        }
    }
}

TEST_CASE("the SLD eigenbasis measurement attains the bound") {
    struct Probe {
        StateFamily fam;
        ParamPoint p;
    };
    CMatrix gx(2, 2);
    gx << 0, 0.5, 0.5, 0;
    Probe probes[] = {
        {diag_family(), {0.25}},
        {StateFamily::unitary(gx, diag2(0.75, 0.25)), {0.7}},
        {StateFamily::pure_path(1, {entry("cos(x)"), entry("sin(x)")}), {std::numbers::pi / 4}},
    };
    for (const Probe& probe : probes) {
        POVM best = optimal_povm(probe.fam, probe.p);
        double h = qfi_scalar(probe.fam, probe.p).H;
        FisherResult f = classical_fisher(probe.fam, best, probe.p);
        CHECK(f.value == doctest::Approx(h).epsilon(1e-6));

        // saturation witness: Tr[rho Pi L] is real for every element
        DensityMatrix rho = probe.fam.evaluate(probe.p);
        CMatrix l = sld_eigen(rho, probe.fam.derivative(probe.p, 0)).op;
        for (const CMatrix& pi : best.elements) {
            CHECK(std::abs((rho.matrix() * pi * l).trace().imag()) < 1e-8);
        }
    }
}

TEST_CASE("degenerate SLD eigenvalues merge into one projector") {
    StateFamily fam = StateFamily::diagonal(
        1, {Expr::parse("x"), Expr::parse("x"), Expr::parse("1-2*x")});
    POVM merged = optimal_povm(fam, {0.25});
    CHECK(merged.size() == 2);  // eigenvalue 4 twice, eigenvalue -4 once
    double rank2 = 0.0;
    for (const CMatrix& e : merged.elements) {
        rank2 = std::max(rank2, e.trace().real());
    }
    CHECK(rank2 == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(classical_fisher(fam, merged, {0.25}).value ==
          doctest::Approx(qfi_scalar(fam, {0.25}).H).epsilon(1e-6));
}

TEST_CASE("a flat family measures as the identity") {
    StateFamily still = StateFamily::diagonal(1, {Expr::parse("0.3+0*x"), Expr::parse("0.7-0*x")});
    POVM trivial = optimal_povm(still, {0.2});
    CHECK(trivial.size() == 1);
    CHECK(max_abs(trivial.elements[0] - CMatrix::Identity(2, 2)) < 1e-10);
}

TEST_CASE("locally optimal estimator: frozen operators and moments") {
    EstimatorOp coin = optimal_estimator(diag_family(), {0.25});
    CHECK(coin.at_lambda == 0.25);
    CHECK(coin.op(0, 0).real() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(coin.op(1, 1).real() == doctest::Approx(0.0).epsilon(1e-9));

    StateFamily rot = StateFamily::pure_path(1, {entry("cos(x)"), entry("sin(x)")});
    const double quarter_pi = std::numbers::pi / 4;
    EstimatorOp est = optimal_estimator(rot, {quarter_pi});
    EigenSystem es = eigh(est.op);
    CHECK(es.values[0] == doctest::Approx(quarter_pi - 0.5).epsilon(1e-8));
    CHECK(es.values[1] == doctest::Approx(quarter_pi + 0.5).epsilon(1e-8));

    struct Probe {
        StateFamily fam;
        ParamPoint p;
    };
    CMatrix gx(2, 2);
    gx << 0, 0.5, 0.5, 0;
    Probe probes[] = {
        {diag_family(), {0.25}},
        {diag_family(), {0.6}},
        {StateFamily::unitary(gx, diag2(0.75, 0.25)), {0.4}},
    };
    for (const Probe& probe : probes) {
        EstimatorOp o = optimal_estimator(probe.fam, probe.p);
        DensityMatrix rho = probe.fam.evaluate(probe.p);
        double mean = (rho.matrix() * o.op).trace().real();
        double second = (rho.matrix() * o.op * o.op).trace().real();
        double h = qfi_scalar(probe.fam, probe.p).H;
        CHECK(mean == doctest::Approx(probe.p[0]).epsilon(1e-9));
        CHECK(second - mean * mean == doctest::Approx(1.0 / h).epsilon(1e-9));
    }
}

TEST_CASE("estimator requires information to invert") {
    StateFamily still = StateFamily::diagonal(1, {Expr::parse("0.3+0*x"), Expr::parse("0.7-0*x")});
    CHECK_THROWS_WITH_AS(optimal_estimator(still, {0.2}), doctest::Contains("too small"),
                         NumericalError);
}

TEST_CASE("Haar unitaries: unitary, deterministic, uniform enough") {
    SplitMix64 rng(0x7a57e5ULL);
    for (int dim : {2, 3, 5}) {
        CMatrix u = haar_unitary(dim, rng);
        CHECK(max_abs(u.adjoint() * u - CMatrix::Identity(dim, dim)) < 1e-12);
    }

    SplitMix64 a(42), b(42);
    CHECK(max_abs(haar_unitary(3, a) - haar_unitary(3, b)) == 0.0);
    CHECK(max_abs(haar_unitary(3, a) - haar_unitary(3, b)) == 0.0);  // streams stay in step

    SplitMix64 stat(0x5eedULL);
    double mean00 = 0.0;
    const int reps = 200;
    for (int i = 0; i < reps; ++i) {
        mean00 += std::norm(haar_unitary(2, stat)(0, 0));
    }
    mean00 /= reps;
    CHECK(mean00 == doctest::Approx(0.5).epsilon(0.16));

    CHECK_THROWS_AS(haar_unitary(0, stat), ValidationError);
}

TEST_CASE("projective POVMs come from unitaries only") {
    SplitMix64 rng(0xdecafULL);
    POVM p = projective_povm(haar_unitary(3, rng));
    CHECK(p.size() == 3);
    for (const CMatrix& e : p.elements) {
        CHECK(std::abs(e.trace().real() - 1.0) < 1e-10);  // rank one
    }
    CMatrix shear(2, 2);
    shear << 1, 1, 0, 1;
    CHECK_THROWS_WITH_AS(projective_povm(shear), doctest::Contains("unitary"), ValidationError);
}

TEST_CASE("binning sums elements by assignment") {
    POVM basis = computational(3);
    POVM binned = bin_povm(basis, {0, 0, 1}, 2);
    CHECK(binned.size() == 2);
    CHECK(binned.elements[0](0, 0).real() == doctest::Approx(1.0));
    CHECK(binned.elements[0](1, 1).real() == doctest::Approx(1.0));
    CHECK(binned.elements[0](2, 2).real() == doctest::Approx(0.0));

    CHECK_THROWS_AS(bin_povm(basis, {0, 0}, 2), ValidationError);
    CHECK_THROWS_AS(bin_povm(basis, {0, 0, 2}, 2), ValidationError);
    CHECK_THROWS_AS(bin_povm(basis, {0, 0, 1}, 0), ValidationError);
}
