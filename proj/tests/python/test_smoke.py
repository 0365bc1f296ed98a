"""Smoke tests for the python bindings: load files, compute bounds, round-trip
matrices through numpy, and check that error types translate."""

import math
import os

import numpy as np
import pytest

import qest

MODELS = os.environ["QEST_MODELS"]


def model(name):
    return qest.load_model(os.path.join(MODELS, name))


def test_model_loading_and_evaluation():
    fam = model("diagonal_qubit.json")
    assert fam.dim == 2
    assert fam.nparams == 1
    assert fam.kind == qest.FamilyKind.diagonal
    assert fam.ranges == [(0.01, 0.99)]
    rho = fam.evaluate([0.25])
    assert rho.shape == (2, 2)
    assert abs(np.trace(rho) - 1.0) < 1e-12
    assert abs(rho[0, 0] - 0.25) < 1e-12


def test_information_constants():
    assert abs(qest.qfi(model("diagonal_qubit.json"), [0.25]).H - 16 / 3) < 1e-9
    assert abs(qest.qfi(model("pure_rotation.json"), [0.7]).H - 4.0) < 1e-8
    assert abs(qest.qfi_unitary(model("unitary_phase_plus.json")).H - 1.0) < 1e-9
    assert abs(qest.qfi(model("amplitude_damping.json"), [0.5]).H - 4.0) < 1e-8


def test_score_operator_and_optimal_measurement():
    fam = model("diagonal_qubit.json")
    sld = qest.sld(fam, [0.25])
    assert sld.support_rank == 2
    assert np.allclose(sld.op, np.diag([4.0, -4.0 / 3.0]), atol=1e-9)

    povm = qest.optimal_povm(fam, [0.25])
    fisher = qest.classical_fisher(fam, povm, [0.25])
    h = qest.qfi(fam, [0.25]).H
    assert fisher.skipped == 0
    assert abs(fisher.value - h) < 1e-6 * h


def test_estimator_observable():
    est = qest.optimal_estimator(model("diagonal_qubit.json"), [0.25])
    assert est.at_lambda == 0.25
    assert np.allclose(est.op, np.diag([1.0, 0.0]), atol=1e-10)


def test_multiparameter_matrix_and_bounds():
    fam = model("qutrit_diagonal2.json")
    info = qest.qfi_matrix(fam, [0.25, 0.25])
    assert np.allclose(info.H, [[6, 2], [2, 6]], atol=1e-8)
    bounds = qest.crb_bounds(info, measurements=1)
    assert abs(bounds.per_parameter[0] - 0.1875) < 1e-8
    b = np.array([[0.5, 0.5], [0.5, -0.5]])
    tilted = qest.reparametrize(info, b)
    assert np.allclose(tilted.H, [[4, 0], [0, 2]], atol=1e-8)


def test_geometry():
    a = np.diag([0.25, 0.75]).astype(complex)
    half = np.eye(2, dtype=complex) / 2
    assert abs(qest.fidelity(a, half) - 0.9330127018922193) < 1e-12
    rep = qest.bures_metric_check(model("diagonal_qubit.json"), [0.25], step=1e-3)
    assert rep.rel_err < 5e-3
    assert not rep.rank_warning


def test_estimability_and_van_trees():
    est = qest.estimability(0.25, qest.qfi(model("diagonal_qubit.json"), [0.25]).H)
    assert abs(est.snr - 1 / 3) < 1e-9
    assert est.bounded
    assert est.measurements(0.1) == 2700

    prior = qest.load_prior(os.path.join(MODELS, "prior_gaussian.json"))
    assert (prior.lo, prior.hi) == (0.05, 0.45)
    report = qest.van_trees(model("diagonal_qubit.json"), prior, measurements=1)
    assert abs(report.z_h - 405.0952615041939) < 1e-4 * 405.1
    assert abs(report.bound - 1.0 / report.z_h) < 1e-15


def test_simulation_is_deterministic():
    fam = model("diagonal_qubit.json")
    povm = qest.load_povm(os.path.join(MODELS, "povm_computational.json"))
    kwargs = dict(shots=200, reps=8, seed=7, lo=0.01, hi=0.99)
    first = qest.simulate(fam, 0.25, povm, **kwargs)
    second = qest.simulate(fam, 0.25, povm, **kwargs)
    assert first.estimates == second.estimates
    assert len(first.estimates) == 8
    assert abs(first.crb_quantum - 1.0 / (200 * 16 / 3)) < 1e-12
    third = qest.simulate(fam, 0.25, povm, shots=200, reps=8, seed=8, lo=0.01, hi=0.99)
    assert first.estimates != third.estimates


def test_error_translation():
    with pytest.raises(ValueError, match="cannot open file"):
        qest.load_model(os.path.join(MODELS, "missing.json"))
    with pytest.raises(ValueError, match="positive semidefinite"):
        qest.fidelity(np.diag([2.0, -1.0]).astype(complex), np.eye(2, dtype=complex) / 2)
    with pytest.raises(RuntimeError, match="gap"):
        # degenerate spectrum at this point; the split cannot follow branches
        qest.qfi_decomposed(model("amplitude_damping.json"), [0.5])


def test_povm_construction_and_probabilities():
    proj0 = np.diag([1.0, 0.0]).astype(complex)
    proj1 = np.diag([0.0, 1.0]).astype(complex)
    povm = qest.POVM([proj0, proj1], ["up", "down"])
    assert povm.labels == ["up", "down"]
    rho = np.diag([0.25, 0.75]).astype(complex)
    probs = qest.born_probs(rho, povm)
    assert np.allclose(probs, [0.25, 0.75], atol=1e-12)
    with pytest.raises(ValueError, match="identity"):
        qest.POVM([proj0], [])


def test_file_digest():
    digest = qest.file_digest(os.path.join(MODELS, "diagonal_qubit.json"))
    assert len(digest) == 16
    assert all(c in "0123456789abcdef" for c in digest)
