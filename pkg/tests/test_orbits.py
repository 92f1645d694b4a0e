"""Orbit machinery: exponentials, sl2 factorization, polydisc trials."""

import dataclasses
import math

import numpy as np
import pytest
import scipy.linalg

from periodlab.bigcell import FlagPoint, cell_coordinate, project_cell
from periodlab.liealg import bracket
from periodlab.orbits import (WORKERS_ENV, OrbitError, exp_real, expm_stack,
                              horizontal_abelian_trial, is_horizontal_direction,
                              polydisc_trial, sl2_orbit_coordinate,
                              verify_sl2_decomposition)

from conftest import tower


def test_expm_stack_matches_scipy_on_mixed_norms():
    rng = np.random.default_rng(5)
    mats = np.empty((3, 2, 5, 5), dtype=complex)
    scales = [0.01, 0.5, 3.0, 12.0, 30.0, 1.0]
    for flat, s in enumerate(scales):
        a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        mats[flat // 2, flat % 2] = s * a / np.linalg.norm(a)
    got = expm_stack(mats)
    for i in range(3):
        for j in range(2):
            want = scipy.linalg.expm(mats[i, j])
            scale = 1.0 + float(np.max(np.abs(want)))
            assert float(np.max(np.abs(got[i, j] - want))) < 1e-12 * scale


def test_expm_stack_identity_and_rejects_nonfinite():
    assert np.allclose(expm_stack(np.zeros((2, 3, 3))),
                       np.broadcast_to(np.eye(3), (2, 3, 3)))
    bad = np.zeros((2, 2))
    bad[0, 0] = np.inf
    with pytest.raises(OrbitError):
        expm_stack(bad)


def test_exp_real_checks_structure(shape_name):
    _, algebra, _, sos = tower(shape_name)
    x = sos.x_basis[0]
    mat = exp_real(algebra, x, t=0.75)
    qc = algebra.frame.Qc
    scale = 1.0 + float(np.max(np.abs(mat))) ** 2
    assert float(np.max(np.abs(mat.T @ qc @ mat - qc))) < 1e-9 * scale
    with pytest.raises(OrbitError):
        exp_real(algebra, 1j * x)  # not fixed by the real conjugation
    with pytest.raises(OrbitError):
        exp_real(algebra, x, t=1e4)  # overflow guard
    outside = np.ones((algebra.m, algebra.m))
    with pytest.raises(ValueError):
        exp_real(algebra, outside)


def test_sl2_orbit_coordinate_values():
    assert sl2_orbit_coordinate(0j) == 0j
    assert sl2_orbit_coordinate(1.5) == pytest.approx(math.tanh(1.5))
    z = 2.0 * np.exp(0.7j)
    w = sl2_orbit_coordinate(z)
    assert abs(w) == pytest.approx(math.tanh(2.0))
    assert np.angle(w) == pytest.approx(0.7)
    # tanh saturates to 1.0 exactly in doubles; the bound still holds
    assert abs(sl2_orbit_coordinate(50.0)) <= 1.0
    assert abs(sl2_orbit_coordinate(3.0 + 4.0j)) == pytest.approx(
        math.tanh(5.0), abs=1e-15)


def test_sl2_decomposition_identity(shape_name):
    _, _, _, sos = tower(shape_name)
    zs = [0j, 1.0 + 0j, 2.0 + 1.0j, 0.3 - 2.4j, 20.0 + 0j, 20.0j,
          14.14 - 14.14j]
    for i in range(sos.r):
        for z in zs:
            report = verify_sl2_decomposition(sos, i, z)
            assert report.passed, (i, z, report.residual)
            assert report.residual <= 1e-10


def test_polydisc_trial_small_run(shape_name):
    _, _, _, sos = tower(shape_name)
    report = polydisc_trial(sos, samples=40, seed=1)
    assert report.passed
    assert report.applicable
    assert report.max_abs_coord <= 1.0 + 1e-12
    assert report.max_d_e <= math.sqrt(sos.r) + 1e-9
    assert len(report.rows) == 40 * len(report.t_grid) * sos.r
    for row in report.rows[:200]:
        assert row.in_big_cell
        assert row.tanh_pred == pytest.approx(
            math.tanh(row.t * row.lambda_i), abs=1e-15)
        assert abs(row.coord) <= 1.0 + 1e-12


def test_trial_rows_are_worker_independent(monkeypatch):
    _, _, _, sos = tower("k3toy")
    reports = []
    for workers in ("1", "3"):
        monkeypatch.setenv(WORKERS_ENV, workers)
        reports.append(polydisc_trial(sos, samples=23, seed=9))
    a, b = reports
    assert a.rows == b.rows
    assert a.max_abs_coord == b.max_abs_coord
    assert a.max_d_e == b.max_d_e


def test_horizontal_trial_masks_deep_directions():
    _, algebra, _, sos = tower("weight3")
    assert [tr.degree for tr in sos.triples] == [-1, -3]
    assert is_horizontal_direction(algebra, sos.x_basis[0])
    assert not is_horizontal_direction(algebra, sos.x_basis[1])
    report = horizontal_abelian_trial(sos, samples=30, seed=4)
    assert report.applicable
    assert report.active == (0,)
    assert report.passed
    deep = [row for row in report.rows if row.index == 1]
    assert deep and all(row.lambda_i == 0.0 for row in deep)
    assert all(abs(row.coord) <= 1e-9 for row in deep)


def test_horizontal_trial_not_applicable_without_degree_one():
    _, _, _, sos = tower("weight3")
    only_deep = dataclasses.replace(
        sos, lam=sos.lam[1:], triples=sos.triples[1:],
        x_basis=sos.x_basis[1:], y_basis=sos.y_basis[1:])
    report = horizontal_abelian_trial(only_deep, samples=5)
    assert not report.applicable
    assert report.active == ()
    assert report.rows == ()
    assert report.passed  # vacuously: nothing ran, nothing violated


def test_horizontal_trial_runs_all_triples_in_weight_one():
    _, _, _, sos = tower("sp4")
    report = horizontal_abelian_trial(sos, samples=20, seed=2)
    assert report.applicable
    assert report.active == tuple(range(sos.r))
    assert report.passed


def test_transported_coordinates_match_one_shot_route():
    """At moderate t both routes see the same flag; they must agree."""
    _, algebra, _, sos = tower("sp4")
    numbers = algebra.frame.numbers
    lam = (0.7, -0.3)
    x = lam[0] * sos.x_basis[0] + lam[1] * sos.x_basis[1]
    e_basis = [tr.e_plus for tr in sos.triples]
    for t in (0.5, 1.0, 2.0):
        direct = cell_coordinate(
            FlagPoint.create(numbers, scipy.linalg.expm(t * x)))
        c_direct = project_cell(direct, e_basis)
        state = np.eye(numbers.m, dtype=complex)
        nsub = 64
        step = scipy.linalg.expm((t / nsub) * x)
        for _ in range(nsub):
            state = np.linalg.qr(step @ state)[0]
        transported = cell_coordinate(FlagPoint.create(numbers, state))
        c_trans = project_cell(transported, e_basis)
        assert np.allclose(c_direct, c_trans, atol=1e-9)
        expect = [math.tanh(t * l) for l in lam]
        assert np.allclose(c_direct, expect, atol=1e-9)


def test_abelian_flows_commute(shape_name):
    _, _, _, sos = tower(shape_name)
    if sos.r < 2:
        pytest.skip("needs two commuting triples")
    x0, x1 = sos.x_basis[0], sos.x_basis[1]
    assert float(np.max(np.abs(bracket(x0, x1)))) < 1e-12
    t = 1.3
    joint = expm_stack(t * (x0 + x1))
    split = expm_stack(t * x0) @ expm_stack(t * x1)
    scale = 1.0 + float(np.max(np.abs(joint)))
    assert float(np.max(np.abs(joint - split))) < 1e-11 * scale
