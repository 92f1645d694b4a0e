"""Exact arithmetic layer: field axioms and the small linear solvers."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from periodlab.rationals import (GaussianRational, I, ONE, ZERO, exact_conj,
                                 exact_eye, exact_matrix, exact_equal, ipow,
                                 nullspace_fraction, rational_rank,
                                 rref_fraction, solve_fraction, to_complex)

small_fractions = st.fractions(
    min_value=-50, max_value=50, max_denominator=12)

gaussians = st.builds(GaussianRational, small_fractions, small_fractions)


@given(gaussians, gaussians, gaussians)
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a
    assert a * b == b * a
    assert a + ZERO == a
    assert a * ONE == a
    assert a - a == ZERO


@given(gaussians)
def test_multiplicative_inverse(a):
    if a == ZERO:
        with pytest.raises(ZeroDivisionError):
            ONE / a
    else:
        assert a * (ONE / a) == ONE


@given(gaussians, gaussians)
def test_conjugation_is_multiplicative(a, b):
    assert (a * b).conjugate() == a.conjugate() * b.conjugate()
    assert (a + b).conjugate() == a.conjugate() + b.conjugate()


@given(gaussians)
def test_norm_through_complex(a):
    z = complex(a)
    back = a * a.conjugate()
    assert back.im == 0
    assert abs(float(back.re) - abs(z) ** 2) < 1e-9


def test_i_powers_cycle():
    assert I * I == -ONE
    wheel = [ONE, I, -ONE, -I]
    for k in range(-8, 9):
        assert ipow(k) == wheel[k % 4]


matrix_entries = st.integers(min_value=-9, max_value=9)


@st.composite
def fraction_matrices(draw, max_dim=5):
    n = draw(st.integers(min_value=1, max_value=max_dim))
    m = draw(st.integers(min_value=1, max_value=max_dim))
    rows = [[Fraction(draw(matrix_entries)) for _ in range(m)]
            for _ in range(n)]
    return rows


@given(fraction_matrices())
@settings(max_examples=60)
def test_nullspace_annihilates(rows):
    ns = nullspace_fraction(rows)
    n_cols = len(rows[0])
    assert len(ns) == n_cols - rational_rank(rows)
    for vec in ns:
        for row in rows:
            assert sum(r * v for r, v in zip(row, vec)) == 0


@given(fraction_matrices())
@settings(max_examples=60)
def test_rank_matches_float_rank(rows):
    arr = np.array([[float(x) for x in row] for row in rows])
    assert rational_rank(rows) == np.linalg.matrix_rank(arr, tol=1e-9)


@given(fraction_matrices(max_dim=4), st.data())
@settings(max_examples=60)
def test_solve_recovers_constructed_solution(rows, data):
    # the solver's contract is square and nonsingular
    n = len(rows)
    rows = [row[:n] + [Fraction(0)] * (n - len(row)) for row in rows]
    assume(rational_rank(rows) == n)
    x = [Fraction(data.draw(matrix_entries), 1 + data.draw(
        st.integers(min_value=0, max_value=5))) for _ in range(n)]
    b = [sum(r * v for r, v in zip(row, x)) for row in rows]
    assert solve_fraction(rows, b) == x


def test_solve_rejects_singular_system():
    rows = [[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]]
    with pytest.raises(ValueError):
        solve_fraction(rows, [Fraction(1), Fraction(1)])


def test_rref_pivots_are_canonical():
    rows = [[Fraction(2), Fraction(4)], [Fraction(1), Fraction(2)]]
    red, pivots = rref_fraction(rows)
    assert pivots == [0]
    assert red[0] == [Fraction(1), Fraction(2)]
    assert all(x == 0 for x in red[1])


def test_exact_matrix_helpers_roundtrip():
    m = exact_matrix([[1, I], [0, GaussianRational(Fraction(1, 2))]])
    assert exact_equal(m @ exact_eye(2), m)
    c = to_complex(m)
    assert c.dtype == np.complex128
    assert c[0, 1] == 1j
    conj = exact_conj(m)
    assert conj[0, 1] == -I
