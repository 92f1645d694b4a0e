"""Root systems: frozen enumerations, triple identities, closure relations."""

from fractions import Fraction

import numpy as np
import pytest

from periodlab.frame import HodgeNumbers, build_reference_frame
from periodlab.liealg import bracket, conj_real, grade, lie_algebra_basis
from periodlab.rationals import to_complex
from periodlab.roots import (RootSystemError, cartan_real_basis,
                             check_sum_relations, compact_form_basis,
                             compact_real_basis, compute_roots,
                             noncompact_real_basis, normalize_weyl_basis,
                             serre_table_rows, set_lexicographic_order)

from conftest import SHAPES, tower

# frozen from the verified enumeration: root counts per degree, the
# Cartan Killing Gram, positive and simple roots in build order, and
# the (values, degree, float norm, support) list of noncompact positives
ROOT_FACTS = {
    "sl2": dict(
        rank=1, n_roots=2, n_compact=0, checked=0,
        by_degree={-1: 1, 1: 1},
        gram=(("8",),),
        positives=(("2",),),
        simple=(("2",),),
        n_serre=0,
        noncompact_pos=((("2",), 1, 1.0, 1),),
    ),
    "sp4": dict(
        rank=2, n_roots=8, n_compact=2, checked=18,
        by_degree={-1: 3, 0: 2, 1: 3},
        gram=(("12", "0"), ("0", "12")),
        positives=(("1", "-1"), ("2", "0"), ("1", "1"), ("0", "2")),
        simple=(("1", "-1"), ("0", "2")),
        n_serre=24,
        noncompact_pos=((("2", "0"), 1, 1.0, 1),
                        (("1", "1"), 1, 1.414214, 2),
                        (("0", "2"), 1, 1.0, 1)),
    ),
    "k3toy": dict(
        rank=2, n_roots=4, n_compact=0, checked=2,
        by_degree={-1: 2, 1: 2},
        gram=(("4", "0"), ("0", "4")),
        positives=(("1", "-1"), ("1", "1")),
        simple=(("1", "-1"), ("1", "1")),
        n_serre=0,
        noncompact_pos=((("1", "-1"), 1, 1.414214, 2),
                        (("1", "1"), 1, 1.414214, 2)),
    ),
    "nonhermitian": dict(
        rank=3, n_roots=12, n_compact=4, checked=44,
        by_degree={-2: 1, -1: 4, 0: 2, 1: 4, 2: 1},
        gram=(("8", "0", "0"), ("0", "8", "0"), ("0", "0", "8")),
        positives=(("1", "-1", "0"), ("1", "0", "1"), ("1", "1", "0"),
                   ("0", "1", "1"), ("-1", "0", "1"), ("0", "-1", "1")),
        simple=(("1", "-1", "0"), ("1", "1", "0"), ("-1", "0", "1")),
        n_serre=48,
        noncompact_pos=((("1", "0", "1"), 1, 1.414214, 2),
                        (("0", "1", "1"), 1, 1.414214, 2),
                        (("-1", "0", "1"), -1, 1.414214, 2),
                        (("0", "-1", "1"), -1, 1.414214, 2)),
    ),
    "weight3": dict(
        rank=2, n_roots=8, n_compact=2, checked=18,
        by_degree={-3: 1, -2: 1, -1: 2, 1: 2, 2: 1, 3: 1},
        gram=(("12", "0"), ("0", "12")),
        positives=(("-1", "1"), ("0", "2"), ("-1", "-1"), ("-2", "0")),
        simple=(("0", "2"), ("-1", "-1")),
        n_serre=24,
        noncompact_pos=((("-1", "1"), -1, 1.414214, 2),
                        (("0", "2"), 1, 1.0, 1),
                        (("-2", "0"), -3, 1.0, 1)),
    ),
}


def _vals(root):
    return tuple(str(v) for v in root.values)


def test_frozen_root_facts(shape_name):
    _, _, rs, _ = tower(shape_name)
    facts = ROOT_FACTS[shape_name]
    assert rs.rank == facts["rank"]
    assert len(rs.roots) == facts["n_roots"]
    assert sum(1 for r in rs.roots if r.compact) == facts["n_compact"]
    by_degree: dict = {}
    for r in rs.roots:
        by_degree[r.hodge_degree] = by_degree.get(r.hodge_degree, 0) + 1
    assert by_degree == facts["by_degree"]
    assert tuple(tuple(str(x) for x in row)
                 for row in rs.cartan_gram) == facts["gram"]
    assert tuple(_vals(r) for r in rs.positive_roots()) == facts["positives"]
    assert tuple(_vals(rs.roots[i])
                 for i in rs.simple_roots) == facts["simple"]
    assert len(rs.serre_constants) == facts["n_serre"]


def test_frozen_noncompact_positives(shape_name):
    _, _, rs, _ = tower(shape_name)
    got = tuple(
        (_vals(r), r.hodge_degree,
         round(float(np.linalg.norm(r.vector)), 6),
         int(np.count_nonzero(np.abs(r.vector) > 1e-12)))
        for r in rs.noncompact_positive())
    assert got == ROOT_FACTS[shape_name]["noncompact_pos"]


def test_root_values_are_integers(shape_name):
    _, _, rs, _ = tower(shape_name)
    for r in rs.roots:
        assert all(v.denominator == 1 for v in r.values)


def test_compactness_matches_degree_parity(shape_name):
    _, _, rs, _ = tower(shape_name)
    for r in rs.roots:
        assert r.compact == (r.hodge_degree % 2 == 0)


def test_negation_is_a_sign_reversing_involution(shape_name):
    _, _, rs, _ = tower(shape_name)
    for r in rs.roots:
        s = rs.roots[r.negative_index]
        assert s.negative_index == r.index
        assert tuple(-v for v in r.values) == s.values
        assert s.positive != r.positive
        assert s.hodge_degree == -r.hodge_degree
    assert 2 * len(rs.positive_roots()) == len(rs.roots)


def test_simple_root_count_equals_rank(shape_name):
    _, _, rs, _ = tower(shape_name)
    assert len(rs.simple_roots) == len(set(rs.simple_roots)) == rs.rank
    # every simple root is positive and indecomposable by construction
    assert all(rs.roots[i].positive for i in rs.simple_roots)


def test_coroot_pairing_is_exactly_two(shape_name):
    _, _, rs, _ = tower(shape_name)
    for r in rs.roots:
        coeffs = rs.coroot_coeffs(r)
        assert sum(v * c for v, c in zip(r.values, coeffs)) == Fraction(2)
        h = rs.coroot_matrix(r)
        assert np.count_nonzero(h - np.diag(np.diagonal(h))) == 0


def test_weyl_triple_identities(shape_name):
    _, algebra, rs, _ = tower(shape_name)
    for r in rs.positive_roots():
        e = r.vector
        f = rs.roots[r.negative_index].vector
        h = to_complex(rs.coroot_matrix(r))
        scale = 1.0 + float(np.max(np.abs(h)))
        assert float(np.max(np.abs(bracket(h, e) - 2 * e))) < 1e-10 * scale
        assert float(np.max(np.abs(bracket(h, f) + 2 * f))) < 1e-10 * scale
        assert float(np.max(np.abs(bracket(e, f) - h))) < 1e-10 * scale
        eta = 1 if not r.compact else -1
        assert float(np.max(np.abs(conj_real(algebra, e) - eta * f))) < 1e-10


def test_serre_constants_are_real_and_antisymmetric_under_negation(shape_name):
    _, _, rs, _ = tower(shape_name)
    for (i, j), n in rs.serre_constants.items():
        assert isinstance(n, float) and n != 0.0
        ni = rs.roots[i].negative_index
        nj = rs.roots[j].negative_index
        assert rs.serre_constants[(ni, nj)] == pytest.approx(-n, abs=1e-9)
    rows = serre_table_rows(rs)
    assert len(rows) == len(rs.serre_constants)
    assert rows == sorted(rows)


def test_sum_relations_exhaustive(shape_name):
    _, _, rs, _ = tower(shape_name)
    report = check_sum_relations(rs)
    assert report.passed
    assert report.checked == ROOT_FACTS[shape_name]["checked"]


def test_sum_relations_requires_an_order():
    rs = compute_roots(tower("sp4")[1])
    with pytest.raises(RootSystemError):
        check_sum_relations(rs)


def test_rebuild_is_deterministic():
    weight, hodge = SHAPES["nonhermitian"]
    runs = []
    for _ in range(2):
        numbers = HodgeNumbers.create(weight, hodge)
        rs = compute_roots(lie_algebra_basis(build_reference_frame(numbers)))
        set_lexicographic_order(rs)
        normalize_weyl_basis(rs)
        runs.append(rs)
    a, b = runs
    assert [r.lex_key for r in a.roots] == [r.lex_key for r in b.roots]
    assert a.simple_roots == b.simple_roots
    for ra, rb in zip(a.roots, b.roots):
        assert np.array_equal(ra.vector, rb.vector)


def test_real_form_bases_have_matching_dimensions(shape_name):
    _, algebra, rs, _ = tower(shape_name)
    n_compact = sum(1 for r in rs.roots if r.compact)
    n_noncompact = len(rs.roots) - n_compact
    assert len(cartan_real_basis(rs)) == rs.rank
    assert len(compact_real_basis(rs)) == rs.rank + n_compact
    assert len(noncompact_real_basis(rs)) == n_noncompact
    assert len(compact_form_basis(rs)) == algebra.dim


def test_real_form_bases_are_fixed_by_their_conjugations(shape_name):
    _, algebra, rs, _ = tower(shape_name)
    for mat in compact_real_basis(rs) + noncompact_real_basis(rs):
        fixed = conj_real(algebra, mat)
        assert float(np.max(np.abs(fixed - mat))) < 1e-10
    # the Cartan involution separates the families by degree parity
    for mat in compact_real_basis(rs):
        assert all(d % 2 == 0 for d in grade(algebra, mat))
    for mat in noncompact_real_basis(rs):
        assert all(d % 2 == 1 for d in grade(algebra, mat))


def test_center_pairing_separates_noncompact_signs(shape_name):
    """Head-decided noncompact roots keep their sign under compact shifts."""
    _, _, rs, _ = tower(shape_name)
    l = rs.rank
    for r in rs.roots:
        assert r.lex_key is not None
        head = r.lex_key[:len(rs.center_basis)]
        if r.compact:
            assert all(x == 0 for x in head)
    for a in rs.roots:
        if a.compact:
            continue
        head = a.lex_key[:len(rs.center_basis)]
        first = next((x for x in head if x != 0), None)
        if first is None:
            continue
        for b in rs.roots:
            if not b.compact:
                continue
            total = tuple(x + y for x, y in zip(a.values, b.values))
            target = rs.root_from_values(total)
            if target is not None:
                assert target.positive == a.positive
