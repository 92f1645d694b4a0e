import functools

import pytest

from periodlab.frame import HodgeNumbers, build_reference_frame
from periodlab.liealg import lie_algebra_basis
from periodlab.roots import (compute_roots, normalize_weyl_basis,
                             set_lexicographic_order)
from periodlab.strongorth import greedy_strongly_orthogonal

SHAPES = {
    "sl2": (1, (1, 1)),
    "sp4": (1, (2, 2)),
    "k3toy": (2, (1, 2, 1)),
    "nonhermitian": (2, (2, 2, 2)),
    "weight3": (3, (1, 1, 1, 1)),
}

ACCEPTANCE_SHAPES = ("sl2", "sp4", "k3toy", "nonhermitian")


@functools.lru_cache(maxsize=None)
def tower(name):
    """Frame, algebra, ordered root system, strongly orthogonal set."""
    weight, hodge = SHAPES[name]
    frame = build_reference_frame(HodgeNumbers.create(weight, list(hodge)))
    algebra = lie_algebra_basis(frame)
    rs = compute_roots(algebra)
    set_lexicographic_order(rs)
    normalize_weyl_basis(rs)
    sos = greedy_strongly_orthogonal(rs)
    return frame, algebra, rs, sos


@pytest.fixture(params=sorted(SHAPES))
def shape_name(request):
    return request.param
