"""The graded isometry Lie algebra of a frame, over exact scalars.

Elements are m x m matrices X with X^T Q + Q X = 0.  Because the frame's
Q pairs each basis index a with a single partner sigma(a), that linear
condition couples the matrix entry (u, v) only with (sigma(v), sigma(u)).
Solving the coupling explicitly yields a basis in which every element has
at most two nonzero entries, both rational, and lies in a single piece of
the Hodge grading.  The piece of degree k occupies the matrix blocks
(alpha, beta) with beta - alpha = k, so negative degrees sit strictly
below the block diagonal.

All structure constants, and the Killing form computed from the honest
adjoint representation, are exact rationals.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .frame import HodgeFrame
from .rationals import (
    GaussianRational,
    ONE,
    ZERO,
    exact_conj,
    exact_zeros,
    to_complex,
)


class AlgebraError(ValueError):
    """Input not in the algebra, or a structural construction failure."""


Entry = tuple[int, int, GaussianRational]


@dataclass(frozen=True)
class GradedLieAlgebra:
    frame: HodgeFrame
    basis: tuple[np.ndarray, ...]           # object matrices
    entries: tuple[tuple[Entry, ...], ...]  # sparse mirror of basis
    degrees: tuple[int, ...]
    lead: tuple[tuple[int, int], ...]
    lead_val: tuple[GaussianRational, ...]
    cartan_index: tuple[int, ...]           # positions of the Cartan elements
    cartan_transversal: tuple[int, ...]     # index u of each pair (u, sigma(u))
    dim: int
    basis_c: np.ndarray                     # (dim, m, m) complex mirror
    struct: tuple                           # struct[i][j] = {k: rational coeff}
    killing: tuple[tuple[Fraction, ...], ...]
    killing_c: np.ndarray

    @property
    def m(self) -> int:
        return self.frame.m

    @property
    def rank(self) -> int:
        return len(self.cartan_index)

    def cartan_element(self, coeffs: Sequence) -> np.ndarray:
        """Exact diagonal element from coefficients on the Cartan basis."""
        out = exact_zeros(self.m, self.m)
        for c, idx in zip(coeffs, self.cartan_index):
            if c:
                out += GaussianRational.of(Fraction(c)) * self.basis[idx]
        return out


def _entry_list(mat_entries: "list[Entry]", m: int) -> np.ndarray:
    out = exact_zeros(m, m)
    for u, v, val in mat_entries:
        out[u, v] = val
    return out


def lie_algebra_basis(frame: HodgeFrame) -> GradedLieAlgebra:
    """Construct the full solution space of X^T Q + Q X = 0, graded.

    The basis is enumerated canonically: Cartan pairs first (in index
    order), then one element per off-diagonal entry orbit in lexicographic
    order of the orbit's smaller entry position.
    """
    nums = frame.numbers
    m = nums.m
    sigma = frame.conj_perm
    block = nums.block_of
    q = {a: frame.Q[a, sigma[a]] for a in range(m)}

    elements: list[list[Entry]] = []
    degrees: list[int] = []
    cartan_index: list[int] = []
    cartan_transversal: list[int] = []

    for u in range(m):
        if u < sigma[u]:
            cartan_index.append(len(elements))
            cartan_transversal.append(u)
            elements.append([(u, u, ONE), (sigma[u], sigma[u], -ONE)])
            degrees.append(0)

    for u in range(m):
        for v in range(m):
            if u == v:
                continue
            partner = (sigma[v], sigma[u])
            if partner == (u, v):
                # self-paired entry; free exactly when the two pairing
                # signs disagree (symplectic direction)
                if q[u] == -q[v]:
                    elements.append([(u, v, ONE)])
                    degrees.append(block[v] - block[u])
                continue
            if partner < (u, v):
                continue
            c = -(q[sigma[u]] / q[sigma[v]])
            elements.append([(u, v, ONE), (partner[0], partner[1], c)])
            degrees.append(block[v] - block[u])

    dim = len(elements)
    basis = tuple(_entry_list(e, m) for e in elements)
    lead = tuple((e[0][0], e[0][1]) for e in elements)
    lead_val = tuple(e[0][2] for e in elements)
    lead_index = {pos: i for i, pos in enumerate(lead)}

    # purity sanity: both entries of an element must sit in the same degree
    for e, k in zip(elements, degrees):
        for u, v, _ in e:
            if block[v] - block[u] != k:
                raise AlgebraError("basis element is not of pure degree")

    struct = _structure_constants(elements, lead_index, lead_val, dim)
    killing = _killing_gram(struct, dim)
    killing_c = np.array([[float(x) for x in row] for row in killing])

    algebra = GradedLieAlgebra(
        frame=frame,
        basis=basis,
        entries=tuple(tuple(e) for e in elements),
        degrees=tuple(degrees),
        lead=lead,
        lead_val=lead_val,
        cartan_index=tuple(cartan_index),
        cartan_transversal=tuple(cartan_transversal),
        dim=dim,
        basis_c=np.stack([to_complex(b) for b in basis]) if dim else
        np.zeros((0, m, m), dtype=np.complex128),
        struct=struct,
        killing=killing,
        killing_c=killing_c,
    )
    return algebra


def _sparse_bracket(a: "list[Entry]", b: "list[Entry]") -> "dict[tuple[int, int], GaussianRational]":
    out: dict[tuple[int, int], GaussianRational] = {}
    for u, v, x in a:
        for p, w, y in b:
            if v == p:
                key = (u, w)
                out[key] = out.get(key, ZERO) + x * y
            if w == u:
                key = (p, v)
                out[key] = out.get(key, ZERO) - y * x
    return {k: val for k, val in out.items() if bool(val)}


def _structure_constants(elements, lead_index, lead_val, dim):
    """struct[i][j] = coefficients of [X_i, X_j] on the basis, exact.

    Raises if any bracket leaves the computed span, which would mean the
    structural basis is incomplete.
    """
    table = []
    for i in range(dim):
        row: dict[int, dict[int, Fraction]] = {}
        for j in range(dim):
            if i == j:
                continue
            br = _sparse_bracket(list(elements[i]), list(elements[j]))
            if not br:
                continue
            coeffs: dict[int, Fraction] = {}
            for pos, val in list(br.items()):
                if pos in lead_index:
                    k = lead_index[pos]
                    coeffs[k] = (val / lead_val[k]).re
            # exact closure check: subtract the expansion and demand zero
            residual = dict(br)
            for k, c in coeffs.items():
                for u, v, x in elements[k]:
                    key = (u, v)
                    residual[key] = residual.get(key, ZERO) - c * x
            if any(bool(v) for v in residual.values()):
                raise AlgebraError("bracket escaped the structural basis")
            for k, c in list(coeffs.items()):
                if c == 0:
                    del coeffs[k]
            if coeffs:
                row[j] = coeffs
        table.append(row)
    return tuple(table)


def _killing_gram(struct, dim):
    """Trace of ad(X_i) ad(X_j) contracted through the sparse tables."""
    gram = [[Fraction(0)] * dim for _ in range(dim)]
    for i in range(dim):
        for j in range(i, dim):
            total = Fraction(0)
            row_i = struct[i]
            row_j = struct[j]
            for k, coeffs_ik in row_i.items():
                # ad(X_i) X_k = sum_l c_l X_l ; need ad(X_j) X_l back at X_k
                for l, c_ikl in coeffs_ik.items():
                    back = row_j.get(l)
                    if back:
                        c = back.get(k)
                        if c:
                            total += c_ikl * c
            gram[i][j] = total
            gram[j][i] = total
    return tuple(tuple(row) for row in gram)


# ---------------------------------------------------------------------------
# elementwise operations (object or complex inputs)


def bracket(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.dtype == object or b.dtype == object:
        return a.dot(b) - b.dot(a)
    return a @ b - b @ a


def _frobenius(x: np.ndarray) -> float:
    if x.dtype == object:
        return float(np.sqrt(sum(float(v.abs2()) for v in x.ravel())))
    return float(np.linalg.norm(x))


def in_algebra(algebra: GradedLieAlgebra, X: np.ndarray, tol: float = 1e-10) -> bool:
    Q = algebra.frame.Q if X.dtype == object else algebra.frame.Qc
    res = X.T.dot(Q) + Q.dot(X) if X.dtype == object else X.T @ Q + Q @ X
    if X.dtype == object:
        return all(not bool(v) for v in res.ravel())
    return _frobenius(res) <= tol * (1.0 + _frobenius(X))


def grade(algebra: GradedLieAlgebra, X: np.ndarray, tol: float = 1e-10) -> "dict[int, np.ndarray]":
    """Split X into its Hodge-graded components, keyed by degree.

    Components are cut along the frame's block structure; they sum back to
    X exactly.  Raises when X is not in the algebra (within ``tol`` for
    float input, exactly for object input).
    """
    if not in_algebra(algebra, X, tol):
        raise AlgebraError("matrix violates the polarization-antisymmetry identity")
    nums = algebra.frame.numbers
    block = nums.block_of
    m = nums.m
    comps: dict[int, np.ndarray] = {}
    for u in range(m):
        for v in range(m):
            x = X[u, v]
            if not bool(x):
                continue
            k = block[v] - block[u]
            if k not in comps:
                comps[k] = exact_zeros(m, m) if X.dtype == object else np.zeros(
                    (m, m), dtype=X.dtype)
            comps[k][u, v] = x
    return comps


def weil_involution(algebra: GradedLieAlgebra, X: np.ndarray) -> np.ndarray:
    """theta = Ad(C): multiplies the degree-k component by (-1)^k."""
    fr = algebra.frame
    if X.dtype == object:
        # C is diagonal with unit entries, so its inverse is the conjugate
        return fr.C.dot(X).dot(exact_conj(fr.C))
    return fr.Cc @ X @ np.conj(fr.Cc)


def conj_real(algebra: GradedLieAlgebra, X: np.ndarray) -> np.ndarray:
    """Antilinear conjugation fixing the real form g_0."""
    fr = algebra.frame
    if X.dtype == object:
        return fr.S.dot(exact_conj(X)).dot(exact_conj(fr.S))
    return fr.Sc @ np.conj(X) @ np.conj(fr.Sc)


def conj_compact(algebra: GradedLieAlgebra, X: np.ndarray) -> np.ndarray:
    """Antilinear conjugation fixing the compact real form.

    The Hermitian form of the frame is the identity on the adapted basis,
    so the compact form consists of the skew-Hermitian elements and its
    conjugation is minus the conjugate transpose.
    """
    if X.dtype == object:
        return -exact_conj(X).T.copy()
    return -np.conj(X).T


def expand(algebra: GradedLieAlgebra, X: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """Coefficients of X on the structural basis (lead-entry extraction)."""
    if X.dtype == object:
        coeffs = np.array(
            [X[pos] / val for pos, val in zip(algebra.lead, algebra.lead_val)],
            dtype=object,
        )
        recon = exact_zeros(algebra.m, algebra.m)
        for c, b in zip(coeffs, algebra.basis):
            recon += c * b
        if not all(x == y for x, y in zip(recon.ravel(), X.ravel())):
            raise AlgebraError("matrix is not in the span of the algebra basis")
        return coeffs
    coeffs = np.array(
        [X[pos] / complex(val) for pos, val in zip(algebra.lead, algebra.lead_val)],
        dtype=np.complex128,
    )
    recon = np.tensordot(coeffs, algebra.basis_c, axes=(0, 0))
    if _frobenius(recon - X) > tol * (1.0 + _frobenius(X)):
        raise AlgebraError("matrix is not in the span of the algebra basis")
    return coeffs


def killing_form(algebra: GradedLieAlgebra, X: np.ndarray, Y: np.ndarray) -> complex:
    """B(X, Y) through the exact adjoint-trace Gram matrix."""
    x = expand(algebra, X)
    y = expand(algebra, Y)
    if x.dtype == object:
        total = ZERO
        for i, xi in enumerate(x):
            if not bool(xi):
                continue
            for j, yj in enumerate(y):
                kij = algebra.killing[i][j]
                if yj and kij:
                    total = total + xi * yj * kij
        return complex(total)
    return complex(x @ algebra.killing_c @ y)


def is_horizontal(algebra: GradedLieAlgebra, X: np.ndarray, tol: float = 1e-12) -> bool:
    """True when every graded component of degree below -1 vanishes."""
    comps = grade(algebra, X)
    scale = 1.0 + _frobenius(X)
    return all(
        _frobenius(comp) <= tol * scale
        for k, comp in comps.items()
        if k <= -2
    )
