"""Unipotent coordinates on the open cell of the flag manifold.

A flag with dimension vector f is in the open cell exactly when, for
every k, its k-th space projects isomorphically onto the span of the
first f^k reference vectors.  Membership is decided on an orthonormal
column frame, where the k-th leading minor equals the product of the
cosines of the principal angles between the two spans: a gauge-invariant
number in [0, 1].  Raw minors of the unnormalized matrix are reported
too, but they are useless as a gate; far along a one-parameter orbit the
matrix has huge nearly dependent columns and the raw determinant
underflows any column-norm scaling even though the flag is honestly
interior.

Inside the cell, block elimination factors the basis matrix as L U with
L unit-block-lower-triangular; L depends on the flag alone and its
nilpotent logarithm is the coordinate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .frame import HodgeNumbers
from .rationals import exact_eye

IN_CELL = "in_cell"
OUT_OF_CELL = "out_of_cell"
INDETERMINATE = "indeterminate"


class CellError(ValueError):
    """Coordinate extraction attempted outside the open cell."""


@dataclass(frozen=True)
class FlagPoint:
    numbers: HodgeNumbers
    basis_matrix: np.ndarray

    @staticmethod
    def create(numbers: HodgeNumbers, basis_matrix) -> "FlagPoint":
        mat = np.asarray(basis_matrix, dtype=complex)
        if mat.shape != (numbers.m, numbers.m):
            raise ValueError(f"basis matrix must be {numbers.m}x{numbers.m}")
        if not np.all(np.isfinite(mat)):
            raise ValueError("basis matrix has non-finite entries")
        # exact zeros on the QR diagonal, not SVD rank: a one-parameter
        # orbit far out has unit determinant yet sits within rounding of a
        # singular MATRIX, while staying far from every degenerate flag
        rdiag = np.abs(np.diagonal(np.linalg.qr(mat, mode="r")))
        if np.any(rdiag == 0.0):
            raise ValueError("basis matrix is singular")
        return FlagPoint(numbers=numbers, basis_matrix=mat)


@dataclass(frozen=True)
class MembershipReport:
    status: str
    minors: tuple[float, ...]          # orthonormal-frame leading minors, one per k
    raw_log_minors: tuple[float, ...]  # log|det| of the unnormalized leading blocks
    ks: tuple[int, ...]
    tol: float

    @property
    def in_cell(self) -> bool:
        return self.status == IN_CELL


def _minor_sizes(numbers: HodgeNumbers) -> "list[tuple[int, int]]":
    out = []
    for k in range(numbers.weight + 1):
        f = numbers.f[k]
        if f >= 1:
            out.append((k, f))
    return out


def orthonormal_minors(numbers: HodgeNumbers, stack: np.ndarray) -> np.ndarray:
    """Leading principal-angle minors for a (..., m, m) stack of bases.

    Returns shape (..., nk) with entries in [0, 1], ordered as
    ``_minor_sizes``.
    """
    q = np.linalg.qr(stack, mode="reduced")[0]
    outs = []
    for _, f in _minor_sizes(numbers):
        outs.append(np.abs(np.linalg.det(q[..., :f, :f])))
    return np.stack(outs, axis=-1)


def membership_in_big_cell(flag: FlagPoint, tol: float = 1e-10) -> MembershipReport:
    sizes = _minor_sizes(flag.numbers)
    minors = orthonormal_minors(flag.numbers, flag.basis_matrix)
    raw = []
    for _, f in sizes:
        sign, logdet = np.linalg.slogdet(flag.basis_matrix[:f, :f])
        raw.append(float(logdet) if sign != 0 else -np.inf)
    worst = float(np.min(minors))
    if worst < tol:
        status = OUT_OF_CELL
    elif worst < 10 * tol:
        status = INDETERMINATE
    else:
        status = IN_CELL
    return MembershipReport(
        status=status, minors=tuple(float(x) for x in minors),
        raw_log_minors=tuple(raw), ks=tuple(k for k, _ in sizes), tol=tol)


def classify_minors(minors: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Vectorized gate: +1 in cell, 0 indeterminate, -1 out, over (..., nk)."""
    worst = np.min(minors, axis=-1)
    out = np.where(worst >= 10 * tol, 1, 0)
    return np.where(worst < tol, -1, out).astype(np.int8)


def rank_isomorphism_oracle(flag: FlagPoint) -> bool:
    """Independent membership route: leading-block ranks via SVD.

    The full-size block is skipped; it tests basis validity, which
    FlagPoint.create already guarantees, and numerical rank of an
    ill-conditioned but honestly invertible basis is scale-relative.
    """
    for _, f in _minor_sizes(flag.numbers):
        if f == flag.numbers.m:
            continue
        if np.linalg.matrix_rank(flag.basis_matrix[:f, :f]) != f:
            return False
    return True


# ---------------------------------------------------------------------------
# nilpotent exp/log, dtype-generic (exact on object arrays)


def _blocks(numbers: HodgeNumbers) -> "list[range]":
    return [numbers.block_range(a) for a in range(numbers.weight + 1)]


def is_strictly_block_lower(numbers: HodgeNumbers, x: np.ndarray,
                            tol: float = 0.0) -> bool:
    m = numbers.m
    blocks = numbers.block_of
    for u in range(m):
        for v in range(m):
            if blocks[u] > blocks[v]:
                continue
            val = x[u, v]
            if isinstance(val, (int, float, complex, np.complexfloating, np.floating)):
                if abs(val) > tol:
                    return False
            elif bool(val):
                return False
    return True


def _eye_like(x: np.ndarray) -> np.ndarray:
    if x.dtype == object:
        return exact_eye(x.shape[0])
    return np.eye(x.shape[0], dtype=x.dtype)


def exp_nilpotent(numbers: HodgeNumbers, x: np.ndarray) -> np.ndarray:
    """Finite exponential series of a strictly block-lower matrix."""
    if not is_strictly_block_lower(numbers, x, tol=0.0 if x.dtype == object else 1e-12):
        raise CellError("argument is not strictly block-lower")
    eye = _eye_like(x)
    out = eye.copy()
    term = eye.copy()
    for k in range(1, numbers.weight + 2):
        term = (term @ x) / k
        out = out + term
    return out


def log_unipotent(numbers: HodgeNumbers, lmat: np.ndarray) -> np.ndarray:
    """Finite logarithm series of a unit-diagonal block-lower matrix."""
    eye = _eye_like(lmat)
    nil = lmat - eye
    if not is_strictly_block_lower(numbers, nil,
                                   tol=0.0 if lmat.dtype == object else 1e-10):
        raise CellError("argument is not unipotent block-lower")
    out = nil * 0
    term = eye.copy()
    exact = lmat.dtype == object
    for k in range(1, numbers.weight + 2):
        term = term @ nil
        coeff = Fraction((-1) ** (k + 1), k) if exact else ((-1.0) ** (k + 1)) / k
        out = out + term * coeff
    return out


def unipotent_from_flag(numbers: HodgeNumbers, stack: np.ndarray) -> np.ndarray:
    """Unit block-lower representative of each flag in a (..., m, m) stack.

    Column group alpha of L is solved from an orthonormal basis of the
    matching flag subspace.  The leading square of that basis has the
    principal-angle minor as its determinant, so any flag comfortably
    inside the cell yields well-conditioned solves even when the raw
    entries span seventeen orders of magnitude.  Direct block
    elimination has no such guarantee: its Schur complements cancel
    catastrophically on deep orbit matrices.
    """
    stack = np.asarray(stack, dtype=complex)
    m = numbers.m
    lmat = np.broadcast_to(np.eye(m, dtype=complex), stack.shape).copy()
    blocks = _blocks(numbers)
    for blk in blocks[:-1]:
        f = blk.stop
        q = np.linalg.qr(stack[..., :, :f], mode="reduced")[0]
        top = q[..., :f, :]
        rhs = np.zeros(stack.shape[:-2] + (f, len(blk)), dtype=complex)
        for jj, col in enumerate(blk):
            rhs[..., col, jj] = 1.0
        v = q @ np.linalg.solve(top, rhs)
        lmat[..., :, blk.start:blk.stop] = v
        # structural zeros and the identity diagonal hold exactly by
        # construction; pin them so L is unipotent to the last bit
        lmat[..., :f, blk.start:blk.stop] = rhs
    return lmat


@dataclass(frozen=True)
class CellCoordinate:
    numbers: HodgeNumbers
    L: np.ndarray
    logL: np.ndarray


def cell_coordinate(flag: FlagPoint, tol: float = 1e-10) -> CellCoordinate:
    """Factor the basis matrix as L U and return the unipotent part.

    Raises on flags that fail (or nearly fail) the membership gate; the
    factor L is independent of the adapted basis chosen for the flag, and
    its flag agrees with the input, both verified here.
    """
    report = membership_in_big_cell(flag, tol=tol)
    if report.status != IN_CELL:
        raise CellError(f"flag is not in the open cell (status: {report.status})")
    numbers = flag.numbers
    lmat = unipotent_from_flag(numbers, flag.basis_matrix)
    u = np.linalg.solve(lmat, flag.basis_matrix.astype(complex))
    uscale = 1.0 + float(np.max(np.abs(u)))
    bl = np.asarray(numbers.block_of)
    below = bl[:, None] > bl[None, :]
    if float(np.max(np.abs(u) * below)) > 1e-9 * uscale:
        raise CellError("cofactor is not block-upper: factorization failed")
    _check_same_flag(numbers, lmat, flag.basis_matrix)
    return CellCoordinate(numbers=numbers, L=lmat,
                          logL=log_unipotent(numbers, lmat))


def _check_same_flag(numbers: HodgeNumbers, a: np.ndarray, b: np.ndarray,
                     tol: float = 1e-8) -> None:
    qa = np.linalg.qr(a)[0]
    qb = np.linalg.qr(b)[0]
    for _, f in _minor_sizes(numbers):
        pa = qa[:, :f] @ qa[:, :f].conj().T
        pb = qb[:, :f] @ qb[:, :f].conj().T
        if float(np.max(np.abs(pa - pb))) > tol:
            raise CellError("factor L spans a different flag")


def project_cell(coord: CellCoordinate, basis: Sequence[np.ndarray]) -> np.ndarray:
    """Coefficients of the metric projection of logL onto span(basis).

    The inner product is the Hodge metric, which in the reference frame
    is the entrywise (Frobenius) one; coefficients are with respect to
    the basis exactly as given, so a basis vector of norm sqrt(2) still
    reports its own coefficient, not a rescaled one.
    """
    k = len(basis)
    if k == 0:
        return np.zeros(0, dtype=complex)
    gram = np.empty((k, k), dtype=complex)
    rhs = np.empty(k, dtype=complex)
    target = coord.logL
    for i, bi in enumerate(basis):
        rhs[i] = np.sum(np.conj(bi) * target)
        for j, bj in enumerate(basis):
            gram[i, j] = np.sum(np.conj(bi) * bj)
    return np.linalg.solve(gram, rhs)
