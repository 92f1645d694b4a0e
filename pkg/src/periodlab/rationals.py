"""Exact Gaussian-rational scalars and small dense linear algebra over them.

Everything structural in this package (polarization matrices, conjugation
data, Lie algebra bases, root coordinates) is kept exact.  The scalar type
here is a + b*i with a, b rational; floating point enters only when a
caller converts with :func:`to_complex`.

Matrices of :class:`GaussianRational` are stored as numpy object arrays,
which support ``A.dot(B)`` elementwise through the Python operators.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

RationalLike = "int | Fraction | GaussianRational"


class GaussianRational:
    """Exact complex number with rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re: "int | Fraction" = 0, im: "int | Fraction" = 0):
        object.__setattr__(self, "re", Fraction(re))
        object.__setattr__(self, "im", Fraction(im))

    def __setattr__(self, name, value):
        raise AttributeError("GaussianRational is immutable")

    # -- coercion -----------------------------------------------------------

    @staticmethod
    def of(x: "int | Fraction | GaussianRational") -> "GaussianRational":
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Fraction)):
            return GaussianRational(x)
        raise TypeError(f"cannot convert {type(x).__name__} to GaussianRational")

    # -- arithmetic ---------------------------------------------------------
    # non-coercible operands (e.g. ndarrays) fall through to NotImplemented
    # so that numpy can dispatch elementwise

    @staticmethod
    def _coerce(x):
        if isinstance(x, GaussianRational):
            return x
        if isinstance(x, (int, Fraction)):
            return GaussianRational(x)
        return None

    def __add__(self, other):
        other = GaussianRational._coerce(other)
        if other is None:
            return NotImplemented
        return GaussianRational(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        other = GaussianRational._coerce(other)
        if other is None:
            return NotImplemented
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        other = GaussianRational._coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def __mul__(self, other):
        other = GaussianRational._coerce(other)
        if other is None:
            return NotImplemented
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = GaussianRational._coerce(other)
        if other is None:
            return NotImplemented
        d = other.abs2()
        if d == 0:
            raise ZeroDivisionError("division by zero GaussianRational")
        return GaussianRational(
            (self.re * other.re + self.im * other.im) / d,
            (self.im * other.re - self.re * other.im) / d,
        )

    def __rtruediv__(self, other):
        other = GaussianRational._coerce(other)
        if other is None:
            return NotImplemented
        return other / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def abs2(self) -> Fraction:
        """|z|^2, exact."""
        return self.re * self.re + self.im * self.im

    # -- comparisons / hashing ---------------------------------------------

    def __eq__(self, other):
        try:
            other = GaussianRational.of(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return self.re != 0 or self.im != 0

    # -- conversion / display ----------------------------------------------

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def is_real(self) -> bool:
        return self.im == 0

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return _imag_str(self.im)
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{_imag_str(abs(self.im)).lstrip('+')}"

    def __repr__(self):
        return f"GaussianRational({self.re!r}, {self.im!r})"


def _imag_str(b: Fraction) -> str:
    if b == 1:
        return "i"
    if b == -1:
        return "-i"
    return f"{b}i"


ZERO = GaussianRational(0)
ONE = GaussianRational(1)
I = GaussianRational(0, 1)


def ipow(k: int) -> GaussianRational:
    """i**k, exact, any integer k."""
    return (ONE, I, -ONE, -I)[k % 4]


# ---------------------------------------------------------------------------
# object-array helpers


def exact_zeros(*shape: int) -> np.ndarray:
    out = np.empty(shape, dtype=object)
    out[...] = ZERO
    return out


def exact_eye(m: int) -> np.ndarray:
    out = exact_zeros(m, m)
    for a in range(m):
        out[a, a] = ONE
    return out


def exact_matrix(rows: Sequence[Sequence]) -> np.ndarray:
    out = np.empty((len(rows), len(rows[0])), dtype=object)
    for a, row in enumerate(rows):
        for b, x in enumerate(row):
            out[a, b] = GaussianRational.of(x)
    return out


def exact_conj(arr: np.ndarray) -> np.ndarray:
    out = np.empty_like(arr)
    flat_in, flat_out = arr.ravel(), out.ravel()
    for idx in range(flat_in.size):
        flat_out[idx] = flat_in[idx].conjugate()
    return out


def is_exact_zero(arr: np.ndarray) -> bool:
    return all(not bool(x) for x in arr.ravel())


def exact_equal(a: np.ndarray, b: np.ndarray) -> bool:
    if a.shape != b.shape:
        return False
    return all(x == y for x, y in zip(a.ravel(), b.ravel()))


def to_complex(arr: np.ndarray) -> np.ndarray:
    out = np.empty(arr.shape, dtype=np.complex128)
    flat_in, flat_out = arr.ravel(), out.ravel()
    for idx in range(flat_in.size):
        flat_out[idx] = complex(flat_in[idx])
    return out


# ---------------------------------------------------------------------------
# exact real-rational elimination (used by oracles and coordinate solves)


def rref_fraction(rows: "list[list[Fraction]]") -> "tuple[list[list[Fraction]], list[int]]":
    """Reduced row echelon form over Fraction.  Returns (rref, pivot columns)."""
    mat = [list(map(Fraction, row)) for row in rows]
    nrows = len(mat)
    ncols = len(mat[0]) if nrows else 0
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot_row = next((k for k in range(r, nrows) if mat[k][c] != 0), None)
        if pivot_row is None:
            continue
        mat[r], mat[pivot_row] = mat[pivot_row], mat[r]
        inv = Fraction(1) / mat[r][c]
        mat[r] = [x * inv for x in mat[r]]
        for k in range(nrows):
            if k != r and mat[k][c] != 0:
                factor = mat[k][c]
                mat[k] = [x - factor * y for x, y in zip(mat[k], mat[r])]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return mat, pivots


def nullspace_fraction(rows: "list[list[Fraction]]") -> "list[list[Fraction]]":
    """Basis of the right nullspace over Fraction (list of column vectors)."""
    if not rows:
        return []
    ncols = len(rows[0])
    rref, pivots = rref_fraction(rows)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fc in free:
        vec = [Fraction(0)] * ncols
        vec[fc] = Fraction(1)
        for r, pc in enumerate(pivots):
            vec[pc] = -rref[r][fc]
        basis.append(vec)
    return basis


def solve_fraction(a_rows: "list[list[Fraction]]", b: "list[Fraction]") -> "list[Fraction]":
    """Solve a square nonsingular rational system exactly."""
    n = len(a_rows)
    aug = [list(map(Fraction, row)) + [Fraction(bv)] for row, bv in zip(a_rows, b)]
    rref, pivots = rref_fraction(aug)
    if pivots != list(range(n)):
        raise ValueError("singular or inconsistent rational system")
    return [rref[r][n] for r in range(n)]


def rational_rank(rows: "list[list[Fraction]]") -> int:
    if not rows:
        return 0
    _, pivots = rref_fraction(rows)
    return len(pivots)
