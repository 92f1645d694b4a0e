"""Reference polarized Hodge frames and the two bilinear-relation checks.

A frame packages, for one choice of weight and Hodge numbers, an adapted
basis of the underlying complex vector space together with exact data for

* the polarization form Q (rational entries, one pairing per basis index),
* the Weil operator C (diagonal, fourth roots of unity),
* the real structure, stored as an index involution plus unit scalars.

The adapted basis lists the Hodge pieces from holomorphic degree n down to
0, so piece number alpha occupies a contiguous index block of size
h[alpha].  Conjugation swaps block alpha with block n - alpha.  When the
weight is even, the middle block is given a hyperbolically paired basis
(isotropic pairs swapped by conjugation) rather than a pointwise-real one;
this keeps Q a single pairing per index, which is what later makes the
diagonal matrices of the isometry algebra a maximal torus.

Scalars are arranged so that the Hermitian form Q(C u, conj v) is exactly
the identity matrix on the adapted basis.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .rationals import (
    GaussianRational,
    ONE,
    exact_conj,
    exact_eye,
    exact_zeros,
    ipow,
    to_complex,
)


class FrameError(ValueError):
    """Invalid Hodge numbers or malformed frame input."""


@dataclass(frozen=True)
class HodgeNumbers:
    """Weight and the list h^(n,0), ..., h^(0,n), with derived dimensions."""

    weight: int
    h: tuple[int, ...]
    f: tuple[int, ...]      # f[k] = dim F^k for k = 0..n+1
    m: int

    @staticmethod
    def create(weight: int, h: Sequence[int]) -> "HodgeNumbers":
        if weight < 0:
            raise FrameError(f"weight must be nonnegative, got {weight}")
        h = tuple(int(x) for x in h)
        if len(h) != weight + 1:
            raise FrameError(
                f"expected {weight + 1} Hodge numbers for weight {weight}, got {len(h)}"
            )
        if any(x < 0 for x in h):
            raise FrameError(f"Hodge numbers must be nonnegative, got {h}")
        if h != tuple(reversed(h)):
            raise FrameError(f"Hodge numbers must be symmetric, got {h}")
        m = sum(h)
        if m < 1:
            raise FrameError("total dimension must be at least 1")
        n = weight
        # f[k] = sum of h^(i, n-i) over i >= k; h[j] holds h^(n-j, j)
        f = tuple(sum(h[: n - k + 1]) for k in range(n + 1)) + (0,)
        return HodgeNumbers(weight=n, h=h, f=f, m=m)

    def block_range(self, alpha: int) -> range:
        """Index range of Hodge piece H^(n-alpha, alpha)."""
        start = sum(self.h[:alpha])
        return range(start, start + self.h[alpha])

    @property
    def block_of(self) -> tuple[int, ...]:
        out = []
        for alpha, size in enumerate(self.h):
            out.extend([alpha] * size)
        return tuple(out)


@dataclass(frozen=True)
class HodgeFrame:
    """Adapted basis data: exact Q, C, and real-structure involution."""

    numbers: HodgeNumbers
    Q: np.ndarray                       # object array, rational entries
    C: np.ndarray                       # object array, diagonal
    conj_perm: tuple[int, ...]          # sigma
    conj_scale: tuple[GaussianRational, ...]
    S: np.ndarray                       # matrix of v -> conj(v) applied to coordinates
    Qc: np.ndarray                      # complex128 mirrors
    Cc: np.ndarray
    Sc: np.ndarray

    @property
    def m(self) -> int:
        return self.numbers.m

    @property
    def weight(self) -> int:
        return self.numbers.weight

    def conj_vector(self, v: np.ndarray) -> np.ndarray:
        """Apply the real-structure conjugation to a coordinate vector/matrix."""
        if v.dtype == object:
            return self.S.dot(exact_conj(v))
        return self.Sc @ np.conj(v)


def _conjugation_data(numbers: HodgeNumbers):
    """sigma and the unit scalars making conj an involution with Q rational."""
    n, h = numbers.weight, numbers.h
    m = numbers.m
    sigma = [0] * m
    scale: list[GaussianRational] = [ONE] * m
    for alpha in range(n + 1):
        blk = numbers.block_range(alpha)
        if 2 * alpha == n:
            # middle block: pair position j with position j + half
            half = len(blk) // 2
            for j in range(half):
                sigma[blk[j]] = blk[half + j]
                sigma[blk[half + j]] = blk[j]
            if len(blk) % 2:
                last = blk[len(blk) - 1]
                sigma[last] = last
            continue
        mirror = numbers.block_range(n - alpha)
        for j, a in enumerate(blk):
            sigma[a] = mirror[j]
        if n % 2 == 1:
            # odd weight: push the powers of i into the conjugation scalars
            eps = 1 if 2 * alpha < n else -1
            s = eps * ipow(2 * alpha - n)
            for a in blk:
                scale[a] = s
    return tuple(sigma), tuple(scale)


def _pairing_sign(numbers: HodgeNumbers, a: int) -> GaussianRational:
    """Value Q(xi_a, xi_sigma(a)); a rational unit by construction."""
    n = numbers.weight
    alpha = numbers.block_of[a]
    if n % 2 == 0:
        return ipow(2 * alpha - n)          # (-1)^(alpha - n/2)
    return ONE if 2 * alpha < n else -ONE


def build_reference_frame(numbers: HodgeNumbers) -> HodgeFrame:
    """Construct the reference frame for the given Hodge numbers.

    The result satisfies, exactly: Q symmetric for even weight and
    antisymmetric for odd weight, the first bilinear-relation sparsity
    pattern (Q pairs block alpha only with block n - alpha), conj an
    involution exchanging mirror blocks, and Q(C u, conj v) equal to the
    identity matrix.
    """
    n, m = numbers.weight, numbers.m
    sigma, scale = _conjugation_data(numbers)

    Q = exact_zeros(m, m)
    for a in range(m):
        Q[a, sigma[a]] = _pairing_sign(numbers, a)

    C = exact_zeros(m, m)
    for a in range(m):
        C[a, a] = ipow(n - 2 * numbers.block_of[a])

    S = exact_zeros(m, m)
    for a in range(m):
        S[sigma[a], a] = scale[a]

    frame = HodgeFrame(
        numbers=numbers,
        Q=Q,
        C=C,
        conj_perm=sigma,
        conj_scale=scale,
        S=S,
        Qc=to_complex(Q),
        Cc=to_complex(C),
        Sc=to_complex(S),
    )
    _verify_frame(frame)
    return frame


def _verify_frame(frame: HodgeFrame) -> None:
    """Exact postcondition checks; a failure here is a construction bug."""
    nums = frame.numbers
    n, m = nums.weight, nums.m
    sign = 1 if n % 2 == 0 else -1
    blocks = nums.block_of
    for a in range(m):
        if frame.conj_perm[frame.conj_perm[a]] != a:
            raise FrameError("conjugation permutation is not an involution")
        if blocks[frame.conj_perm[a]] != n - blocks[a]:
            raise FrameError("conjugation does not exchange mirror blocks")
        s = frame.conj_scale[a]
        if s.conjugate() * frame.conj_scale[frame.conj_perm[a]] != ONE:
            raise FrameError("conjugation scalars do not square to the identity")
        for b in range(m):
            q = frame.Q[a, b]
            if bool(q):
                if not q.is_real():
                    raise FrameError("polarization matrix must be rational")
                if blocks[a] + blocks[b] != n:
                    raise FrameError("polarization violates block sparsity")
            if q != sign * frame.Q[b, a]:
                raise FrameError("polarization has wrong symmetry")
    H = hermitian_form(frame)
    for a in range(m):
        for b in range(m):
            expect = ONE if a == b else GaussianRational(0)
            if H[a, b] != expect:
                raise FrameError("Hermitian form is not the identity")


def hermitian_form(frame: HodgeFrame) -> np.ndarray:
    """Exact matrix of (u, v) -> Q(C u, conj v) on the adapted basis.

    By construction this is the identity; it is recomputed from Q, C and
    the conjugation data rather than assumed.
    """
    m = frame.m
    H = exact_zeros(m, m)
    for u in range(m):
        cu = frame.C[u, u]
        for v in range(m):
            sv = frame.conj_scale[v]
            # conj is antilinear, and Q is bilinear, so the scalar on
            # xi_sigma(v) enters unconjugated
            H[u, v] = cu * sv * frame.Q[u, frame.conj_perm[v]]
    return H


def hermitian_gram(frame: HodgeFrame, basis: np.ndarray) -> np.ndarray:
    """Gram matrix of the Hermitian form on the columns of ``basis``."""
    Hc = to_complex(hermitian_form(frame))
    return basis.T @ Hc @ np.conj(basis)


class FlagLocation(enum.Enum):
    """Verdict of the two bilinear-relation checks for a filtration."""

    IN_DOMAIN = "period_domain"
    COMPACT_DUAL_ONLY = "compact_dual_only"
    OUTSIDE = "outside"


@dataclass(frozen=True)
class HodgeRiemannReport:
    location: FlagLocation
    isotropy_residual: float
    min_positivity_eig: float
    hodge_dims: tuple[int, ...]
    expected_dims: tuple[int, ...]


def _nullspace_complex(a: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    if a.size == 0:
        return np.eye(a.shape[1], dtype=np.complex128)
    _, sv, vh = np.linalg.svd(a)
    cutoff = rtol * (sv[0] if sv.size else 0.0)
    rank = int(np.sum(sv > cutoff))
    return vh[rank:].conj().T


def check_hodge_riemann(
    frame: HodgeFrame,
    flag,
    iso_tol: float = 1e-9,
    pos_tol: float = 1e-8,
) -> HodgeRiemannReport:
    """Classify a filtration against the two bilinear relations.

    ``flag`` is an m x m adapted-basis matrix (columns 0..f^k-1 span F^k)
    or any object exposing ``basis_matrix``.  The first relation is tested
    on column-normalized data; the second on each intersection
    F^k with conj(F^(n-k)), whose dimension must match the Hodge numbers
    before positive definiteness is even tested.
    """
    M = np.asarray(getattr(flag, "basis_matrix", flag), dtype=np.complex128)
    nums = frame.numbers
    n, m, f = nums.weight, nums.m, nums.f
    if M.shape != (m, m):
        raise FrameError(f"flag matrix must be {m} x {m}, got {M.shape}")
    norms = np.linalg.norm(M, axis=0)
    if np.any(norms == 0):
        raise FrameError("flag matrix has a zero column")
    Mn = M / norms

    G = Mn.T @ frame.Qc @ Mn
    iso_res = 0.0
    for k in range(1, n + 1):
        r, c = f[k], f[n - k + 1]
        if r and c:
            iso_res = max(iso_res, float(np.max(np.abs(G[:r, :c]))))
    if iso_res > iso_tol:
        return HodgeRiemannReport(
            location=FlagLocation.OUTSIDE,
            isotropy_residual=iso_res,
            min_positivity_eig=float("nan"),
            hodge_dims=(),
            expected_dims=tuple(nums.h[n - k] for k in range(n + 1)),
        )

    expected = tuple(nums.h[n - k] for k in range(n + 1))
    dims: list[int] = []
    min_eig = float("inf")
    dims_ok = True
    for k in range(n + 1):
        want = expected[k]
        A = Mn[:, : f[k]]
        B = frame.Sc @ np.conj(Mn[:, : f[n - k]])
        if A.shape[1] == 0 or B.shape[1] == 0:
            dims.append(0)
            if want != 0:
                dims_ok = False
            continue
        null = _nullspace_complex(np.hstack([A, -B]))
        V = A @ null[: A.shape[1], :]
        # orthonormalize; drop numerically dependent directions
        if V.shape[1]:
            qv, rv = np.linalg.qr(V)
            keep = np.abs(np.diag(rv)) > 1e-10 * max(1.0, float(np.max(np.abs(rv))))
            V = qv[:, keep]
        d = V.shape[1]
        dims.append(d)
        if d != want:
            dims_ok = False
            continue
        if d == 0:
            continue
        weil = 1j ** ((2 * k - n) % 4)
        gram = weil * (V.T @ frame.Qc @ (frame.Sc @ np.conj(V)))
        gram = (gram + gram.conj().T) / 2
        min_eig = min(min_eig, float(np.min(np.linalg.eigvalsh(gram))))

    if min_eig == float("inf"):
        min_eig = float("nan")
    positive = dims_ok and (min_eig > pos_tol)
    return HodgeRiemannReport(
        location=FlagLocation.IN_DOMAIN if positive else FlagLocation.COMPACT_DUAL_ONLY,
        isotropy_residual=iso_res,
        min_positivity_eig=min_eig,
        hodge_dims=tuple(dims),
        expected_dims=expected,
    )


# ---------------------------------------------------------------------------
# JSON interface


def frame_to_json(frame: HodgeFrame) -> str:
    nums = frame.numbers
    payload = {
        "weight": nums.weight,
        "hodge_numbers": list(nums.h),
        "dimension": nums.m,
        "filtration_dims": list(nums.f[:-1]),
        "blocks": [[blk.start, blk.stop] for blk in
                   (nums.block_range(a) for a in range(nums.weight + 1))],
        "Q": [[str(x) for x in row] for row in frame.Q],
        "C": [str(frame.C[a, a]) for a in range(nums.m)],
        "conj": {
            "perm": list(frame.conj_perm),
            "scale": [str(s) for s in frame.conj_scale],
        },
    }
    return json.dumps(payload, indent=2, sort_keys=True)


def frame_from_json(text: str) -> HodgeFrame:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FrameError(f"invalid frame JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise FrameError("frame JSON must be an object")
    if "weight" not in payload or "hodge_numbers" not in payload:
        raise FrameError("frame JSON needs 'weight' and 'hodge_numbers'")
    return build_reference_frame(
        HodgeNumbers.create(payload["weight"], payload["hodge_numbers"])
    )
