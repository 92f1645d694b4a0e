"""Orbit experiments: real exponentials, sl2 factorization, polydisc bounds.

The computational heart of the package.  One-parameter orbits of the
commuting sl2 triples are pushed through the honest route (matrix
exponential, cell membership, block elimination, metric projection) and
compared against the closed-form prediction: the i-th coordinate of
exp(t sum lambda_i x_i) at the base flag is tanh(t lambda_i), so every
coordinate stays in the unit disc and the Euclidean distance from the
base point never exceeds sqrt(r).

Nothing here shortcuts through the prediction being tested; the
exponential is a plain scaling-and-squaring series and the coordinates
come from the LU factor of the orbit matrix.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bigcell import (classify_minors, exp_nilpotent, orthonormal_minors,
                      unipotent_from_flag)
from .frame import HodgeFrame, HodgeNumbers
from .liealg import GradedLieAlgebra, conj_real, expand
from .strongorth import StrongOrthSet

WORKERS_ENV = "PERIODLAB_WORKERS"


class OrbitError(ValueError):
    """Exponential range or structure guarantee failed."""


# ---------------------------------------------------------------------------
# matrix exponential, batched, no eigendecomposition


def expm_stack(a: np.ndarray, theta: float = 0.25) -> np.ndarray:
    """Scaling-and-squaring exponential over a (..., m, m) stack.

    The squaring depth is shared across the batch (max norm governs);
    the Taylor series at norm <= theta is truncated where double
    precision stops moving.
    """
    a = np.asarray(a, dtype=complex)
    m = a.shape[-1]
    norms = np.abs(a).sum(axis=-1).max(axis=-1)  # max row sums, per matrix
    biggest = float(np.max(norms)) if norms.size else 0.0
    if not np.isfinite(biggest):
        raise OrbitError("non-finite entries in exponential argument")
    s = max(0, int(math.ceil(math.log2(biggest / theta))) if biggest > theta else 0)
    small = a / (2.0 ** s)
    eye = np.broadcast_to(np.eye(m, dtype=complex), a.shape).copy()
    out = eye.copy()
    term = eye.copy()
    for k in range(1, 25):
        term = term @ small / k
        out += term
        if float(np.max(np.abs(term))) < 1e-18:
            break
    for _ in range(s):
        out = out @ out
    return out


def exp_real(algebra: GradedLieAlgebra, x: np.ndarray, t: float = 1.0,
             qtol: float = 1e-9) -> np.ndarray:
    """exp(t x) for x in the real form, with structure checks.

    Preconditions: x is fixed by the real conjugation and lies in the
    algebra (both within 1e-10).  The result must preserve the
    polarization form and the real structure at ``qtol`` relative;
    arguments large enough to overflow doubles raise a range error.
    """
    scale = 1.0 + float(np.max(np.abs(x)))
    if float(np.max(np.abs(conj_real(algebra, x) - x))) > 1e-10 * scale:
        raise OrbitError("argument is not in the real form")
    expand(algebra, x, tol=1e-10)

    if abs(t) * float(np.linalg.norm(x)) > 700.0:
        raise OrbitError("t |x| too large: exp would overflow doubles")
    mat = expm_stack(t * x)

    qc = algebra.frame.Qc
    qres = float(np.max(np.abs(mat.T @ qc @ mat - qc)))
    mscale = 1.0 + float(np.max(np.abs(mat))) ** 2
    if qres > qtol * mscale:
        raise OrbitError(f"polarization form not preserved: residual {qres}")
    real_res = float(np.max(np.abs(conj_real(algebra, mat) - mat)))
    if real_res > qtol * (1.0 + float(np.max(np.abs(mat)))):
        raise OrbitError("real structure not preserved")
    return mat


# ---------------------------------------------------------------------------
# single-triple orbit formulas


def sl2_orbit_coordinate(z: complex) -> complex:
    """Unit-disc coordinate of the one-triple orbit: (z/|z|) tanh|z|."""
    az = abs(z)
    if az == 0:
        return 0j
    return (z / az) * math.tanh(az)


@dataclass(frozen=True)
class DecompositionReport:
    z: complex
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol


def verify_sl2_decomposition(sos: StrongOrthSet, i: int, z: complex,
                             tol: float = 1e-10) -> DecompositionReport:
    """Triple-product identity for one sl2 orbit factor.

    exp(a x_i + b y_i) with z = a + bi must equal the product of the
    unipotent factor at coordinate (z/|z|)tanh|z|, the torus factor at
    -log cosh|z|, and the opposite unipotent factor at the conjugate
    coordinate.  The residual is entrywise, relative to the size of the
    matrices involved (entries grow like cosh|z|, so an absolute gate
    would be unreadable at |z| = 20).
    """
    tri = sos.triples[i]
    numbers = sos.rootsystem.algebra.frame.numbers
    x = tri.e_plus + tri.e_minus
    y = 1j * (tri.e_plus - tri.e_minus)
    lhs = expm_stack(z.real * x + z.imag * y)

    w = sl2_orbit_coordinate(z)
    az = abs(z)
    m = x.shape[0]
    left = exp_nilpotent(numbers, w * tri.e_plus)
    hdiag = np.diagonal(tri.h)
    middle = (np.diag(np.exp(-math.log(math.cosh(az)) * hdiag))
              if az else np.eye(m, dtype=complex))
    # e_minus is block-upper; run the finite series on its transpose
    right = exp_nilpotent(numbers, (np.conj(w) * tri.e_minus).T).T
    rhs = left @ middle @ right
    scale = 1.0 + float(np.max(np.abs(lhs)))
    residual = float(np.max(np.abs(lhs - rhs))) / scale
    return DecompositionReport(z=z, residual=residual, tol=tol)


# ---------------------------------------------------------------------------
# polydisc trials


@dataclass(frozen=True)
class Violation:
    kind: str
    sample_id: int
    t: float
    index: int
    value: float
    detail: str


@dataclass(frozen=True)
class OrbitRow:
    sample_id: int
    t: float
    index: int
    lambda_i: float
    coord: complex
    tanh_pred: float
    d_e: float
    in_big_cell: bool


@dataclass(frozen=True)
class TrialReport:
    kind: str
    r: int
    active: tuple[int, ...]
    samples: int
    seed: int
    t_grid: tuple[float, ...]
    lambda_range: float
    max_abs_coord: float
    max_d_e: float
    violations: tuple[Violation, ...]
    rows: tuple[OrbitRow, ...]
    runtime_s: float
    applicable: bool = True

    @property
    def passed(self) -> bool:
        return not self.violations


def _worker_count() -> int:
    raw = os.environ.get(WORKERS_ENV, "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = min(4, os.cpu_count() or 1)
    return max(1, n)


def _sample_lambdas(seed: int, sample_ids: Sequence[int], r: int,
                    lam_range: float, active: Sequence[int]) -> np.ndarray:
    out = np.zeros((len(sample_ids), r))
    for row, sid in enumerate(sample_ids):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(sid,)))
        draw = rng.uniform(-lam_range, lam_range, size=len(active))
        out[row, list(active)] = draw
    return out


def _batch_logl(numbers: HodgeNumbers, lstack: np.ndarray) -> np.ndarray:
    m = numbers.m
    nil = lstack - np.eye(m, dtype=complex)
    out = np.zeros_like(nil)
    term = np.broadcast_to(np.eye(m, dtype=complex), nil.shape).copy()
    for k in range(1, numbers.weight + 2):
        term = term @ nil
        out += term * (((-1.0) ** (k + 1)) / k)
    return out


def _run_chunk(sos: StrongOrthSet, frame: HodgeFrame, sample_ids: Sequence[int],
               seed: int, t_grid: Sequence[float], lam_range: float,
               active: Sequence[int], tolerances: dict) -> tuple:
    numbers = frame.numbers
    r = sos.r
    m = numbers.m
    lam = _sample_lambdas(seed, sample_ids, r, lam_range, active)
    x_stack = np.stack(sos.x_basis)
    e_stack = np.stack([tr.e_plus for tr in sos.triples])
    gram = np.einsum("iuv,juv->ij", np.conj(e_stack), e_stack)

    xs = np.einsum("sr,ruv->suv", lam, x_stack)
    ts = np.asarray(t_grid, dtype=float)
    nsamp = len(sample_ids)

    # Flag transport.  A one-shot exp(tX) loses the flag in doubles: the
    # raw column prefixes degenerate like exp(-2 t lambda_max) even
    # though the flag itself converges to an interior point, so past
    # t ~ 18 no factorization of the computed matrix can see the slow
    # directions.  Evolving an orthonormal basis in bounded steps keeps
    # every prefix span accurate; leading-column spans survive QR, so
    # one m x m state per sample carries the whole flag.
    step_norm = lam_range * sum(
        float(np.linalg.norm(x_stack[i])) for i in active)
    order = np.argsort(ts, kind="stable")
    state = np.broadcast_to(np.eye(m, dtype=complex), (nsamp, m, m)).copy()
    flags = np.empty((len(ts), nsamp, m, m), dtype=complex)
    tprev = 0.0
    for ti in order:
        dt = float(ts[ti]) - tprev
        nsub = max(1, int(math.ceil(abs(dt) * step_norm / 0.5)))
        if dt != 0.0:
            estep = expm_stack((dt / nsub) * xs)
            for _ in range(nsub):
                state = np.linalg.qr(estep @ state, mode="reduced")[0]
        flags[ti] = state
        tprev = float(ts[ti])

    # the one-shot matrix is still fine for the symplectic-form check:
    # its residual is relative to the squared matrix scale
    mats = expm_stack(ts[:, None, None, None] * xs[None])
    qc = frame.Qc
    qres = np.abs(np.swapaxes(mats, -1, -2) @ qc @ mats - qc).max(axis=(-1, -2))
    qscale = 1.0 + np.abs(mats).max(axis=(-1, -2)) ** 2

    minors = orthonormal_minors(numbers, flags)
    classes = classify_minors(minors)

    lmats = unipotent_from_flag(numbers, flags)
    logl = _batch_logl(numbers, lmats)
    rhs = np.einsum("iuv,tsuv->tsi", np.conj(e_stack), logl)
    coords = np.linalg.solve(
        np.broadcast_to(gram, (rhs.shape[0], rhs.shape[1], r, r)), rhs[..., None]
    )[..., 0] if r else np.zeros(rhs.shape[:2] + (0,))

    abs_coords = np.abs(coords)
    d_e = np.sqrt((abs_coords ** 2).sum(axis=-1))
    preds = np.tanh(ts[:, None, None] * lam[None])

    tol_coord = tolerances.get("coord_bound", 1e-12)
    tol_tanh = tolerances.get("tanh_match", 1e-9)
    tol_de = tolerances.get("d_e_bound", 1e-9)
    tol_q = tolerances.get("q_preserve", 1e-9)
    sqrt_r = math.sqrt(len(active)) if active else 0.0
    grid_sorted = all(ts[j] <= ts[j + 1] for j in range(len(ts) - 1))

    rows = []
    violations = []
    for si, sid in enumerate(sample_ids):
        prev_abs = np.zeros(r)
        for ti, t in enumerate(ts):
            ok_cell = classes[ti, si] == 1
            if not ok_cell:
                violations.append(Violation(
                    kind="membership", sample_id=sid, t=float(t), index=-1,
                    value=float(minors[ti, si].min()),
                    detail=f"cell status class {int(classes[ti, si])}"))
            if qres[ti, si] > tol_q * qscale[ti, si]:
                violations.append(Violation(
                    kind="q_preservation", sample_id=sid, t=float(t), index=-1,
                    value=float(qres[ti, si] / qscale[ti, si]),
                    detail="form residual above tolerance"))
            for i in range(r):
                c = complex(coords[ti, si, i])
                ac = abs_coords[ti, si, i]
                if ac > 1.0 + tol_coord:
                    violations.append(Violation(
                        kind="coord_bound", sample_id=sid, t=float(t), index=i,
                        value=float(ac), detail="|coordinate| above 1"))
                if abs(c - preds[ti, si, i]) > tol_tanh:
                    violations.append(Violation(
                        kind="tanh_mismatch", sample_id=sid, t=float(t), index=i,
                        value=float(abs(c - preds[ti, si, i])),
                        detail=f"expected {preds[ti, si, i]:+.12f}"))
                if grid_sorted and ac + 1e-12 < prev_abs[i]:
                    violations.append(Violation(
                        kind="monotonicity", sample_id=sid, t=float(t), index=i,
                        value=float(prev_abs[i] - ac),
                        detail="|coordinate| decreased along t"))
                rows.append(OrbitRow(
                    sample_id=sid, t=float(t), index=i,
                    lambda_i=float(lam[si, i]), coord=c,
                    tanh_pred=float(preds[ti, si, i]),
                    d_e=float(d_e[ti, si]), in_big_cell=bool(ok_cell)))
            prev_abs = abs_coords[ti, si].copy()
            if d_e[ti, si] > sqrt_r + tol_de:
                violations.append(Violation(
                    kind="d_e_bound", sample_id=sid, t=float(t), index=-1,
                    value=float(d_e[ti, si]), detail=f"limit sqrt({len(active)})"))
    stats = (float(abs_coords.max()) if abs_coords.size else 0.0,
             float(d_e.max()) if d_e.size else 0.0)
    return rows, violations, stats


def polydisc_trial(sos: StrongOrthSet, samples: int = 1000,
                   t_grid: Sequence[float] = (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0),
                   lambda_range: float = 2.0, seed: int = 0,
                   tolerances: Optional[dict] = None,
                   active: Optional[Sequence[int]] = None,
                   kind: str = "polydisc") -> TrialReport:
    """Random draws in the abelian subspace, full t-grid, all checks.

    Each sample draws lambda uniformly from [-L, L]^r on its own seed
    stream (dependent only on the trial seed and the sample id, not on
    worker scheduling), then every orbit point must sit in the open
    cell with coordinates matching tanh(t lambda_i) and distance at most
    sqrt(r).
    """
    t0 = time.monotonic()
    frame = sos.rootsystem.algebra.frame
    if active is None:
        active = tuple(range(sos.r))
    tolerances = dict(tolerances or {})

    ids = list(range(samples))
    workers = _worker_count()
    chunk = max(1, (samples + workers - 1) // workers)
    chunks = [ids[i:i + chunk] for i in range(0, samples, chunk)]
    results = []
    if len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_chunk, sos, frame, c, seed, t_grid,
                                   lambda_range, active, tolerances)
                       for c in chunks]
            results = [f.result() for f in futures]
    else:
        results = [_run_chunk(sos, frame, c, seed, t_grid, lambda_range,
                              active, tolerances) for c in chunks]

    rows: list = []
    violations: list = []
    max_c = 0.0
    max_d = 0.0
    for rws, vls, (mc, md) in results:
        rows.extend(rws)
        violations.extend(vls)
        max_c = max(max_c, mc)
        max_d = max(max_d, md)
    return TrialReport(
        kind=kind, r=sos.r, active=tuple(active), samples=samples, seed=seed,
        t_grid=tuple(float(t) for t in t_grid), lambda_range=lambda_range,
        max_abs_coord=max_c, max_d_e=max_d,
        violations=tuple(violations), rows=tuple(rows),
        runtime_s=time.monotonic() - t0)


def horizontal_abelian_trial(sos: StrongOrthSet, samples: int = 200,
                             t_grid: Sequence[float] = (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0),
                             lambda_range: float = 2.0, seed: int = 0,
                             tolerances: Optional[dict] = None) -> TrialReport:
    """Polydisc trial restricted to the horizontal triples (degree -1).

    In high weight only part of the abelian subspace is tangent to
    horizontal directions; draws are confined to that part and the
    inactive coordinates must stay at zero (their tanh prediction is 0,
    so the main scan enforces it).  Frames with no horizontal triple
    return a not-applicable report.
    """
    active = tuple(i for i, tr in enumerate(sos.triples) if tr.degree == -1)
    if not active:
        return TrialReport(
            kind="horizontal", r=sos.r, active=(), samples=0, seed=seed,
            t_grid=tuple(float(t) for t in t_grid), lambda_range=lambda_range,
            max_abs_coord=0.0, max_d_e=0.0, violations=(), rows=(),
            runtime_s=0.0, applicable=False)
    report = polydisc_trial(
        sos, samples=samples, t_grid=t_grid, lambda_range=lambda_range,
        seed=seed, tolerances=tolerances, active=active, kind="horizontal")
    return report


def is_horizontal_direction(algebra: GradedLieAlgebra, x: np.ndarray,
                            tol: float = 1e-10) -> bool:
    from .liealg import is_horizontal
    return is_horizontal(algebra, x, tol=tol)
