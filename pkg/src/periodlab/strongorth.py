"""Greedy strongly orthogonal roots, their sl2 triples, and Ad(K) reduction.

Two roots are strongly orthogonal when neither their sum nor their
difference is a root (nor zero).  The greedy scan over the ordered
positive noncompact roots yields a set Lambda whose pair sums x_i =
e_{phi_i} + e_{-phi_i} span a maximal abelian subspace of p_0; the
reduction routine pushes an arbitrary element of p_0 into that subspace
by a compact-group conjugation, found numerically.

Each triple is stored with e_plus on the negative-degree side (the
strictly block-lower nilpotent half), flipping the lex-positive pair
when needed; the flip is recorded, not hidden.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg
import scipy.optimize

from .liealg import bracket, conj_compact, conj_real, killing_form
from .rationals import rational_rank, to_complex
from .roots import Root, RootSystem, RootSystemError, noncompact_real_basis, compact_real_basis


class StrongOrthError(RootSystemError):
    """The greedy set failed one of its guaranteed invariants."""


def strongly_orthogonal(rs: RootSystem, a: Root, b: Root) -> bool:
    """Exact test on rational root values: a +- b not a root and not zero."""
    total = tuple(x + y for x, y in zip(a.values, b.values))
    diff = tuple(x - y for x, y in zip(a.values, b.values))
    for v in (total, diff):
        if all(x == 0 for x in v) or v in rs.by_values:
            return False
    return True


@dataclass(frozen=True)
class StrongOrthTriple:
    root_index: int            # the lex-positive root of the pair
    degree: int                # hodge degree of e_plus (always odd, negative)
    plus_is_lex_positive: bool
    e_plus: np.ndarray
    e_minus: np.ndarray
    h: np.ndarray


@dataclass(frozen=True)
class StrongOrthSet:
    rootsystem: RootSystem
    lam: tuple[int, ...]       # indices of the chosen lex-positive roots, ascending
    triples: tuple[StrongOrthTriple, ...]
    x_basis: tuple[np.ndarray, ...]
    y_basis: tuple[np.ndarray, ...]

    @property
    def r(self) -> int:
        return len(self.lam)

    def abelian_element(self, coeffs) -> np.ndarray:
        if len(coeffs) != self.r:
            raise ValueError("need one coefficient per strongly orthogonal root")
        m = self.rootsystem.algebra.m
        out = np.zeros((m, m), dtype=complex)
        for c, x in zip(coeffs, self.x_basis):
            out = out + float(c) * x
        return out


def greedy_strongly_orthogonal(rs: RootSystem) -> StrongOrthSet:
    if not rs.normalized:
        raise RootSystemError("call normalize_weyl_basis first")
    positives = sorted(rs.noncompact_positive(), key=lambda r: r.lex_key)
    lam: list[Root] = []
    for cand in positives:
        if all(strongly_orthogonal(rs, cand, prev) for prev in lam):
            lam.append(cand)

    # guaranteed properties, checked exactly
    for i, a in enumerate(lam):
        for b in lam[:i]:
            pairing = sum(v * d for v, d in zip(a.values, b.coords))
            if pairing != 0:
                raise StrongOrthError("strongly orthogonal pair with B(a,b) != 0")
    if rational_rank([list(r.values) for r in lam]) != len(lam):
        raise StrongOrthError("greedy set is linearly dependent")
    for cand in positives:
        if cand not in lam and all(strongly_orthogonal(rs, cand, p) for p in lam):
            raise StrongOrthError("greedy set is not maximal")

    triples = []
    xs, ys = [], []
    for root in lam:
        neg = rs.roots[root.negative_index]
        if root.hodge_degree < 0:
            plus, minus, keep = root, neg, True
        else:
            plus, minus, keep = neg, root, False
        e_p, e_m = plus.vector, minus.vector
        h = to_complex(rs.coroot_matrix(plus))
        scale = 1.0 + float(np.max(np.abs(h)))
        res = max(
            float(np.max(np.abs(bracket(h, e_p) - 2 * e_p))),
            float(np.max(np.abs(bracket(h, e_m) + 2 * e_m))),
            float(np.max(np.abs(bracket(e_p, e_m) - h))),
        )
        if res > 1e-12 * scale:
            raise StrongOrthError(f"sl2 relations fail at residual {res}")
        triples.append(StrongOrthTriple(
            root_index=root.index, degree=plus.hodge_degree,
            plus_is_lex_positive=keep, e_plus=e_p, e_minus=e_m, h=h))
        xs.append(e_p + e_m)
        ys.append(1j * (e_p - e_m))

    for i in range(len(triples)):
        for j in range(i):
            for a in (triples[i].e_plus, triples[i].e_minus):
                for b in (triples[j].e_plus, triples[j].e_minus):
                    if float(np.max(np.abs(bracket(a, b)))) > 1e-12:
                        raise StrongOrthError("cross-pair bracket does not vanish")

    return StrongOrthSet(
        rootsystem=rs, lam=tuple(r.index for r in lam),
        triples=tuple(triples), x_basis=tuple(xs), y_basis=tuple(ys))


# ---------------------------------------------------------------------------
# centralizer of the abelian subspace inside p_0


@dataclass(frozen=True)
class CentralizerReport:
    dimension: int
    expected: int
    span_residual: float

    @property
    def passed(self) -> bool:
        return self.dimension == self.expected and self.span_residual <= 1e-8


def centralizer_check(rs: RootSystem, sos: StrongOrthSet) -> CentralizerReport:
    """Nullspace of X -> ([X, x_1], ..., [X, x_r]) on p_0, compared to span(x)."""
    p0 = noncompact_real_basis(rs)
    cols = []
    for v in p0:
        stacked = np.concatenate([bracket(v, x).ravel() for x in sos.x_basis])
        cols.append(np.concatenate([stacked.real, stacked.imag]))
    mat = np.array(cols, dtype=float).T
    _, s, vt = np.linalg.svd(mat)
    tol = max(mat.shape) * (s[0] if s.size else 1.0) * np.finfo(float).eps
    null = vt[np.sum(s > max(tol, 1e-12)):]

    xcols = np.array(
        [np.concatenate([x.ravel().real, x.ravel().imag]) for x in sos.x_basis],
        dtype=float).T
    p0cols = np.array([np.concatenate([v.ravel().real, v.ravel().imag]) for v in p0],
                      dtype=float).T
    worst = 0.0
    for row in null:
        vec = p0cols @ row
        if xcols.size:
            fit = np.linalg.lstsq(xcols, vec, rcond=None)[0]
            gap = float(np.linalg.norm(xcols @ fit - vec))
        else:
            gap = float(np.linalg.norm(vec))
        worst = max(worst, gap / (1.0 + float(np.linalg.norm(vec))))
    return CentralizerReport(dimension=len(null), expected=sos.r, span_residual=worst)


# ---------------------------------------------------------------------------
# numerical Ad(K) reduction


@dataclass(frozen=True)
class ReductionResult:
    k: np.ndarray              # unitary group element
    y: np.ndarray              # element of span(x_basis)
    coeffs: np.ndarray
    residual: float            # |Ad(k) y - X|_F / (1 + |X|_F)
    norm_drift: float          # Killing-norm mismatch between X and y
    converged: bool
    trials: int
    message: str


class ReductionContext:
    """Precomputed frames for repeated reductions against one Lambda."""

    def __init__(self, rs: RootSystem, sos: StrongOrthSet):
        alg = rs.algebra
        self.algebra = alg
        self.sos = sos
        self.p0 = noncompact_real_basis(rs)
        self.k0 = compact_real_basis(rs)
        self.k_stack = np.stack(self.k0) if self.k0 else np.zeros((0, alg.m, alg.m), complex)
        p0cols = np.array(
            [np.concatenate([v.ravel().real, v.ravel().imag]) for v in self.p0],
            dtype=float).T
        self.p0_pinv = np.linalg.pinv(p0cols)
        d = len(self.p0)
        gram = np.empty((d, d))
        for i in range(d):
            for j in range(i + 1):
                gram[i, j] = gram[j, i] = killing_form(alg, self.p0[i], self.p0[j]).real
        self.gram = gram
        xc = np.array([self.p0_pinv @ np.concatenate([x.ravel().real, x.ravel().imag])
                       for x in sos.x_basis])
        self.x_coords = xc
        if xc.size:
            inner = xc @ gram @ xc.T
            proj = xc.T @ np.linalg.solve(inner, xc @ gram)
        else:
            proj = np.zeros((d, d))
        rest = np.eye(d) - proj
        self.dist_quad = rest.T @ gram @ rest
        self.proj = proj

    def coords(self, mat: np.ndarray) -> np.ndarray:
        return self.p0_pinv @ np.concatenate([mat.ravel().real, mat.ravel().imag])

    def span_coeffs(self, w: np.ndarray) -> np.ndarray:
        xc = self.x_coords
        if not xc.size:
            return np.zeros(0)
        return np.linalg.solve(xc @ self.gram @ xc.T, xc @ self.gram @ w)


def reduce_to_maximal_abelian(
    rs: RootSystem,
    sos: StrongOrthSet,
    x: np.ndarray,
    tol: float = 1e-8,
    max_restarts: int = 8,
    max_iter: int = 400,
    seed: int = 0,
    ctx: Optional[ReductionContext] = None,
) -> ReductionResult:
    """Find k in exp(k_0) and y in span(x_basis) with Ad(k)y close to x.

    Existence is a theorem; the search is plain quasi-Newton descent on
    the squared Killing distance from Ad(k)^{-1} x to the abelian
    subspace, restarted from random compact-group elements until the
    matrix-level residual passes ``tol``.  Non-convergence returns the
    best trial, never raises.
    """
    alg = rs.algebra
    # precondition: x in p_0, i.e. tau_c(x) = -x and tau_0(x) = x within 1e-10
    scale = 1.0 + float(np.max(np.abs(x)))
    if float(np.max(np.abs(conj_real(alg, x) - x))) > 1e-10 * scale:
        raise ValueError("input is not fixed by the real conjugation")
    if float(np.max(np.abs(conj_compact(alg, x) + x))) > 1e-10 * scale:
        raise ValueError("input is not in the -1 eigenspace of the compact conjugation")

    if ctx is None:
        ctx = ReductionContext(rs, sos)
    nk = len(ctx.k0)
    xnorm = 1.0 + float(np.linalg.norm(x))
    x_kill = killing_form(alg, x, x).real

    best: Optional[ReductionResult] = None
    for trial in range(max_restarts):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(trial,)))
        if trial == 0 or nk == 0:
            u = np.eye(alg.m, dtype=complex)
        else:
            z0 = rng.normal(scale=0.5, size=nk)
            u = scipy.linalg.expm(np.tensordot(z0, ctx.k_stack, axes=1))

        def value_and_grad(z, u=u):
            zmat = np.tensordot(z, ctx.k_stack, axes=1)
            core = u.conj().T @ x @ u
            step = scipy.linalg.expm(zmat)
            g = step.conj().T @ core @ step
            w = ctx.coords(g)
            aw = ctx.dist_quad @ w
            grad = np.empty(nk)
            for i in range(nk):
                dstep = scipy.linalg.expm_frechet(zmat, ctx.k_stack[i],
                                                  compute_expm=False)
                dg = dstep.conj().T @ core @ step + step.conj().T @ core @ dstep
                grad[i] = 2.0 * float(ctx.coords(dg) @ aw)
            return float(w @ aw), grad

        if nk:
            opt = scipy.optimize.minimize(
                value_and_grad, np.zeros(nk), jac=True, method="BFGS",
                options={"maxiter": max_iter, "gtol": 1e-15})
            u = u @ scipy.linalg.expm(np.tensordot(opt.x, ctx.k_stack, axes=1))

        g = u.conj().T @ x @ u
        coeffs = ctx.span_coeffs(ctx.coords(g))
        y = sum((c * xb for c, xb in zip(coeffs, sos.x_basis)),
                np.zeros_like(x))
        residual = float(np.linalg.norm(u @ y @ u.conj().T - x)) / xnorm
        y_kill = killing_form(alg, y, y).real
        drift = abs(y_kill - x_kill) / (1.0 + abs(x_kill))
        result = ReductionResult(
            k=u, y=y, coeffs=coeffs, residual=residual, norm_drift=drift,
            converged=residual <= tol, trials=trial + 1,
            message="ok" if residual <= tol else "stalled above tolerance")
        if best is None or result.residual < best.residual:
            best = result
        if result.converged:
            break
    return best
