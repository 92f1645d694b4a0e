"""Roots of the diagonal Cartan, their order, and the compliant Weyl basis.

The structural basis of :mod:`periodlab.liealg` already diagonalizes the
adjoint action of the diagonal Cartan subalgebra, so each off-Cartan basis
element is a root vector and its root is read off exactly as an integer
functional.  This module packages those roots, fixes a lexicographic
order built from a maximal independent set of noncompact roots, checks
the closure relations between compact and noncompact roots, and rescales
the root vectors into a Weyl basis compatible with both conjugations:

    tau_0(e_phi) =  e_{-phi}   for phi noncompact,
    tau_0(e_phi) = -e_{-phi}   for phi compact,
    [e_phi, e_{-phi}] = h_phi with phi(h_phi) = 2.

Root data stays rational end to end; only the final rescaling introduces
a square root and hence floating point.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

import numpy as np

from .liealg import GradedLieAlgebra, bracket, conj_real
from .rationals import (GaussianRational, nullspace_fraction, solve_fraction,
                        rational_rank, to_complex)


class RootSystemError(ValueError):
    """Root computation failed a structural guarantee."""


class WeylNormalizationError(RootSystemError):
    """No rescaling satisfies the conjugation constraints."""


@dataclass
class Root:
    index: int
    basis_index: int
    values: tuple[Fraction, ...]        # phi(h_u) on the Cartan basis
    coords: tuple[Fraction, ...]        # Killing-dual vector t_phi on the Cartan basis
    hodge_degree: int
    compact: bool
    vector_exact: np.ndarray
    positive: Optional[bool] = None
    lex_key: Optional[tuple[Fraction, ...]] = None  # center pairings, then basis coeffs
    vector: Optional[np.ndarray] = None  # Weyl-normalized, complex128
    negative_index: int = -1


@dataclass
class RootSystem:
    algebra: GradedLieAlgebra
    roots: list[Root]
    by_values: dict
    cartan_gram: tuple[tuple[Fraction, ...], ...]
    center_basis: list = field(default_factory=list)
    order_basis: list[int] = field(default_factory=list)
    simple_roots: list[int] = field(default_factory=list)
    serre_constants: dict = field(default_factory=dict)
    normalized: bool = False

    @property
    def rank(self) -> int:
        return self.algebra.rank

    def positive_roots(self) -> "list[Root]":
        return [r for r in self.roots if r.positive]

    def noncompact_positive(self) -> "list[Root]":
        return [r for r in self.roots if r.positive and not r.compact]

    def root_from_values(self, values) -> Optional[Root]:
        idx = self.by_values.get(tuple(values))
        return None if idx is None else self.roots[idx]

    def coroot_coeffs(self, root: Root) -> tuple[Fraction, ...]:
        """Coefficients of h_phi (the element with phi(h_phi) = 2)."""
        length = sum(v * c for v, c in zip(root.values, root.coords))
        if length <= 0:
            raise RootSystemError("root has nonpositive Killing length")
        return tuple(2 * c / length for c in root.coords)

    def coroot_matrix(self, root: Root) -> np.ndarray:
        return self.algebra.cartan_element(self.coroot_coeffs(root))


def compute_roots(algebra: GradedLieAlgebra) -> RootSystem:
    """Read the roots off the structural basis and verify one-dimensionality."""
    frame = algebra.frame
    sigma = frame.conj_perm
    transversal = algebra.cartan_transversal
    l = algebra.rank

    roots: list[Root] = []
    by_values: dict = {}
    cartan_set = set(algebra.cartan_index)
    for bidx in range(algebra.dim):
        if bidx in cartan_set:
            continue
        u, v = algebra.lead[bidx]
        values = tuple(
            Fraction((1 if u == t else 0) - (1 if u == sigma[t] else 0)
                     - (1 if v == t else 0) + (1 if v == sigma[t] else 0))
            for t in transversal
        )
        if all(x == 0 for x in values):
            raise RootSystemError("off-Cartan basis element with zero root")
        if values in by_values:
            raise RootSystemError(
                f"joint eigenspace of dimension > 1 at root {values}")
        # exact eigenvector check straight from the structure constants
        for t_pos, cidx in enumerate(algebra.cartan_index):
            coeffs = algebra.struct[cidx].get(bidx, {})
            expect = values[t_pos]
            got = coeffs.get(bidx, Fraction(0))
            if got != expect or any(k != bidx for k in coeffs):
                raise RootSystemError("Cartan action is not diagonal on the basis")
        by_values[values] = len(roots)
        roots.append(Root(
            index=len(roots),
            basis_index=bidx,
            values=values,
            coords=(),
            hodge_degree=algebra.degrees[bidx],
            compact=algebra.degrees[bidx] % 2 == 0,
            vector_exact=algebra.basis[bidx],
        ))

    if algebra.rank + len(roots) != algebra.dim:
        raise RootSystemError("dimension does not split as Cartan plus roots")

    # Killing form restricted to the Cartan, from the honest adjoint Gram
    gram = tuple(
        tuple(algebra.killing[ci][cj] for cj in algebra.cartan_index)
        for ci in algebra.cartan_index
    )
    # cross-check against the root-sum formula; both are exact
    for a in range(l):
        for b in range(l):
            total = sum((r.values[a] * r.values[b] for r in roots), Fraction(0))
            if gram[a][b] != total:
                raise RootSystemError("Killing Gram disagrees with root sums")

    gram_rows = [list(row) for row in gram]
    for r in roots:
        r.coords = tuple(solve_fraction(gram_rows, list(r.values)))

    for r in roots:
        neg = by_values.get(tuple(-x for x in r.values))
        if neg is None:
            raise RootSystemError("root system is not symmetric under negation")
        r.negative_index = neg

    return RootSystem(algebra=algebra, roots=roots, by_values=by_values,
                      cartan_gram=gram)


def set_lexicographic_order(rs: RootSystem) -> None:
    """Fix positivity so the split of the odd-degree part is reductive-stable.

    Positivity is lexicographic on a two-part key.  The head pairs the
    root against a canonical basis of the center of the even-degree
    subalgebra inside the Cartan dual (the annihilator of the compact
    roots under the Killing pairing, in reduced echelon form).  Compact
    roots pair to zero there, so whenever a noncompact root is decided by
    the head, adding any compact root cannot change its sign, and two
    same-sign head-decided roots cannot sum to a root at all: their sum
    would have a nonzero center pairing yet would have to be compact,
    since brackets of odd-degree elements have even degree.  The tail is
    the coefficient vector on a greedy maximal independent subset of the
    noncompact roots (enumeration order, completed from the compact
    ones); it settles compact roots and, in frames with center-orthogonal
    noncompact roots, the leftovers, for which no closure guarantee
    exists.
    """
    l = rs.rank
    chosen: list[int] = []
    chosen_rows: list[list[Fraction]] = []

    def try_add(root: Root) -> None:
        if len(chosen) == l:
            return
        candidate = chosen_rows + [list(root.values)]
        if rational_rank(candidate) > len(chosen_rows):
            chosen.append(root.index)
            chosen_rows.append(list(root.values))

    for r in rs.roots:
        if not r.compact:
            try_add(r)
    for r in rs.roots:
        if r.compact:
            try_add(r)
    if len(chosen) != l:
        raise RootSystemError("roots do not span the Cartan dual")

    rs.order_basis = chosen
    gram_rows = [list(row) for row in rs.cartan_gram]
    constraint_rows = [solve_fraction(gram_rows, list(r.values))
                       for r in rs.roots if r.compact]
    if constraint_rows:
        center = nullspace_fraction(constraint_rows)
    else:
        center = [[Fraction(1 if i == j else 0) for j in range(l)] for i in range(l)]
    center_duals = [solve_fraction(gram_rows, list(z)) for z in center]
    rs.center_basis = [tuple(z) for z in center]

    # columns of A are the order-basis value vectors
    a_rows = [[chosen_rows[j][t] for j in range(l)] for t in range(l)]
    for r in rs.roots:
        head = tuple(sum(v * d for v, d in zip(r.values, dual))
                     for dual in center_duals)
        lam = solve_fraction(a_rows, list(r.values))
        r.lex_key = head + tuple(lam)
        first = next((x for x in r.lex_key if x != 0), None)
        if first is None:
            raise RootSystemError("zero root in ordering")
        r.positive = first > 0

    n_pos = sum(1 for r in rs.roots if r.positive)
    if 2 * n_pos != len(rs.roots):
        raise RootSystemError("positivity does not split the roots in half")
    for r in rs.roots:
        if r.positive == rs.roots[r.negative_index].positive:
            raise RootSystemError("root and its negative share a sign")

    positives = [r for r in rs.roots if r.positive]
    pos_values = {r.values for r in positives}
    simple = []
    for r in positives:
        decomposable = any(
            tuple(a - b for a, b in zip(r.values, s.values)) in pos_values
            for s in positives if s.index != r.index
        )
        if not decomposable:
            simple.append(r.index)
    rs.simple_roots = simple


@dataclass(frozen=True)
class SumRelationsReport:
    checked: int
    violations: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def check_sum_relations(rs: RootSystem) -> SumRelationsReport:
    """Exhaustive exact scan of the compact/noncompact closure relations.

    Checks, over the full root list: a compact root plus a signed
    noncompact root never leaves the signed noncompact class; two
    noncompact roots of the same sign never sum to a root; brackets of
    root vectors land in the root space of the sum (or vanish), verified
    on the exact structure constants; and brackets of two same-sign
    noncompact root vectors vanish identically.
    """
    if any(r.positive is None for r in rs.roots):
        raise RootSystemError("call set_lexicographic_order first")
    violations: list[str] = []
    checked = 0
    alg = rs.algebra
    compact = [r for r in rs.roots if r.compact]
    noncompact = [r for r in rs.roots if not r.compact]

    def signed_class(root: Root) -> str:
        return f"{'p' if not root.compact else 'k'}{'+' if root.positive else '-'}"

    for a in compact:
        for b in noncompact:
            checked += 1
            total = tuple(x + y for x, y in zip(a.values, b.values))
            target = rs.root_from_values(total)
            if target is not None:
                if target.compact or target.positive != b.positive:
                    violations.append(
                        f"R1: {signed_class(a)}+{signed_class(b)} gave {signed_class(target)}")
            coeffs = alg.struct[a.basis_index].get(b.basis_index, {})
            allowed = set() if target is None else {target.basis_index}
            if set(coeffs) - allowed:
                violations.append("R3: compact bracket escaped the signed noncompact class")

    for a in noncompact:
        for b in noncompact:
            if a.index >= b.index or a.positive != b.positive:
                continue
            checked += 1
            total = tuple(x + y for x, y in zip(a.values, b.values))
            if any(x != 0 for x in total) and total in rs.by_values:
                violations.append("R2: two same-sign noncompact roots sum to a root")
            if alg.struct[a.basis_index].get(b.basis_index, {}):
                violations.append("R4: same-sign noncompact bracket is nonzero")

    return SumRelationsReport(checked=checked, violations=tuple(violations))


def normalize_weyl_basis(rs: RootSystem, tol: float = 1e-10) -> None:
    """Rescale every root-vector pair into the compliant Weyl basis.

    For each pair (phi, -phi) the structural vectors X+ and X- satisfy
    tau_0(X+) = mu X- with mu = +-1 exact, and [X+, X-] is an exact
    rational multiple 1/t of the coroot.  Solving |a|^2 = t/(mu eta) with
    eta = +1 (noncompact) or -1 (compact) fixes the rescaling up to phase;
    the phase is fixed by taking a real and positive.  Residuals of the
    target identities are verified at ``tol`` on the float output.
    """
    alg = rs.algebra
    done = set()
    for r in rs.roots:
        if r.index in done:
            continue
        s = rs.roots[r.negative_index]
        done.update((r.index, s.index))

        t0x = conj_real(alg, r.vector_exact)
        lead = alg.lead[s.basis_index]
        lead_val = alg.lead_val[s.basis_index]
        mu_g = t0x[lead] / lead_val
        if not (mu_g.is_real() and abs(mu_g.re) == 1):
            raise WeylNormalizationError(f"conjugation scalar {mu_g} is not a sign")
        diff = t0x - mu_g * s.vector_exact
        if any(bool(x) for x in diff.ravel()):
            raise WeylNormalizationError("tau_0 does not map the root pair to itself")
        mu = int(mu_g.re)

        coeffs = alg.struct[r.basis_index].get(s.basis_index, {})
        cartan_pos = {idx: pos for pos, idx in enumerate(alg.cartan_index)}
        if any(k not in cartan_pos for k in coeffs):
            raise WeylNormalizationError("[X+, X-] is not in the Cartan")
        h_vec = [Fraction(0)] * rs.rank
        for k, c in coeffs.items():
            h_vec[cartan_pos[k]] = c
        coroot = list(rs.coroot_coeffs(r))
        ratio = None
        for a_c, b_c in zip(h_vec, coroot):
            if b_c != 0:
                ratio = a_c / b_c
                break
        if ratio is None or any(a_c != ratio * b_c for a_c, b_c in zip(h_vec, coroot)):
            raise WeylNormalizationError("[X+, X-] is not proportional to the coroot")
        if ratio == 0:
            raise WeylNormalizationError("[X+, X-] vanishes")
        t = Fraction(1) / ratio

        eta = 1 if not r.compact else -1
        target = t / (mu * eta)
        if target <= 0:
            raise WeylNormalizationError(
                f"no real rescaling: t={t}, mu={mu}, eta={eta}")
        a = math.sqrt(float(target))
        b = a * mu * eta
        e_plus = a * to_complex(r.vector_exact)
        e_minus = b * to_complex(s.vector_exact)
        r.vector = e_plus
        s.vector = e_minus

        h_mat = to_complex(rs.coroot_matrix(r))
        res = max(
            float(np.max(np.abs(bracket(e_plus, e_minus) - h_mat))),
            float(np.max(np.abs(bracket(h_mat, e_plus) - 2 * e_plus))),
            float(np.max(np.abs(conj_real(alg, e_plus) - eta * e_minus))),
        )
        if res > tol * (1.0 + float(np.max(np.abs(h_mat)))):
            raise WeylNormalizationError(f"normalized identities off by {res}")

    rs.normalized = True
    _serre_constants(rs, tol)


def _serre_constants(rs: RootSystem, tol: float) -> None:
    """N_{alpha,beta} on the normalized basis, with reality checks."""
    alg = rs.algebra
    table: dict = {}
    for a in rs.roots:
        for b in rs.roots:
            if a.index == b.index or b.index == a.negative_index:
                continue
            total = tuple(x + y for x, y in zip(a.values, b.values))
            target = rs.root_from_values(total)
            if target is None:
                continue
            br = bracket(a.vector, b.vector)
            lead = alg.lead[target.basis_index]
            n = br[lead] / target.vector[lead]
            if abs(n.imag) > tol * (1 + abs(n)):
                raise WeylNormalizationError("structure constant is not real")
            if abs(n) < tol:
                raise WeylNormalizationError("vanishing structure constant on a root sum")
            table[(a.index, b.index)] = float(n.real)
    for (i, j), n in table.items():
        ni = rs.roots[i].negative_index
        nj = rs.roots[j].negative_index
        mirror = table.get((ni, nj))
        if mirror is None or abs(mirror + n) > 1e-9 * (1 + abs(n)):
            raise WeylNormalizationError("N_{-a,-b} = -N_{a,b} fails")
    rs.serre_constants = table


def serre_table_rows(rs: RootSystem) -> "list[tuple]":
    rows = []
    for (i, j), n in sorted(rs.serre_constants.items()):
        rows.append((i, j, str(rs.roots[i].values), str(rs.roots[j].values), n))
    return rows


# ---------------------------------------------------------------------------
# real-form bases on the normalized root vectors


def _require_normalized(rs: RootSystem) -> None:
    if not rs.normalized:
        raise RootSystemError("call normalize_weyl_basis first")


def cartan_real_basis(rs: RootSystem) -> "list[np.ndarray]":
    """Basis of the real Cartan h_0 = i h_R (fixed by tau_0)."""
    alg = rs.algebra
    return [1j * alg.basis_c[ci] for ci in alg.cartan_index]


def compact_real_basis(rs: RootSystem) -> "list[np.ndarray]":
    """Basis of k_0: real Cartan plus compact root combinations."""
    _require_normalized(rs)
    out = cartan_real_basis(rs)
    for r in rs.roots:
        if r.positive and r.compact:
            e, f = r.vector, rs.roots[r.negative_index].vector
            out.append(e - f)
            out.append(1j * (e + f))
    return out


def noncompact_real_basis(rs: RootSystem) -> "list[np.ndarray]":
    """Basis of p_0: for noncompact phi, e+e' and i(e-e')."""
    _require_normalized(rs)
    out = []
    for r in rs.roots:
        if r.positive and not r.compact:
            e, f = r.vector, rs.roots[r.negative_index].vector
            out.append(e + f)
            out.append(1j * (e - f))
    return out


def compact_form_basis(rs: RootSystem) -> "list[np.ndarray]":
    """Basis of the compact real form g_c = k_0 + i p_0."""
    _require_normalized(rs)
    out = cartan_real_basis(rs)
    for r in rs.roots:
        if r.positive:
            e, f = r.vector, rs.roots[r.negative_index].vector
            out.append(e - f)
            out.append(1j * (e + f))
    return out
