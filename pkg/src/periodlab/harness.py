"""End-to-end verification pipeline and report emission.

A trial configuration fixes the frame shape, the sampling plan, and the
tolerances.  The pipeline then runs the named checks in dependency
order: frame positivity, algebra construction, root combinatorics,
the strongly orthogonal set, cell membership cross-validation, the
sl2 factor identity, and the polydisc sampling trials.  A structural
failure skips everything built on top of it rather than reporting
noise.

Reports are deterministic byte for byte: no timestamps or durations are
serialized, dictionary keys are sorted, and floats print through repr.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .bigcell import (FlagPoint, membership_in_big_cell, rank_isomorphism_oracle,
                      cell_coordinate, IN_CELL, OUT_OF_CELL)
from .frame import FlagLocation, build_reference_frame, check_hodge_riemann
from .liealg import killing_form, lie_algebra_basis
from .orbits import (OrbitRow, TrialReport, horizontal_abelian_trial,
                     polydisc_trial, verify_sl2_decomposition)
from .roots import (check_sum_relations, compact_form_basis, compute_roots,
                    normalize_weyl_basis, set_lexicographic_order)
from .strongorth import centralizer_check, greedy_strongly_orthogonal

PRESETS = {
    "sl2": (1, (1, 1)),
    "sp4": (1, (2, 2)),
    "k3toy": (2, (1, 2, 1)),
    "nonhermitian": (2, (2, 2, 2)),
}

DEFAULT_T_GRID = (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0)

DEFAULT_TOLERANCES = {
    "coord_bound": 1e-12,
    "tanh_match": 1e-9,
    "d_e_bound": 1e-9,
    "q_preserve": 1e-9,
    "sl2_decomposition": 1e-10,
}

CSV_HEADER = ("sample_id, t, i, lambda_i, coord_re, coord_im, coord_abs, "
              "tanh_pred, d_E, in_big_cell")


class ConfigError(ValueError):
    """Malformed or inconsistent trial configuration."""


@dataclass(frozen=True)
class TrialConfig:
    weight: int
    hodge: tuple[int, ...]
    samples: int = 1000
    t_grid: tuple[float, ...] = DEFAULT_T_GRID
    lambda_range: float = 2.0
    seed: int = 0
    flag_checks: int = 100
    decomposition_checks: int = 20
    horizontal_samples: int = 200
    tolerances: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_TOLERANCES))

    @classmethod
    def preset(cls, name: str, **overrides) -> "TrialConfig":
        if name not in PRESETS:
            raise ConfigError(
                f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
        weight, hodge = PRESETS[name]
        return cls(weight=weight, hodge=tuple(hodge), **overrides)

    @classmethod
    def from_json(cls, text: str) -> "TrialConfig":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"configuration is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a JSON object")
        data = dict(raw)
        if "preset" in data:
            name = data.pop("preset")
            if name not in PRESETS:
                raise ConfigError(
                    f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
            weight, hodge = PRESETS[name]
            data.setdefault("weight", weight)
            data.setdefault("hodge", list(hodge))
        known = {"weight", "hodge", "samples", "t_grid", "lambda_range",
                 "seed", "flag_checks", "decomposition_checks",
                 "horizontal_samples", "tolerances"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        if "weight" not in data or "hodge" not in data:
            raise ConfigError("configuration needs weight and hodge (or a preset)")

        def need_int(key, minimum):
            v = data.get(key)
            if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
                raise ConfigError(f"{key} must be an integer >= {minimum}")
            return v

        weight = need_int("weight", 0)
        hodge = data["hodge"]
        if (not isinstance(hodge, list) or len(hodge) != weight + 1
                or not all(isinstance(x, int) and not isinstance(x, bool)
                           and x >= 1 for x in hodge)):
            raise ConfigError(
                "hodge must be a list of weight+1 integers, each >= 1")
        kwargs = {"weight": weight, "hodge": tuple(hodge)}
        for key, minimum in (("samples", 1), ("seed", 0), ("flag_checks", 0),
                             ("decomposition_checks", 0),
                             ("horizontal_samples", 0)):
            if key in data:
                kwargs[key] = need_int(key, minimum)
        if "t_grid" in data:
            grid = data["t_grid"]
            if (not isinstance(grid, list) or not grid
                    or not all(isinstance(x, (int, float))
                               and not isinstance(x, bool)
                               and math.isfinite(x) for x in grid)):
                raise ConfigError("t_grid must be a nonempty list of finite numbers")
            kwargs["t_grid"] = tuple(float(x) for x in grid)
        if "lambda_range" in data:
            lr = data["lambda_range"]
            if (not isinstance(lr, (int, float)) or isinstance(lr, bool)
                    or not math.isfinite(lr) or lr <= 0):
                raise ConfigError("lambda_range must be a positive finite number")
            kwargs["lambda_range"] = float(lr)
        if "tolerances" in data:
            tols = data["tolerances"]
            if not isinstance(tols, dict):
                raise ConfigError("tolerances must be an object")
            bad = set(tols) - set(DEFAULT_TOLERANCES)
            if bad:
                raise ConfigError(f"unknown tolerance keys: {sorted(bad)}")
            merged = dict(DEFAULT_TOLERANCES)
            for k, v in tols.items():
                if (not isinstance(v, (int, float)) or isinstance(v, bool)
                        or not math.isfinite(v) or v <= 0):
                    raise ConfigError(f"tolerance {k} must be a positive number")
                merged[k] = float(v)
            kwargs["tolerances"] = merged
        return cls(**kwargs)

    def canonical(self) -> dict:
        return {
            "weight": self.weight,
            "hodge": list(self.hodge),
            "samples": self.samples,
            "t_grid": [float(t) for t in self.t_grid],
            "lambda_range": float(self.lambda_range),
            "seed": self.seed,
            "flag_checks": self.flag_checks,
            "decomposition_checks": self.decomposition_checks,
            "horizontal_samples": self.horizontal_samples,
            "tolerances": {k: float(v) for k, v in sorted(self.tolerances.items())},
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True,
                          separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: str  # pass / fail / skip / not_applicable
    details: dict
    duration_s: float

    @property
    def ok(self) -> bool:
        return self.status in ("pass", "not_applicable")


@dataclass(frozen=True)
class VerificationReport:
    config: TrialConfig
    checks: tuple[CheckResult, ...]
    rows: tuple[OrbitRow, ...]

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


@dataclass
class BuiltStructures:
    frame: object
    algebra: object
    rootsystem: object
    sos: object


def build_structures(config: TrialConfig) -> BuiltStructures:
    """Construct the full tower for a configuration, raising on failure."""
    from .frame import HodgeNumbers

    frame = build_reference_frame(
        HodgeNumbers.create(config.weight, list(config.hodge)))
    algebra = lie_algebra_basis(frame)
    rs = compute_roots(algebra)
    set_lexicographic_order(rs)
    normalize_weyl_basis(rs)
    sos = greedy_strongly_orthogonal(rs)
    return BuiltStructures(frame=frame, algebra=algebra, rootsystem=rs, sos=sos)


def _check_frame(frame) -> tuple[str, dict]:
    m = frame.numbers.m
    report = check_hodge_riemann(frame, np.eye(m, dtype=complex))
    ok = (report.location is FlagLocation.IN_DOMAIN
          and report.min_positivity_eig > 0.9)
    return ("pass" if ok else "fail", {
        "m": m,
        "hodge": list(frame.numbers.h),
        "location": report.location.value,
        "isotropy_residual": float(report.isotropy_residual),
        "min_positivity_eig": float(report.min_positivity_eig),
    })


def _check_algebra(algebra) -> tuple[str, dict]:
    hist: dict[str, int] = {}
    for d in algebra.degrees:
        hist[str(d)] = hist.get(str(d), 0) + 1
    ok = sum(hist.values()) == algebra.dim and algebra.rank >= 1
    return ("pass" if ok else "fail", {
        "dim": algebra.dim,
        "rank": algebra.rank,
        "degree_histogram": dict(sorted(hist.items(), key=lambda kv: int(kv[0]))),
    })


def _check_roots(rs) -> tuple[str, dict]:
    rel = check_sum_relations(rs)
    ok = rel.passed
    return ("pass" if ok else "fail", {
        "n_roots": len(rs.roots),
        "n_compact": sum(1 for r in rs.roots if r.compact),
        "n_noncompact_positive": len(rs.noncompact_positive()),
        "relations_checked": rel.checked,
        "relation_violations": list(rel.violations),
    })


def _check_compact_form(rs) -> tuple[str, dict]:
    basis = compact_form_basis(rs)
    k = len(basis)
    gram = np.empty((k, k))
    for i, bi in enumerate(basis):
        for j, bj in enumerate(basis):
            gram[i, j] = complex(killing_form(rs.algebra, bi, bj)).real
    gram = (gram + gram.T) / 2
    top = float(np.max(np.linalg.eigvalsh(gram)))
    ok = k == rs.algebra.dim and top < -1e-8
    return ("pass" if ok else "fail", {
        "dim": k,
        "killing_max_eig": top,
    })


def _check_strongorth(rs, sos) -> tuple[str, dict]:
    cent = centralizer_check(rs, sos)
    return ("pass" if cent.passed else "fail", {
        "r": sos.r,
        "degrees": [tr.degree for tr in sos.triples],
        "centralizer_dim": cent.dimension,
        "centralizer_expected": cent.expected,
        "span_residual": float(cent.span_residual),
    })


def _check_bigcell(frame, config: TrialConfig) -> tuple[str, dict]:
    numbers = frame.numbers
    m = numbers.m
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=config.seed, spawn_key=(1001,)))
    agree = 0
    mismatches = 0
    indeterminate = 0
    uniq_worst = 0.0
    tested_unique = 0
    for _ in range(config.flag_checks):
        mat = (rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m)))
        try:
            flag = FlagPoint.create(numbers, mat)
        except ValueError:
            continue
        rep = membership_in_big_cell(flag)
        oracle = rank_isomorphism_oracle(flag)
        if rep.status == IN_CELL:
            if oracle:
                agree += 1
            else:
                mismatches += 1
        elif rep.status == OUT_OF_CELL:
            if oracle:
                mismatches += 1
            else:
                agree += 1
        else:
            indeterminate += 1
            continue
        if rep.status == IN_CELL:
            # same flag, different adapted basis: L must not move
            mix = np.eye(m, dtype=complex)
            blocks = [numbers.block_range(a) for a in range(numbers.weight + 1)]
            for bi, blk in enumerate(blocks):
                sub = (rng.standard_normal((len(blk), len(blk)))
                       + 1j * rng.standard_normal((len(blk), len(blk))))
                sub += 3.0 * np.eye(len(blk))
                mix[blk.start:blk.stop, blk.start:blk.stop] = sub
                for other in blocks[:bi]:
                    mix[other.start:other.stop, blk.start:blk.stop] = 0.3 * (
                        rng.standard_normal((len(other), len(blk)))
                        + 1j * rng.standard_normal((len(other), len(blk))))
            try:
                l1 = cell_coordinate(flag).L
                l2 = cell_coordinate(FlagPoint.create(numbers, mat @ mix)).L
            except ValueError:
                continue
            uniq_worst = max(uniq_worst, float(np.max(np.abs(l1 - l2))))
            tested_unique += 1
    ok = mismatches == 0 and uniq_worst <= 1e-10
    return ("pass" if ok else "fail", {
        "flags": config.flag_checks,
        "route_agreements": agree,
        "route_mismatches": mismatches,
        "indeterminate": indeterminate,
        "uniqueness_tested": tested_unique,
        "uniqueness_worst": uniq_worst,
    })


def _check_sl2(sos, config: TrialConfig) -> tuple[str, dict]:
    tol = config.tolerances.get("sl2_decomposition", 1e-10)
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=config.seed, spawn_key=(2002,)))
    worst = 0.0
    checked = 0
    for i in range(sos.r):
        zs = [0j, 20 + 0j, 20j]
        for _ in range(config.decomposition_checks):
            z = complex(rng.uniform(-1, 1), rng.uniform(-1, 1)) * 20
            if abs(z) > 20:
                z *= 19.9 / abs(z)
            zs.append(z)
        for z in zs:
            rep = verify_sl2_decomposition(sos, i, z, tol=tol)
            worst = max(worst, rep.residual)
            checked += 1
    ok = worst <= tol
    return ("pass" if ok else "fail", {
        "checked": checked,
        "worst_residual": worst,
        "tolerance": tol,
    })


def _trial_details(rep: TrialReport) -> dict:
    return {
        "samples": rep.samples,
        "r": rep.r,
        "active": list(rep.active),
        "max_abs_coord": rep.max_abs_coord,
        "max_d_E": rep.max_d_e,
        "violations": len(rep.violations),
        "violation_kinds": sorted({v.kind for v in rep.violations}),
    }


def run_pipeline(config: TrialConfig) -> VerificationReport:
    checks: list[CheckResult] = []
    rows: tuple[OrbitRow, ...] = ()

    def record(name, fn, *args):
        start = time.monotonic()
        try:
            status, details = fn(*args)
        except Exception as exc:  # honest failure, not a crash
            status, details = "fail", {"error": f"{type(exc).__name__}: {exc}"}
        checks.append(CheckResult(name=name, status=status, details=details,
                                  duration_s=time.monotonic() - start))
        return status == "pass"

    def skip(names):
        for name in names:
            checks.append(CheckResult(name=name, status="skip",
                                      details={}, duration_s=0.0))

    try:
        built = build_structures(config)
    except Exception as exc:
        checks.append(CheckResult(
            name="frame", status="fail",
            details={"error": f"{type(exc).__name__}: {exc}"}, duration_s=0.0))
        skip(["algebra", "roots", "compact_form", "strongorth", "bigcell",
              "sl2_decomposition", "polydisc", "horizontal"])
        return VerificationReport(config=config, checks=tuple(checks), rows=())

    structural = True
    structural &= record("frame", _check_frame, built.frame)
    structural &= record("algebra", _check_algebra, built.algebra)
    structural &= record("roots", _check_roots, built.rootsystem)
    structural &= record("compact_form", _check_compact_form, built.rootsystem)
    structural &= record("strongorth", _check_strongorth,
                         built.rootsystem, built.sos)
    if not structural:
        skip(["bigcell", "sl2_decomposition", "polydisc", "horizontal"])
        return VerificationReport(config=config, checks=tuple(checks), rows=())

    record("bigcell", _check_bigcell, built.frame, config)
    record("sl2_decomposition", _check_sl2, built.sos, config)

    start = time.monotonic()
    try:
        trial = polydisc_trial(
            built.sos, samples=config.samples, t_grid=config.t_grid,
            lambda_range=config.lambda_range, seed=config.seed,
            tolerances=dict(config.tolerances))
        rows = trial.rows
        checks.append(CheckResult(
            name="polydisc", status="pass" if trial.passed else "fail",
            details=_trial_details(trial), duration_s=time.monotonic() - start))
    except Exception as exc:
        checks.append(CheckResult(
            name="polydisc", status="fail",
            details={"error": f"{type(exc).__name__}: {exc}"},
            duration_s=time.monotonic() - start))

    start = time.monotonic()
    try:
        horiz = horizontal_abelian_trial(
            built.sos, samples=config.horizontal_samples, t_grid=config.t_grid,
            lambda_range=config.lambda_range, seed=config.seed,
            tolerances=dict(config.tolerances))
        if not horiz.applicable:
            status = "not_applicable"
        else:
            status = "pass" if horiz.passed else "fail"
        checks.append(CheckResult(
            name="horizontal", status=status, details=_trial_details(horiz),
            duration_s=time.monotonic() - start))
    except Exception as exc:
        checks.append(CheckResult(
            name="horizontal", status="fail",
            details={"error": f"{type(exc).__name__}: {exc}"},
            duration_s=time.monotonic() - start))

    return VerificationReport(config=config, checks=tuple(checks), rows=rows)


# ---------------------------------------------------------------------------
# emission


def _summary(report: VerificationReport) -> dict:
    out = {"max_abs_coord": 0.0, "max_d_E": 0.0, "violations": 0}
    for name in ("polydisc", "horizontal"):
        try:
            c = report.check(name)
        except KeyError:
            continue
        if c.status in ("skip", "not_applicable") or "error" in c.details:
            continue
        out["max_abs_coord"] = max(out["max_abs_coord"],
                                   c.details.get("max_abs_coord", 0.0))
        out["max_d_E"] = max(out["max_d_E"], c.details.get("max_d_E", 0.0))
        out["violations"] += c.details.get("violations", 0)
    return out


def emit_report(report: VerificationReport, fmt: str = "text") -> str:
    if fmt == "json":
        payload = {
            "config": report.config.canonical(),
            "config_hash": report.config.config_hash(),
            "passed": report.passed,
            "checks": [
                {"name": c.name, "status": c.status, "details": c.details}
                for c in report.checks
            ],
            "summary": _summary(report),
        }
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        lines = [CSV_HEADER]
        for row in report.rows:
            lines.append(
                f"{row.sample_id}, {row.t!r}, {row.index}, {row.lambda_i!r}, "
                f"{row.coord.real!r}, {row.coord.imag!r}, {abs(row.coord)!r}, "
                f"{row.tanh_pred!r}, {row.d_e!r}, {int(row.in_big_cell)}")
        return "\n".join(lines) + "\n"
    if fmt == "text":
        glyph = {"pass": "ok ", "fail": "FAIL", "skip": "skip",
                 "not_applicable": "n/a "}
        lines = [f"configuration {report.config.config_hash()[:12]}  "
                 f"weight={report.config.weight} "
                 f"hodge={list(report.config.hodge)}"]
        for c in report.checks:
            extra = ""
            if "error" in c.details:
                extra = f"  {c.details['error']}"
            elif c.name == "polydisc" and c.details:
                extra = (f"  max|coord|={c.details['max_abs_coord']:.6g}"
                         f"  max d_E={c.details['max_d_E']:.6g}"
                         f"  violations={c.details['violations']}")
            elif c.name == "roots" and c.details:
                extra = (f"  roots={c.details['n_roots']}"
                         f"  relation checks={c.details['relations_checked']}")
            elif c.name == "strongorth" and c.details:
                extra = f"  r={c.details['r']}"
            lines.append(f"  [{glyph.get(c.status, c.status)}] {c.name}{extra}")
        lines.append("verdict: " + ("PASS" if report.passed else "FAIL"))
        return "\n".join(lines) + "\n"
    raise ConfigError(f"unknown report format {fmt!r}")
