"""Command line interface.

Exit codes: 0 when every requested check passes, 1 when a check fails,
2 for configuration or usage problems.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .harness import (PRESETS, ConfigError, TrialConfig, build_structures,
                      emit_report, run_pipeline)
from .orbits import polydisc_trial
from .roots import serre_table_rows


def _load_config(args) -> TrialConfig:
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read configuration file: {exc}") from exc
        return TrialConfig.from_json(text)
    preset = getattr(args, "preset", None) or "sp4"
    overrides = {}
    for key in ("samples", "seed"):
        v = getattr(args, key, None)
        if v is not None:
            overrides[key] = v
    return TrialConfig.preset(preset, **overrides)


def _emit(text: str, args) -> None:
    out = getattr(args, "output", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_frame(args) -> int:
    config = _load_config(args)
    built = build_structures(config)
    fr = built.frame
    data = {
        "weight": fr.numbers.weight,
        "hodge": list(fr.numbers.h),
        "filtration_dims": list(fr.numbers.f),
        "m": fr.numbers.m,
        "conjugation_pairs": list(fr.conj_perm),
        "pairing_diagonal": [str(fr.Q[a][fr.conj_perm[a]])
                             for a in range(fr.numbers.m)],
    }
    if args.format == "json":
        _emit(json.dumps(data, sort_keys=True, indent=2) + "\n", args)
    else:
        lines = [f"weight {data['weight']}, hodge numbers {data['hodge']}",
                 f"total dimension m = {data['m']}",
                 f"filtration dimensions {data['filtration_dims']}",
                 f"conjugation pairing {data['conjugation_pairs']}",
                 f"pairing values on pairs {data['pairing_diagonal']}"]
        _emit("\n".join(lines) + "\n", args)
    return 0


def _cmd_roots(args) -> int:
    config = _load_config(args)
    built = build_structures(config)
    rs = built.rootsystem
    by_degree: dict[str, int] = {}
    for r in rs.roots:
        by_degree[str(r.hodge_degree)] = by_degree.get(str(r.hodge_degree), 0) + 1
    data = {
        "rank": rs.rank,
        "n_roots": len(rs.roots),
        "n_compact": sum(1 for r in rs.roots if r.compact),
        "by_degree": dict(sorted(by_degree.items(), key=lambda kv: int(kv[0]))),
        "simple_roots": [[str(v) for v in rs.roots[i].values]
                         for i in rs.simple_roots],
        "serre_rows": [[str(x) for x in row] for row in serre_table_rows(rs)],
    }
    if args.format == "json":
        _emit(json.dumps(data, sort_keys=True, indent=2) + "\n", args)
    else:
        lines = [f"rank {data['rank']}, {data['n_roots']} roots "
                 f"({data['n_compact']} compact)",
                 f"count by degree: {data['by_degree']}",
                 f"simple roots: {data['simple_roots']}"]
        _emit("\n".join(lines) + "\n", args)
    return 0


def _cmd_strongorth(args) -> int:
    config = _load_config(args)
    built = build_structures(config)
    sos = built.sos
    data = {
        "r": sos.r,
        "root_values": [[str(v) for v in sos.rootsystem.roots[i].values]
                        for i in sos.lam],
        "degrees": [tr.degree for tr in sos.triples],
        "oriented_flips": [not tr.plus_is_lex_positive for tr in sos.triples],
    }
    if args.format == "json":
        _emit(json.dumps(data, sort_keys=True, indent=2) + "\n", args)
    else:
        lines = [f"maximal strongly orthogonal set, r = {data['r']}",
                 f"root values {data['root_values']}",
                 f"hodge degrees {data['degrees']}"]
        _emit("\n".join(lines) + "\n", args)
    return 0


def _cmd_verify(args) -> int:
    config = _load_config(args)
    report = run_pipeline(config)
    _emit(emit_report(report, fmt=args.format), args)
    return 0 if report.passed else 1


def _cmd_bound(args) -> int:
    config = _load_config(args)
    built = build_structures(config)
    trial = polydisc_trial(
        built.sos, samples=config.samples, t_grid=config.t_grid,
        lambda_range=config.lambda_range, seed=config.seed,
        tolerances=dict(config.tolerances))
    data = {
        "r": trial.r,
        "samples": trial.samples,
        "max_abs_coord": trial.max_abs_coord,
        "max_d_E": trial.max_d_e,
        "sqrt_r": float(np.sqrt(trial.r)),
        "violations": len(trial.violations),
        "passed": trial.passed,
    }
    if args.format == "json":
        _emit(json.dumps(data, sort_keys=True, indent=2) + "\n", args)
    else:
        lines = [f"{trial.samples} samples x {len(trial.t_grid)} times, "
                 f"r = {trial.r}",
                 f"max |coordinate| = {trial.max_abs_coord!r} (bound 1)",
                 f"max distance     = {trial.max_d_e!r} "
                 f"(bound sqrt(r) = {data['sqrt_r']!r})",
                 f"violations: {data['violations']}",
                 "verdict: " + ("PASS" if trial.passed else "FAIL")]
        _emit("\n".join(lines) + "\n", args)
    return 0 if trial.passed else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="periodlab",
        description="Polarized Hodge frames, their Lie theory, and "
                    "numerical verification of orbit boundedness.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, formats=("text", "json")):
        p.add_argument("--preset", choices=sorted(PRESETS),
                       help="named frame shape (default sp4)")
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--output", help="write to this file instead of stdout")
        p.add_argument("--format", choices=formats, default=formats[0])

    p = sub.add_parser("frame", help="show the reference frame data")
    common(p)
    p.set_defaults(fn=_cmd_frame)

    p = sub.add_parser("roots", help="show the root system")
    common(p)
    p.set_defaults(fn=_cmd_roots)

    p = sub.add_parser("strongorth", help="show the strongly orthogonal set")
    common(p)
    p.set_defaults(fn=_cmd_strongorth)

    p = sub.add_parser("verify", help="run the full verification pipeline")
    common(p, formats=("text", "json", "csv"))
    p.add_argument("--samples", type=int, help="override sample count")
    p.add_argument("--seed", type=int, help="override base seed")
    p.set_defaults(fn=_cmd_verify)

    p = sub.add_parser("bound", help="run only the polydisc sampling trial")
    common(p)
    p.add_argument("--samples", type=int, help="override sample count")
    p.add_argument("--seed", type=int, help="override base seed")
    p.set_defaults(fn=_cmd_bound)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
