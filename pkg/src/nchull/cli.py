"""Batch front end: build models, run the experiment suites, emit JSON reports.

Subcommands
    build-example   construct the diagonal-plus-shift example and save it
    escape          sample hull points across levels and refute each one
    converge        truncation-convergence sweep against certified tail bounds
    affine          matrix-affine identity battery over random pencils
    ucp             block-decomposition identity battery over random pencils

Reports are JSON lines, deterministic given the configuration; a leading
timestamp line is suppressed by --no-timestamp so repeated runs are
byte-identical.  Exit codes: 0 success, 1 usage, 2 model or guard failure,
3 invariant breach.
"""

from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone

import numpy as np

from .config import TOL, GuardError, InvariantBreach, Tolerances, with_overrides
from .extreme import NOT_ABSOLUTE_EXTREME, escape_experiment
from .hull import convergence_sweep
from .linalg import SelfAdjointTuple, random_hermitian, random_isometry
from .model import build_diag_shift_example
from .pencils import (
    eval_pencil,
    map_affine_residual,
    matrix_affine_residual,
    random_symmetric_pencil,
    ucp_decomposition_residual,
)
from .serialize import (
    dumps_canonical,
    escape_row_to_json,
    model_from_json,
    model_to_json,
    witness_to_json,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_GUARD = 2
EXIT_BREACH = 3


def _parse_levels(text: str) -> list[int]:
    """Parse 'a..b', 'a..b:step' or a single integer."""
    text = text.strip()
    if ".." in text:
        span, _, step = text.partition(":")
        lo, _, hi = span.partition("..")
        return list(range(int(lo), int(hi) + 1, int(step) if step else 1))
    return [int(text)]


def _parse_seeds(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    return [int(x) for x in text.split(",")]


def _parse_tolerances(pairs: list[str]) -> Tolerances:
    overrides = {}
    for pair in pairs or []:
        name, sep, value = pair.partition("=")
        if not sep:
            raise ValueError(f"expected name=value, got {pair!r}")
        overrides[name.strip()] = float(value)
    return with_overrides(**overrides)


def _parse_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _default_sequences(max_level: int) -> tuple[list[float], list[float]]:
    lam = [(-0.5) ** i for i in range(max_level + 1)]
    w = [2.0 ** (-i) for i in range(1, max_level + 2)]
    return lam, w


class _Report:
    """Accumulates JSON lines and writes them to a file or stdout."""

    def __init__(self, path: str, timestamp: bool):
        self.path = path
        self.lines: list[str] = []
        if timestamp:
            stamp = datetime.now(timezone.utc).isoformat()
            self.lines.append(dumps_canonical({"timestamp": stamp}))

    def add(self, obj) -> None:
        self.lines.append(dumps_canonical(obj))

    def write(self) -> None:
        payload = "\n".join(self.lines) + "\n"
        if self.path == "-":
            sys.stdout.write(payload)
        else:
            with open(self.path, "w") as fh:
                fh.write(payload)


def _load_model(path: str):
    with open(path) as fh:
        return model_from_json(json.load(fh))


def cmd_build_example(args) -> int:
    if args.lam is not None:
        lam = _parse_floats(args.lam)
        w = _parse_floats(args.w) if args.w is not None else _default_sequences(args.max_level)[1]
    else:
        lam, w = _default_sequences(args.max_level)
        if args.w is not None:
            w = _parse_floats(args.w)
    model, a1, a2, witness = build_diag_shift_example(
        lam, w, scan_steps=args.scan_steps, max_level=args.max_level
    )
    payload = model_to_json(model)
    payload["witness"] = witness_to_json(witness)
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if args.out == "-":
        sys.stdout.write(text)
    else:
        with open(args.out, "w") as fh:
            fh.write(text)
    print(f"alpha1 = {a1!r}")
    print(f"alpha2 = {a2!r}")
    print(f"witness: d={witness.d} level={witness.level} residual={witness.residual:.3e}")
    if args.out != "-":
        print(f"model written to {args.out}")
    return EXIT_OK


def cmd_escape(args) -> int:
    tol = _parse_tolerances(args.tol)
    model = _load_model(args.model)
    levels = _parse_levels(args.levels)
    seeds = _parse_seeds(args.seeds)
    rows = escape_experiment(
        model, args.n, levels, args.m, seeds, rank_tol=tol.rank_tol
    )
    report = _Report(args.out, timestamp=not args.no_timestamp)
    breach = False
    for row in rows:
        report.add(escape_row_to_json(row))
        if row.verdict != NOT_ABSOLUTE_EXTREME and args.n % row.level != 0:
            breach = True
    report.write()
    refuted = sum(1 for r in rows if r.verdict == NOT_ABSOLUTE_EXTREME)
    print(f"{len(rows)} rows, {refuted} refuted, {len(rows) - refuted} inconclusive")
    if breach:
        print("invariant breach: inconclusive row at a non-divisible level", file=sys.stderr)
        return EXIT_BREACH
    return EXIT_OK


def cmd_converge(args) -> int:
    tol = _parse_tolerances(args.tol)
    model = _load_model(args.model)
    levels = _parse_levels(args.levels)
    seeds = _parse_seeds(args.seeds)
    top = max(levels)
    n = args.n if args.n is not None else args.m * top
    report = _Report(args.out, timestamp=not args.no_timestamp)
    breach: InvariantBreach | None = None
    for seed in seeds:
        v = random_isometry(n, args.m * top, seed)
        try:
            rows = convergence_sweep(model, v, levels, sweep_slack=tol.sweep_slack)
        except InvariantBreach as exc:
            breach = exc
            break
        for row in rows:
            report.add(
                {
                    "seed": seed,
                    "level": row.level,
                    "error": row.error,
                    "bound": row.bound,
                }
            )
    report.write()
    if breach is not None:
        print(f"invariant breach: {breach}", file=sys.stderr)
        return EXIT_BREACH
    print(f"{len(seeds)} sweeps over levels {levels[0]}..{levels[-1]} passed")
    return EXIT_OK


def _affine_instance(seed: int, nonaffine: bool):
    """One seeded (pencil or control map, points, partition) battery entry."""
    rng = np.random.default_rng([seed, 17])
    if nonaffine:
        g, d = 1, 1
        theta = lambda y: y[0] @ y[0]
    else:
        g = int(rng.integers(1, 4))
        d = int(rng.integers(1, 4))
        pencil = random_symmetric_pencil(g, d, [seed, 5], monic=False, coeff_norm=2.0)
        theta = lambda y: eval_pencil(pencil, y)
    parts = int(rng.integers(2, 4))
    n = int(rng.integers(1, 4))
    sizes = [int(rng.integers(1, 4)) for _ in range(parts)]
    points = [
        SelfAdjointTuple(
            tuple(random_hermitian(sz, [seed, 23, i, k], norm=2.0) for k in range(g))
        )
        for i, sz in enumerate(sizes)
    ]
    stack = random_isometry(n, sum(sizes), seed + 1)
    vs, at = [], 0
    for sz in sizes:
        vs.append(stack[at : at + sz, :])
        at += sz
    return theta, d, points, vs


def cmd_affine(args) -> int:
    tol = _parse_tolerances(args.tol)
    report = _Report(args.out, timestamp=not args.no_timestamp)
    worst = 0.0
    for k in range(args.pencils):
        for j in range(args.partitions):
            seed = args.seed + 1000 * k + j
            theta, d, points, vs = _affine_instance(seed, args.inject_nonaffine)
            residual = map_affine_residual(theta, d, points, vs)
            worst = max(worst, residual)
            report.add({"pencil": k, "partition": j, "residual": residual})
    report.write()
    print(f"{args.pencils * args.partitions} combinations, worst residual {worst:.3e}")
    if worst > tol.affine_tol:
        print(
            f"invariant breach: residual {worst:.3e} exceeds {tol.affine_tol:.1e}",
            file=sys.stderr,
        )
        return EXIT_BREACH
    return EXIT_OK


def cmd_ucp(args) -> int:
    tol = _parse_tolerances(args.tol)
    model = _load_model(args.model)
    report = _Report(args.out, timestamp=not args.no_timestamp)
    worst = 0.0
    for k in range(args.instances):
        rng = np.random.default_rng([args.seed, k])
        top = int(rng.integers(2, model.max_level + 1))
        n = int(rng.integers(1, top))
        d = int(rng.integers(1, 4))
        pencil = random_symmetric_pencil(model.g, d, [args.seed, k], monic=bool(rng.integers(0, 2)))
        residual = ucp_decomposition_residual(pencil, model, n, top)
        worst = max(worst, residual)
        report.add({"instance": k, "n": n, "top_level": top, "d": d, "residual": residual})
    report.write()
    print(f"{args.instances} instances, worst residual {worst:.3e}")
    if worst > tol.ucp_tol:
        print(
            f"invariant breach: residual {worst:.3e} exceeds {tol.ucp_tol:.1e}",
            file=sys.stderr,
        )
        return EXIT_BREACH
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nchull",
        description="Noncommutative convex hull experiments at finite truncation scale.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--out", default="-", help="report path, '-' for stdout")
        p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp header line")
        p.add_argument("--tol", action="append", default=[], metavar="NAME=VALUE",
                       help="override a named tolerance (repeatable)")

    p = sub.add_parser("build-example", help="build the diagonal-plus-shift example model")
    p.add_argument("--lam", default=None, help="comma-separated diagonal entries")
    p.add_argument("--w", default=None, help="comma-separated shift weights")
    p.add_argument("--max-level", type=int, default=12)
    p.add_argument("--scan-steps", type=int, default=2)
    p.add_argument("--out", default="model.json")
    p.set_defaults(func=cmd_build_example)

    p = sub.add_parser("escape", help="sample and refute hull points across levels")
    p.add_argument("--model", required=True)
    p.add_argument("--n", type=int, default=2, help="dimension of sampled points")
    p.add_argument("--m", type=int, default=2, help="witness multiplicity")
    p.add_argument("--levels", default="3..11:2")
    p.add_argument("--seeds", default="0,1,2,3,4")
    common(p)
    p.set_defaults(func=cmd_escape)

    p = sub.add_parser("converge", help="truncation-convergence sweep")
    p.add_argument("--model", required=True)
    p.add_argument("--m", type=int, default=1, help="ambient multiplicity")
    p.add_argument("--n", type=int, default=None,
                   help="compression dimension (default m * max level)")
    p.add_argument("--levels", default="2..12")
    p.add_argument("--seeds", default="0,1,2,3,4")
    common(p)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("affine", help="matrix-affine identity battery")
    p.add_argument("--pencils", type=int, default=100)
    p.add_argument("--partitions", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--inject-nonaffine", action="store_true",
                   help="replace pencils by a squaring map (negative control)")
    common(p)
    p.set_defaults(func=cmd_affine)

    p = sub.add_parser("ucp", help="block-decomposition identity battery")
    p.add_argument("--model", required=True)
    p.add_argument("--instances", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    common(p)
    p.set_defaults(func=cmd_ucp)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (GuardError, ValueError, OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except InvariantBreach as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return EXIT_BREACH


if __name__ == "__main__":
    sys.exit(main())
