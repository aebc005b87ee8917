"""Command-line front end: ``hcwalk classical|quantum|sweep|figure``.

Every computed point becomes one CSV row.  A point that fails (step limit,
oracle size guard, ...) records the message in the ``error`` column and the
run continues; the exit status is 0 only if every point succeeded.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classical import classical_hitting, format_exact, markov_first_passage
from .errors import ConfigError, HCWalkError, MaxStepsExceeded
from .topology import Kind, WalkMode, WalkTopology, build_explicit_graph, reduced_dimension

COLUMNS = (
    "kind", "d", "n", "q", "dims", "mode", "eps", "tau_classical", "tau_q", "t_c",
    "p_total", "D_red", "dark", "converged", "seconds", "oracle", "error",
)
ORACLE_STEPS = 200
ORACLE_TOL = 1e-10


@dataclass(frozen=True)
class Point:
    topology: WalkTopology
    eps: float | None = None
    engine: str = "classical"  # classical | quantum | both
    verify: bool = False
    oracle: bool = False
    max_steps: int | None = None
    trace: str | None = None


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return "nan" if x != x else f"{x:.12g}"
    return str(x)


def _describe(t: WalkTopology) -> dict:
    row = dict.fromkeys(COLUMNS, "")
    row["kind"] = t.kind.value
    if t.kind is Kind.CONCAT:
        row["d"] = t.dims[0]
        row["dims"] = ",".join(map(str, t.dims))
        row["mode"] = t.mode.value
    else:
        row["d"] = t.d
    if t.kind is Kind.TAILS:
        row["n"], row["q"] = t.n, t.q
    row["D_red"] = reduced_dimension(t.with_loops(True))
    return row


def _classical_part(point: Point, row: dict, errors: list):
    t = point.topology
    value = classical_hitting(t)
    row["tau_classical"] = format_exact(value)
    if point.oracle:
        try:
            ref = markov_first_passage(build_explicit_graph(t, prune_target_attachment=True))
            row["oracle"] = "pass" if ref == value else "fail"
            if ref != value:
                errors.append(f"classical oracle gives {format_exact(ref)}")
        except HCWalkError as exc:
            row["oracle"] = "skipped"
            errors.append(str(exc))


def _quantum_part(point: Point, row: dict, errors: list):
    from .reduced import convergence_check, hitting_profile, reduced_walk, run_measured_walk

    t = point.topology.with_loops(True)
    eps = point.eps
    row["eps"] = _fmt(eps)
    op = reduced_walk(t)
    if point.trace:
        try:
            summary = run_measured_walk(op, 1 - eps, point.max_steps, trace=True)
        except MaxStepsExceeded as exc:
            summary = exc.summary
        _write_trace(point.trace, summary.trace_p)
    wanted = [eps, eps / 2] if point.verify else [eps]
    prof = hitting_profile(op, wanted, point.max_steps)
    s = prof[eps]
    row["tau_q"] = _fmt(s.tau_q) if s.t_c is not None else ""
    row["t_c"] = _fmt(s.t_c)
    row["p_total"] = _fmt(s.p_total)
    row["dark"] = _fmt(s.dark)
    converged = s.converged
    if point.verify:
        half = prof[eps / 2]
        converged = converged and half.converged and convergence_check(s.tau_q, half.tau_q)
    row["converged"] = _fmt(converged)
    if s.t_c is None and not s.dark:
        errors.append(f"p0={1 - eps:g} not reached in {s.steps_run} steps")
    if point.oracle:
        from .fullwalk import build_full_walk, hit_probabilities

        try:
            full = build_full_walk(t)
            gap = np.abs(hit_probabilities(full, ORACLE_STEPS) - hit_probabilities(op, ORACLE_STEPS)).max()
            row["oracle"] = "pass" if gap < ORACLE_TOL else "fail"
            if gap >= ORACLE_TOL:
                errors.append(f"full-walk oracle differs by {gap:.3g}")
        except HCWalkError as exc:
            row["oracle"] = "skipped"
            errors.append(str(exc))


def _write_trace(path, trace_p):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "p_hit", "cumulative"])
        cum = np.cumsum(trace_p)
        for t, (p, c) in enumerate(zip(trace_p, cum), start=1):
            w.writerow([t, _fmt(float(p)), _fmt(float(c))])


def evaluate(point: Point) -> dict:
    """Compute one CSV row.  Never raises for per-point failures."""
    row = _describe(point.topology)
    errors: list[str] = []
    start = time.perf_counter()
    try:
        if point.engine in ("classical", "both"):
            _classical_part(point, row, errors)
        if point.engine in ("quantum", "both"):
            _quantum_part(point, row, errors)
    except (HCWalkError, ValueError) as exc:
        errors.append(f"{type(exc).__name__}: {exc}")
    row["seconds"] = f"{time.perf_counter() - start:.3f}"
    row["error"] = "; ".join(errors)
    return row


def run_points(points, jobs: int = 1) -> list[dict]:
    """Evaluate points, in parallel when ``jobs > 1``; rows keep plan order."""
    if jobs <= 1 or len(points) <= 1:
        return [evaluate(p) for p in points]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(evaluate, points))


def write_rows(rows, out, columns=COLUMNS):
    w = csv.DictWriter(out, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)


# --------------------------------------------------------------------------
# argument handling


def parse_values(text: str, kind=int) -> list:
    """``"1..5"`` (inclusive), ``"1,2,4"`` or a single value."""
    text = text.strip()
    try:
        if ".." in text:
            lo, hi = (kind(v) for v in text.split("..", 1))
            if kind is not int:
                raise ConfigError("ranges are only allowed for integer parameters")
            values = list(range(lo, hi + 1))
        else:
            values = [kind(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"cannot parse value list {text!r}") from exc
    if not values:
        raise ConfigError(f"empty value list {text!r}")
    return values


def _single(text, name, kind=int):
    if text is None:
        return None
    values = parse_values(str(text), kind)
    if len(values) != 1:
        raise ConfigError(f"--{name} takes a single value here")
    return values[0]


def topology_from_args(args, overrides=None) -> WalkTopology:
    o = dict(overrides or {})

    def get(name, flag=None):
        if name in o:
            return o[name]
        return _single(getattr(args, name, None), flag or name)

    kind = o.get("kind", args.kind)
    loops = bool(getattr(args, "loops", False))
    if kind is None:
        raise ConfigError("--kind is required (or use --config)")
    try:
        kind = Kind(kind)
    except ValueError as exc:
        raise ConfigError(f"unknown kind {kind!r}") from exc
    if kind is Kind.BARE:
        d = get("d")
        if d is None:
            raise ConfigError("bare cubes need --d")
        return WalkTopology.bare(d, loops)
    if kind is Kind.TAILS:
        d, n, q = get("d"), get("n"), get("q")
        if None in (d, n, q):
            raise ConfigError("tails need --d, --n and --q")
        return WalkTopology.tails(d, n, q, loops)
    mode = WalkMode(args.mode)
    if "dims" in o:
        dims = o["dims"]
    elif args.dims is not None:
        dims = parse_values(args.dims)
    else:
        equal = get("dims_equal", "dims-equal")
        if equal is None:
            equal = get("d")
        m = get("m")
        if equal is None or m is None:
            raise ConfigError("concat needs --dims, or --dims-equal with --m")
        dims = [equal] * (m + 1)
    return WalkTopology.concat(dims, mode, loops)


def _config_topologies(path) -> list[WalkTopology]:
    try:
        lines = Path(path).read_text().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    out = [WalkTopology.parse(ln) for ln in lines if ln.strip() and not ln.lstrip().startswith("#")]
    if not out:
        raise ConfigError(f"config {path} lists no topology")
    return out


def _topologies(args) -> list[WalkTopology]:
    if args.config:
        return _config_topologies(args.config)
    return [topology_from_args(args)]


def _max_steps(args):
    if args.max_steps is not None:
        return int(float(args.max_steps))
    from .reduced import default_max_steps

    return default_max_steps()


def _emit(rows, args, columns=COLUMNS):
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_rows(rows, fh, columns)
    else:
        write_rows(rows, sys.stdout, columns)
    return 0 if all(not r["error"] for r in rows) else 1


def cmd_classical(args):
    points = [Point(t, engine="classical", oracle=args.oracle) for t in _topologies(args)]
    rows = run_points(points, args.jobs)
    if args.format == "summary":
        for r, p in zip(rows, points):
            r["topology"] = p.topology.key()
            r["tau_exact"] = r["tau_classical"]
            r["tau_float"] = _fmt(float(classical_hitting(p.topology))) if r["tau_classical"] else ""
        return _emit(rows, args, ("topology", "tau_exact", "tau_float"))
    return _emit(rows, args)


def cmd_quantum(args):
    eps_values = parse_values(args.eps, float)
    tops = _topologies(args)
    if args.trace and len(tops) * len(eps_values) > 1:
        raise ConfigError("--trace needs a single topology and a single eps")
    steps = _max_steps(args)
    points = [
        Point(t, e, "quantum", args.verify_convergence, args.oracle, steps, args.trace)
        for t in tops
        for e in eps_values
    ]
    rows = run_points(points, args.jobs)
    if args.format == "summary":
        for r, p in zip(rows, points):
            r["topology"] = p.topology.with_loops(True).key()
            r["p0"] = _fmt(1 - p.eps)
        return _emit(rows, args, ("topology", "p0", "t_c", "tau_q", "p_total", "dark", "converged"))
    return _emit(rows, args)


SWEEPABLE = ("d", "n", "q", "m", "eps")


def sweep_plan(args) -> list[Point]:
    """Expand the one swept parameter into points in increasing order."""
    raw = {
        "d": args.d if args.d is not None else getattr(args, "dims_equal", None),
        "n": args.n,
        "q": args.q,
        "m": args.m,
        "eps": args.eps,
    }
    swept = [k for k, v in raw.items() if v is not None and (".." in str(v) or "," in str(v))]
    if args.kind == "concat" and args.dims is not None:
        raise ConfigError("sweeps over concat use --dims-equal and --m, not --dims")
    if len(swept) != 1:
        raise ConfigError(f"exactly one of {', '.join(SWEEPABLE)} must be a range or list (got {swept or 'none'})")
    name = swept[0]
    values = parse_values(raw[name], float if name == "eps" else int)
    ordered = sorted(values, reverse=(name == "eps"))
    if ordered != values or len(set(values)) != len(values):
        order = "decreasing" if name == "eps" else "increasing"
        raise ConfigError(f"swept values of {name} must be strictly {order}")
    steps = _max_steps(args)
    eps_default = parse_values(args.eps, float)[0] if name != "eps" and args.eps else 1e-4
    points = []
    for v in values:
        if name == "eps":
            t, e = topology_from_args(args), v
        else:
            key = "dims_equal" if (name == "d" and args.kind == "concat") else name
            t, e = topology_from_args(args, {key: v}), eps_default
        points.append(Point(t, e if args.engine != "classical" else None, args.engine,
                            args.verify_convergence, args.oracle, steps))
    return points


def cmd_sweep(args):
    return _emit(run_points(sweep_plan(args), args.jobs), args)


def cmd_figure(args):
    from . import figures

    out = Path(args.out or "figures")
    written, failed = figures.write_figure(args.name, args.scale, out, jobs=args.jobs,
                                           max_steps=_max_steps(args))
    for path in written:
        print(path)
    for msg in failed:
        print(f"failed: {msg}", file=sys.stderr)
    return 0 if not failed else 1


def _add_topology_args(p, sweep=False):
    p.add_argument("--kind", choices=[k.value for k in Kind])
    p.add_argument("--d", help="cube dimension" + (" (value, range a..b or list)" if sweep else ""))
    p.add_argument("--n", help="tails per cube vertex")
    p.add_argument("--q", help="tail length")
    p.add_argument("--dims", help="concat level dimensions, e.g. 2,2,2")
    p.add_argument("--dims-equal", dest="dims_equal", help="concat: common dimension of every level")
    p.add_argument("--m", help="concat: number of levels below the central cube")
    p.add_argument("--mode", choices=[m.value for m in WalkMode], default="central")
    p.add_argument("--loops", action="store_true", help="classical walk on the self-loop padded graph (tails only)")
    p.add_argument("--config", help="file with one topology per line, e.g. 'kind=tails d=3 n=1 q=1'")


def _add_common(p):
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--max-steps", dest="max_steps", help="walk step limit (default: $HCWALK_MAX_STEPS or 1e7)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hcwalk", description="Hitting times on embedded hypercubes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("classical", help="exact classical hitting time")
    _add_topology_args(p)
    _add_common(p)
    p.add_argument("--oracle", action="store_true", help="check against the explicit first-passage solve")
    p.add_argument("--format", choices=["run", "summary"], default="run")
    p.set_defaults(func=cmd_classical)

    p = sub.add_parser("quantum", help="measured Grover walk on the reduced space")
    _add_topology_args(p)
    _add_common(p)
    p.add_argument("--eps", default="1e-4", help="error threshold(s), p0 = 1 - eps")
    p.add_argument("--verify-convergence", dest="verify_convergence", action="store_true")
    p.add_argument("--oracle", action="store_true", help="compare hit probabilities with the full-space walk")
    p.add_argument("--trace", help="write t,p_hit,cumulative rows to this file")
    p.add_argument("--format", choices=["run", "summary"], default="run")
    p.set_defaults(func=cmd_quantum)

    p = sub.add_parser("sweep", help="sweep one parameter")
    _add_topology_args(p, sweep=True)
    _add_common(p)
    p.add_argument("--eps", default=None)
    p.add_argument("--engine", choices=["classical", "quantum", "both"], default="both")
    p.add_argument("--verify-convergence", dest="verify_convergence", action="store_true")
    p.add_argument("--oracle", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("figure", help="write plot data for one figure as CSV files")
    p.add_argument("name", choices=["fig2", "fig4", "fig6", "fig7", "fig8", "fig9"])
    p.add_argument("--scale", choices=["desk", "full"], default="desk")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    p.add_argument("--out", help="output directory (default: ./figures)")
    p.add_argument("--max-steps", dest="max_steps")
    p.set_defaults(func=cmd_figure)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"hcwalk: configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
