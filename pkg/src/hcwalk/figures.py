"""Plot data for the reference figures, one CSV file per curve.

Desk scale trims the parameter ranges so the whole set finishes in minutes
on one core; full scale uses the published ranges and may take days.

=====  =====================================  ==========================
name   curves                                 x axis
=====  =====================================  ==========================
fig2   T_c and tau_q of bare cubes            eps
fig4   tails: quantum, classical, D_red       d
fig6   tails: quantum                         n
fig7   tails: quantum                         q
fig8   concat, equal dims 2: q/c/D_red        m
fig9   penetration, m = 1: q/c/D_red          d
=====  =====================================  ==========================
"""

from __future__ import annotations

import csv
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classical import classical_hitting
from .errors import HCWalkError
from .topology import WalkMode, WalkTopology, reduced_dimension

EPS = 1e-4


@dataclass(frozen=True)
class Curve:
    name: str
    x_name: str
    y_name: str  # tau_q | t_c | tau_classical | D_red
    points: tuple  # (x, topology, eps)


def _eps_grid(lo_exp=1, hi_exp=4, per_decade=4):
    k = np.arange(lo_exp * per_decade, hi_exp * per_decade + 1)
    return [float(f"{v:.6g}") for v in 10.0 ** (-k / per_decade)]


def _tails(d, n, q):
    return WalkTopology.tails(d, n, q)


def _concat_equal(d, m, mode=WalkMode.CENTRAL):
    return WalkTopology.concat([d] * (m + 1), mode)


def _versus(name, x_name, y_name, xs, make):
    return Curve(name, x_name, y_name, tuple((x, make(x), EPS) for x in xs))


def _triple(prefix, x_name, xs, make, with_dred=True):
    curves = [
        _versus(f"{prefix}_quantum", x_name, "tau_q", xs, make),
        _versus(f"{prefix}_classical", x_name, "tau_classical", xs, make),
    ]
    if with_dred:
        curves.append(_versus(f"{prefix}_D_red", x_name, "D_red", xs, make))
    return curves


def curves_for(name: str, scale: str) -> list[Curve]:
    desk = scale == "desk"
    if name == "fig2":
        ds = (5, 10, 15) if desk else (5, 10, 15, 20, 25)
        grid = _eps_grid()
        out = []
        for d in ds:
            t = WalkTopology.bare(d)
            for y in ("t_c", "tau_q"):
                out.append(Curve(f"fig2_{y}_d{d}", "eps", y, tuple((e, t, e) for e in grid)))
        return out
    if name == "fig4":
        pairs = ((10, 1), (30, 3), (50, 5))
        xs = range(2, 15, 2) if desk else range(2, 51, 2)
        out = []
        for n, q in pairs:
            out += _triple(f"fig4_n{n}_q{q}", "d", xs, lambda d, n=n, q=q: _tails(d, n, q), with_dred=(n, q) == (10, 1))
        return out
    if name == "fig6":
        pairs = ((5, 10), (10, 15)) if desk else ((5, 10), (10, 15), (15, 20))
        xs = (1, 2, 5, 10, 20, 30, 40, 50) if desk else tuple(range(1, 101))
        return [
            _versus(f"fig6_d{d}_q{q}", "n", "tau_q", xs, lambda n, d=d, q=q: _tails(d, n, q))
            for d, q in pairs
        ]
    if name == "fig7":
        pairs = ((5, 25), (10, 50)) if desk else ((5, 25), (10, 50), (15, 75))
        xs = range(1, 11) if desk else range(1, 31)
        return [
            _versus(f"fig7_d{d}_n{n}", "q", "tau_q", xs, lambda q, d=d, n=n: _tails(d, n, q))
            for d, n in pairs
        ]
    if name == "fig8":
        xs = range(1, 6) if desk else range(1, 9)
        return _triple("fig8_d2", "m", xs, lambda m: _concat_equal(2, m))
    if name == "fig9":
        xs = range(1, 7) if desk else range(1, 11)
        return _triple("fig9_m1", "d", xs, lambda d: _concat_equal(d, 1, WalkMode.PENETRATE))
    raise ValueError(f"unknown figure {name!r}")


def _quantum_job(args):
    topology, eps_values, max_steps = args
    from .reduced import hitting_profile, reduced_walk

    try:
        prof = hitting_profile(reduced_walk(topology), eps_values, max_steps)
        return {e: (s.t_c, s.tau_q if s.t_c is not None else None) for e, s in prof.items()}, None
    except HCWalkError as exc:
        return None, f"{topology.key()}: {exc}"


def write_figure(name: str, scale: str, out_dir, jobs: int = 1, max_steps=None):
    """Compute and write every curve of ``name``; returns ``(paths, failures)``."""
    curves = curves_for(name, scale)
    wanted: dict[WalkTopology, set] = {}
    for c in curves:
        if c.y_name in ("tau_q", "t_c"):
            for _, t, e in c.points:
                wanted.setdefault(t, set()).add(e)
    tasks = [(t, sorted(es), max_steps) for t, es in wanted.items()]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_quantum_job, tasks))
    else:
        results = [_quantum_job(task) for task in tasks]
    quantum = {t: r for (t, _, _), r in zip(tasks, results)}

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths, failures = [], []
    for c in curves:
        path = out_dir / f"{c.name}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow([c.x_name, c.y_name])
            for x, t, e in c.points:
                if c.y_name == "D_red":
                    y = reduced_dimension(t)
                elif c.y_name == "tau_classical":
                    y = float(classical_hitting(t.with_loops(False)))
                else:
                    values, err = quantum[t]
                    if err:
                        failures.append(err)
                        continue
                    t_c, tau = values[e]
                    y = t_c if c.y_name == "t_c" else tau
                    if y is None:
                        failures.append(f"{t.key()}: p0={1 - e:g} not reached")
                        continue
                w.writerow([x, f"{y:.12g}" if isinstance(y, float) else y])
        paths.append(path)
    return paths, sorted(set(failures))
