"""Exact classical hitting times on locally embedded hypercubes.

All arithmetic is done in :class:`fractions.Fraction`; hitting times for the
larger concatenated structures reach 1e60 and the oracle comparisons are
exact equalities.

The closed forms collapse the embedded cube onto a line of Hamming weights
``x = 0..d`` with the recursion

    tau(x) = (d - x)/d * tau(x + 1) + x/d * tau(x - 1) + alpha_x,

``alpha_x = e_x / d + 1``, where ``e_x`` is the mean degree sum of the
combined external graphs attached at weight ``x``.  Writing
``delta(x) = tau(x) - tau(x + 1)`` turns this into a first-order recursion
whose telescoped solution is :func:`tau_line`.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import SingularSystem, UnsupportedLoops, ZeroLegs
from .topology import ExplicitGraph, Kind, WalkMode, WalkTopology, total_outgoing_edges

__all__ = [
    "AlphaProfile",
    "return_time",
    "tau_line",
    "tau_general",
    "tau_uniform",
    "tau_ord",
    "f_e",
    "full_structure_edges",
    "classical_hitting",
    "first_passage_times",
    "markov_first_passage",
    "stationary_return",
    "first_return_time",
    "format_exact",
]


def format_exact(value: Fraction) -> str:
    """``"123"`` for integers, ``"num/den"`` otherwise."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def return_time(e: int, l: int) -> Fraction:
    """Mean time spent in an attached graph per excursion: ``e / l``.

    ``e`` is the degree sum of the attached graph combined with its anchor
    (the anchor contributes only its ``l`` legs).
    """
    if l == 0:
        raise ZeroLegs("no legs: the vertex has no attached graph")
    if l < 0 or e < 2 * l:
        raise ValueError(f"need l >= 1 and e >= 2l, got e={e}, l={l}")
    return Fraction(e, l)


@dataclass(frozen=True)
class AlphaProfile:
    """Per-weight dwell factors ``alpha_0 .. alpha_{d-1}`` of the line walk."""

    d: int
    alpha: tuple[Fraction, ...]

    def __post_init__(self):
        alpha = tuple(Fraction(a) for a in self.alpha)
        object.__setattr__(self, "alpha", alpha)
        if self.d < 1 or len(alpha) != self.d:
            raise ValueError(f"need d >= 1 and {self.d} alpha values, got {len(alpha)}")
        if any(a < 1 for a in alpha):
            raise ValueError("every alpha must be >= 1")

    @classmethod
    def from_edges(cls, d, edges) -> AlphaProfile:
        """Profile from per-weight combined-graph degree sums ``e_x``."""
        return cls(d, tuple(Fraction(e) / d + 1 for e in edges))

    @classmethod
    def uniform(cls, d, mean_e) -> AlphaProfile:
        return cls(d, (Fraction(mean_e) / d + 1,) * d)


def tau_line(profile: AlphaProfile, x: int = 0) -> Fraction:
    """Hitting time from weight ``x`` to weight ``d`` on the embedded line.

    Sums ``delta(k) = sum_{i<=k} C(d, i) alpha_i / C(d-1, k)`` for
    ``k = x .. d-1``.
    """
    d, alpha = profile.d, profile.alpha
    if not 0 <= x <= d:
        raise ValueError(f"x must lie in 0..{d}")
    total = Fraction(0)
    partial = Fraction(0)
    for k in range(d):
        partial += math.comb(d, k) * alpha[k]
        if k >= x:
            total += partial / math.comb(d - 1, k)
    return total


def tau_general(profile: AlphaProfile) -> Fraction:
    """Corner-to-corner hitting time for arbitrary per-weight ``alpha``."""
    return tau_line(profile, 0)


def tau_uniform(d: int, mean_e, x: int = 0) -> Fraction:
    """Hitting time when every cube vertex sees the same degree sum ``mean_e``.

    Equals ``(mean_e / d + 1) * tau_ord(d, x)``.
    """
    if mean_e < 0:
        raise ValueError("mean_e must be non-negative")
    return tau_line(AlphaProfile.uniform(d, mean_e), x)


def tau_ord(d: int, x: int = 0) -> Fraction:
    """Hitting time of the plain d-cube from weight ``x``; ``tau_ord(d, d-1) == 2**d - 1``."""
    return tau_uniform(d, 0, x)


def f_e(p: int, dims, m: int | None = None) -> int:
    """Degree sum of a level-``p`` cube together with everything hanging off it.

    ``dims = (d_0, .., d_m)``.  The level-``m+1`` term is zero.  Note the sum
    only follows the chain of cubes attached to a *single* level-``p`` cube,
    so ``f_e(0)`` is not the degree sum of the full structure (see
    :func:`full_structure_edges`).
    """
    dims = tuple(dims)
    if m is None:
        m = len(dims) - 1
    if not 0 <= p <= m + 1:
        raise ValueError(f"p must lie in 0..{m + 1}")

    def e_tilde(k):
        return 0 if k == m + 1 else dims[k] * 2 ** dims[k]

    total = e_tilde(p)
    for j in range(p, m):
        total += e_tilde(j + 1) * math.prod(2 ** dims[k] - 1 for k in range(1, j + 1))
    return total


def full_structure_edges(dims) -> int:
    """Degree sum of the whole concatenated structure, counted directly.

    Central cube plus ``2**d_0`` level-1 subtrees, each worth ``f_e(1)``.
    """
    dims = tuple(dims)
    return dims[0] * 2 ** dims[0] + 2 ** dims[0] * f_e(1, dims)


def classical_hitting(topology: WalkTopology) -> Fraction:
    """Exact expected classical hitting time for ``topology``.

    Loop-free graphs are the default; with ``self_loops`` only tails are
    supported (every tail vertex is padded to degree ``d + n``).
    """
    t = topology.normalized()
    if t.kind is Kind.BARE:
        return tau_uniform(t.d, 0)
    if t.kind is Kind.TAILS:
        return tau_uniform(t.d, total_outgoing_edges(t, with_self_loops=t.self_loops))
    if t.self_loops:
        raise UnsupportedLoops("classical walks with self-loops are only defined for tails")
    dims, m = t.dims, t.m
    if t.mode is WalkMode.CENTRAL:
        return tau_uniform(dims[0], f_e(1, dims))
    # Penetration: the walk passes through one cube per level on the way in
    # (towards the centre) and one per level on the way out; every corner on
    # the route is a cut vertex, so the legs add.
    total = Fraction(0)
    for j in range(m, -1, -1):
        total += tau_uniform(dims[j], f_e(j + 1, dims))
    everything = full_structure_edges(dims)
    for j in range(1, m + 1):
        dj = dims[j]
        edges = [everything - f_e(j, dims)] + [f_e(j + 1, dims)] * (dj - 1)
        total += tau_general(AlphaProfile.from_edges(dj, edges))
    return total


def first_passage_times(graph: ExplicitGraph, target: int | None = None) -> dict[int, Fraction]:
    """Exact mean first-passage times to ``target`` from every vertex that can reach it.

    Solves ``deg(i) tau_i - sum_{j ~ i, j != target} tau_j = deg(i)`` by sparse
    Gaussian elimination over the rationals with a greedy minimum-degree
    pivot order.  A self-loop contributes ``-1`` to the diagonal.
    """
    if target is None:
        target = graph.target
    reach = graph.component(target)
    rows: dict[int, dict[int, Fraction]] = {}
    rhs: dict[int, Fraction] = {}
    for i in reach:
        if i == target:
            continue
        deg = graph.degree(i)
        row = {i: Fraction(deg)}
        for j in graph.adjacency[i]:
            if j != target:
                row[j] = row.get(j, 0) - 1
        rows[i] = row
        rhs[i] = Fraction(deg)
    cols: dict[int, set[int]] = {i: set() for i in rows}
    for i, row in rows.items():
        for j in row:
            cols[j].add(i)

    heap = [(len(row), i) for i, row in rows.items()]
    heapq.heapify(heap)
    eliminated: list[tuple[int, dict[int, Fraction], Fraction, Fraction]] = []
    done: set[int] = set()
    while heap:
        size, v = heapq.heappop(heap)
        if v in done or size != len(rows[v]):
            continue
        row = rows.pop(v)
        b = rhs.pop(v)
        pivot = row.pop(v, 0)
        if pivot == 0:
            raise SingularSystem(f"zero pivot at vertex {v}")
        done.add(v)
        for j in row:
            cols[j].discard(v)
        for i in cols.pop(v):
            if i == v:
                continue
            other = rows[i]
            factor = other.pop(v) / pivot
            for j, a in row.items():
                val = other.get(j, 0) - factor * a
                if val == 0:
                    other.pop(j, None)
                    cols[j].discard(i)
                else:
                    if j not in other:
                        cols[j].add(i)
                    other[j] = val
            rhs[i] -= factor * b
            heapq.heappush(heap, (len(other), i))
        eliminated.append((v, row, b, pivot))
    solution: dict[int, Fraction] = {target: Fraction(0)}
    for v, row, b, pivot in reversed(eliminated):
        solution[v] = (b - sum(a * solution[j] for j, a in row.items())) / pivot
    return solution


def markov_first_passage(graph: ExplicitGraph) -> Fraction:
    """Exact expected time for a simple random walk from ``start`` to hit ``target``."""
    times = first_passage_times(graph, graph.target)
    if graph.start not in times:
        raise SingularSystem("target is not reachable from start")
    return times[graph.start]


def stationary_return(graph: ExplicitGraph, v: int) -> Fraction:
    """Return time of ``v`` from the stationary distribution: ``sum(deg) / deg(v)``."""
    return Fraction(graph.total_degree(), graph.degree(v))


def first_return_time(graph: ExplicitGraph, v: int) -> Fraction:
    """Return time of ``v`` by one step plus first passage back (linear solve)."""
    times = first_passage_times(graph, v)
    nbrs = graph.adjacency[v]
    return 1 + sum((times[u] for u in nbrs), Fraction(0)) / len(nbrs)
