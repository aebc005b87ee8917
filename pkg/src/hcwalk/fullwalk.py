"""Unreduced Grover walk on explicit graphs.

Basis index ``offset[v] + i`` is the pair (vertex ``v``, ``i``-th entry of
``adjacency[v]``).  The shift is the flip-flop map: the ``k``-th slot of
``v`` that points to ``u`` is sent to the ``k``-th slot of ``u`` pointing
back to ``v``.  A self-loop slot is a fixed point.  The coin is the Grover
reflection on every vertex block.

This module deliberately avoids the compiled kernel used by the reduced
engine so the two paths stay independent.
"""

from __future__ import annotations

import math
from collections import defaultdict

import numpy as np
import scipy.sparse as sp

from .errors import MaxStepsExceeded
from .reduced import (
    STALL_FACTOR,
    STALL_TOL,
    HittingSummary,
    WalkOperator,
    WeightTable,
    default_max_steps,
)
from .topology import ExplicitGraph, WalkTopology, build_explicit_graph, degree


def slot_offsets(graph: ExplicitGraph) -> np.ndarray:
    off = np.zeros(graph.vertex_count + 1, dtype=np.int64)
    np.cumsum(graph.degrees(), out=off[1:])
    return off


def shift_permutation(graph: ExplicitGraph) -> np.ndarray:
    """Flip-flop shift as an index array: slot ``a`` moves to ``perm[a]``."""
    off = slot_offsets(graph)
    perm = np.empty(off[-1], dtype=np.int64)
    seen: dict[tuple[int, int], int] = defaultdict(int)
    # k-th occurrence of u in adjacency[v]  ->  slot index in v's block
    occurrence: dict[tuple[int, int, int], int] = {}
    for v, nbrs in enumerate(graph.adjacency):
        for i, u in enumerate(nbrs):
            k = seen[v, u]
            seen[v, u] += 1
            occurrence[v, u, k] = off[v] + i
    for (v, u, k), a in occurrence.items():
        if u == v:
            perm[a] = a
        else:
            perm[a] = occurrence[u, v, k]
    if not np.array_equal(np.sort(perm), np.arange(len(perm))):
        raise ValueError("adjacency is not symmetric; shift is not a permutation")
    return perm


def grover_coin(p: int) -> np.ndarray:
    return np.full((p, p), 2.0 / p) - np.eye(p)


def full_walk_from_graph(graph: ExplicitGraph) -> WalkOperator:
    """Walk operator ``S C`` on a regular graph with the uniform start state."""
    degs = set(graph.degrees())
    if len(degs) != 1:
        raise ValueError(f"graph is not regular (degrees {sorted(degs)})")
    p = degs.pop()
    V = graph.vertex_count
    perm = shift_permutation(graph)
    coin = sp.kron(sp.identity(V, format="csr"), sp.csr_matrix(grover_coin(p)), format="csr")
    S = sp.csr_matrix((np.ones(len(perm)), (perm, np.arange(len(perm)))), shape=coin.shape)
    U = (S @ coin).astype(complex).tocsr()
    target = np.zeros(V * p, dtype=bool)
    target[graph.target * p : (graph.target + 1) * p] = True
    initial = np.zeros(V * p, dtype=complex)
    initial[graph.start * p : (graph.start + 1) * p] = 1 / math.sqrt(p)
    labels = None
    if graph.position_labels is not None and graph.slot_labels is not None:
        labels = tuple(
            (J, *graph.position_labels[v]) for v in range(V) for J in graph.slot_labels[v]
        )
    return WalkOperator(U, target, initial, labels)


def build_full_walk(topology: WalkTopology) -> WalkOperator:
    """Full-space walk on the unpruned, self-loop regularized graph."""
    if not topology.self_loops:
        raise ValueError("the quantum walk needs the self-loop regularized graph")
    graph = build_explicit_graph(topology, prune_target_attachment=False)
    op = full_walk_from_graph(graph)
    if op.dimension != degree(topology) * graph.vertex_count:
        raise ValueError("explicit graph degree disagrees with topology degree")
    return op


def run_full_measured_walk(op: WalkOperator, p0: float, max_steps: int | None = None, trace=False) -> HittingSummary:
    """Measured walk by direct iteration; same contract as the reduced runner."""
    if not 0.0 < p0 < 1.0:
        raise ValueError(f"p0 must lie in (0, 1), got {p0}")
    if max_steps is None:
        max_steps = default_max_steps()
    window = STALL_FACTOR * op.dimension
    psi = op.initial.copy()
    cum = tau = 0.0
    ref_cum, ref_t = 0.0, 0
    ps, norms = [], []
    t, status = 0, "steps"
    while t < max_steps:
        t += 1
        psi, hit = op.measured_step(psi)
        cum += hit
        tau += t * hit
        if trace:
            ps.append(hit)
            norms.append(float(np.vdot(psi, psi).real))
        if cum >= p0:
            status = "reached"
            break
        if cum - ref_cum >= STALL_TOL:
            ref_cum, ref_t = cum, t
        elif t - ref_t >= window:
            status = "stalled"
            break
    summary = HittingSummary(
        t_c=t if status == "reached" else None,
        tau_q=tau,
        p_total=cum,
        steps_run=t,
        converged=status == "reached",
        dark=status == "stalled",
        p0=p0,
        trace_p=np.array(ps) if trace else None,
        trace_norm=np.array(norms) if trace else None,
    )
    if status == "steps":
        raise MaxStepsExceeded(f"p0={p0} not reached in {max_steps} steps", summary)
    return summary


def hit_probabilities(op: WalkOperator, steps: int) -> np.ndarray:
    """``p_vf(t)`` for ``t = 1..steps`` (no stopping rule)."""
    psi = op.initial.copy()
    out = np.empty(steps)
    for t in range(steps):
        psi, out[t] = op.measured_step(psi)
    return out


def projection_matrix(full: WalkOperator, basis, weights: WeightTable) -> sp.csr_matrix:
    """Rows are the symmetrized states ``|J,x,s>`` written in the full basis."""
    if full.labels is None:
        raise ValueError("full operator carries no position/direction labels")
    index = {(st.direction, st.x, st.s): r for r, st in enumerate(basis)}
    rows, cols, vals = [], [], []
    for c, lab in enumerate(full.labels):
        r = index.get(lab)
        if r is None:
            continue
        rows.append(r)
        cols.append(c)
        vals.append(1.0 / math.sqrt(weights.weight(basis[r])))
    return sp.csr_matrix((vals, (rows, cols)), shape=(len(basis), full.dimension))


def project_to_reduced(full_state, basis, weights: WeightTable, full: WalkOperator) -> np.ndarray:
    """Overlaps ``<J,x,s|psi>`` of a full-space state with the reduced basis."""
    return projection_matrix(full, basis, weights) @ np.asarray(full_state, dtype=complex)


def dark_example_graph() -> ExplicitGraph:
    """Small 3-regular graph whose walk from vertex 0 misses vertex 3 with probability 1/2.

    Vertex 0 sees two neighbours (1 and 2) besides its loop, but the target 3
    hangs off vertex 1 only.  Part of the start state lies in an eigenspace of
    the measured step with unit-modulus eigenvalues, so the cumulative hit
    probability plateaus below one.
    """
    return ExplicitGraph.from_edges(4, [(0, 1), (0, 2), (1, 2), (1, 3)], start=0, target=3, loops=[1, 0, 1, 2])
