"""Symmetry-reduced Grover walk and measured-walk hitting times.

The full walk lives on (direction, vertex) pairs.  Starting from the uniform
direction state on one corner, the state stays symmetric under the
bit permutations of every cube that fix start and target, so it can be
written in the basis

    |J, x, s> = N(J, x, s)**-1/2 * sum of |j, v> over the orbit,

where ``x`` is the Hamming weight on the central cube, ``s`` the position
inside the attachment and ``J`` one of five effective directions:

    R, L   towards higher / lower weight on the current cube
    D      into the attached graph (away from the central cube)
    U      back towards the central cube
    O      self-loop

``N(J, x, s) = Ntilde(x, s) * N_xs(J)`` counts the orbit.  In this basis the
shift is a permutation and the Grover coin compresses, per position, to
``c(J, K) = 2/p * sqrt(N_xs(J) N_xs(K)) - [J == K]``.

At the target position only directions that can receive amplitude are kept;
the coin there is the identity because the measurement removes that
amplitude before the next coin is applied.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from . import _kernel
from .errors import DarkStateDetected, MaxStepsExceeded, NonUnitary, NoPlateau
from .topology import Kind, WalkMode, WalkTopology, degree

DIRECTIONS = ("R", "L", "D", "U", "O")
DEFAULT_MAX_STEPS = 10_000_000
STALL_TOL = 1e-15
STALL_FACTOR = 10


@dataclass(frozen=True, order=True)
class ReducedState:
    direction: str
    x: int
    s: int | tuple

    @property
    def position(self):
        return (self.x, self.s)


@dataclass(frozen=True)
class WeightTable:
    """Orbit sizes for every reduced state."""

    p: int
    position_weight: Mapping[tuple, int]
    direction_weight: Mapping[ReducedState, int]
    start: tuple
    target: tuple

    def weight(self, state: ReducedState) -> int:
        return self.position_weight[state.position] * self.direction_weight[state]


# --------------------------------------------------------------------------
# per-topology layouts: positions with their weights, and the shift partner


class _Layout:
    p: int
    start: tuple
    target: tuple

    def positions(self):
        """Yield ``(position, Ntilde, {J: N_xs(J)})``."""
        raise NotImplementedError

    def partner(self, st: ReducedState) -> ReducedState:
        raise NotImplementedError


class _LineLayout(_Layout):
    """Bare cubes and tails share the ``(x, s)`` integer coordinates."""

    def __init__(self, d, n=0, q=0):
        self.d, self.n, self.q = d, n, q
        self.p = d + n
        self.start = (0, 0)
        self.target = (d, 0)

    def positions(self):
        d, n, q, p = self.d, self.n, self.q, self.p
        for x in range(d + 1):
            dirs = {"R": d - x, "L": x}
            if n and x != d:
                dirs["D"] = n
            yield (x, 0), math.comb(d, x), dirs
            if x == d or not n:
                continue
            for s in range(1, q + 1):
                if s < q:
                    yield (x, s), n * math.comb(d, x), {"D": 1, "U": 1, "O": p - 2}
                else:
                    yield (x, s), n * math.comb(d, x), {"U": 1, "O": p - 1}

    def partner(self, st):
        J, x, s = st.direction, st.x, st.s
        if J == "R":
            return ReducedState("L", x + 1, s)
        if J == "L":
            return ReducedState("R", x - 1, s)
        if J == "D":
            return ReducedState("U", x, s + 1)
        if J == "U":
            return ReducedState("D", x, s - 1)
        return st


class _ConcatLayout(_Layout):
    """Concatenated cubes; ``s`` is a tuple with ``s_k == d_k`` meaning "below level k"."""

    def __init__(self, dims, mode):
        self.dims = tuple(dims)
        self.m = len(dims) - 1
        self.penetrate = mode is WalkMode.PENETRATE
        self.p = degree(WalkTopology.concat(dims, mode))
        rest = self.dims[1:]
        if self.penetrate:
            zero = (0,) * self.m
            self.start = (0, zero)
            self.target = (self.dims[0], zero)
        else:
            self.start = (0, rest)
            self.target = (self.dims[0], rest)

    def level(self, s):
        return sum(1 for sj, dj in zip(s, self.dims[1:]) if sj < dj)

    def positions(self):
        dims, m, p = self.dims, self.m, self.p
        d0 = dims[0]
        for x in range(d0 + 1):
            has_sub = self.penetrate or x < d0
            dirs = {"R": d0 - x, "L": x}
            if has_sub:
                dirs["D"] = dims[1]
                dirs["O"] = p - d0 - dims[1]
            yield (x, dims[1:]), math.comb(d0, x), dirs
            if has_sub:
                yield from self._subtree(x, (), 1, math.comb(d0, x))

    def _subtree(self, x, prefix, k, weight):
        dims, m, p = self.dims, self.m, self.p
        dk = dims[k]
        rest = dims[k + 1 :]
        for sk in range(dk):
            dirs = {}
            if sk < dk - 1:
                dirs["R"] = dk - sk
            else:
                dirs["U"] = 1
            dirs["L"] = sk
            intrinsic = dk
            if k < m:
                dirs["D"] = dims[k + 1]
                intrinsic += dims[k + 1]
            dirs["O"] = p - intrinsic
            w = weight * math.comb(dk, sk)
            yield (x, prefix + (sk,) + rest), w, dirs
            if k < m:
                yield from self._subtree(x, prefix + (sk,), k + 1, w)

    def partner(self, st):
        J, x, s = st.direction, st.x, st.s
        if J == "O":
            return st
        k = self.level(s)
        if k == 0:
            if J == "R":
                return ReducedState("L", x + 1, s)
            if J == "L":
                return ReducedState("R", x - 1, s)
            return ReducedState("U", x, (self.dims[1] - 1,) + s[1:])
        sk = s[k - 1]

        def with_level(idx, value):
            return s[:idx] + (value,) + s[idx + 1 :]

        if J == "R":
            return ReducedState("L", x, with_level(k - 1, sk + 1))
        if J == "L":
            return ReducedState("R", x, with_level(k - 1, sk - 1))
        if J == "U":
            return ReducedState("D", x, with_level(k - 1, self.dims[k]))
        # J == "D"
        return ReducedState("U", x, with_level(k, self.dims[k + 1] - 1))


def _layout(topology: WalkTopology) -> _Layout:
    t = topology.normalized()
    if t.kind is Kind.BARE:
        return _LineLayout(t.d)
    if t.kind is Kind.TAILS:
        return _LineLayout(t.d, t.n, t.q)
    return _ConcatLayout(t.dims, t.mode)


def build_basis(topology: WalkTopology) -> tuple[list[ReducedState], WeightTable]:
    """Enumerate the reduced basis and its orbit weights.

    Only the regularized walk is defined, so ``topology.self_loops`` must be
    set.
    """
    if not topology.self_loops:
        raise ValueError("the quantum walk needs the self-loop regularized graph")
    layout = _layout(topology)
    raw: dict[ReducedState, int] = {}
    ntilde: dict[tuple, int] = {}
    order: list[ReducedState] = []
    for pos, nt, dirs in layout.positions():
        if nt <= 0:
            continue
        for J in DIRECTIONS:
            w = dirs.get(J, 0)
            if w > 0:
                st = ReducedState(J, pos[0], pos[1])
                raw[st] = w
                order.append(st)
        ntilde[pos] = nt
    states = []
    for st in order:
        if st.position == layout.target:
            mate = layout.partner(st)
            if mate not in raw or mate.position == layout.target:
                continue
        states.append(st)
    kept = {st.position for st in states}
    weights = WeightTable(
        p=layout.p,
        position_weight={pos: nt for pos, nt in ntilde.items() if pos in kept},
        direction_weight={st: raw[st] for st in states},
        start=layout.start,
        target=layout.target,
    )
    return states, weights


# --------------------------------------------------------------------------
# operators


@dataclass(frozen=True, eq=False)
class WalkOperator:
    """Walk unitary ``U = S C`` with target mask and initial state.

    ``labels`` names each basis index (reduced states, or ``(J, x, s)``
    triples for full-space walks built from labelled graphs).
    """

    matrix: sp.csr_matrix
    target: np.ndarray
    initial: np.ndarray
    labels: tuple | None = field(default=None, repr=False)

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def target_projector(self) -> sp.dia_matrix:
        return sp.diags(self.target.astype(float))

    def measured_step(self, psi):
        """One step of the measured walk: returns ``(P0 U psi, |Pf U psi|^2)``."""
        phi = self.matrix @ psi
        hit = float(np.vdot(phi[self.target], phi[self.target]).real)
        phi[self.target] = 0
        return phi, hit

    def unitarity_error(self) -> float:
        U = self.matrix
        G = (U.conj().T @ U - sp.identity(U.shape[0], format="csr")).tocoo()
        return float(np.abs(G.data).max()) if G.nnz else 0.0


def grover_block(weights, p):
    """Grover coin compressed onto direction groups of sizes ``weights``."""
    w = np.asarray(weights, dtype=float)
    return (2.0 / p) * np.sqrt(np.outer(w, w)) - np.eye(len(w))


def build_operator(topology: WalkTopology, basis=None, weights=None) -> WalkOperator:
    """Assemble the reduced walk operator for ``topology``."""
    if basis is None or weights is None:
        basis, weights = build_basis(topology)
    layout = _layout(topology)
    p = weights.p
    index = {st: i for i, st in enumerate(basis)}
    perm = np.array([index[layout.partner(st)] for st in basis], dtype=np.int64)
    groups: dict[tuple, list[int]] = {}
    for i, st in enumerate(basis):
        groups.setdefault(st.position, []).append(i)
    rows, cols, vals = [], [], []
    for pos, members in groups.items():
        if pos == weights.target:
            for i in members:
                rows.append(perm[i])
                cols.append(i)
                vals.append(1.0)
            continue
        w = [weights.direction_weight[basis[i]] for i in members]
        if sum(w) != p:
            raise ValueError(f"direction weights at {pos} sum to {sum(w)}, expected {p}")
        block = grover_block(w, p)
        for a, i in enumerate(members):
            for b, j in enumerate(members):
                if block[a, b] != 0.0:
                    rows.append(perm[i])
                    cols.append(j)
                    vals.append(block[a, b])
    dim = len(basis)
    U = sp.csr_matrix((np.array(vals, dtype=complex), (rows, cols)), shape=(dim, dim))
    target = np.array([st.position == weights.target for st in basis])
    initial = np.zeros(dim, dtype=complex)
    if weights.position_weight[weights.start] != 1:
        raise ValueError("start position must be a single vertex")
    for i in groups[weights.start]:
        initial[i] = math.sqrt(weights.direction_weight[basis[i]] / p)
    op = WalkOperator(U, target, initial, tuple(basis))
    err = op.unitarity_error()
    if err > 1e-10:
        raise NonUnitary(f"|U^H U - I|_max = {err:.3g}")
    return op


def reduced_walk(topology: WalkTopology) -> WalkOperator:
    """Shortcut: regularize ``topology`` and build its reduced operator."""
    return build_operator(topology.with_loops(True))


# --------------------------------------------------------------------------
# measured walk


@dataclass(frozen=True)
class HittingSummary:
    """Result of one measured-walk run.

    ``t_c`` is the first step at which the cumulative hit probability reaches
    ``p0`` (``None`` if it never did), ``tau_q`` the mean truncated there.
    """

    t_c: int | None
    tau_q: float
    p_total: float
    steps_run: int
    converged: bool
    dark: bool
    p0: float = float("nan")
    trace_p: np.ndarray | None = field(default=None, repr=False, compare=False)
    trace_norm: np.ndarray | None = field(default=None, repr=False, compare=False)


def default_max_steps() -> int:
    value = os.environ.get("HCWALK_MAX_STEPS")
    return int(float(value)) if value else DEFAULT_MAX_STEPS


def _run(op: WalkOperator, thresholds, max_steps, trace):
    U = op.matrix
    window = STALL_FACTOR * op.dimension
    trace_len = max_steps if trace is True else int(trace or 0)
    return _kernel.measured_walk(
        U.indptr.astype(np.int64),
        U.indices.astype(np.int64),
        U.data.astype(np.complex128),
        op.target,
        op.initial.astype(np.complex128),
        np.asarray(thresholds, dtype=float),
        int(max_steps),
        int(window),
        STALL_TOL,
        min(trace_len, int(max_steps)),
    )


def run_measured_walk(op: WalkOperator, p0: float, max_steps: int | None = None, trace=False) -> HittingSummary:
    """Run the measured walk until the cumulative hit probability reaches ``p0``.

    ``trace`` may be ``True`` (record every step) or a step count; the
    per-step hit probabilities and remaining norms are then attached to the
    summary.  Raises :class:`MaxStepsExceeded` (with the partial summary) if
    neither ``p0`` nor a stall is reached within ``max_steps``.
    """
    if not 0.0 < p0 < 1.0:
        raise ValueError(f"p0 must lie in (0, 1), got {p0}")
    if max_steps is None:
        max_steps = default_max_steps()
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    status, steps, cum, tau, t_hit, tau_at, cum_at, tp, tn = _run(op, [p0], max_steps, trace)
    reached = status == _kernel.REACHED
    n_trace = min(steps, tp.shape[0])
    summary = HittingSummary(
        t_c=int(t_hit[0]) if reached else None,
        tau_q=float(tau_at[0]) if reached else float(tau),
        p_total=float(cum_at[0]) if reached else float(cum),
        steps_run=int(steps),
        converged=reached,
        dark=status == _kernel.STALLED,
        p0=p0,
        trace_p=tp[:n_trace] if trace else None,
        trace_norm=tn[:n_trace] if trace else None,
    )
    if status == _kernel.OUT_OF_STEPS:
        raise MaxStepsExceeded(f"p0={p0} not reached in {max_steps} steps", summary)
    return summary


def hitting_profile(op: WalkOperator, eps_values, max_steps: int | None = None) -> dict[float, HittingSummary]:
    """Summaries at ``p0 = 1 - eps`` for several ``eps`` from a single run.

    Values of ``eps`` not reached before a stall or the step limit get a
    summary with ``t_c=None`` describing where the run stopped.
    """
    if max_steps is None:
        max_steps = default_max_steps()
    eps_sorted = sorted({float(e) for e in eps_values}, reverse=True)
    if not eps_sorted or not all(0.0 < e < 1.0 for e in eps_sorted):
        raise ValueError("eps values must lie in (0, 1)")
    thresholds = [1.0 - e for e in eps_sorted]
    status, steps, cum, tau, t_hit, tau_at, cum_at, _, _ = _run(op, thresholds, max_steps, False)
    out = {}
    for e, th, th_t, ta, ca in zip(eps_sorted, thresholds, t_hit, tau_at, cum_at):
        if th_t > 0:
            out[e] = HittingSummary(int(th_t), float(ta), float(ca), int(th_t), True, False, th)
        else:
            out[e] = HittingSummary(None, float(tau), float(cum), int(steps), False,
                                    status == _kernel.STALLED, th)
    return out


def conditional_hitting(op: WalkOperator, max_steps: int | None = None, p0: float = 1 - 1e-10):
    """Mean hitting time conditioned on ever hitting: ``sum t p(t) / sum p(t)``.

    Runs until either ``p0`` is reached or the cumulative probability
    plateaus.  Returns ``(tilde_tau, p_total)``.
    """
    if max_steps is None:
        max_steps = default_max_steps()
    status, steps, cum, tau, _, _, _, _, _ = _run(op, [p0], max_steps, False)
    if status == _kernel.OUT_OF_STEPS:
        raise NoPlateau(f"no plateau and p0={p0} not reached within {max_steps} steps")
    if cum <= 0.0:
        raise NoPlateau("the walk never hits the target")
    return tau / cum, cum


def convergence_check(tau_at_eps: float, tau_at_half_eps: float) -> bool:
    """Threshold test ``log tau(1 - eps/2) - log tau(1 - eps) < 0.1``."""
    if tau_at_eps <= 0 or tau_at_half_eps <= 0:
        raise ValueError("hitting times must be positive")
    return math.log(tau_at_half_eps) - math.log(tau_at_eps) < 0.1


# --------------------------------------------------------------------------
# exact expectation


DARK_MODULUS = 1 - 1e-9


def _stein_upper(T, B):
    """Solve ``X = T^H X T + B`` for upper-triangular ``T`` with spectrum inside the unit disc.

    Column ``j`` of ``X`` satisfies a lower-triangular system once columns
    ``0..j-1`` are known.
    """
    n = T.shape[0]
    X = np.zeros((n, n), dtype=complex)
    TH = T.conj().T
    eye = np.eye(n)
    for j in range(n):
        rhs = B[:, j] + TH @ (X[:, :j] @ T[:j, j])
        X[:, j] = sla.solve_triangular(eye - T[j, j] * TH, rhs, lower=True)
    return X


def expected_hitting_exact(op: WalkOperator) -> float:
    """Exact ``tau_h = sum_t t p(t)`` from two discrete Stein equations.

    With ``N = P0 U`` and ``B = U^H Pf U`` the sum equals ``<psi0|Z|psi0>``
    where ``X = N^H X N + B`` and ``Z = N^H Z N + X``.  Both are solved in the
    Schur basis of ``N``.  Eigenvectors of ``N`` on the unit circle never
    reach the target; if the initial state overlaps them
    :class:`DarkStateDetected` is raised, otherwise they are split off (their
    orthogonal complement is ``N``-invariant) before solving.
    """
    U = op.matrix.toarray()
    N = U.copy()
    N[op.target, :] = 0.0
    Y = U[op.target, :]
    B = Y.conj().T @ Y
    psi = op.initial.astype(complex)
    # sorted Schur form: the leading k columns span the unit-modulus eigenspace
    T, Q, k = sla.schur(N, output="complex", sort=lambda z: abs(z) > DARK_MODULUS)
    if k:
        overlap = float(np.linalg.norm(Q[:, :k].conj().T @ psi))
        if overlap > 1e-8:
            raise DarkStateDetected(f"initial state overlaps a dark subspace (|overlap| = {overlap:.3g})")
    P = Q[:, k:]
    T = T[k:, k:]
    B = P.conj().T @ B @ P
    psi = P.conj().T @ psi
    X = _stein_upper(T, B)
    Z = _stein_upper(T, X)
    value = np.vdot(psi, Z @ psi)
    if not np.isfinite(value):
        raise DarkStateDetected("Stein equation is singular to working precision")
    return float(value.real)
