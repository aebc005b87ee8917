"""Embedding topologies and their explicit graph realizations.

Three families are supported:

* ``bare``: the d-dimensional hypercube, walked corner to corner.
* ``tails``: every hypercube vertex carries ``n`` disjoint paths of ``q``
  vertices, each joined to it by one leg edge.
* ``concat``: every vertex of the central cube (dimension ``dims[0]``) is the
  all-ones corner of a level-1 cube (``dims[1]``), every other vertex of that
  cube is the all-ones corner of a level-2 cube, and so on for
  ``m = len(dims) - 1`` levels.  The walk either runs corner to corner on the
  central cube (``central``) or between the two outermost all-zeros corners
  of the whole structure (``penetrate``).

Explicit graphs index vertices block by block: central-cube bitstrings in
ascending order, each followed by its attachment in depth-first order.
Adjacency lists are ordered cube bits first (bit 0 upward), then downward
attachment edges, then self-loops, so slot ``j < d`` of a central vertex
always flips bit ``j``.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field, replace

from .errors import ConfigError, SizeExceeded

MAX_EXPLICIT_VERTICES = 2**22


class Kind(str, enum.Enum):
    BARE = "bare"
    TAILS = "tails"
    CONCAT = "concat"


class WalkMode(str, enum.Enum):
    CENTRAL = "central"
    PENETRATE = "penetrate"


@dataclass(frozen=True)
class WalkTopology:
    """Declarative description of one embedding scenario.

    Use the :meth:`bare`, :meth:`tails` and :meth:`concat` constructors rather
    than filling the fields by hand.
    """

    kind: Kind
    d: int = 0
    n: int = 0
    q: int = 0
    dims: tuple[int, ...] = ()
    mode: WalkMode = WalkMode.CENTRAL
    self_loops: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "mode", WalkMode(self.mode))
        object.__setattr__(self, "dims", tuple(int(v) for v in self.dims))
        if self.kind is Kind.CONCAT:
            if not self.dims:
                raise ConfigError("concat topology needs at least one dimension")
            if any(v < 1 for v in self.dims):
                raise ConfigError(f"all dimensions must be >= 1, got {self.dims}")
        else:
            if self.d < 1:
                raise ConfigError(f"hypercube dimension must be >= 1, got {self.d}")
            if self.n < 0 or self.q < 0:
                raise ConfigError("tail count and length must be non-negative")

    @classmethod
    def bare(cls, d, self_loops=True):
        return cls(Kind.BARE, d=d, self_loops=self_loops)

    @classmethod
    def tails(cls, d, n, q, self_loops=True):
        return cls(Kind.TAILS, d=d, n=n, q=q, self_loops=self_loops)

    @classmethod
    def concat(cls, dims, mode=WalkMode.CENTRAL, self_loops=True):
        return cls(Kind.CONCAT, dims=tuple(dims), mode=mode, self_loops=self_loops)

    @property
    def m(self) -> int:
        return len(self.dims) - 1 if self.kind is Kind.CONCAT else 0

    @property
    def central_dim(self) -> int:
        return self.dims[0] if self.kind is Kind.CONCAT else self.d

    def normalized(self) -> WalkTopology:
        """Collapse degenerate descriptions onto ``bare``."""
        if self.kind is Kind.TAILS and (self.n == 0 or self.q == 0):
            return WalkTopology.bare(self.d, self.self_loops)
        if self.kind is Kind.CONCAT and len(self.dims) == 1:
            return WalkTopology.bare(self.dims[0], self.self_loops)
        return self

    def with_loops(self, flag: bool) -> WalkTopology:
        return replace(self, self_loops=bool(flag))

    def key(self) -> str:
        """Flat ``key=value`` form, e.g. ``kind=tails d=3 n=1 q=1 loops=true``."""
        loops = "true" if self.self_loops else "false"
        if self.kind is Kind.BARE:
            return f"kind=bare d={self.d} loops={loops}"
        if self.kind is Kind.TAILS:
            return f"kind=tails d={self.d} n={self.n} q={self.q} loops={loops}"
        dims = ",".join(str(v) for v in self.dims)
        return f"kind=concat dims={dims} mode={self.mode.value} loops={loops}"

    __str__ = key

    @classmethod
    def parse(cls, text: str) -> WalkTopology:
        fields_ = {}
        for token in text.split():
            if "=" not in token:
                raise ConfigError(f"malformed token {token!r} in {text!r}")
            k, v = token.split("=", 1)
            fields_[k.strip().lower()] = v.strip()
        try:
            kind = Kind(fields_.pop("kind"))
        except KeyError:
            raise ConfigError(f"missing kind= in {text!r}") from None
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        loops_text = fields_.pop("loops", "true").lower()
        if loops_text not in ("true", "false"):
            raise ConfigError(f"loops must be true or false, got {loops_text!r}")
        loops = loops_text == "true"
        try:
            if kind is Kind.BARE:
                out = cls.bare(int(fields_.pop("d")), loops)
            elif kind is Kind.TAILS:
                out = cls.tails(
                    int(fields_.pop("d")), int(fields_.pop("n")), int(fields_.pop("q")), loops
                )
            else:
                dims = tuple(int(v) for v in fields_.pop("dims").split(","))
                mode = WalkMode(fields_.pop("mode", "central"))
                out = cls.concat(dims, mode, loops)
        except KeyError as exc:
            raise ConfigError(f"missing field {exc.args[0]}= in {text!r}") from None
        except ValueError as exc:
            raise ConfigError(f"bad value in {text!r}: {exc}") from None
        if fields_:
            raise ConfigError(f"unknown keys {sorted(fields_)} in {text!r}")
        return out


def _intrinsic_concat_degrees(dims):
    """Loop-free degree of a vertex at each level of a concatenated structure."""
    m = len(dims) - 1
    return [dims[k] + dims[k + 1] for k in range(m)] + [dims[m]]


def degree(topology: WalkTopology) -> int:
    """Degree ``p`` of the regularized (self-loop padded) graph."""
    t = topology.normalized()
    if t.kind is Kind.BARE:
        return t.d
    if t.kind is Kind.TAILS:
        return t.d + t.n
    return max(_intrinsic_concat_degrees(t.dims))


def reduced_dimension(topology: WalkTopology) -> int:
    """Number of states in the symmetry-reduced walk space."""
    t = topology.normalized()
    if t.kind is Kind.BARE:
        return 2 * t.d
    if t.kind is Kind.TAILS:
        d, q = t.d, t.q
        dim = d * (3 * q + 2)
        if degree(t) == 2:
            # interior tail vertices carry no loops when p = 2
            dim -= d * (q - 1)
        return dim
    dims, m, p = t.dims, t.m, degree(t)
    prods = [math.prod(dims[: k + 1]) for k in range(m + 1)]
    intrinsic = _intrinsic_concat_degrees(dims)
    if t.mode is WalkMode.CENTRAL:
        dim = 2 * sum(prods) + prods[m]
        # padding loops on non-outermost levels (only when dims are unequal)
        dim += sum(prods[k] for k in range(m) if intrinsic[k] < p)
        return dim
    tail_prods = [math.prod(dims[1 : k + 1]) for k in range(1, m + 1)]
    dim = 2 * dims[0] + (dims[0] + 1) * (2 * sum(tail_prods) + tail_prods[-1]) - 1
    inner = [1] + tail_prods
    dim += sum((dims[0] + 1) * inner[k] for k in range(m) if intrinsic[k] < p)
    return dim


def total_outgoing_edges(topology: WalkTopology, with_self_loops: bool = False) -> int:
    """Degree sum of the combined graph hanging off one central vertex.

    This is the per-vertex quantity that sets the classical dwell time: the
    attachment's own degree sum plus the legs joining it to the cube vertex.
    """
    t = topology.normalized()
    if t.kind is Kind.BARE:
        return 0
    p = degree(t)
    if t.kind is Kind.TAILS:
        if with_self_loops:
            return t.n * t.q * p + t.n
        return 2 * t.n * t.q
    dims = t.dims
    if with_self_loops:
        inner = sum(math.prod(2 ** dims[j] - 1 for j in range(1, k + 1)) for k in range(1, t.m + 1))
        return inner * p + dims[1]
    total = 0
    for k in range(1, t.m + 1):
        cubes = math.prod(2 ** dims[j] - 1 for j in range(1, k))
        total += cubes * dims[k] * 2 ** dims[k]
    return total


@dataclass(frozen=True)
class ExplicitGraph:
    """Adjacency-level graph.

    ``adjacency[v]`` lists neighbour indices with multiplicity; a self-loop
    appears as ``v`` itself and adds one to the degree.  ``position_labels``
    and ``slot_labels`` are optional and carry the symmetry-reduced
    coordinates ``(x, s)`` of each vertex and the effective direction
    (``R L D U O``) of each adjacency slot.
    """

    adjacency: tuple[tuple[int, ...], ...]
    start: int
    target: int
    position_labels: tuple | None = field(default=None, compare=False)
    slot_labels: tuple | None = field(default=None, compare=False)

    @property
    def vertex_count(self) -> int:
        return len(self.adjacency)

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def degrees(self) -> list[int]:
        return [len(a) for a in self.adjacency]

    def total_degree(self) -> int:
        return sum(len(a) for a in self.adjacency)

    @classmethod
    def from_edges(cls, vertex_count, edges, start, target, loops=None):
        """Build from an undirected edge list; ``loops[v]`` adds self-loops."""
        adj = [[] for _ in range(vertex_count)]
        for u, v in edges:
            if u == v:
                adj[u].append(u)
            else:
                adj[u].append(v)
                adj[v].append(u)
        if loops:
            for v, count in enumerate(loops):
                adj[v].extend([v] * count)
        return cls(tuple(tuple(a) for a in adj), start, target)

    def is_symmetric(self) -> bool:
        from collections import Counter

        counts = [Counter(a) for a in self.adjacency]
        for v, c in enumerate(counts):
            for u, k in c.items():
                if u != v and counts[u][v] != k:
                    return False
        return True

    def component(self, source: int) -> set[int]:
        seen = {source}
        queue = deque([source])
        while queue:
            v = queue.popleft()
            for u in self.adjacency[v]:
                if u not in seen:
                    seen.add(u)
                    queue.append(u)
        return seen

    def is_connected(self) -> bool:
        return len(self.component(0)) == self.vertex_count


def explicit_vertex_count(topology: WalkTopology, prune_target_attachment: bool = False) -> int:
    t = topology.normalized()
    if t.kind is Kind.BARE:
        return 2**t.d
    if t.kind is Kind.TAILS:
        block = t.n * t.q
        return 2**t.d * (1 + block) - (block if prune_target_attachment else 0)
    dims = t.dims
    sub = sum(math.prod(2 ** dims[j] - 1 for j in range(1, k + 1)) for k in range(1, t.m + 1))
    prune = prune_target_attachment and t.mode is WalkMode.CENTRAL
    return 2 ** dims[0] * (1 + sub) - (sub if prune else 0)


class _Builder:
    def __init__(self):
        self.adj: list[list[int]] = []
        self.slots: list[list[str]] = []
        self.labels: list = []

    def add(self, label) -> int:
        self.adj.append([])
        self.slots.append([])
        self.labels.append(label)
        return len(self.adj) - 1

    def link(self, u, v, ju, jv):
        self.adj[u].append(v)
        self.slots[u].append(ju)
        self.adj[v].append(u)
        self.slots[v].append(jv)

    def pad(self, v, p):
        extra = p - len(self.adj[v])
        self.adj[v].extend([v] * extra)
        self.slots[v].extend(["O"] * extra)

    def freeze(self, start, target) -> ExplicitGraph:
        return ExplicitGraph(
            tuple(tuple(a) for a in self.adj),
            start,
            target,
            tuple(self.labels),
            tuple(tuple(s) for s in self.slots),
        )


def build_explicit_graph(topology: WalkTopology, prune_target_attachment: bool = False) -> ExplicitGraph:
    """Materialize ``topology`` as an :class:`ExplicitGraph`.

    With ``prune_target_attachment`` the external graph hanging off the
    target is left out (it is never visited by a walk that stops on arrival).
    Self-loops are added iff ``topology.self_loops``.
    """
    t = topology.normalized()
    count = explicit_vertex_count(t, prune_target_attachment)
    if count > MAX_EXPLICIT_VERTICES:
        raise SizeExceeded(f"{t.key()} needs {count} vertices (limit {MAX_EXPLICIT_VERTICES})")
    if t.kind is Kind.CONCAT:
        return _build_concat(t, prune_target_attachment)
    d = t.d
    n, q = (t.n, t.q) if t.kind is Kind.TAILS else (0, 0)
    p = degree(t)
    full = 2**d - 1
    b = _Builder()
    index = {}
    tails = {}
    for bits in range(2**d):
        x = bin(bits).count("1")
        index[bits] = b.add((x, 0))
        if n and not (prune_target_attachment and bits == full):
            tails[bits] = [[b.add((x, s)) for s in range(1, q + 1)] for _ in range(n)]
    # cube edges first so that slot j flips bit j
    for bits in range(2**d):
        u = index[bits]
        for j in range(d):
            v = index[bits ^ (1 << j)]
            b.adj[u].append(v)
            b.slots[u].append("L" if bits >> j & 1 else "R")
    for bits, paths in tails.items():
        prev_hc = index[bits]
        for path in paths:
            prev = prev_hc
            for v in path:
                b.link(prev, v, "D", "U")
                prev = v
    if t.self_loops and n:
        for paths in tails.values():
            for path in paths:
                for v in path:
                    b.pad(v, p)
    return b.freeze(index[0], index[full])


def _build_concat(t: WalkTopology, prune: bool) -> ExplicitGraph:
    dims, m = t.dims, t.m
    p = degree(t)
    b = _Builder()
    d0 = dims[0]
    full0 = 2**d0 - 1

    def attach(anchor, level, prefix, x):
        """Hang a level-``level`` cube off ``anchor`` (its all-ones corner).

        Returns the vertex at the end of the all-zeros chain below ``anchor``.
        """
        dk = dims[level]
        corner = 2**dk - 1
        rest = tuple(dims[level + 1 :])
        index = {corner: anchor}
        for bits in range(corner):
            s = bin(bits).count("1")
            index[bits] = b.add((x, prefix + (s,) + rest))
        for bits in range(corner):
            u = index[bits]
            for j in range(dk):
                nb = bits ^ (1 << j)
                if nb < bits:
                    continue
                if nb == corner:
                    b.link(u, anchor, "U", "D")
                else:
                    b.link(u, index[nb], "R", "L")
        if level == m:
            return index[0]
        chain_end = None
        for bits in range(corner):
            end = attach(index[bits], level + 1, prefix + (bin(bits).count("1"),), x)
            if bits == 0:
                chain_end = end
        return chain_end

    central = {}
    for bits in range(2**d0):
        central[bits] = b.add((bin(bits).count("1"), tuple(dims[1:])))
    for bits in range(2**d0):
        u = central[bits]
        for j in range(d0):
            b.adj[u].append(central[bits ^ (1 << j)])
            b.slots[u].append("L" if bits >> j & 1 else "R")
    chain_ends = {}
    for bits in range(2**d0):
        if prune and bits == full0 and t.mode is WalkMode.CENTRAL:
            continue
        chain_ends[bits] = attach(central[bits], 1, (), bin(bits).count("1"))
    if t.self_loops:
        for v in range(len(b.adj)):
            b.pad(v, p)
    if t.mode is WalkMode.CENTRAL:
        return b.freeze(central[0], central[full0])
    return b.freeze(chain_ends[0], chain_ends[full0])
