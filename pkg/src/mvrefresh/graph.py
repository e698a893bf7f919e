"""Dependency-graph model for refresh workloads, plus order and memory utilities.

Positions in an execution order are 1-based throughout. A flagged node is held
in memory from its own execution slot through the slot of its last child; a
flagged sink holds only its own slot.
"""

from __future__ import annotations

import heapq
import math
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from functools import cached_property

NodeId = str
FlagSet = frozenset


class GraphError(ValueError):
    """Base class for structural problems in a workload graph."""


class CycleError(GraphError):
    def __init__(self, cycle: Sequence[NodeId]):
        self.cycle = tuple(cycle)
        super().__init__("cycle detected: " + " -> ".join(self.cycle))


class DanglingEdgeError(GraphError):
    pass


class DuplicateIdError(GraphError):
    pass


class UnknownNode(KeyError):
    pass


@dataclass(frozen=True)
class NodeMeta:
    id: NodeId
    size: int
    speedup_score: float | None = None
    compute_time: float | None = None

    def __post_init__(self):
        if self.size < 0:
            raise GraphError(f"node {self.id!r}: negative size {self.size}")
        if self.speedup_score is not None and self.speedup_score < 0:
            raise GraphError(f"node {self.id!r}: negative speedup score")
        if self.compute_time is not None and self.compute_time < 0:
            raise GraphError(f"node {self.id!r}: negative compute time")

    @property
    def score(self) -> float:
        return 0.0 if self.speedup_score is None else float(self.speedup_score)


@dataclass(frozen=True)
class DepGraph:
    """Immutable refresh workload: nodes with metadata and parent->child edges.

    Construction does not validate; call :func:`validate_graph` (the file
    loaders do this for you). Index-based adjacency is cached on first use and
    follows the node list order.
    """

    nodes: tuple[NodeMeta, ...]
    edges: tuple[tuple[NodeId, NodeId], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple((p, c) for p, c in self.edges))

    def __len__(self) -> int:
        return len(self.nodes)

    @cached_property
    def ids(self) -> tuple[NodeId, ...]:
        return tuple(n.id for n in self.nodes)

    @cached_property
    def index(self) -> dict[NodeId, int]:
        return {v: i for i, v in enumerate(self.ids)}

    @cached_property
    def meta(self) -> dict[NodeId, NodeMeta]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def sizes(self) -> tuple[int, ...]:
        return tuple(n.size for n in self.nodes)

    @cached_property
    def scores(self) -> tuple[float, ...]:
        return tuple(n.score for n in self.nodes)

    @cached_property
    def children(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.nodes]
        for p, c in self.edges:
            out[self.index[p]].append(self.index[c])
        return tuple(tuple(sorted(x)) for x in out)

    @cached_property
    def parents(self) -> tuple[tuple[int, ...], ...]:
        out: list[list[int]] = [[] for _ in self.nodes]
        for p, c in self.edges:
            out[self.index[c]].append(self.index[p])
        return tuple(tuple(sorted(x)) for x in out)

    def size_of(self, v: NodeId) -> int:
        return self.meta[v].size

    def score_of(self, v: NodeId) -> float:
        return self.meta[v].score

    def total_score(self, flagged: Iterable[NodeId]) -> float:
        # fsum is exact, so the result does not depend on set iteration order
        return math.fsum(self.meta[v].score for v in flagged)

    def total_size(self, flagged: Iterable[NodeId] | None = None) -> int:
        if flagged is None:
            return sum(self.sizes)
        return sum(self.meta[v].size for v in flagged)

    def with_scores(self, scores: dict[NodeId, float]) -> DepGraph:
        """Copy of the graph with speedup scores replaced for the given ids."""
        nodes = tuple(
            NodeMeta(n.id, n.size, scores.get(n.id, n.speedup_score), n.compute_time)
            for n in self.nodes
        )
        return DepGraph(nodes, self.edges)


@dataclass(frozen=True)
class ExecOrder:
    """A permutation of node ids; ``position`` is 1-based."""

    ids: tuple[NodeId, ...]
    _pos: dict[NodeId, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(self.ids))
        object.__setattr__(self, "_pos", {v: i + 1 for i, v in enumerate(self.ids)})

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self) -> Iterator[NodeId]:
        return iter(self.ids)

    def __getitem__(self, i):
        return self.ids[i]

    def position(self, v: NodeId) -> int:
        try:
            return self._pos[v]
        except KeyError:
            raise UnknownNode(v) from None

    def positions_for(self, g: DepGraph) -> list[int]:
        """1-based positions indexed by the graph's internal node index."""
        return [self._pos[v] for v in g.ids]


def validate_graph(g: DepGraph) -> None:
    """Raise a :class:`GraphError` subclass unless ``g`` is a simple DAG."""
    seen: set[NodeId] = set()
    for n in g.nodes:
        if n.id in seen:
            raise DuplicateIdError(f"duplicate node id {n.id!r}")
        seen.add(n.id)
    edge_set: set[tuple[NodeId, NodeId]] = set()
    for p, c in g.edges:
        for end in (p, c):
            if end not in seen:
                raise DanglingEdgeError(f"edge ({p!r}, {c!r}) references unknown node {end!r}")
        if p == c:
            raise CycleError([p, p])
        if (p, c) in edge_set:
            raise GraphError(f"duplicate edge ({p!r}, {c!r})")
        edge_set.add((p, c))
    cycle = _find_cycle(g)
    if cycle is not None:
        raise CycleError(cycle)


def _find_cycle(g: DepGraph) -> list[NodeId] | None:
    white, grey, black = 0, 1, 2
    color = [white] * len(g)
    for root in range(len(g)):
        if color[root] != white:
            continue
        stack = [(root, iter(g.children[root]))]
        path = [root]
        color[root] = grey
        while stack:
            v, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                color[v] = black
                stack.pop()
                path.pop()
            elif color[nxt] == grey:
                k = path.index(nxt)
                return [g.ids[i] for i in path[k:]] + [g.ids[nxt]]
            elif color[nxt] == white:
                color[nxt] = grey
                stack.append((nxt, iter(g.children[nxt])))
                path.append(nxt)
    return None


def topo_order(g: DepGraph, strategy: str = "arbitrary") -> ExecOrder:
    """Deterministic topological order with ascending-label tie-breaks.

    ``arbitrary`` is Kahn's algorithm with a min-label ready queue.
    ``bfs-layered`` emits layer by layer: every node made ready while emitting
    layer k goes into layer k+1, each layer sorted by label.
    """
    indeg = [len(p) for p in g.parents]
    ids = g.ids
    out: list[NodeId] = []
    if strategy == "arbitrary":
        heap = [(ids[i], i) for i in range(len(g)) if indeg[i] == 0]
        heapq.heapify(heap)
        while heap:
            _, v = heapq.heappop(heap)
            out.append(ids[v])
            for c in g.children[v]:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(heap, (ids[c], c))
    elif strategy == "bfs-layered":
        layer = sorted((i for i in range(len(g)) if indeg[i] == 0), key=ids.__getitem__)
        while layer:
            nxt = []
            for v in layer:
                out.append(ids[v])
                for c in g.children[v]:
                    indeg[c] -= 1
                    if indeg[c] == 0:
                        nxt.append(c)
            layer = sorted(nxt, key=ids.__getitem__)
    else:
        raise ValueError(f"unknown topological strategy {strategy!r}")
    if len(out) != len(g):
        raise CycleError(_find_cycle(g) or [])
    return ExecOrder(tuple(out))


def is_topological(g: DepGraph, order: ExecOrder | Sequence[NodeId]) -> bool:
    if not isinstance(order, ExecOrder):
        order = ExecOrder(tuple(order))
    if len(order) != len(g) or set(order.ids) != set(g.ids):
        return False
    return all(order.position(p) < order.position(c) for p, c in g.edges)


def _span_ends(g: DepGraph, pos: list[int]) -> list[int]:
    return [max((pos[c] for c in ch), default=pos[v]) for v, ch in enumerate(g.children)]


def hold_span(g: DepGraph, order: ExecOrder, v: NodeId) -> tuple[int, int]:
    """Slots (start, end) during which ``v`` would sit in memory if flagged."""
    if v not in g.index:
        raise UnknownNode(v)
    start = order.position(v)
    end = max((order.position(g.ids[c]) for c in g.children[g.index[v]]), default=start)
    return start, end


def peak_memory(g: DepGraph, order: ExecOrder, flagged: Iterable[NodeId]) -> int:
    """Maximum concurrent flagged bytes over the run. Linear in n + m."""
    flagged = set(flagged)
    if not flagged:
        return 0
    n = len(g)
    delta = [0] * (n + 2)
    for v in flagged:
        i = g.index[v]
        start = order.position(v)
        end = max((order.position(g.ids[c]) for c in g.children[i]), default=start)
        s = g.sizes[i]
        delta[start] += s
        delta[end + 1] -= s
    peak = cur = 0
    for d in delta:
        cur += d
        if cur > peak:
            peak = cur
    return peak


def memory_profile(g: DepGraph, order: ExecOrder, flagged: Iterable[NodeId]) -> list[int]:
    """Flagged bytes resident at each slot 1..n (index 0 is slot 1)."""
    n = len(g)
    delta = [0] * (n + 2)
    for v in set(flagged):
        start, end = hold_span(g, order, v)
        delta[start] += g.size_of(v)
        delta[end + 1] -= g.size_of(v)
    out, cur = [], 0
    for i in range(1, n + 1):
        cur += delta[i]
        out.append(cur)
    return out


def memory_byte_slots(g: DepGraph, order: ExecOrder, flagged: Iterable[NodeId]) -> int:
    """Unnormalized average memory usage: sum of (last child slot - own slot) * size."""
    total = 0
    for v in set(flagged):
        start, end = hold_span(g, order, v)
        total += (end - start) * g.size_of(v)
    return total


def avg_memory_usage(g: DepGraph, order: ExecOrder, flagged: Iterable[NodeId]) -> float:
    if len(g) == 0:
        return 0.0
    return memory_byte_slots(g, order, flagged) / len(g)
