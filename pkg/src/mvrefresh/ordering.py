"""Execution orders that release flagged outputs early, for a fixed flag set."""

from __future__ import annotations

import heapq
import math
import random
from collections.abc import Iterable

from .graph import DepGraph, ExecOrder, NodeId, memory_byte_slots


def order_madfs(g: DepGraph, flagged: Iterable[NodeId]) -> ExecOrder:
    """Memory-aware depth-first topological order.

    Among ready nodes the scheduler picks, in priority order: the lowest
    actual memory consumption (size if flagged, else 0), the most recently
    readied (finish the current branch first), the lowest label.
    """
    flagged = set(flagged)
    ids = g.ids
    consumption = [g.sizes[i] if v in flagged else 0 for i, v in enumerate(ids)]
    indeg = [len(p) for p in g.parents]
    heap = [(consumption[i], 0, ids[i], i) for i in range(len(g)) if indeg[i] == 0]
    heapq.heapify(heap)
    out = []
    step = 0
    while heap:
        _, _, v, i = heapq.heappop(heap)
        out.append(v)
        step += 1
        for c in g.children[i]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, (consumption[c], -step, ids[c], c))
    return ExecOrder(tuple(out))


def order_sa(
    g: DepGraph,
    flagged: Iterable[NodeId],
    start: ExecOrder,
    iterations: int = 10_000,
    seed: int = 0,
    cooling: float = 0.999,
) -> ExecOrder:
    """Simulated annealing over adjacent swaps, minimizing average memory usage.

    Neighbours may swap unless one is the other's parent. Uphill moves pass
    with probability exp(-delta/T); T starts at a tenth of the starting
    cost and shrinks geometrically. The memory budget plays no part here.
    Returns the best order visited.
    """
    n = len(g)
    if iterations <= 0 or n < 2:
        return start
    flagged = set(flagged)
    is_flag = [v in flagged for v in g.ids]
    sizes = g.sizes
    children = g.children
    parents = g.parents
    child_sets = [set(c) for c in children]
    seq = [g.index[v] for v in start.ids]  # slot (0-based) -> node
    pos = [0] * n  # node -> 1-based slot
    for k, v in enumerate(seq):
        pos[v] = k + 1

    def contrib(v):
        if not is_flag[v]:
            return 0
        return (max((pos[c] for c in children[v]), default=pos[v]) - pos[v]) * sizes[v]

    # costs are byte-slots; dividing by n gives average usage, so T0 = cost/10
    # is the same schedule expressed on either scale
    cost = memory_byte_slots(g, start, flagged)
    best_cost, best_seq = cost, list(seq)
    temp = cost / 10
    rng = random.Random(seed)

    for _ in range(iterations):
        k = rng.randrange(n - 1)
        a, b = seq[k], seq[k + 1]
        temp *= cooling
        if b in child_sets[a]:
            continue
        affected = {v for v in (a, b, *parents[a], *parents[b]) if is_flag[v]}
        old = sum(contrib(v) for v in affected)
        seq[k], seq[k + 1] = b, a
        pos[a], pos[b] = k + 2, k + 1
        delta = sum(contrib(v) for v in affected) - old
        if delta <= 0 or (temp > 0 and rng.random() < math.exp(-delta / temp)):
            cost += delta
            if cost < best_cost:
                best_cost, best_seq = cost, list(seq)
        else:
            seq[k], seq[k + 1] = a, b
            pos[a], pos[b] = k + 1, k + 2
    return ExecOrder(tuple(g.ids[v] for v in best_seq))


def order_separator(g: DepGraph, flagged: Iterable[NodeId]) -> ExecOrder:
    """Recursive directed bisection.

    Each subgraph is split into a predecessor-closed part A and the rest B,
    grown greedily from the sources so that few flagged bytes (then few
    edges) cross from A to B, with |A| kept near half. Parts are ordered
    recursively and concatenated. The result ignores the memory budget, so
    callers must check feasibility themselves.
    """
    flagged = set(flagged)
    is_flag = [v in flagged for v in g.ids]
    return ExecOrder(tuple(g.ids[v] for v in _separate(g, list(range(len(g))), is_flag)))


def _label_topo(g: DepGraph, nodes: list[int]) -> list[int]:
    inside = set(nodes)
    indeg = {v: sum(p in inside for p in g.parents[v]) for v in nodes}
    heap = [(g.ids[v], v) for v in nodes if indeg[v] == 0]
    heapq.heapify(heap)
    out = []
    while heap:
        _, v = heapq.heappop(heap)
        out.append(v)
        for c in g.children[v]:
            if c in inside:
                indeg[c] -= 1
                if indeg[c] == 0:
                    heapq.heappush(heap, (g.ids[c], c))
    return out


def _separate(g: DepGraph, nodes: list[int], is_flag: list[bool]) -> list[int]:
    n = len(nodes)
    if n <= 2:
        return _label_topo(g, nodes)
    inside = set(nodes)
    lo = max(1, math.ceil(0.375 * n))
    hi = min(n - 1, math.floor(0.625 * n))
    if lo > hi:
        lo = hi = max(1, n // 2)

    kids = {v: [c for c in g.children[v] if c in inside] for v in nodes}
    pars = {v: [p for p in g.parents[v] if p in inside] for v in nodes}
    missing = {v: len(pars[v]) for v in nodes}
    open_kids = {v: len(kids[v]) for v in nodes}  # children not yet in A
    sizes = g.sizes
    ready = {v for v in nodes if missing[v] == 0}
    flag_cost = edge_cost = 0
    grown: list[int] = []
    best = None
    while len(grown) < hi:
        def after(c):
            df = sizes[c] if is_flag[c] and kids[c] else 0
            de = len(kids[c]) - len(pars[c])
            for p in pars[c]:
                if is_flag[p] and open_kids[p] == 1:
                    df -= sizes[p]
            return (flag_cost + df, edge_cost + de, g.ids[c])

        c = min(ready, key=after)
        flag_cost, edge_cost, _ = after(c)
        ready.remove(c)
        grown.append(c)
        for p in pars[c]:
            open_kids[p] -= 1
        for k in kids[c]:
            missing[k] -= 1
            if missing[k] == 0:
                ready.add(k)
        if len(grown) >= lo:
            key = (flag_cost, edge_cost, abs(2 * len(grown) - n))
            if best is None or key < best[0]:
                best = (key, len(grown))
    cut = best[1]
    left = grown[:cut]
    left_set = set(left)
    right = [v for v in nodes if v not in left_set]
    return _separate(g, left, is_flag) + _separate(g, right, is_flag)


ORDERERS = ("madfs", "sa", "separator")


def reorder(
    name: str,
    g: DepGraph,
    memory: int,
    flagged: Iterable[NodeId],
    current: ExecOrder,
    seed: int = 0,
    sa_iterations: int = 10_000,
) -> ExecOrder:
    if name == "madfs":
        return order_madfs(g, flagged)
    if name == "sa":
        return order_sa(g, flagged, current, sa_iterations, seed)
    if name == "separator":
        return order_separator(g, flagged)
    raise ValueError(f"unknown orderer {name!r}")
