"""Choosing which node outputs to keep in memory for a fixed execution order.

The exact route builds a multidimensional 0-1 knapsack (one row per maximal,
non-trivial coexistence set) and hands it to :mod:`mvrefresh.mkp`. Greedy,
random and ratio-ordered baselines share one incremental feasibility check.
"""

from __future__ import annotations

import math
import random
import warnings
from collections.abc import Iterable
from dataclasses import dataclass

from .graph import DepGraph, ExecOrder, FlagSet, NodeId
from .mkp import DEFAULT_MAX_EXPANSIONS, MkpInstance, MkpTimeout, solve_mkp

PROFIT_SCALE = 1000  # seconds -> integer milliseconds


@dataclass(frozen=True)
class ConstraintFamily:
    sets: tuple[tuple[int, frozenset[NodeId]], ...]
    excluded: frozenset[NodeId]

    @property
    def members(self) -> frozenset[NodeId]:
        return frozenset().union(*(s for _, s in self.sets))


def excluded_nodes(g: DepGraph, memory: int) -> frozenset[NodeId]:
    return frozenset(n.id for n in g.nodes if n.size > memory or n.score == 0)


def raw_constraints(g: DepGraph, order: ExecOrder, memory: int) -> ConstraintFamily:
    """Coexistence set of eligible nodes at every slot, before any pruning."""
    excluded = excluded_nodes(g, memory)
    n = len(g)
    pos = order.positions_for(g)
    starts: list[list[int]] = [[] for _ in range(n + 2)]
    ends: list[list[int]] = [[] for _ in range(n + 2)]
    for v, ch in enumerate(g.children):
        if g.ids[v] in excluded:
            continue
        end = max((pos[c] for c in ch), default=pos[v])
        starts[pos[v]].append(v)
        ends[end].append(v)
    alive: set[int] = set()
    sets = []
    for i in range(1, n + 1):
        alive.update(starts[i])
        sets.append((i, frozenset(g.ids[v] for v in alive)))
        alive.difference_update(ends[i])
    return ConstraintFamily(tuple(sets), excluded)


def derive_constraints(g: DepGraph, order: ExecOrder, memory: int) -> ConstraintFamily:
    """Maximal, non-trivial coexistence sets for ``order`` under budget ``memory``.

    Every node's residency is a contiguous slot interval, so a set is
    contained in another only if it is contained in the first differing set
    adjacent to its run of equal sets. Checking the two neighbouring runs is
    therefore enough for maximality.
    """
    raw = raw_constraints(g, order, memory)
    runs: list[tuple[int, frozenset[NodeId]]] = []
    for i, s in raw.sets:
        if not runs or runs[-1][1] != s:
            runs.append((i, s))
    kept = []
    for k, (i, s) in enumerate(runs):
        if not s:
            continue
        if k > 0 and s < runs[k - 1][1]:
            continue
        if k + 1 < len(runs) and s < runs[k + 1][1]:
            continue
        if sum(g.size_of(v) for v in s) <= memory:
            continue
        kept.append((i, s))
    return ConstraintFamily(tuple(kept), raw.excluded)


def build_instance(g: DepGraph, family: ConstraintFamily, memory: int) -> MkpInstance:
    variables = tuple(sorted(family.members))
    col = {v: j for j, v in enumerate(variables)}
    profits = tuple(max(1, round(g.score_of(v) * PROFIT_SCALE)) for v in variables)
    weights = []
    for _, s in family.sets:
        row = [0] * len(variables)
        for v in s:
            row[col[v]] = g.size_of(v)
        weights.append(tuple(row))
    return MkpInstance(profits, tuple(weights), (memory,) * len(weights), variables)


def select_nodes_mkp(
    g: DepGraph,
    order: ExecOrder,
    memory: int,
    max_expansions: int = DEFAULT_MAX_EXPANSIONS,
    family: ConstraintFamily | None = None,
) -> FlagSet:
    """Optimal flag set for a fixed order.

    Nodes that are eligible but sit in no retained constraint set are added
    outright. Passing ``family`` overrides constraint derivation (used to
    compare raw and pruned families).
    """
    if family is None:
        family = derive_constraints(g, order, memory)
    inst = build_instance(g, family, memory)
    res = solve_mkp(inst, max_expansions)
    if res.timed_out:
        warnings.warn(
            f"MKP expansion cap {max_expansions} reached; returning incumbent",
            MkpTimeout,
            stacklevel=2,
        )
    free = set(g.ids) - family.members - family.excluded
    return frozenset(res.chosen(inst) | free)


class _Occupancy:
    """Per-slot flagged bytes, supporting O(n) try-add."""

    def __init__(self, g: DepGraph, order: ExecOrder, memory: int):
        self.g = g
        self.memory = memory
        self.pos = order.positions_for(g)
        self.load = [0] * (len(g) + 1)

    def try_add(self, v: NodeId) -> bool:
        i = self.g.index[v]
        s = self.g.sizes[i]
        start = self.pos[i]
        end = max((self.pos[c] for c in self.g.children[i]), default=start)
        if max(self.load[start : end + 1]) + s > self.memory:
            return False
        for k in range(start, end + 1):
            self.load[k] += s
        return True


def _fill(g: DepGraph, order: ExecOrder, memory: int, visit: Iterable[NodeId]) -> FlagSet:
    occ = _Occupancy(g, order, memory)
    return frozenset(v for v in visit if g.score_of(v) > 0 and occ.try_add(v))


def select_nodes_greedy(g: DepGraph, order: ExecOrder, memory: int) -> FlagSet:
    return _fill(g, order, memory, order.ids)


def select_nodes_random(g: DepGraph, order: ExecOrder, memory: int, seed: int = 0) -> FlagSet:
    visit = list(order.ids)
    random.Random(seed).shuffle(visit)
    return _fill(g, order, memory, visit)


def select_nodes_ratio(g: DepGraph, order: ExecOrder, memory: int) -> FlagSet:
    def key(v):
        s, t = g.size_of(v), g.score_of(v)
        return (-(math.inf if s == 0 else t / s), v)

    return _fill(g, order, memory, sorted(order.ids, key=key))


SELECTORS = ("mkp", "greedy", "random", "ratio")


def select(
    name: str, g: DepGraph, order: ExecOrder, memory: int, seed: int = 0
) -> FlagSet:
    if name == "mkp":
        return select_nodes_mkp(g, order, memory)
    if name == "greedy":
        return select_nodes_greedy(g, order, memory)
    if name == "random":
        return select_nodes_random(g, order, memory, seed)
    if name == "ratio":
        return select_nodes_ratio(g, order, memory)
    raise ValueError(f"unknown selector {name!r}")
