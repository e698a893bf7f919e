"""Joint optimization of flag set and execution order by alternation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

from .graph import (
    DepGraph,
    ExecOrder,
    FlagSet,
    NodeId,
    avg_memory_usage,
    peak_memory,
    topo_order,
)
from .ordering import reorder
from .selection import DEFAULT_MAX_EXPANSIONS, excluded_nodes, select, select_nodes_mkp

log = logging.getLogger(__name__)


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class OptimizeConfig:
    initial_order: str | ExecOrder = "bfs-layered"
    seed: int = 0
    sa_iterations: int = 10_000
    max_iterations: int = 25
    max_expansions: int = DEFAULT_MAX_EXPANSIONS


@dataclass(frozen=True)
class TraceStep:
    """State after one round. ``candidate_*`` describe the selector's proposal."""

    iteration: int
    flagged: FlagSet
    order: ExecOrder
    total_score: float
    peak_memory: int
    avg_memory: float
    candidate_score: float
    candidate_size: int
    previous_size: int


@dataclass(frozen=True)
class Plan:
    order: ExecOrder
    flagged: FlagSet
    total_score: float
    peak_memory: int
    iterations: int = 0
    stop_reason: str = ""
    trace: tuple[TraceStep, ...] = field(default=(), compare=False)

    def to_json(self) -> dict:
        return {
            "order": list(self.order.ids),
            "flagged": sorted(self.flagged),
            "total_score": self.total_score,
            "peak_memory_bytes": self.peak_memory,
            "iterations": self.iterations,
        }


def make_plan(g: DepGraph, order: ExecOrder, flagged, **kw) -> Plan:
    flagged = frozenset(flagged)
    return Plan(order, flagged, g.total_score(flagged), peak_memory(g, order, flagged), **kw)


def optimize(
    g: DepGraph,
    memory: int,
    selector: str = "mkp",
    orderer: str = "madfs",
    config: OptimizeConfig = OptimizeConfig(),
) -> Plan:
    """Alternate between flag selection and reordering until neither helps.

    A round stops the loop when the new flag set does not strictly raise the
    total score (the previous plan is kept) or when the reordered plan breaks
    the budget (the new flags stay with the previous order, for which they
    were chosen). Both the score and the flagged-size comparison are kept
    in the trace.
    """
    if isinstance(config.initial_order, ExecOrder):
        order = config.initial_order
    else:
        order = topo_order(g, config.initial_order)
    flagged: FlagSet = frozenset()
    score = 0.0
    trace: list[TraceStep] = []
    reason = "iteration-cap"
    it = 0
    while it < config.max_iterations:
        it += 1
        seed = config.seed * 1_000_003 + it
        if selector == "mkp":
            cand = select_nodes_mkp(g, order, memory, config.max_expansions)
        else:
            cand = select(selector, g, order, memory, seed)
        cand_score = g.total_score(cand)
        prev_size = g.total_size(flagged)
        improved = cand_score > score
        if improved:
            flagged, score = cand, cand_score
        step = dict(
            iteration=it,
            candidate_score=cand_score,
            candidate_size=g.total_size(cand),
            previous_size=prev_size,
        )
        if not improved:
            trace.append(_step(g, order, flagged, score, **step))
            reason = "no-improvement"
            break
        new_order = reorder(orderer, g, memory, flagged, order, seed, config.sa_iterations)
        if peak_memory(g, new_order, flagged) > memory:
            trace.append(_step(g, order, flagged, score, **step))
            reason = "order-infeasible"
            break
        order = new_order
        trace.append(_step(g, order, flagged, score, **step))
    log.debug("optimize %s+%s stopped after %d rounds: %s", selector, orderer, it, reason)
    return make_plan(g, order, flagged, iterations=it, stop_reason=reason, trace=tuple(trace))


def _step(g, order, flagged, score, **kw) -> TraceStep:
    return TraceStep(
        flagged=flagged,
        order=order,
        total_score=score,
        peak_memory=peak_memory(g, order, flagged),
        avg_memory=avg_memory_usage(g, order, flagged),
        **kw,
    )


def brute_force_joint(g: DepGraph, memory: int) -> tuple[float, FlagSet, ExecOrder]:
    """Exact joint optimum by exhaustive search; only for graphs of <= 10 nodes.

    Flag sets are tried by descending score; each is checked for a feasible
    topological order with a memoized search over the set of already
    executed nodes (the resident bytes at a slot depend only on that set and
    the node being executed).
    """
    n = len(g)
    if n > 10:
        raise TooLarge(f"brute force limited to 10 nodes, got {n}")
    eligible = [g.index[v] for v in g.ids if v not in excluded_nodes(g, memory)]
    subsets = [
        c for r in range(len(eligible), -1, -1) for c in combinations(eligible, r)
    ]
    subsets.sort(key=lambda c: (-sum(g.scores[i] for i in c), c))
    parent_mask = [sum(1 << p for p in g.parents[v]) for v in range(n)]
    child_mask = [sum(1 << c for c in g.children[v]) for v in range(n)]
    full = (1 << n) - 1
    for chosen in subsets:
        fmask = sum(1 << i for i in chosen)

        @lru_cache(maxsize=None)
        def finish(done: int) -> tuple[int, ...] | None:
            if done == full:
                return ()
            for v in range(n):
                bit = 1 << v
                if done & bit or parent_mask[v] & ~done:
                    continue
                load = g.sizes[v] if fmask & bit else 0
                for u in range(n):
                    if fmask >> u & 1 and done >> u & 1 and (child_mask[u] & ~done):
                        load += g.sizes[u]
                if load > memory:
                    continue
                rest = finish(done | bit)
                if rest is not None:
                    return (v, *rest)
            return None

        seq = finish(0)
        if seq is not None:
            flags = frozenset(g.ids[i] for i in chosen)
            return g.total_score(flags), flags, ExecOrder(tuple(g.ids[v] for v in seq))
    raise AssertionError("the empty flag set is always feasible")
