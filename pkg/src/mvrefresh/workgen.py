"""Synthetic refresh workloads: layered DAG plus Markov-chain operator labels."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .graph import DepGraph, NodeMeta
from .scoring import CostModel, compute_speedup_scores


class InfeasibleParams(ValueError):
    pass


class OpKind(enum.Enum):
    JOIN = "JOIN"
    AGG = "AGG"
    FILTER = "FILTER"
    PROJECT = "PROJECT"


OPS = (OpKind.JOIN, OpKind.AGG, OpKind.FILTER, OpKind.PROJECT)

# JOIN scales the largest input; the others scale the input sum.
SIZE_MULTIPLIER = {
    OpKind.JOIN: 1.2,
    OpKind.AGG: 0.1,
    OpKind.FILTER: 0.3,
    OpKind.PROJECT: 0.6,
}

# rows: operator of the primary parent; columns: OPS
TRANSITIONS = np.array(
    [
        [0.40, 0.25, 0.20, 0.15],  # after JOIN
        [0.15, 0.35, 0.20, 0.30],  # after AGG
        [0.45, 0.25, 0.10, 0.20],  # after FILTER
        [0.35, 0.35, 0.15, 0.15],  # after PROJECT
    ]
)
SOURCE_OPS = np.array([0.10, 0.10, 0.50, 0.30])

# 24 log-spaced base-table sizes between 1 MB and 10 GB
DEFAULT_SOURCE_POOL = tuple(int(round(x)) for x in np.geomspace(1e6, 1e10, 24))

COMPUTE_THROUGHPUT = 2e9  # bytes of input+output processed per second
COMPUTE_OVERHEAD = 0.5  # seconds per statement


@dataclass(frozen=True)
class GenParams:
    node_count: int = 50
    height_width_ratio: float = 2.0
    max_outdegree: int = 3
    stage_stdev: float = 1.0
    source_size_pool: tuple[int, ...] = DEFAULT_SOURCE_POOL
    seed: int = 0
    cost_model: CostModel = field(default_factory=CostModel)

    @property
    def stage_count(self) -> int:
        return max(1, round(math.sqrt(self.node_count * self.height_width_ratio)))

    def check(self) -> None:
        if self.node_count < 1:
            raise InfeasibleParams("node_count must be >= 1")
        if not self.height_width_ratio > 0:
            raise InfeasibleParams("height_width_ratio must be > 0")
        if self.max_outdegree < 0 or self.stage_stdev < 0:
            raise InfeasibleParams("max_outdegree and stage_stdev must be >= 0")
        if not self.source_size_pool or min(self.source_size_pool) < 0:
            raise InfeasibleParams("source_size_pool must hold non-negative sizes")
        if self.max_outdegree == 0 and self.stage_count > 1:
            raise InfeasibleParams("max_outdegree=0 leaves later stages without parents")


def stage_sizes(p: GenParams, rng: np.random.Generator) -> list[int]:
    h = p.stage_count
    mean = p.node_count / h
    counts = rng.normal(mean, p.stage_stdev, size=h) if p.stage_stdev > 0 else np.full(h, mean)
    counts = np.maximum(1, np.rint(counts)).astype(int)
    return counts.tolist()


def generate(p: GenParams) -> DepGraph:
    """Build a layered workload graph, deterministic in ``p.seed``.

    Each node gets an outdegree cap drawn uniformly from [0, max_outdegree].
    Every node past the first stage takes a primary parent with spare
    capacity (previous stage preferred), its operator follows the primary
    parent's operator through the transition matrix, and JOINs try to take a
    second parent. Nodes that find no parent become extra sources.
    """
    p.check()
    rng = np.random.default_rng(p.seed)
    counts = stage_sizes(p, rng)
    total = sum(counts)
    width = len(str(total - 1))
    ids = [f"n{k:0{width}d}" for k in range(total)]
    stage_of = [s for s, c in enumerate(counts) for _ in range(c)]
    capacity = rng.integers(0, p.max_outdegree + 1, size=total).tolist()
    ops: list[OpKind] = [OpKind.FILTER] * total
    sizes = [0] * total
    parents: list[list[int]] = [[] for _ in range(total)]
    first = [0]
    for c in counts:
        first.append(first[-1] + c)

    def pick_parent(v, exclude=()):
        s = stage_of[v]
        for lo, hi in ((first[s - 1], first[s]), (0, first[s - 1])):
            pool = [u for u in range(lo, hi) if capacity[u] > 0 and u not in exclude]
            if pool:
                return pool[int(rng.integers(len(pool)))]
        return None

    for v in range(total):
        if stage_of[v] > 0:
            u = pick_parent(v)
            if u is not None:
                capacity[u] -= 1
                parents[v].append(u)
        if not parents[v]:
            ops[v] = OPS[rng.choice(4, p=SOURCE_OPS)]
            sizes[v] = int(p.source_size_pool[int(rng.integers(len(p.source_size_pool)))])
            continue
        prev = OPS.index(ops[parents[v][0]])
        ops[v] = OPS[rng.choice(4, p=TRANSITIONS[prev])]
        if ops[v] is OpKind.JOIN:
            u = pick_parent(v, exclude=parents[v])
            if u is not None:
                capacity[u] -= 1
                parents[v].append(u)
        sizes[v] = derive_size(ops[v], [sizes[u] for u in parents[v]])

    edges = tuple((ids[u], ids[v]) for v in range(total) for u in sorted(parents[v]))
    nodes = []
    for v in range(total):
        work = sizes[v] + sum(sizes[u] for u in parents[v])
        nodes.append(
            NodeMeta(ids[v], sizes[v], None, COMPUTE_OVERHEAD + work / COMPUTE_THROUGHPUT)
        )
    g = DepGraph(tuple(nodes), edges)
    return g.with_scores(compute_speedup_scores(g, p.cost_model))


def derive_size(op: OpKind, inputs: list[int]) -> int:
    base = max(inputs) if op is OpKind.JOIN else sum(inputs)
    return int(round(SIZE_MULTIPLIER[op] * base))
