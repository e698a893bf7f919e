"""Random instances and brute-force oracles shared by the test modules."""

from __future__ import annotations

import itertools
import random

from hypothesis import strategies as st

from mvrefresh.graph import DepGraph, ExecOrder, NodeMeta, hold_span, topo_order
from mvrefresh.selection import excluded_nodes


def random_dag(
    rng: random.Random,
    n: int,
    edge_p: float = 0.3,
    max_size: int = 100,
    score_ms: tuple[int, int] = (0, 100_000),
    compute: tuple[float, float] | None = None,
    max_parents: int | None = None,
) -> DepGraph:
    """Edges only go from lower to higher hidden rank; labels are shuffled so
    label order and topological order disagree."""
    labels = [f"v{k:03d}" for k in range(n)]
    rng.shuffle(labels)
    nodes = []
    for k in range(n):
        secs = None if compute is None else rng.uniform(*compute)
        score = rng.randint(*score_ms) / 1000
        nodes.append(NodeMeta(labels[k], rng.randint(0, max_size), score, secs))
    edges = []
    for j in range(n):
        cands = [i for i in range(j) if rng.random() < edge_p]
        if max_parents is not None and len(cands) > max_parents:
            cands = rng.sample(cands, max_parents)
        edges.extend((labels[i], labels[j]) for i in sorted(cands))
    return DepGraph(tuple(nodes), tuple(edges))


def random_order(g: DepGraph, rng: random.Random) -> ExecOrder:
    """Uniform-ish random topological order (random choice among ready nodes)."""
    indeg = [len(p) for p in g.parents]
    ready = [i for i in range(len(g)) if indeg[i] == 0]
    out = []
    while ready:
        i = ready.pop(rng.randrange(len(ready)))
        out.append(g.ids[i])
        for c in g.children[i]:
            indeg[c] -= 1
            if indeg[c] == 0:
                ready.append(c)
    return ExecOrder(tuple(out))


@st.composite
def dags(draw, min_nodes=1, max_nodes=12, max_size=100, with_compute=False):
    n = draw(st.integers(min_nodes, max_nodes))
    perm = draw(st.permutations(range(n)))
    labels = [f"v{perm[k]:02d}" for k in range(n)]
    sizes = draw(st.lists(st.integers(0, max_size), min_size=n, max_size=n))
    scores = draw(st.lists(st.integers(0, 50_000), min_size=n, max_size=n))
    if with_compute:
        secs = draw(st.lists(st.floats(0, 20, allow_nan=False), min_size=n, max_size=n))
    else:
        secs = [None] * n
    pairs = [(i, j) for j in range(n) for i in range(j)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = tuple((labels[i], labels[j]) for (i, j), keep in zip(pairs, mask) if keep)
    nodes = tuple(NodeMeta(labels[k], sizes[k], scores[k] / 1000, secs[k]) for k in range(n))
    return DepGraph(nodes, edges)


@st.composite
def dag_with_order(draw, **kw):
    g = draw(dags(**kw))
    seed = draw(st.integers(0, 2**16))
    return g, random_order(g, random.Random(seed))


# -- oracles ---------------------------------------------------------------


def brute_peak(g: DepGraph, order: ExecOrder, flagged) -> int:
    """Per-position double loop, no difference arrays."""
    best = 0
    for i in range(1, len(g) + 1):
        load = 0
        for v in flagged:
            a, b = hold_span(g, order, v)
            if a <= i <= b:
                load += g.size_of(v)
        best = max(best, load)
    return best


def ms_total(g: DepGraph, flagged) -> int:
    return sum(max(1, round(g.score_of(v) * 1000)) for v in flagged)


def brute_best_subset(g: DepGraph, order: ExecOrder, memory: int) -> tuple[int, frozenset]:
    """Max integer-millisecond objective over all eligible subsets with
    peak <= memory. Nodes with zero score never help."""
    excl = excluded_nodes(g, memory)
    eligible = [v for v in g.ids if v not in excl]
    best, arg = 0, frozenset()
    for r in range(len(eligible) + 1):
        for combo in itertools.combinations(eligible, r):
            val = ms_total(g, combo)
            if val > best and brute_peak(g, order, combo) <= memory:
                best, arg = val, frozenset(combo)
    return best, arg


def all_topo_orders(g: DepGraph):
    n = len(g)
    indeg = [len(p) for p in g.parents]
    out: list[int] = []
    used = [False] * n

    def rec():
        if len(out) == n:
            yield ExecOrder(tuple(g.ids[i] for i in out))
            return
        for i in range(n):
            if not used[i] and indeg[i] == 0:
                used[i] = True
                out.append(i)
                for c in g.children[i]:
                    indeg[c] -= 1
                yield from rec()
                for c in g.children[i]:
                    indeg[c] += 1
                out.pop()
                used[i] = False

    yield from rec()


def default_order(g: DepGraph) -> ExecOrder:
    return topo_order(g, "arbitrary")
