import statistics

import pytest
from hypothesis import given, strategies as st

from mvrefresh.graph import validate_graph
from mvrefresh.workgen import (
    SIZE_MULTIPLIER,
    TRANSITIONS,
    GenParams,
    InfeasibleParams,
    OpKind,
    derive_size,
    generate,
)


def test_same_seed_same_graph():
    p = GenParams(node_count=60, seed=42)
    assert generate(p) == generate(p)
    assert generate(p) != generate(GenParams(node_count=60, seed=43))


def test_single_node():
    g = generate(GenParams(node_count=1, seed=5))
    assert len(g) == 1 and g.edges == ()


def test_statistics_over_1000_seeds():
    counts, worst_out = [], 0
    for seed in range(1000):
        g = generate(GenParams(node_count=100, height_width_ratio=2, max_outdegree=3, stage_stdev=1, seed=seed))
        validate_graph(g)
        counts.append(len(g))
        worst_out = max(worst_out, max(len(c) for c in g.children))
    assert abs(statistics.mean(counts) - 100) <= 10
    assert worst_out <= 3


@given(
    st.integers(1, 120),
    st.floats(0.1, 10),
    st.integers(1, 5),
    st.floats(0, 4),
    st.integers(0, 2**63 - 1),
)
def test_generated_graphs_respect_parameters(n, ratio, k, sd, seed):
    g = generate(GenParams(node_count=n, height_width_ratio=ratio, max_outdegree=k, stage_stdev=sd, seed=seed))
    validate_graph(g)
    assert max(len(c) for c in g.children) <= k
    assert all(len(p) <= 2 for p in g.parents)
    assert all(n.speedup_score is not None and n.speedup_score >= 0 for n in g.nodes)
    assert all(n.compute_time > 0 for n in g.nodes)


def test_edges_run_forward_in_id_order():
    g = generate(GenParams(node_count=80, seed=1))
    assert all(a < b for a, b in g.edges)


def test_multipliers():
    assert all(m > 0 for m in SIZE_MULTIPLIER.values())
    assert SIZE_MULTIPLIER[OpKind.JOIN] >= 1
    for k in (OpKind.AGG, OpKind.FILTER, OpKind.PROJECT):
        assert SIZE_MULTIPLIER[k] < 1
    assert TRANSITIONS.sum(axis=1) == pytest.approx([1, 1, 1, 1])


@given(st.lists(st.integers(0, 10**10), min_size=1, max_size=2))
def test_size_rules(inputs):
    assert derive_size(OpKind.JOIN, inputs) >= max(inputs)
    assert derive_size(OpKind.FILTER, inputs[:1]) <= inputs[0]
    assert derive_size(OpKind.PROJECT, inputs[:1]) <= inputs[0]


@pytest.mark.parametrize(
    "kw",
    [
        dict(node_count=0),
        dict(height_width_ratio=0),
        dict(max_outdegree=-1),
        dict(stage_stdev=-0.5),
        dict(source_size_pool=()),
        dict(max_outdegree=0, node_count=50),
    ],
)
def test_infeasible_params(kw):
    with pytest.raises(InfeasibleParams):
        generate(GenParams(**kw))


def test_outdegree_zero_single_stage_is_fine():
    g = generate(GenParams(node_count=1, max_outdegree=0))
    assert len(g) == 1
