import random
import warnings

import pytest
from hypothesis import given, strategies as st

from mvrefresh.fixtures import GB, REPLICA_TOY_MEMORY, TAU1, TAU2, replica_toy
from mvrefresh.graph import DepGraph, ExecOrder, NodeMeta, hold_span, peak_memory
from mvrefresh.mkp import MkpTimeout
from mvrefresh.selection import (
    derive_constraints,
    raw_constraints,
    select,
    select_nodes_greedy,
    select_nodes_mkp,
    select_nodes_random,
    select_nodes_ratio,
)

from helpers import brute_best_subset, dag_with_order, ms_total, random_dag, random_order

M = REPLICA_TOY_MEMORY


def chain3():
    nodes = (NodeMeta("v1", 60, 5.0), NodeMeta("v2", 60, 7.0), NodeMeta("v3", 60, 9.0))
    return DepGraph(nodes, (("v1", "v2"), ("v2", "v3")))


def pairwise_maximal(g, order, memory):
    """O(k^2) oracle: raw sets minus strict subsets minus those that fit."""
    raw = [s for _, s in raw_constraints(g, order, memory).sets]
    out = set()
    for s in raw:
        if not s or any(s < t for t in raw):
            continue
        if sum(g.size_of(v) for v in s) > memory:
            out.add(s)
    return out


# derive_constraints ---------------------------------------------------------------


def test_replica_toy_family_tau2():
    fam = derive_constraints(replica_toy(), TAU2, M)
    assert fam.excluded == {"v2", "v4"}
    assert fam.sets == ((5, frozenset({"v3", "v5"})),)


def test_replica_toy_raw_sets_tau2():
    raw = raw_constraints(replica_toy(), TAU2, M)
    assert [s for _, s in raw.sets] == [
        {"v1"}, {"v1"}, {"v1"}, {"v3"}, {"v3", "v5"}, {"v5", "v6"},
    ]


def test_all_zero_scores_exclude_everything():
    g = DepGraph((NodeMeta("a", 5, 0.0), NodeMeta("b", 5, 0.0)), (("a", "b"),))
    fam = derive_constraints(g, ExecOrder(("a", "b")), 1)
    assert fam.excluded == {"a", "b"} and fam.sets == ()


def test_chain_family():
    fam = derive_constraints(chain3(), ExecOrder(("v1", "v2", "v3")), 100)
    assert fam.sets == ((2, frozenset({"v1", "v2"})), (3, frozenset({"v2", "v3"})))


@given(dag_with_order(max_nodes=12, max_size=60), st.integers(1, 150))
def test_pruning_matches_pairwise_oracle(go, memory):
    g, order = go
    fam = derive_constraints(g, order, memory)
    assert {s for _, s in fam.sets} == pairwise_maximal(g, order, memory)
    assert not fam.members & fam.excluded


# select_nodes_mkp -------------------------------------------------------------------


def test_replica_toy_mkp():
    g = replica_toy()
    assert select_nodes_mkp(g, TAU2, M) == {"v1", "v3", "v6"}
    assert select_nodes_mkp(g, TAU1, M) == {"v1", "v5", "v6"}
    assert g.total_score(select_nodes_mkp(g, TAU2, M)) == 210
    assert g.total_score(select_nodes_mkp(g, TAU1, M)) == 120


def test_replica_toy_brute_force_agrees():
    g = replica_toy()
    assert brute_best_subset(g, TAU2, M) == (210_000, frozenset({"v1", "v3", "v6"}))
    assert brute_best_subset(g, TAU1, M) == (120_000, frozenset({"v1", "v5", "v6"}))


def test_chain_mkp():
    assert select_nodes_mkp(chain3(), ExecOrder(("v1", "v2", "v3")), 100) == {"v1", "v3"}


def test_empty_graph():
    assert select_nodes_mkp(DepGraph(()), ExecOrder(()), 10) == frozenset()


@given(dag_with_order(max_nodes=11, max_size=60), st.integers(0, 150))
def test_mkp_matches_bruteforce(go, memory):
    g, order = go
    u = select_nodes_mkp(g, order, memory)
    assert peak_memory(g, order, u) <= memory
    assert ms_total(g, u) == brute_best_subset(g, order, memory)[0]


@given(dag_with_order(max_nodes=11, max_size=60), st.integers(1, 150))
def test_raw_family_gives_same_objective(go, memory):
    g, order = go
    raw = raw_constraints(g, order, memory)
    a = select_nodes_mkp(g, order, memory)
    b = select_nodes_mkp(g, order, memory, family=raw)
    assert ms_total(g, a) == ms_total(g, b)


def test_timeout_warns_and_stays_feasible():
    g = random_dag(random.Random(4), 60, edge_p=0.08, max_size=1000, score_ms=(1, 90_000))
    order = random_order(g, random.Random(4))
    with pytest.warns(MkpTimeout):
        u = select_nodes_mkp(g, order, 1500, max_expansions=1)
    assert peak_memory(g, order, u) <= 1500


# baselines ------------------------------------------------------------------------


def test_greedy_examples():
    g = replica_toy()
    assert select_nodes_greedy(g, TAU1, M) == {"v1", "v5", "v6"}
    assert select_nodes_greedy(g, TAU1, 0) == frozenset()
    assert select_nodes_greedy(g, TAU1, 10**15) == {"v1", "v3", "v5", "v6"}


def test_random_examples():
    g = replica_toy()
    assert select_nodes_random(g, TAU2, M, seed=3) == select_nodes_random(g, TAU2, M, seed=3)
    assert select_nodes_random(g, TAU2, 0, seed=3) == frozenset()
    outs = set()
    for seed in range(200):
        u = select_nodes_random(g, TAU2, M, seed)
        assert peak_memory(g, TAU2, u) <= M
        outs.add(u)
    assert len(outs) > 1


def test_ratio_examples():
    g = DepGraph((NodeMeta("big", 100, 100.0), NodeMeta("small", 10, 50.0), NodeMeta("c", 0, 0.0)),
                 (("big", "c"), ("small", "c")))
    order = ExecOrder(("big", "small", "c"))
    assert select_nodes_ratio(g, order, 100) == {"small"}
    z = DepGraph((NodeMeta("a", 50, 1.0), NodeMeta("z", 0, 0.5)), (("a", "z"),))
    assert "z" in select_nodes_ratio(z, ExecOrder(("a", "z")), 0)
    assert select_nodes_ratio(g, order, 10**6) == {"big", "small"}


def test_unknown_selector():
    with pytest.raises(ValueError):
        select("nope", replica_toy(), TAU1, M)


@pytest.mark.parametrize("name", ["mkp", "greedy", "random", "ratio"])
def test_every_selector_is_feasible_on_large_graphs(name):
    rng = random.Random(hash(name) % 1000)
    for trial in range(40):
        g = random_dag(rng, rng.randint(1, 100), edge_p=0.06, max_size=1000)
        order = random_order(g, rng)
        memory = rng.randint(0, 3000)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", MkpTimeout)
            u = select(name, g, order, memory, seed=trial)
        assert peak_memory(g, order, u) <= memory


@given(dag_with_order(max_nodes=14, max_size=60), st.integers(0, 200))
def test_mkp_dominates_greedy(go, memory):
    g, order = go
    greedy = select_nodes_greedy(g, order, memory)
    assert 0 <= ms_total(g, greedy) <= ms_total(g, select_nodes_mkp(g, order, memory))


@given(dag_with_order(max_nodes=12, max_size=60), st.integers(0, 200))
def test_greedy_is_maximal(go, memory):
    # nothing left out could still be added
    g, order = go
    u = select_nodes_greedy(g, order, memory)
    for v in g.ids:
        if v not in u and g.score_of(v) > 0:
            assert peak_memory(g, order, u | {v}) > memory


def test_sink_only_holds_its_slot():
    g = replica_toy()
    assert hold_span(g, TAU2, "v6") == (6, 6)
    assert select_nodes_greedy(g, TAU2, 10 * GB) == {"v5"}
