import math
import random

import pytest
from hypothesis import given, strategies as st

from mvrefresh.alternating import optimize
from mvrefresh.fixtures import REPLICA_TOY_MEMORY, replica_toy
from mvrefresh.graph import DepGraph, ExecOrder, NodeMeta, peak_memory, topo_order
from mvrefresh.scoring import CostModel, compute_speedup_scores
from mvrefresh.simulator import EVENT_KINDS, baseline_time, simulate

from helpers import dags, random_dag, random_order

GB = 10**9
CM = CostModel(disk_read_bw=1 * GB, disk_write_bw=0.5 * GB)


def random_cost_model(rng, latency=True):
    dr, dw = rng.uniform(1e8, 2e9), rng.uniform(1e8, 2e9)
    return CostModel(
        disk_read_bw=dr,
        disk_write_bw=dw,
        mem_read_bw=rng.choice([math.inf, dr * rng.uniform(1, 20)]),
        mem_write_bw=math.inf,
        per_access_latency=rng.choice([0.0, 1e-4]) if latency else 0.0,
    )


def test_single_node():
    g = DepGraph((NodeMeta("v1", GB, None, 10.0),))
    rep = simulate(g, ExecOrder(("v1",)), set(), CM)
    assert rep.end_to_end == pytest.approx(12.0)
    assert baseline_time(g, CM) == pytest.approx(12.0)


def test_chain_timeline():
    g = DepGraph((NodeMeta("v1", GB, None, 10.0), NodeMeta("v2", 0, None, 5.0)), (("v1", "v2"),))
    order = ExecOrder(("v1", "v2"))
    rep = simulate(g, order, {"v1"}, CM)
    ev = {(e.kind, e.node): e.time for e in rep.events}
    assert ev[("compute_start", "v2")] == pytest.approx(10.0)
    assert ev[("compute_end", "v2")] == pytest.approx(15.0)
    assert ev[("materialize_start", "v1")] == pytest.approx(10.0)
    assert ev[("materialize_end", "v1")] == pytest.approx(12.0)
    assert rep.end_to_end == pytest.approx(15.0)
    assert rep.baseline_end_to_end == pytest.approx(18.0)
    assert rep.realized_savings == pytest.approx(3.0)
    assert compute_speedup_scores(g, CM)["v1"] == pytest.approx(3.0)


def test_empty_graph():
    assert baseline_time(DepGraph(()), CM) == 0
    assert simulate(DepGraph(()), ExecOrder(()), set(), CM).end_to_end == 0


def test_replica_toy_plan_not_slower():
    g = replica_toy(compute_seconds=20.0)
    plan = optimize(g, REPLICA_TOY_MEMORY)
    rep = simulate(g, plan.order, plan.flagged, CM, REPLICA_TOY_MEMORY)
    base = simulate(g, plan.order, set(), CM)
    assert rep.end_to_end <= base.end_to_end
    assert rep.realized_savings > 0


def test_catalog_free_waits_for_materialization():
    # v1's 2 s write outlasts v2's 0.5 s compute, so the entry lingers
    g = DepGraph((NodeMeta("v1", GB, None, 0.0), NodeMeta("v2", 0, None, 0.5)), (("v1", "v2"),))
    rep = simulate(g, ExecOrder(("v1", "v2")), {"v1"}, CM)
    ev = {(e.kind, e.node): e.time for e in rep.events}
    assert ev[("catalog_free", "v1")] == pytest.approx(ev[("materialize_end", "v1")])
    assert ev[("catalog_free", "v1")] > ev[("compute_end", "v2")]


def test_violation_flag():
    g = replica_toy(compute_seconds=1.0)
    order = topo_order(g, "arbitrary")
    rep = simulate(g, order, {"v1", "v3"}, CM, REPLICA_TOY_MEMORY)
    assert rep.model_peak > REPLICA_TOY_MEMORY and rep.violation
    assert rep.summary()["violation"] is True


def test_conservation_500_instances():
    rng = random.Random(7)
    for _ in range(500):
        g = random_dag(rng, rng.randint(1, 30), edge_p=0.15, max_size=10**9, compute=(0, 30))
        cm = random_cost_model(rng)
        rep = simulate(g, random_order(g, rng), set(), cm)
        assert rep.end_to_end == pytest.approx(baseline_time(g, cm), rel=1e-9)


def test_equal_bandwidths_give_no_savings():
    rng = random.Random(8)
    for _ in range(200):
        g = random_dag(rng, rng.randint(1, 25), edge_p=0.2, max_size=10**9, compute=(0, 10))
        bw = rng.uniform(1e8, 2e9)
        cm = CostModel(disk_read_bw=bw, disk_write_bw=bw, mem_read_bw=bw, mem_write_bw=bw)
        order = random_order(g, rng)
        u = {v for v in g.ids if rng.random() < 0.5}
        rep = simulate(g, order, u, cm, overlap_writes=False)
        assert rep.realized_savings == pytest.approx(0.0, abs=1e-9 * max(1.0, rep.baseline_end_to_end))


def test_never_slower_than_baseline():
    rng = random.Random(9)
    for _ in range(500):
        g = random_dag(rng, rng.randint(1, 30), edge_p=0.15, max_size=10**9, compute=(0, 20))
        cm = random_cost_model(rng)
        order = random_order(g, rng)
        u = {v for v in g.ids if rng.random() < 0.4}
        rep = simulate(g, order, u, cm)
        assert rep.end_to_end <= rep.baseline_end_to_end + 1e-9 * max(1.0, rep.baseline_end_to_end)


def test_score_consistency_on_backlog_free_chains():
    rng = random.Random(10)
    for _ in range(300):
        n = rng.randint(2, 10)
        cm = random_cost_model(rng, latency=False)
        sizes = [rng.randint(0, 2 * 10**9) for _ in range(n)]
        longest_write = max(cm.disk_write(s) for s in sizes)
        nodes = tuple(
            NodeMeta(f"c{k}", sizes[k], None, longest_write * rng.uniform(1.01, 3)) for k in range(n)
        )
        g = DepGraph(nodes, tuple((f"c{k}", f"c{k + 1}") for k in range(n - 1)))
        u = {f"c{k}" for k in range(n - 1) if rng.random() < 0.6}
        scores = compute_speedup_scores(g, cm)
        rep = simulate(g, ExecOrder(tuple(f"c{k}" for k in range(n))), u, cm)
        assert rep.realized_savings == pytest.approx(sum(scores[v] for v in u), rel=1e-6, abs=1e-9)


@given(dags(max_nodes=12, max_size=10**9, with_compute=True), st.data())
def test_realized_peak_matches_model_with_instant_writes(g, data):
    cm = CostModel(disk_read_bw=GB, disk_write_bw=math.inf)
    order = random_order(g, random.Random(data.draw(st.integers(0, 999))))
    u = data.draw(st.sets(st.sampled_from(g.ids)))
    rep = simulate(g, order, u, cm)
    assert rep.realized_peak == rep.model_peak == peak_memory(g, order, u)


@given(dags(max_nodes=12, max_size=10**9, with_compute=True), st.data())
def test_event_stream_shape(g, data):
    order = random_order(g, random.Random(data.draw(st.integers(0, 999))))
    u = data.draw(st.sets(st.sampled_from(g.ids)))
    rep = simulate(g, order, u, CM)
    times = [e.time for e in rep.events]
    assert times == sorted(times)
    assert {e.kind for e in rep.events} <= set(EVENT_KINDS)
    ends = [e.time for e in rep.events if e.kind in ("compute_end", "materialize_end")]
    assert rep.end_to_end == (max(ends) if ends else 0)
    assert rep.realized_peak >= rep.model_peak
    freed = [e.node for e in rep.events if e.kind == "catalog_free"]
    assert sorted(freed) == sorted(u)
    starts = [e.node for e in rep.events if e.kind == "compute_start"]
    assert tuple(starts) == order.ids
