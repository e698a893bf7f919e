"""Small hand-built workloads used in tests, docs and the CLI examples."""

from __future__ import annotations

from .graph import DepGraph, ExecOrder, NodeMeta

GB = 10**9

# Six-node toy with a 100 GB budget. Under TAU1 the best flag set scores
# 120 ({v1, v5, v6}); running v4 before v3 (TAU2) lets v1 and v3 both be
# flagged for 210 ({v1, v3, v6}). Scores equal sizes in GB for the flaggable
# nodes; v2 and v4 carry no score.
REPLICA_TOY_MEMORY = 100 * GB
TAU1 = ExecOrder(("v1", "v2", "v3", "v4", "v5", "v6"))
TAU2 = ExecOrder(("v1", "v2", "v4", "v3", "v5", "v6"))


def replica_toy(compute_seconds: float | None = None) -> DepGraph:
    table = [("v1", 100, 100), ("v2", 40, 0), ("v3", 100, 100), ("v4", 20, 0), ("v5", 10, 10), ("v6", 10, 10)]
    nodes = tuple(NodeMeta(v, s * GB, float(t), compute_seconds) for v, s, t in table)
    edges = (("v1", "v2"), ("v1", "v4"), ("v2", "v3"), ("v3", "v5"), ("v4", "v5"), ("v5", "v6"))
    return DepGraph(nodes, edges)
