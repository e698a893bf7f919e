"""Joint selection of in-memory intermediates and refresh order for materialized-view DAGs."""

from .alternating import OptimizeConfig, Plan, brute_force_joint, optimize
from .graph import (
    CycleError,
    DanglingEdgeError,
    DepGraph,
    DuplicateIdError,
    ExecOrder,
    NodeMeta,
    avg_memory_usage,
    hold_span,
    is_topological,
    peak_memory,
    topo_order,
    validate_graph,
)
from .ordering import order_madfs, order_sa, order_separator
from .scoring import CostModel, access_time, compute_speedup_scores
from .selection import (
    derive_constraints,
    select_nodes_greedy,
    select_nodes_mkp,
    select_nodes_random,
    select_nodes_ratio,
)
from .mkp import MkpInstance, MkpTimeout, solve_mkp
from .simulator import SimReport, baseline_time, simulate
from .workgen import GenParams, generate

__all__ = [name for name in dir() if not name.startswith("_")]
