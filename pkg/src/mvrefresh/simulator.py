"""Discrete-event model of a refresh run with an in-memory catalog.

One compute lane runs nodes strictly in plan order. A flagged node writes
its output into the catalog and is queued on a single FIFO background lane
that materializes it to disk. The catalog entry is dropped once its last
dependent has finished and its materialization is done.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .graph import DepGraph, ExecOrder, NodeId, peak_memory
from .scoring import CostModel

EVENT_KINDS = (
    "compute_start",
    "read",
    "mem_write_end",
    "compute_end",
    "materialize_start",
    "materialize_end",
    "catalog_free",
)


@dataclass(frozen=True)
class Event:
    time: float
    kind: str
    node: NodeId
    detail: str = ""

    def to_json(self) -> dict:
        out = {"time": self.time, "kind": self.kind, "node": self.node}
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass(frozen=True)
class SimReport:
    end_to_end: float
    baseline_end_to_end: float
    model_peak: int
    realized_peak: int
    memory: float
    events: tuple[Event, ...] = field(repr=False)

    @property
    def realized_savings(self) -> float:
        return self.baseline_end_to_end - self.end_to_end

    @property
    def violation(self) -> bool:
        return self.realized_peak > self.memory or self.model_peak > self.memory

    def summary(self) -> dict:
        return {
            "end_to_end_s": self.end_to_end,
            "baseline_end_to_end_s": self.baseline_end_to_end,
            "realized_savings_s": self.realized_savings,
            "model_peak_bytes": self.model_peak,
            "realized_peak_bytes": self.realized_peak,
            "memory_bytes": None if self.memory == float("inf") else self.memory,
            "violation": self.violation,
        }


def baseline_time(g: DepGraph, cm: CostModel) -> float:
    """Sequential run with nothing kept in memory; independent of order."""
    total = 0.0
    for i, n in enumerate(g.nodes):
        total += sum(cm.disk_read(g.sizes[p]) for p in g.parents[i])
        total += n.compute_time or 0.0
        total += cm.disk_write(n.size)
    return total


def simulate(
    g: DepGraph,
    order: ExecOrder,
    flagged,
    cm: CostModel,
    memory: float = float("inf"),
    overlap_writes: bool = True,
) -> SimReport:
    """Replay a plan on the cost model.

    With ``overlap_writes=False`` flagged outputs are written to disk on the
    compute lane (a copy still stays in the catalog for readers), which
    isolates the read-side effect of flagging.
    """
    flagged = frozenset(flagged)
    events: list[tuple[float, int, Event]] = []
    seq = 0

    def emit(t, kind, node, detail=""):
        nonlocal seq
        events.append((t, seq, Event(t, kind, node, detail)))
        seq += 1

    n = len(g)
    in_catalog = [False] * n
    remaining = [len(c) for c in g.children]
    mat_end: dict[int, float] = {}
    last_dep_end: dict[int, float] = {}
    allocs: list[tuple[float, int, int]] = []  # (time, emission index, bytes)
    t = 0.0
    lane_free = 0.0
    last_mat = 0.0

    def maybe_free(p):
        if remaining[p] == 0 and p in mat_end and p in last_dep_end and in_catalog[p]:
            when = max(mat_end[p], last_dep_end[p])
            in_catalog[p] = False
            emit(when, "catalog_free", g.ids[p])
            allocs.append((when, seq, -g.sizes[p]))

    for v in order.ids:
        i = g.index[v]
        size = g.sizes[i]
        emit(t, "compute_start", v)
        is_flag = v in flagged
        if is_flag:
            in_catalog[i] = True
            allocs.append((t, seq, size))
        for p in g.parents[i]:
            if in_catalog[p]:
                emit(t, "read", g.ids[p], f"memory:{v}")
                t += cm.mem_read(g.sizes[p])
            else:
                emit(t, "read", g.ids[p], f"disk:{v}")
                t += cm.disk_read(g.sizes[p])
        t += g.meta[v].compute_time or 0.0
        if is_flag and overlap_writes:
            t += cm.mem_write(size)
            emit(t, "mem_write_end", v)
        elif is_flag:
            t += cm.disk_write(size)
            emit(t, "mem_write_end", v)
        else:
            t += cm.disk_write(size)
        emit(t, "compute_end", v)
        if is_flag:
            if overlap_writes:
                start = max(lane_free, t)
                lane_free = start + cm.disk_write(size)
                emit(start, "materialize_start", v)
                emit(lane_free, "materialize_end", v)
                mat_end[i] = lane_free
                last_mat = max(last_mat, lane_free)
            else:
                mat_end[i] = t
            last_dep_end[i] = t
        for p in g.parents[i]:
            remaining[p] -= 1
            if remaining[p] == 0:
                last_dep_end[p] = t
                maybe_free(p)
        if is_flag:
            maybe_free(i)

    end = max(t, last_mat)
    events.sort(key=lambda e: (e[0], e[1]))
    # equal times resolve in emission order, which follows the plan's slots
    allocs.sort(key=lambda a: (a[0], a[1]))
    cur = realized = 0
    for _, _, d in allocs:
        cur += d
        realized = max(realized, cur)
    return SimReport(
        end_to_end=end,
        baseline_end_to_end=baseline_time(g, cm),
        model_peak=peak_memory(g, order, flagged),
        realized_peak=realized,
        memory=memory,
        events=tuple(e for _, _, e in events),
    )
