"""JSON formats for workloads, plans and cost models; human byte sizes."""

from __future__ import annotations

import json
import math
import re
from pathlib import Path

from .graph import DepGraph, ExecOrder, GraphError, NodeMeta, validate_graph
from .scoring import CostModel

NODE_FIELDS = {"id", "size_bytes", "speedup_score", "compute_seconds"}
PLAN_FIELDS = {"order", "flagged", "total_score", "peak_memory_bytes", "iterations"}


class FormatError(ValueError):
    """Malformed input file; ``line`` is 1-based when it could be located."""

    def __init__(self, msg: str, path: str | None = None, line: int | None = None):
        self.path, self.line = path, line
        where = path or "<input>"
        if line is not None:
            where += f":{line}"
        super().__init__(f"{where}: {msg}")


_UNITS = {
    "": 1,
    "B": 1,
    "KB": 10**3,
    "MB": 10**6,
    "GB": 10**9,
    "TB": 10**12,
    "KIB": 2**10,
    "MIB": 2**20,
    "GIB": 2**30,
    "TIB": 2**40,
}


def parse_bytes(text: str | int) -> int:
    """``"100GB"`` -> 100_000_000_000. Decimal units are powers of 10."""
    if isinstance(text, int):
        return text
    m = re.fullmatch(r"\s*([0-9]*\.?[0-9]+)\s*([A-Za-z]*)\s*", str(text))
    if not m or m.group(2).upper() not in _UNITS:
        raise ValueError(f"cannot parse byte quantity {text!r}")
    value = float(m.group(1)) * _UNITS[m.group(2).upper()]
    return int(round(value))


def _line_of(text: str, needle: str) -> int | None:
    k = text.find(needle)
    return None if k < 0 else text.count("\n", 0, k) + 1


def _load_json(text: str, path: str | None):
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(e.msg, path, e.lineno) from None


def _is_number(x) -> bool:
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def parse_workload(text: str, path: str | None = None) -> DepGraph:
    data = _load_json(text, path)
    if not isinstance(data, dict):
        raise FormatError("top level must be an object", path, 1)
    extra = set(data) - {"nodes", "edges"}
    if extra:
        raise FormatError(f"unknown fields {sorted(extra)}", path, _line_of(text, f'"{min(extra)}"'))
    if not isinstance(data.get("nodes"), list):
        raise FormatError("'nodes' must be a list", path, _line_of(text, '"nodes"'))
    nodes = []
    for k, raw in enumerate(data["nodes"]):
        nid = raw.get("id") if isinstance(raw, dict) else None
        line = _line_of(text, json.dumps(nid)) if isinstance(nid, str) else None
        if not isinstance(raw, dict):
            raise FormatError(f"node #{k} must be an object", path)
        extra = set(raw) - NODE_FIELDS
        if extra:
            raise FormatError(f"node #{k}: unknown fields {sorted(extra)}", path, line)
        if not isinstance(nid, str):
            raise FormatError(f"node #{k}: 'id' must be a string", path, line)
        size = raw.get("size_bytes")
        if not isinstance(size, int) or isinstance(size, bool) or size < 0:
            raise FormatError(f"node {nid!r}: size_bytes must be a non-negative integer", path, line)
        score = raw.get("speedup_score")
        secs = raw.get("compute_seconds")
        for name, val in (("speedup_score", score), ("compute_seconds", secs)):
            if val is not None and not (_is_number(val) and val >= 0):
                raise FormatError(f"node {nid!r}: {name} must be a non-negative number or null", path, line)
        nodes.append(NodeMeta(nid, size, score, secs))
    edges = []
    for raw in data.get("edges", []):
        if not (isinstance(raw, list) and len(raw) == 2 and all(isinstance(x, str) for x in raw)):
            raise FormatError(f"edge {raw!r} must be a [parent, child] pair of ids", path, _line_of(text, '"edges"'))
        edges.append(tuple(raw))
    g = DepGraph(tuple(nodes), tuple(edges))
    try:
        validate_graph(g)
    except GraphError as e:
        raise FormatError(str(e), path) from None
    return g


def workload_to_json(g: DepGraph) -> dict:
    return {
        "nodes": [
            {
                "id": n.id,
                "size_bytes": n.size,
                "speedup_score": n.speedup_score,
                "compute_seconds": n.compute_time,
            }
            for n in g.nodes
        ],
        "edges": [list(e) for e in g.edges],
    }


def dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def load_workload(path: str | Path) -> DepGraph:
    return parse_workload(Path(path).read_text(), str(path))


def save_workload(g: DepGraph, path: str | Path) -> None:
    Path(path).write_text(dumps(workload_to_json(g)))


def load_cost_model(path: str | Path | None) -> CostModel:
    if path is None:
        return CostModel()
    data = _load_json(Path(path).read_text(), str(path))
    try:
        return CostModel.from_json(data)
    except (TypeError, ValueError) as e:
        raise FormatError(str(e), str(path)) from None


def load_plan(path: str | Path, g: DepGraph) -> tuple[ExecOrder, frozenset]:
    """Read a plan file and check it against ``g``."""
    path = str(path)
    text = Path(path).read_text()
    data = _load_json(text, path)
    if not isinstance(data, dict) or not {"order", "flagged"} <= set(data):
        raise FormatError("plan needs 'order' and 'flagged'", path)
    extra = set(data) - PLAN_FIELDS
    if extra:
        raise FormatError(f"unknown plan fields {sorted(extra)}", path)
    order, flagged = data["order"], data["flagged"]
    known = set(g.ids)
    for v in [*order, *flagged]:
        if v not in known:
            raise FormatError(f"plan references unknown node {v!r}", path, _line_of(text, json.dumps(v)))
    if sorted(order) != sorted(g.ids):
        raise FormatError("plan order is not a permutation of the graph's nodes", path)
    return ExecOrder(tuple(order)), frozenset(flagged)
