"""Selector x orderer ablation harness."""

from __future__ import annotations

import csv
import io
import itertools
import statistics
import time
from collections.abc import Iterable, Sequence

from .alternating import OptimizeConfig, optimize
from .graph import DepGraph, is_topological
from .ordering import ORDERERS
from .scoring import CostModel
from .selection import SELECTORS
from .simulator import simulate

SCHEMA_VERSION = 1
COLUMNS = (
    "schema_version",
    "selector",
    "orderer",
    "seed",
    "status",
    "stop_reason",
    "iterations",
    "total_score",
    "flagged_count",
    "peak_memory_bytes",
    "end_to_end_s",
    "baseline_s",
    "savings_s",
)
TIMING_COLUMN = "optimize_seconds"


def run_cell(
    g: DepGraph,
    memory: int,
    cm: CostModel,
    selector: str,
    orderer: str,
    seed: int,
    sa_iterations: int = 10_000,
) -> dict:
    row = {"schema_version": SCHEMA_VERSION, "selector": selector, "orderer": orderer, "seed": seed}
    t0 = time.perf_counter()
    try:
        plan = optimize(g, memory, selector, orderer, OptimizeConfig(seed=seed, sa_iterations=sa_iterations))
    except Exception as e:  # recorded per cell, never fatal
        row.update(status=f"error: {type(e).__name__}: {e}")
        return row
    row[TIMING_COLUMN] = time.perf_counter() - t0
    rep = simulate(g, plan.order, plan.flagged, cm, memory)
    ok = plan.peak_memory <= memory and is_topological(g, plan.order)
    row.update(
        status="ok" if ok else "infeasible",
        stop_reason=plan.stop_reason,
        iterations=plan.iterations,
        total_score=plan.total_score,
        flagged_count=len(plan.flagged),
        peak_memory_bytes=plan.peak_memory,
        end_to_end_s=rep.end_to_end,
        baseline_s=rep.baseline_end_to_end,
        savings_s=rep.realized_savings,
    )
    return row


def compare(
    g: DepGraph,
    memory: int,
    cm: CostModel,
    seeds: Iterable[int] = (0,),
    selectors: Sequence[str] = SELECTORS,
    orderers: Sequence[str] = ORDERERS,
    sa_iterations: int = 10_000,
) -> list[dict]:
    """One row per (selector, orderer, seed), sorted by that key."""
    cells = itertools.product(selectors, orderers, sorted(set(seeds)))
    return [run_cell(g, memory, cm, s, o, seed, sa_iterations) for s, o, seed in cells]


def to_csv(rows: list[dict], timing: bool = False) -> str:
    cols = COLUMNS + ((TIMING_COLUMN,) if timing else ())
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(r.get(k, "")) for k in cols})
    return buf.getvalue()


def _fmt(x):
    return repr(x) if isinstance(x, float) else x


def summarize(rows: list[dict]) -> list[dict]:
    """Mean score / savings per pair, with counts of non-ok cells."""
    out = []
    key = lambda r: (r["selector"], r["orderer"])  # noqa: E731
    for (sel, ordr), grp in itertools.groupby(sorted(rows, key=key), key=key):
        grp = list(grp)
        ok = [r for r in grp if "total_score" in r]
        out.append(
            {
                "selector": sel,
                "orderer": ordr,
                "runs": len(grp),
                "not_ok": sum(r["status"] != "ok" for r in grp),
                "early_stop": sum(r.get("stop_reason") == "order-infeasible" for r in grp),
                "mean_score": statistics.fmean(r["total_score"] for r in ok) if ok else float("nan"),
                "mean_savings_s": statistics.fmean(r["savings_s"] for r in ok) if ok else float("nan"),
            }
        )
    return out


def to_table(rows: list[dict]) -> str:
    summ = summarize(rows)
    head = f"{'selector':<8} {'orderer':<10} {'runs':>4} {'mean_score':>14} {'mean_savings_s':>15} {'infeasible_stop':>15}"
    lines = [head, "-" * len(head)]
    for s in summ:
        lines.append(
            f"{s['selector']:<8} {s['orderer']:<10} {s['runs']:>4} {s['mean_score']:>14.3f} "
            f"{s['mean_savings_s']:>15.3f} {s['early_stop']:>15}"
        )
    return "\n".join(lines) + "\n"
