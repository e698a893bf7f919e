"""Command-line entry point: ``mvrefresh <command> ...``.

Exit codes: 0 success, 2 unreadable or invalid input, 3 infeasible request.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import compare as cmp
from .alternating import OptimizeConfig, optimize
from .dot import to_dot
from .graph import is_topological
from .io import (
    FormatError,
    dumps,
    load_cost_model,
    load_plan,
    load_workload,
    parse_bytes,
    workload_to_json,
)
from .ordering import ORDERERS
from .scoring import compute_speedup_scores, fill_missing_scores
from .selection import SELECTORS
from .simulator import simulate
from .workgen import GenParams, InfeasibleParams, generate

DEFAULT_SEED = 0
log = logging.getLogger("mvrefresh")


class Infeasible(Exception):
    pass


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _budget(text: str, g) -> int:
    text = text.strip()
    if text.endswith("%"):
        value = round(float(text[:-1]) / 100 * g.total_size())
    else:
        try:
            value = parse_bytes(text)
        except ValueError as e:
            raise FormatError(str(e)) from None
    if value < 0:
        raise Infeasible(f"memory budget must be >= 0, got {text}")
    return value


def _seeds(text: str) -> list[int]:
    out = []
    for part in text.split(","):
        if ":" in part:
            lo, hi = part.split(":")
            out.extend(range(int(lo), int(hi)))
        elif part:
            out.append(int(part))
    return out


def _scored_graph(args):
    g = load_workload(args.graph)
    return fill_missing_scores(g, load_cost_model(args.cost_model))


def cmd_optimize(args) -> int:
    g = _scored_graph(args)
    memory = _budget(args.memory, g)
    cfg = OptimizeConfig(initial_order=args.initial_order, seed=args.seed, sa_iterations=args.sa_iterations)
    plan = optimize(g, memory, args.selector, args.orderer, cfg)
    _emit(dumps(plan.to_json()), args.out)
    summary = (
        f"total_score={plan.total_score!r} peak_memory_bytes={plan.peak_memory} "
        f"iterations={plan.iterations} stop={plan.stop_reason} flagged={len(plan.flagged)}/{len(g)}\n"
    )
    (sys.stdout if args.out else sys.stderr).write(summary)
    return 0


def cmd_simulate(args) -> int:
    g = _scored_graph(args)
    cm = load_cost_model(args.cost_model)
    order, flagged = load_plan(args.plan, g)
    if not is_topological(g, order):
        raise FormatError("plan order violates a dependency", args.plan)
    memory = _budget(args.memory, g) if args.memory else float("inf")
    rep = simulate(g, order, flagged, cm, memory, overlap_writes=not args.no_overlap)
    if args.emit_trace:
        Path(args.emit_trace).write_text(dumps([e.to_json() for e in rep.events]))
    if args.format == "table":
        lines = [f"{k:<24} {v}" for k, v in rep.summary().items()]
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _emit(dumps(rep.summary()), args.out)
    return 0


def cmd_score(args) -> int:
    g = load_workload(args.graph)
    cm = load_cost_model(args.cost_model)
    g = fill_missing_scores(g, cm) if args.missing_only else g.with_scores(compute_speedup_scores(g, cm))
    _emit(dumps(workload_to_json(g)), args.out)
    return 0


def cmd_generate(args) -> int:
    kw = {}
    if args.params:
        try:
            kw = json.loads(Path(args.params).read_text())
        except json.JSONDecodeError as e:
            raise FormatError(e.msg, args.params, e.lineno) from None
        unknown = set(kw) - {"node_count", "height_width_ratio", "max_outdegree", "stage_stdev", "source_size_pool", "seed"}
        if unknown:
            raise FormatError(f"unknown params {sorted(unknown)}", args.params)
        if "source_size_pool" in kw:
            kw["source_size_pool"] = tuple(kw["source_size_pool"])
    for name, attr in (("node_count", "nodes"), ("height_width_ratio", "ratio"),
                       ("max_outdegree", "max_outdegree"), ("stage_stdev", "stage_stdev"), ("seed", "seed")):
        val = getattr(args, attr)
        if val is not None:
            kw[name] = val
    kw.setdefault("seed", DEFAULT_SEED)
    try:
        g = generate(GenParams(**kw, cost_model=load_cost_model(args.cost_model)))
    except InfeasibleParams as e:
        raise Infeasible(str(e)) from None
    _emit(dumps(workload_to_json(g)), args.out)
    return 0


def cmd_compare(args) -> int:
    g = _scored_graph(args)
    memory = _budget(args.memory, g)
    cm = load_cost_model(args.cost_model)
    rows = cmp.compare(
        g, memory, cm, _seeds(args.seeds),
        args.selectors.split(","), args.orderers.split(","), args.sa_iterations,
    )
    if args.format == "csv":
        _emit(cmp.to_csv(rows, timing=args.timing), args.out)
    elif args.format == "json":
        keep = cmp.COLUMNS + ((cmp.TIMING_COLUMN,) if args.timing else ())
        _emit(dumps([{k: r[k] for k in keep if k in r} for r in rows]), args.out)
    else:
        _emit(cmp.to_table(rows), args.out)
    return 0


def cmd_export_dot(args) -> int:
    g = load_workload(args.graph)
    order, flagged = load_plan(args.plan, g) if args.plan else (None, frozenset())
    _emit(to_dot(g, order, flagged), args.out)
    return 0


def cmd_validate(args) -> int:
    g = load_workload(args.graph)
    print(f"ok: {len(g)} nodes, {len(g.edges)} edges")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mvrefresh", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, memory=False, required_memory=False):
        p.add_argument("--graph", "-g", required=True)
        p.add_argument("--cost-model")
        p.add_argument("--out", "-o")
        if memory:
            p.add_argument("--memory", "-M", required=required_memory,
                           help="budget in bytes, with optional suffix (100GB, 512MiB) or a percent of total node size")
        return p

    p = common(sub.add_parser("optimize", help="compute flagged nodes and execution order"), True, True)
    p.add_argument("--selector", choices=SELECTORS, default="mkp")
    p.add_argument("--orderer", choices=ORDERERS, default="madfs")
    p.add_argument("--initial-order", choices=("bfs-layered", "arbitrary"), default="bfs-layered")
    p.add_argument("--seed", type=int, default=DEFAULT_SEED)
    p.add_argument("--sa-iterations", type=int, default=10_000)
    p.set_defaults(func=cmd_optimize)

    p = common(sub.add_parser("simulate", help="replay a plan on the cost model"), True)
    p.add_argument("--plan", "-p", required=True)
    p.add_argument("--emit-trace")
    p.add_argument("--no-overlap", action="store_true", help="write flagged outputs to disk on the compute lane")
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.set_defaults(func=cmd_simulate)

    p = common(sub.add_parser("score", help="derive speedup scores from the cost model"))
    p.add_argument("--missing-only", action="store_true")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("generate", help="synthesize a layered workload")
    p.add_argument("--nodes", type=int)
    p.add_argument("--ratio", type=float)
    p.add_argument("--max-outdegree", type=int)
    p.add_argument("--stage-stdev", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--params")
    p.add_argument("--cost-model")
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_generate)

    p = common(sub.add_parser("compare", help="selector x orderer ablation"), True, True)
    p.add_argument("--seeds", default=str(DEFAULT_SEED), help="comma list and/or lo:hi ranges")
    p.add_argument("--selectors", default=",".join(SELECTORS))
    p.add_argument("--orderers", default=",".join(ORDERERS))
    p.add_argument("--sa-iterations", type=int, default=10_000)
    p.add_argument("--format", choices=("csv", "table", "json"), default="table")
    p.add_argument("--timing", action="store_true", help="add wall-clock optimize time (not reproducible)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("export-dot", help="render the graph as Graphviz DOT")
    p.add_argument("--graph", "-g", required=True)
    p.add_argument("--plan", "-p")
    p.add_argument("--out", "-o")
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("validate", help="check a workload file")
    p.add_argument("--graph", "-g", required=True)
    p.set_defaults(func=cmd_validate)
    return ap


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("SC_LOG", "error").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FormatError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except Infeasible as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
