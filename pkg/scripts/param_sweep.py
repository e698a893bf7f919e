"""Sweep one generator parameter and report mkp+madfs against greedy+madfs.

    python scripts/param_sweep.py ratio 0.5 1 2 4 8
    python scripts/param_sweep.py outdegree 1 2 3 5
    python scripts/param_sweep.py stdev 0 1 2 4
    python scripts/param_sweep.py budget 0.01 0.05 0.1 0.2

Savings are simulated seconds relative to the all-on-disk baseline, using
the default cost model (or --cost-model FILE).
"""

from __future__ import annotations

import argparse
import statistics

from mvrefresh.alternating import optimize
from mvrefresh.io import load_cost_model
from mvrefresh.simulator import simulate
from mvrefresh.workgen import GenParams, generate

FIELD = {"ratio": "height_width_ratio", "outdegree": "max_outdegree", "stdev": "stage_stdev"}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("param", choices=[*FIELD, "budget"])
    ap.add_argument("values", type=float, nargs="+")
    ap.add_argument("--nodes", type=int, default=100)
    ap.add_argument("--workloads", type=int, default=20)
    ap.add_argument("--budget", type=float, default=0.05)
    ap.add_argument("--cost-model")
    args = ap.parse_args(argv)
    cm = load_cost_model(args.cost_model)

    print(f"{args.param:>10} {'mkp_score':>10} {'greedy_score':>13} {'mkp_speedup':>12} {'greedy_speedup':>15}")
    for value in args.values:
        budget = value if args.param == "budget" else args.budget
        kw = {}
        if args.param in FIELD:
            kw[FIELD[args.param]] = int(value) if args.param == "outdegree" else value
        res = {"mkp": ([], []), "greedy": ([], [])}
        for seed in range(args.workloads):
            g = generate(GenParams(node_count=args.nodes, seed=seed, cost_model=cm, **kw))
            memory = round(budget * g.total_size())
            for sel, (scores, speedups) in res.items():
                plan = optimize(g, memory, sel, "madfs")
                rep = simulate(g, plan.order, plan.flagged, cm, memory)
                scores.append(plan.total_score)
                speedups.append(rep.baseline_end_to_end / rep.end_to_end)
        m, gr = res["mkp"], res["greedy"]
        print(
            f"{value:>10g} {statistics.fmean(m[0]):>10.2f} {statistics.fmean(gr[0]):>13.2f} "
            f"{statistics.fmean(m[1]):>12.4f} {statistics.fmean(gr[1]):>15.4f}"
        )


if __name__ == "__main__":
    main()
