"""Wall-clock time of mkp+madfs alternating optimization vs. workload size.

    python scripts/opt_time.py --sizes 25 50 100 200 --workloads 20
"""

from __future__ import annotations

import argparse
import statistics
import time

from mvrefresh.alternating import optimize
from mvrefresh.workgen import GenParams, generate


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[25, 50, 100, 200])
    ap.add_argument("--workloads", type=int, default=20)
    ap.add_argument("--budget", type=float, default=0.05)
    args = ap.parse_args(argv)

    print(f"{'nodes':>6} {'median_s':>10} {'max_s':>10} {'median_iters':>13}")
    for n in args.sizes:
        secs, iters = [], []
        for seed in range(args.workloads):
            g = generate(GenParams(node_count=n, seed=seed))
            memory = round(args.budget * g.total_size())
            t0 = time.perf_counter()
            plan = optimize(g, memory)
            secs.append(time.perf_counter() - t0)
            iters.append(plan.iterations)
        print(f"{n:>6} {statistics.median(secs):>10.4f} {max(secs):>10.4f} {statistics.median(iters):>13}")


if __name__ == "__main__":
    main()
