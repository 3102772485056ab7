"""Measure whole-model simulation latency on a large synthetic graph.

Usage:
    python3 scripts/bench_simulate.py [--tasks 5000] [--runs 21] [--seed 9]

Reports p50/min/max wall time for a model-wide preset simulation plus the
one-shot layout time, the two figures the interactive workbench depends on.
"""

import argparse
import statistics
import time

from tasklens import layout, optimize
from tasklens.fixtures import random_graph
from tasklens.profiles import default_profile


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--tasks", type=int, default=5000)
    ap.add_argument("--runs", type=int, default=21)
    ap.add_argument("--seed", type=int, default=9)
    args = ap.parse_args()

    t0 = time.perf_counter()
    g = random_graph(seed=args.seed, tasks=args.tasks)
    gen_s = time.perf_counter() - t0
    print(f"graph: {len(g.tasks)} tasks, {len(g.tensors)} tensors ({gen_s:.3f}s to generate)")

    profile = default_profile()
    sel = optimize.OptimizationSelection(preset="int8-io-kernel")
    optimize.simulate(g, sel, profile)  # warm the priced-graph cache

    samples = []
    for _ in range(args.runs):
        t0 = time.perf_counter()
        optimize.simulate(g, sel, profile)
        samples.append((time.perf_counter() - t0) * 1000)
    print(
        f"simulate preset int8-io-kernel: p50 {statistics.median(samples):.2f} ms  "
        f"min {min(samples):.2f}  max {max(samples):.2f}  ({args.runs} runs)"
    )

    t0 = time.perf_counter()
    lay = layout.layout_graph(g)
    layout_s = time.perf_counter() - t0
    print(f"layout: {len(lay.nodes)} nodes, {len(lay.edges)} edges in {layout_s:.3f}s")


if __name__ == "__main__":
    main()
