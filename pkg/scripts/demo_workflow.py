"""Walk the full optimization loop offline, no server needed.

Usage:
    python3 scripts/demo_workflow.py [--budget-ms 5.0] [--data DIR]

Builds the bundled U-Net fixture, stores it in a throwaway workspace,
prices the baseline, applies the int8 preset, asks the planner for a
budget-conforming subset, and diffs the model against its grown variant.
"""

import argparse
import tempfile
from pathlib import Path

from tasklens import diffs, fixtures, optimize, package
from tasklens.costs import percent_delta
from tasklens.profiles import default_profile
from tasklens.store import Workspace


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--budget-ms", type=float, default=5.0)
    ap.add_argument("--data", type=Path, default=None, help="workspace dir (default: temp)")
    args = ap.parse_args()

    tmp = tempfile.TemporaryDirectory()
    root = args.data or Path(tmp.name)
    pkg = fixtures.build_fixture("unet", root / "unet.tgz")
    plus = fixtures.build_fixture("unet-plus", root / "unet-plus.tgz")

    ws = Workspace(root / "data")
    record, duplicate = ws.store_model(pkg, owner="demo")
    g = ws.model_graph(record.model_id)
    print(f"stored {record.name} as {record.model_id} (duplicate={duplicate})")
    print(f"  {len(g.tasks)} tasks, fps target {g.fps_target}")

    profile = default_profile()
    base = optimize.simulate(g, optimize.EMPTY_SELECTION, profile)
    print(
        f"baseline: {base.summary_base.total_latency:.3f} ms, "
        f"{base.summary_base.memory_power:.3f} mW"
    )

    preset = optimize.OptimizationSelection(preset="int8-io-kernel")
    full = optimize.simulate(g, preset, profile)
    print(
        f"int8 preset: {full.summary_opt.total_latency:.3f} ms "
        f"({full.delta_latency_pct:+.2f}%), "
        f"{full.summary_opt.memory_power:.3f} mW ({full.delta_power_pct:+.2f}%)"
    )

    plan = optimize.plan_to_budget(g, profile, args.budget_ms)
    if plan is None:
        print(f"budget {args.budget_ms} ms: infeasible")
    else:
        planned = optimize.simulate(g, plan, profile)
        print(
            f"budget {args.budget_ms} ms: plan touches {len(plan.targeted)} tasks, "
            f"lands at {planned.summary_opt.total_latency:.3f} ms"
        )
        analysis = ws.save_analysis(record.model_id, "budget plan", plan, "demo")
        print(f"  saved as analysis {analysis.analysis_id}")

    target = package.load_model(plus).graph
    tb = optimize.simulate(target, optimize.EMPTY_SELECTION, profile)
    d = diffs.diff_models(
        g, [r.base for r in base.per_task],
        target, [r.base for r in tb.per_task],
        base.summary_base, tb.summary_base,
    )
    grew = -percent_delta(d.summary_base.total_latency, d.summary_target.total_latency)
    print(
        f"diff vs {target.name}: {len(d.matched)} matched, "
        f"{len(d.added)} added, {len(d.removed)} removed, "
        f"latency {grew:+.2f}%"
    )
    tmp.cleanup()


if __name__ == "__main__":
    main()
