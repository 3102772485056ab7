"""JSON payload builders shared by the HTTP API and the CLI.

The CLI's --format json output and the API responses come from the same
functions here, so the two surfaces cannot drift apart.  Percent deltas
are rounded half-up to two decimals at this boundary; everything inside
the cost model stays full precision.
"""

from __future__ import annotations

import json

from . import columns as columns_mod
from . import diffs, optimize, scheduling
from .codemap import CodeLocation, SourceSlice
from .costs import ModelSummary, TaskConfig, TaskMetrics, percent_delta, round_half_up
from .ir import ModelGraph, graph_hash, graph_to_json, group_tree
from .layout import Layout
from .profiles import HardwareProfile
from .store import Analysis, ModelRecord


def rounded_delta(base: float, new: float) -> float | None:
    """Display-rounded percent change; None when the base is zero."""
    if base == 0:
        return None
    return round_half_up(percent_delta(base, new), 2)


def parse_selection_json(text: str) -> optimize.OptimizationSelection:
    """Selection from a JSON string; ValueError on malformed input."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"selection is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValueError("selection must be a JSON object")
    return optimize.OptimizationSelection.from_json(doc)


def _metric_values(metrics: TaskMetrics) -> dict:
    fields = columns_mod.METRIC_FIELD_BY_COLUMN
    return {col: getattr(metrics, field) for col, field in fields.items()}


def _metric_deltas(base: TaskMetrics, opt: TaskMetrics) -> dict:
    fields = columns_mod.METRIC_FIELD_BY_COLUMN
    return {
        col: rounded_delta(getattr(base, field), getattr(opt, field))
        for col, field in fields.items()
    }


def _summary_block(result: optimize.SimulationResult, optimized: bool) -> dict:
    block: dict = {"base": result.summary_base.to_json()}
    if optimized:
        block["optimized"] = result.summary_opt.to_json()
        block["delta_latency_pct"] = round_half_up(result.delta_latency_pct, 2)
        block["delta_power_pct"] = round_half_up(result.delta_power_pct, 2)
    return block


def metrics_payload(
    g: ModelGraph,
    p: HardwareProfile,
    selection: optimize.OptimizationSelection | None = None,
    offset: int = 0,
    limit: int | None = None,
) -> dict:
    """Table payload: column descriptors, one row per task, model summary.

    Without a selection each row carries a single metrics object; with one
    it carries base, optimized, and rounded delta triplets.
    """
    optimized = selection is not None
    result = optimize.simulate(g, selection or optimize.EMPTY_SELECTION, p)
    rows = []
    for sim_row in result.per_task:
        task = g.tasks[sim_row.task_id]
        row: dict = {
            "task": task.id,
            "name": task.name,
            "kind": task.kind,
            "group": task.group,
            "config": sim_row.config.to_json(),
        }
        if optimized:
            row["base"] = _metric_values(sim_row.base)
            row["optimized"] = _metric_values(sim_row.opt)
            row["delta"] = _metric_deltas(sim_row.base, sim_row.opt)
            row["changed"] = sim_row.changed
        else:
            row["metrics"] = _metric_values(sim_row.base)
        rows.append(row)
    total = len(rows)
    if offset:
        rows = rows[offset:]
    if limit is not None:
        rows = rows[:limit]
    return {
        "columns": columns_mod.describe_columns(),
        "rows": rows,
        "total_rows": total,
        "summary": _summary_block(result, optimized),
    }


def simulation_payload(result: optimize.SimulationResult) -> dict:
    tasks = []
    for sim_row in result.per_task:
        tasks.append(
            {
                "task": sim_row.task_id,
                "changed": sim_row.changed,
                "base": _metric_values(sim_row.base),
                "optimized": _metric_values(sim_row.opt),
                "config": sim_row.config.to_json(),
            }
        )
    payload: dict = {
        "summary": _summary_block(result, optimized=True),
        "affected_tasks": sorted(result.affected_task_ids),
        "conflicts": [c.to_json() for c in result.conflicts],
        "tasks": tasks,
    }
    if result.schedule_opt is not None:
        payload["schedule"] = {
            "base": [e.to_json() for e in result.schedule_base or ()],
            "optimized": [e.to_json() for e in result.schedule_opt],
        }
    return payload


def options_payload(
    g: ModelGraph,
    p: HardwareProfile,
    task_id: int,
    selection: optimize.OptimizationSelection | None = None,
) -> dict:
    options = optimize.enumerate_options(
        g, task_id, selection or optimize.EMPTY_SELECTION, p
    )
    rows = []
    for opt in options:
        rows.append(
            {
                "config": opt.cfg.to_json(),
                "metrics": _metric_values(opt.metrics),
                "delta_latency_pct": round_half_up(opt.delta_latency_pct, 2),
                "delta_power_pct": round_half_up(opt.delta_power_pct, 2),
                "delta_weight_bytes_pct": round_half_up(opt.delta_weight_bytes_pct, 2),
            }
        )
    return {"task": task_id, "count": len(rows), "options": rows}


def graph_payload(g: ModelGraph) -> dict:
    doc = graph_to_json(g)
    doc["hash"] = graph_hash(g)
    doc["groups"] = group_tree(g).to_json()
    return doc


def layout_payload(layout: Layout) -> dict:
    return layout.to_json()


def timeline_payload(
    entries: tuple[scheduling.ScheduleEntry, ...], makespan: float, engines: int
) -> dict:
    return {
        "engines": engines,
        "makespan": makespan,
        "rows": [e.to_json() for e in entries],
    }


def summary_payload(g: ModelGraph, p: HardwareProfile) -> dict:
    result = optimize.simulate(g, optimize.EMPTY_SELECTION, p)
    return {
        "name": g.name,
        "hash": graph_hash(g),
        "task_count": len(g.tasks),
        "fps_target": g.fps_target,
        "summary": result.summary_base.to_json(),
    }


def record_payload(record: ModelRecord, viewer: str | None, duplicate: bool | None = None) -> dict:
    """Public view of a model record.

    The share token and the shared-user roster are the owner's business;
    everyone else just gets the plain URL.
    """
    doc = {
        "model_id": record.model_id,
        "name": record.name,
        "owner": record.owner,
        "created_at": record.created_at,
        "graph_hash": record.graph_hash,
        "link_sharing": record.link_sharing,
        "url": f"/m/{record.model_id}",
    }
    if viewer == record.owner:
        doc["shared_with"] = list(record.shared_with)
        if record.link_sharing:
            doc["share_token"] = record.share_token
            doc["url"] = record.share_url()
    if duplicate is not None:
        doc["duplicate"] = duplicate
    return doc


def analysis_payload(analysis: Analysis) -> dict:
    return analysis.to_json()


def diff_payload(result: diffs.DiffResult) -> dict:
    matched = []
    for m in result.matched:
        doc = m.to_json()
        doc["metric_deltas"] = {
            key: (None if val is None else round_half_up(val, 2))
            for key, val in doc["metric_deltas"].items()
        }
        matched.append(doc)
    return {
        "matched": matched,
        "added": list(result.added),
        "removed": list(result.removed),
        "summary_base": result.summary_base.to_json(),
        "summary_target": result.summary_target.to_json(),
    }


def code_payload(task_id: int, locations: list[CodeLocation]) -> dict:
    return {"task": task_id, "locations": [loc.to_json() for loc in locations]}


def source_payload(sl: SourceSlice) -> dict:
    return sl.to_json()
