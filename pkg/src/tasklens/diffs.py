"""Model version comparison: match tasks across two graphs, classify
added/removed/changed, attach per-metric deltas.

Matching is name-first (names come from user code and are the most stable
key), with a structural fallback on (kind, weight_count, macs).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .costs import ModelSummary, TaskMetrics, percent_delta
from .ir import HardwareTask, ModelGraph

_REL_TOL = 1e-12

_METRIC_FIELDS = (
    "latency",
    "compute_time",
    "memory_time",
    "conversion_overhead",
    "bytes_moved",
    "weight_bytes",
    "energy",
    "memory_power",
    "macs_effective",
)


@dataclass(frozen=True)
class MatchedTask:
    base_task_id: int
    target_task_id: int
    changed: bool
    metric_deltas: dict[str, float | None]  # raw percent per metric

    def to_json(self) -> dict:
        return {
            "base_task": self.base_task_id,
            "target_task": self.target_task_id,
            "changed": self.changed,
            "metric_deltas": dict(self.metric_deltas),
        }


@dataclass(frozen=True)
class DiffResult:
    matched: tuple[MatchedTask, ...]
    added: tuple[int, ...]  # target task ids with no base counterpart
    removed: tuple[int, ...]  # base task ids with no target counterpart
    summary_base: ModelSummary
    summary_target: ModelSummary


def _differs(a: float, b: float) -> bool:
    if a == b:
        return False
    scale = max(abs(a), abs(b))
    return abs(a - b) > _REL_TOL * scale


def _config_tuple(t: HardwareTask) -> tuple:
    return (t.kind, t.weight_count, t.kernel_format, t.sparsity, t.palette_bits)


def _structural_key(t: HardwareTask) -> tuple:
    return (t.kind, t.weight_count, t.macs if t.macs is not None else -1)


def diff_models(
    base: ModelGraph,
    base_metrics: Sequence[TaskMetrics] | Mapping[int, TaskMetrics],
    target: ModelGraph,
    target_metrics: Sequence[TaskMetrics] | Mapping[int, TaskMetrics],
    summary_base: ModelSummary,
    summary_target: ModelSummary,
) -> DiffResult:
    """Pair up tasks of two graph versions.

    Pass 1 matches names unique in both graphs; pass 2 matches leftovers on
    exact (kind, weight_count, macs), greedily in ascending id order.
    """
    base_tasks = sorted(base.tasks, key=lambda t: t.id)
    target_tasks = sorted(target.tasks, key=lambda t: t.id)

    def name_counts(tasks: Sequence[HardwareTask]) -> dict[str, int]:
        counts: dict[str, int] = {}
        for t in tasks:
            counts[t.name] = counts.get(t.name, 0) + 1
        return counts

    base_names = name_counts(base_tasks)
    target_names = name_counts(target_tasks)
    target_by_name = {t.name: t for t in target_tasks if target_names[t.name] == 1}

    pairs: list[tuple[int, int]] = []
    unmatched_base: list[HardwareTask] = []
    taken_targets: set[int] = set()
    for t in base_tasks:
        other = target_by_name.get(t.name)
        if base_names[t.name] == 1 and other is not None:
            pairs.append((t.id, other.id))
            taken_targets.add(other.id)
        else:
            unmatched_base.append(t)

    pool: dict[tuple, list[int]] = {}
    for t in target_tasks:
        if t.id not in taken_targets:
            pool.setdefault(_structural_key(t), []).append(t.id)
    removed: list[int] = []
    for t in unmatched_base:
        bucket = pool.get(_structural_key(t))
        if bucket:
            other_id = bucket.pop(0)  # ascending id: lists built in id order
            pairs.append((t.id, other_id))
            taken_targets.add(other_id)
        else:
            removed.append(t.id)
    added = [t.id for t in target_tasks if t.id not in taken_targets]

    def metric_of(metrics, task_id: int) -> TaskMetrics:
        return metrics[task_id]

    matched: list[MatchedTask] = []
    for base_id, target_id in sorted(pairs):
        m_base = metric_of(base_metrics, base_id)
        m_target = metric_of(target_metrics, target_id)
        deltas: dict[str, float | None] = {}
        any_metric_change = False
        for name in _METRIC_FIELDS:
            a = float(getattr(m_base, name))
            b = float(getattr(m_target, name))
            if _differs(a, b):
                any_metric_change = True
            deltas[name] = percent_delta(a, b) if a != 0 else None
        cfg_changed = _config_tuple(base.tasks[base_id]) != _config_tuple(
            target.tasks[target_id]
        )
        matched.append(
            MatchedTask(
                base_task_id=base_id,
                target_task_id=target_id,
                changed=cfg_changed or any_metric_change,
                metric_deltas=deltas,
            )
        )

    return DiffResult(
        matched=tuple(matched),
        added=tuple(added),
        removed=tuple(removed),
        summary_base=summary_base,
        summary_target=summary_target,
    )
