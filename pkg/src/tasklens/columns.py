"""Metric table columns shared by the HTTP API and the CLI report.

Every column carries the id used for sorting, a human label, a unit tag,
and a one-line description so clients can build headers without hardcoding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .costs import TaskConfig, TaskMetrics
from .errors import UnknownColumn
from .ir import HardwareTask


@dataclass(frozen=True)
class Column:
    id: str
    label: str
    unit: str
    description: str
    getter: Callable[[HardwareTask, TaskMetrics, TaskConfig], object]
    numeric: bool = True

    def describe(self) -> dict:
        return {
            "id": self.id,
            "label": self.label,
            "unit": self.unit,
            "description": self.description,
        }


def _attr(name: str):
    return lambda task, metrics, cfg: getattr(task, name)


def _metric(name: str):
    return lambda task, metrics, cfg: getattr(metrics, name)


COLUMNS: tuple[Column, ...] = (
    Column("task", "Task", "", "Task id in execution order", _attr("id")),
    Column("name", "Name", "", "Task name from the compiler", _attr("name"), numeric=False),
    Column("kind", "Kind", "", "Operation kind", _attr("kind"), numeric=False),
    Column("group", "Group", "", "Module path used for graph collapsing", _attr("group"), numeric=False),
    Column(
        "total_time",
        "Static Total Time",
        "ms",
        "Estimated latency: max of compute and memory time plus conversion overhead",
        _metric("latency"),
    ),
    Column("compute_time", "Compute Time", "ms", "MAC work over kernel throughput", _metric("compute_time")),
    Column("memory_time", "Memory Time", "ms", "Bytes moved over bandwidth", _metric("memory_time")),
    Column(
        "conversion_overhead",
        "Conversion Overhead",
        "ms",
        "Format conversion cost on precision-sensitive tasks",
        _metric("conversion_overhead"),
    ),
    Column("bytes_moved", "Bytes Moved", "B", "Tensor plus weight traffic", _metric("bytes_moved")),
    Column("weight_bytes", "Weight Size", "B", "Encoded weight footprint", _metric("weight_bytes")),
    Column("energy", "Energy", "uJ", "Memory traffic energy", _metric("energy")),
    Column("memory_power", "Memory Power", "mW", "Energy over latency", _metric("memory_power")),
    Column("macs", "MACs", "", "Multiply-accumulate count", lambda t, m, c: t.macs or 0),
    Column(
        "macs_effective",
        "Effective MACs",
        "",
        "MACs after the sparsity discount",
        _metric("macs_effective"),
    ),
    Column(
        "input_format",
        "Input Format",
        "",
        "Numeric format of the task inputs",
        lambda t, m, c: c.input_format.tag,
        numeric=False,
    ),
    Column(
        "output_format",
        "Output Format",
        "",
        "Numeric format of the task outputs",
        lambda t, m, c: c.output_format.tag,
        numeric=False,
    ),
    Column(
        "kernel_format",
        "Kernel Format",
        "",
        "Numeric format of the stored weights",
        lambda t, m, c: c.kernel_format.tag,
        numeric=False,
    ),
    Column("sparsity", "Sparsity", "", "Fraction of weights pruned to zero", lambda t, m, c: c.sparsity),
    Column(
        "palette_bits",
        "Palette Bits",
        "",
        "Bits per palettized weight index, 0 when off",
        lambda t, m, c: c.palette_bits,
    ),
)

BY_ID: dict[str, Column] = {c.id: c for c in COLUMNS}

# columns whose values live on TaskMetrics and change under optimization
METRIC_COLUMN_IDS: tuple[str, ...] = (
    "total_time",
    "compute_time",
    "memory_time",
    "conversion_overhead",
    "bytes_moved",
    "weight_bytes",
    "energy",
    "memory_power",
    "macs_effective",
)

# TaskMetrics field behind each metric column id
METRIC_FIELD_BY_COLUMN: dict[str, str] = {
    "total_time": "latency",
    "compute_time": "compute_time",
    "memory_time": "memory_time",
    "conversion_overhead": "conversion_overhead",
    "bytes_moved": "bytes_moved",
    "weight_bytes": "weight_bytes",
    "energy": "energy",
    "memory_power": "memory_power",
    "macs_effective": "macs_effective",
}


def get_column(column_id: str) -> Column:
    col = BY_ID.get(column_id)
    if col is None:
        raise UnknownColumn(column_id, sorted(BY_ID))
    return col


def describe_columns() -> list[dict]:
    return [c.describe() for c in COLUMNS]
