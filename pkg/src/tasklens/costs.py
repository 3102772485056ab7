"""Roofline pricing of hardware tasks.

latency = max(compute_time, memory_time) + conversion_overhead, with byte
counts rounded up per tensor. Everything here is a pure function of its
arguments; the vectorized bulk pricer in ``pricing.py`` must agree with these
scalar definitions exactly (tests compare the two routes).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from typing import Mapping, Sequence

from .formats import NumericFormat, tensor_bytes
from .ir import HardwareTask, Tensor
from .profiles import HardwareProfile


@dataclass(frozen=True)
class TaskConfig:
    """One optimization choice for a task: formats, sparsity, palette."""

    input_format: NumericFormat
    output_format: NumericFormat
    kernel_format: NumericFormat
    sparsity: float = 0.0
    palette_bits: int = 0

    def to_json(self) -> dict:
        out: dict = {
            "input": self.input_format.tag,
            "output": self.output_format.tag,
            "kernel": self.kernel_format.tag,
            "sparsity": self.sparsity,
        }
        if self.palette_bits:
            out["palette"] = self.palette_bits
        return out

    @classmethod
    def from_json(cls, doc: dict) -> "TaskConfig":
        return cls(
            input_format=NumericFormat.from_tag(doc["input"]),
            output_format=NumericFormat.from_tag(doc["output"]),
            kernel_format=NumericFormat.from_tag(doc["kernel"]),
            sparsity=float(doc.get("sparsity", 0.0)),
            palette_bits=int(doc.get("palette", 0)),
        )


@dataclass(frozen=True)
class TaskMetrics:
    latency: float  # ms
    compute_time: float  # ms
    memory_time: float  # ms
    conversion_overhead: float  # ms
    bytes_moved: int
    weight_bytes: int
    energy: float  # µJ
    memory_power: float  # mW (µJ/ms)
    macs_effective: float

    def to_json(self) -> dict:
        return {
            "latency": self.latency,
            "compute_time": self.compute_time,
            "memory_time": self.memory_time,
            "conversion_overhead": self.conversion_overhead,
            "bytes_moved": self.bytes_moved,
            "weight_bytes": self.weight_bytes,
            "energy": self.energy,
            "memory_power": self.memory_power,
            "macs_effective": self.macs_effective,
        }


@dataclass(frozen=True)
class ModelSummary:
    total_latency: float
    total_energy: float
    memory_power: float
    total_weight_bytes: int
    total_bytes_moved: int
    achieved_fps: float | None
    task_count: int

    def to_json(self) -> dict:
        return {
            "total_latency": self.total_latency,
            "total_energy": self.total_energy,
            "memory_power": self.memory_power,
            "total_weight_bytes": self.total_weight_bytes,
            "total_bytes_moved": self.total_bytes_moved,
            "achieved_fps": self.achieved_fps,
            "task_count": self.task_count,
        }


def weight_bytes(weight_count: int, cfg: TaskConfig) -> int:
    """Stored size of a task's weights under its encoding.

    Palettized: packed indices + fp16 lookup table (2 bytes/entry).
    Sparse: packed surviving weights + a 1 bit/weight bitmask.
    Dense: packed weights at kernel_format width.
    """
    if weight_count <= 0:
        return 0
    if cfg.palette_bits > 0:
        lut = (1 << cfg.palette_bits) * 2
        return (weight_count * cfg.palette_bits + 7) // 8 + lut
    bits = cfg.kernel_format.bits
    if cfg.sparsity == 0.0:
        return (weight_count * bits + 7) // 8
    packed = math.ceil(weight_count * (1.0 - cfg.sparsity) * bits / 8.0)
    bitmask = (weight_count + 7) // 8
    return packed + bitmask


def effective_compute_format(
    task: HardwareTask,
    kernel_format: NumericFormat,
    palette_bits: int,
    io_format: NumericFormat,
) -> NumericFormat:
    """Format the compute units run at.

    Palettized kernels decode through an fp16 table; weighted tasks otherwise
    run at the kernel format; weightless tasks follow their (first) input.
    """
    if task.weight_count > 0:
        return NumericFormat.FP16 if palette_bits > 0 else kernel_format
    return io_format


def price_task(
    task: HardwareTask,
    tensors: Mapping[str, Tensor],
    in_formats: Sequence[NumericFormat],
    out_formats: Sequence[NumericFormat],
    kernel_format: NumericFormat,
    sparsity: float,
    palette_bits: int,
    p: HardwareProfile,
) -> TaskMetrics:
    """Price one task with an explicit format per tensor.

    ``in_formats``/``out_formats`` parallel task.inputs/task.outputs. This is
    the general form behind estimate_task; format propagation can leave a
    task with differently-formatted tensors.
    """
    wb = weight_bytes(
        task.weight_count,
        TaskConfig(
            input_format=NumericFormat.FP16,
            output_format=NumericFormat.FP16,
            kernel_format=kernel_format,
            sparsity=sparsity,
            palette_bits=palette_bits,
        ),
    )
    bytes_in = sum(
        tensor_bytes(tensors[t].elem_count, f) for t, f in zip(task.inputs, in_formats)
    )
    bytes_out = sum(
        tensor_bytes(tensors[t].elem_count, f) for t, f in zip(task.outputs, out_formats)
    )
    bytes_moved = bytes_in + bytes_out + wb

    if in_formats:
        io_fmt = in_formats[0]
    elif out_formats:
        io_fmt = out_formats[0]
    else:
        io_fmt = NumericFormat.FP16
    eff = effective_compute_format(task, kernel_format, palette_bits, io_fmt)
    tput = p.throughput_for(task.kind, eff, task_id=task.id)

    # sparsity skips compute only for weighted, non-palettized kernels
    s_eff = sparsity if (task.weight_count > 0 and palette_bits == 0) else 0.0
    macs = task.macs if task.macs is not None else 0
    macs_effective = macs * (1.0 - s_eff * p.sparse_compute_efficiency)
    compute_time = macs_effective / tput
    memory_time = bytes_moved / p.bandwidth

    conversion_overhead = 0.0
    if task.kind in p.high_precision_kinds:
        any_int = any(f.is_integer for f in in_formats) or any(
            f.is_integer for f in out_formats
        )
        if any_int:
            elems = sum(tensors[t].elem_count for t in task.inputs) + sum(
                tensors[t].elem_count for t in task.outputs
            )
            conversion_overhead = elems / p.convert_throughput

    latency = max(compute_time, memory_time) + conversion_overhead
    energy = bytes_moved * p.energy_per_byte
    memory_power = energy / latency if latency > 0 else 0.0
    return TaskMetrics(
        latency=latency,
        compute_time=compute_time,
        memory_time=memory_time,
        conversion_overhead=conversion_overhead,
        bytes_moved=bytes_moved,
        weight_bytes=wb,
        energy=energy,
        memory_power=memory_power,
        macs_effective=macs_effective,
    )


def estimate_task(
    task: HardwareTask,
    tensors: Mapping[str, Tensor],
    cfg: TaskConfig,
    p: HardwareProfile,
) -> TaskMetrics:
    """Price a task with uniform input/output formats (the common case)."""
    return price_task(
        task,
        tensors,
        [cfg.input_format] * len(task.inputs),
        [cfg.output_format] * len(task.outputs),
        cfg.kernel_format,
        cfg.sparsity,
        cfg.palette_bits,
        p,
    )


def summarize(
    per_task: Sequence[TaskMetrics], engines: int = 1, *, makespan: float | None = None
) -> ModelSummary:
    """Aggregate per-task metrics to a model summary.

    With engines == 1 total latency is the plain sum. With engines > 1 the
    caller passes the scheduler's makespan (keeps this module free of a
    scheduler dependency); simulate() wires that up.
    """
    if engines < 1:
        raise ValueError("engines must be >= 1")
    total_energy = sum(m.energy for m in per_task)
    if engines == 1:
        total_latency = sum(m.latency for m in per_task)
    else:
        if makespan is None:
            raise ValueError("engines > 1 requires the schedule makespan")
        total_latency = makespan
    return ModelSummary(
        total_latency=total_latency,
        total_energy=total_energy,
        memory_power=total_energy / total_latency if total_latency > 0 else 0.0,
        total_weight_bytes=sum(m.weight_bytes for m in per_task),
        total_bytes_moved=sum(m.bytes_moved for m in per_task),
        achieved_fps=1000.0 / total_latency if total_latency > 0 else None,
        task_count=len(per_task),
    )


def percent_delta(base: float, new: float) -> float:
    """Percent change, positive when ``new`` improves (decreases) on base.

    Raw float; display boundaries round via round_half_up(x, 2).
    """
    if base == 0:
        raise ZeroDivisionError("percent_delta base is 0")
    return 100.0 * (base - new) / base


def round_half_up(x: float, ndigits: int = 2) -> float:
    """Decimal half-up rounding (0.005 -> 0.01), unlike bankers' round()."""
    q = Decimal(1).scaleb(-ndigits)
    return float(Decimal(repr(float(x))).quantize(q, rounding=ROUND_HALF_UP))
