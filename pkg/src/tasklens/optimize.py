"""Optimization engine: presets, targeted selections, dataflow format
propagation, whole-model simulation, option enumeration, budget planning.

A selection is replayed as an ordered list of writes. A task entry's
input_format is written to every input tensor (which retargets the producers'
output side too, since a tensor has exactly one format); output_format is
written to every output tensor. Writes apply preset-first then targeted
entries in list order; the last write to a tensor wins and disagreements are
reported as conflicts, never errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from . import costs, pricing, scheduling
from .costs import ModelSummary, TaskConfig, TaskMetrics, percent_delta
from .errors import UnknownTask, UnsupportedFormat
from .formats import FORMAT_INDEX, FORMAT_ORDER, NumericFormat
from .ir import ModelGraph
from .profiles import HardwareProfile


# presets


@dataclass(frozen=True)
class Preset:
    """A model-wide rule applied to every task before targeted entries.

    Fields set to None leave that part of a task's config untouched, so each
    preset is a total function TaskConfig -> TaskConfig.
    """

    id: str
    description: str
    io_format: NumericFormat | None = None
    kernel_format: NumericFormat | None = None
    sparsity: float | None = None
    palette_bits: int | None = None

    def apply(self, cfg: TaskConfig) -> TaskConfig:
        out = cfg
        if self.io_format is not None:
            out = replace(out, input_format=self.io_format, output_format=self.io_format)
        if self.kernel_format is not None:
            out = replace(out, kernel_format=self.kernel_format)
        if self.sparsity is not None:
            out = replace(out, sparsity=self.sparsity)
        if self.palette_bits is not None:
            out = replace(out, palette_bits=self.palette_bits)
        return out


_INT8 = NumericFormat.INT8
_FP16 = NumericFormat.FP16

# format/prune presets clear palettization so they take effect on palettized
# baselines; palettize leaves sparsity stored but pricing ignores it
PRESETS: dict[str, Preset] = {
    p.id: p
    for p in (
        Preset("int8-io-kernel", "Quantize every task's I/O and kernel to int8",
               io_format=_INT8, kernel_format=_INT8, palette_bits=0),
        Preset("int8-kernel-only", "Quantize every kernel to int8, keep I/O formats",
               kernel_format=_INT8, palette_bits=0),
        Preset("prune-50", "Sparsify every weighted kernel to 50%",
               sparsity=0.5, palette_bits=0),
        Preset("prune-75", "Sparsify every weighted kernel to 75%",
               sparsity=0.75, palette_bits=0),
        Preset("palettize-4bit", "Palettize every weighted kernel to a 16-entry table",
               palette_bits=4),
        Preset("fp16-baseline", "Reset every task to dense fp16",
               io_format=_FP16, kernel_format=_FP16, sparsity=0.0, palette_bits=0),
    )
}


# selections


@dataclass(frozen=True)
class SelectionEntry:
    task_id: int
    config: TaskConfig

    def to_json(self) -> dict:
        out = {"task": self.task_id}
        out.update(self.config.to_json())
        return out

    @classmethod
    def from_json(cls, doc: dict) -> "SelectionEntry":
        if not isinstance(doc, dict):
            raise ValueError("selection entry must be an object")
        if "task" not in doc or not isinstance(doc["task"], int):
            raise ValueError("selection entry needs an integer 'task'")
        try:
            cfg = TaskConfig.from_json(doc)
        except (KeyError, ValueError, TypeError) as exc:
            raise ValueError(f"bad selection entry for task {doc['task']}: {exc}") from None
        return cls(task_id=doc["task"], config=cfg)


@dataclass(frozen=True)
class OptimizationSelection:
    preset: str | None = None
    targeted: tuple[SelectionEntry, ...] = ()

    def to_json(self) -> dict:
        out: dict = {"targeted": [e.to_json() for e in self.targeted]}
        if self.preset is not None:
            out["preset"] = self.preset
        return out

    @classmethod
    def from_json(cls, doc: object) -> "OptimizationSelection":
        if doc is None:
            return cls()
        if not isinstance(doc, dict):
            raise ValueError("selection must be an object")
        preset = doc.get("preset")
        if preset is not None:
            if not isinstance(preset, str) or preset not in PRESETS:
                raise ValueError(f"unknown preset: {preset!r}")
        raw = doc.get("targeted", [])
        if not isinstance(raw, list):
            raise ValueError("'targeted' must be a list")
        return cls(
            preset=preset,
            targeted=tuple(SelectionEntry.from_json(e) for e in raw),
        )


EMPTY_SELECTION = OptimizationSelection()


@dataclass(frozen=True)
class Conflict:
    """A tensor written twice with different formats; the later write won."""

    tensor_id: str
    prior: str
    winner: str
    source: str

    def to_json(self) -> dict:
        return {
            "tensor_id": self.tensor_id,
            "prior": self.prior,
            "winner": self.winner,
            "source": self.source,
        }


# selection resolution (formats + per-task configs)


@dataclass
class _State:
    fmt: np.ndarray  # per-tensor format codes
    kernel: np.ndarray
    sparsity: np.ndarray
    palette: np.ndarray
    conflicts: list[Conflict]


def _check_tasks(g: ModelGraph, selection: OptimizationSelection) -> None:
    n = len(g.tasks)
    for entry in selection.targeted:
        if not 0 <= entry.task_id < n:
            raise UnknownTask(entry.task_id)


def _resolve(g: ModelGraph, selection: OptimizationSelection) -> _State:
    pg = pricing.priced_graph(g)
    state = _State(
        fmt=pg.base_fmt.copy(),
        kernel=pg.base_kernel.copy(),
        sparsity=pg.base_sparsity.copy(),
        palette=pg.base_palette.copy(),
        conflicts=[],
    )
    written = np.full(len(pg.tensor_ids), -1, dtype=np.int64)

    def write(tensor_idx: np.ndarray, code: int, source: str) -> None:
        for idx in tensor_idx:
            prev = written[idx]
            if prev != -1 and prev != code:
                state.conflicts.append(
                    Conflict(
                        tensor_id=pg.tensor_ids[idx],
                        prior=FORMAT_ORDER[int(prev)].tag,
                        winner=FORMAT_ORDER[int(code)].tag,
                        source=source,
                    )
                )
            written[idx] = code
            state.fmt[idx] = code

    if selection.preset is not None:
        preset = PRESETS[selection.preset]
        if preset.kernel_format is not None:
            state.kernel[:] = FORMAT_INDEX[preset.kernel_format]
        if preset.sparsity is not None:
            state.sparsity[:] = preset.sparsity
        if preset.palette_bits is not None:
            state.palette[:] = preset.palette_bits
        if preset.io_format is not None:
            code = FORMAT_INDEX[preset.io_format]
            for task_id in range(pg.n_tasks):
                write(pg.inputs_of[task_id], code, f"preset:{preset.id}")
                write(pg.outputs_of[task_id], code, f"preset:{preset.id}")

    for i, entry in enumerate(selection.targeted):
        source = f"targeted[{i}]"
        tid = entry.task_id
        state.kernel[tid] = FORMAT_INDEX[entry.config.kernel_format]
        state.sparsity[tid] = entry.config.sparsity
        state.palette[tid] = entry.config.palette_bits
        write(pg.inputs_of[tid], FORMAT_INDEX[entry.config.input_format], source)
        write(pg.outputs_of[tid], FORMAT_INDEX[entry.config.output_format], source)

    return state


def _touching_changed(pg: pricing.PricedGraph, changed_tensor: np.ndarray) -> np.ndarray:
    """Boolean per task: touches at least one changed tensor."""
    flags = changed_tensor.astype(np.float64)
    in_hit = pg._by_task(pg.in_task, flags[pg.in_tensor]) > 0
    out_hit = pg._by_task(pg.out_task, flags[pg.out_tensor]) > 0
    return in_hit | out_hit


@dataclass(frozen=True)
class PropagationResult:
    formats: dict[str, NumericFormat]  # every tensor's final format
    affected_task_ids: frozenset[int]
    conflicts: tuple[Conflict, ...]


def propagate_formats(g: ModelGraph, selection: OptimizationSelection) -> PropagationResult:
    """Final per-tensor formats after replaying a selection's writes.

    affected = every task touching a tensor whose format changed from the
    baseline declaration.
    """
    _check_tasks(g, selection)
    pg = pricing.priced_graph(g)
    state = _resolve(g, selection)
    changed = state.fmt != pg.base_fmt
    affected = frozenset(int(i) for i in np.flatnonzero(_touching_changed(pg, changed)))
    formats = {
        tensor_id: FORMAT_ORDER[int(state.fmt[i])]
        for i, tensor_id in enumerate(pg.tensor_ids)
    }
    return PropagationResult(
        formats=formats, affected_task_ids=affected, conflicts=tuple(state.conflicts)
    )


# simulation


@dataclass(frozen=True)
class TaskSimRow:
    task_id: int
    base: TaskMetrics
    opt: TaskMetrics
    config: TaskConfig
    changed: bool


@dataclass(frozen=True)
class SimulationResult:
    per_task: tuple[TaskSimRow, ...]
    summary_base: ModelSummary
    summary_opt: ModelSummary
    affected_task_ids: frozenset[int]
    conflicts: tuple[Conflict, ...]
    delta_latency_pct: float
    delta_power_pct: float
    schedule_base: tuple[scheduling.ScheduleEntry, ...] | None = None
    schedule_opt: tuple[scheduling.ScheduleEntry, ...] | None = None


def _effective_config(
    pg: pricing.PricedGraph, state: _State, task_id: int
) -> TaskConfig:
    ins = pg.inputs_of[task_id]
    outs = pg.outputs_of[task_id]
    in_code = state.fmt[ins[0]] if len(ins) else state.fmt[outs[0]]
    out_code = state.fmt[outs[0]] if len(outs) else in_code
    return TaskConfig(
        input_format=FORMAT_ORDER[int(in_code)],
        output_format=FORMAT_ORDER[int(out_code)],
        kernel_format=FORMAT_ORDER[int(state.kernel[task_id])],
        sparsity=float(state.sparsity[task_id]),
        palette_bits=int(state.palette[task_id]),
    )


def _summary(
    g: ModelGraph,
    p: HardwareProfile,
    metrics: list[TaskMetrics],
) -> tuple[ModelSummary, tuple[scheduling.ScheduleEntry, ...] | None]:
    if p.engines == 1:
        return costs.summarize(metrics, engines=1), None
    entries, makespan = scheduling.schedule(
        g, [m.latency for m in metrics], engines=p.engines
    )
    return costs.summarize(metrics, engines=p.engines, makespan=makespan), tuple(entries)


def simulate(
    g: ModelGraph, selection: OptimizationSelection, p: HardwareProfile
) -> SimulationResult:
    """Price the whole model under a selection; pure in (g, selection, p)."""
    _check_tasks(g, selection)
    pg = pricing.priced_graph(g)
    state = _resolve(g, selection)

    base = pg.baseline(p)
    opt = pricing.price_all(pg, p, state.fmt, state.kernel, state.sparsity, state.palette)

    changed_tensor = state.fmt != pg.base_fmt
    cfg_changed = (
        (state.kernel != pg.base_kernel)
        | (state.sparsity != pg.base_sparsity)
        | (state.palette != pg.base_palette)
    )
    changed = cfg_changed | _touching_changed(pg, changed_tensor)

    base_list = base.to_list()
    opt_list = opt.to_list()
    rows = tuple(
        TaskSimRow(
            task_id=i,
            base=base_list[i],
            opt=opt_list[i],
            config=_effective_config(pg, state, i),
            changed=bool(changed[i]),
        )
        for i in range(pg.n_tasks)
    )

    summary_base, sched_base = _summary(g, p, base_list)
    summary_opt, sched_opt = _summary(g, p, opt_list)
    if summary_base.total_latency > 0:
        delta_latency = percent_delta(summary_base.total_latency, summary_opt.total_latency)
    else:
        delta_latency = 0.0
    if summary_base.memory_power > 0:
        delta_power = percent_delta(summary_base.memory_power, summary_opt.memory_power)
    else:
        delta_power = 0.0

    return SimulationResult(
        per_task=rows,
        summary_base=summary_base,
        summary_opt=summary_opt,
        affected_task_ids=frozenset(int(i) for i in np.flatnonzero(changed)),
        conflicts=tuple(state.conflicts),
        delta_latency_pct=delta_latency,
        delta_power_pct=delta_power,
        schedule_base=sched_base,
        schedule_opt=sched_opt,
    )


# option enumeration


@dataclass(frozen=True)
class OptimizationOption:
    cfg: TaskConfig
    metrics: TaskMetrics
    delta_latency_pct: float
    delta_power_pct: float
    delta_weight_bytes_pct: float


def _neighborhood(g: ModelGraph, task_id: int) -> list[int]:
    task = g.tasks[task_id]
    nb = {task_id}
    for tensor_id in tuple(task.inputs) + tuple(task.outputs):
        producer = g.producer_of(tensor_id)
        if producer is not None:
            nb.add(producer)
        nb.update(g.consumers_of(tensor_id))
    return sorted(nb)


def _price_with_overrides(
    g: ModelGraph,
    pg: pricing.PricedGraph,
    p: HardwareProfile,
    state: _State,
    task_id: int,
    fmt_override: Mapping[int, int],
    cfg_override: TaskConfig | None,
) -> TaskMetrics:
    task = g.tasks[task_id]

    def fmt_of(idx: int) -> NumericFormat:
        return FORMAT_ORDER[int(fmt_override.get(idx, state.fmt[idx]))]

    in_formats = [fmt_of(int(i)) for i in pg.inputs_of[task_id]]
    out_formats = [fmt_of(int(i)) for i in pg.outputs_of[task_id]]
    if cfg_override is not None:
        kernel = cfg_override.kernel_format
        sparsity = cfg_override.sparsity
        palette = cfg_override.palette_bits
    else:
        kernel = FORMAT_ORDER[int(state.kernel[task_id])]
        sparsity = float(state.sparsity[task_id])
        palette = int(state.palette[task_id])
    return costs.price_task(
        task, g.tensors, in_formats, out_formats, kernel, sparsity, palette, p
    )


@dataclass(frozen=True)
class _Candidate:
    option: OptimizationOption
    gain_ms: float  # neighborhood latency reduction
    axis: tuple[int, int, int, int]


def _pct_or_zero(base: float, new: float) -> float:
    return percent_delta(base, new) if base > 0 else 0.0


def _candidates(
    g: ModelGraph,
    task_id: int,
    state: _State,
    p: HardwareProfile,
) -> list[_Candidate]:
    pg = pricing.priced_graph(g)
    task = g.tasks[task_id]
    nb = _neighborhood(g, task_id)

    base_metrics: dict[int, TaskMetrics] = {}
    for tid in nb:
        base_metrics[tid] = _price_with_overrides(g, pg, p, state, tid, {}, None)
    base_lat = sum(base_metrics[tid].latency for tid in nb)
    base_energy = sum(base_metrics[tid].energy for tid in nb)
    base_power = base_energy / base_lat if base_lat > 0 else 0.0
    base_wb = sum(base_metrics[tid].weight_bytes for tid in nb)

    if task.weighted:
        kernel_axis: Sequence[NumericFormat] = p.kernel_formats
        sparsity_axis: Sequence[float] = p.sparsity_levels
    else:
        # weightless: kernel/sparsity axes collapse to the current value
        kernel_axis = (FORMAT_ORDER[int(state.kernel[task_id])],)
        sparsity_axis = (float(state.sparsity[task_id]),)

    out: list[_Candidate] = []
    for ii, in_fmt in enumerate(p.io_formats):
        for oi, out_fmt in enumerate(p.io_formats):
            fmt_override = {
                **{int(idx): FORMAT_INDEX[in_fmt] for idx in pg.inputs_of[task_id]},
                **{int(idx): FORMAT_INDEX[out_fmt] for idx in pg.outputs_of[task_id]},
            }
            for ki, kernel_fmt in enumerate(kernel_axis):
                for si, sparsity in enumerate(sparsity_axis):
                    cfg = TaskConfig(
                        input_format=in_fmt,
                        output_format=out_fmt,
                        kernel_format=kernel_fmt,
                        sparsity=sparsity,
                        palette_bits=0,
                    )
                    try:
                        own = _price_with_overrides(
                            g, pg, p, state, task_id, fmt_override, cfg
                        )
                        new_lat = own.latency
                        new_energy = own.energy
                        new_wb = own.weight_bytes
                        for tid in nb:
                            if tid == task_id:
                                continue
                            m = _price_with_overrides(
                                g, pg, p, state, tid, fmt_override, None
                            )
                            new_lat += m.latency
                            new_energy += m.energy
                            new_wb += m.weight_bytes
                    except UnsupportedFormat:
                        continue  # filtered by profile support
                    new_power = new_energy / new_lat if new_lat > 0 else 0.0
                    out.append(
                        _Candidate(
                            option=OptimizationOption(
                                cfg=cfg,
                                metrics=own,
                                delta_latency_pct=_pct_or_zero(base_lat, new_lat),
                                delta_power_pct=_pct_or_zero(base_power, new_power),
                                delta_weight_bytes_pct=_pct_or_zero(base_wb, new_wb),
                            ),
                            gain_ms=base_lat - new_lat,
                            axis=(ii, oi, ki, si),
                        )
                    )
    return out


def enumerate_options(
    g: ModelGraph,
    task_id: int,
    current: OptimizationSelection,
    p: HardwareProfile,
) -> list[OptimizationOption]:
    """All option combinations for one task under the current selection.

    Deltas compare against the task's current state and fold in propagation
    side-effects on neighbor tasks (an input format change re-prices the
    producer, an output change re-prices the consumers). Sorted by descending
    latency savings; ties resolve in option-tuple order.
    """
    if not 0 <= task_id < len(g.tasks):
        raise UnknownTask(task_id)
    _check_tasks(g, current)
    state = _resolve(g, current)
    cands = _candidates(g, task_id, state, p)
    cands.sort(key=lambda c: (-c.option.delta_latency_pct, c.axis))
    return [c.option for c in cands]


# budget planning


OptionFilter = Callable[[int, OptimizationOption], bool]


def _total_latency(
    g: ModelGraph, p: HardwareProfile, arrays: pricing.MetricArrays
) -> float:
    if p.engines == 1:
        # left-to-right float sum, matching summarize() exactly
        return float(sum(arrays.latency.tolist()))
    _, makespan = scheduling.schedule(g, arrays.latency.tolist(), engines=p.engines)
    return makespan


def plan_to_budget(
    g: ModelGraph,
    p: HardwareProfile,
    latency_budget: float,
    allowed: OptionFilter | None = None,
) -> OptimizationSelection | None:
    """Greedy plan: repeatedly optimize the task with the biggest payoff.

    Each round picks the not-yet-targeted task whose best allowed option
    gives the largest whole-model latency reduction (ties: lower id), until
    the simulated total meets the budget. Returns None when infeasible.
    """
    if latency_budget <= 0:
        raise ValueError("latency_budget must be positive")
    pg = pricing.priced_graph(g)
    state = _resolve(g, EMPTY_SELECTION)
    total = _total_latency(g, p, pg.baseline(p))
    if total <= latency_budget:
        return EMPTY_SELECTION

    entries: list[SelectionEntry] = []
    optimized: set[int] = set()
    best: dict[int, _Candidate | None] = {}
    dirty = set(range(len(g.tasks)))

    while True:
        for tid in sorted(dirty - optimized):
            options = [
                c
                for c in _candidates(g, tid, state, p)
                if c.gain_ms > 0 and (allowed is None or allowed(tid, c.option))
            ]
            options.sort(key=lambda c: (-c.gain_ms, c.axis))
            best[tid] = options[0] if options else None
        dirty.clear()

        pick_id: int | None = None
        pick: _Candidate | None = None
        for tid in sorted(set(range(len(g.tasks))) - optimized):
            cand = best.get(tid)
            if cand is None:
                continue
            if pick is None or cand.gain_ms > pick.gain_ms:
                pick, pick_id = cand, tid
        if pick is None or pick_id is None:
            return None  # nothing left that helps: infeasible

        cfg = pick.option.cfg
        entries.append(SelectionEntry(task_id=pick_id, config=cfg))
        optimized.add(pick_id)

        # apply the entry's writes to the working state
        changed: set[int] = set()
        for idx in pg.inputs_of[pick_id]:
            code = FORMAT_INDEX[cfg.input_format]
            if state.fmt[idx] != code:
                changed.add(int(idx))
            state.fmt[idx] = code
        for idx in pg.outputs_of[pick_id]:
            code = FORMAT_INDEX[cfg.output_format]
            if state.fmt[idx] != code:
                changed.add(int(idx))
            state.fmt[idx] = code
        state.kernel[pick_id] = FORMAT_INDEX[cfg.kernel_format]
        state.sparsity[pick_id] = cfg.sparsity
        state.palette[pick_id] = cfg.palette_bits

        if changed:
            mask = np.zeros(len(pg.tensor_ids), dtype=bool)
            mask[list(changed)] = True
            dirty.update(int(i) for i in np.flatnonzero(_touching_changed(pg, mask)))

        arrays = pricing.price_all(
            pg, p, state.fmt, state.kernel, state.sparsity, state.palette
        )
        total = _total_latency(g, p, arrays)
        if total <= latency_budget:
            return OptimizationSelection(preset=None, targeted=tuple(entries))


def preset_as_selection(g: ModelGraph, preset_id: str) -> OptimizationSelection:
    """The targeted-selection equivalent of a preset (used by tests/UI)."""
    preset = PRESETS[preset_id]
    pg = pricing.priced_graph(g)
    state = _resolve(g, EMPTY_SELECTION)
    entries = []
    for task in sorted(g.tasks, key=lambda t: t.id):
        entries.append(
            SelectionEntry(
                task_id=task.id,
                config=preset.apply(_effective_config(pg, state, task.id)),
            )
        )
    return OptimizationSelection(preset=None, targeted=tuple(entries))
