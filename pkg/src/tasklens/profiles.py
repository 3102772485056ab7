"""Hardware profiles: the constants behind the roofline cost model.

All numbers live in profile JSON files; nothing hardware-specific is coded.
Units: bandwidth B/ms, convert_throughput elements/ms, energy_per_byte µJ/B,
throughput macs/ms (element-ops for weightless kinds).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path

from .errors import ProfileError, UnsupportedFormat
from .formats import NumericFormat
from .ir import TASK_KINDS

DEFAULT_PROFILE_NAME = "generic-npu-v1"


@dataclass(frozen=True, eq=False)
class HardwareProfile:
    name: str
    bandwidth: float
    convert_throughput: float
    energy_per_byte: float
    io_formats: tuple[NumericFormat, ...]
    kernel_formats: tuple[NumericFormat, ...]
    sparsity_levels: tuple[float, ...]
    throughput: dict[tuple[str, NumericFormat], float | None]
    high_precision_kinds: frozenset[str] = frozenset({"softmax", "layernorm"})
    sparse_compute_efficiency: float = 0.5
    engines: int = 1
    extra: dict = field(default_factory=dict, repr=False)

    def supports(self, kind: str, fmt: NumericFormat) -> bool:
        return self.throughput.get((kind, fmt)) is not None

    def throughput_for(self, kind: str, fmt: NumericFormat, task_id: int | None = None) -> float:
        value = self.throughput.get((kind, fmt))
        if value is None:
            raise UnsupportedFormat(kind, fmt.tag, task_id)
        return value

    def to_json(self) -> dict:
        table: dict[str, dict[str, float | None]] = {}
        for (kind, fmt), value in self.throughput.items():
            table.setdefault(kind, {})[fmt.tag] = value
        return {
            "name": self.name,
            "bandwidth": self.bandwidth,
            "convert_throughput": self.convert_throughput,
            "energy_per_byte": self.energy_per_byte,
            "engines": self.engines,
            "sparse_compute_efficiency": self.sparse_compute_efficiency,
            "high_precision_kinds": sorted(self.high_precision_kinds),
            "io_formats": [f.tag for f in self.io_formats],
            "kernel_formats": [f.tag for f in self.kernel_formats],
            "sparsity_levels": list(self.sparsity_levels),
            "throughput": {k: table[k] for k in sorted(table)},
        }


def _positive(doc: dict, key: str) -> float:
    value = doc.get(key)
    if not isinstance(value, (int, float)) or isinstance(value, bool) or value <= 0:
        raise ProfileError(f"profile field {key!r} must be a positive number")
    return float(value)


def _format_list(doc: dict, key: str) -> tuple[NumericFormat, ...]:
    raw = doc.get(key)
    if not isinstance(raw, list) or not raw:
        raise ProfileError(f"profile field {key!r} must be a nonempty list")
    try:
        return tuple(NumericFormat.from_tag(t) for t in raw)
    except ValueError as exc:
        raise ProfileError(f"{key}: {exc}") from None


def profile_from_json(doc: object) -> HardwareProfile:
    if not isinstance(doc, dict):
        raise ProfileError("profile document must be a JSON object")
    name = doc.get("name")
    if not isinstance(name, str) or not name:
        raise ProfileError("profile needs a name")

    io_formats = _format_list(doc, "io_formats")
    kernel_formats = _format_list(doc, "kernel_formats")

    raw_levels = doc.get("sparsity_levels")
    if not isinstance(raw_levels, list) or not raw_levels:
        raise ProfileError("profile field 'sparsity_levels' must be a nonempty list")
    levels: list[float] = []
    for s in raw_levels:
        if not isinstance(s, (int, float)) or isinstance(s, bool) or not 0.0 <= s < 1.0:
            raise ProfileError(f"sparsity level {s!r} outside [0,1)")
        levels.append(float(s))

    engines = doc.get("engines", 1)
    if not isinstance(engines, int) or isinstance(engines, bool) or engines < 1:
        raise ProfileError("profile field 'engines' must be a positive integer")

    efficiency = doc.get("sparse_compute_efficiency", 0.5)
    if not isinstance(efficiency, (int, float)) or not 0.0 <= efficiency <= 1.0:
        raise ProfileError("sparse_compute_efficiency must be in [0,1]")

    hp_raw = doc.get("high_precision_kinds", [])
    if not isinstance(hp_raw, list):
        raise ProfileError("high_precision_kinds must be a list")
    for kind in hp_raw:
        if kind not in TASK_KINDS:
            raise ProfileError(f"high_precision_kinds names unknown kind {kind!r}")

    raw_table = doc.get("throughput")
    if not isinstance(raw_table, dict):
        raise ProfileError("profile field 'throughput' must be an object")
    throughput: dict[tuple[str, NumericFormat], float | None] = {}
    for kind, row in raw_table.items():
        if kind not in TASK_KINDS:
            raise ProfileError(f"throughput names unknown kind {kind!r}")
        if not isinstance(row, dict):
            raise ProfileError(f"throughput[{kind!r}] must be an object")
        for tag, value in row.items():
            fmt = NumericFormat.from_tag(tag)
            if value is None:
                throughput[(kind, fmt)] = None  # explicit "unsupported"
            elif isinstance(value, (int, float)) and not isinstance(value, bool) and value > 0:
                throughput[(kind, fmt)] = float(value)
            else:
                raise ProfileError(f"throughput[{kind}][{tag}] must be positive or null")

    # every (kind, usable format) must be present, even if null
    usable = set(io_formats) | set(kernel_formats)
    for kind in sorted(TASK_KINDS):
        for fmt in usable:
            if (kind, fmt) not in throughput:
                raise ProfileError(f"throughput missing entry for ({kind}, {fmt.tag})")

    return HardwareProfile(
        name=name,
        bandwidth=_positive(doc, "bandwidth"),
        convert_throughput=_positive(doc, "convert_throughput"),
        energy_per_byte=_positive(doc, "energy_per_byte"),
        io_formats=io_formats,
        kernel_formats=kernel_formats,
        sparsity_levels=tuple(levels),
        throughput=throughput,
        high_precision_kinds=frozenset(hp_raw),
        sparse_compute_efficiency=float(efficiency),
        engines=engines,
    )


def load_profile(path: str | Path) -> HardwareProfile:
    try:
        doc = json.loads(Path(path).read_text("utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ProfileError(f"cannot read profile {path}: {exc}") from None
    return profile_from_json(doc)


@lru_cache(maxsize=1)
def default_profile() -> HardwareProfile:
    data = resources.files(__package__).joinpath(f"profiles/{DEFAULT_PROFILE_NAME}.json")
    return profile_from_json(json.loads(data.read_text("utf-8")))
