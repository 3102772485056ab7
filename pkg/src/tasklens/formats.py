"""Numeric storage formats shared by tensors, kernels, and hardware profiles."""

from __future__ import annotations

import enum


class NumericFormat(enum.Enum):
    """A storage format tag with a fixed bit width per element."""

    FP32 = ("fp32", 32)
    FP16 = ("fp16", 16)
    INT8 = ("int8", 8)
    INT4 = ("int4", 4)
    INT2 = ("int2", 2)

    def __init__(self, tag: str, bits: int) -> None:
        self.tag = tag
        self.bits = bits

    @property
    def is_integer(self) -> bool:
        return self.tag.startswith("int")

    @classmethod
    def from_tag(cls, tag: str) -> "NumericFormat":
        try:
            return _BY_TAG[tag]
        except KeyError:
            raise ValueError(f"unknown numeric format tag: {tag!r}") from None

    def __repr__(self) -> str:
        return f"NumericFormat.{self.name}"


_BY_TAG = {f.tag: f for f in NumericFormat}

# Stable order used for array encodings and deterministic tie-breaking.
FORMAT_ORDER: tuple[NumericFormat, ...] = (
    NumericFormat.FP32,
    NumericFormat.FP16,
    NumericFormat.INT8,
    NumericFormat.INT4,
    NumericFormat.INT2,
)
FORMAT_INDEX: dict[NumericFormat, int] = {f: i for i, f in enumerate(FORMAT_ORDER)}


def tensor_bytes(elem_count: int, fmt: NumericFormat) -> int:
    """Bytes to store elem_count elements, whole bytes, rounded up."""
    if elem_count < 0:
        raise ValueError("elem_count must be >= 0")
    # integer ceil: exact for any size, matches the vectorized pricer
    return (elem_count * fmt.bits + 7) // 8
