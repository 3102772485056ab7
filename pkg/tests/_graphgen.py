"""Seeded random graph builders used across test modules.

Kept out of conftest so the heavy corpus loops (1,000 propagation trials,
500 aggregation graphs) can import plain functions without fixture
overhead.
"""

from __future__ import annotations

import random

from tasklens.formats import NumericFormat
from tasklens.ir import HardwareTask, ModelGraph, Tensor

KINDS_WEIGHTED = ("conv2d", "matmul")
KINDS_PLAIN = ("elementwise", "softmax", "layernorm", "convert", "resize", "pool")


def random_graph(rng: random.Random, n_tasks: int, fmt_pool=None) -> ModelGraph:
    """Connected DAG with ids already topological; always validates."""
    fmts = fmt_pool or (NumericFormat.FP16,)
    tensors: dict[str, Tensor] = {}
    tasks: list[HardwareTask] = []

    def add_tensor(tid: str) -> str:
        tensors[tid] = Tensor(
            id=tid,
            elem_count=rng.choice((64, 256, 1024, 4096, 100_000)),
            format=rng.choice(fmts),
        )
        return tid

    add_tensor("in0")
    produced = ["in0"]
    for i in range(n_tasks):
        roll = rng.random()
        out = add_tensor(f"t{i}")
        if roll < 0.15 and len(produced) >= 2:
            a, b = rng.sample(produced, 2)
            tasks.append(HardwareTask(
                id=i, name=f"n{i}", kind="concat", inputs=(a, b), outputs=(out,),
            ))
        elif roll < 0.55:
            kind = rng.choice(KINDS_WEIGHTED)
            tasks.append(HardwareTask(
                id=i, name=f"n{i}", kind=kind,
                inputs=(rng.choice(produced),), outputs=(out,),
                weight_count=rng.choice((0, 128, 5_000, 1_000_000)),
                macs=rng.choice((10_000, 1_000_000, 500_000_000)),
                sparsity=rng.choice((0.0, 0.25, 0.5)),
            ))
        else:
            tasks.append(HardwareTask(
                id=i, name=f"n{i}", kind=rng.choice(KINDS_PLAIN),
                inputs=(rng.choice(produced),), outputs=(out,),
                macs=rng.choice((1_000, 50_000, 2_000_000)),
            ))
        produced.append(out)
    return ModelGraph(name=f"rand{rng.random():.6f}", tensors=tensors, tasks=tuple(tasks))


def chain_graph(kinds: list[str], elem: int = 1000) -> ModelGraph:
    """A -> B -> C ... straight line, one tensor between neighbors."""
    tensors = {"c0": Tensor(id="c0", elem_count=elem, format=NumericFormat.FP16)}
    tasks = []
    for i, kind in enumerate(kinds):
        out = f"c{i + 1}"
        tensors[out] = Tensor(id=out, elem_count=elem, format=NumericFormat.FP16)
        weighted = kind in KINDS_WEIGHTED
        tasks.append(HardwareTask(
            id=i, name=f"s{i}", kind=kind, inputs=(f"c{i}",), outputs=(out,),
            weight_count=1000 if weighted else 0,
            macs=100_000,
        ))
    return ModelGraph(name="chain", tensors=tensors, tasks=tuple(tasks))


def fanout_graph() -> ModelGraph:
    """A feeds both B and C from one tensor; D joins them."""
    t = {
        "x": Tensor(id="x", elem_count=512, format=NumericFormat.FP16),
        "mid": Tensor(id="mid", elem_count=512, format=NumericFormat.FP16),
        "b_out": Tensor(id="b_out", elem_count=512, format=NumericFormat.FP16),
        "c_out": Tensor(id="c_out", elem_count=512, format=NumericFormat.FP16),
        "d_out": Tensor(id="d_out", elem_count=1024, format=NumericFormat.FP16),
    }
    tasks = (
        HardwareTask(id=0, name="A", kind="conv2d", inputs=("x",), outputs=("mid",),
                     weight_count=100, macs=1000),
        HardwareTask(id=1, name="B", kind="elementwise", inputs=("mid",), outputs=("b_out",), macs=512),
        HardwareTask(id=2, name="C", kind="elementwise", inputs=("mid",), outputs=("c_out",), macs=512),
        HardwareTask(id=3, name="D", kind="concat", inputs=("b_out", "c_out"), outputs=("d_out",)),
    )
    return ModelGraph(name="fanout", tensors=t, tasks=tasks)
