"""Model intermediate representation: tensors, hardware tasks, graphs.

A compiled model is a DAG of hardware tasks connected through named tensors.
Each tensor has exactly one producing task (or none, for model inputs) and
any number of consumers, so an edge is fully determined by a tensor id.
Graphs are treated as immutable after construction; transformations return
new graphs.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import math
from dataclasses import dataclass, field, replace

from .errors import GraphValidationError, SchemaError, Underivable, Violation
from .formats import NumericFormat

TASK_KINDS: frozenset[str] = frozenset(
    {
        "conv2d",
        "matmul",
        "pool",
        "elementwise",
        "concat",
        "resize",
        "softmax",
        "layernorm",
        "convert",
    }
)

# kinds whose compute runs against kernel weights
WEIGHTED_KINDS: frozenset[str] = frozenset({"conv2d", "matmul"})

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Tensor:
    id: str
    elem_count: int
    format: NumericFormat
    shape: tuple[int, ...] | None = None


@dataclass(frozen=True)
class HardwareTask:
    id: int
    name: str
    kind: str
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    weight_count: int = 0
    kernel_format: NumericFormat = NumericFormat.FP16
    sparsity: float = 0.0
    palette_bits: int = 0
    macs: int | None = None
    group: str = ""
    code_ref: int | None = None

    @property
    def weighted(self) -> bool:
        return self.weight_count > 0


@dataclass
class ModelGraph:
    name: str
    tensors: dict[str, Tensor]
    tasks: tuple[HardwareTask, ...]
    schema_version: int = SCHEMA_VERSION
    fps_target: float | None = None
    # derived indexes, built once in __post_init__
    _producer: dict[str, int] = field(init=False, repr=False, compare=False)
    _consumers: dict[str, tuple[int, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        producer: dict[str, int] = {}
        consumers: dict[str, list[int]] = {tid: [] for tid in self.tensors}
        for task in self.tasks:
            for tid in task.outputs:
                # duplicate producers surface in validate_graph; keep first
                producer.setdefault(tid, task.id)
            for tid in task.inputs:
                if tid in consumers:
                    consumers[tid].append(task.id)
        self._producer = producer
        self._consumers = {tid: tuple(v) for tid, v in consumers.items()}

    def task(self, task_id: int) -> HardwareTask:
        return self.tasks[task_id]

    def producer_of(self, tensor_id: str) -> int | None:
        """Task id producing the tensor, or None for a model input."""
        return self._producer.get(tensor_id)

    def consumers_of(self, tensor_id: str) -> tuple[int, ...]:
        return self._consumers.get(tensor_id, ())

    def model_inputs(self) -> list[str]:
        return sorted(t for t in self.tensors if t not in self._producer)

    def model_outputs(self) -> list[str]:
        return sorted(t for t in self.tensors if not self._consumers.get(t))


# -----------------------------------------------------------------------------
# parsing
# -----------------------------------------------------------------------------


def _req(obj: dict, key: str, kind: type | tuple, ptr: str):
    if not isinstance(obj, dict):
        raise SchemaError(ptr, f"expected object, got {type(obj).__name__}")
    if key not in obj:
        raise SchemaError(f"{ptr}/{key}", "missing required field")
    val = obj[key]
    if not isinstance(val, kind) or isinstance(val, bool) and kind is not bool:
        want = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise SchemaError(f"{ptr}/{key}", f"expected {want}, got {type(val).__name__}")
    return val


def _opt(obj: dict, key: str, kind: type | tuple, ptr: str, default=None):
    if key not in obj or obj[key] is None:
        return default
    return _req(obj, key, kind, ptr)


def _format_from(obj: dict, key: str, ptr: str) -> NumericFormat:
    tag = _req(obj, key, str, ptr)
    try:
        return NumericFormat.from_tag(tag)
    except ValueError as exc:
        raise SchemaError(f"{ptr}/{key}", str(exc)) from None


def graph_from_json(doc: object) -> ModelGraph:
    """Build a ModelGraph from a parsed graph.json document.

    Raises SchemaError (with a JSON pointer) on structural problems; semantic
    problems are left to validate_graph.
    """
    if not isinstance(doc, dict):
        raise SchemaError("", f"expected object, got {type(doc).__name__}")
    version = _req(doc, "schema_version", int, "")
    if version != SCHEMA_VERSION:
        raise SchemaError("/schema_version", f"unsupported version {version}")
    name = _req(doc, "name", str, "")
    fps_target = _opt(doc, "fps_target", (int, float), "")
    if fps_target is not None:
        fps_target = float(fps_target)
        if fps_target <= 0:
            raise SchemaError("/fps_target", "must be positive")

    raw_tensors = _req(doc, "tensors", list, "")
    tensors: dict[str, Tensor] = {}
    for i, entry in enumerate(raw_tensors):
        ptr = f"/tensors/{i}"
        tid = _req(entry, "id", str, ptr)
        if tid in tensors:
            raise SchemaError(f"{ptr}/id", f"duplicate tensor id {tid!r}")
        elem = _req(entry, "elem_count", int, ptr)
        fmt = _format_from(entry, "format", ptr)
        shape_raw = _opt(entry, "shape", list, ptr)
        shape: tuple[int, ...] | None = None
        if shape_raw is not None:
            for j, dim in enumerate(shape_raw):
                if not isinstance(dim, int) or isinstance(dim, bool) or dim <= 0:
                    raise SchemaError(f"{ptr}/shape/{j}", "expected positive integer")
            shape = tuple(shape_raw)
        tensors[tid] = Tensor(id=tid, elem_count=elem, format=fmt, shape=shape)

    raw_tasks = _req(doc, "tasks", list, "")
    tasks: list[HardwareTask] = []
    for i, entry in enumerate(raw_tasks):
        ptr = f"/tasks/{i}"
        kind = _req(entry, "kind", str, ptr)
        if kind not in TASK_KINDS:
            raise SchemaError(f"{ptr}/kind", f"unknown task kind {kind!r}")
        inputs = _req(entry, "inputs", list, ptr)
        outputs = _req(entry, "outputs", list, ptr)
        for seq, label in ((inputs, "inputs"), (outputs, "outputs")):
            for j, tid in enumerate(seq):
                if not isinstance(tid, str):
                    raise SchemaError(f"{ptr}/{label}/{j}", "expected tensor id string")
        tasks.append(
            HardwareTask(
                id=_req(entry, "id", int, ptr),
                name=_req(entry, "name", str, ptr),
                kind=kind,
                inputs=tuple(inputs),
                outputs=tuple(outputs),
                weight_count=_req(entry, "weight_count", int, ptr),
                kernel_format=_format_from(entry, "kernel_format", ptr),
                sparsity=float(_req(entry, "sparsity", (int, float), ptr)),
                palette_bits=_req(entry, "palette_bits", int, ptr),
                macs=_opt(entry, "macs", int, ptr),
                group=_opt(entry, "group", str, ptr, default="") or "",
                code_ref=_opt(entry, "code_ref", int, ptr),
            )
        )

    return ModelGraph(
        name=name,
        tensors=tensors,
        tasks=tuple(tasks),
        schema_version=version,
        fps_target=fps_target,
    )


# -----------------------------------------------------------------------------
# validation
# -----------------------------------------------------------------------------


def validate_graph(g: ModelGraph) -> list[Violation]:
    """Collect every semantic violation; [] means the graph is valid.

    Order is deterministic: task-scoped violations sorted by task id, then
    tensor-scoped sorted by tensor id, then graph-scoped (id density, cycle).
    """
    task_v: list[Violation] = []
    tensor_v: list[Violation] = []
    graph_v: list[Violation] = []

    seen_producer: dict[str, int] = {}
    for task in sorted(g.tasks, key=lambda t: t.id):
        for tid in list(task.inputs) + list(task.outputs):
            if tid not in g.tensors:
                task_v.append(
                    Violation(
                        "dangling-tensor",
                        f"task {task.id} references unknown tensor {tid!r}",
                        task_id=task.id,
                        tensor_id=tid,
                    )
                )
        if not task.outputs:
            task_v.append(
                Violation("no-outputs", f"task {task.id} produces no tensors", task_id=task.id)
            )
        for tid in task.outputs:
            if tid in seen_producer:
                task_v.append(
                    Violation(
                        "duplicate-producer",
                        f"tensor {tid!r} produced by tasks {seen_producer[tid]} and {task.id}",
                        task_id=task.id,
                        tensor_id=tid,
                    )
                )
            else:
                seen_producer[tid] = task.id
        if task.weight_count < 0:
            task_v.append(
                Violation("bad-weight-count", f"task {task.id} weight_count < 0", task_id=task.id)
            )
        if not 0.0 <= task.sparsity < 1.0:
            task_v.append(
                Violation(
                    "bad-sparsity",
                    f"task {task.id} sparsity {task.sparsity} outside [0,1)",
                    task_id=task.id,
                )
            )
        if task.palette_bits not in range(0, 9):
            task_v.append(
                Violation(
                    "bad-palette",
                    f"task {task.id} palette_bits {task.palette_bits} outside 0..8",
                    task_id=task.id,
                )
            )
        if task.macs is not None and task.macs < 0:
            task_v.append(Violation("bad-macs", f"task {task.id} macs < 0", task_id=task.id))
        if task.kind == "concat" and (task.weight_count != 0 or (task.macs or 0) != 0):
            task_v.append(
                Violation(
                    "concat-weighted",
                    f"concat task {task.id} must have weight_count == 0 and macs == 0",
                    task_id=task.id,
                )
            )

    for tid in sorted(g.tensors):
        tensor = g.tensors[tid]
        if tensor.elem_count <= 0:
            tensor_v.append(
                Violation("bad-elem-count", f"tensor {tid!r} elem_count <= 0", tensor_id=tid)
            )
        if tensor.shape is not None and math.prod(tensor.shape) != tensor.elem_count:
            tensor_v.append(
                Violation(
                    "shape-mismatch",
                    f"tensor {tid!r} shape product {math.prod(tensor.shape)} "
                    f"!= elem_count {tensor.elem_count}",
                    tensor_id=tid,
                )
            )

    ids = sorted(t.id for t in g.tasks)
    if ids != list(range(len(g.tasks))):
        graph_v.append(
            Violation("task-id-density", "task ids are not dense integers 0..N-1")
        )
    elif not task_v:
        # cycle check only when references are clean enough to walk
        cycle = _find_cycle(g)
        if cycle is not None:
            graph_v.append(
                Violation(
                    "cycle",
                    "tasks form a cycle: " + " -> ".join(str(i) for i in cycle),
                )
            )

    return task_v + tensor_v + graph_v


def _successors(g: ModelGraph, task: HardwareTask) -> list[int]:
    out: set[int] = set()
    for tid in task.outputs:
        out.update(g.consumers_of(tid))
    return sorted(out)


def _find_cycle(g: ModelGraph) -> list[int] | None:
    """Return one directed cycle as a task-id list, or None."""
    indegree = {t.id: 0 for t in g.tasks}
    for task in g.tasks:
        for succ in _successors(g, task):
            indegree[succ] += 1
    queue = sorted(i for i, d in indegree.items() if d == 0)
    remaining = dict(indegree)
    order: list[int] = []
    while queue:
        node = queue.pop(0)
        order.append(node)
        for succ in _successors(g, g.tasks[node]):
            remaining[succ] -= 1
            if remaining[succ] == 0:
                queue.append(succ)
        queue.sort()
    done = set(order)
    leftover = sorted(i for i in remaining if i not in done)
    if not leftover:
        return None
    # every leftover node keeps an unprocessed predecessor, so walking
    # predecessors inside the leftover set must revisit a node
    leftover_set = set(leftover)
    preds: dict[int, list[int]] = {i: [] for i in leftover}
    for i in leftover:
        for succ in _successors(g, g.tasks[i]):
            if succ in leftover_set:
                preds[succ].append(i)
    path, seen = [leftover[0]], {leftover[0]}
    while True:
        node = min(preds[path[-1]])
        if node in seen:
            back = path[path.index(node):]
            cycle = list(reversed(back))
            pivot = cycle.index(min(cycle))
            return cycle[pivot:] + cycle[:pivot]
        path.append(node)
        seen.add(node)


def topological_order(g: ModelGraph) -> list[int]:
    """Kahn topological order, lowest task id first among ready tasks."""
    indegree = {t.id: 0 for t in g.tasks}
    for task in g.tasks:
        for succ in _successors(g, task):
            indegree[succ] += 1
    heap = [i for i, d in indegree.items() if d == 0]
    heapq.heapify(heap)
    order: list[int] = []
    while heap:
        node = heapq.heappop(heap)
        order.append(node)
        for succ in _successors(g, g.tasks[node]):
            indegree[succ] -= 1
            if indegree[succ] == 0:
                heapq.heappush(heap, succ)
    if len(order) != len(g.tasks):
        raise GraphValidationError(
            [Violation("cycle", "graph has no topological order")]
        )
    return order


# -----------------------------------------------------------------------------
# groups
# -----------------------------------------------------------------------------


@dataclass
class GroupNode:
    name: str
    path: str
    children: list["GroupNode"] = field(default_factory=list)
    task_ids: list[int] = field(default_factory=list)

    def child(self, name: str) -> "GroupNode | None":
        for c in self.children:
            if c.name == name:
                return c
        return None

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "path": self.path,
            "task_ids": list(self.task_ids),
            "children": [c.to_json() for c in self.children],
        }


def group_tree(g: ModelGraph) -> GroupNode:
    """Split group paths on "/" into a tree; sibling order lexicographic."""
    root = GroupNode(name="", path="")
    for task in sorted(g.tasks, key=lambda t: t.id):
        node = root
        if task.group:
            for part in task.group.split("/"):
                nxt = node.child(part)
                if nxt is None:
                    path = f"{node.path}/{part}" if node.path else part
                    nxt = GroupNode(name=part, path=path)
                    node.children.append(nxt)
                node = nxt
        node.task_ids.append(task.id)
    _sort_children(root)
    return root


def _sort_children(node: GroupNode) -> None:
    node.children.sort(key=lambda c: c.name)
    for child in node.children:
        _sort_children(child)


# -----------------------------------------------------------------------------
# serialization and hashing
# -----------------------------------------------------------------------------


def _tensor_to_json(t: Tensor) -> dict:
    out: dict = {"id": t.id, "elem_count": t.elem_count, "format": t.format.tag}
    if t.shape is not None:
        out["shape"] = list(t.shape)
    return out


def _task_to_json(t: HardwareTask) -> dict:
    out: dict = {
        "id": t.id,
        "name": t.name,
        "kind": t.kind,
        "inputs": list(t.inputs),
        "outputs": list(t.outputs),
        "weight_count": t.weight_count,
        "kernel_format": t.kernel_format.tag,
        "sparsity": t.sparsity,
        "palette_bits": t.palette_bits,
        "group": t.group,
    }
    if t.macs is not None:
        out["macs"] = t.macs
    if t.code_ref is not None:
        out["code_ref"] = t.code_ref
    return out


def graph_to_json(g: ModelGraph) -> dict:
    doc: dict = {
        "schema_version": g.schema_version,
        "name": g.name,
        "tensors": [_tensor_to_json(g.tensors[t]) for t in sorted(g.tensors)],
        "tasks": [_task_to_json(t) for t in sorted(g.tasks, key=lambda t: t.id)],
    }
    if g.fps_target is not None:
        doc["fps_target"] = g.fps_target
    return doc


def serialize_graph(g: ModelGraph) -> bytes:
    """Canonical serialization: sorted keys, no insignificant whitespace."""
    return json.dumps(
        graph_to_json(g), sort_keys=True, separators=(",", ":"), ensure_ascii=False
    ).encode("utf-8")


def graph_hash(g: ModelGraph) -> str:
    """SHA-256 hex digest of the canonical serialization."""
    return hashlib.sha256(serialize_graph(g)).hexdigest()


# -----------------------------------------------------------------------------
# derivation of omitted work counts
# -----------------------------------------------------------------------------


def _shaped(g: ModelGraph, task: HardwareTask, tid: str) -> tuple[int, ...]:
    shape = g.tensors[tid].shape
    if shape is None:
        raise Underivable(task.id, task.kind, f"tensor {tid!r} has no shape")
    return shape


def _derive_macs(g: ModelGraph, task: HardwareTask, pool_window: int) -> int:
    if task.kind == "concat":
        return 0
    if not task.outputs:
        raise Underivable(task.id, task.kind, "no outputs")
    out_elems = sum(g.tensors[t].elem_count for t in task.outputs)
    if task.kind == "conv2d":
        shape = _shaped(g, task, task.outputs[0])
        if len(shape) < 2:
            raise Underivable(task.id, task.kind, "output shape rank < 2")
        # NCHW for rank >= 3, channels-last otherwise
        out_channels = shape[1] if len(shape) >= 3 else shape[-1]
        if out_channels == 0:
            raise Underivable(task.id, task.kind, "zero output channels")
        return out_elems * task.weight_count // out_channels
    if task.kind == "matmul":
        in_shape = _shaped(g, task, task.inputs[0]) if task.inputs else None
        if not in_shape:
            raise Underivable(task.id, task.kind, "no input shape for K")
        k = in_shape[-1]
        return out_elems * k
    if task.kind == "pool":
        return out_elems * pool_window
    if task.kind in {"elementwise", "softmax", "layernorm", "convert", "resize"}:
        return out_elems
    raise Underivable(task.id, task.kind, "no derivation rule")


def derive_task_work(g: ModelGraph, pool_window: int = 4) -> ModelGraph:
    """Fill omitted macs from shapes; explicitly given macs are kept.

    Idempotent: a second application changes nothing.
    """
    if all(t.macs is not None for t in g.tasks):
        return g
    new_tasks = tuple(
        t if t.macs is not None else replace(t, macs=_derive_macs(g, t, pool_window))
        for t in g.tasks
    )
    return ModelGraph(
        name=g.name,
        tensors=g.tensors,
        tasks=new_tasks,
        schema_version=g.schema_version,
        fps_target=g.fps_target,
    )
