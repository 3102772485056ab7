"""Deterministic layered graph layout for the node-link view.

Longest-path layering, median-heuristic crossing reduction over 4 sweeps
(down, up, down, up), positions on a unit grid (x = order, y = layer).
Collapsed groups are laid out by re-running the same algorithm on the
quotient graph.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

from .ir import ModelGraph, group_tree

NodeKey = Hashable


@dataclass(frozen=True)
class LayoutNode:
    key: NodeKey  # task id, or group path for a collapsed supernode
    layer: int
    order: int
    x: float
    y: float

    def to_json(self) -> dict:
        out: dict = {"layer": self.layer, "order": self.order, "x": self.x, "y": self.y}
        if isinstance(self.key, int):
            out["task"] = self.key
        else:
            out["group"] = self.key
        return out


@dataclass(frozen=True)
class LayoutEdge:
    src: NodeKey
    dst: NodeKey
    tensor: str

    def to_json(self) -> dict:
        out: dict = {"tensor": self.tensor}
        out["from"] = self.src if isinstance(self.src, int) else str(self.src)
        out["to"] = self.dst if isinstance(self.dst, int) else str(self.dst)
        return out


@dataclass(frozen=True)
class Layout:
    nodes: tuple[LayoutNode, ...]
    edges: tuple[LayoutEdge, ...]

    def to_json(self) -> dict:
        return {
            "nodes": [n.to_json() for n in self.nodes],
            "edges": [e.to_json() for e in self.edges],
        }


# generic layered layout


def _longest_path_layers(
    nodes: Sequence[NodeKey], edges: Iterable[tuple[NodeKey, NodeKey]]
) -> dict[NodeKey, int]:
    preds: dict[NodeKey, list[NodeKey]] = {n: [] for n in nodes}
    succs: dict[NodeKey, list[NodeKey]] = {n: [] for n in nodes}
    indeg: dict[NodeKey, int] = {n: 0 for n in nodes}
    for u, v in edges:
        preds[v].append(u)
        succs[u].append(v)
        indeg[v] += 1
    layer: dict[NodeKey, int] = {}
    queue = [n for n in nodes if indeg[n] == 0]
    remaining = dict(indeg)
    while queue:
        node = queue.pop(0)
        layer[node] = max((layer[p] + 1 for p in preds[node]), default=0)
        for s in succs[node]:
            remaining[s] -= 1
            if remaining[s] == 0:
                queue.append(s)
    return layer if len(layer) == len(nodes) else {}


def count_crossings_between(
    edge_positions: Sequence[tuple[int, int]],
) -> int:
    """Crossings between two adjacent layers, given (upper_pos, lower_pos)
    pairs; counts inversions with a Fenwick tree."""
    if not edge_positions:
        return 0
    ordered = sorted(edge_positions)
    max_pos = max(p for _, p in ordered) + 1
    tree = [0] * (max_pos + 1)

    def add(i: int) -> None:
        i += 1
        while i <= max_pos:
            tree[i] += 1
            i += i & (-i)

    def up_to(i: int) -> int:  # count of values <= i
        i += 1
        total = 0
        while i > 0:
            total += tree[i]
            i -= i & (-i)
        return total

    crossings = 0
    seen = 0
    for _, lower in ordered:
        crossings += seen - up_to(lower)
        add(lower)
        seen += 1
    return crossings


class _Arrangement:
    """Mutable layer orders during the sweeps."""

    def __init__(
        self,
        nodes: Sequence[NodeKey],
        edges: Sequence[tuple[NodeKey, NodeKey]],
        layer: dict[NodeKey, int],
    ) -> None:
        self.layer = layer
        self.depth = max(layer.values(), default=0) + 1 if layer else 0
        self.layers: list[list[NodeKey]] = [[] for _ in range(self.depth)]
        for node in nodes:  # initial order: given node sequence (id ascending)
            self.layers[layer[node]].append(node)
        self.pos: dict[NodeKey, int] = {}
        for row in self.layers:
            for i, node in enumerate(row):
                self.pos[node] = i
        self.preds: dict[NodeKey, list[NodeKey]] = {n: [] for n in nodes}
        self.succs: dict[NodeKey, list[NodeKey]] = {n: [] for n in nodes}
        # adjacent-layer edge lists, for crossing counts
        self.gap_edges: list[list[tuple[NodeKey, NodeKey]]] = [
            [] for _ in range(max(self.depth - 1, 0))
        ]
        for u, v in edges:
            self.preds[v].append(u)
            self.succs[u].append(v)
            if layer[v] == layer[u] + 1:
                self.gap_edges[layer[u]].append((u, v))

    def gap_crossings(self, gap: int) -> int:
        if not 0 <= gap < len(self.gap_edges):
            return 0
        pairs = [(self.pos[u], self.pos[v]) for u, v in self.gap_edges[gap]]
        return count_crossings_between(pairs)

    def total_crossings(self) -> int:
        return sum(self.gap_crossings(i) for i in range(len(self.gap_edges)))

    def _median(self, values: list[int]) -> float:
        values = sorted(values)
        k = len(values)
        mid = k // 2
        if k % 2 == 1:
            return float(values[mid])
        return (values[mid - 1] + values[mid]) / 2.0

    def _reorder(self, index: int, neighbors: dict[NodeKey, list[NodeKey]]) -> None:
        row = self.layers[index]
        # median of neighbor positions; nodes without neighbors keep their slot
        keyed = []
        for i, node in enumerate(row):
            nbs = [self.pos[p] for p in neighbors[node]]
            med = self._median(nbs) if nbs else float(i)
            keyed.append((med, i, node))
        new_row = [node for _, _, node in sorted(keyed, key=lambda t: (t[0], t[1]))]
        if new_row == row:
            return
        before = self.gap_crossings(index - 1) + self.gap_crossings(index)
        old_pos = {n: self.pos[n] for n in row}
        self.layers[index] = new_row
        for i, node in enumerate(new_row):
            self.pos[node] = i
        after = self.gap_crossings(index - 1) + self.gap_crossings(index)
        if after > before:  # revert: accept only non-increasing crossings
            self.layers[index] = row
            for node, i in old_pos.items():
                self.pos[node] = i

    def sweep_down(self) -> None:
        for index in range(1, self.depth):
            self._reorder(index, self.preds)

    def sweep_up(self) -> None:
        for index in range(self.depth - 2, -1, -1):
            self._reorder(index, self.succs)


def layout_generic(
    nodes: Sequence[NodeKey],
    edges: Sequence[tuple[NodeKey, NodeKey, str]],
    fallback_layers: dict[NodeKey, int] | None = None,
) -> Layout:
    edges = list(dict.fromkeys(edges))  # dedupe, keep first-seen order
    plain = [(u, v) for u, v, _ in edges]
    layer = _longest_path_layers(nodes, plain)
    if not layer and nodes:
        # cyclic quotient graphs fall back to caller-provided layers
        layer = dict(fallback_layers or {n: 0 for n in nodes})
    arr = _Arrangement(list(nodes), plain, layer)
    arr.sweep_down()
    arr.sweep_up()
    arr.sweep_down()
    arr.sweep_up()
    out_nodes = []
    for depth_index, row in enumerate(arr.layers):
        for order, node in enumerate(row):
            out_nodes.append(
                LayoutNode(
                    key=node,
                    layer=depth_index,
                    order=order,
                    x=order * 1.0,
                    y=depth_index * 1.0,
                )
            )
    out_edges = tuple(LayoutEdge(src=u, dst=v, tensor=t) for u, v, t in edges)
    return Layout(nodes=tuple(out_nodes), edges=out_edges)


# task graphs and collapsed views


def graph_edges(g: ModelGraph) -> list[tuple[int, int, str]]:
    """Producer→consumer pairs, one per (edge, tensor), ordered by task ids."""
    out = []
    for task in sorted(g.tasks, key=lambda t: t.id):
        for tensor_id in task.inputs:
            producer = g.producer_of(tensor_id)
            if producer is not None and producer != task.id:
                out.append((producer, task.id, tensor_id))
    return out


def assign_layers(g: ModelGraph) -> dict[int, int]:
    """layer(t) = longest path length from any source task to t."""
    nodes = [t.id for t in sorted(g.tasks, key=lambda t: t.id)]
    return _longest_path_layers(nodes, [(u, v) for u, v, _ in graph_edges(g)])


def layout_graph(g: ModelGraph) -> Layout:
    nodes = [t.id for t in sorted(g.tasks, key=lambda t: t.id)]
    return layout_generic(nodes, graph_edges(g))


def _collapse_key(group: str, collapsed: Sequence[str]) -> str | None:
    """Outermost collapsed path covering a task's group, if any."""
    best: str | None = None
    for path in collapsed:
        if group == path or group.startswith(path + "/"):
            if best is None or len(path) < len(best):
                best = path
    return best


def layout_collapsed(g: ModelGraph, collapsed: Sequence[str]) -> Layout:
    """Layout of the quotient graph with the given group paths collapsed."""
    known = {node.path for node in _walk(group_tree(g))}
    collapse = sorted(set(p for p in collapsed if p in known))
    key_of: dict[int, NodeKey] = {}
    for task in g.tasks:
        target = _collapse_key(task.group, collapse)
        key_of[task.id] = target if target is not None else task.id

    nodes: list[NodeKey] = []
    seen: set[NodeKey] = set()
    for task in sorted(g.tasks, key=lambda t: t.id):
        key = key_of[task.id]
        if key not in seen:
            seen.add(key)
            nodes.append(key)

    base_layers = assign_layers(g)
    fallback: dict[NodeKey, int] = {}
    for task in sorted(g.tasks, key=lambda t: t.id):
        key = key_of[task.id]
        current = fallback.get(key)
        layer = base_layers.get(task.id, 0)
        fallback[key] = layer if current is None else min(current, layer)

    edges: list[tuple[NodeKey, NodeKey, str]] = []
    for u, v, tensor in graph_edges(g):
        src, dst = key_of[u], key_of[v]
        if src != dst:
            edges.append((src, dst, tensor))
    return layout_generic(nodes, edges, fallback_layers=fallback)


def _walk(node) -> Iterable:
    yield node
    for child in node.children:
        yield from _walk(child)
