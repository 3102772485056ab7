import math
import random

import pytest

from _graphgen import chain_graph, fanout_graph, random_graph
from tasklens.errors import GraphValidationError
from tasklens.ir import ModelGraph, topological_order
from tasklens.scheduling import ScheduleEntry, schedule


def critical_path(g, lat):
    """Longest node-weighted path, the floor for any schedule."""
    longest = [0.0] * len(g.tasks)
    for task_id in topological_order(g):
        task = g.tasks[task_id]
        best = 0.0
        for tensor_id in task.inputs:
            producer = g.producer_of(tensor_id)
            if producer is not None and producer != task_id:
                best = max(best, longest[producer])
        longest[task_id] = best + lat[task_id]
    return max(longest, default=0.0)


def check_invariants(g, lat, entries, makespan, engines):
    assert sorted(e.task_id for e in entries) == [t.id for t in g.tasks]
    assert all(0 <= e.engine < engines for e in entries)
    assert all(e.start >= 0 for e in entries)
    for e in entries:
        assert e.finish == pytest.approx(e.start + lat[e.task_id], abs=1e-12)
    # entries land sorted by (start, task id)
    keys = [(e.start, e.task_id) for e in entries]
    assert keys == sorted(keys)
    # an engine runs one task at a time
    by_engine = {}
    for e in sorted(entries, key=lambda e: (e.engine, e.start)):
        prev = by_engine.get(e.engine)
        if prev is not None:
            assert e.start >= prev.finish - 1e-12
        by_engine[e.engine] = e
    # data dependencies respected
    finish = {e.task_id: e.finish for e in entries}
    start = {e.task_id: e.start for e in entries}
    for task in g.tasks:
        for tensor_id in task.inputs:
            producer = g.producer_of(tensor_id)
            if producer is not None and producer != task.id:
                assert start[task.id] >= finish[producer] - 1e-12
    assert makespan == pytest.approx(max(e.finish for e in entries))
    total = math.fsum(lat)
    assert critical_path(g, lat) <= makespan + 1e-9
    assert makespan <= total + 1e-9


def test_single_engine_is_serial_topo_order():
    g = chain_graph(["conv2d", "elementwise", "pool", "softmax"])
    lat = [1.0, 0.5, 2.0, 0.25]
    entries, makespan = schedule(g, lat, engines=1)
    assert [e.task_id for e in entries] == [0, 1, 2, 3]
    assert makespan == pytest.approx(math.fsum(lat))
    for prev, cur in zip(entries, entries[1:]):
        assert cur.start == pytest.approx(prev.finish)  # no idle gaps


def test_single_engine_breaks_ties_by_task_id():
    g = fanout_graph()  # 0 feeds 1 and 2, both feed 3
    entries, _ = schedule(g, [1.0, 1.0, 1.0, 1.0], engines=1)
    assert [e.task_id for e in entries] == [0, 1, 2, 3]


def test_two_engine_diamond_hand_computed():
    g = fanout_graph()
    lat = {0: 1.0, 1: 2.0, 2: 1.0, 3: 1.0}
    entries, makespan = schedule(g, lat, engines=2)
    expected = [
        ScheduleEntry(task_id=0, engine=0, start=0.0, finish=1.0),
        ScheduleEntry(task_id=1, engine=1, start=1.0, finish=3.0),
        ScheduleEntry(task_id=2, engine=0, start=1.0, finish=2.0),
        ScheduleEntry(task_id=3, engine=0, start=3.0, finish=4.0),
    ]
    assert entries == expected
    assert makespan == 4.0
    assert makespan == critical_path(g, [lat[i] for i in range(4)])


def test_extra_engines_never_hurt():
    rng = random.Random(11)
    g = random_graph(rng, 24)
    lat = [rng.uniform(0.01, 2.0) for _ in g.tasks]
    makespans = [schedule(g, lat, engines=e)[1] for e in (1, 2, 4, 8)]
    for wide, narrow in zip(makespans[1:], makespans):
        assert wide <= narrow + 1e-9


@pytest.mark.parametrize("engines", [1, 2, 4])
@pytest.mark.parametrize("seed", range(8))
def test_invariants_on_random_graphs(seed, engines):
    rng = random.Random(seed)
    g = random_graph(rng, rng.randint(2, 40))
    lat = [rng.uniform(0.0, 3.0) for _ in g.tasks]
    entries, makespan = schedule(g, lat, engines=engines)
    check_invariants(g, lat, entries, makespan, engines)
    if engines == 1:
        assert makespan == pytest.approx(math.fsum(lat), rel=1e-9)


def test_zero_latency_tasks_release_in_batch():
    g = chain_graph(["conv2d", "elementwise", "elementwise", "softmax"])
    entries, makespan = schedule(g, [1.0, 0.0, 0.0, 1.0], engines=2)
    assert makespan == pytest.approx(2.0)
    starts = {e.task_id: e.start for e in entries}
    assert starts[1] == starts[2] == 1.0


def test_latency_mapping_accepted():
    g = chain_graph(["conv2d", "elementwise"])
    by_list, span_list = schedule(g, [1.0, 2.0])
    by_map, span_map = schedule(g, {0: 1.0, 1: 2.0})
    assert by_list == by_map and span_list == span_map


def test_empty_graph():
    g = ModelGraph(name="empty", tensors={}, tasks=())
    assert schedule(g, [], engines=2) == ([], 0.0)


def test_engine_count_validated():
    g = chain_graph(["conv2d"])
    with pytest.raises(ValueError):
        schedule(g, [1.0], engines=0)


def test_cycle_stalls_cleanly():
    from tasklens.ir import HardwareTask, Tensor
    from tasklens.formats import NumericFormat

    t = {
        "a": Tensor(id="a", elem_count=10, format=NumericFormat.FP16),
        "b": Tensor(id="b", elem_count=10, format=NumericFormat.FP16),
    }
    tasks = (
        HardwareTask(id=0, name="x", kind="elementwise", inputs=("b",), outputs=("a",)),
        HardwareTask(id=1, name="y", kind="elementwise", inputs=("a",), outputs=("b",)),
    )
    g = ModelGraph(name="loop", tensors=t, tasks=tasks)
    with pytest.raises(GraphValidationError):
        schedule(g, [1.0, 1.0])


def test_determinism():
    rng = random.Random(77)
    g = random_graph(rng, 30)
    lat = [rng.uniform(0.1, 1.0) for _ in g.tasks]
    assert schedule(g, lat, engines=3) == schedule(g, lat, engines=3)
