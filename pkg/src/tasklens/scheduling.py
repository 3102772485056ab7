"""List scheduling of task graphs onto one or more engines.

Event-driven simulation: a task is ready once every producer of its inputs
has finished; among ready tasks the lowest id runs first, on the engine that
freed up earliest (ties: lowest engine index). With one engine this walks the
id-tiebroken topological order with back-to-back starts.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import GraphValidationError, Violation
from .ir import ModelGraph


@dataclass(frozen=True)
class ScheduleEntry:
    task_id: int
    engine: int
    start: float
    finish: float

    def to_json(self) -> dict:
        return {
            "task": self.task_id,
            "engine": self.engine,
            "start": self.start,
            "finish": self.finish,
        }


def schedule(
    g: ModelGraph,
    latencies: Sequence[float] | Mapping[int, float],
    engines: int = 1,
) -> tuple[list[ScheduleEntry], float]:
    """Simulate execution; returns entries sorted by (start, task id) and the
    makespan."""
    if engines < 1:
        raise ValueError("engines must be >= 1")
    n = len(g.tasks)
    if n == 0:
        return [], 0.0
    lat = [float(latencies[t.id]) for t in sorted(g.tasks, key=lambda t: t.id)]

    producers: list[set[int]] = [set() for _ in range(n)]
    consumers: list[set[int]] = [set() for _ in range(n)]
    for task in g.tasks:
        for tensor_id in task.inputs:
            producer = g.producer_of(tensor_id)
            if producer is not None and producer != task.id:
                producers[task.id].add(producer)
                consumers[producer].add(task.id)

    waiting = [len(producers[i]) for i in range(n)]
    ready_time = [0.0] * n
    ready = [i for i in range(n) if waiting[i] == 0]
    heapq.heapify(ready)
    events: list[tuple[float, int]] = []  # (finish, task)
    free = [0.0] * engines
    entries: list[ScheduleEntry] = []
    scheduled = 0
    now = 0.0

    while scheduled < n:
        # scheduling moments are event times; pair idle engines with ready
        # tasks until one side runs out, then advance to the next finish
        while ready:
            idle = [e for e in range(engines) if free[e] <= now]
            if not idle:
                break
            engine = min(idle, key=lambda e: (free[e], e))
            task_id = heapq.heappop(ready)
            start = max(now, ready_time[task_id])
            finish = start + lat[task_id]
            free[engine] = finish
            entries.append(ScheduleEntry(task_id, engine, start, finish))
            heapq.heappush(events, (finish, task_id))
            scheduled += 1
        if scheduled >= n:
            break
        if not events:
            raise GraphValidationError(
                [Violation("cycle", "schedule stalled: graph has a cycle")]
            )
        now, done = heapq.heappop(events)
        # release everything finishing at the same instant
        batch = [done]
        while events and events[0][0] == now:
            batch.append(heapq.heappop(events)[1])
        for finished in batch:
            for consumer in sorted(consumers[finished]):
                waiting[consumer] -= 1
                ready_time[consumer] = max(ready_time[consumer], now)
                if waiting[consumer] == 0:
                    heapq.heappush(ready, consumer)

    makespan = max((e.finish for e in entries), default=0.0)
    entries.sort(key=lambda e: (e.start, e.task_id))
    return entries, makespan
