"""Exception types shared across the package."""

from __future__ import annotations

from dataclasses import dataclass


class TasklensError(Exception):
    """Base class for all package errors."""


class PackageError(TasklensError):
    """A model package could not be read."""


class MissingMember(PackageError):
    """A required archive member is absent."""

    def __init__(self, member: str) -> None:
        super().__init__(f"package is missing required member: {member}")
        self.member = member


class SchemaError(PackageError):
    """A JSON document does not match its schema.

    ``pointer`` is a JSON pointer to the offending value, e.g.
    ``/tasks/3/kind``.
    """

    def __init__(self, pointer: str, message: str) -> None:
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer
        self.reason = message


@dataclass(frozen=True)
class Violation:
    """One semantic problem found by graph validation."""

    code: str
    message: str
    task_id: int | None = None
    tensor_id: str | None = None

    def to_json(self) -> dict:
        out: dict = {"code": self.code, "message": self.message}
        if self.task_id is not None:
            out["task_id"] = self.task_id
        if self.tensor_id is not None:
            out["tensor_id"] = self.tensor_id
        return out


class GraphValidationError(PackageError):
    """The graph parsed but failed semantic validation."""

    def __init__(self, violations: list[Violation]) -> None:
        head = violations[0].message if violations else "invalid graph"
        super().__init__(f"{len(violations)} violation(s): {head}")
        self.violations = violations


# public alias: parse-time semantic failure
ValidationError = GraphValidationError


class Underivable(PackageError):
    """macs omitted and the task kind has no derivation rule for it."""

    def __init__(self, task_id: int, kind: str, reason: str) -> None:
        super().__init__(f"cannot derive macs for task {task_id} ({kind}): {reason}")
        self.task_id = task_id
        self.kind = kind


class UnknownTask(TasklensError):
    """A selection or query names a task id not present in the graph."""

    def __init__(self, task_id: int) -> None:
        super().__init__(f"unknown task id: {task_id}")
        self.task_id = task_id


class UnsupportedFormat(TasklensError):
    """A task kind has no throughput entry for the requested format."""

    def __init__(self, kind: str, fmt_tag: str, task_id: int | None = None) -> None:
        where = f" (task {task_id})" if task_id is not None else ""
        super().__init__(f"profile does not support {kind} at {fmt_tag}{where}")
        self.kind = kind
        self.fmt_tag = fmt_tag
        self.task_id = task_id


class ProfileError(TasklensError):
    """A hardware profile document is malformed."""


class StoreError(TasklensError):
    """Workspace storage failure."""


class StorageFull(StoreError):
    """The data directory ran out of space mid-write."""


class NotFound(StoreError):
    """Record does not exist or is not visible to the caller."""


class PathRejected(TasklensError):
    """A source path escaped the package tree (traversal attempt)."""


class TooLarge(TasklensError):
    """File exceeds the whole-file serving limit; a window is required."""


class Forbidden(StoreError):
    """Caller is known but not allowed to perform the action."""


class UnknownColumn(TasklensError):
    """A metric column id is not in the registry."""

    def __init__(self, column: str, choices: tuple[str, ...] = ()) -> None:
        super().__init__(f"unknown column: {column}")
        self.column = column
        self.choices = choices
