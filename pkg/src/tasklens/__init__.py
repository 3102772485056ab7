"""Interactive workbench for optimizing compiled models for on-device inference.

Parse compiled task graphs, price them against a hardware profile with a
roofline cost model, simulate compression choices with format propagation,
and serve the results over HTTP for the web UI.
"""

from .costs import ModelSummary, TaskConfig, TaskMetrics, estimate_task, percent_delta, summarize
from .errors import (
    GraphValidationError,
    NotFound,
    TasklensError,
    Underivable,
    UnknownTask,
    UnsupportedFormat,
    ValidationError,
)
from .formats import NumericFormat, tensor_bytes
from .ir import (
    HardwareTask,
    ModelGraph,
    Tensor,
    derive_task_work,
    graph_from_json,
    graph_hash,
    serialize_graph,
    topological_order,
    validate_graph,
)
from .optimize import (
    EMPTY_SELECTION,
    OptimizationSelection,
    PRESETS,
    SelectionEntry,
    enumerate_options,
    plan_to_budget,
    propagate_formats,
    simulate,
)
from .package import load_model, parse_package, parse_package_bytes
from .profiles import HardwareProfile, default_profile, load_profile
from .scheduling import schedule
from .store import Analysis, ModelRecord, Workspace, check_access

__version__ = "0.1.0"

__all__ = [
    "Analysis",
    "EMPTY_SELECTION",
    "GraphValidationError",
    "HardwareProfile",
    "HardwareTask",
    "ModelGraph",
    "ModelRecord",
    "ModelSummary",
    "NotFound",
    "NumericFormat",
    "OptimizationSelection",
    "PRESETS",
    "SelectionEntry",
    "TaskConfig",
    "TaskMetrics",
    "TasklensError",
    "Tensor",
    "Underivable",
    "UnknownTask",
    "UnsupportedFormat",
    "ValidationError",
    "Workspace",
    "check_access",
    "default_profile",
    "derive_task_work",
    "enumerate_options",
    "estimate_task",
    "graph_from_json",
    "graph_hash",
    "load_model",
    "load_profile",
    "parse_package",
    "parse_package_bytes",
    "percent_delta",
    "plan_to_budget",
    "propagate_formats",
    "schedule",
    "serialize_graph",
    "simulate",
    "summarize",
    "tensor_bytes",
    "topological_order",
    "validate_graph",
]
