"""tml2: a compiler toolkit for an IoT modeling language with embedded
data analytics.

Pipeline: parse() text into a Model, validate() it, then simulate() a
configuration or generate() standalone analytics scripts from it.
"""

from .codegen import CodegenError, GeneratedArtifact, generate, write_artifacts
from .diagnostics import Diagnostic, Severity
from .interpreter import (
    Envelope,
    InstanceSnapshot,
    SimulationError,
    SimulationResult,
    TraceEvent,
    eval_expr,
    simulate,
    trace_to_jsonl,
)
from .model import (
    AlgorithmKind,
    AlgorithmSpec,
    Configuration,
    Connector,
    DataAnalyticsBlock,
    Instance,
    Message,
    Model,
    Port,
    PortDirection,
    Property,
    State,
    StateChart,
    Thing,
    Transition,
    ValueType,
    equals_structural,
)
from .parser import ParseError, parse
from .printer import pretty_print
from .validator import ValidationReport, validate

__version__ = "0.1.0"

__all__ = [
    "AlgorithmKind",
    "AlgorithmSpec",
    "CodegenError",
    "Configuration",
    "Connector",
    "DataAnalyticsBlock",
    "Diagnostic",
    "Envelope",
    "GeneratedArtifact",
    "Instance",
    "InstanceSnapshot",
    "Message",
    "Model",
    "ParseError",
    "Port",
    "PortDirection",
    "Property",
    "Severity",
    "SimulationError",
    "SimulationResult",
    "State",
    "StateChart",
    "Thing",
    "TraceEvent",
    "Transition",
    "ValidationReport",
    "ValueType",
    "equals_structural",
    "eval_expr",
    "generate",
    "parse",
    "pretty_print",
    "simulate",
    "trace_to_jsonl",
    "validate",
    "write_artifacts",
    "__version__",
]
