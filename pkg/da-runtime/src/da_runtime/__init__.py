"""da-runtime: execution and verification harness for generated tml2
data-analytics scripts."""

from .compare import agreement_report, compare_decisions, decisions_equal
from .datasets import load_columns, load_features_and_labels, load_queries
from .manifest import ALGORITHMS, ManifestError, RuntimeManifestEntry, load_manifest
from .native import native_predictions
from .runner import ScriptError, predict_script, run_script, train_script

__version__ = "0.1.0"

__all__ = [
    "ALGORITHMS",
    "ManifestError",
    "RuntimeManifestEntry",
    "ScriptError",
    "agreement_report",
    "compare_decisions",
    "decisions_equal",
    "load_columns",
    "load_features_and_labels",
    "load_manifest",
    "load_queries",
    "native_predictions",
    "predict_script",
    "run_script",
    "train_script",
    "__version__",
]
