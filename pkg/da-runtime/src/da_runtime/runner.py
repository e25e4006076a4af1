"""Drives a generated script's train/predict entry points.

Every script run is an isolated interpreter process; the runner only
reads the generated directory (model files land in caller-chosen or
temporary locations), so artifact bytes are never touched.
"""

from __future__ import annotations

import os
import subprocess
import sys
import tempfile
from typing import Optional, Sequence, Union

from .manifest import RuntimeManifestEntry

Prediction = Union[int, float]


class ScriptError(RuntimeError):
    """A generated script exited nonzero; carries its stderr text."""

    def __init__(self, message: str, returncode: int, stderr: str):
        super().__init__(f"{message}\n{stderr.strip()}")
        self.returncode = returncode
        self.stderr = stderr


def _run(argv: list[str], stdin_text: Optional[str] = None) -> str:
    proc = subprocess.run(
        argv,
        input=stdin_text,
        capture_output=True,
        text=True,
    )
    if proc.returncode != 0:
        raise ScriptError(
            f"script failed with status {proc.returncode}: {' '.join(argv)}",
            proc.returncode,
            proc.stderr,
        )
    return proc.stdout


def _script_path(entry: RuntimeManifestEntry, gen_dir: str) -> str:
    return os.path.join(gen_dir, entry.script)


def train_script(
    entry: RuntimeManifestEntry,
    dataset_path: str,
    model_out: str,
    *,
    gen_dir: str,
    python: str = sys.executable,
) -> None:
    _run(
        [python, _script_path(entry, gen_dir), "train", dataset_path, model_out]
    )


def predict_script(
    entry: RuntimeManifestEntry,
    model_path: str,
    queries: Sequence[Sequence[float]],
    *,
    gen_dir: str,
    python: str = sys.executable,
) -> list[Prediction]:
    """One prediction per query, via the script's stdin batch mode."""
    stdin_text = "".join(
        ",".join(repr(float(v)) for v in query) + "\n" for query in queries
    )
    out = _run(
        [python, _script_path(entry, gen_dir), "predict", model_path, "-"],
        stdin_text=stdin_text,
    )
    lines = [ln for ln in out.splitlines() if ln.strip()]
    if len(lines) != len(queries):
        raise ScriptError(
            f"expected {len(queries)} predictions, got {len(lines)}", 0, out
        )
    cast = float if entry.is_regression else int
    return [cast(ln) for ln in lines]


def run_script(
    entry: RuntimeManifestEntry,
    dataset_path: str,
    queries: Sequence[Sequence[float]],
    *,
    gen_dir: str,
    python: str = sys.executable,
    model_out: Optional[str] = None,
) -> list[Prediction]:
    """Train then predict: the script's whole lifecycle in two processes."""
    if model_out is not None:
        train_script(entry, dataset_path, model_out, gen_dir=gen_dir, python=python)
        return predict_script(entry, model_out, queries, gen_dir=gen_dir, python=python)
    with tempfile.TemporaryDirectory(prefix="da-runtime-") as tmp:
        model_path = os.path.join(tmp, "model.bin")
        train_script(entry, dataset_path, model_path, gen_dir=gen_dir, python=python)
        return predict_script(entry, model_path, queries, gen_dir=gen_dir, python=python)
