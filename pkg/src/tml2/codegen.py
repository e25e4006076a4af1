"""Standalone data-analytics script generation.

For every analytics-bearing thing in a configuration this emits one
Python program mapping the declared algorithm onto scikit-learn, plus a
manifest and a requirements file for the runtime that will execute them.
Output is a pure function of the AST: no timestamps, no absolute paths,
byte-identical across runs.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .model import (
    AlgorithmKind,
    AlgorithmSpec,
    Configuration,
    DataAnalyticsBlock,
    Model,
    Thing,
)


class CodegenError(Exception):
    """Generation failure with a stable code (E-NODA, E-UNSUPPORTED, E-IO)."""

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)

    def __str__(self) -> str:
        return f"[{self.code}] {super().__str__()}"


@dataclass(frozen=True)
class GeneratedArtifact:
    path: str  # relative, '/'-separated
    content: bytes


_SCRIPT_TEMPLATE = '''\
#!/usr/bin/env python3
"""Data analytics for thing '@THING@' (block '@DA@').

Entry points:
    preprocess(dataset_path)          -> per-feature mean/scale of the dataset
    train(dataset_path, model_out)    -> number of rows trained on
    predict(model_in, feature_values) -> prediction for one feature vector

Generated file; do not edit.
"""

import csv
import json
import pickle
import sys

import numpy as np
from sklearn.pipeline import Pipeline
from sklearn.preprocessing import StandardScaler
@EST_IMPORT@

FEATURES = @FEATURES@
LABEL = @LABEL@
ALGORITHM = @ALGORITHM@


def _load(dataset_path):
    with open(dataset_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    X = np.array([[float(row[name]) for name in FEATURES] for row in rows])
    y = np.array([float(row[LABEL]) for row in rows])
    return X, y


def build_estimator():
    return @EST_EXPR@


def preprocess(dataset_path):
    X, _ = _load(dataset_path)
    scaler = StandardScaler().fit(X)
    return {"mean": scaler.mean_.tolist(), "scale": scaler.scale_.tolist()}


def train(dataset_path, model_out):
    X, y = _load(dataset_path)
    pipeline = Pipeline([("scale", StandardScaler()), ("model", build_estimator())])
    pipeline.fit(X, @Y_EXPR@)
    with open(model_out, "wb") as fh:
        pickle.dump(pipeline, fh)
    return len(X)


def predict(model_in, feature_values):
    with open(model_in, "rb") as fh:
        pipeline = pickle.load(fh)
    row = np.array([[float(v) for v in feature_values]])
    return @PRED_EXPR@


def _predict_cmd(model_in, rest):
    try:
        if rest == ["-"]:
            for line in sys.stdin:
                line = line.strip()
                if line:
                    print(predict(model_in, line.split(",")))
            return 0
        if rest:
            print(predict(model_in, rest))
            return 0
    except FileNotFoundError:
        sys.stderr.write(
            "error: model file %r not found; run train first\\n" % model_in
        )
        return 1
    return 2


def _main(argv):
    if len(argv) == 2 and argv[0] == "preprocess":
        print(json.dumps(preprocess(argv[1])))
        return 0
    if len(argv) == 3 and argv[0] == "train":
        print("trained %d rows" % train(argv[1], argv[2]))
        return 0
    if len(argv) >= 2 and argv[0] == "predict":
        status = _predict_cmd(argv[1], argv[2:])
        if status != 2:
            return status
    sys.stderr.write(
        "usage: @SCRIPT@ preprocess <dataset>\\n"
        "       @SCRIPT@ train <dataset> <model_out>\\n"
        "       @SCRIPT@ predict <model_in> <v1> [<v2> ...]\\n"
        "       @SCRIPT@ predict <model_in> -   (CSV feature rows on stdin)\\n"
    )
    return 2


if __name__ == "__main__":
    sys.exit(_main(sys.argv[1:]))
'''

_REQUIREMENTS = "scikit-learn>=1.1\nnumpy>=1.21\n"


def _estimator(spec: AlgorithmSpec) -> tuple[str, str, str]:
    """(import line, constructor expression, y expression) for a spec."""
    kind = spec.algorithm()
    if kind is AlgorithmKind.LINEAR_REGRESSION:
        lam = float(spec.param("lambda"))
        if lam == 0.0:
            return (
                "from sklearn.linear_model import LinearRegression",
                "LinearRegression()",
                "y",
            )
        return (
            "from sklearn.linear_model import Ridge",
            f"Ridge(alpha={lam!r})",
            "y",
        )
    if kind is AlgorithmKind.LOGISTIC_REGRESSION:
        epochs = int(spec.param("epochs"))
        # lbfgs has no learning-rate knob; near-zero regularization keeps the
        # boundary comparable to an unpenalized from-scratch fit
        return (
            "from sklearn.linear_model import LogisticRegression",
            f"LogisticRegression(C=1000000.0, max_iter={epochs})",
            "y.astype(int)",
        )
    if kind is AlgorithmKind.GAUSSIAN_NB:
        vs = float(spec.param("var_smoothing"))
        return (
            "from sklearn.naive_bayes import GaussianNB",
            f"GaussianNB(var_smoothing={vs!r})",
            "y.astype(int)",
        )
    if kind is AlgorithmKind.KNN:
        k = int(spec.param("k"))
        return (
            "from sklearn.neighbors import KNeighborsClassifier",
            f"KNeighborsClassifier(n_neighbors={k})",
            "y.astype(int)",
        )
    raise CodegenError(
        "E-UNSUPPORTED", f"no library mapping for algorithm {spec.kind!r}"
    )


def _render_script(thing: Thing, da: DataAnalyticsBlock, script_name: str) -> str:
    est_import, est_expr, y_expr = _estimator(da.algorithm)
    pred_expr = (
        "float(pipeline.predict(row)[0])"
        if da.algorithm.algorithm() is AlgorithmKind.LINEAR_REGRESSION
        else "int(pipeline.predict(row)[0])"
    )
    text = _SCRIPT_TEMPLATE
    for token, value in (
        ("@THING@", thing.name),
        ("@DA@", da.name),
        ("@EST_IMPORT@", est_import),
        ("@EST_EXPR@", est_expr),
        ("@Y_EXPR@", y_expr),
        ("@PRED_EXPR@", pred_expr),
        ("@FEATURES@", repr(list(da.features))),
        ("@LABEL@", repr(da.label)),
        ("@ALGORITHM@", repr(da.algorithm.kind)),
        ("@SCRIPT@", script_name),
    ):
        text = text.replace(token, value)
    return text


def generate(model: Model, config_name: str) -> list[GeneratedArtifact]:
    """Emit one DA script per analytics-bearing thing in the configuration,
    plus manifest.json and requirements.txt."""
    config = model.configuration(config_name)
    if config is None:
        raise KeyError(f"configuration {config_name!r} not found")
    used_things = {inst.thing for inst in config.instances}
    bearing = [
        t for t in model.things if t.name in used_things and t.analytics
    ]
    if not bearing:
        raise CodegenError(
            "E-NODA",
            f"configuration '{config_name}' instantiates no thing with a "
            "data_analytics block",
        )
    artifacts: list[GeneratedArtifact] = []
    manifest_entries = []
    for thing in bearing:
        for index, da in enumerate(thing.analytics):
            suffix = "" if index == 0 else str(index + 1)
            script_name = f"{thing.name}_da{suffix}.py"
            script = _render_script(thing, da, script_name)
            artifacts.append(GeneratedArtifact(script_name, script.encode("utf-8")))
            manifest_entries.append(
                {
                    "name": thing.name,
                    "script": script_name,
                    "algorithm": da.algorithm.kind,
                    "features": list(da.features),
                    "label": da.label,
                    "prediction": da.prediction,
                }
            )
    manifest = json.dumps({"things": manifest_entries}, indent=2) + "\n"
    artifacts.append(GeneratedArtifact("manifest.json", manifest.encode("utf-8")))
    artifacts.append(GeneratedArtifact("requirements.txt", _REQUIREMENTS.encode("utf-8")))
    return artifacts


def write_artifacts(artifacts: list[GeneratedArtifact], out_dir: str) -> int:
    """Write artifacts under out_dir (created if missing); returns the count."""
    try:
        os.makedirs(out_dir, exist_ok=True)
        for artifact in artifacts:
            target = os.path.join(out_dir, *artifact.path.split("/"))
            parent = os.path.dirname(target)
            if parent:
                os.makedirs(parent, exist_ok=True)
            with open(target, "wb") as fh:
                fh.write(artifact.content)
    except OSError as e:
        raise CodegenError("E-IO", f"cannot write artifacts: {e}") from e
    return len(artifacts)
