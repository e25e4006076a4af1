"""Self-contained analytics engine: CSV ingestion, z-score scaling, four
classical estimators, and JSON persistence.

Everything here is deterministic and dependency-free: no RNG, no BLAS,
no platform-dependent ordering. Training the same dataset twice yields
bit-identical models, which is what makes simulation traces and code
generation reproducible.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

Vector = list[float]
Matrix = list[list[float]]

_PIVOT_EPS = 1e-12


class EngineError(Exception):
    """Analytics failure with a stable code (E-IO, E-SCHEMA, E-PARSE, ...)."""

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(message)

    def __str__(self) -> str:
        return f"[{self.code}] {super().__str__()}"


@dataclass(frozen=True)
class Dataset:
    """Numeric table with columns reordered to (features..., label)."""

    columns: tuple[str, ...]
    rows: list[Vector]

    @property
    def n(self) -> int:
        return len(self.rows)

    @property
    def d(self) -> int:
        return len(self.columns)

    def features(self) -> Matrix:
        return [row[:-1] for row in self.rows]

    def labels(self) -> Vector:
        return [row[-1] for row in self.rows]


@dataclass(frozen=True)
class ScalerParams:
    """Per-feature z-score parameters; zero-variance columns keep scale 1."""

    mean: tuple[float, ...]
    scale: tuple[float, ...]


@dataclass(frozen=True)
class TrainedModel:
    algorithm: str
    feature_names: tuple[str, ...]
    label_name: str
    scaler: Optional[ScalerParams]
    params: dict = field(compare=False)

    @property
    def n_features(self) -> int:
        return len(self.feature_names)


# ---------------------------------------------------------------------------
# dataset loading
# ---------------------------------------------------------------------------


def load_dataset(path: str, feature_names: Sequence[str], label_name: str) -> Dataset:
    """Read a headered CSV and project it onto (features..., label).

    The header may list columns in any order and may contain extras; every
    requested name must appear exactly once and every cell must be numeric.
    """
    requested = list(feature_names) + [label_name]
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().split("\n")
    except OSError as e:
        raise EngineError("E-IO", f"cannot read dataset {path!r}: {e}") from e
    lines = [ln.rstrip("\r") for ln in lines]
    lines = [ln for ln in lines if ln != ""]
    if not lines:
        raise EngineError("E-SCHEMA", f"dataset {path!r} is empty (header required)")
    header = [cell.strip() for cell in lines[0].split(",")]
    indices: list[int] = []
    for name in requested:
        hits = [i for i, h in enumerate(header) if h == name]
        if len(hits) > 1:
            raise EngineError(
                "E-SCHEMA", f"dataset {path!r}: duplicate header column {name!r}"
            )
        if not hits:
            raise EngineError(
                "E-SCHEMA", f"dataset {path!r}: missing required column {name!r}"
            )
        indices.append(hits[0])
    rows: list[Vector] = []
    for rownum, line in enumerate(lines[1:], start=1):
        cells = [cell.strip() for cell in line.split(",")]
        if len(cells) != len(header):
            raise EngineError(
                "E-SCHEMA",
                f"dataset {path!r}: row {rownum} has {len(cells)} cells, "
                f"header has {len(header)}",
            )
        picked: Vector = []
        for col in indices:
            try:
                picked.append(float(cells[col]))
            except ValueError:
                raise EngineError(
                    "E-PARSE",
                    f"dataset {path!r}: non-numeric cell {cells[col]!r} "
                    f"at row {rownum}, column {col + 1}",
                ) from None
        rows.append(picked)
    if not rows:
        raise EngineError("E-SCHEMA", f"dataset {path!r} has no data rows")
    return Dataset(tuple(requested), rows)


# ---------------------------------------------------------------------------
# scaling
# ---------------------------------------------------------------------------


def fit_scaler(X: Matrix) -> ScalerParams:
    """Column means and population standard deviations (0 replaced by 1)."""
    if not X:
        raise ValueError("fit_scaler requires at least one row")
    n = len(X)
    d = len(X[0])
    means = [sum(row[j] for row in X) / n for j in range(d)]
    scales: list[float] = []
    for j in range(d):
        col = [row[j] for row in X]
        # exact constant check: a rounded mean must not turn a constant
        # column's zero variance into a denormal-sized scale
        if min(col) == max(col):
            scales.append(1.0)
            continue
        var = sum((v - means[j]) ** 2 for v in col) / n
        sd = math.sqrt(var)
        scales.append(sd if sd > 0.0 else 1.0)
    return ScalerParams(tuple(means), tuple(scales))


def apply_scaler(params: ScalerParams, X: Matrix) -> Matrix:
    return [
        [(row[j] - params.mean[j]) / params.scale[j] for j in range(len(params.mean))]
        for row in X
    ]


def _scale_one(params: ScalerParams, x: Sequence[float]) -> Vector:
    return [(x[j] - params.mean[j]) / params.scale[j] for j in range(len(params.mean))]


# ---------------------------------------------------------------------------
# linear algebra
# ---------------------------------------------------------------------------


def _gauss_solve(M: Matrix, v: Vector) -> Vector:
    """Solve M x = v by Gaussian elimination with partial pivoting."""
    n = len(M)
    a = [row[:] + [v[i]] for i, row in enumerate(M)]
    for col in range(n):
        pivot_row = max(range(col, n), key=lambda r: abs(a[r][col]))
        if abs(a[pivot_row][col]) < _PIVOT_EPS:
            raise EngineError("E-SINGULAR", "normal equations are numerically singular")
        if pivot_row != col:
            a[col], a[pivot_row] = a[pivot_row], a[col]
        for r in range(col + 1, n):
            factor = a[r][col] / a[col][col]
            if factor != 0.0:
                for c in range(col, n + 1):
                    a[r][c] -= factor * a[col][c]
    x = [0.0] * n
    for i in range(n - 1, -1, -1):
        acc = a[i][n]
        for c in range(i + 1, n):
            acc -= a[i][c] * x[c]
        x[i] = acc / a[i][i]
    return x


def _dot(a: Sequence[float], b: Sequence[float]) -> float:
    return sum(x * y for x, y in zip(a, b))


# ---------------------------------------------------------------------------
# estimators
# ---------------------------------------------------------------------------


def _default_names(d: int) -> tuple[str, ...]:
    return tuple(f"f{j}" for j in range(d))


def train_linear_regression(
    X: Matrix,
    y: Vector,
    lam: float = 0.0,
    *,
    feature_names: Optional[Sequence[str]] = None,
    label_name: str = "label",
    scaler: Optional[ScalerParams] = None,
) -> TrainedModel:
    """Ridge regression by direct solve of (AᵀA + λI')β = Aᵀy.

    A is X with an appended ones column; the intercept is not penalized
    (I' has a zero in the intercept slot). λ=0 gives ordinary least
    squares and raises E-SINGULAR on rank-deficient systems.
    """
    n = len(X)
    d = len(X[0]) if n else 0
    if n == 0:
        raise ValueError("training requires at least one row")
    dim = d + 1
    gram = [[0.0] * dim for _ in range(dim)]
    rhs = [0.0] * dim
    for row, target in zip(X, y):
        aug = list(row) + [1.0]
        for i in range(dim):
            rhs[i] += aug[i] * target
            for j in range(dim):
                gram[i][j] += aug[i] * aug[j]
    for i in range(d):  # no penalty on the intercept
        gram[i][i] += lam
    beta = _gauss_solve(gram, rhs)
    return TrainedModel(
        algorithm="LinearRegression",
        feature_names=tuple(feature_names) if feature_names else _default_names(d),
        label_name=label_name,
        scaler=scaler,
        params={"w": beta[:d], "b": beta[d]},
    )


def sigmoid(z: float) -> float:
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    ez = math.exp(z)
    return ez / (1.0 + ez)


def logistic_gradient(
    X: Matrix, y: Vector, w: Sequence[float], b: float
) -> tuple[Vector, float]:
    """Gradient of mean log-loss at (w, b)."""
    n = len(X)
    d = len(w)
    gw = [0.0] * d
    gb = 0.0
    for row, target in zip(X, y):
        err = sigmoid(_dot(w, row) + b) - target
        gb += err
        for j in range(d):
            gw[j] += err * row[j]
    return [g / n for g in gw], gb / n


def logistic_loss(X: Matrix, y: Vector, w: Sequence[float], b: float) -> float:
    """Mean log-loss, written in the numerically stable log1p form."""
    total = 0.0
    for row, target in zip(X, y):
        z = _dot(w, row) + b
        # log(1 + e^z) - t*z, rearranged to avoid overflow
        total += max(z, 0.0) + math.log1p(math.exp(-abs(z))) - target * z
    return total / len(X)


def train_logistic_regression(
    X: Matrix,
    y: Vector,
    lr: float = 0.1,
    epochs: int = 500,
    *,
    feature_names: Optional[Sequence[str]] = None,
    label_name: str = "label",
    scaler: Optional[ScalerParams] = None,
) -> TrainedModel:
    """Full-batch gradient descent from exactly-zero initialization.

    No shuffling, no early stopping: `epochs` updates, each using the
    whole dataset, so retraining is reproducible to the last bit.
    """
    if not X:
        raise ValueError("training requires at least one row")
    if any(t not in (0.0, 1.0) for t in y):
        raise ValueError("logistic regression labels must be 0 or 1")
    d = len(X[0])
    w = [0.0] * d
    b = 0.0
    for _ in range(epochs):
        gw, gb = logistic_gradient(X, y, w, b)
        for j in range(d):
            w[j] -= lr * gw[j]
        b -= lr * gb
    return TrainedModel(
        algorithm="LogisticRegression",
        feature_names=tuple(feature_names) if feature_names else _default_names(d),
        label_name=label_name,
        scaler=scaler,
        params={"w": w, "b": b},
    )


def _int_labels(y: Vector) -> list[int]:
    labels = []
    for v in y:
        if v != int(v):
            raise ValueError(f"classifier labels must be integers, got {v!r}")
        labels.append(int(v))
    return labels


def train_gaussian_nb(
    X: Matrix,
    y: Vector,
    var_smoothing: float = 1e-9,
    *,
    feature_names: Optional[Sequence[str]] = None,
    label_name: str = "label",
    scaler: Optional[ScalerParams] = None,
) -> TrainedModel:
    """Gaussian naive Bayes with population variances.

    Per-class variances are floored at var_smoothing times the largest
    overall feature variance (at var_smoothing itself when every feature
    is constant) to keep densities finite.
    """
    if not X:
        raise ValueError("training requires at least one row")
    labels = _int_labels(y)
    n = len(X)
    d = len(X[0])
    classes = sorted(set(labels))

    overall_mean = [sum(row[j] for row in X) / n for j in range(d)]
    overall_var = [
        sum((row[j] - overall_mean[j]) ** 2 for row in X) / n for j in range(d)
    ]
    max_var = max(overall_var) if overall_var else 0.0
    eps = var_smoothing * max_var if max_var > 0.0 else var_smoothing

    priors: list[float] = []
    means: list[Vector] = []
    variances: list[Vector] = []
    for cls in classes:
        rows = [row for row, lab in zip(X, labels) if lab == cls]
        m = len(rows)
        priors.append(m / n)
        mean = [sum(row[j] for row in rows) / m for j in range(d)]
        var = [
            max(sum((row[j] - mean[j]) ** 2 for row in rows) / m, eps) for j in range(d)
        ]
        means.append(mean)
        variances.append(var)
    return TrainedModel(
        algorithm="GaussianNB",
        feature_names=tuple(feature_names) if feature_names else _default_names(d),
        label_name=label_name,
        scaler=scaler,
        params={
            "classes": classes,
            "priors": priors,
            "means": means,
            "variances": variances,
        },
    )


def gaussian_nb_log_joint(model: TrainedModel, x: Sequence[float]) -> list[float]:
    """log P(class) + Σ_j log N(x_j | mean, variance), one entry per class.

    Works in the model's own space: callers must apply any scaler first
    (predict() does).
    """
    p = model.params
    out = []
    for prior, mean, var in zip(p["priors"], p["means"], p["variances"]):
        acc = math.log(prior)
        for xj, mj, vj in zip(x, mean, var):
            acc += -0.5 * math.log(2.0 * math.pi * vj) - (xj - mj) ** 2 / (2.0 * vj)
        out.append(acc)
    return out


def train_knn(
    X: Matrix,
    y: Vector,
    k: int = 3,
    *,
    feature_names: Optional[Sequence[str]] = None,
    label_name: str = "label",
    scaler: Optional[ScalerParams] = None,
) -> TrainedModel:
    """Store the training set; all the work happens at prediction time."""
    if not X:
        raise ValueError("training requires at least one row")
    if k > len(X):
        raise EngineError(
            "E-SCHEMA", f"k={k} exceeds the dataset row count n={len(X)}"
        )
    labels = _int_labels(y)
    d = len(X[0])
    return TrainedModel(
        algorithm="KNN",
        feature_names=tuple(feature_names) if feature_names else _default_names(d),
        label_name=label_name,
        scaler=scaler,
        params={"k": k, "points": [list(row) for row in X], "labels": labels},
    )


# ---------------------------------------------------------------------------
# prediction
# ---------------------------------------------------------------------------


def predict(model: TrainedModel, x: Sequence[float]) -> Union[int, float]:
    """Apply the stored scaler (if any), then the decision function.

    Returns a Real for LinearRegression and an Int class label otherwise;
    logistic regression maps the boundary w·x+b = 0 to class 1.
    """
    if len(x) != model.n_features:
        raise EngineError(
            "E-DIM",
            f"expected {model.n_features} feature value(s), got {len(x)}",
        )
    vec = list(map(float, x))
    if model.scaler is not None:
        vec = _scale_one(model.scaler, vec)
    p = model.params
    if model.algorithm == "LinearRegression":
        return _dot(p["w"], vec) + p["b"]
    if model.algorithm == "LogisticRegression":
        return 1 if _dot(p["w"], vec) + p["b"] >= 0.0 else 0
    if model.algorithm == "GaussianNB":
        scores = gaussian_nb_log_joint(model, vec)
        best = 0
        for i in range(1, len(scores)):
            if scores[i] > scores[best]:  # ties keep the smaller class label
                best = i
        return p["classes"][best]
    if model.algorithm == "KNN":
        ranked = sorted(
            (sum((a - b) ** 2 for a, b in zip(point, vec)), idx)
            for idx, point in enumerate(p["points"])
        )
        votes: dict[int, int] = {}
        for _, idx in ranked[: p["k"]]:
            lab = p["labels"][idx]
            votes[lab] = votes.get(lab, 0) + 1
        top = max(votes.values())
        return min(lab for lab, count in votes.items() if count == top)
    raise EngineError("E-FORMAT", f"unknown algorithm {model.algorithm!r}")


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

_ALGORITHMS = ("LinearRegression", "LogisticRegression", "GaussianNB", "KNN")


def save_model(model: TrainedModel, path: str) -> None:
    doc = {
        "algorithm": model.algorithm,
        "feature_names": list(model.feature_names),
        "label_name": model.label_name,
        "scaler": (
            None
            if model.scaler is None
            else {"mean": list(model.scaler.mean), "scale": list(model.scaler.scale)}
        ),
        "params": model.params,
    }
    try:
        parent = os.path.dirname(path)
        if parent:
            os.makedirs(parent, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh, indent=2)
            fh.write("\n")
    except OSError as e:
        raise EngineError("E-IO", f"cannot write model {path!r}: {e}") from e


def load_model(path: str) -> TrainedModel:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise EngineError("E-IO", f"cannot read model {path!r}: {e}") from e
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise EngineError("E-FORMAT", f"model file {path!r} is not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise EngineError("E-FORMAT", f"model file {path!r}: expected a JSON object")
    try:
        algorithm = doc["algorithm"]
        feature_names = tuple(doc["feature_names"])
        label_name = doc["label_name"]
        raw_scaler = doc["scaler"]
        params = doc["params"]
    except (KeyError, TypeError) as e:
        raise EngineError("E-FORMAT", f"model file {path!r}: missing field {e}") from e
    if algorithm not in _ALGORITHMS:
        raise EngineError(
            "E-FORMAT", f"model file {path!r}: unknown algorithm tag {algorithm!r}"
        )
    scaler = (
        None
        if raw_scaler is None
        else ScalerParams(tuple(raw_scaler["mean"]), tuple(raw_scaler["scale"]))
    )
    return TrainedModel(
        algorithm=algorithm,
        feature_names=feature_names,
        label_name=label_name,
        scaler=scaler,
        params=params,
    )
