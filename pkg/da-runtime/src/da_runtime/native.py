"""Reference predictions from the toolkit's native analytics engine.

Mirrors the generated scripts' pipeline (standardize, fit, predict) so
the comparison is decision-to-decision on identical inputs. Requires the
tml2 package; hyperparameters default to the language's declared
defaults since the manifest does not carry them.
"""

from __future__ import annotations

from typing import Optional, Sequence, Union

from .datasets import load_features_and_labels
from .manifest import RuntimeManifestEntry

Prediction = Union[int, float]


def native_predictions(
    entry: RuntimeManifestEntry,
    dataset_path: str,
    queries: Sequence[Sequence[float]],
    hyperparams: Optional[dict] = None,
) -> list[Prediction]:
    try:
        from tml2 import mlengine as ml
        from tml2.model import HYPERPARAM_DEFAULTS, AlgorithmKind
    except ImportError as e:  # pragma: no cover
        raise RuntimeError(
            "native comparison needs the tml2 toolkit installed "
            "(pip install -e <toolkit dir>)"
        ) from e

    kind = AlgorithmKind(entry.algorithm)
    params = dict(HYPERPARAM_DEFAULTS[kind])
    if hyperparams:
        params.update(hyperparams)

    X, y = load_features_and_labels(dataset_path, entry.features, entry.label)
    scaler = ml.fit_scaler(X)
    Z = ml.apply_scaler(scaler, X)
    common = {
        "feature_names": entry.features,
        "label_name": entry.label,
        "scaler": scaler,
    }
    if kind is AlgorithmKind.LINEAR_REGRESSION:
        model = ml.train_linear_regression(Z, y, float(params["lambda"]), **common)
    elif kind is AlgorithmKind.LOGISTIC_REGRESSION:
        model = ml.train_logistic_regression(
            Z, y, float(params["lr"]), int(params["epochs"]), **common
        )
    elif kind is AlgorithmKind.GAUSSIAN_NB:
        model = ml.train_gaussian_nb(Z, y, float(params["var_smoothing"]), **common)
    else:
        model = ml.train_knn(Z, y, int(params["k"]), **common)
    return [ml.predict(model, list(q)) for q in queries]
