"""manifest.json parsing for generated analytics directories."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

ALGORITHMS = ("LinearRegression", "LogisticRegression", "GaussianNB", "KNN")

_REQUIRED_KEYS = ("name", "script", "algorithm", "features", "label", "prediction")


class ManifestError(ValueError):
    pass


@dataclass(frozen=True)
class RuntimeManifestEntry:
    thing: str
    script: str
    algorithm: str
    features: tuple[str, ...]
    label: str
    prediction: str

    @property
    def is_regression(self) -> bool:
        return self.algorithm == "LinearRegression"


def load_manifest(gen_dir: str) -> list[RuntimeManifestEntry]:
    """Read <gen_dir>/manifest.json and return its entries, validated."""
    path = os.path.join(gen_dir, "manifest.json")
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "things" not in doc:
        raise ManifestError(f"{path}: expected an object with a 'things' list")
    entries: list[RuntimeManifestEntry] = []
    for i, raw in enumerate(doc["things"]):
        missing = [k for k in _REQUIRED_KEYS if k not in raw]
        if missing:
            raise ManifestError(f"{path}: entry {i} is missing {missing}")
        if raw["algorithm"] not in ALGORITHMS:
            raise ManifestError(
                f"{path}: entry {i} has unknown algorithm {raw['algorithm']!r}"
            )
        entries.append(
            RuntimeManifestEntry(
                thing=raw["name"],
                script=raw["script"],
                algorithm=raw["algorithm"],
                features=tuple(raw["features"]),
                label=raw["label"],
                prediction=raw["prediction"],
            )
        )
    return entries
