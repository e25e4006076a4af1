"""CSV access per the toolkit's dataset contract: comma-separated,
headered, all-numeric, no quoting."""

from __future__ import annotations

import csv
from typing import Sequence


def load_columns(path: str, columns: Sequence[str]) -> list[list[float]]:
    """Rows projected onto the requested columns, as floats."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for name in columns:
            if header.count(name) != 1:
                raise ValueError(f"{path}: column {name!r} must appear exactly once")
        return [[float(row[name]) for name in columns] for row in reader]


def load_queries(path: str, features: Sequence[str]) -> list[list[float]]:
    return load_columns(path, features)


def load_features_and_labels(
    path: str, features: Sequence[str], label: str
) -> tuple[list[list[float]], list[float]]:
    rows = load_columns(path, list(features) + [label])
    return [r[:-1] for r in rows], [r[-1] for r in rows]
