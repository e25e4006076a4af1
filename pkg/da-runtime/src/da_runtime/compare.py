"""Decision-level agreement between prediction lists."""

from __future__ import annotations

import math
from typing import Sequence, Union

from .manifest import RuntimeManifestEntry

Prediction = Union[int, float]

REGRESSION_REL_TOL = 1e-6


def decisions_equal(a: Prediction, b: Prediction) -> bool:
    """Labels compare exactly; regression values within 1e-6 relative."""
    if isinstance(a, int) and isinstance(b, int):
        return a == b
    return math.isclose(float(a), float(b), rel_tol=REGRESSION_REL_TOL, abs_tol=0.0)


def compare_decisions(
    native: Sequence[Prediction], script: Sequence[Prediction]
) -> float:
    """Fraction of positions where the two prediction lists agree."""
    if len(native) != len(script):
        raise ValueError(
            f"prediction lists differ in length: {len(native)} vs {len(script)}"
        )
    if not native:
        return 1.0
    hits = sum(1 for a, b in zip(native, script) if decisions_equal(a, b))
    return hits / len(native)


def agreement_report(
    entry: RuntimeManifestEntry, agreement: float, n_queries: int
) -> dict:
    """One JSON-ready report entry; key order is part of the interface."""
    return {
        "thing": entry.thing,
        "algorithm": entry.algorithm,
        "agreement": agreement,
        "n_queries": n_queries,
    }
