"""Session fixtures: generate the analytics scripts once (via the tml2
toolkit, the producer of our inputs) and train each one once."""

from __future__ import annotations

import hashlib
import os
import pathlib

import pytest

import tml2
from da_runtime import load_manifest, run_script, train_script

ROOT = pathlib.Path(__file__).resolve().parents[2]
SAMPLES = ROOT / "samples"
DDOS_TRAIN = str(SAMPLES / "data" / "ddos_gaps.csv")
DDOS_HOLDOUT = str(SAMPLES / "data" / "ddos_holdout.csv")
LATENCY_CSV = str(SAMPLES / "data" / "latency.csv")

VARIANTS = {
    "logistic": ("smart_pingpong", "main"),
    "gaussian_nb": ("smart_pingpong_nb", "main"),
    "knn": ("smart_pingpong_knn", "main"),
    "linreg": ("latency", "main"),
}


def checksum_tree(directory: str) -> dict[str, str]:
    out = {}
    for name in sorted(os.listdir(directory)):
        path = os.path.join(directory, name)
        if os.path.isfile(path):
            out[name] = hashlib.sha256(open(path, "rb").read()).hexdigest()
    return out


@pytest.fixture(scope="session")
def gen_dirs(tmp_path_factory) -> dict[str, str]:
    dirs = {}
    for key, (stem, config) in VARIANTS.items():
        src = (SAMPLES / f"{stem}.tml2").read_text(encoding="utf-8")
        model = tml2.parse(src, f"{stem}.tml2")
        assert tml2.validate(model).ok
        out = tmp_path_factory.mktemp(f"gen_{key}")
        tml2.write_artifacts(tml2.generate(model, config), str(out))
        dirs[key] = str(out)
    return dirs


@pytest.fixture(scope="session")
def trained_models(gen_dirs, tmp_path_factory) -> dict[str, str]:
    """Each variant's script trained once; returns model file paths."""
    models = {}
    model_dir = tmp_path_factory.mktemp("models")
    for key, gen_dir in gen_dirs.items():
        [entry] = load_manifest(gen_dir)
        dataset = LATENCY_CSV if key == "linreg" else DDOS_TRAIN
        model_out = str(model_dir / f"{key}.bin")
        train_script(entry, dataset, model_out, gen_dir=gen_dir)
        models[key] = model_out
    return models
