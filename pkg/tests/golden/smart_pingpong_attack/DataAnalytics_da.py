#!/usr/bin/env python3
"""Data analytics for thing 'DataAnalytics' (block 'detector').

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
from sklearn.linear_model import LogisticRegression

FEATURES = ['gap']
LABEL = 'is_attack'
ALGORITHM = 'LogisticRegression'


def _load(dataset_path):
    with open(dataset_path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    X = np.array([[float(row[name]) for name in FEATURES] for row in rows])
    y = np.array([float(row[LABEL]) for row in rows])
    return X, y


def build_estimator():
    return LogisticRegression(C=1000000.0, max_iter=500)


def preprocess(dataset_path):
    X, _ = _load(dataset_path)
    scaler = StandardScaler().fit(X)
    return {"mean": scaler.mean_.tolist(), "scale": scaler.scale_.tolist()}


def train(dataset_path, model_out):
    X, y = _load(dataset_path)
    pipeline = Pipeline([("scale", StandardScaler()), ("model", build_estimator())])
    pipeline.fit(X, y.astype(int))
    with open(model_out, "wb") as fh:
        pickle.dump(pipeline, fh)
    return len(X)


def predict(model_in, feature_values):
    with open(model_in, "rb") as fh:
        pipeline = pickle.load(fh)
    row = np.array([[float(v) for v in feature_values]])
    return int(pipeline.predict(row)[0])


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
            "error: model file %r not found; run train first\n" % model_in
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
        "usage: DataAnalytics_da.py preprocess <dataset>\n"
        "       DataAnalytics_da.py train <dataset> <model_out>\n"
        "       DataAnalytics_da.py predict <model_in> <v1> [<v2> ...]\n"
        "       DataAnalytics_da.py predict <model_in> -   (CSV feature rows on stdin)\n"
    )
    return 2


if __name__ == "__main__":
    sys.exit(_main(sys.argv[1:]))
