import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tml2 import mlengine as ml
from tml2.mlengine import EngineError


# ---------------------------------------------------------------------------
# dataset loading
# ---------------------------------------------------------------------------


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return str(p)


def test_load_reorders_columns(tmp_path):
    a = write(tmp_path, "a.csv", "gap,label\n1,0\n2,1\n")
    b = write(tmp_path, "b.csv", "label,gap\n0,1\n1,2\n")
    da = ml.load_dataset(a, ["gap"], "label")
    db = ml.load_dataset(b, ["gap"], "label")
    assert da.columns == db.columns == ("gap", "label")
    assert da.rows == db.rows == [[1.0, 0.0], [2.0, 1.0]]
    assert da.d == 2 and da.n == 2


def test_load_missing_column(tmp_path):
    p = write(tmp_path, "x.csv", "gap\n1\n")
    with pytest.raises(EngineError) as exc:
        ml.load_dataset(p, ["gap"], "label")
    assert exc.value.code == "E-SCHEMA"


def test_load_duplicate_header(tmp_path):
    p = write(tmp_path, "x.csv", "gap,gap,label\n1,2,0\n")
    with pytest.raises(EngineError) as exc:
        ml.load_dataset(p, ["gap"], "label")
    assert exc.value.code == "E-SCHEMA"


def test_load_non_numeric_cell_reports_position(tmp_path):
    p = write(tmp_path, "x.csv", "gap,label\n1,0\n2,oops\n")
    with pytest.raises(EngineError) as exc:
        ml.load_dataset(p, ["gap"], "label")
    assert exc.value.code == "E-PARSE"
    assert "row 2" in str(exc.value) and "column 2" in str(exc.value)


def test_load_ragged_row(tmp_path):
    p = write(tmp_path, "x.csv", "gap,label\n1\n")
    with pytest.raises(EngineError) as exc:
        ml.load_dataset(p, ["gap"], "label")
    assert exc.value.code == "E-SCHEMA"


def test_load_missing_file(tmp_path):
    with pytest.raises(EngineError) as exc:
        ml.load_dataset(str(tmp_path / "nope.csv"), ["gap"], "label")
    assert exc.value.code == "E-IO"


def test_load_header_only(tmp_path):
    p = write(tmp_path, "x.csv", "gap,label\n")
    with pytest.raises(EngineError) as exc:
        ml.load_dataset(p, ["gap"], "label")
    assert exc.value.code == "E-SCHEMA"


# ---------------------------------------------------------------------------
# scaler
# ---------------------------------------------------------------------------


def test_scaler_hand_values():
    params = ml.fit_scaler([[1.0], [3.0]])
    assert params.mean == (2.0,) and params.scale == (1.0,)
    assert ml.apply_scaler(params, [[1.0], [3.0]]) == [[-1.0], [1.0]]


def test_scaler_constant_column():
    params = ml.fit_scaler([[5.0], [5.0], [5.0]])
    assert params.scale == (1.0,)
    assert ml.apply_scaler(params, [[5.0], [5.0], [5.0]]) == [[0.0], [0.0], [0.0]]


# a 0.1 grid keeps columns well-conditioned; the stated tolerances assume
# data at sane magnitudes, not adversarial cancellation patterns
_cell = st.integers(min_value=-100, max_value=100).map(lambda n: n / 10.0)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(_cell, _cell), min_size=2, max_size=12))
def test_scaler_normalizes(rows):
    X = [list(r) for r in rows]
    params = ml.fit_scaler(X)
    Z = ml.apply_scaler(params, X)
    n = len(X)
    for j in range(2):
        col = [row[j] for row in X]
        mean = sum(Z[i][j] for i in range(n)) / n
        assert abs(mean) <= 1e-12
        if min(col) < max(col):  # non-constant: unit population variance
            var = sum(Z[i][j] ** 2 for i in range(n)) / n - mean**2
            assert abs(var - 1.0) <= 1e-9


# ---------------------------------------------------------------------------
# linear regression (oracle: exact-rational normal equations)
# ---------------------------------------------------------------------------


def exact_ols(X, y):
    """Independent route: solve (AᵀA)β = Aᵀy in exact rational arithmetic."""
    n, d = len(X), len(X[0])
    A = [[Fraction(v) for v in row] + [Fraction(1)] for row in X]
    dim = d + 1
    G = [
        [sum(A[r][i] * A[r][j] for r in range(n)) for j in range(dim)]
        for i in range(dim)
    ]
    rhs = [sum(A[r][i] * Fraction(y[r]) for r in range(n)) for i in range(dim)]
    # exact Gauss-Jordan
    M = [row[:] + [rhs[i]] for i, row in enumerate(G)]
    for col in range(dim):
        pivot = next(r for r in range(col, dim) if M[r][col] != 0)
        M[col], M[pivot] = M[pivot], M[col]
        inv = M[col][col]
        M[col] = [v / inv for v in M[col]]
        for r in range(dim):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    return [float(M[i][dim]) for i in range(dim)]


def test_ols_collinear_points():
    model = ml.train_linear_regression([[0.0], [1.0], [2.0]], [1.0, 3.0, 5.0])
    assert model.params["w"][0] == pytest.approx(2.0, abs=1e-9)
    assert model.params["b"] == pytest.approx(1.0, abs=1e-9)


def test_ols_constant_target():
    model = ml.train_linear_regression([[0.0], [1.0], [5.0]], [4.0, 4.0, 4.0])
    assert model.params["w"][0] == pytest.approx(0.0, abs=1e-9)
    assert model.params["b"] == pytest.approx(4.0, abs=1e-9)


def test_ols_matches_exact_rational_oracle():
    rng = random.Random(4242)
    for _ in range(20):
        X = [[rng.uniform(-5, 5) for _ in range(2)] for _ in range(5)]
        y = [rng.uniform(-5, 5) for _ in range(5)]
        model = ml.train_linear_regression(X, y, 0.0)
        beta = exact_ols(X, y)
        for got, want in zip(model.params["w"] + [model.params["b"]], beta):
            assert got == pytest.approx(want, abs=1e-9)


def test_singular_system_raises_without_ridge():
    X = [[1.0, 1.0], [2.0, 2.0], [3.0, 3.0]]  # duplicated column
    y = [1.0, 2.0, 3.0]
    with pytest.raises(EngineError) as exc:
        ml.train_linear_regression(X, y, 0.0)
    assert exc.value.code == "E-SINGULAR"
    ridge = ml.train_linear_regression(X, y, 0.5)  # regularization rescues it
    assert len(ridge.params["w"]) == 2


# ---------------------------------------------------------------------------
# logistic regression
# ---------------------------------------------------------------------------

ANTI_X = [[-2.0], [-1.0], [1.0], [2.0]]
ANTI_Y = [0.0, 0.0, 1.0, 1.0]


def oracle_gd(X, y, lr, epochs):
    """Independent full-batch gradient descent, written separately."""

    def sig(z):
        return 1.0 / (1.0 + math.exp(-z)) if z >= 0 else math.exp(z) / (1.0 + math.exp(z))

    n, d = len(X), len(X[0])
    w, b = [0.0] * d, 0.0
    for _ in range(epochs):
        gw, gb = [0.0] * d, 0.0
        for row, t in zip(X, y):
            e = sig(sum(wj * xj for wj, xj in zip(w, row)) + b) - t
            gb += e
            for j in range(d):
                gw[j] += e * row[j]
        for j in range(d):
            w[j] -= lr * gw[j] / n
        b -= lr * gb / n
    return w, b


def test_logistic_antisymmetric_dataset():
    model = ml.train_logistic_regression(ANTI_X, ANTI_Y, 0.1, 500)
    w, b = model.params["w"], model.params["b"]
    assert abs(b) <= 1e-12  # antisymmetry is preserved by every update
    assert w[0] > 0
    ow, _ = oracle_gd(ANTI_X, ANTI_Y, 0.1, 500)
    assert w[0] == pytest.approx(ow[0], abs=1e-12)
    assert ml.predict(model, [-1.5]) == 0
    assert ml.predict(model, [1.5]) == 1


def test_logistic_one_step_closed_form():
    X = [[1.0], [2.0], [3.0], [4.0]]
    y = [0.0, 1.0, 1.0, 1.0]
    model = ml.train_logistic_regression(X, y, 0.1, 1)
    ybar = sum(y) / len(y)
    assert model.params["b"] == pytest.approx(-0.1 * (0.5 - ybar), abs=1e-15)


def test_logistic_boundary_is_class_one():
    model = ml.TrainedModel(
        "LogisticRegression", ("x",), "label", None, {"w": [1.0], "b": 0.0}
    )
    assert ml.predict(model, [0.0]) == 1  # w·x+b == 0 -> class 1 by the >= rule


def test_logistic_gradient_matches_finite_differences():
    rng = random.Random(777)
    X = [[rng.uniform(-2, 2) for _ in range(2)] for _ in range(6)]
    y = [float(rng.randint(0, 1)) for _ in range(6)]
    h = 1e-6
    for _ in range(5):
        w = [rng.uniform(-1, 1), rng.uniform(-1, 1)]
        b = rng.uniform(-1, 1)
        gw, gb = ml.logistic_gradient(X, y, w, b)
        for j in range(2):
            up = w[:]
            dn = w[:]
            up[j] += h
            dn[j] -= h
            num = (ml.logistic_loss(X, y, up, b) - ml.logistic_loss(X, y, dn, b)) / (2 * h)
            assert abs(gw[j] - num) <= 1e-5 * max(1.0, abs(num))
        num_b = (ml.logistic_loss(X, y, w, b + h) - ml.logistic_loss(X, y, w, b - h)) / (2 * h)
        assert abs(gb - num_b) <= 1e-5 * max(1.0, abs(num_b))


def test_logistic_rejects_non_binary_labels():
    with pytest.raises(ValueError):
        ml.train_logistic_regression([[1.0]], [2.0])


# ---------------------------------------------------------------------------
# Gaussian naive Bayes (oracle: direct formula evaluation, frozen)
# ---------------------------------------------------------------------------

GNB_X = [[1.0, 2.0], [2.0, 1.0], [8.0, 9.0], [9.0, 8.0]]
GNB_Y = [0.0, 0.0, 1.0, 1.0]
# log joints computed by direct evaluation of log(prior) + sum of log
# Gaussian densities (priors 1/2; class means (1.5,1.5)/(8.5,8.5); class
# variances 0.25 after the smoothing floor), frozen before implementation
GNB_EXPECTED = {
    (2.0, 2.0): (-2.1447298858494, -170.14472988584942),
    (8.0, 8.5): (-183.64472988584942, -1.6447298858494002),
    (5.0, 5.0): (-50.1447298858494, -50.1447298858494),
}


def test_gnb_log_joint_matches_hand_computation():
    model = ml.train_gaussian_nb(GNB_X, GNB_Y, 1e-9)
    for query, expected in GNB_EXPECTED.items():
        got = ml.gaussian_nb_log_joint(model, list(query))
        for g, e in zip(got, expected):
            assert g == pytest.approx(e, abs=1e-12)


def test_gnb_posterior_tie_breaks_to_smaller_class():
    model = ml.train_gaussian_nb(GNB_X, GNB_Y, 1e-9)
    assert ml.predict(model, [5.0, 5.0]) == 0  # exact tie by symmetry
    assert ml.predict(model, [2.0, 2.0]) == 0
    assert ml.predict(model, [8.0, 8.5]) == 1


def test_gnb_single_point_classes():
    model = ml.train_gaussian_nb([[-1.0], [1.0]], [0.0, 1.0], 1e-9)
    assert ml.predict(model, [0.0]) == 0  # symmetric tie
    assert ml.predict(model, [-1.0]) == 0  # query at a class mean
    # zero class variances floored at var_smoothing * max feature variance
    eps = 1e-9 * 1.0
    assert model.params["variances"] == [[eps], [eps]]


def test_gnb_variance_floor_when_all_constant():
    model = ml.train_gaussian_nb([[3.0], [3.0]], [0.0, 1.0], 1e-9)
    assert model.params["variances"] == [[1e-9], [1e-9]]


# ---------------------------------------------------------------------------
# KNN (oracle: exhaustive sorted scan)
# ---------------------------------------------------------------------------


def oracle_knn(X, y, k, q):
    ranked = sorted(
        (math.dist(row, q), idx) for idx, row in enumerate(X)
    )
    votes: dict[int, int] = {}
    for _, idx in ranked[:k]:
        votes[int(y[idx])] = votes.get(int(y[idx]), 0) + 1
    top = max(votes.values())
    return min(lab for lab, c in votes.items() if c == top)


def test_knn_exact_match():
    model = ml.train_knn([[0.0, 0.0], [5.0, 5.0]], [0.0, 1.0], 1)
    assert ml.predict(model, [5.0, 5.0]) == 1


def test_knn_k_equals_n_is_global_majority():
    model = ml.train_knn([[0.0], [1.0], [2.0]], [1.0, 0.0, 0.0], 3)
    assert ml.predict(model, [10.0]) == 0
    tie = ml.train_knn([[0.0], [1.0]], [1.0, 0.0], 2)
    assert ml.predict(tie, [0.5]) == 0  # vote tie -> smallest label


def test_knn_distance_tie_prefers_lower_row_index():
    model = ml.train_knn([[1.0], [-1.0], [3.0]], [1.0, 0.0, 0.0], 1)
    assert ml.predict(model, [0.0]) == 1  # rows 0 and 1 equidistant


def test_knn_matches_exhaustive_oracle():
    rng = random.Random(2024)
    X = [[rng.uniform(-10, 10) for _ in range(2)] for _ in range(10)]
    y = [float(rng.randint(0, 2)) for _ in range(10)]
    model = ml.train_knn(X, y, 3)
    for _ in range(20):
        q = [rng.uniform(-10, 10), rng.uniform(-10, 10)]
        assert ml.predict(model, q) == oracle_knn(X, y, 3, q)


def test_knn_k_larger_than_n():
    with pytest.raises(EngineError) as exc:
        ml.train_knn([[0.0]], [0.0], 2)
    assert exc.value.code == "E-SCHEMA"


# ---------------------------------------------------------------------------
# predict plumbing
# ---------------------------------------------------------------------------


def test_predict_affine_evaluation():
    model = ml.TrainedModel(
        "LinearRegression", ("x",), "y", None, {"w": [2.0], "b": 1.0}
    )
    assert ml.predict(model, [3.0]) == 7.0


def test_predict_dimension_mismatch():
    model = ml.TrainedModel(
        "LinearRegression", ("x",), "y", None, {"w": [2.0], "b": 1.0}
    )
    with pytest.raises(EngineError) as exc:
        ml.predict(model, [1.0, 2.0])
    assert exc.value.code == "E-DIM"


def test_scaled_model_equals_unscaled_on_standardized_input():
    X = [[1.0], [2.0], [3.0], [4.0]]
    y = [0.0, 0.0, 1.0, 1.0]
    scaler = ml.fit_scaler(X)
    Z = ml.apply_scaler(scaler, X)
    with_scaler = ml.train_logistic_regression(Z, y, 0.1, 200, scaler=scaler)
    without = ml.train_logistic_regression(Z, y, 0.1, 200)
    for raw, standardized in zip(X, Z):
        assert ml.predict(with_scaler, raw) == ml.predict(without, standardized)


def test_training_is_deterministic():
    a = ml.train_logistic_regression(ANTI_X, ANTI_Y, 0.1, 500)
    b = ml.train_logistic_regression(ANTI_X, ANTI_Y, 0.1, 500)
    assert a.params == b.params


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------


def _train_all():
    rng = random.Random(99)
    X = [[rng.uniform(-5, 5) for _ in range(2)] for _ in range(12)]
    y_real = [0.7 * r[0] - 1.2 * r[1] + 0.3 for r in X]
    y_cls = [1.0 if r[0] + r[1] > 0 else 0.0 for r in X]
    scaler = ml.fit_scaler(X)
    Z = ml.apply_scaler(scaler, X)
    return [
        ml.train_linear_regression(X, y_real, 0.0),
        ml.train_logistic_regression(Z, y_cls, 0.1, 50, scaler=scaler),
        ml.train_gaussian_nb(X, y_cls, 1e-9),
        ml.train_knn(Z, y_cls, 3, scaler=scaler),
    ]


def test_save_load_roundtrip_bitwise(tmp_path):
    model = ml.train_linear_regression([[0.0], [1.0], [2.0]], [1.0, 3.0, 5.0])
    path = str(tmp_path / "m.json")
    ml.save_model(model, path)
    loaded = ml.load_model(path)
    assert loaded.params["w"] == model.params["w"]
    assert loaded.params["b"] == model.params["b"]
    assert loaded.algorithm == model.algorithm
    assert loaded.feature_names == model.feature_names


@pytest.mark.parametrize("idx", range(4), ids=["linreg", "logreg", "gnb", "knn"])
def test_save_load_preserves_predictions(tmp_path, idx):
    model = _train_all()[idx]
    path = str(tmp_path / "m.json")
    ml.save_model(model, path)
    loaded = ml.load_model(path)
    rng = random.Random(7)
    for _ in range(20):
        q = [rng.uniform(-6, 6), rng.uniform(-6, 6)]
        assert ml.predict(loaded, q) == ml.predict(model, q)


def test_load_empty_file(tmp_path):
    p = tmp_path / "empty.json"
    p.write_text("")
    with pytest.raises(EngineError) as exc:
        ml.load_model(str(p))
    assert exc.value.code == "E-FORMAT"


def test_load_unknown_algorithm_tag(tmp_path):
    p = tmp_path / "weird.json"
    p.write_text(
        '{"algorithm": "SVM", "feature_names": [], "label_name": "y", '
        '"scaler": null, "params": {}}'
    )
    with pytest.raises(EngineError) as exc:
        ml.load_model(str(p))
    assert exc.value.code == "E-FORMAT"


def test_load_missing_file(tmp_path):
    with pytest.raises(EngineError) as exc:
        ml.load_model(str(tmp_path / "nope.json"))
    assert exc.value.code == "E-IO"
