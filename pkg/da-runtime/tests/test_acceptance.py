"""Release criterion for the runtime: generated scripts must reproduce
the native engine's decisions on the held-out DDOS queries."""

from da_runtime import (
    compare_decisions,
    load_manifest,
    load_queries,
    native_predictions,
    predict_script,
)

from conftest import DDOS_HOLDOUT, DDOS_TRAIN


def _agreement(gen_dirs, trained_models, variant):
    gen_dir = gen_dirs[variant]
    [entry] = load_manifest(gen_dir)
    queries = load_queries(DDOS_HOLDOUT, entry.features)
    assert len(queries) == 20
    script = predict_script(entry, trained_models[variant], queries, gen_dir=gen_dir)
    native = native_predictions(entry, DDOS_TRAIN, queries)
    return compare_decisions(native, script)


def test_generated_script_agreement(gen_dirs, trained_models):
    logistic = _agreement(gen_dirs, trained_models, "logistic")
    assert logistic >= 0.9
    nb = _agreement(gen_dirs, trained_models, "gaussian_nb")
    knn = _agreement(gen_dirs, trained_models, "knn")
    assert nb == 1.0
    assert knn == 1.0
    print(
        f"[acceptance] generated-script agreement: PASS "
        f"(logistic {logistic:.2f}, gaussian_nb {nb:.2f}, knn {knn:.2f})"
    )
