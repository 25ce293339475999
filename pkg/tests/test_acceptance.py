"""Acceptance suite.

One test per acceptance criterion, each printing a PASS/FAIL line (see
the hook in conftest.py).  Expected values come from independent
brute-force oracles implemented here with the standard library, never
from the code paths under test.
"""

import math
import sqlite3
import statistics
import time

import numpy as np
import pytest

from sdee.baselines import (
    FeatureMatrix,
    atlm_fit,
    mlp_loss_and_grads,
    weighted_euclidean,
)
from sdee.corpus import clean_dataset, filter_repos
from sdee.embed import (
    EmbeddingVector,
    TrainingScenario,
    build_testbed,
    calibrate,
    cosine,
    evaluate_similarity_model,
    infer_vector,
    similarity_score,
    train,
)
from sdee.estimate import ProjectVectorStore, top_k_similar, walkerden
from sdee.evaluation import (
    bootstrap_test,
    cliffs_delta,
    cohens_d,
    glass_delta,
    hedges_g,
    kfold,
    lsd,
    mar,
    mdmre,
    mmre,
    mre,
    randomized_trials,
    re_star,
    sa,
    default_estimators,
)
from sdee.fixtures import FIXTURE_TODAY, make_filter_fixture, make_topic_corpus
from sdee.metrics import EffortRecord, pearson
from sdee.store import REQUIRED_TABLES, load, persist


# --------------------------------------------------------------------------
# independent brute-force oracles (stdlib only)


def _oracle_mre(eh, e):
    return abs(eh - e) / e


def _oracle_mmre(pairs):
    return 100.0 / len(pairs) * sum(_oracle_mre(eh, e) for eh, e in pairs)


def _oracle_mdmre(pairs):
    return 100.0 * statistics.median(_oracle_mre(eh, e) for eh, e in pairs)


def _oracle_mar(pairs):
    return statistics.mean(abs(eh - e) for eh, e in pairs)


def _oracle_lsd(pairs):
    mean_actual = statistics.mean(e for _, e in pairs)
    return math.sqrt(sum((math.log(eh) - math.log(mean_actual)) ** 2 for eh, _ in pairs))


def _oracle_re_star(pairs):
    residuals = [eh - e for eh, e in pairs]
    actuals = [e for _, e in pairs]
    return statistics.variance(residuals) / statistics.variance(actuals)


def _oracle_sa(mar_p, baseline):
    return (1 - mar_p / baseline) * 100.0


def _oracle_walkerden(efforts):
    k = len(efforts)
    weights = list(range(k, 0, -1))
    return sum(w * e for w, e in zip(weights, efforts)) / sum(weights)


def _oracle_weighted_euclidean(x, y, w):
    return math.sqrt(sum(wi * (xi - yi) ** 2 for xi, yi, wi in zip(x, y, w)))


def _oracle_pearson(x, y):
    return statistics.correlation(list(x), list(y))


def _oracle_cohens_d(x1, x2):
    n1, n2 = len(x1), len(x2)
    pooled = math.sqrt(
        ((n1 - 1) * statistics.variance(x1) + (n2 - 1) * statistics.variance(x2))
        / (n1 + n2 - 2)
    )
    return (statistics.mean(x1) - statistics.mean(x2)) / pooled


def _oracle_hedges_g(d, n1, n2):
    return d * (1 - 3 / (4 * (n1 + n2) - 9))


def _oracle_glass(x1, control):
    return (statistics.mean(x1) - statistics.mean(control)) / statistics.stdev(control)


def _oracle_cliffs(x1, x2):
    more = sum(1 for a in x1 for b in x2 if a > b)
    less = sum(1 for a in x1 for b in x2 if a < b)
    return (more - less) / (len(x1) * len(x2))


def _rel_close(a, b, tol=1e-9):
    return abs(a - b) <= tol * max(abs(a), abs(b), 1.0)


def test_formula_oracles_match_brute_force():
    rng = np.random.default_rng(2024)
    start = time.monotonic()
    checked = 0
    for _ in range(200):
        n = int(rng.integers(2, 9))
        pairs = [
            (float(rng.uniform(0.5, 60)), float(rng.uniform(0.5, 60))) for _ in range(n)
        ]
        assert _rel_close(mmre(pairs), _oracle_mmre(pairs))
        assert _rel_close(mdmre(pairs), _oracle_mdmre(pairs))
        assert _rel_close(mar(pairs), _oracle_mar(pairs))
        assert _rel_close(lsd(pairs), _oracle_lsd(pairs))
        assert _rel_close(re_star(pairs), _oracle_re_star(pairs))
        eh, e = pairs[0]
        assert _rel_close(mre(eh, e), _oracle_mre(eh, e))
        assert _rel_close(sa(eh, e), _oracle_sa(eh, e))

        efforts = [float(v) for v in rng.uniform(0.5, 80, n)]
        assert _rel_close(walkerden(efforts), _oracle_walkerden(efforts))

        x = [float(v) for v in rng.uniform(0, 1, n)]
        y = [float(v) for v in rng.uniform(0, 1, n)]
        w = [float(v) for v in rng.uniform(0, 3, n)]
        assert _rel_close(weighted_euclidean(x, y, w), _oracle_weighted_euclidean(x, y, w))

        series_a = [float(v) for v in rng.normal(0, 2, max(n, 3))]
        series_b = [float(v) for v in rng.normal(1, 3, max(n, 3))]
        assert _rel_close(pearson(series_a, series_b), _oracle_pearson(series_a, series_b))

        d = cohens_d(series_a, series_b)
        assert _rel_close(d, _oracle_cohens_d(series_a, series_b))
        assert _rel_close(
            hedges_g(d, len(series_a), len(series_b)),
            _oracle_hedges_g(d, len(series_a), len(series_b)),
        )
        assert _rel_close(glass_delta(series_a, series_b), _oracle_glass(series_a, series_b))
        # counting statistic must match exactly
        assert cliffs_delta(series_a, series_b) == _oracle_cliffs(series_a, series_b)
        checked += 1
    elapsed = time.monotonic() - start
    assert checked == 200
    assert elapsed < 5.0, f"oracle suite took {elapsed:.1f}s"


def test_walkerden_exactness():
    assert walkerden([6, 3, 3]) == 4.5
    for a in (0.25, 7.0, 123.5):
        assert walkerden([a, a, a]) == a


def test_atlm_planted_recovery():
    rng = np.random.default_rng(7)
    rows = rng.uniform(0, 20, size=(30, 1))
    targets = 2.0 * rows[:, 0] + 1.0
    model = atlm_fit(FeatureMatrix(rows=rows, targets=targets, feature_names=("f",)))
    assert abs(model.coefficients[0] - 1.0) < 1e-6
    assert abs(model.coefficients[1] - 2.0) < 1e-6
    assert model.residual_inf_norm < 1e-8


def test_neural_gradient_check():
    rng = np.random.default_rng(15)
    x = rng.uniform(0, 1, size=(10, 3))
    y = rng.normal(size=10)
    params = (
        rng.normal(0, 0.5, size=(3, 5)),
        rng.normal(0, 0.2, size=5),
        rng.normal(0, 0.5, size=5),
        float(rng.normal(0, 0.2)),
    )
    _, grads = mlp_loss_and_grads(params, x, y)
    eps = 1e-6
    w1, b1, w2, b2 = params
    flat_checks = []
    for idx in np.ndindex(w1.shape):
        up, down = w1.copy(), w1.copy()
        up[idx] += eps
        down[idx] -= eps
        lu, _ = mlp_loss_and_grads((up, b1, w2, b2), x, y)
        ld, _ = mlp_loss_and_grads((down, b1, w2, b2), x, y)
        flat_checks.append(((lu - ld) / (2 * eps), grads[0][idx]))
    for i in range(w2.size):
        up, down = w2.copy(), w2.copy()
        up[i] += eps
        down[i] -= eps
        lu, _ = mlp_loss_and_grads((w1, b1, up, b2), x, y)
        ld, _ = mlp_loss_and_grads((w1, b1, down, b2), x, y)
        flat_checks.append(((lu - ld) / (2 * eps), grads[2][i]))
    for fd, analytic in flat_checks:
        assert abs(fd - analytic) < 1e-4 * max(abs(fd), 1e-6)


def test_embedding_suite_on_synthetic_corpus():
    start = time.monotonic()
    docs, labels = make_topic_corpus(30, seed=11)
    scenario = TrainingScenario(epochs=10, vector_size=10, training_samples=30, seed=7)

    first = train(docs, scenario)
    second = train(docs, scenario)
    assert np.array_equal(first.word_vectors, second.word_vectors)
    assert np.array_equal(first.doc_vectors, second.doc_vectors)

    _, testbed = build_testbed(docs, split_seed=5)
    calibration = calibrate(first, testbed)
    assert calibration.stats_same.avg > calibration.stats_different.avg
    assert calibration.alpha_hat == calibration.stats_same.avg

    evaluation = evaluate_similarity_model(first, testbed, calibration.alpha_hat)
    assert evaluation.f1 >= 0.9

    vectors = [infer_vector(d, first).values for d in docs]
    intra, inter = [], []
    for i in range(len(docs)):
        for j in range(i + 1, len(docs)):
            value = cosine(vectors[i], vectors[j])
            (intra if labels[i] == labels[j] else inter).append(value)
    assert float(np.mean(intra)) > float(np.mean(inter))

    elapsed = time.monotonic() - start
    assert elapsed < 60.0, f"embedding suite took {elapsed:.1f}s"


def test_retrieval_oracle_equivalence(fixture_bundle):
    corpus, model = fixture_bundle
    store = ProjectVectorStore.from_corpus(corpus)
    assert len(store) == 60
    ref = corpus.reference_vector
    rng = np.random.default_rng(555)

    def oracle(query_values, query_ref, k, alpha):
        scored = []
        for p in store.projects:
            u = np.asarray(query_values, dtype=np.float64)
            v = np.asarray(p.vector, dtype=np.float64)
            score = round(
                float(np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v))), 9
            )
            if score >= alpha:
                scored.append((-score, p.owner, p.repo, score))
        scored.sort()
        return [(owner, repo, score) for _, owner, repo, score in scored[:k]]

    for i in range(100):
        values = rng.normal(size=store.dim).astype(np.float32)
        query = EmbeddingVector(
            values=values, ref_cos_sim=similarity_score(values, ref)
        )
        k = int(rng.integers(1, 9))
        alpha = float(rng.uniform(-0.5, 0.95))
        fast = top_k_similar(query, store, k=k, alpha_hat=alpha)
        expected = oracle(values, query.ref_cos_sim, k, alpha)
        assert [(m.owner, m.repo, m.similarity) for m in fast] == expected, f"query {i}"


def test_protocol_replication(fixture_bundle):
    from sdee.evaluation import EvalDataset

    corpus, _ = fixture_bundle
    dataset = EvalDataset.from_corpus(corpus)
    assert len(dataset) == 60

    start = time.monotonic()
    report = randomized_trials(dataset, default_estimators(), x=5, r=20, seed=42)
    again = randomized_trials(dataset, default_estimators(), x=5, r=20, seed=42)
    assert report.to_jsonl() == again.to_jsonl()
    assert report.to_csv() == again.to_csv()

    kfold_reports = {
        k: kfold(dataset, default_estimators(), k=k, seed=42) for k in (3, 5, 10)
    }
    for k, k_report in kfold_reports.items():
        twice = kfold(dataset, default_estimators(), k=k, seed=42)
        assert k_report.to_jsonl() == twice.to_jsonl(), f"k={k}"

    for rep in [report, *kfold_reports.values()]:
        assert rep.estimator_names == ("DevSDEE", "ATLM", "ABE", "LOC", "MLP")
        for name in rep.estimator_names:
            for metric in ("lsd", "re_star", "mar", "mmre", "mdmre", "sa"):
                cell = rep.cells[name][metric]
                assert cell.mean is not None or cell.reason, (name, metric)

    # DevSDEE must beat per-trial random guessing everywhere it is defined
    for rep in [report, *kfold_reports.values()]:
        sa_values = rep.metric_series("DevSDEE", "sa")
        assert sa_values and min(sa_values) > 0.0
        assert rep.cells["DevSDEE"]["sa"].mean > 0.0

    elapsed = time.monotonic() - start
    assert elapsed < 300.0, f"protocols took {elapsed:.1f}s"


def test_statistical_machinery():
    rng = np.random.default_rng(31)
    x1 = rng.normal(0, 1, 50)
    x2 = rng.normal(10, 1, 50)
    separated = bootstrap_test(x1, x2, np.mean, n_boot=5000, confidence=0.95, seed=8)
    assert separated.p < 0.01

    x = list(np.linspace(2, 20, 50))
    identical = bootstrap_test(x, x, np.mean, n_boot=5000, confidence=0.95, seed=8)
    assert identical.estimate == 0.0
    assert identical.p > 0.5

    repeat = bootstrap_test(x1, x2, np.mean, n_boot=5000, confidence=0.95, seed=8)
    assert repeat == separated


def test_corpus_filters_and_cleaning():
    records, expected_kept = make_filter_fixture()
    assert len(records) == 20
    kept = {r.key for r in filter_repos(records, FIXTURE_TODAY)}
    assert kept == expected_kept

    def record(dev_count, months):
        return EffortRecord(
            owner="o",
            repo=f"{dev_count}x{months}",
            dev_count=dev_count,
            dev_time_months=months,
            sloc_m=1,
            effort_pm=dev_count * months,
        )

    mixed = [record(0, 5), record(3, 0.5), record(1, 1), record(2, 4), record(0, 0)]
    cleaned = clean_dataset(mixed)
    assert [r.repo for r in cleaned] == ["1x1", "2x4"]


def test_persistence_round_trip_byte_checked(fixture_bundle, tmp_path):
    corpus, _ = fixture_bundle
    first = tmp_path / "first.sqlite"
    second = tmp_path / "second.sqlite"
    persist(corpus, first)
    persist(load(first), second)

    assert load(second).comparable() == corpus.comparable()
    for table in REQUIRED_TABLES:
        with sqlite3.connect(first) as a, sqlite3.connect(second) as b:
            rows_a = a.execute(f"SELECT * FROM {table} ORDER BY rowid").fetchall()
            rows_b = b.execute(f"SELECT * FROM {table} ORDER BY rowid").fetchall()
        assert rows_a == rows_b, table
        assert rows_a, f"{table} should not be empty for the fixture corpus"
