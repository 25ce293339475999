"""Similarity-model calibration and scoring.

Builds the same/different pair test-bed from a held-out partition,
collects pair similarity scores, derives the decision threshold from
the same-pair average, and scores classification quality (F1, ROC
area, and their mean as the combined measure).  The scenario grid
trains one model family per varied hyperparameter and picks the
combined-score argmax.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path
from typing import Literal, Sequence

import numpy as np

from ..corpus import DescriptionDoc
from ..errors import InputError, UndefinedMetricError
from .model_io import save_model
from .pvdbow import (
    OutOfVocabularyError,
    SimilarityModel,
    TrainingError,
    TrainingScenario,
    derive_seed,
    infer_vector,
    similarity_score,
    train,
)

PairLabel = Literal["same", "different"]

GRID_FIXED_EPOCHS = 10
GRID_FIXED_VECTOR_SIZE = 10
GRID_SAMPLE_STEP = 30
GRID_VARIED_RANGE = range(5, 55, 5)


@dataclass(frozen=True)
class SimilarityTestBed:
    pairs: tuple[tuple[DescriptionDoc, DescriptionDoc, PairLabel], ...]

    def count(self, label: PairLabel) -> int:
        return sum(1 for _, _, lab in self.pairs if lab == label)


@dataclass(frozen=True)
class ScoreStats:
    min: float
    avg: float
    stddev: float
    max: float


@dataclass(frozen=True)
class CalibrationResult:
    alpha_hat: float
    stats_same: ScoreStats
    stats_different: ScoreStats
    skipped_pairs: int = 0


@dataclass(frozen=True)
class SimilarityEvaluation:
    accuracy: float
    precision: float
    recall: float
    f1: float
    roc_auc: float
    combined: float


def build_testbed(
    descriptions: Sequence[DescriptionDoc], split_seed: int
) -> tuple[list[DescriptionDoc], SimilarityTestBed]:
    """Partition descriptions 2:1 into train docs and a pair test-bed.

    The test-bed holds one pair per held-out description, half labeled
    ``same`` (a description paired with itself) and half ``different``
    (two distinct held-out descriptions), within one pair when odd.
    """
    n = len(descriptions)
    if n < 3:
        raise InputError("need at least 3 descriptions for a 2:1 split")
    rng = np.random.Generator(np.random.PCG64(split_seed))
    order = rng.permutation(n)
    n_test = n // 3
    test = [descriptions[i] for i in order[:n_test]]
    train_docs = [descriptions[i] for i in order[n_test:]]

    n_same = (n_test + 1) // 2
    pairs: list[tuple[DescriptionDoc, DescriptionDoc, PairLabel]] = []
    for doc in test[:n_same]:
        pairs.append((doc, doc, "same"))
    for i in range(n_test - n_same):
        pairs.append((test[i], test[(i + 1) % n_test], "different"))
    return train_docs, SimilarityTestBed(pairs=tuple(pairs))


class _PairScorer:
    """Memoizing pair scorer; one inference per distinct text."""

    def __init__(self, model: SimilarityModel):
        self.model = model
        self._cache: dict[tuple[str, ...], np.ndarray] = {}

    def vector(self, doc: DescriptionDoc) -> np.ndarray:
        key = doc.tokens
        if key not in self._cache:
            self._cache[key] = infer_vector(doc, self.model).values
        return self._cache[key]

    def score(self, a: DescriptionDoc, b: DescriptionDoc) -> float:
        return similarity_score(self.vector(a), self.vector(b))


def _stats(scores: Sequence[float]) -> ScoreStats:
    arr = np.asarray(scores, dtype=np.float64)
    return ScoreStats(
        min=float(arr.min()),
        avg=float(arr.mean()),
        stddev=float(arr.std()),
        max=float(arr.max()),
    )


def calibrate(model: SimilarityModel, testbed: SimilarityTestBed) -> CalibrationResult:
    """Collect same/different pair scores and set the threshold.

    The threshold is the average same-pair score.  Pairs whose inference
    fails (no shared vocabulary) are skipped and counted.
    """
    if not testbed.pairs:
        raise InputError("empty test-bed")
    scorer = _PairScorer(model)
    same: list[float] = []
    different: list[float] = []
    skipped = 0
    for a, b, label in testbed.pairs:
        try:
            s = scorer.score(a, b)
        except OutOfVocabularyError:
            skipped += 1
            continue
        (same if label == "same" else different).append(s)
    if not same or not different:
        raise UndefinedMetricError(
            "calibration needs scored pairs of both labels "
            f"(same={len(same)}, different={len(different)}, skipped={skipped})"
        )
    stats_same = _stats(same)
    return CalibrationResult(
        alpha_hat=stats_same.avg,
        stats_same=stats_same,
        stats_different=_stats(different),
        skipped_pairs=skipped,
    )


def roc_auc(scores: Sequence[float], labels: Sequence[bool]) -> float:
    """Area under the ROC curve via the rank statistic (midranks for ties)."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=bool)
    n_pos = int(labels.sum())
    n_neg = labels.size - n_pos
    if n_pos == 0 or n_neg == 0:
        raise UndefinedMetricError("ROC area needs both classes")
    order = np.argsort(scores, kind="stable")
    ranks = np.empty(scores.size, dtype=np.float64)
    sorted_scores = scores[order]
    i = 0
    while i < scores.size:
        j = i
        while j + 1 < scores.size and sorted_scores[j + 1] == sorted_scores[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    pos_rank_sum = float(ranks[labels].sum())
    return (pos_rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def evaluate_similarity_model(
    model: SimilarityModel, testbed: SimilarityTestBed, alpha_hat: float
) -> SimilarityEvaluation:
    """Classify pairs as same when score >= threshold and score the result."""
    scorer = _PairScorer(model)
    scores: list[float] = []
    truth: list[bool] = []
    for a, b, label in testbed.pairs:
        try:
            scores.append(scorer.score(a, b))
        except OutOfVocabularyError:
            continue
        truth.append(label == "same")
    if not truth or all(truth) or not any(truth):
        raise UndefinedMetricError("evaluation needs scored pairs of both labels")

    predicted = [s >= alpha_hat for s in scores]
    tp = sum(1 for p, t in zip(predicted, truth) if p and t)
    fp = sum(1 for p, t in zip(predicted, truth) if p and not t)
    fn = sum(1 for p, t in zip(predicted, truth) if not p and t)
    tn = sum(1 for p, t in zip(predicted, truth) if not p and not t)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    auc = roc_auc(scores, truth)
    return SimilarityEvaluation(
        accuracy=(tp + tn) / len(truth),
        precision=precision,
        recall=recall,
        f1=f1,
        roc_auc=auc,
        combined=(f1 + auc) / 2.0,
    )


@dataclass(frozen=True)
class GridCell:
    scenario: TrainingScenario
    family: str
    evaluation: SimilarityEvaluation | None
    alpha_hat: float | None
    error: str | None = None

    @property
    def combined(self) -> float:
        return self.evaluation.combined if self.evaluation else float("-inf")


@dataclass
class GridSearchResult:
    best_model: SimilarityModel
    best_cell: GridCell
    cells: list[GridCell]

    def report_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(
            [
                "scenario_id",
                "epochs",
                "vector_size",
                "samples",
                "accuracy",
                "precision",
                "recall",
                "f1",
                "roc_auc",
                "combined",
            ]
        )
        for cell in self.cells:
            sc = cell.scenario
            if cell.evaluation is None:
                row = [cell.error or "failed"] * 6
            else:
                ev = cell.evaluation
                row = [
                    f"{ev.accuracy:.6f}",
                    f"{ev.precision:.6f}",
                    f"{ev.recall:.6f}",
                    f"{ev.f1:.6f}",
                    f"{ev.roc_auc:.6f}",
                    f"{ev.combined:.6f}",
                ]
            writer.writerow(
                [sc.scenario_id, sc.epochs, sc.vector_size, sc.training_samples, *row]
            )
        return buf.getvalue()


def grid_scenarios(corpus_size: int, base_seed: int) -> list[tuple[str, TrainingScenario]]:
    """The three scenario families: varied samples, epochs, and vector size."""
    if corpus_size < GRID_SAMPLE_STEP:
        raise InputError(
            f"training partition of {corpus_size} docs is too small for the "
            f"sample-count family (needs >= {GRID_SAMPLE_STEP})"
        )
    scenarios: list[tuple[str, TrainingScenario]] = []
    for psi in range(GRID_SAMPLE_STEP, corpus_size + 1, GRID_SAMPLE_STEP):
        scenarios.append(
            (
                "samples",
                TrainingScenario(
                    epochs=GRID_FIXED_EPOCHS,
                    vector_size=GRID_FIXED_VECTOR_SIZE,
                    training_samples=psi,
                    seed=derive_seed(base_seed, "samples", psi),
                ),
            )
        )
    for beta in GRID_VARIED_RANGE:
        scenarios.append(
            (
                "epochs",
                TrainingScenario(
                    epochs=beta,
                    vector_size=GRID_FIXED_VECTOR_SIZE,
                    training_samples=corpus_size,
                    seed=derive_seed(base_seed, "epochs", beta),
                ),
            )
        )
    for gamma in GRID_VARIED_RANGE:
        scenarios.append(
            (
                "size",
                TrainingScenario(
                    epochs=GRID_FIXED_EPOCHS,
                    vector_size=gamma,
                    training_samples=corpus_size,
                    seed=derive_seed(base_seed, "size", gamma),
                ),
            )
        )
    return scenarios


def grid_search(
    descriptions: Sequence[DescriptionDoc],
    split_seed: int = 13,
    base_seed: int = 13,
    out_dir: Path | str | None = None,
) -> GridSearchResult:
    """Train all grid scenarios on the fixed split and keep the best model.

    Every cell is evaluated on the same held-out test-bed with its own
    calibrated threshold; the winner maximizes the combined (mean of F1
    and ROC-area) score.  With ``out_dir`` set, every trained model and
    the CSV report are written there.
    """
    train_docs, testbed = build_testbed(descriptions, split_seed)
    cells: list[GridCell] = []
    best: tuple[GridCell, SimilarityModel] | None = None
    out_path = Path(out_dir) if out_dir is not None else None
    if out_path is not None:
        out_path.mkdir(parents=True, exist_ok=True)

    for family, scenario in grid_scenarios(len(train_docs), base_seed):
        subset = train_docs[: scenario.training_samples]
        try:
            model = train(subset, scenario)
            calibration = calibrate(model, testbed)
            evaluation = evaluate_similarity_model(model, testbed, calibration.alpha_hat)
        except (InputError, TrainingError, UndefinedMetricError, OutOfVocabularyError) as exc:
            cells.append(
                GridCell(scenario=scenario, family=family, evaluation=None, alpha_hat=None, error=str(exc))
            )
            continue
        cell = GridCell(
            scenario=scenario,
            family=family,
            evaluation=evaluation,
            alpha_hat=calibration.alpha_hat,
        )
        cells.append(cell)
        if out_path is not None:
            save_model(model, out_path / f"{scenario.scenario_id}.pvam")
        if best is None or cell.combined > best[0].combined:
            best = (cell, model)

    if best is None:
        raise UndefinedMetricError("every grid cell failed to train")
    result = GridSearchResult(best_model=best[1], best_cell=best[0], cells=cells)
    if out_path is not None:
        (out_path / "grid_report.csv").write_text(result.report_csv(), encoding="utf-8")
    return result
