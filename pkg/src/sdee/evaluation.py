"""Comparative evaluation battery.

Residual error metrics (MAR, MMRE, MdMRE, LSD, RE*, standardized
accuracy), parametric and nonparametric effect sizes, seeded bootstrap
significance tests, and the two experiment drivers (randomized
hold-out trials and k-fold cross-validation) that produce per-estimator
metric reports.

All drivers derive one seed per trial from the root seed, so trials are
order-independent and reports reproduce bit for bit.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Protocol, Sequence

import numpy as np
from scipy import stats as scipy_stats

from .baselines import (
    FeatureMatrix,
    LinearModel,
    SingularFitError,
    abe_estimate,
    atlm_fit,
    atlm_predict,
    loc_strawman_estimate,
    mlp_fit,
    mlp_predict,
)
from .corpus import clean_dataset
from .embed.pvdbow import derive_seed, similarity_score
from .errors import InputError, UndefinedMetricError
from .estimate import walkerden
from .metrics import EffortRecord
from .store import Corpus

METRIC_NAMES = ("lsd", "re_star", "mar", "mmre", "mdmre", "sa")
RANDOM_GUESS_TRIALS = 100
DEFAULT_BOOTSTRAP_SAMPLES = 5000
DEFAULT_CONFIDENCE = 0.95
CLIFFS_PERMUTATIONS = 10_000

Pairs = Sequence[tuple[float, float]]  # (estimate, actual)


# ---------------------------------------------------------------------------
# error metrics


def mre(e_hat: float, e: float) -> float:
    """Relative residual magnitude |e_hat - e| / e."""
    if e <= 0:
        raise UndefinedMetricError(f"actual effort must be positive, got {e}")
    return abs(e_hat - e) / e


def mmre(pairs: Pairs) -> float:
    """Mean MRE as a percentage."""
    if not pairs:
        raise InputError("no pairs")
    return 100.0 / len(pairs) * sum(mre(eh, e) for eh, e in pairs)


def mdmre(pairs: Pairs) -> float:
    """Median MRE as a percentage."""
    if not pairs:
        raise InputError("no pairs")
    return 100.0 * float(np.median([mre(eh, e) for eh, e in pairs]))


def mar(pairs: Pairs) -> float:
    """Mean absolute residual, in person-months."""
    if not pairs:
        raise InputError("no pairs")
    return sum(abs(eh - e) for eh, e in pairs) / len(pairs)


def lsd(pairs: Pairs) -> float:
    """Root of summed squared log deviations of predictions from the
    mean actual effort: sqrt(sum_i (ln e_hat_i - ln mean(e))^2)."""
    if not pairs:
        raise InputError("no pairs")
    actual_mean = sum(e for _, e in pairs) / len(pairs)
    if actual_mean <= 0:
        raise UndefinedMetricError("mean actual effort must be positive")
    total = 0.0
    for eh, _ in pairs:
        if eh <= 0:
            raise UndefinedMetricError(f"non-positive prediction {eh}")
        total += (math.log(eh) - math.log(actual_mean)) ** 2
    return math.sqrt(total)


def re_star(pairs: Pairs) -> float:
    """Residual variance over actual variance (sample variance, n-1)."""
    if len(pairs) < 2:
        raise InputError("need at least two pairs")
    residuals = np.array([eh - e for eh, e in pairs])
    actuals = np.array([e for _, e in pairs])
    var_actual = float(np.var(actuals, ddof=1))
    if var_actual == 0:
        raise UndefinedMetricError("variance of actual efforts is zero")
    return float(np.var(residuals, ddof=1)) / var_actual


def sa(mar_p: float, mar_baseline_mean: float) -> float:
    """Standardized accuracy: percent MAR improvement over a baseline."""
    if mar_baseline_mean <= 0:
        raise UndefinedMetricError("baseline MAR must be positive")
    return (1.0 - mar_p / mar_baseline_mean) * 100.0


def random_guess_mar(
    targets: Sequence[float],
    trials: int = RANDOM_GUESS_TRIALS,
    seed: int = 0,
    train_targets: Sequence[float] | None = None,
) -> float:
    """Mean MAR of random guessing, averaged over seeded runs.

    Each held-out target is predicted by a uniformly sampled training
    target; without an explicit training pool each item draws from the
    other items of ``targets``.
    """
    targets = list(targets)
    if not targets:
        raise InputError("no targets")
    rng = np.random.Generator(np.random.PCG64(seed))
    total = 0.0
    for _ in range(trials):
        run = 0.0
        for i, actual in enumerate(targets):
            if train_targets is None:
                pool = targets[:i] + targets[i + 1 :]
                if not pool:
                    run += 0.0
                    continue
            else:
                pool = list(train_targets)
                if not pool:
                    raise InputError("empty training pool")
            guess = pool[int(rng.integers(len(pool)))]
            run += abs(guess - actual)
        total += run / len(targets)
    return total / trials


# ---------------------------------------------------------------------------
# effect sizes


def cohens_d(x1: Sequence[float], x2: Sequence[float]) -> float:
    """Mean difference over the pooled standard deviation."""
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    n1, n2 = len(x1), len(x2)
    if n1 < 2 or n2 < 2:
        raise InputError("each group needs at least two values")
    pooled_var = ((n1 - 1) * np.var(x1, ddof=1) + (n2 - 1) * np.var(x2, ddof=1)) / (
        n1 + n2 - 2
    )
    if pooled_var == 0:
        raise UndefinedMetricError("pooled variance is zero")
    return float((x1.mean() - x2.mean()) / math.sqrt(pooled_var))


def hedges_g(d: float, n1: int, n2: int) -> float:
    """Small-sample correction of the pooled effect size."""
    if n1 < 2 or n2 < 2:
        raise InputError("each group needs at least two values")
    return d * (1.0 - 3.0 / (4.0 * (n1 + n2) - 9.0))


def glass_delta(x1: Sequence[float], x2_control: Sequence[float]) -> float:
    """Mean difference over the control group's standard deviation."""
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2_control, dtype=np.float64)
    if len(x1) < 2 or len(x2) < 2:
        raise InputError("each group needs at least two values")
    sd = float(np.std(x2, ddof=1))
    if sd == 0:
        raise UndefinedMetricError("control group has zero variance")
    return float((x1.mean() - x2.mean()) / sd)


def cliffs_delta(x1: Sequence[float], x2: Sequence[float]) -> float:
    """Dominance statistic over all cross-group pairs; ties count zero."""
    a = np.asarray(x1, dtype=np.float64)
    b = np.asarray(x2, dtype=np.float64)
    if a.size == 0 or b.size == 0:
        raise InputError("both groups must be non-empty")
    diff = a[:, None] - b[None, :]
    return float((np.sum(diff > 0) - np.sum(diff < 0)) / (a.size * b.size))


def cliffs_delta_p(
    x1: Sequence[float],
    x2: Sequence[float],
    permutations: int = CLIFFS_PERMUTATIONS,
    seed: int = 0,
) -> float:
    """Two-sided permutation p-value for the dominance statistic."""
    a = np.asarray(x1, dtype=np.float64)
    b = np.asarray(x2, dtype=np.float64)
    observed = abs(cliffs_delta(a, b))
    pooled = np.concatenate([a, b])
    rng = np.random.Generator(np.random.PCG64(seed))
    hits = 0
    for _ in range(permutations):
        perm = rng.permutation(pooled)
        if abs(cliffs_delta(perm[: a.size], perm[a.size :])) >= observed - 1e-15:
            hits += 1
    return (hits + 1) / (permutations + 1)


def welch_t(x1: Sequence[float], x2: Sequence[float]) -> tuple[float, float]:
    """Welch two-sample t statistic and two-sided p-value."""
    a = np.asarray(x1, dtype=np.float64)
    b = np.asarray(x2, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise InputError("each group needs at least two values")
    v1 = np.var(a, ddof=1) / a.size
    v2 = np.var(b, ddof=1) / b.size
    denom = math.sqrt(v1 + v2)
    if denom == 0:
        return (0.0, 1.0) if a.mean() == b.mean() else (math.inf, 0.0)
    t = float((a.mean() - b.mean()) / denom)
    df = (v1 + v2) ** 2 / (
        v1**2 / (a.size - 1) + v2**2 / (b.size - 1)
    )
    p = 2.0 * float(scipy_stats.t.sf(abs(t), df))
    return t, p


@dataclass(frozen=True)
class BootstrapResult:
    estimate: float
    ci_low: float
    ci_high: float
    p: float
    t_value: float
    t_p: float
    n_bootstrap: int
    confidence: float


def bootstrap_test(
    x1: Sequence[float],
    x2: Sequence[float],
    statistic: Callable[[np.ndarray], float] = np.mean,
    n_boot: int = DEFAULT_BOOTSTRAP_SAMPLES,
    confidence: float = DEFAULT_CONFIDENCE,
    seed: int = 0,
) -> BootstrapResult:
    """Percentile-bootstrap test of the statistic's group difference.

    The two-sided p-value resamples from mean-centered groups (the null
    of no difference); the Welch t statistic and its p accompany every
    result.  Deterministic per seed.
    """
    a = np.asarray(x1, dtype=np.float64)
    b = np.asarray(x2, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise InputError("each group needs at least two values")
    rng = np.random.Generator(np.random.PCG64(seed))
    observed = float(statistic(a) - statistic(b))

    boot = np.empty(n_boot)
    for i in range(n_boot):
        ra = a[rng.integers(0, a.size, a.size)]
        rb = b[rng.integers(0, b.size, b.size)]
        boot[i] = statistic(ra) - statistic(rb)
    tail = (1.0 - confidence) / 2.0
    ci_low, ci_high = np.quantile(boot, [tail, 1.0 - tail])

    grand = float(np.concatenate([a, b]).mean())
    a0 = a - a.mean() + grand
    b0 = b - b.mean() + grand
    hits = 0
    for _ in range(n_boot):
        ra = a0[rng.integers(0, a.size, a.size)]
        rb = b0[rng.integers(0, b.size, b.size)]
        if abs(statistic(ra) - statistic(rb)) >= abs(observed) - 1e-15:
            hits += 1
    p = (hits + 1) / (n_boot + 1)

    t_value, t_p = welch_t(a, b)
    return BootstrapResult(
        estimate=observed,
        ci_low=float(ci_low),
        ci_high=float(ci_high),
        p=p,
        t_value=t_value,
        t_p=t_p,
        n_bootstrap=n_boot,
        confidence=confidence,
    )


@dataclass(frozen=True)
class EffectReport:
    t_value: float
    t_p: float
    cliffs_delta: float
    cliffs_p: float
    cohens_d: float
    hedges_g: float
    glass_delta: float
    param_p: float
    n_bootstrap: int = DEFAULT_BOOTSTRAP_SAMPLES
    confidence: float = DEFAULT_CONFIDENCE


def effect_report(
    x1: Sequence[float],
    x2: Sequence[float],
    n_boot: int = DEFAULT_BOOTSTRAP_SAMPLES,
    confidence: float = DEFAULT_CONFIDENCE,
    seed: int = 0,
) -> EffectReport:
    """All effect statistics of group 1 against (control) group 2."""
    a = np.asarray(x1, dtype=np.float64)
    b = np.asarray(x2, dtype=np.float64)
    boot = bootstrap_test(a, b, np.mean, n_boot=n_boot, confidence=confidence, seed=seed)
    try:
        d = cohens_d(a, b)
        g = hedges_g(d, a.size, b.size)
    except UndefinedMetricError:
        d = 0.0
        g = 0.0
    try:
        delta = glass_delta(a, b)
    except UndefinedMetricError:
        delta = 0.0
    return EffectReport(
        t_value=boot.t_value,
        t_p=boot.t_p,
        cliffs_delta=cliffs_delta(a, b),
        cliffs_p=cliffs_delta_p(a, b, seed=derive_seed(seed, "cliff")),
        cohens_d=d,
        hedges_g=g,
        glass_delta=delta,
        param_p=boot.p,
        n_bootstrap=n_boot,
        confidence=confidence,
    )


# ---------------------------------------------------------------------------
# estimators over evaluation rows


@dataclass(frozen=True, eq=False)
class EvalRow:
    key: tuple[str, str]
    features: np.ndarray  # (dev_count, sloc_m, dev_time_months)
    target: float
    vector: np.ndarray | None = None


@dataclass
class EvalDataset:
    rows: tuple[EvalRow, ...]

    @classmethod
    def from_corpus(cls, corpus: Corpus) -> "EvalDataset":
        """Rows for the cleaned effort records (devCount and months >= 1)."""
        vectors = {v.key: v.values for v in corpus.vectors}
        rows = []
        for e in clean_dataset(corpus.efforts):
            rows.append(
                EvalRow(
                    key=e.key,
                    features=np.array([e.dev_count, e.sloc_m, e.dev_time_months], dtype=np.float64),
                    target=e.effort_pm,
                    vector=vectors.get(e.key),
                )
            )
        return cls(rows=tuple(rows))

    def __len__(self) -> int:
        return len(self.rows)


class Estimator(Protocol):
    name: str

    def fit(self, train_rows: Sequence[EvalRow], seed: int) -> None: ...

    def predict(self, row: EvalRow) -> float: ...


def _feature_matrix(rows: Sequence[EvalRow]) -> FeatureMatrix:
    return FeatureMatrix(
        rows=np.stack([r.features for r in rows]),
        targets=np.array([r.target for r in rows]),
    ).fit_normalization()


class DevSdeeEstimator:
    """Description-similarity retrieval with triangle-weighted aggregation.

    In comparative evaluation every estimator must emit a prediction for
    every held-out row, so the similarity threshold defaults to off and
    retrieval is pure top-k over the training partition.
    """

    def __init__(self, k: int = 2, alpha_hat: float | None = None):
        self.name = "DevSDEE"
        self.k = k
        self.alpha_hat = alpha_hat
        self._train: list[EvalRow] = []

    def fit(self, train_rows: Sequence[EvalRow], seed: int) -> None:
        self._train = [r for r in train_rows if r.vector is not None]
        if not self._train:
            raise InputError("no training rows carry description vectors")

    def predict(self, row: EvalRow) -> float:
        if row.vector is None:
            raise InputError(f"{row.key}: row has no description vector")
        scored = sorted(
            (
                (similarity_score(row.vector, t.vector), t)
                for t in self._train
            ),
            key=lambda st: (-st[0], st[1].key),
        )
        if self.alpha_hat is not None:
            scored = [st for st in scored if st[0] >= self.alpha_hat]
        top = scored[: self.k]
        if not top:
            raise UndefinedMetricError("no training row clears the similarity threshold")
        return walkerden([t.target for _, t in top])


class AtlmEstimator:
    def __init__(self):
        self.name = "ATLM"
        self._model: LinearModel | None = None

    def fit(self, train_rows: Sequence[EvalRow], seed: int) -> None:
        self._model = atlm_fit(_feature_matrix(train_rows))

    def predict(self, row: EvalRow) -> float:
        return atlm_predict(self._model, row.features)


class AbeEstimator:
    def __init__(self, k: int = 2):
        self.name = "ABE"
        self.k = k
        self._matrix: FeatureMatrix | None = None

    def fit(self, train_rows: Sequence[EvalRow], seed: int) -> None:
        self._matrix = _feature_matrix(train_rows)

    def predict(self, row: EvalRow) -> float:
        return abe_estimate(self._matrix, row.features, self.k)


class LocEstimator:
    def __init__(self, k: int = 2):
        self.name = "LOC"
        self.k = k
        self._matrix: FeatureMatrix | None = None

    def fit(self, train_rows: Sequence[EvalRow], seed: int) -> None:
        self._matrix = _feature_matrix(train_rows)

    def predict(self, row: EvalRow) -> float:
        return loc_strawman_estimate(self._matrix, float(row.features[1]), self.k)


class MlpEstimator:
    def __init__(self, hidden: int = 16, epochs: int = 300, lr: float = 0.05):
        self.name = "MLP"
        self.hidden = hidden
        self.epochs = epochs
        self.lr = lr
        self._model = None

    def fit(self, train_rows: Sequence[EvalRow], seed: int) -> None:
        self._model = mlp_fit(
            _feature_matrix(train_rows),
            hidden=self.hidden,
            epochs=self.epochs,
            lr=self.lr,
            seed=seed,
        )

    def predict(self, row: EvalRow) -> float:
        return mlp_predict(self._model, row.features)


def default_estimators(devsdee_k: int = 2, knn_k: int = 2) -> list[Estimator]:
    return [
        DevSdeeEstimator(k=devsdee_k),
        AtlmEstimator(),
        AbeEstimator(k=knn_k),
        LocEstimator(k=knn_k),
        MlpEstimator(),
    ]


# ---------------------------------------------------------------------------
# protocol drivers


@dataclass(frozen=True)
class MetricCell:
    mean: float | None
    stddev: float | None
    n_trials: int
    reason: str | None = None


@dataclass
class TrialRecord:
    trial: int
    estimator: str
    metrics: dict[str, float | None]
    reasons: dict[str, str]
    estimates: tuple[float, ...]
    actuals: tuple[float, ...]


@dataclass
class MetricReport:
    protocol: str
    estimator_names: tuple[str, ...]
    cells: dict[str, dict[str, MetricCell]]
    trials: list[TrialRecord]

    def metric_series(self, estimator: str, metric: str) -> list[float]:
        return [
            t.metrics[metric]
            for t in self.trials
            if t.estimator == estimator and t.metrics.get(metric) is not None
        ]

    def pooled_predictions(self, estimator: str) -> tuple[list[float], list[float]]:
        est: list[float] = []
        act: list[float] = []
        for t in self.trials:
            if t.estimator == estimator:
                est.extend(t.estimates)
                act.extend(t.actuals)
        return est, act

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        header = ["estimator"]
        for m in METRIC_NAMES:
            header += [f"{m}_mean", f"{m}_std"]
        writer.writerow(header)
        for name in self.estimator_names:
            row = [name]
            for m in METRIC_NAMES:
                cell = self.cells[name][m]
                if cell.mean is None:
                    row += [f"undefined ({cell.reason})", ""]
                else:
                    row += [f"{cell.mean:.6f}", f"{cell.stddev:.6f}"]
            writer.writerow(row)
        return buf.getvalue()

    def to_text(self) -> str:
        """Aligned table, one estimator per row, mean +/- std per metric."""
        widths = {m: max(len(m), 18) for m in METRIC_NAMES}
        name_w = max(len(n) for n in self.estimator_names) + 2
        lines = [
            f"{self.protocol} results".ljust(name_w)
            + "".join(m.upper().rjust(widths[m]) for m in METRIC_NAMES)
        ]
        for name in self.estimator_names:
            row = name.ljust(name_w)
            for m in METRIC_NAMES:
                cell = self.cells[name][m]
                if cell.mean is None:
                    row += "undefined".rjust(widths[m])
                else:
                    row += f"{cell.mean:.2f} ± {cell.stddev:.2f}".rjust(widths[m])
            lines.append(row)
        return "\n".join(lines) + "\n"

    def to_jsonl(self) -> str:
        lines = []
        for t in self.trials:
            lines.append(
                json.dumps(
                    {
                        "protocol": self.protocol,
                        "trial": t.trial,
                        "estimator": t.estimator,
                        "metrics": t.metrics,
                        "reasons": t.reasons,
                        "estimates": list(t.estimates),
                        "actuals": list(t.actuals),
                    },
                    sort_keys=True,
                )
            )
        return "\n".join(lines) + "\n"


def _trial_metrics(
    estimates: Sequence[float], actuals: Sequence[float], rg_mar: float
) -> tuple[dict[str, float | None], dict[str, str]]:
    pairs = list(zip(estimates, actuals))
    values: dict[str, float | None] = {}
    reasons: dict[str, str] = {}
    computations: dict[str, Callable[[], float]] = {
        "lsd": lambda: lsd(pairs),
        "re_star": lambda: re_star(pairs),
        "mar": lambda: mar(pairs),
        "mmre": lambda: mmre(pairs),
        "mdmre": lambda: mdmre(pairs),
        "sa": lambda: sa(mar(pairs), rg_mar),
    }
    for name, compute in computations.items():
        try:
            values[name] = compute()
        except (UndefinedMetricError, InputError) as exc:
            values[name] = None
            reasons[name] = str(exc)
    return values, reasons


def _evaluate_split(
    protocol: str,
    trial_index: int,
    train_rows: Sequence[EvalRow],
    test_rows: Sequence[EvalRow],
    estimators: Sequence[Estimator],
    root_seed: int,
) -> list[TrialRecord]:
    actuals = [r.target for r in test_rows]
    rg_mar = random_guess_mar(
        actuals,
        trials=RANDOM_GUESS_TRIALS,
        seed=derive_seed(root_seed, protocol, trial_index, "rg"),
        train_targets=[r.target for r in train_rows],
    )
    records = []
    for estimator in estimators:
        fit_seed = derive_seed(root_seed, protocol, trial_index, estimator.name)
        try:
            estimator.fit(train_rows, seed=fit_seed)
            estimates = [float(estimator.predict(r)) for r in test_rows]
        except (InputError, UndefinedMetricError, SingularFitError) as exc:
            records.append(
                TrialRecord(
                    trial=trial_index,
                    estimator=estimator.name,
                    metrics={m: None for m in METRIC_NAMES},
                    reasons={m: f"estimator failed: {exc}" for m in METRIC_NAMES},
                    estimates=(),
                    actuals=tuple(actuals),
                )
            )
            continue
        values, reasons = _trial_metrics(estimates, actuals, rg_mar)
        records.append(
            TrialRecord(
                trial=trial_index,
                estimator=estimator.name,
                metrics=values,
                reasons=reasons,
                estimates=tuple(estimates),
                actuals=tuple(actuals),
            )
        )
    return records


def _aggregate(
    protocol: str, estimators: Sequence[Estimator], trials: list[TrialRecord]
) -> MetricReport:
    cells: dict[str, dict[str, MetricCell]] = {}
    for estimator in estimators:
        per_metric: dict[str, MetricCell] = {}
        mine = [t for t in trials if t.estimator == estimator.name]
        for metric in METRIC_NAMES:
            defined = [t.metrics[metric] for t in mine if t.metrics[metric] is not None]
            if not defined:
                reasons = {t.reasons.get(metric, "undefined") for t in mine}
                per_metric[metric] = MetricCell(
                    mean=None, stddev=None, n_trials=0, reason="; ".join(sorted(reasons))
                )
            else:
                arr = np.asarray(defined)
                per_metric[metric] = MetricCell(
                    mean=float(arr.mean()),
                    stddev=float(arr.std(ddof=1)) if arr.size > 1 else 0.0,
                    n_trials=arr.size,
                )
        cells[estimator.name] = per_metric
    return MetricReport(
        protocol=protocol,
        estimator_names=tuple(e.name for e in estimators),
        cells=cells,
        trials=trials,
    )


def randomized_trials(
    dataset: EvalDataset,
    estimators: Sequence[Estimator],
    x: int = 55,
    r: int = 20,
    seed: int = 0,
) -> MetricReport:
    """r shuffled hold-out trials with x test rows each."""
    n = len(dataset)
    if x >= n:
        raise InputError(f"test size x={x} must be below the dataset size {n}")
    trials: list[TrialRecord] = []
    for t in range(r):
        rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "random", t)))
        perm = rng.permutation(n)
        test_rows = [dataset.rows[i] for i in perm[:x]]
        train_rows = [dataset.rows[i] for i in perm[x:]]
        trials.extend(
            _evaluate_split("random", t, train_rows, test_rows, estimators, seed)
        )
    return _aggregate("random", estimators, trials)


def kfold(
    dataset: EvalDataset,
    estimators: Sequence[Estimator],
    k: int = 10,
    seed: int = 0,
) -> MetricReport:
    """Standard k-fold cross-validation after one seeded shuffle."""
    n = len(dataset)
    if k > n:
        raise InputError(f"k={k} exceeds the dataset size {n}")
    if k < 2:
        raise InputError("k must be at least 2")
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, "kfold")))
    perm = rng.permutation(n)
    folds = np.array_split(perm, k)
    trials: list[TrialRecord] = []
    for t, fold in enumerate(folds):
        test_idx = set(int(i) for i in fold)
        test_rows = [dataset.rows[i] for i in fold]
        train_rows = [dataset.rows[i] for i in range(n) if i not in test_idx]
        trials.extend(
            _evaluate_split("kfold", t, train_rows, test_rows, estimators, seed)
        )
    return _aggregate("kfold", estimators, trials)


# ---------------------------------------------------------------------------
# significance suite


@dataclass(frozen=True)
class BaselineComparison:
    estimator: str
    sa_vs_devsdee: float
    effects: EffectReport


@dataclass(frozen=True)
class SignificanceReport:
    estimates_vs_actuals: EffectReport
    baseline_comparisons: tuple[BaselineComparison, ...]


def significance_suite(
    devsdee_estimates: Sequence[float],
    true_efforts: Sequence[float],
    mar_series: Mapping[str, Sequence[float]],
    n_boot: int = DEFAULT_BOOTSTRAP_SAMPLES,
    confidence: float = DEFAULT_CONFIDENCE,
    seed: int = 0,
) -> SignificanceReport:
    """Closeness-to-truth tests plus per-baseline error comparisons.

    ``mar_series`` maps estimator names to their per-trial MAR values
    and must include ``DevSDEE``; every other entry is compared against
    it,
    with standardized accuracy computed from the mean MARs.
    """
    if "DevSDEE" not in mar_series:
        raise InputError("mar_series must include a 'DevSDEE' entry")
    exp_closeness = effect_report(
        devsdee_estimates, true_efforts, n_boot=n_boot, confidence=confidence,
        seed=derive_seed(seed, "closeness"),
    )
    dev_mars = list(mar_series["DevSDEE"])
    comparisons = []
    for name in sorted(mar_series):
        if name == "DevSDEE":
            continue
        other = list(mar_series[name])
        comparisons.append(
            BaselineComparison(
                estimator=name,
                sa_vs_devsdee=sa(float(np.mean(dev_mars)), float(np.mean(other))),
                effects=effect_report(
                    other, dev_mars, n_boot=n_boot, confidence=confidence,
                    seed=derive_seed(seed, "baseline", name),
                ),
            )
        )
    return SignificanceReport(
        estimates_vs_actuals=exp_closeness,
        baseline_comparisons=tuple(comparisons),
    )
