"""Developer-activity effort metrics.

Per-repository measures mined from release windows and commit history:
distinct developer count, development time in months, modified SLOC,
and person-month effort, plus the Pearson correlation analysis over a
whole corpus.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .corpus import CommitStat, ReleaseWindow
from .errors import InputError, UndefinedMetricError

DAYS_PER_MONTH = 30.44


def dev_time(windows: Sequence[ReleaseWindow]) -> float:
    """Mean release duration in months (30.44 days per month)."""
    if not windows:
        raise UndefinedMetricError("development time undefined for zero releases")
    total_days = sum(w.days for w in windows)
    return total_days / len(windows) / DAYS_PER_MONTH


def effort(dev_count: int, t_months: float) -> float:
    """Person-month effort: developers times development months."""
    if dev_count < 1:
        raise UndefinedMetricError(f"developer count {dev_count} below 1")
    if t_months < 0:
        raise InputError("negative development time")
    return dev_count * t_months


@dataclass(frozen=True)
class ReleaseEffort:
    release_no: str
    dev_count: int
    days: float
    effort_pm: float


@dataclass(frozen=True)
class EffortRecord:
    """Effort metrics for one repository.

    ``dev_time_months`` is the effort-consistent development time
    (``effort_pm / dev_count``), so ``effort_pm == dev_count *
    dev_time_months`` holds by construction even when per-release
    developer sets differ.
    """

    owner: str
    repo: str
    dev_count: int
    dev_time_months: float
    sloc_m: int
    effort_pm: float
    per_release: tuple[ReleaseEffort, ...] = ()

    def __post_init__(self) -> None:
        for name in ("dev_count", "dev_time_months", "sloc_m", "effort_pm"):
            if getattr(self, name) < 0:
                raise InputError(f"{self.owner}/{self.repo}: negative {name}")
        if self.dev_count >= 1:
            expected = self.dev_count * self.dev_time_months
            if not math.isclose(self.effort_pm, expected, rel_tol=1e-9, abs_tol=1e-12):
                raise InputError(
                    f"{self.owner}/{self.repo}: effort {self.effort_pm} != "
                    f"dev_count*dev_time {expected}"
                )

    @property
    def key(self) -> tuple[str, str]:
        return (self.owner, self.repo)


def attribute_commits(
    windows: Sequence[ReleaseWindow], commits: Sequence[CommitStat]
) -> tuple[dict[str, list[CommitStat]], list[CommitStat]]:
    """Assign each commit to the latest release window containing it.

    Commits outside every window are returned separately as orphans.
    """
    by_release: dict[str, list[CommitStat]] = {w.release_no: [] for w in windows}
    ordered = sorted(windows, key=lambda w: (w.start, w.end, w.release_no))
    orphans: list[CommitStat] = []
    for commit in commits:
        target = None
        for window in ordered:
            if window.start <= commit.timestamp <= window.end:
                target = window.release_no
        if target is None:
            orphans.append(commit)
        else:
            by_release[target].append(commit)
    return by_release, orphans


def release_effort_rollup(
    owner: str,
    repo: str,
    windows: Sequence[ReleaseWindow],
    commits: Sequence[CommitStat],
) -> EffortRecord:
    """Roll per-release efforts up to one repository record.

    Each release contributes ``distinct devs in window * window months``;
    the repository effort is the mean of those contributions.  The
    repository developer count is the number of distinct developers over
    all windows, and ``sloc_m`` totals modified lines of the attributed
    commits.
    """
    if not windows:
        raise UndefinedMetricError(f"{owner}/{repo}: no releases to roll up")
    by_release, _orphans = attribute_commits(windows, commits)

    per_release = []
    all_devs: set[str] = set()
    sloc_m = 0
    for window in windows:
        attributed = by_release[window.release_no]
        devs = {c.dev_id for c in attributed}
        all_devs.update(devs)
        sloc_m += sum(c.sloc_modified for c in attributed)
        months = window.days / DAYS_PER_MONTH
        per_release.append(
            ReleaseEffort(
                release_no=window.release_no,
                dev_count=len(devs),
                days=window.days,
                effort_pm=len(devs) * months,
            )
        )

    effort_pm = sum(r.effort_pm for r in per_release) / len(per_release)
    dev_count = len(all_devs)
    dev_time_months = effort_pm / dev_count if dev_count else 0.0
    return EffortRecord(
        owner=owner,
        repo=repo,
        dev_count=dev_count,
        dev_time_months=dev_time_months,
        sloc_m=sloc_m,
        effort_pm=effort_pm,
        per_release=tuple(per_release),
    )


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Product-moment correlation coefficient."""
    if len(x) != len(y):
        raise InputError(f"length mismatch: {len(x)} vs {len(y)}")
    n = len(x)
    if n < 2:
        raise InputError("need at least two observations")
    mean_x = sum(x) / n
    mean_y = sum(y) / n
    dx = [xi - mean_x for xi in x]
    dy = [yi - mean_y for yi in y]
    ssx = sum(d * d for d in dx)
    ssy = sum(d * d for d in dy)
    if ssx == 0 or ssy == 0:
        raise UndefinedMetricError("correlation undefined for zero-variance series")
    return sum(a * b for a, b in zip(dx, dy)) / math.sqrt(ssx * ssy)


@dataclass(frozen=True)
class CorrelationReport:
    sloc_vs_effort: float
    dev_count_vs_effort: float
    time_vs_effort: float


def correlation_report(records: Sequence[EffortRecord]) -> CorrelationReport:
    """Pearson coefficients of each activity metric against effort."""
    if len(records) < 2:
        raise InputError("need at least two effort records")
    efforts = [r.effort_pm for r in records]
    pairs = {
        "sloc_m": [float(r.sloc_m) for r in records],
        "dev_count": [float(r.dev_count) for r in records],
        "dev_time_months": [r.dev_time_months for r in records],
    }
    values: dict[str, float] = {}
    for name, series in pairs.items():
        try:
            values[name] = pearson(series, efforts)
        except UndefinedMetricError as exc:
            raise UndefinedMetricError(f"{name} vs effort: {exc}") from exc
    return CorrelationReport(
        sloc_vs_effort=values["sloc_m"],
        dev_count_vs_effort=values["dev_count"],
        time_vs_effort=values["dev_time_months"],
    )


def effort_report_csv(records: Iterable[EffortRecord]) -> str:
    """Render effort records as the metrics-report CSV."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["owner", "repo", "dev_count", "dev_time_months", "sloc_m", "effort_pm"])
    for r in records:
        writer.writerow(
            [r.owner, r.repo, r.dev_count, f"{r.dev_time_months:.6f}", r.sloc_m, f"{r.effort_pm:.6f}"]
        )
    return buf.getvalue()
