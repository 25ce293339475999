"""Repository corpus handling.

Covers the offline ingestion surface: repository metadata records and
their selection filters, description tokenization, the category
taxonomy, commit-log parsing, and dataset cleaning.  Persistence of an
assembled corpus lives in :mod:`sdee.store`.
"""

from __future__ import annotations

import datetime as dt
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable, Sequence

from .errors import InputError, SdeeError

MIN_SIZE_MB = 5.0
MIN_STARS = 500
MAX_AGE_YEARS = 3
PER_CATEGORY_CAP = 100
MIN_TOKEN_LEN = 2

_FENCED_CODE_RE = re.compile(r"```.*?```", re.DOTALL)
_INLINE_CODE_RE = re.compile(r"`[^`]*`")
_URL_RE = re.compile(r"(?:https?://|www\.)\S+")
_NON_ALNUM_RE = re.compile(r"[^a-z0-9]+")


class CommitLogError(SdeeError):
    """Raised for a malformed commit-log header line."""


class TaxonomyError(SdeeError):
    """Raised when the category taxonomy violates its structural rules."""


def tokenize(raw_text: str) -> tuple[str, ...]:
    """Normalize a description into word tokens.

    Lowercases, removes fenced/inline code and URLs, splits on anything
    that is not a lowercase letter or digit, and drops tokens shorter
    than two characters.  Deterministic: equal input, equal output.
    """
    text = raw_text.lower()
    text = _FENCED_CODE_RE.sub(" ", text)
    text = _INLINE_CODE_RE.sub(" ", text)
    text = _URL_RE.sub(" ", text)
    parts = _NON_ALNUM_RE.split(text)
    return tuple(p for p in parts if len(p) >= MIN_TOKEN_LEN)


@dataclass(frozen=True)
class DescriptionDoc:
    """A project description plus its normalized token sequence."""

    raw_text: str
    tokens: tuple[str, ...]

    @classmethod
    def from_text(cls, raw_text: str) -> "DescriptionDoc":
        return cls(raw_text=raw_text, tokens=tokenize(raw_text))

    def retokenized(self) -> tuple[str, ...]:
        return tokenize(self.raw_text)


@dataclass(frozen=True)
class RepoRecord:
    owner: str
    repo: str
    size_mb: float
    stars: int
    last_update: dt.date
    categories: tuple[str, ...]
    description: DescriptionDoc

    def __post_init__(self) -> None:
        if self.size_mb < 0:
            raise InputError(f"{self.owner}/{self.repo}: negative size_mb")
        if self.stars < 0:
            raise InputError(f"{self.owner}/{self.repo}: negative stars")

    @property
    def key(self) -> tuple[str, str]:
        return (self.owner, self.repo)


@dataclass(frozen=True)
class ReleaseWindow:
    """One release's development window, `start` through `end`."""

    release_no: str
    start: dt.datetime
    end: dt.datetime
    size_bytes: int = 0

    def __post_init__(self) -> None:
        if self.end < self.start:
            raise InputError(f"release {self.release_no}: end precedes start")

    @property
    def days(self) -> float:
        return (self.end - self.start).total_seconds() / 86400.0


@dataclass(frozen=True)
class CommitStat:
    """Line-level churn for one commit, whitespace-only lines excluded.

    `sloc_modified` is the per-file min(additions, deletions) summed over
    the commit's files; `sloc_added`/`sloc_deleted` hold the remainders.
    """

    commit_id: str
    dev_id: str
    timestamp: dt.datetime
    sloc_added: int
    sloc_deleted: int
    sloc_modified: int

    def __post_init__(self) -> None:
        for name in ("sloc_added", "sloc_deleted", "sloc_modified"):
            if getattr(self, name) < 0:
                raise InputError(f"commit {self.commit_id}: negative {name}")


@dataclass(frozen=True)
class Category:
    id: str
    name: str
    group: str


ABSTRACT_GROUPS: tuple[str, ...] = (
    "Software library",
    "Software utilities & plugin",
    "Software tool",
    "Software metrics",
    "Software driving engine",
    "A software framework",
    "Software middleware",
    "Software client",
    "Software server",
    "Software driver",
    "Software file system",
)


@dataclass(frozen=True)
class CategoryTaxonomy:
    """Concrete categories mapped onto the 11 abstract groups."""

    categories: tuple[Category, ...]
    abstract_groups: tuple[str, ...] = ABSTRACT_GROUPS

    def __post_init__(self) -> None:
        if len(self.abstract_groups) != 11:
            raise TaxonomyError(
                f"expected 11 abstract groups, got {len(self.abstract_groups)}"
            )
        groups = set(self.abstract_groups)
        for cat in self.categories:
            if cat.group not in groups:
                raise TaxonomyError(
                    f"category {cat.id!r} maps to unknown group {cat.group!r}"
                )

    def by_group(self) -> dict[str, list[Category]]:
        out: dict[str, list[Category]] = {g: [] for g in self.abstract_groups}
        for cat in self.categories:
            out[cat.group].append(cat)
        return out

    def group_of(self, category_id: str) -> str:
        for cat in self.categories:
            if cat.id == category_id:
                return cat.group
        raise TaxonomyError(f"unknown category id {category_id!r}")

    def ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.categories)


def load_default_taxonomy() -> CategoryTaxonomy:
    path = Path(__file__).parent / "data" / "categories.json"
    payload = json.loads(path.read_text(encoding="utf-8"))
    cats = tuple(
        Category(id=c["id"], name=c["name"], group=c["group"])
        for c in payload["categories"]
    )
    return CategoryTaxonomy(categories=cats, abstract_groups=tuple(payload["abstract_groups"]))


def _three_years_before(today: dt.date) -> dt.date:
    try:
        return today.replace(year=today.year - MAX_AGE_YEARS)
    except ValueError:  # Feb 29 on a non-leap target year
        return today.replace(year=today.year - MAX_AGE_YEARS, day=28)


def filter_repos(candidates: Sequence[RepoRecord], today: dt.date) -> list[RepoRecord]:
    """Apply the repository selection constraints.

    Keeps records with size strictly above 5 MB, strictly more than 500
    stars, and an update within the last three calendar years, then caps
    each category at its 100 highest-star members.  The returned list is
    sorted by stars descending (ties by owner/repo) and is idempotent
    under re-filtering.
    """
    cutoff = _three_years_before(today)
    eligible = [
        r
        for r in candidates
        if r.size_mb > MIN_SIZE_MB and r.stars > MIN_STARS and r.last_update >= cutoff
    ]

    order = sorted(eligible, key=lambda r: (-r.stars, r.owner, r.repo))
    rank_in_category: dict[str, int] = {}
    kept: list[RepoRecord] = []
    for record in order:
        admitted = False
        for cat in record.categories:
            rank = rank_in_category.get(cat, 0)
            if rank < PER_CATEGORY_CAP:
                admitted = True
            rank_in_category[cat] = rank + 1
        if admitted:
            kept.append(record)
    return kept


def _parse_numstat_field(value: str) -> int | None:
    """A numstat count; git emits `-` for binary files."""
    if value == "-":
        return 0
    if not value.isdigit():
        return None
    return int(value)


def parse_timestamp(value: str) -> dt.datetime:
    """ISO-8601 parse, normalized to naive UTC."""
    parsed = dt.datetime.fromisoformat(value.replace("Z", "+00:00"))
    if parsed.tzinfo is not None:
        parsed = parsed.astimezone(dt.timezone.utc).replace(tzinfo=None)
    return parsed


def parse_commit_log_detailed(stream: IO[str] | str) -> tuple[list[CommitStat], int]:
    """Parse a structured commit log into per-commit churn records.

    The format is one header line ``C|<commit_id>|<dev_id>|<timestamp>``
    followed by numstat lines ``<added>\\t<deleted>\\t<path>`` (binary
    files appear as ``-\\t-\\t<path>``), with commits separated by blank
    lines.  Returns the parsed records plus the count of numstat lines
    skipped because a count field would not parse.
    """
    if isinstance(stream, str):
        lines = stream.splitlines()
    else:
        lines = stream.read().splitlines()

    commits: list[CommitStat] = []
    skipped = 0
    header: tuple[str, str, dt.datetime] | None = None
    added = deleted = modified = 0

    def flush() -> None:
        nonlocal header, added, deleted, modified
        if header is not None:
            commit_id, dev_id, ts = header
            commits.append(
                CommitStat(
                    commit_id=commit_id,
                    dev_id=dev_id,
                    timestamp=ts,
                    sloc_added=added,
                    sloc_deleted=deleted,
                    sloc_modified=modified,
                )
            )
        header = None
        added = deleted = modified = 0

    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            flush()
            continue
        if line.startswith("C|"):
            flush()
            parts = line.split("|")
            if len(parts) != 4 or not parts[1] or not parts[2]:
                raise CommitLogError(f"line {lineno}: malformed commit header {line!r}")
            try:
                ts = parse_timestamp(parts[3])
            except ValueError as exc:
                raise CommitLogError(f"line {lineno}: bad timestamp {parts[3]!r}") from exc
            header = (parts[1], parts[2], ts)
            continue
        if header is None:
            raise CommitLogError(f"line {lineno}: numstat line before any commit header")
        fields = line.split("\t")
        if len(fields) < 3:
            skipped += 1
            continue
        add = _parse_numstat_field(fields[0])
        rem = _parse_numstat_field(fields[1])
        if add is None or rem is None:
            skipped += 1
            continue
        paired = min(add, rem)
        modified += paired
        added += add - paired
        deleted += rem - paired
    flush()
    return commits, skipped


def parse_commit_log(stream: IO[str] | str) -> list[CommitStat]:
    commits, _ = parse_commit_log_detailed(stream)
    return commits


def clean_dataset(records: Iterable) -> list:
    """Drop records whose developer count or development months fall below 1.

    Works on anything exposing ``dev_count`` and ``dev_time_months``;
    input order is preserved.
    """
    return [r for r in records if r.dev_count >= 1 and r.dev_time_months >= 1]


def read_repo_jsonl(path: Path | str) -> list[tuple[RepoRecord, tuple[ReleaseWindow, ...]]]:
    """Load repository metadata from a JSON-Lines file.

    Each line is an object with owner/repo/size_mb/stars/last_update/
    categories/description_path; description paths resolve relative to
    the JSONL file.  An optional ``releases`` array supplies explicit
    release windows; when absent the caller may fall back to deriving a
    single window from the commit span.
    """
    path = Path(path)
    out: list[tuple[RepoRecord, tuple[ReleaseWindow, ...]]] = []
    seen: set[tuple[str, str]] = set()
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise InputError(f"{path}:{lineno}: invalid JSON") from exc
        key = (obj["owner"], obj["repo"])
        if key in seen:
            raise InputError(f"{path}:{lineno}: duplicate repository {key[0]}/{key[1]}")
        seen.add(key)
        desc_path = path.parent / obj["description_path"]
        record = RepoRecord(
            owner=obj["owner"],
            repo=obj["repo"],
            size_mb=float(obj["size_mb"]),
            stars=int(obj["stars"]),
            last_update=dt.date.fromisoformat(obj["last_update"]),
            categories=tuple(obj["categories"]),
            description=DescriptionDoc.from_text(desc_path.read_text(encoding="utf-8")),
        )
        windows = tuple(
            ReleaseWindow(
                release_no=r["release_no"],
                start=parse_timestamp(r["start"]),
                end=parse_timestamp(r["end"]),
                size_bytes=int(r.get("size_bytes", 0)),
            )
            for r in obj.get("releases", [])
        )
        out.append((record, windows))
    return out
