"""Embedded relational persistence for an assembled corpus.

A corpus is stored in a single SQLite file with four required logical
tables — ``release_info``, ``commit_stats``, ``release_effort_estimate``
and ``soft_desc_pva_vec`` — plus auxiliary tables for repository
metadata, raw release windows, and corpus-level metadata (schema
version, reference vector, calibrated threshold, model id).

Loading validates the schema first and reports corrupted rows by table
and row index.  ``load(persist(c))`` reproduces the corpus exactly,
including vector bytes.  One writer at a time; loaded corpora are
immutable snapshots, safe to share across threads.
"""

from __future__ import annotations

import datetime as dt
import json
import sqlite3
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .corpus import CommitStat, DescriptionDoc, ReleaseWindow, RepoRecord, parse_timestamp
from .errors import SdeeError
from .metrics import EffortRecord, ReleaseEffort
from .embed.pvdbow import SimilarityModel, infer_vector

SCHEMA_VERSION = 1

REQUIRED_TABLES: dict[str, tuple[str, ...]] = {
    "release_info": ("owner", "repo", "release_no", "release_date", "size"),
    "commit_stats": (
        "owner",
        "repo",
        "commit_id",
        "dev_id",
        "ts",
        "sloc_added",
        "sloc_deleted",
        "sloc_modified",
        "effort",
        "dev_time",
    ),
    "release_effort_estimate": (
        "owner",
        "repo",
        "min_release_ids",
        "max_release_ids",
        "start_release_date",
        "end_release_date",
        "days",
        "dev_count",
        "effort_pm",
    ),
    "soft_desc_pva_vec": ("owner", "repo", "category", "vector", "ref_cos_sim"),
}

_DDL = """
CREATE TABLE repo_info (
    owner TEXT NOT NULL, repo TEXT NOT NULL,
    size_mb REAL NOT NULL, stars INTEGER NOT NULL, last_update TEXT NOT NULL,
    categories TEXT NOT NULL, description TEXT NOT NULL,
    dev_count INTEGER, dev_time_months REAL, sloc_m INTEGER, effort_pm REAL,
    PRIMARY KEY (owner, repo)
);
CREATE TABLE release_window (
    owner TEXT NOT NULL, repo TEXT NOT NULL, release_no TEXT NOT NULL,
    start_ts TEXT NOT NULL, end_ts TEXT NOT NULL
);
CREATE TABLE release_info (
    owner TEXT NOT NULL, repo TEXT NOT NULL, release_no TEXT NOT NULL,
    release_date TEXT NOT NULL, size INTEGER NOT NULL
);
CREATE TABLE commit_stats (
    owner TEXT NOT NULL, repo TEXT NOT NULL,
    commit_id TEXT NOT NULL, dev_id TEXT NOT NULL, ts TEXT NOT NULL,
    sloc_added INTEGER NOT NULL, sloc_deleted INTEGER NOT NULL,
    sloc_modified INTEGER NOT NULL, effort REAL, dev_time REAL
);
CREATE TABLE release_effort_estimate (
    owner TEXT NOT NULL, repo TEXT NOT NULL,
    min_release_ids TEXT NOT NULL, max_release_ids TEXT NOT NULL,
    start_release_date TEXT, end_release_date TEXT,
    days REAL NOT NULL, dev_count INTEGER NOT NULL, effort_pm REAL NOT NULL
);
CREATE TABLE soft_desc_pva_vec (
    owner TEXT NOT NULL, repo TEXT NOT NULL, category TEXT NOT NULL,
    vector BLOB NOT NULL, ref_cos_sim REAL NOT NULL
);
CREATE TABLE corpus_meta (key TEXT PRIMARY KEY, value TEXT NOT NULL);
"""


class SchemaError(SdeeError):
    """The store file is missing a required table or column."""


class StoreLoadError(SdeeError):
    """A row could not be decoded; the message names table and row index."""


@dataclass(frozen=True, eq=False)
class StoredVector:
    owner: str
    repo: str
    category: str
    values: np.ndarray  # float32
    ref_cos_sim: float

    @property
    def key(self) -> tuple[str, str]:
        return (self.owner, self.repo)


@dataclass(eq=False)
class Corpus:
    repos: tuple[RepoRecord, ...] = ()
    windows: Mapping[tuple[str, str], tuple[ReleaseWindow, ...]] = field(default_factory=dict)
    commits: Mapping[tuple[str, str], tuple[CommitStat, ...]] = field(default_factory=dict)
    efforts: tuple[EffortRecord, ...] = ()
    vectors: tuple[StoredVector, ...] = ()
    reference_vector: np.ndarray | None = None
    alpha_hat: float | None = None
    model_id: str | None = None

    def effort_by_key(self) -> dict[tuple[str, str], EffortRecord]:
        return {e.key: e for e in self.efforts}

    def repo_by_key(self) -> dict[tuple[str, str], RepoRecord]:
        return {r.key: r for r in self.repos}

    def comparable(self):
        """Plain-data projection used for equality checks in tests."""
        return (
            tuple(
                (
                    r.owner,
                    r.repo,
                    r.size_mb,
                    r.stars,
                    r.last_update.isoformat(),
                    r.categories,
                    r.description.raw_text,
                )
                for r in self.repos
            ),
            tuple(
                (k, tuple((w.release_no, w.start.isoformat(), w.end.isoformat(), w.size_bytes) for w in ws))
                for k, ws in sorted(self.windows.items())
            ),
            tuple(
                (
                    k,
                    tuple(
                        (c.commit_id, c.dev_id, c.timestamp.isoformat(), c.sloc_added, c.sloc_deleted, c.sloc_modified)
                        for c in cs
                    ),
                )
                for k, cs in sorted(self.commits.items())
            ),
            tuple(
                (
                    e.owner,
                    e.repo,
                    e.dev_count,
                    e.dev_time_months,
                    e.sloc_m,
                    e.effort_pm,
                    tuple((p.release_no, p.dev_count, p.days, p.effort_pm) for p in e.per_release),
                )
                for e in self.efforts
            ),
            tuple(
                (v.owner, v.repo, v.category, v.values.astype("<f4").tobytes(), v.ref_cos_sim)
                for v in self.vectors
            ),
            None if self.reference_vector is None else self.reference_vector.astype("<f4").tobytes(),
            self.alpha_hat,
            self.model_id,
        )


def attach_vectors(corpus: Corpus, model: SimilarityModel) -> Corpus:
    """Precompute and attach one description vector per repository."""
    vectors = []
    for record in corpus.repos:
        emb = infer_vector(record.description, model)
        vectors.append(
            StoredVector(
                owner=record.owner,
                repo=record.repo,
                category=record.categories[0] if record.categories else "",
                values=emb.values,
                ref_cos_sim=emb.ref_cos_sim,
            )
        )
    return replace(
        corpus,
        vectors=tuple(vectors),
        reference_vector=model.ref_vector.copy(),
        model_id=model.model_id,
    )


def persist(corpus: Corpus, path: Path | str) -> None:
    """Write the corpus to ``path``, replacing any existing store."""
    path = Path(path)
    if path.exists():
        path.unlink()
    conn = sqlite3.connect(path)
    try:
        conn.executescript(_DDL)
        effort_index = corpus.effort_by_key()
        for r in corpus.repos:
            e = effort_index.get(r.key)
            conn.execute(
                "INSERT INTO repo_info VALUES (?,?,?,?,?,?,?,?,?,?,?)",
                (
                    r.owner,
                    r.repo,
                    r.size_mb,
                    r.stars,
                    r.last_update.isoformat(),
                    json.dumps(list(r.categories)),
                    r.description.raw_text,
                    e.dev_count if e else None,
                    e.dev_time_months if e else None,
                    e.sloc_m if e else None,
                    e.effort_pm if e else None,
                ),
            )
        for (owner, repo), windows in corpus.windows.items():
            for w in windows:
                conn.execute(
                    "INSERT INTO release_window VALUES (?,?,?,?,?)",
                    (owner, repo, w.release_no, w.start.isoformat(), w.end.isoformat()),
                )
                conn.execute(
                    "INSERT INTO release_info VALUES (?,?,?,?,?)",
                    (owner, repo, w.release_no, w.end.date().isoformat(), w.size_bytes),
                )
        for (owner, repo), commits in corpus.commits.items():
            conn.executemany(
                "INSERT INTO commit_stats VALUES (?,?,?,?,?,?,?,?,?,?)",
                [
                    (
                        owner,
                        repo,
                        c.commit_id,
                        c.dev_id,
                        c.timestamp.isoformat(),
                        c.sloc_added,
                        c.sloc_deleted,
                        c.sloc_modified,
                        None,
                        None,
                    )
                    for c in commits
                ],
            )
        for e in corpus.efforts:
            window_index = {
                w.release_no: w for w in corpus.windows.get(e.key, ())
            }
            for p in e.per_release:
                w = window_index.get(p.release_no)
                conn.execute(
                    "INSERT INTO release_effort_estimate VALUES (?,?,?,?,?,?,?,?,?)",
                    (
                        e.owner,
                        e.repo,
                        p.release_no,
                        p.release_no,
                        w.start.isoformat() if w else None,
                        w.end.isoformat() if w else None,
                        p.days,
                        p.dev_count,
                        p.effort_pm,
                    ),
                )
        for v in corpus.vectors:
            conn.execute(
                "INSERT INTO soft_desc_pva_vec VALUES (?,?,?,?,?)",
                (
                    v.owner,
                    v.repo,
                    v.category,
                    np.ascontiguousarray(v.values, dtype="<f4").tobytes(),
                    v.ref_cos_sim,
                ),
            )
        meta: dict[str, str] = {"schema_version": str(SCHEMA_VERSION)}
        if corpus.reference_vector is not None:
            meta["reference_vector"] = np.ascontiguousarray(
                corpus.reference_vector, dtype="<f4"
            ).tobytes().hex()
        if corpus.alpha_hat is not None:
            meta["alpha_hat"] = repr(corpus.alpha_hat)
        if corpus.model_id is not None:
            meta["model_id"] = corpus.model_id
        conn.executemany("INSERT INTO corpus_meta VALUES (?,?)", sorted(meta.items()))
        conn.commit()
    finally:
        conn.close()


def _check_schema(conn: sqlite3.Connection, path: Path) -> None:
    for table, columns in REQUIRED_TABLES.items():
        rows = conn.execute(f"PRAGMA table_info({table})").fetchall()
        if not rows:
            raise SchemaError(f"{path}: missing required table {table!r}")
        present = {r[1] for r in rows}
        for col in columns:
            if col not in present:
                raise SchemaError(f"{path}: table {table!r} missing column {col!r}")


def load(path: Path | str) -> Corpus:
    """Load a corpus, validating schema and row integrity."""
    path = Path(path)
    if not path.exists():
        raise StoreLoadError(f"store not found: {path}")
    conn = sqlite3.connect(path)
    try:
        _check_schema(conn, path)

        repos: list[RepoRecord] = []
        effort_scalars: dict[tuple[str, str], tuple[int, float, int, float]] = {}
        for i, row in enumerate(conn.execute(
            "SELECT owner, repo, size_mb, stars, last_update, categories, description,"
            " dev_count, dev_time_months, sloc_m, effort_pm FROM repo_info ORDER BY rowid"
        )):
            try:
                repos.append(
                    RepoRecord(
                        owner=row[0],
                        repo=row[1],
                        size_mb=float(row[2]),
                        stars=int(row[3]),
                        last_update=dt.date.fromisoformat(row[4]),
                        categories=tuple(json.loads(row[5])),
                        description=DescriptionDoc.from_text(row[6]),
                    )
                )
            except (ValueError, TypeError, json.JSONDecodeError) as exc:
                raise StoreLoadError(f"{path}: repo_info row {i}: {exc}") from exc
            if row[7] is not None:
                effort_scalars[(row[0], row[1])] = (int(row[7]), float(row[8]), int(row[9]), float(row[10]))

        windows: dict[tuple[str, str], list[ReleaseWindow]] = {}
        window_sizes: dict[tuple[str, str, str], int] = {}
        for i, row in enumerate(conn.execute(
            "SELECT owner, repo, release_no, release_date, size FROM release_info ORDER BY rowid"
        )):
            window_sizes[(row[0], row[1], row[2])] = int(row[4])
        for i, row in enumerate(conn.execute(
            "SELECT owner, repo, release_no, start_ts, end_ts FROM release_window ORDER BY rowid"
        )):
            try:
                win = ReleaseWindow(
                    release_no=row[2],
                    start=parse_timestamp(row[3]),
                    end=parse_timestamp(row[4]),
                    size_bytes=window_sizes.get((row[0], row[1], row[2]), 0),
                )
            except (ValueError, TypeError) as exc:
                raise StoreLoadError(f"{path}: release_window row {i}: {exc}") from exc
            windows.setdefault((row[0], row[1]), []).append(win)

        commits: dict[tuple[str, str], list[CommitStat]] = {}
        for i, row in enumerate(conn.execute(
            "SELECT owner, repo, commit_id, dev_id, ts, sloc_added, sloc_deleted, sloc_modified"
            " FROM commit_stats ORDER BY rowid"
        )):
            try:
                stat = CommitStat(
                    commit_id=row[2],
                    dev_id=row[3],
                    timestamp=parse_timestamp(row[4]),
                    sloc_added=int(row[5]),
                    sloc_deleted=int(row[6]),
                    sloc_modified=int(row[7]),
                )
            except (ValueError, TypeError) as exc:
                raise StoreLoadError(f"{path}: commit_stats row {i}: {exc}") from exc
            commits.setdefault((row[0], row[1]), []).append(stat)

        per_release: dict[tuple[str, str], list[ReleaseEffort]] = {}
        for i, row in enumerate(conn.execute(
            "SELECT owner, repo, min_release_ids, days, dev_count, effort_pm"
            " FROM release_effort_estimate ORDER BY rowid"
        )):
            try:
                rel = ReleaseEffort(
                    release_no=row[2],
                    dev_count=int(row[4]),
                    days=float(row[3]),
                    effort_pm=float(row[5]),
                )
            except (ValueError, TypeError) as exc:
                raise StoreLoadError(f"{path}: release_effort_estimate row {i}: {exc}") from exc
            per_release.setdefault((row[0], row[1]), []).append(rel)

        efforts: list[EffortRecord] = []
        for r in repos:
            scalars = effort_scalars.get(r.key)
            if scalars is None:
                continue
            dev_count, dev_time_months, sloc_m, effort_pm = scalars
            efforts.append(
                EffortRecord(
                    owner=r.owner,
                    repo=r.repo,
                    dev_count=dev_count,
                    dev_time_months=dev_time_months,
                    sloc_m=sloc_m,
                    effort_pm=effort_pm,
                    per_release=tuple(per_release.get(r.key, ())),
                )
            )

        vectors: list[StoredVector] = []
        for i, row in enumerate(conn.execute(
            "SELECT owner, repo, category, vector, ref_cos_sim FROM soft_desc_pva_vec ORDER BY rowid"
        )):
            blob = row[3]
            if not isinstance(blob, bytes) or len(blob) % 4 != 0 or len(blob) == 0:
                raise StoreLoadError(f"{path}: soft_desc_pva_vec row {i}: malformed vector blob")
            vectors.append(
                StoredVector(
                    owner=row[0],
                    repo=row[1],
                    category=row[2],
                    values=np.frombuffer(blob, dtype="<f4").copy(),
                    ref_cos_sim=float(row[4]),
                )
            )

        meta = dict(conn.execute("SELECT key, value FROM corpus_meta"))
        version = int(meta.get("schema_version", "0"))
        if version != SCHEMA_VERSION:
            raise SchemaError(f"{path}: schema version {version} != {SCHEMA_VERSION}")
        ref = None
        if "reference_vector" in meta:
            ref = np.frombuffer(bytes.fromhex(meta["reference_vector"]), dtype="<f4").copy()
        alpha_hat = float(meta["alpha_hat"]) if "alpha_hat" in meta else None

        return Corpus(
            repos=tuple(repos),
            windows={k: tuple(v) for k, v in windows.items()},
            commits={k: tuple(v) for k, v in commits.items()},
            efforts=tuple(efforts),
            vectors=tuple(vectors),
            reference_vector=ref,
            alpha_hat=alpha_hat,
            model_id=meta.get("model_id"),
        )
    finally:
        conn.close()


def set_meta(path: Path | str, key: str, value: str) -> None:
    """Update one corpus_meta entry in place (e.g. the calibrated threshold)."""
    conn = sqlite3.connect(Path(path))
    try:
        conn.execute(
            "INSERT INTO corpus_meta VALUES (?,?)"
            " ON CONFLICT(key) DO UPDATE SET value=excluded.value",
            (key, value),
        )
        conn.commit()
    finally:
        conn.close()


def table_rows(path: Path | str, table: str) -> list[tuple]:
    """All rows of one table, for byte-level comparisons in tests."""
    if table not in REQUIRED_TABLES and table not in {"repo_info", "release_window", "corpus_meta"}:
        raise SdeeError(f"unknown table {table!r}")
    conn = sqlite3.connect(Path(path))
    try:
        return [tuple(r) for r in conn.execute(f"SELECT * FROM {table} ORDER BY rowid")]
    finally:
        conn.close()
