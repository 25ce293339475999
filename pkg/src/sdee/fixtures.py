"""Deterministic fixture corpora.

Everything here is generated from fixed seeds: a small topic-separated
description corpus for embedding checks, a boundary-case repository
list for the selection filters, and a 60-repository corpus with full
release/commit activity used by the retrieval, protocol, and service
tests.  The corpus can also be materialized as the offline ingestion
formats (JSONL metadata, description files, commit logs) to exercise
the CLI end to end.
"""

from __future__ import annotations

import datetime as dt
import json
from pathlib import Path

import numpy as np

from .corpus import CommitStat, DescriptionDoc, ReleaseWindow, RepoRecord
from .embed.pvdbow import SimilarityModel, TrainingScenario, train
from .embed.testbed import build_testbed, calibrate
from .metrics import release_effort_rollup
from .store import Corpus, attach_vectors

FIXTURE_TODAY = dt.date(2026, 1, 15)
FIXTURE_SEED = 101
MODEL_SEED = 7

FILLER_WORDS = (
    "library provides support simple fast usage installs documented "
    "stable release builds tested platform api modules configuration"
).split()

TOPIC_WORDS: dict[str, list[str]] = {
    "compression": (
        "compression compress decompress codec ratio entropy stream "
        "archive deflate huffman dictionary block lossless speed zstd "
        "buffer throughput encoder decoder"
    ).split(),
    "json": (
        "json parser parsing serialization deserialization schema token "
        "document object mapping escape unicode numbers strings nested "
        "streaming validator pointer pretty"
    ).split(),
    "crypto": (
        "encryption cipher keys signing signature secure hashing nonce "
        "symmetric asymmetric certificate random primitives protocol "
        "authenticated padding curve digest vault"
    ).split(),
    "web": (
        "web framework routing middleware request response handler "
        "template session controller endpoint server render websocket "
        "forms validation async dispatch application"
    ).split(),
    "game": (
        "game engine rendering physics sprite scene shader particle "
        "collision animation entity loop audio input texture camera "
        "lighting terrain realtime"
    ).split(),
    "http": (
        "http client connection pooling retries timeout headers redirect "
        "proxy download upload transfer socket tls keepalive requests "
        "interceptor backoff cookies"
    ).split(),
}

TOPIC_PROFILE: dict[str, dict] = {
    # category id, developer head-count, base window length in days
    "compression": {"category": "compression-libraries", "devs": 3, "days": 120.0},
    "json": {"category": "json-libraries", "devs": 2, "days": 75.0},
    "crypto": {"category": "crypto-libraries", "devs": 5, "days": 200.0},
    "web": {"category": "web-frameworks", "devs": 8, "days": 320.0},
    "game": {"category": "game-engines", "devs": 10, "days": 400.0},
    "http": {"category": "http-clients", "devs": 2, "days": 100.0},
}

COMPRESSION_REPO = ("polaris", "densitypack")
COMPRESSION_DESCRIPTION = """# densitypack

densitypack is a fast lossless compression library focused on high
compression ratio and raw speed. The codec uses a block based
dictionary encoder with an entropy stage, and the stream api supports
incremental compress and decompress calls with a small fixed buffer.

- high throughput lossless codec
- dictionary and entropy coder tuned for speed
- streaming encoder and decoder with stable buffer usage

See https://example.invalid/densitypack for benchmark numbers.
"""


def _description_text(rng: np.random.Generator, topic: str, name: str) -> str:
    words = TOPIC_WORDS[topic]
    lines = [f"# {name}", ""]
    n_sentences = int(rng.integers(4, 7))
    for _ in range(n_sentences):
        length = int(rng.integers(7, 12))
        picks = []
        for _ in range(length):
            if rng.random() < 0.72:
                picks.append(words[int(rng.integers(len(words)))])
            else:
                picks.append(FILLER_WORDS[int(rng.integers(len(FILLER_WORDS)))])
        lines.append(" ".join(picks).capitalize() + ".")
    if rng.random() < 0.3:
        lines.append("")
        lines.append("```\npip install " + name + "\n```")
    return "\n".join(lines) + "\n"


def make_topic_corpus(
    n_docs: int = 30,
    topics: tuple[str, ...] = ("compression", "json", "crypto"),
    seed: int = 11,
) -> tuple[list[DescriptionDoc], list[str]]:
    """Synthetic topic-separated descriptions; returns (docs, topic labels)."""
    rng = np.random.Generator(np.random.PCG64(seed))
    docs: list[DescriptionDoc] = []
    labels: list[str] = []
    for i in range(n_docs):
        topic = topics[i % len(topics)]
        docs.append(DescriptionDoc.from_text(_description_text(rng, topic, f"{topic}lib{i}")))
        labels.append(topic)
    return docs, labels


def make_filter_fixture() -> tuple[list[RepoRecord], set[tuple[str, str]]]:
    """Twenty records around each selection boundary, with the kept set."""
    desc = DescriptionDoc.from_text("a plain fixture project description")
    today = FIXTURE_TODAY
    recent = today - dt.timedelta(days=30)
    exactly_three_years = today.replace(year=today.year - 3)
    stale = exactly_three_years - dt.timedelta(days=1)
    ancient = today.replace(year=today.year - 5)

    rows: list[tuple[str, float, int, dt.date, bool]] = [
        # size boundary
        ("size-at-5mb", 5.0, 900, recent, False),
        ("size-just-over", 5.01, 900, recent, True),
        ("size-under", 4.2, 900, recent, False),
        ("size-large", 250.0, 900, recent, True),
        # stars boundary
        ("stars-at-500", 80.0, 500, recent, False),
        ("stars-501", 80.0, 501, recent, True),
        ("stars-low", 80.0, 12, recent, False),
        ("stars-high", 80.0, 125000, recent, True),
        # date boundary
        ("date-exactly-3y", 80.0, 900, exactly_three_years, True),
        ("date-3y-plus-day", 80.0, 900, stale, False),
        ("date-ancient", 80.0, 900, ancient, False),
        ("date-yesterday", 80.0, 900, today - dt.timedelta(days=1), True),
        # combined failures
        ("small-and-stale", 3.0, 900, stale, False),
        ("small-and-unstarred", 3.0, 100, recent, False),
        ("all-bad", 1.0, 5, ancient, False),
        ("stale-and-unstarred", 80.0, 200, stale, False),
        # plainly fine
        ("fine-1", 42.0, 4200, recent, True),
        ("fine-2", 17.5, 777, today - dt.timedelta(days=400), True),
        ("fine-3", 9.9, 5200, today - dt.timedelta(days=900), True),
        ("fine-4", 6.1, 650, recent, True),
    ]
    records = []
    kept: set[tuple[str, str]] = set()
    for name, size, stars, updated, keep in rows:
        record = RepoRecord(
            owner="fixture",
            repo=name,
            size_mb=size,
            stars=stars,
            last_update=updated,
            categories=("json-libraries",),
            description=desc,
        )
        records.append(record)
        if keep:
            kept.add(record.key)
    return records, kept


def _repo_activity(
    rng: np.random.Generator, owner: str, repo: str, topic: str
) -> tuple[tuple[ReleaseWindow, ...], tuple[CommitStat, ...]]:
    profile = TOPIC_PROFILE[topic]
    n_releases = int(rng.integers(2, 4))
    devs = [f"dev{d}@{repo}" for d in range(profile["devs"])]
    start = dt.datetime(2022, 3, 1) + dt.timedelta(days=int(rng.integers(0, 200)))
    windows = []
    commits = []
    commit_idx = 0
    for rel in range(n_releases):
        days = profile["days"] * float(rng.uniform(0.8, 1.2))
        end = start + dt.timedelta(days=days)
        windows.append(
            ReleaseWindow(
                release_no=f"v{rel + 1}.0",
                start=start,
                end=end,
                size_bytes=int(rng.integers(200_000, 5_000_000)),
            )
        )
        for dev in devs:
            for _ in range(2):
                offset = float(rng.uniform(0.05, 0.95)) * days
                added = int(rng.integers(20, 400))
                deleted = int(rng.integers(0, 120))
                commits.append(
                    CommitStat(
                        commit_id=f"{repo}-c{commit_idx:04d}",
                        dev_id=dev,
                        timestamp=start + dt.timedelta(days=offset),
                        sloc_added=max(added - min(added, deleted), 0),
                        sloc_deleted=max(deleted - min(added, deleted), 0),
                        sloc_modified=min(added, deleted),
                    )
                )
                commit_idx += 1
        start = end + dt.timedelta(days=float(rng.uniform(1.0, 20.0)))
    return tuple(windows), tuple(commits)


def make_fixture_corpus(
    seed: int = FIXTURE_SEED, repos_per_topic: int = 10
) -> Corpus:
    """Sixty-repository corpus with releases, commits, and effort records."""
    rng = np.random.Generator(np.random.PCG64(seed))
    repos: list[RepoRecord] = []
    windows: dict[tuple[str, str], tuple[ReleaseWindow, ...]] = {}
    commits: dict[tuple[str, str], tuple[CommitStat, ...]] = {}
    efforts = []

    for topic in TOPIC_PROFILE:
        for i in range(repos_per_topic):
            if topic == "compression" and i == 0:
                owner, repo = COMPRESSION_REPO
                text = COMPRESSION_DESCRIPTION
            else:
                owner, repo = f"{topic}works", f"{topic}-{i:02d}"
                text = _description_text(rng, topic, repo)
            record = RepoRecord(
                owner=owner,
                repo=repo,
                size_mb=float(rng.uniform(6.0, 300.0)),
                stars=int(rng.integers(501, 90_000)),
                last_update=FIXTURE_TODAY - dt.timedelta(days=int(rng.integers(1, 700))),
                categories=(TOPIC_PROFILE[topic]["category"],),
                description=DescriptionDoc.from_text(text),
            )
            repos.append(record)
            w, c = _repo_activity(rng, owner, repo, topic)
            windows[record.key] = w
            commits[record.key] = c
            efforts.append(release_effort_rollup(owner, repo, w, c))

    return Corpus(
        repos=tuple(repos),
        windows=windows,
        commits=commits,
        efforts=tuple(efforts),
    )


def fixture_scenario(n_docs: int) -> TrainingScenario:
    return TrainingScenario(epochs=20, vector_size=16, training_samples=n_docs, seed=MODEL_SEED)


def build_fixture_bundle(seed: int = FIXTURE_SEED) -> tuple[Corpus, SimilarityModel]:
    """Corpus with attached vectors, a trained model, and a calibrated threshold."""
    corpus = make_fixture_corpus(seed)
    docs = [r.description for r in corpus.repos]
    model = train(docs, fixture_scenario(len(docs)), doc_ids=[f"{r.owner}/{r.repo}" for r in corpus.repos])
    corpus = attach_vectors(corpus, model)
    _, testbed = build_testbed(docs, split_seed=MODEL_SEED)
    calibration = calibrate(model, testbed)
    corpus.alpha_hat = calibration.alpha_hat
    return corpus, model


def _commit_log_text(commits: tuple[CommitStat, ...]) -> str:
    """Render commits in the ingestion log format (one file per commit)."""
    blocks = []
    for c in commits:
        lines = [f"C|{c.commit_id}|{c.dev_id}|{c.timestamp.isoformat()}"]
        # churn re-expanded to a per-file numstat line that parses back
        # to the same (added, deleted, modified) triple
        lines.append(f"{c.sloc_added + c.sloc_modified}\t{c.sloc_deleted + c.sloc_modified}\tsrc/core.c")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def write_ingest_files(corpus: Corpus, out_dir: Path | str) -> dict[str, Path]:
    """Materialize the corpus as the offline ingestion inputs."""
    out = Path(out_dir)
    (out / "descriptions").mkdir(parents=True, exist_ok=True)
    logs_dir = out / "logs"
    logs_dir.mkdir(parents=True, exist_ok=True)

    jsonl_lines = []
    for record in corpus.repos:
        desc_rel = f"descriptions/{record.owner}__{record.repo}.md"
        (out / desc_rel).write_text(record.description.raw_text, encoding="utf-8")
        releases = [
            {
                "release_no": w.release_no,
                "start": w.start.isoformat(),
                "end": w.end.isoformat(),
                "size_bytes": w.size_bytes,
            }
            for w in corpus.windows.get(record.key, ())
        ]
        jsonl_lines.append(
            json.dumps(
                {
                    "owner": record.owner,
                    "repo": record.repo,
                    "size_mb": record.size_mb,
                    "stars": record.stars,
                    "last_update": record.last_update.isoformat(),
                    "categories": list(record.categories),
                    "description_path": desc_rel,
                    "releases": releases,
                },
                sort_keys=True,
            )
        )
        log_text = _commit_log_text(corpus.commits.get(record.key, ()))
        (logs_dir / f"{record.owner}__{record.repo}.log").write_text(log_text, encoding="utf-8")

    repos_path = out / "repos.jsonl"
    repos_path.write_text("\n".join(jsonl_lines) + "\n", encoding="utf-8")
    query_path = out / "compression_query.txt"
    query_path.write_text(COMPRESSION_DESCRIPTION, encoding="utf-8")
    return {"repos": repos_path, "logs": logs_dir, "query": query_path}
