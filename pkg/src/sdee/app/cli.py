"""Command-line interface.

Subcommands cover the full pipeline: ingest raw repository data into a
store, report effort metrics, train (or grid-search) a similarity
model, calibrate the decision threshold, estimate effort for a new
description, run the comparative evaluation protocols, and serve the
HTTP API.  Exit codes: 0 success, 1 domain error, 2 usage error.
Diagnostics go to stderr; data goes to stdout.
"""

from __future__ import annotations

import argparse
import datetime as dt
import json
import sys
from dataclasses import asdict
from pathlib import Path

from .. import fixtures
from ..corpus import read_repo_jsonl, parse_commit_log_detailed, ReleaseWindow
from ..embed import TrainingScenario, grid_search, load_model, save_model, train
from ..embed.testbed import build_testbed, calibrate
from ..errors import SdeeError
from ..estimate import EstimateRequest, ProjectVectorStore, estimate
from ..evaluation import EvalDataset, default_estimators, kfold, randomized_trials
from ..metrics import correlation_report, effort_report_csv, release_effort_rollup
from ..store import Corpus, attach_vectors, load, persist, set_meta
from .service import AppConfig, serve


def _cmd_ingest(args: argparse.Namespace) -> int:
    entries = read_repo_jsonl(args.repos)
    logs_dir = Path(args.logs)
    repos = []
    windows = {}
    commits = {}
    efforts = []
    total_skipped = 0
    for record, release_windows in entries:
        log_path = logs_dir / f"{record.owner}__{record.repo}.log"
        repo_commits, skipped = (
            parse_commit_log_detailed(log_path.read_text(encoding="utf-8"))
            if log_path.exists()
            else ([], 0)
        )
        total_skipped += skipped
        if not release_windows and repo_commits:
            # no release data: one window spanning the commit history
            times = [c.timestamp for c in repo_commits]
            release_windows = (
                ReleaseWindow(release_no="v1.0", start=min(times), end=max(times)),
            )
            print(
                f"note: {record.owner}/{record.repo} has no releases; "
                "derived one window from the commit span",
                file=sys.stderr,
            )
        repos.append(record)
        windows[record.key] = tuple(release_windows)
        commits[record.key] = tuple(repo_commits)
        if release_windows:
            efforts.append(
                release_effort_rollup(record.owner, record.repo, release_windows, repo_commits)
            )
    if total_skipped:
        print(f"warning: skipped {total_skipped} unparseable numstat lines", file=sys.stderr)
    corpus = Corpus(
        repos=tuple(repos),
        windows=windows,
        commits=commits,
        efforts=tuple(efforts),
    )
    persist(corpus, args.out)
    print(json.dumps({"repos": len(repos), "store": str(args.out)}))
    return 0


def _cmd_metrics(args: argparse.Namespace) -> int:
    corpus = load(args.store)
    csv_text = effort_report_csv(corpus.efforts)
    if args.csv:
        Path(args.csv).write_text(csv_text, encoding="utf-8")
    else:
        sys.stdout.write(csv_text)
    if len(corpus.efforts) >= 2:
        report = correlation_report(corpus.efforts)
        print(
            json.dumps(
                {
                    "pearson": {
                        "sloc_m_vs_effort": report.sloc_vs_effort,
                        "dev_count_vs_effort": report.dev_count_vs_effort,
                        "dev_time_vs_effort": report.time_vs_effort,
                    }
                }
            ),
            file=sys.stderr,
        )
    return 0


def _cmd_train(args: argparse.Namespace) -> int:
    corpus = load(args.store)
    docs = [r.description for r in corpus.repos]
    doc_ids = [f"{r.owner}/{r.repo}" for r in corpus.repos]
    if not docs:
        raise SdeeError("store holds no descriptions to train on")
    if args.grid:
        result = grid_search(
            docs, split_seed=args.seed, base_seed=args.seed,
            out_dir=Path(args.model).parent if args.model else None,
        )
        model = result.best_model
        print(result.report_csv(), file=sys.stderr)
    else:
        scenario = TrainingScenario(
            epochs=args.epochs,
            vector_size=args.vec_size,
            training_samples=len(docs),
            seed=args.seed,
        )
        model = train(docs, scenario, doc_ids=doc_ids)
    model_path = args.model or (Path(args.store).with_suffix(".pvam"))
    save_model(model, model_path)
    persist(attach_vectors(corpus, model), args.store)
    print(json.dumps({"model_id": model.model_id, "model_path": str(model_path)}))
    return 0


def _cmd_calibrate(args: argparse.Namespace) -> int:
    corpus = load(args.store)
    model = load_model(args.model)
    docs = [r.description for r in corpus.repos]
    _, testbed = build_testbed(docs, split_seed=args.seed)
    result = calibrate(model, testbed)
    set_meta(args.store, "alpha_hat", repr(result.alpha_hat))
    print(
        json.dumps(
            {
                "alpha_hat": result.alpha_hat,
                "same": asdict(result.stats_same),
                "different": asdict(result.stats_different),
                "skipped_pairs": result.skipped_pairs,
            }
        )
    )
    return 0


def _cmd_estimate(args: argparse.Namespace) -> int:
    store_path = Path(args.store)
    if not store_path.exists():
        raise SdeeError(f"store not found: {store_path}")
    corpus = load(store_path)
    model = load_model(args.model)
    store = ProjectVectorStore.from_corpus(corpus)
    alpha_hat = args.alpha_hat if args.alpha_hat is not None else corpus.alpha_hat
    if alpha_hat is None:
        raise SdeeError("no calibrated threshold; run calibrate or pass --alpha-hat")
    description = Path(args.desc_file).read_text(encoding="utf-8")
    request = EstimateRequest(title=args.title, description=description)
    result = estimate(request, model, store, k=args.k, alpha_hat=alpha_hat)
    print(
        json.dumps(
            {
                "effort_person_months": result.effort_pm,
                "k_used": result.k_used,
                "alpha_hat": result.alpha_hat,
                "model_id": result.model_id,
                "matches": [
                    {
                        "owner": m.owner,
                        "repo": m.repo,
                        "similarity": m.similarity,
                        "effort_person_months": m.effort_pm,
                        "snippet": m.snippet,
                    }
                    for m in result.matches
                ],
            },
            indent=None if args.json else 2,
        )
    )
    return 0


def _cmd_evaluate(args: argparse.Namespace) -> int:
    corpus = load(args.store)
    dataset = EvalDataset.from_corpus(corpus)
    estimators = default_estimators()
    if args.protocol == "random":
        report = randomized_trials(dataset, estimators, x=args.x, r=args.r, seed=args.seed)
    else:
        report = kfold(dataset, estimators, k=args.k, seed=args.seed)
    out = Path(args.out)
    out.write_text(report.to_csv(), encoding="utf-8")
    if args.raw_out:
        Path(args.raw_out).write_text(report.to_jsonl(), encoding="utf-8")
    sys.stdout.write(report.to_text())
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    config = AppConfig(
        store_path=args.store,
        model_path=args.model,
        k=args.k,
        alpha_hat_override=args.alpha_hat,
        bind_address=args.bind,
        frontend_dir=args.frontend_dir,
    )
    serve(config)
    return 0


def _cmd_fixture(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    corpus, model = fixtures.build_fixture_bundle()
    store_path = out / "fixture.sqlite"
    model_path = out / "fixture.pvam"
    persist(corpus, store_path)
    save_model(model, model_path)
    paths = fixtures.write_ingest_files(corpus, out / "ingest")
    print(
        json.dumps(
            {
                "store": str(store_path),
                "model": str(model_path),
                "alpha_hat": corpus.alpha_hat,
                "ingest": {k: str(v) for k, v in paths.items()},
            }
        )
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sdee", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="build a store from JSONL metadata and commit logs")
    p.add_argument("--repos", required=True)
    p.add_argument("--logs", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("metrics", help="emit the per-repository effort metrics CSV")
    p.add_argument("--store", required=True)
    p.add_argument("--csv")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("train", help="train the description-similarity model")
    p.add_argument("--store", required=True)
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--vec-size", type=int, default=50)
    p.add_argument("--grid", action="store_true")
    p.add_argument("--model")
    p.add_argument("--seed", type=int, default=13)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("calibrate", help="derive the similarity threshold")
    p.add_argument("--store", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--seed", type=int, default=13)
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("estimate", help="estimate effort for a description file")
    p.add_argument("--desc-file", required=True)
    p.add_argument("--store", default="store.sqlite")
    p.add_argument("--model", default="store.pvam")
    p.add_argument("--title", default="")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--alpha-hat", type=float)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("evaluate", help="run a comparative evaluation protocol")
    p.add_argument("--protocol", choices=["random", "kfold"], required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--x", type=int, default=55)
    p.add_argument("--r", type=int, default=20)
    p.add_argument("--k", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--raw-out")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("serve", help="run the HTTP estimation service")
    p.add_argument("--bind", default="127.0.0.1:8035")
    p.add_argument("--store", required=True)
    p.add_argument("--model", required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--alpha-hat", type=float)
    p.add_argument("--frontend-dir")
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("fixture", help="materialize the bundled fixture corpus")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_fixture)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SdeeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
