#!/usr/bin/env python3
"""Run both evaluation protocols on the bundled fixture corpus.

Writes the metric reports (CSV + JSONL raw values), prints the aligned
tables, and runs the significance suite comparing every baseline
against the description-similarity estimator.
"""

import argparse
import json
from dataclasses import asdict
from pathlib import Path

from sdee.evaluation import (
    EvalDataset,
    default_estimators,
    kfold,
    randomized_trials,
    significance_suite,
)
from sdee.fixtures import build_fixture_bundle


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", type=Path, default=Path("reports"))
    parser.add_argument("--x", type=int, default=5, help="held-out rows per randomized trial")
    parser.add_argument("--r", type=int, default=20, help="randomized trial count")
    parser.add_argument("--seed", type=int, default=42)
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    corpus, _model = build_fixture_bundle()
    dataset = EvalDataset.from_corpus(corpus)
    print(f"fixture dataset: {len(dataset)} cleaned records\n")

    random_report = randomized_trials(
        dataset, default_estimators(), x=args.x, r=args.r, seed=args.seed
    )
    print(random_report.to_text())
    (args.out / "randomized.csv").write_text(random_report.to_csv())
    (args.out / "randomized.jsonl").write_text(random_report.to_jsonl())

    for k in (3, 5, 10):
        report = kfold(dataset, default_estimators(), k=k, seed=args.seed)
        print(report.to_text())
        (args.out / f"kfold_{k}.csv").write_text(report.to_csv())
        (args.out / f"kfold_{k}.jsonl").write_text(report.to_jsonl())

    estimates, actuals = random_report.pooled_predictions("DevSDEE")
    mar_series = {
        name: random_report.metric_series(name, "mar")
        for name in random_report.estimator_names
    }
    suite = significance_suite(estimates, actuals, mar_series, seed=args.seed)
    payload = {
        "estimates_vs_actuals": asdict(suite.estimates_vs_actuals),
        "baselines": {
            c.estimator: {"sa_vs_devsdee": c.sa_vs_devsdee, **asdict(c.effects)}
            for c in suite.baseline_comparisons
        },
    }
    (args.out / "significance.json").write_text(json.dumps(payload, indent=2))
    print("significance suite:")
    print(json.dumps(payload, indent=2))


if __name__ == "__main__":
    main()
