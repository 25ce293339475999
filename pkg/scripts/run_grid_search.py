#!/usr/bin/env python3
"""Hyperparameter grid search over the three scenario families.

Trains the sample-count, epoch, and vector-size families on a
topic-separated synthetic corpus, evaluates each cell on the fixed
held-out pair test-bed, and reports the combined (F1 + ROC)/2 winner.
"""

import argparse
from pathlib import Path

from sdee.embed import grid_search
from sdee.fixtures import make_topic_corpus


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--docs", type=int, default=48)
    parser.add_argument("--seed", type=int, default=29)
    parser.add_argument("--out", type=Path, default=Path("grid_models"))
    args = parser.parse_args()

    docs, _ = make_topic_corpus(args.docs, seed=args.seed)
    result = grid_search(docs, split_seed=3, base_seed=3, out_dir=args.out)
    print(result.report_csv())
    best = result.best_cell
    print(
        f"best: {best.scenario.scenario_id} (family={best.family}) "
        f"combined={best.combined:.4f} alpha_hat={best.alpha_hat}"
    )


if __name__ == "__main__":
    main()
