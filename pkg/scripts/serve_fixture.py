#!/usr/bin/env python3
"""Materialize the fixture bundle and serve it over HTTP.

Builds the 60-repository fixture store and model into a work directory
(reusing them if present) and starts the estimation service, optionally
mounting a built frontend under /ui.
"""

import argparse
from pathlib import Path

from sdee.app.service import AppConfig, serve
from sdee.embed import save_model
from sdee.fixtures import build_fixture_bundle, write_ingest_files
from sdee.store import persist


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--workdir", type=Path, default=Path("fixture_service"))
    parser.add_argument("--bind", default="127.0.0.1:8035")
    parser.add_argument("--alpha-hat", type=float, default=None)
    parser.add_argument("--frontend-dir", default=None)
    args = parser.parse_args()

    args.workdir.mkdir(parents=True, exist_ok=True)
    store_path = args.workdir / "fixture.sqlite"
    model_path = args.workdir / "fixture.pvam"
    if not store_path.exists() or not model_path.exists():
        corpus, model = build_fixture_bundle()
        persist(corpus, store_path)
        save_model(model, model_path)
        write_ingest_files(corpus, args.workdir / "ingest")
        print(f"built fixture bundle under {args.workdir}")

    serve(
        AppConfig(
            store_path=str(store_path),
            model_path=str(model_path),
            alpha_hat_override=args.alpha_hat,
            bind_address=args.bind,
            frontend_dir=args.frontend_dir,
        )
    )


if __name__ == "__main__":
    main()
