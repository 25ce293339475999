"""HTTP estimation service.

Serves the estimation API over an immutable store/model snapshot loaded
at startup.  Identical request bodies produce byte-identical responses;
nothing here writes to the store.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Annotated

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel, Field

from ..corpus import ABSTRACT_GROUPS, load_default_taxonomy
from ..embed import load_model
from ..errors import SdeeError
from ..estimate import (
    DEFAULT_K,
    EstimateRequest,
    EstimationError,
    NoSimilarSoftwareError,
    ProjectVectorStore,
    estimate,
)
from ..store import load


@dataclass
class AppConfig:
    store_path: str
    model_path: str
    k: int = DEFAULT_K
    alpha_hat_override: float | None = None
    bind_address: str = "127.0.0.1:8035"
    seed: int = 0
    api_token_env_var_name: str = "SDEE_API_TOKEN"
    frontend_dir: str | None = None

    def __post_init__(self) -> None:
        if self.k < 1:
            raise SdeeError("k must be >= 1")


class FeatureItem(BaseModel):
    name: str = ""
    description: str = ""


class EstimateBody(BaseModel):
    title: str = ""
    description: Annotated[str, Field(min_length=1)]
    languages: list[str] = []
    category: str = ""
    subcategory: str = ""
    operating_systems: list[str] = []
    features: list[FeatureItem] = []
    k: int | None = Field(default=None, ge=1)


def _match_payload(match) -> dict:
    return {
        "owner": match.owner,
        "repo": match.repo,
        "similarity": match.similarity,
        "effort_person_months": match.effort_pm,
        "snippet": match.snippet,
    }


def create_app(config: AppConfig) -> FastAPI:
    """Load store and model and build the service."""
    try:
        corpus = load(config.store_path)
        model = load_model(config.model_path)
    except SdeeError as exc:
        raise SdeeError(f"service startup failed: {exc}") from exc

    store = ProjectVectorStore.from_corpus(corpus)
    alpha_hat = (
        config.alpha_hat_override
        if config.alpha_hat_override is not None
        else corpus.alpha_hat
    )
    if alpha_hat is None:
        raise SdeeError(
            "store carries no calibrated threshold; run calibrate or set an override"
        )
    taxonomy = load_default_taxonomy()

    app = FastAPI(title="effort estimation service")

    @app.get("/healthz")
    def healthz() -> dict:
        return {
            "status": "ok",
            "model_id": model.model_id,
            "store_records": len(store),
        }

    @app.get("/api/v1/categories")
    def categories() -> dict:
        return {
            "abstract": list(taxonomy.abstract_groups),
            "by_group": {
                group: [{"id": c.id, "name": c.name} for c in cats]
                for group, cats in taxonomy.by_group().items()
            },
        }

    @app.post("/api/v1/estimate")
    def estimate_endpoint(body: EstimateBody):
        if body.category and body.category not in ABSTRACT_GROUPS:
            raise HTTPException(
                status_code=422,
                detail=[
                    {
                        "loc": ["body", "category"],
                        "msg": "category must be one of the 11 abstract groups",
                        "type": "value_error",
                    }
                ],
            )
        request = EstimateRequest(
            title=body.title,
            description=body.description,
            languages=tuple(body.languages),
            category=body.category,
            subcategory=body.subcategory,
            operating_systems=tuple(body.operating_systems),
            features=tuple((f.name, f.description) for f in body.features),
        )
        k = body.k if body.k is not None else config.k
        try:
            result = estimate(request, model, store, k=k, alpha_hat=alpha_hat)
        except NoSimilarSoftwareError as exc:
            best = exc.best_below_threshold
            return JSONResponse(
                status_code=404,
                content={
                    "detail": str(exc),
                    "best_below_threshold": _match_payload(best) if best else None,
                },
            )
        except EstimationError as exc:
            raise HTTPException(
                status_code=422,
                detail=[
                    {
                        "loc": ["body", "description"],
                        "msg": str(exc),
                        "type": "value_error",
                    }
                ],
            )
        return {
            "effort_person_months": result.effort_pm,
            "k_used": result.k_used,
            "alpha_hat": result.alpha_hat,
            "model_id": result.model_id,
            "matches": [_match_payload(m) for m in result.matches],
        }

    frontend = Path(config.frontend_dir) if config.frontend_dir else None
    if frontend and frontend.is_dir():
        app.mount("/ui", StaticFiles(directory=frontend, html=True), name="ui")

    return app


def serve(config: AppConfig) -> None:
    """Run the service until interrupted; in-flight requests finish first."""
    import uvicorn

    host, _, port = config.bind_address.partition(":")
    uvicorn.run(create_app(config), host=host or "127.0.0.1", port=int(port or 8035))
