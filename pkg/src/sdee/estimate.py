"""Effort estimation for a newly-envisioned software description.

The pipeline: embed the query description, retrieve the top-k stored
projects whose similarity clears the calibrated threshold, and combine
their efforts with the triangle-weighted mean (weights k..1 nearest
first, so k=3 gives (3a + 2b + c) / 6).

Retrieval uses a reference-similarity band as an accelerator: stored
vectors whose precomputed reference cosine lies far from the query's
cannot be similar enough to matter, which an angle bound makes exact.
The result is always identical to an exhaustive scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import ABSTRACT_GROUPS, DescriptionDoc
from .embed.pvdbow import EmbeddingVector, SimilarityModel, infer_vector, similarity_score
from .errors import InputError, SdeeError
from .store import Corpus

DEFAULT_K = 2
REF_BAND_INITIAL = 0.05
REF_BAND_TARGET_FACTOR = 4
SNIPPET_LEN = 160


class EstimationError(SdeeError):
    """The query could not be embedded or matched."""


class NoSimilarSoftwareError(EstimationError):
    """No stored project clears the similarity threshold.

    Carries the best sub-threshold candidate for diagnostics.
    """

    def __init__(self, message: str, best_below_threshold: "Match | None" = None):
        super().__init__(message)
        self.best_below_threshold = best_below_threshold


@dataclass(frozen=True)
class StoredProject:
    owner: str
    repo: str
    vector: np.ndarray  # float32
    ref_cos_sim: float
    effort_pm: float
    snippet: str


@dataclass(frozen=True)
class Match:
    owner: str
    repo: str
    similarity: float
    effort_pm: float
    snippet: str


@dataclass(frozen=True)
class EstimateRequest:
    title: str
    description: str
    languages: tuple[str, ...] = ()
    category: str = ""
    subcategory: str = ""
    operating_systems: tuple[str, ...] = ()
    features: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        if not self.description.strip():
            raise InputError("description must be non-empty")
        if self.category and self.category not in ABSTRACT_GROUPS:
            raise InputError(f"category {self.category!r} is not one of the 11 groups")

    def document(self) -> DescriptionDoc:
        """Assemble the query document: title, description, then features."""
        parts = [self.title, self.description]
        for name, desc in self.features:
            parts.append(name)
            parts.append(desc)
        return DescriptionDoc.from_text("\n".join(p for p in parts if p))


@dataclass(frozen=True)
class EstimateResult:
    effort_pm: float
    k_used: int
    matches: tuple[Match, ...]
    alpha_hat: float
    model_id: str


class ProjectVectorStore:
    """Immutable, searchable view over stored project vectors and efforts."""

    def __init__(self, projects: Sequence[StoredProject]):
        self.projects = tuple(projects)
        if self.projects:
            dims = {p.vector.shape for p in self.projects}
            if len(dims) != 1:
                raise InputError(f"inconsistent stored vector dimensions: {dims}")
            self.dim = self.projects[0].vector.shape[0]
        else:
            self.dim = 0

    @classmethod
    def from_corpus(cls, corpus: Corpus) -> "ProjectVectorStore":
        efforts = corpus.effort_by_key()
        repos = corpus.repo_by_key()
        projects = []
        for v in corpus.vectors:
            effort = efforts.get(v.key)
            if effort is None:
                continue
            record = repos.get(v.key)
            raw = record.description.raw_text if record else ""
            snippet = " ".join(raw.split())[:SNIPPET_LEN]
            projects.append(
                StoredProject(
                    owner=v.owner,
                    repo=v.repo,
                    vector=v.values,
                    ref_cos_sim=v.ref_cos_sim,
                    effort_pm=effort.effort_pm,
                    snippet=snippet,
                )
            )
        return cls(projects)

    def __len__(self) -> int:
        return len(self.projects)


def _match_sort_key(m: Match) -> tuple[float, str, str]:
    return (-m.similarity, m.owner, m.repo)


def _scan(
    query: np.ndarray, projects: Sequence[StoredProject], k: int, alpha_hat: float
) -> list[Match]:
    matches = [
        Match(
            owner=p.owner,
            repo=p.repo,
            similarity=similarity_score(query, p.vector),
            effort_pm=p.effort_pm,
            snippet=p.snippet,
        )
        for p in projects
    ]
    qualified = sorted((m for m in matches if m.similarity >= alpha_hat), key=_match_sort_key)
    return qualified[:k]


def top_k_similar(
    query_vec: EmbeddingVector,
    store: ProjectVectorStore,
    k: int,
    alpha_hat: float,
) -> list[Match]:
    """Up to k threshold-clearing matches, most similar first.

    Ties in similarity break lexicographically by (owner, repo).  The
    reference-band prefilter only prunes candidates whose angle bound
    proves they cannot affect the result, so the output equals a full
    scan by construction.
    """
    if k < 1:
        raise InputError("k must be >= 1")
    if len(store) == 0:
        raise InputError("empty vector store")
    query = np.asarray(query_vec.values)
    if query.shape[0] != store.dim:
        raise InputError(f"query dimension {query.shape[0]} != store dimension {store.dim}")

    ref_sims = np.array([p.ref_cos_sim for p in store.projects])
    band = REF_BAND_INITIAL
    target = min(len(store.projects), REF_BAND_TARGET_FACTOR * k)
    while True:
        inside = np.abs(ref_sims - query_vec.ref_cos_sim) <= band
        if inside.sum() >= target:
            break
        band *= 2.0

    candidates = [p for p, keep in zip(store.projects, inside) if keep]
    result = _scan(query, candidates, k, alpha_hat)

    # Soundness check: a pruned candidate at reference angle distance
    # delta can reach similarity at most cos(delta); anything that could
    # beat the current cut-off forces a full scan.
    cutoff = result[-1].similarity if len(result) == k else alpha_hat
    query_angle = math.acos(max(-1.0, min(1.0, query_vec.ref_cos_sim)))
    for p, keep in zip(store.projects, inside):
        if keep:
            continue
        angle_gap = abs(math.acos(max(-1.0, min(1.0, p.ref_cos_sim))) - query_angle)
        if math.cos(angle_gap) + 1e-9 >= cutoff:
            return _scan(query, store.projects, k, alpha_hat)
    return result


def walkerden(efforts: Sequence[float]) -> float:
    """Triangle-weighted mean of neighbor efforts, nearest first.

    Weights are (k, k-1, ..., 1) normalized by k(k+1)/2; for three
    neighbors a, b, c this is exactly (3a + 2b + c) / 6.
    """
    k = len(efforts)
    if k == 0:
        raise InputError("walkerden needs at least one effort value")
    weight_sum = k * (k + 1) / 2
    return sum((k - i) * e for i, e in enumerate(efforts)) / weight_sum


def estimate(
    request: EstimateRequest,
    model: SimilarityModel,
    store: ProjectVectorStore,
    k: int = DEFAULT_K,
    alpha_hat: float | None = None,
) -> EstimateResult:
    """Full estimation: embed, retrieve, and aggregate neighbor efforts."""
    if alpha_hat is None:
        raise InputError("alpha_hat is required (calibrate first or pass an override)")
    doc = request.document()
    try:
        query = infer_vector(doc, model)
    except SdeeError as exc:
        raise EstimationError(
            f"could not embed the description: {exc}"
        ) from exc

    matches = top_k_similar(query, store, k, alpha_hat)
    if not matches:
        best = _scan(np.asarray(query.values), store.projects, 1, -1.0)
        raise NoSimilarSoftwareError(
            f"no stored project reaches similarity {alpha_hat}",
            best_below_threshold=best[0] if best else None,
        )
    effort_pm = walkerden([m.effort_pm for m in matches])
    return EstimateResult(
        effort_pm=effort_pm,
        k_used=len(matches),
        matches=tuple(matches),
        alpha_hat=alpha_hat,
        model_id=model.model_id,
    )
