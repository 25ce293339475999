"""Distributed bag-of-words paragraph embeddings.

Trains fixed-length document vectors by stochastic gradient descent on
a negative-sampling objective: each document vector is pushed to score
its own words above noise words drawn from the corpus unigram
distribution (raised to the 3/4 power).  Word vectors here are the
output-layer weights; document vectors are the learned representations.

Everything is deterministic given the scenario seed: vocabulary order,
initialization, per-epoch document order, and negative draws all come
from seeded generators, and a fresh training run reproduces the model
bit for bit.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..corpus import DescriptionDoc
from ..errors import InputError, SdeeError

NEGATIVE_SAMPLES = 5
LEARNING_RATE_START = 0.025
LEARNING_RATE_END = 0.0001
INFERENCE_EPOCHS = 50
MIN_WORD_FREQ = 2
NOISE_DISTRIBUTION_POWER = 0.75

# Pair similarities are compared against thresholds, so they are rounded
# to a fixed precision well above float32 noise; this makes the score of
# two bitwise-equal vectors exactly 1.0.
SCORE_DECIMALS = 9


class TrainingError(SdeeError):
    """Raised when a model cannot be trained on the given corpus."""


class OutOfVocabularyError(SdeeError):
    """Raised when a document shares no token with the model vocabulary."""


class UndefinedSimilarityError(SdeeError):
    """Raised for cosine of a zero vector."""


@dataclass(frozen=True)
class TrainingScenario:
    """Hyperparameters of one training run."""

    epochs: int
    vector_size: int
    training_samples: int
    seed: int

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise InputError("epochs must be >= 1")
        if self.vector_size < 1:
            raise InputError("vector_size must be >= 1")
        if self.training_samples < 1:
            raise InputError("training_samples must be >= 1")

    @property
    def scenario_id(self) -> str:
        return (
            f"e{self.epochs}-v{self.vector_size}-"
            f"n{self.training_samples}-s{self.seed}"
        )


@dataclass(frozen=True, eq=False)
class EmbeddingVector:
    """A document vector plus its precomputed reference similarity."""

    values: np.ndarray
    ref_cos_sim: float


@dataclass(eq=False)
class SimilarityModel:
    vocab: dict[str, int]
    frequencies: np.ndarray  # per-index word counts, uint64
    word_vectors: np.ndarray  # (|vocab|, vector_size) float32
    doc_vectors: np.ndarray  # (training_samples, vector_size) float32
    scenario: TrainingScenario
    doc_ids: tuple[str, ...]
    ref_vector: np.ndarray  # (vector_size,) float32, unit norm
    epoch_losses: tuple[float, ...] = ()

    @property
    def vector_size(self) -> int:
        return self.scenario.vector_size

    @property
    def model_id(self) -> str:
        return "pvdbow-" + self.scenario.scenario_id

    def doc_vector(self, doc_id: str) -> np.ndarray:
        return self.doc_vectors[self.doc_ids.index(doc_id)]


def derive_seed(*parts) -> int:
    """Stable 63-bit seed from arbitrary string/int parts (hash-based)."""
    digest = hashlib.sha256("\x1f".join(str(p) for p in parts).encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "little") >> 1


def reference_vector(vector_size: int, seed: int) -> np.ndarray:
    """Fixed random unit vector used for similarity precomputation."""
    rng = np.random.Generator(np.random.PCG64(seed))
    vec = rng.standard_normal(vector_size)
    return (vec / np.linalg.norm(vec)).astype(np.float32)


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; exact up to float rounding."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise InputError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = np.linalg.norm(u)
    nv = np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        raise UndefinedSimilarityError("cosine undefined for zero vector")
    return float(np.clip(np.dot(u, v) / (nu * nv), -1.0, 1.0))


def similarity_score(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine rounded for threshold comparisons (bitwise-equal vectors score 1.0)."""
    return round(cosine(u, v), SCORE_DECIMALS)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def batch_loss_and_grads(
    doc_vec: np.ndarray,
    word_matrix: np.ndarray,
    positives: np.ndarray,
    negatives: np.ndarray,
    negative_mask: np.ndarray | None = None,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Negative-sampling loss and analytic gradients for one document batch.

    ``positives`` has shape (P,); ``negatives`` (P, N) holds noise-word
    rows per position.  ``negative_mask`` zeroes out draws that collided
    with their position's positive word.  Returns total loss, gradient
    w.r.t. the document vector, and a dense gradient w.r.t. the word
    matrix (zeros outside the touched rows).
    """
    pos_rows = word_matrix[positives]  # (P, d)
    neg_rows = word_matrix[negatives]  # (P, N, d)
    s_pos = pos_rows @ doc_vec  # (P,)
    s_neg = neg_rows @ doc_vec  # (P, N)
    if negative_mask is None:
        negative_mask = np.ones_like(s_neg)
    loss = float(np.sum(_softplus(-s_pos)) + np.sum(_softplus(s_neg) * negative_mask))

    g_pos = _sigmoid(s_pos) - 1.0  # dL/ds_pos
    g_neg = _sigmoid(s_neg) * negative_mask  # dL/ds_neg
    grad_doc = g_pos @ pos_rows + np.einsum("pn,pnd->d", g_neg, neg_rows)
    grad_words = np.zeros_like(word_matrix)
    np.add.at(grad_words, positives, g_pos[:, None] * doc_vec[None, :])
    np.add.at(
        grad_words,
        negatives.reshape(-1),
        (g_neg.reshape(-1)[:, None] * doc_vec[None, :]),
    )
    return loss, grad_doc, grad_words


class _NoiseTable:
    """Cumulative unigram^0.75 table for negative draws."""

    def __init__(self, frequencies: np.ndarray):
        weights = np.asarray(frequencies, dtype=np.float64) ** NOISE_DISTRIBUTION_POWER
        self.cumulative = np.cumsum(weights / weights.sum())

    def draw(self, rng: np.random.Generator, shape) -> np.ndarray:
        return np.searchsorted(self.cumulative, rng.random(shape), side="right")


def _build_vocab(token_lists: Sequence[tuple[str, ...]]) -> tuple[dict[str, int], np.ndarray]:
    counts: dict[str, int] = {}
    for tokens in token_lists:
        for tok in tokens:
            counts[tok] = counts.get(tok, 0) + 1
    kept = sorted(
        ((w, c) for w, c in counts.items() if c >= MIN_WORD_FREQ),
        key=lambda wc: (-wc[1], wc[0]),
    )
    vocab = {w: i for i, (w, _) in enumerate(kept)}
    freqs = np.array([c for _, c in kept], dtype=np.uint64)
    return vocab, freqs


def train(
    docs: Sequence[DescriptionDoc],
    scenario: TrainingScenario,
    doc_ids: Sequence[str] | None = None,
) -> SimilarityModel:
    """Train document and word vectors on the given descriptions.

    Runs ``scenario.epochs`` passes of per-position SGD with
    ``NEGATIVE_SAMPLES`` noise words and a linearly decayed learning
    rate.  Mean per-position loss is recorded per epoch.
    """
    if not docs:
        raise TrainingError("cannot train on an empty corpus")
    if len(docs) != scenario.training_samples:
        raise InputError(
            f"scenario expects {scenario.training_samples} docs, got {len(docs)}"
        )
    if doc_ids is None:
        doc_ids = tuple(f"doc{i:05d}" for i in range(len(docs)))
    else:
        doc_ids = tuple(doc_ids)
        if len(doc_ids) != len(docs):
            raise InputError("doc_ids length does not match docs")

    for did, doc in zip(doc_ids, docs):
        if not doc.tokens:
            raise TrainingError(f"document {did!r} has no tokens")

    vocab, freqs = _build_vocab([d.tokens for d in docs])
    if not vocab:
        raise TrainingError("vocabulary is empty after the frequency floor")

    doc_positions: list[np.ndarray] = []
    for did, doc in zip(doc_ids, docs):
        idx = np.array([vocab[t] for t in doc.tokens if t in vocab], dtype=np.int64)
        if idx.size == 0:
            raise TrainingError(f"document {did!r} has no in-vocabulary tokens")
        doc_positions.append(idx)

    dim = scenario.vector_size
    rng = np.random.Generator(np.random.PCG64(scenario.seed))
    doc_vecs = (rng.random((len(docs), dim)) - 0.5) / dim
    word_vecs = np.zeros((len(vocab), dim), dtype=np.float64)
    noise = _NoiseTable(freqs)

    positions_per_epoch = sum(p.size for p in doc_positions)
    total_steps = scenario.epochs * positions_per_epoch
    lr_span = LEARNING_RATE_START - LEARNING_RATE_END

    step = 0
    epoch_losses: list[float] = []
    for _epoch in range(scenario.epochs):
        order = rng.permutation(len(docs))
        epoch_loss = 0.0
        for di in order:
            dvec = doc_vecs[di]
            for target in doc_positions[di]:
                lr = LEARNING_RATE_START - lr_span * (step / max(total_steps - 1, 1))
                negs = noise.draw(rng, NEGATIVE_SAMPLES)
                keep = negs != target
                rows = np.concatenate(([target], negs[keep]))
                scores = word_vecs[rows] @ dvec
                g = _sigmoid(scores)
                g[0] -= 1.0
                epoch_loss += float(_softplus(-scores[0]) + np.sum(_softplus(scores[1:])))
                grad_doc = g @ word_vecs[rows]
                np.add.at(word_vecs, rows, (-lr) * g[:, None] * dvec[None, :])
                dvec -= lr * grad_doc
                step += 1
        epoch_losses.append(epoch_loss / positions_per_epoch)

    ref = reference_vector(dim, derive_seed(scenario.seed, "reference-vector"))
    return SimilarityModel(
        vocab=vocab,
        frequencies=freqs,
        word_vectors=word_vecs.astype(np.float32),
        doc_vectors=doc_vecs.astype(np.float32),
        scenario=scenario,
        doc_ids=doc_ids,
        ref_vector=ref,
        epoch_losses=tuple(epoch_losses),
    )


def infer_vector(
    doc: DescriptionDoc,
    model: SimilarityModel,
    seed: int | None = None,
    epochs: int = INFERENCE_EPOCHS,
) -> EmbeddingVector:
    """Embed a document against a trained model.

    Word vectors stay frozen; a fresh document vector descends the
    negative-sampling objective for ``epochs`` full-batch steps.  The
    default seed derives from the model seed and the token sequence, so
    equal text always reproduces the same vector.
    """
    positives = np.array(
        [model.vocab[t] for t in doc.tokens if t in model.vocab], dtype=np.int64
    )
    if positives.size == 0:
        raise OutOfVocabularyError(
            "description shares no vocabulary with the model; "
            "add more detail or retrain with a broader corpus"
        )
    if seed is None:
        seed = derive_seed(model.scenario.seed, "infer", *doc.tokens)
    rng = np.random.Generator(np.random.PCG64(seed))
    dim = model.vector_size
    dvec = (rng.random(dim) - 0.5) / dim
    word_matrix = model.word_vectors.astype(np.float64)
    noise = _NoiseTable(model.frequencies)
    lr_span = LEARNING_RATE_START - LEARNING_RATE_END

    for it in range(epochs):
        lr = LEARNING_RATE_START - lr_span * (it / max(epochs - 1, 1))
        negs = noise.draw(rng, (positives.size, NEGATIVE_SAMPLES))
        mask = (negs != positives[:, None]).astype(np.float64)
        pos_rows = word_matrix[positives]
        neg_rows = word_matrix[negs]
        g_pos = _sigmoid(pos_rows @ dvec) - 1.0
        g_neg = _sigmoid(neg_rows @ dvec) * mask
        grad = g_pos @ pos_rows + np.einsum("pn,pnd->d", g_neg, neg_rows)
        dvec -= lr * grad

    values = dvec.astype(np.float32)
    return EmbeddingVector(values=values, ref_cos_sim=similarity_score(values, model.ref_vector))
