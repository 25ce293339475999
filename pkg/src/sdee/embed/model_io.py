"""Binary model file format.

Layout (all integers little-endian):

  magic   4 bytes  b"PVAM"
  version u16
  vector_size u32, vocab_size u32, training_samples u32, seed u64
  vocabulary: vocab_size entries of (u32 byte length, UTF-8 word, u64 frequency)
  word matrix: vocab_size * vector_size float32, row-major
  doc matrix:  training_samples * vector_size float32, row-major
  trailer: epochs u32, then training_samples entries of (u32 byte length, UTF-8 doc id)

The reference vector is derived from the seed, so it is not stored.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import SdeeError
from .pvdbow import SimilarityModel, TrainingScenario, derive_seed, reference_vector

MAGIC = b"PVAM"
FORMAT_VERSION = 1


class ModelFileError(SdeeError):
    """Raised for unreadable or incompatible model files."""


def save_model(model: SimilarityModel, path: Path | str) -> None:
    path = Path(path)
    sc = model.scenario
    parts = [
        MAGIC,
        struct.pack("<H", FORMAT_VERSION),
        struct.pack("<IIIQ", sc.vector_size, len(model.vocab), sc.training_samples, sc.seed),
    ]
    words = sorted(model.vocab, key=model.vocab.get)
    for word, freq in zip(words, model.frequencies):
        raw = word.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
        parts.append(struct.pack("<Q", int(freq)))
    parts.append(np.ascontiguousarray(model.word_vectors, dtype="<f4").tobytes())
    parts.append(np.ascontiguousarray(model.doc_vectors, dtype="<f4").tobytes())
    parts.append(struct.pack("<I", sc.epochs))
    for doc_id in model.doc_ids:
        raw = doc_id.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
    path.write_bytes(b"".join(parts))


class _Reader:
    def __init__(self, data: bytes, path: Path):
        self.data = data
        self.pos = 0
        self.path = path

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ModelFileError(f"{self.path}: truncated model file")
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def load_model(path: Path | str) -> SimilarityModel:
    path = Path(path)
    reader = _Reader(path.read_bytes(), path)
    if reader.take(4) != MAGIC:
        raise ModelFileError(f"{path}: not a model file (bad magic)")
    (version,) = reader.unpack("<H")
    if version != FORMAT_VERSION:
        raise ModelFileError(f"{path}: unsupported format version {version}")
    vector_size, vocab_size, samples, seed = reader.unpack("<IIIQ")

    vocab: dict[str, int] = {}
    freqs = np.empty(vocab_size, dtype=np.uint64)
    for i in range(vocab_size):
        (length,) = reader.unpack("<I")
        word = reader.take(length).decode("utf-8")
        (freq,) = reader.unpack("<Q")
        vocab[word] = i
        freqs[i] = freq

    word_vectors = np.frombuffer(
        reader.take(vocab_size * vector_size * 4), dtype="<f4"
    ).reshape(vocab_size, vector_size).copy()
    doc_vectors = np.frombuffer(
        reader.take(samples * vector_size * 4), dtype="<f4"
    ).reshape(samples, vector_size).copy()

    (epochs,) = reader.unpack("<I")
    doc_ids = []
    for _ in range(samples):
        (length,) = reader.unpack("<I")
        doc_ids.append(reader.take(length).decode("utf-8"))

    scenario = TrainingScenario(
        epochs=epochs, vector_size=vector_size, training_samples=samples, seed=seed
    )
    return SimilarityModel(
        vocab=vocab,
        frequencies=freqs,
        word_vectors=word_vectors,
        doc_vectors=doc_vectors,
        scenario=scenario,
        doc_ids=tuple(doc_ids),
        ref_vector=reference_vector(vector_size, derive_seed(seed, "reference-vector")),
    )
