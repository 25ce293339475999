"""Paragraph-vector similarity models: training, inference, calibration."""

from .model_io import ModelFileError, load_model, save_model
from .pvdbow import (
    INFERENCE_EPOCHS,
    NEGATIVE_SAMPLES,
    EmbeddingVector,
    OutOfVocabularyError,
    SimilarityModel,
    TrainingError,
    TrainingScenario,
    UndefinedSimilarityError,
    batch_loss_and_grads,
    cosine,
    derive_seed,
    infer_vector,
    reference_vector,
    similarity_score,
    train,
)
from .testbed import (
    CalibrationResult,
    GridSearchResult,
    ScoreStats,
    SimilarityEvaluation,
    SimilarityTestBed,
    build_testbed,
    calibrate,
    evaluate_similarity_model,
    grid_search,
    roc_auc,
)

__all__ = [
    "CalibrationResult",
    "EmbeddingVector",
    "GridSearchResult",
    "INFERENCE_EPOCHS",
    "ModelFileError",
    "NEGATIVE_SAMPLES",
    "OutOfVocabularyError",
    "ScoreStats",
    "SimilarityEvaluation",
    "SimilarityModel",
    "SimilarityTestBed",
    "TrainingError",
    "TrainingScenario",
    "UndefinedSimilarityError",
    "batch_loss_and_grads",
    "build_testbed",
    "calibrate",
    "cosine",
    "derive_seed",
    "evaluate_similarity_model",
    "grid_search",
    "infer_vector",
    "load_model",
    "reference_vector",
    "roc_auc",
    "save_model",
    "similarity_score",
    "train",
]
