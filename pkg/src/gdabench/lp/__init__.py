"""Link-prediction embedding models: training, scoring and candidate ranking."""

from .config import ModelConfig, ModelKind, default_config
from .models import EmbeddingModel, init_model, score, score_batch
from .ranking import CandidateRanking, PredictDirection, filter_by_kind, rank_candidates
from .train import TrainResult, train

__all__ = [
    "ModelConfig",
    "ModelKind",
    "default_config",
    "EmbeddingModel",
    "init_model",
    "score",
    "score_batch",
    "CandidateRanking",
    "PredictDirection",
    "filter_by_kind",
    "rank_candidates",
    "TrainResult",
    "train",
]
