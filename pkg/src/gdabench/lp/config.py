"""Model configurations and their stock defaults.

Translational models (and the holographic one) train with a margin ranking
loss and carry a margin; the multiplicative models train with a regularized
logistic loss and carry an L2 coefficient instead.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from ..errors import ConfigError


class ModelKind(str, enum.Enum):
    TRANSE = "transe"
    TRANSD = "transd"
    TRANSH = "transh"
    DISTMULT = "distmult"
    HOLE = "hole"
    COMPLEX = "complex"


MARGIN_KINDS = (ModelKind.TRANSE, ModelKind.TRANSD, ModelKind.TRANSH, ModelKind.HOLE)
LOGISTIC_KINDS = (ModelKind.DISTMULT, ModelKind.COMPLEX)


@dataclass(frozen=True)
class ModelConfig:
    kind: ModelKind
    dim: int = 200
    epochs: int = 100
    nr_batches: int = 100
    alpha: float = 0.001
    margin: float | None = None
    l2_lambda: float | None = None
    bern: int = 0
    entity_negative_rate: int = 1
    relation_negative_rate: int = 0
    optimizer: str = "sgd"  # "sgd" | "adagrad"
    norm: str = "l2"  # distance norm, TransE only: "l1" | "l2"
    seed: int = 1
    workers: int = 1

    def validate(self) -> None:
        if self.dim <= 0:
            raise ConfigError("dim must be positive")
        if self.epochs < 0 or self.nr_batches <= 0:
            raise ConfigError("epochs must be >= 0 and nr_batches positive")
        if self.entity_negative_rate < 0 or self.relation_negative_rate < 0:
            raise ConfigError("negative rates must be >= 0")
        if self.kind in MARGIN_KINDS and self.margin is None:
            raise ConfigError(f"{self.kind.value} requires a margin")
        if self.kind in LOGISTIC_KINDS and self.l2_lambda is None:
            raise ConfigError(f"{self.kind.value} requires an l2_lambda")
        if self.optimizer not in ("sgd", "adagrad"):
            raise ConfigError(f"unknown optimizer {self.optimizer!r}")
        if self.norm not in ("l1", "l2"):
            raise ConfigError(f"unknown norm {self.norm!r}")
        if self.bern not in (0, 1):
            raise ConfigError("bern must be 0 or 1")


_DEFAULTS: dict[ModelKind, dict] = {
    ModelKind.TRANSE: dict(alpha=0.001, bern=0, margin=1.0, optimizer="sgd"),
    ModelKind.TRANSD: dict(alpha=1.0, bern=1, margin=4.0, optimizer="sgd"),
    ModelKind.TRANSH: dict(alpha=0.001, bern=0, margin=1.0, optimizer="sgd"),
    ModelKind.DISTMULT: dict(alpha=0.5, l2_lambda=0.05, bern=1, optimizer="adagrad"),
    ModelKind.HOLE: dict(alpha=0.1, bern=0, margin=0.2, optimizer="adagrad"),
    ModelKind.COMPLEX: dict(alpha=0.5, l2_lambda=0.05, bern=1, optimizer="adagrad"),
}


def default_config(kind: ModelKind | str, **overrides) -> ModelConfig:
    """Stock configuration for one model kind, with optional field overrides."""
    kind = ModelKind(kind)
    cfg = ModelConfig(kind=kind, **_DEFAULTS[kind])
    if overrides:
        cfg = replace(cfg, **overrides)
    cfg.validate()
    return cfg
