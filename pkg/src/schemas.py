"""
Configuration and report models shared by the trainer and the CLI.
"""

import itertools
import json
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

Variant = Literal["full", "conv_quant", "conv_mutual"]
DistMode = Literal["softmax", "free"]
Pooling = Literal["mean", "max"]
OptimizerKind = Literal["adam", "sgd"]

VARIANTS: Tuple[str, ...] = ("full", "conv_quant", "conv_mutual")

# hyperparameter grid searched on the validation split
SEARCH_GRID: Dict[str, List[Any]] = {
    "window_sizes": [(1,), (2,), (3,), (1, 2, 3)],
    "n_filters": [50, 100, 150],
    "fc_layers": [1, 2, 3, 4],
    "alpha": [0.1, 0.3, 0.5, 0.7, 0.9],
    "learning_rate": [0.1, 0.01, 0.001, 0.0001],
}


class ConfigError(ValueError):
    """A configuration value is outside its allowed range."""


class TrainConfig(BaseModel):
    """One training run."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    # encoder
    embedding_dim: int = Field(64, gt=0, description="词向量维度 d")
    embedding_init: float = Field(0.05, gt=0, description="uniform(-x, x) embedding init")
    embeddings_path: Optional[str] = Field(None, description="word2vec text file to import")
    n_filters: int = Field(50, gt=0, description="卷积核总数 n")
    window_sizes: Tuple[int, ...] = Field((1, 2, 3), description="卷积窗口大小")
    activation: Literal["relu", "elu", "identity"] = "relu"

    # density / attention
    dist_mode: DistMode = "softmax"
    pooling: Pooling = "mean"
    variant: Variant = "full"

    # head
    fc_layers: int = Field(2, ge=1, description="全连接层数 m")
    fc_hidden: int = Field(32, gt=0)
    dropout_rate: float = Field(0.5, ge=0.0, lt=1.0)
    clip_predictions: bool = Field(False, description="clip to [1, 5] at evaluation only")

    # objective / optimisation
    alpha: float = Field(0.5, ge=0.0, le=1.0, description="trace-loss weight")
    learning_rate: float = Field(0.001, gt=0)
    optimizer: OptimizerKind = "adam"
    batch_size: int = Field(32, gt=0)
    epochs: int = Field(30, gt=0)
    patience: int = Field(5, ge=1)
    seed: int = 2020
    dtype: Optional[Literal["float64", "float32"]] = None

    # documents
    max_reviews: int = Field(15, gt=0)
    max_review_words: int = Field(100, gt=0)
    min_count: int = Field(1, ge=1)

    @field_validator("window_sizes")
    @classmethod
    def _check_windows(cls, value: Tuple[int, ...]) -> Tuple[int, ...]:
        if not value:
            raise ValueError("window_sizes must not be empty")
        if len(set(value)) != len(value) or any(h not in (1, 2, 3) for h in value):
            raise ValueError(f"window_sizes must be distinct values from {{1, 2, 3}}, got {value}")
        return tuple(value)

    @property
    def doc_length(self) -> int:
        return self.max_reviews * (self.max_review_words + 1)

    def check_search_grid(self) -> None:
        """Raise ConfigError unless every grid axis takes a grid value."""
        problems = [
            f"{axis}={getattr(self, axis)!r}"
            for axis, allowed in SEARCH_GRID.items()
            if getattr(self, axis) not in allowed
        ]
        if problems:
            raise ConfigError(f"outside the search grid: {', '.join(problems)}")

    def replace(self, **changes) -> "TrainConfig":
        try:
            return TrainConfig.model_validate({**self.model_dump(), **changes})
        except ValidationError as e:
            raise ConfigError(str(e)) from e


class GridSpec(BaseModel):
    """Per-axis value lists expanded over a base config."""
    model_config = ConfigDict(extra="forbid")

    base: TrainConfig = Field(default_factory=TrainConfig)
    axes: Dict[str, List[Any]] = Field(default_factory=dict)
    strict: bool = Field(False, description="require every combination to lie on the search grid")

    @field_validator("axes")
    @classmethod
    def _check_axes(cls, value: Dict[str, List[Any]]) -> Dict[str, List[Any]]:
        for axis, values in value.items():
            if axis not in TrainConfig.model_fields:
                raise ValueError(f"unknown grid axis {axis!r}")
            if not values:
                raise ValueError(f"grid axis {axis!r} has no values")
        return value

    @classmethod
    def full_search(cls, base: Optional[TrainConfig] = None) -> "GridSpec":
        return cls(base=base or TrainConfig(), axes={k: list(v) for k, v in SEARCH_GRID.items()},
                   strict=True)

    @property
    def size(self) -> int:
        size = 1
        for values in self.axes.values():
            size *= len(values)
        return size

    def configs(self) -> List[TrainConfig]:
        """Every combination, the last axis varying fastest."""
        names = list(self.axes)
        out = []
        for combo in itertools.product(*(self.axes[n] for n in names)):
            config = self.base.replace(**dict(zip(names, combo)))
            if self.strict:
                config.check_search_grid()
            out.append(config)
        return out


class EpochRecord(BaseModel):
    epoch: int
    train_loss: float
    rating_loss: float
    trace_loss: float
    validation_mae: float
    validation_rmse: float
    improved: bool


class MetricsReport(BaseModel):
    """Outcome of one training run; test metrics are filled exactly once."""
    config: TrainConfig
    epochs: List[EpochRecord] = Field(default_factory=list)
    best_epoch: int = 0
    best_validation_mae: Optional[float] = None
    test_mae: Optional[float] = None
    test_rmse: Optional[float] = None
    train_mse: Optional[float] = None
    baseline_test_mae: Optional[float] = None
    stopped_early: bool = False


class GridTrial(BaseModel):
    index: int
    config: TrainConfig
    validation_mae: Optional[float] = Field(None, description="None when the run diverged")
    diverged: Optional[str] = None


class GridReport(BaseModel):
    trials: List[GridTrial]
    best_index: int
    best_config: TrainConfig
    best_report: MetricsReport


class AblationRow(BaseModel):
    variant: Variant
    representation_length: int
    train_mse: Optional[float]
    validation_mae: Optional[float]
    test_mae: Optional[float]


class AblationTable(BaseModel):
    rows: List[AblationRow]

    def test_mae(self) -> Dict[str, Optional[float]]:
        return {row.variant: row.test_mae for row in self.rows}


def _read_mapping(path: str | Path) -> Dict[str, Any]:
    path = Path(path)
    if path.suffix == ".toml":
        with open(path, "rb") as f:
            return tomllib.load(f)
    if path.suffix == ".json":
        return json.loads(path.read_text(encoding="utf-8"))
    raise ConfigError(f"{path}: expected a .toml or .json file")


def load_train_config(path: str | Path) -> TrainConfig:
    try:
        return TrainConfig.model_validate(_read_mapping(path))
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}") from e


def load_grid_spec(path: str | Path) -> GridSpec:
    """Grid file: optional `strict`, a `base` table and an `axes` table of lists."""
    try:
        return GridSpec.model_validate(_read_mapping(path))
    except ValidationError as e:
        raise ConfigError(f"{path}: {e}") from e
