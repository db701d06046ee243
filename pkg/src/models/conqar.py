"""
The full rating model: user document + item document -> predicted rating.

Variants:
    full         density matrices, mutual attention, z of length 3n+1
    conv_quant   density matrices, z = [tr(M)] ⊕ diag(M) of length n+1
    conv_mutual  no density matrices; M' = C_u · C_vᵀ, z_u / z_v are the
                 attention-weighted mean activations of each filter (3n+1)
"""

import hashlib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Tuple

import numpy as np

from src.config import resolve_dtype
from src.corpus.documents import Document
from src.corpus.vocabulary import Vocabulary
from src.models.attention import FusedRepresentation, fuse, mutual_attention, mutual_matrix
from src.models.density import DensityMatrix, PositionTable, density_matrix, unit_states
from src.models.encoder import ConvFilterBank, EmbeddingTable, FeatureMap, embed, feature_map, load_word2vec
from src.models.head import DenseStack, predict
from src.models.params import ParameterStore
from src.numerics import Tensor
from src.numerics import ops
from src.schemas import VARIANTS, ConfigError, TrainConfig
from src.utils.binary_io import read_container, write_container
from src.utils.logging_config import setup_logger, SUCCESS_ICON

logger = setup_logger('model')

CHECKPOINT_KIND = "checkpoint"


def representation_length(variant: str, n_filters: int) -> int:
    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    return n_filters + 1 if variant == "conv_quant" else 3 * n_filters + 1


def vocabulary_digest(vocab: Vocabulary) -> str:
    return hashlib.sha256(("\n".join(vocab.tokens) + "\n").encode("utf-8")).hexdigest()


@dataclass
class Encoded:
    """One side of a pair after the encoder (and density layer, when used)."""
    feature_map: FeatureMap
    rho: Optional[DensityMatrix]
    empty: bool


@dataclass
class ForwardResult:
    prediction: Tensor
    rho_u: Optional[DensityMatrix]
    rho_v: Optional[DensityMatrix]
    M: Tensor
    fused: FusedRepresentation
    diagnostics: Dict[str, Any] = field(default_factory=dict)


class ConQARModel:
    """Parameters plus the forward pass for one configuration."""

    def __init__(self, config: TrainConfig, vocab_size: int, training_mean: float = 3.0):
        self.config = config
        self.dtype = resolve_dtype(config.dtype)
        self.training_mean = float(training_mean)
        representation_length(config.variant, config.n_filters)

        init_rng = np.random.default_rng(config.seed)
        self.dropout_rng = np.random.default_rng([config.seed, 1])
        self.store = ParameterStore(self.dtype)
        self.embedding = EmbeddingTable.create(self.store, vocab_size, config.embedding_dim,
                                               init_rng, config.embedding_init)
        self.bank = ConvFilterBank.create(self.store, config.embedding_dim, config.n_filters,
                                          config.window_sizes, init_rng)
        self.head = DenseStack.create(self.store, self.representation_length, config.fc_layers,
                                      config.fc_hidden, config.dropout_rate, init_rng,
                                      output_bias=self.training_mean)
        self.positions = PositionTable(self.store, config.doc_length, config.dist_mode)

    @property
    def representation_length(self) -> int:
        return representation_length(self.config.variant, self.config.n_filters)

    @property
    def uses_density(self) -> bool:
        return self.config.variant != "conv_mutual"

    def register_owners(self, users: Iterable[str], items: Iterable[str]) -> None:
        """Create position distributions for training owners, in sorted order."""
        self.positions.register("user", sorted(set(users)))
        self.positions.register("item", sorted(set(items)))

    def import_embeddings(self, path: str | Path, vocab: Vocabulary) -> int:
        return load_word2vec(path, vocab, self.embedding)

    def parameters(self) -> List[Tensor]:
        return self.store.values()

    def after_step(self) -> None:
        self.embedding.reset_pad()

    # ------------------------------------------------------------------
    # forward

    def encode(self, doc: Document, side: str) -> Encoded:
        if doc.length != self.config.doc_length:
            raise ConfigError(
                f"document length {doc.length} does not match configured {self.config.doc_length}")
        X = embed(doc, self.embedding)
        C = feature_map(X, self.bank, self.config.activation, mask=doc.mask)
        rho = None
        if self.uses_density:
            dist = self.positions.get(side, doc.owner_id)
            rho = density_matrix(unit_states(C), dist, doc.owner_id)
        return Encoded(C, rho, doc.empty)

    def combine(self, user: Encoded, item: Encoded, training: bool = False) -> ForwardResult:
        variant = self.config.variant
        if variant == "conv_mutual":
            C_u, C_v = user.feature_map.values, item.feature_map.values
            M = ops.matmul(C_u, ops.transpose(C_v))
            attention = mutual_attention(M, self.config.pooling)
            z_u = ops.mul(attention.a_u, ops.mean(C_u, axis=1))
            z_v = ops.mul(attention.a_v, ops.mean(C_v, axis=1))
            z = ops.concat([ops.reshape(attention.trace, (1,)), attention.diag, z_u, z_v])
            fused = FusedRepresentation(z, attention)
        else:
            M = mutual_matrix(user.rho, item.rho)
            if variant == "full":
                fused = fuse(user.rho, item.rho, M, self.config.pooling)
            else:
                z = ops.concat([ops.reshape(ops.trace(M), (1,)), ops.diagonal(M)])
                fused = FusedRepresentation(z)

        prediction = predict(fused, self.head, training, self.dropout_rng)
        diagnostics = {
            "trace": float(np.trace(M.data)),
            "user_empty": user.empty,
            "item_empty": item.empty,
        }
        if fused.attention is not None:
            diagnostics["a_u"] = fused.attention.a_u.data.copy()
            diagnostics["a_v"] = fused.attention.a_v.data.copy()
        return ForwardResult(prediction, user.rho, item.rho, M, fused, diagnostics)

    def forward(self, user_doc: Document, item_doc: Document, training: bool = False) -> ForwardResult:
        return self.combine(self.encode(user_doc, "user"), self.encode(item_doc, "item"), training)

    def predict_value(self, user_doc: Document, item_doc: Document, clip: Optional[bool] = None) -> float:
        value = self.forward(user_doc, item_doc, training=False).prediction.item()
        if self.config.clip_predictions if clip is None else clip:
            value = float(np.clip(value, 1.0, 5.0))
        return value

    # ------------------------------------------------------------------
    # checkpoints

    def save(self, path: str | Path, vocab: Optional[Vocabulary] = None) -> None:
        """Write config, vocabulary reference and every parameter tensor."""
        header = {
            "config": self.config.model_dump(mode="json"),
            "training_mean": self.training_mean,
            "vocab_size": self.embedding.vocab_size,
            "vocab_sha256": vocabulary_digest(vocab) if vocab is not None else None,
            "parameters": [[name, list(t.shape)] for name, t in self.store.items()],
        }
        write_container(path, CHECKPOINT_KIND, header, self.store.state_dict())
        logger.info(f"{SUCCESS_ICON} checkpoint written to {path}")

    @classmethod
    def load(cls, path: str | Path, vocab: Optional[Vocabulary] = None) -> "ConQARModel":
        header, arrays = read_container(path, CHECKPOINT_KIND)
        if vocab is not None and header["vocab_sha256"] not in (None, vocabulary_digest(vocab)):
            raise ConfigError(f"{path}: checkpoint was trained with a different vocabulary")
        model = cls(TrainConfig.model_validate(header["config"]), header["vocab_size"],
                    header["training_mean"])
        for name, _ in header["parameters"]:
            if name.startswith("position."):
                _, side, owner = name.split(".", 2)
                model.positions.register(side, [owner])
        model.store.load_state_dict(arrays)
        return model

    def owners(self, side: str) -> List[str]:
        prefix = f"position.{side}."
        return [name[len(prefix):] for name in self.store if name.startswith(prefix)]


def forward(user_doc: Document, item_doc: Document, model: ConQARModel,
            training: bool = False) -> Tuple[Tensor, Optional[DensityMatrix], Optional[DensityMatrix], Tensor, Dict[str, Any]]:
    """(ŷ, ρ_u, ρ_v, M, diagnostics) for one pair."""
    result = model.forward(user_doc, item_doc, training)
    return result.prediction, result.rho_u, result.rho_v, result.M, result.diagnostics
