"""
Embedding lookup and same-padded 1-D convolutions: document -> feature map C (n x L).
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from src.corpus.documents import Document
from src.corpus.records import DatasetFormatError
from src.corpus.vocabulary import PAD_ID, Vocabulary
from src.models.params import ParameterStore, glorot_uniform
from src.numerics import ShapeError, Tensor
from src.numerics import ops
from src.utils.logging_config import setup_logger, SUCCESS_ICON

logger = setup_logger('encoder')


@dataclass
class EmbeddingTable:
    """W_e with one column per vocabulary entry; the PAD column stays zero."""
    weight: Tensor

    @property
    def dim(self) -> int:
        return self.weight.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.weight.shape[1]

    @classmethod
    def create(cls, store: ParameterStore, vocab_size: int, dim: int,
               rng: np.random.Generator, init: float = 0.05) -> "EmbeddingTable":
        data = rng.uniform(-init, init, size=(dim, vocab_size))
        data[:, PAD_ID] = 0.0
        return cls(store.add("embedding.weight", data))

    def reset_pad(self) -> None:
        self.weight.data[:, PAD_ID] = 0.0


def load_word2vec(path: str | Path, vocab: Vocabulary, table: EmbeddingTable) -> int:
    """Copy vectors of in-vocabulary tokens from a word2vec text file.

    Tokens missing from the file keep their random initialisation.

    Returns:
        number of vocabulary columns overwritten
    """
    imported = 0
    with open(path, "r", encoding="utf-8") as f:
        header = f.readline().split()
        if len(header) != 2:
            raise DatasetFormatError(f"{path}: expected a 'count dim' header line")
        dim = int(header[1])
        if dim != table.dim:
            raise DatasetFormatError(f"{path}: vectors have dimension {dim}, table has {table.dim}")
        for line in f:
            fields = line.rstrip().split(" ")
            if len(fields) != dim + 1:
                continue
            token = fields[0]
            if token not in vocab or vocab[token] == PAD_ID:
                continue
            table.weight.data[:, vocab[token]] = np.asarray(fields[1:], dtype=np.float64)
            imported += 1
    logger.info(f"{SUCCESS_ICON} imported {imported} of {len(vocab)} vectors from {path}")
    return imported


def _token_ids(doc: Union[Document, np.ndarray, Sequence[int]]) -> np.ndarray:
    if isinstance(doc, Document):
        return doc.token_ids
    return np.asarray(doc, dtype=np.int64)


def embed(doc: Union[Document, np.ndarray, Sequence[int]], table: EmbeddingTable) -> Tensor:
    """X = x_1 ⊕ ... ⊕ x_L as a d x L matrix; PAD columns are zero."""
    return ops.embedding_lookup(table.weight, _token_ids(doc), pad_id=PAD_ID)


def split_filters(n_filters: int, window_sizes: Sequence[int]) -> List[int]:
    """Spread n filters over window sizes; the remainder goes to the first sizes."""
    if n_filters < len(window_sizes):
        raise ValueError(f"{n_filters} filters cannot cover {len(window_sizes)} window sizes")
    base, extra = divmod(n_filters, len(window_sizes))
    return [base + (1 if i < extra else 0) for i in range(len(window_sizes))]


@dataclass
class ConvFilterBank:
    """Per window size h: weight (f_h x d x h) and bias (f_h x 1)."""
    window_sizes: List[int]
    filters_per_size: List[int]
    weights: List[Tensor]
    biases: List[Tensor]

    @property
    def n_filters(self) -> int:
        return sum(self.filters_per_size)

    @classmethod
    def create(cls, store: ParameterStore, dim: int, n_filters: int,
               window_sizes: Sequence[int], rng: np.random.Generator) -> "ConvFilterBank":
        window_sizes = list(window_sizes)
        counts = split_filters(n_filters, window_sizes)
        weights, biases = [], []
        for h, f in zip(window_sizes, counts):
            weights.append(store.add(f"conv.h{h}.weight",
                                     glorot_uniform(rng, (f, dim, h), fan_in=dim * h, fan_out=f)))
            biases.append(store.add(f"conv.h{h}.bias", np.zeros((f, 1))))
        return cls(window_sizes, counts, weights, biases)


@dataclass
class FeatureMap:
    values: Tensor          # n x L
    mask: np.ndarray        # L, True = real token

    @property
    def length(self) -> int:
        return self.values.shape[1]


def feature_map(X: Tensor, bank: ConvFilterBank, activation_kind: str = "relu",
                mask: Optional[np.ndarray] = None) -> FeatureMap:
    """c_i = f(w · X[:, i:i+h] + b) at every position, zero columns past the end.

    When `mask` is given, columns at PAD positions are zeroed after the
    activation so padding contributes no state downstream.
    """
    length = X.shape[1]
    if length < max(bank.window_sizes):
        raise ShapeError(f"document length {length} shorter than window {max(bank.window_sizes)}")
    rows = []
    for h, weight, bias in zip(bank.window_sizes, bank.weights, bank.biases):
        out = None
        for offset in range(h):
            tap = ops.matmul(ops.index(weight, (slice(None), slice(None), offset)),
                             ops.shift_columns(X, offset))
            out = tap if out is None else ops.add(out, tap)
        rows.append(ops.activation(ops.add(out, bias), activation_kind))
    values = rows[0] if len(rows) == 1 else ops.concat(rows, axis=0)
    if mask is None:
        return FeatureMap(values, np.ones(length, dtype=bool))
    mask = np.asarray(mask, dtype=bool)
    values = ops.mul(values, mask.astype(values.dtype)[None, :])
    return FeatureMap(values, mask)
