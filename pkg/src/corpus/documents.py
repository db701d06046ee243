"""
Per-user and per-item review documents.

A document is `max_reviews` fixed slots of `max_review_words` tokens, each
slot followed by one DELIM, so L_max = max_reviews * (max_review_words + 1).
Reviews fill slots in chronological order when every review has a timestamp,
in input order otherwise; short reviews are PAD-filled, long ones truncated.
An owner with no usable review gets an all-PAD document flagged empty.
"""

from collections import defaultdict
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np

from src.corpus.records import ReviewRecord
from src.corpus.vocabulary import DELIM_ID, PAD_ID, RESERVED, UNK_ID, Vocabulary, tokenize
from src.utils.binary_io import read_container, write_container

Side = Literal["user", "item"]

DEFAULT_MAX_REVIEW_WORDS = 100
DEFAULT_MAX_REVIEWS = 15


def document_length(max_reviews: int = DEFAULT_MAX_REVIEWS,
                    max_review_words: int = DEFAULT_MAX_REVIEW_WORDS) -> int:
    return max_reviews * (max_review_words + 1)


@dataclass(frozen=True)
class Document:
    """One assembled row. `sources` lists the review ids that fed it."""
    owner_id: str
    token_ids: np.ndarray
    mask: np.ndarray
    empty: bool
    sources: Tuple[str, ...] = ()

    @property
    def length(self) -> int:
        return int(self.token_ids.shape[0])


@dataclass
class DocumentBatch:
    token_ids: np.ndarray          # [batch x L_max] int64
    mask: np.ndarray               # [batch x L_max] bool, True = real token
    owner_ids: List[str]
    empty: np.ndarray              # [batch] bool
    sources: List[Tuple[str, ...]] = field(default_factory=list)
    sides: List[str] = field(default_factory=list)     # "user" / "item" per row, when known

    def __len__(self) -> int:
        return len(self.owner_ids)

    @property
    def max_length(self) -> int:
        return int(self.token_ids.shape[1])

    def row(self, i: int) -> Document:
        return Document(
            owner_id=self.owner_ids[i],
            token_ids=self.token_ids[i],
            mask=self.mask[i],
            empty=bool(self.empty[i]),
            sources=self.sources[i] if self.sources else (),
        )

    @classmethod
    def stack(cls, documents: Sequence[Document], sides: Sequence[str] = ()) -> "DocumentBatch":
        if not documents:
            raise ValueError("cannot stack an empty list of documents")
        if sides and len(sides) != len(documents):
            raise ValueError(f"{len(sides)} sides for {len(documents)} documents")
        return cls(
            token_ids=np.stack([d.token_ids for d in documents]),
            mask=np.stack([d.mask for d in documents]),
            owner_ids=[d.owner_id for d in documents],
            empty=np.array([d.empty for d in documents], dtype=bool),
            sources=[d.sources for d in documents],
            sides=list(sides),
        )


def _encode_review(text: str, vocab: Vocabulary) -> List[int]:
    # review text that spells a reserved marker must not act as one
    return [UNK_ID if token in RESERVED else vocab[token] for token in tokenize(text)]


def assemble_document(owner: str, reviews: Sequence[ReviewRecord], vocab: Vocabulary,
                      max_review_words: int = DEFAULT_MAX_REVIEW_WORDS,
                      max_reviews: int = DEFAULT_MAX_REVIEWS,
                      exclude: Optional[str] = None) -> Document:
    """Build the document of one user or item.

    Args:
        owner: user or item id every review must belong to
        reviews: that owner's training-visible reviews
        vocab: vocabulary built from the training split
        max_review_words: tokens kept per review slot
        max_reviews: number of review slots
        exclude: review_id dropped before truncation (the rating being predicted)

    Returns:
        Document of length max_reviews * (max_review_words + 1)
    """
    if max_review_words < 1 or max_reviews < 1:
        raise ValueError("max_review_words and max_reviews must be positive")
    for review in reviews:
        if owner not in (review.user_id, review.item_id):
            raise ValueError(f"review {review.review_id} does not belong to {owner!r}")

    usable = [r for r in reviews if r.review_id != exclude]
    if usable and all(r.timestamp is not None for r in usable):
        usable = sorted(usable, key=lambda r: r.timestamp)
    usable = usable[:max_reviews]

    length = document_length(max_reviews, max_review_words)
    token_ids = np.full(length, PAD_ID, dtype=np.int64)
    if usable:
        slot = max_review_words + 1
        for i, review in enumerate(usable):
            ids = _encode_review(review.text, vocab)[:max_review_words]
            token_ids[i * slot:i * slot + len(ids)] = ids
        token_ids[slot - 1::slot] = DELIM_ID

    return Document(
        owner_id=owner,
        token_ids=token_ids,
        mask=token_ids != PAD_ID,
        empty=not usable,
        sources=tuple(r.review_id for r in usable),
    )


class ReviewIndex:
    """Training-visible reviews grouped by user and by item.

    Documents are only ever built from the reviews given here, so an index
    over the training split cannot leak validation or test text.
    """

    def __init__(self, visible: Sequence[ReviewRecord], vocab: Vocabulary,
                 max_review_words: int = DEFAULT_MAX_REVIEW_WORDS,
                 max_reviews: int = DEFAULT_MAX_REVIEWS):
        self.vocab = vocab
        self.max_review_words = max_review_words
        self.max_reviews = max_reviews
        self._by_owner: Dict[Side, Dict[str, List[ReviewRecord]]] = {
            "user": defaultdict(list),
            "item": defaultdict(list),
        }
        for record in visible:
            self._by_owner["user"][record.user_id].append(record)
            self._by_owner["item"][record.item_id].append(record)
        self._cached = lru_cache(maxsize=None)(self._assemble)

    @property
    def doc_length(self) -> int:
        return document_length(self.max_reviews, self.max_review_words)

    def owners(self, side: Side) -> List[str]:
        return sorted(self._by_owner[side])

    def reviews(self, side: Side, owner: str) -> List[ReviewRecord]:
        return list(self._by_owner[side].get(owner, ()))

    def _assemble(self, side: Side, owner: str, exclude: Optional[str]) -> Document:
        return assemble_document(owner, self._by_owner[side].get(owner, ()), self.vocab,
                                 self.max_review_words, self.max_reviews, exclude)

    def document(self, side: Side, owner: str, exclude: Optional[str] = None) -> Document:
        if side not in self._by_owner:
            raise ValueError(f"side must be 'user' or 'item', got {side!r}")
        owned = {r.review_id for r in self._by_owner[side].get(owner, ())}
        # exclusions of reviews the owner never had share the plain cache entry
        return self._cached(side, owner, exclude if exclude in owned else None)

    def batch(self, side: Side, owners: Sequence[str],
              excludes: Optional[Sequence[Optional[str]]] = None) -> DocumentBatch:
        excludes = excludes or [None] * len(owners)
        return DocumentBatch.stack([self.document(side, o, e) for o, e in zip(owners, excludes)],
                                   sides=[side] * len(owners))


def save_documents(path: str | Path, batch: DocumentBatch) -> None:
    """Cache a batch in the binary container format."""
    header = {"owner_ids": batch.owner_ids, "sources": [list(s) for s in batch.sources],
              "sides": batch.sides}
    write_container(path, "documents", header, {
        "token_ids": batch.token_ids.astype(np.int64),
        "mask": batch.mask.astype(bool),
        "empty": batch.empty.astype(bool),
    })


def load_documents(path: str | Path) -> DocumentBatch:
    header, arrays = read_container(path, "documents")
    return DocumentBatch(
        token_ids=arrays["token_ids"],
        mask=arrays["mask"],
        owner_ids=list(header["owner_ids"]),
        empty=arrays["empty"],
        sources=[tuple(s) for s in header["sources"]],
        sides=list(header.get("sides", [])),
    )
