import unicodedata
from collections import Counter
from pathlib import Path
from typing import Iterable, List

PAD, DELIM, UNK = "<pad>", "<delim>", "<unk>"
RESERVED = (PAD, DELIM, UNK)
PAD_ID, DELIM_ID, UNK_ID = 0, 1, 2


def _is_punctuation(ch: str) -> bool:
    return unicodedata.category(ch).startswith("P")


def _strip_edges(token: str) -> str:
    start, end = 0, len(token)
    while start < end and _is_punctuation(token[start]):
        start += 1
    while end > start and _is_punctuation(token[end - 1]):
        end -= 1
    return token[start:end]


def tokenize(text: str) -> List[str]:
    """Lowercase, split on Unicode whitespace, strip punctuation from token edges."""
    tokens = (_strip_edges(raw) for raw in text.lower().split())
    return [token for token in tokens if token]


class Vocabulary():
    """token <-> index map; PAD, DELIM and UNK always take indices 0, 1, 2."""

    def __init__(self, tokens: Iterable[str] = ()):
        tokens = [t for t in tokens if t not in RESERVED]
        self.tokens = list(RESERVED) + tokens
        assert len(self.tokens) == len(set(self.tokens)), "ERROR: repeated tokens appeared!"
        self._index = {token: i for i, token in enumerate(self.tokens)}

    def __getitem__(self, idx):
        if isinstance(idx, list):
            return [self.__getitem__(i) for i in idx]
        elif isinstance(idx, str):
            return self._index.get(idx, UNK_ID)
        elif isinstance(idx, int):
            return self.tokens[idx]
        raise TypeError(f"unsupported index type {type(idx).__name__}")

    def __len__(self):
        return len(self.tokens)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.tokens == other.tokens

    def encode(self, tokens: List[str]) -> List[int]:
        return self.__getitem__(list(tokens))

    def decode(self, ids: Iterable[int]) -> List[str]:
        return [self.tokens[int(i)] for i in ids]

    def save(self, save_path: str | Path) -> None:
        with open(save_path, 'w', encoding='utf-8', newline='\n') as f:
            f.write('\n'.join(self.tokens) + '\n')

    @classmethod
    def load(cls, load_path: str | Path) -> "Vocabulary":
        with open(load_path, 'r', encoding='utf-8', newline='\n') as f:
            tokens = f.read().rstrip('\n').split('\n')
        if tuple(tokens[:len(RESERVED)]) != RESERVED:
            raise ValueError(f"{load_path}: reserved tokens missing or out of order")
        return cls(tokens[len(RESERVED):])


def build_vocab(records, min_count: int = 1) -> Vocabulary:
    """Index training tokens with count >= min_count.

    Order: descending count, then lexicographic, after the reserved slots.
    Pass training records only, so no held-out text reaches the vocabulary.
    """
    if min_count < 1:
        raise ValueError(f"min_count must be at least 1, got {min_count}")
    counts = Counter()
    for record in records:
        counts.update(tokenize(record.text))
    kept = [token for token, count in counts.items() if count >= min_count and token not in RESERVED]
    kept.sort(key=lambda token: (-counts[token], token))
    return Vocabulary(kept)
