"""
Top-k position highlights over a review document.
"""

import html
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Union

import numpy as np

from src.corpus.vocabulary import DELIM, PAD
from src.models.density import PositionDistribution
from src.numerics import ShapeError, Tensor
from src.schemas import ConfigError

DEFAULT_TOP_K = 20
HIGHLIGHT_RGB = (255, 196, 0)


@dataclass
class HighlightExport:
    tokens: List[str]
    positions: List[int]            # rank order, best first
    probabilities: List[float]      # p at each ranked position
    html: str
    text: str

    @property
    def highlighted(self) -> set:
        return set(self.positions)


def _probabilities(dist: Union[PositionDistribution, Tensor, np.ndarray, Sequence[float]]) -> np.ndarray:
    if isinstance(dist, PositionDistribution):
        dist = dist.probabilities()
    if isinstance(dist, Tensor):
        dist = dist.data
    return np.asarray(dist, dtype=np.float64)


def top_k_positions(tokens: Sequence[str], p: np.ndarray, k: int = DEFAULT_TOP_K) -> List[int]:
    """Positions of the k largest p among text tokens; ties go to the earlier position."""
    if k <= 0:
        raise ConfigError(f"k must be positive, got {k}")
    candidates = [i for i, token in enumerate(tokens) if token not in (PAD, DELIM)]
    return sorted(candidates, key=lambda i: (-p[i], i))[:k]


def _render_html(tokens: Sequence[str], ranks: dict, p: np.ndarray) -> str:
    top = max((p[i] for i in ranks), default=0.0)
    parts = []
    for i, token in enumerate(tokens):
        if token == PAD:
            continue
        if token == DELIM:
            parts.append("<br/>\n")
            continue
        text = html.escape(token)
        if i in ranks:
            intensity = p[i] / top if top > 0 else 1.0
            r, g, b = HIGHLIGHT_RGB
            parts.append(f'<span style="background-color: rgba({r}, {g}, {b}, {intensity:.3f})" '
                         f'title="rank {ranks[i]}, p={p[i]:.6g}">{text}</span> ')
        else:
            parts.append(f"{text} ")
    body = "".join(parts).rstrip()
    return f'<div class="highlights">\n{body}\n</div>\n'


def _render_text(tokens: Sequence[str], ranks: dict) -> str:
    lines, words = [], []
    for i, token in enumerate(tokens):
        if token == PAD:
            continue
        if token == DELIM:
            lines.append(" ".join(words))
            words = []
            continue
        words.append(f"[{token}]" if i in ranks else token)
    if words:
        lines.append(" ".join(words))
    return "\n".join(lines) + "\n"


def export_position_highlights(tokens: Sequence[str],
                               dist: Union[PositionDistribution, Tensor, np.ndarray, Sequence[float]],
                               k: int = DEFAULT_TOP_K,
                               path: Optional[str | Path] = None) -> HighlightExport:
    """Highlight the top-k text positions of a document by their p values.

    Args:
        tokens: decoded document, one token per position (PAD and DELIM included)
        dist: position distribution over the same positions
        k: number of positions to highlight
        path: when given, `<path>.html` and `<path>.txt` are written

    Returns:
        HighlightExport with the ranked positions and both renderings
    """
    tokens = list(tokens)
    p = _probabilities(dist)
    if p.ndim != 1 or p.shape[0] != len(tokens):
        raise ShapeError(f"{len(tokens)} tokens but a distribution of shape {p.shape}")
    positions = top_k_positions(tokens, p, k)
    ranks = {position: rank for rank, position in enumerate(positions, start=1)}
    export = HighlightExport(
        tokens=tokens,
        positions=positions,
        probabilities=[float(p[i]) for i in positions],
        html=_render_html(tokens, ranks, p),
        text=_render_text(tokens, ranks),
    )
    if path is not None:
        path = Path(path)
        if path.suffix in (".html", ".txt"):
            path = path.with_suffix("")
        path.with_name(path.name + ".html").write_text(export.html, encoding="utf-8")
        path.with_name(path.name + ".txt").write_text(export.text, encoding="utf-8")
    return export
