"""
Both qualitative artifacts for one (user, item) pair of a trained model.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict

from src.corpus.documents import ReviewIndex
from src.corpus.vocabulary import Vocabulary
from src.models.conqar import ConQARModel
from src.schemas import ConfigError
from src.utils.logging_config import setup_logger, SUCCESS_ICON
from src.viz.heatmap import HeatmapExport, export_density_heatmap, render_heatmap_png
from src.viz.highlights import DEFAULT_TOP_K, HighlightExport, export_position_highlights

logger = setup_logger('viz')


@dataclass
class PairExport:
    prediction: float
    heatmaps: Dict[str, HeatmapExport]
    highlights: Dict[str, HighlightExport]


def export_pair(model: ConQARModel, index: ReviewIndex, vocab: Vocabulary, user_id: str, item_id: str,
                out_dir: str | Path, k: int = DEFAULT_TOP_K) -> PairExport:
    """Heatmaps of ρ_u and ρ_v plus top-k highlights of both documents."""
    if not model.uses_density:
        raise ConfigError(f"variant {model.config.variant!r} has no density matrices to export")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    docs = {"user": index.document("user", user_id), "item": index.document("item", item_id)}
    result = model.forward(docs["user"], docs["item"], training=False)
    rhos = {"user": result.rho_u, "item": result.rho_v}

    heatmaps, highlights = {}, {}
    for side, doc in docs.items():
        stem = out_dir / f"{side}_{doc.owner_id}"
        heatmaps[side] = export_density_heatmap(rhos[side], stem.with_name(stem.name + "_density"))
        render_heatmap_png(rhos[side], stem.with_name(stem.name + "_density.png"))
        highlights[side] = export_position_highlights(
            vocab.decode(doc.token_ids), model.positions.get(side, doc.owner_id), k,
            stem.with_name(stem.name + "_highlights"))
    logger.info(f"{SUCCESS_ICON} exported heatmaps and top-{k} highlights for "
                f"({user_id}, {item_id}) to {out_dir}")
    return PairExport(result.prediction.item(), heatmaps, highlights)
