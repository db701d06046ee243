from src.viz.curves import plot_training_curves, training_frame
from src.viz.heatmap import (
    HeatmapExport,
    cell_colors,
    export_density_heatmap,
    read_heatmap_csv,
    render_heatmap_png,
)
from src.viz.highlights import (
    DEFAULT_TOP_K,
    HighlightExport,
    export_position_highlights,
    top_k_positions,
)
from src.viz.pair import PairExport, export_pair
