"""
Density-matrix heatmaps: a raw CSV plus an SVG grid, darker cells for larger values.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Union
from xml.sax.saxutils import escape, quoteattr

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from matplotlib import colormaps
from matplotlib.colors import Normalize, to_hex

from src.models.density import DensityMatrix
from src.numerics import NonFiniteError, ShapeError, Tensor

COLORMAP = "Greys"
CELL_SIZE = 8


@dataclass
class HeatmapExport:
    values: np.ndarray
    owner_id: str
    vmin: float
    vmax: float
    csv_path: Path
    svg_path: Path

    @property
    def shape(self):
        return self.values.shape


def _matrix(rho: Union[DensityMatrix, Tensor, np.ndarray]) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        rho = rho.values
    values = np.asarray(rho.data if isinstance(rho, Tensor) else rho, dtype=np.float64)
    if values.ndim != 2:
        raise ShapeError(f"heatmap needs a matrix, got shape {values.shape}")
    if not np.all(np.isfinite(values)):
        raise NonFiniteError("density matrix", "export")
    return values


def cell_colors(values: np.ndarray, vmin: float, vmax: float) -> np.ndarray:
    """Hex fill per cell on the grey ramp; vmin maps to white, vmax to black."""
    cmap = colormaps[COLORMAP]
    scaled = Normalize(vmin=vmin, vmax=vmax)(values)
    return np.array([[to_hex(cmap(float(v))) for v in row] for row in np.ma.filled(scaled, 0.0)])


def _svg(values: np.ndarray, fills: np.ndarray, owner_id: str, cell: int) -> str:
    rows, cols = values.shape
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{cols * cell}" height="{rows * cell}" '
        f'viewBox="0 0 {cols * cell} {rows * cell}">',
        f"<title>{escape(owner_id)}</title>" if owner_id else "<title>density matrix</title>",
    ]
    for i in range(rows):
        for j in range(cols):
            lines.append(f'<rect x="{j * cell}" y="{i * cell}" width="{cell}" height="{cell}" '
                         f'fill="{fills[i, j]}" data-value={quoteattr(repr(float(values[i, j])))}/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def _stem(path: str | Path, suffixes) -> Path:
    path = Path(path)
    return path.with_suffix("") if path.suffix in suffixes else path


def export_density_heatmap(rho: Union[DensityMatrix, Tensor, np.ndarray], path: str | Path,
                           owner_id: str = "", cell_size: int = CELL_SIZE) -> HeatmapExport:
    """Write `<path>.csv` (n rows of n comma-separated values) and `<path>.svg`.

    The colour scale runs from the matrix minimum to its maximum.
    """
    values = _matrix(rho)
    if not owner_id and isinstance(rho, DensityMatrix):
        owner_id = rho.owner_id
    stem = _stem(path, (".csv", ".svg"))
    csv_path, svg_path = stem.with_name(stem.name + ".csv"), stem.with_name(stem.name + ".svg")
    vmin, vmax = float(values.min()), float(values.max())

    np.savetxt(csv_path, values, fmt="%.17g", delimiter=",")
    fills = cell_colors(values, vmin, vmax)
    svg_path.write_text(_svg(values, fills, owner_id, cell_size), encoding="utf-8")
    return HeatmapExport(values, owner_id, vmin, vmax, csv_path, svg_path)


def read_heatmap_csv(path: str | Path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)


def render_heatmap_png(rho: Union[DensityMatrix, Tensor, np.ndarray], path: str | Path,
                       title: str = "") -> Path:
    values = _matrix(rho)
    fig, ax = plt.subplots(figsize=(6, 5))
    image = ax.imshow(values, cmap=COLORMAP, vmin=values.min(), vmax=values.max())
    fig.colorbar(image, ax=ax)
    ax.set_title(title or (rho.owner_id if isinstance(rho, DensityMatrix) else "density matrix"))
    ax.set_xlabel("filter")
    ax.set_ylabel("filter")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return Path(path)
