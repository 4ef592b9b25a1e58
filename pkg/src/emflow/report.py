"""Matplotlib summary figure for a force field."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .ampere import ForceField  # noqa: E402
from .edges import DIRECTION_STEPS, DIRECTIONS, EdgeMap, quantize_direction  # noqa: E402


def plot_force_field(field: ForceField, overlay: EdgeMap = None, quantized: bool = True,
                     title: str = None):
    """Two panels: direction arrows over the overlay, and a magnitude map."""
    fig, (ax_dir, ax_mag) = plt.subplots(1, 2, figsize=(10, 4.8))
    extent = (-0.5, field.width - 0.5, field.height - 0.5, -0.5)
    if overlay is not None:
        ax_dir.imshow(np.where(overlay.flags, 0.5, 1.0), cmap="gray", vmin=0, vmax=1,
                      extent=extent, interpolation="nearest")
    mag = field.magnitude
    nz = mag > 0
    u = np.zeros(len(field))
    v = np.zeros(len(field))
    if quantized:
        for i in np.nonzero(nz)[0]:
            dx, dy = DIRECTION_STEPS[DIRECTIONS.index(quantize_direction((field.fx[i], field.fy[i])))]
            n = np.hypot(dx, dy)
            u[i], v[i] = dx / n, dy / n
    else:
        u[nz] = field.fx[nz] / mag[nz]
        v[nz] = field.fy[nz] / mag[nz]
    # angles="xy" follows the inverted (y-down) data axis, so v is passed as is
    ax_dir.quiver(field.xs[nz], field.ys[nz], u[nz], v[nz], pivot="middle",
                  angles="xy", scale_units="xy", scale=1.25, width=0.006)
    ax_dir.plot(field.xs[~nz], field.ys[~nz], "k.", markersize=2)
    ax_dir.set_xlim(extent[0], extent[1])
    ax_dir.set_ylim(extent[2], extent[3])
    ax_dir.set_aspect("equal")
    ax_dir.set_title("force direction")

    grid = np.full((field.height, field.width), np.nan)
    grid[field.ys, field.xs] = mag
    im = ax_mag.imshow(grid, extent=extent, interpolation="nearest", cmap="viridis")
    fig.colorbar(im, ax=ax_mag, shrink=0.8, label="|F|")
    ax_mag.set_title("force magnitude")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    return fig


def save_force_figure(field: ForceField, path, overlay: EdgeMap = None,
                      quantized: bool = True, title: str = None) -> None:
    fig = plot_force_field(field, overlay, quantized, title)
    # fixed metadata keeps repeated runs byte-identical
    metadata = {"Software": None} if str(path).lower().endswith(".png") else {"Date": None}
    fig.savefig(path, dpi=100, metadata=metadata)
    plt.close(fig)
