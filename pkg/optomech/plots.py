"""
SVG renderings of sweep results.

Figures are drawn with the Agg backend and saved with a fixed hash salt and
no date metadata, so identical data gives byte-identical files.
"""

from pathlib import Path
from typing import Sequence, Union

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from matplotlib import colors  # noqa: E402

from .logger import get_logger  # noqa: E402
from .sweeps import PAIR_KEYS, GridPoint, SweepSpec  # noqa: E402

logger = get_logger("plots")

SVG_HASH_SALT = "optomech"


def _save(fig, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "path"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    logger.debug(f"wrote {path}")
    return path


def _symlog_norm(values: np.ndarray) -> colors.Normalize:
    finite = np.abs(values[np.isfinite(values)])
    vmax = float(finite.max()) if finite.size and finite.max() > 0 else 1.0
    return colors.SymLogNorm(linthresh=vmax * 1e-6, vmin=-vmax, vmax=vmax, base=10)


def stability_heatmap(points: Sequence[GridPoint], spec: SweepSpec, path: Union[str, Path]) -> Path:
    """C1 and C2 over the sweep grid; hatched cells are unstable."""
    rows, cols = spec.shape
    c1 = np.array([p.stability.c1 for p in points]).reshape(rows, cols)
    c2 = np.array([p.stability.c2 for p in points]).reshape(rows, cols)
    stable = np.array([p.stable for p in points]).reshape(rows, cols)
    x = spec.x.display

    fig, axes = plt.subplots(1, 2, figsize=(10, 4), constrained_layout=True)
    for ax, values, title in zip(axes, (c1, c2), ("C1", "C2")):
        if spec.y is None or rows < 2 or cols < 2:
            along_x = cols >= 2 or spec.y is None
            ax.plot(x if along_x else spec.y.display, values.ravel(), marker=".", color="tab:blue")
            ax.axhline(0.0, color="gray", linewidth=0.5)
            ax.set_xlabel(spec.x.label if along_x else spec.y.label)
            ax.set_ylabel(title)
        else:
            y = spec.y.display
            mesh = ax.pcolormesh(x, y, values, shading="nearest", cmap="RdBu", norm=_symlog_norm(values))
            if (~stable).any():
                ax.contourf(x, y, (~stable).astype(float), levels=[0.5, 1.5], hatches=["//"], colors="none")
            fig.colorbar(mesh, ax=ax)
            ax.set_xlabel(spec.x.label)
            ax.set_ylabel(spec.y.label)
        ax.set_title(title)
    return _save(fig, path)


def negativity_lines(
    points: Sequence[GridPoint],
    spec: SweepSpec,
    path: Union[str, Path],
    log2: bool = False,
) -> Path:
    """One panel per pair, one line per y value; unstable points are gaps."""
    rows, cols = spec.shape
    x = spec.x.display
    divisor = np.log(2.0) if log2 else 1.0

    fig, axes = plt.subplots(1, 3, figsize=(13, 4), sharey=True, constrained_layout=True)
    for ax, (pair, key) in zip(axes, PAIR_KEYS.items()):
        for r in range(rows):
            chunk = points[r * cols : (r + 1) * cols]
            values = np.array(
                [p.entanglement.pair_results[pair].log_neg / divisor if p.entanglement else np.nan for p in chunk]
            )
            label = f"{spec.y.label.split(' ')[0]} = {spec.y.display[r]:.3g}" if spec.y else None
            ax.plot(x, values, label=label)
        ax.set_title(f"E_N^{key}" + (" (log2)" if log2 else ""))
        ax.set_xlabel(spec.x.label)
    axes[0].set_ylabel("logarithmic negativity")
    if spec.y is not None:
        axes[-1].legend(fontsize="small")
    return _save(fig, path)
