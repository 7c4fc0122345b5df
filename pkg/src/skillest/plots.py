"""SVG plot emission (deterministic output).

Matplotlib SVG backends embed a creation date and salt their element ids;
both are pinned here so that identical inputs always render byte-identical
files, which the CLI determinism contract relies on.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .baseball import Ellipse

_SVG_METADATA = {"Date": None, "Creator": None}


def _new_figure():
    plt.rcParams["svg.hashsalt"] = "skillest"
    return plt.subplots(figsize=(7.0, 4.5))


def _save(fig, path: str | Path) -> None:
    fig.savefig(path, format="svg", metadata=_SVG_METADATA)
    plt.close(fig)


def plot_jd_curves(
    curves: dict[str, tuple[np.ndarray, np.ndarray]],
    path: str | Path,
    title: str = "Mean Jeffreys divergence per observation",
) -> None:
    """Line plot of mean JD vs observation index, one series per label.

    Values are plotted as-is (no smoothing), so the rendered endpoints
    equal the first/last means of the underlying data.
    """
    fig, ax = _new_figure()
    for label in sorted(curves):
        idx, means = curves[label]
        ax.plot(idx, means, label=label)
    ax.set_xlabel("observation")
    ax.set_ylabel("mean JD (nats)")
    ax.set_title(title)
    ax.legend()
    ax.grid(True, linestyle=":", alpha=0.5)
    _save(fig, path)


def plot_ellipses(
    ellipses: list[tuple[str, Ellipse]],
    path: str | Path,
    zone_bounds: tuple[float, float, float, float] | None = None,
    title: str = "50% confidence ellipses",
) -> None:
    """Draw labeled confidence ellipses, optionally with a zone rectangle."""
    from matplotlib import patches

    fig, ax = _new_figure()
    for i, (label, ell) in enumerate(ellipses):
        color = f"C{i % 10}"
        patch = patches.Ellipse(
            ell.center,
            width=2 * ell.semi_major,
            height=2 * ell.semi_minor,
            angle=np.degrees(ell.angle_rad),
            fill=False,
            color=color,
            label=label,
        )
        ax.add_patch(patch)
        ax.plot([ell.center[0]], [ell.center[1]], marker="+", color=color)
    if zone_bounds is not None:
        x0, x1, z0, z1 = zone_bounds
        ax.add_patch(
            patches.Rectangle(
                (x0, z0), x1 - x0, z1 - z0, fill=False, linestyle="--", color="black"
            )
        )
    # Fit the view to every ellipse (and the zone) explicitly; patch extents
    # are not part of matplotlib's autoscale data limits.
    xs, ys = [], []
    for _, ell in ellipses:
        r = max(ell.semi_major, ell.semi_minor)
        xs += [ell.center[0] - r, ell.center[0] + r]
        ys += [ell.center[1] - r, ell.center[1] + r]
    if zone_bounds is not None:
        xs += [zone_bounds[0], zone_bounds[1]]
        ys += [zone_bounds[2], zone_bounds[3]]
    if xs:
        pad_x = 0.05 * (max(xs) - min(xs)) + 1e-6
        pad_y = 0.05 * (max(ys) - min(ys)) + 1e-6
        ax.set_xlim(min(xs) - pad_x, max(xs) + pad_x)
        ax.set_ylim(min(ys) - pad_y, max(ys) + pad_y)
    ax.set_aspect("equal")
    ax.set_title(title)
    ax.legend(loc="upper right", fontsize=8)
    _save(fig, path)
