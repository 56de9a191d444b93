"""Plain SVG 1.1 rendering of orbits in the compactified plane.

Output is byte-stable: fixed element order, six-decimal coordinates and
no timestamps, so figures can be compared as golden files.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import UnsupportedError
from .perspective import compactify_array

__all__ = ["render_disc_svg", "GRID_STEP"]

GRID_STEP = 0.05
GRID_LINES = 4  # integer lines x = k, y = k for |k| <= GRID_LINES
GRID_REACH = 25.0  # each grid line is drawn for |t| <= GRID_REACH
COLORS = ("#c0392b", "#2874a6", "#1e8449", "#7d3c98", "#b9770e")


def _fmt(x: float) -> str:
    s = f"{x:.6f}"
    return "0.000000" if s == "-0.000000" else s


def _points(u: np.ndarray) -> str:
    # SVG's y axis points down; flip so the picture has the usual orientation
    return " ".join(f"{_fmt(x)},{_fmt(-y)}" for x, y in u)


def _grid_paths() -> list[str]:
    t = np.round(np.arange(-GRID_REACH, GRID_REACH + GRID_STEP / 2, GRID_STEP), 10)
    paths = []
    for k in range(-GRID_LINES, GRID_LINES + 1):
        const = np.full_like(t, float(k))
        for line in (np.column_stack([const, t]), np.column_stack([t, const])):
            u, _ = compactify_array(line)
            paths.append(f'<polyline class="grid" points="{_points(u)}"/>')
    return paths


def render_disc_svg(trajectories: Sequence, spec=None, grid: bool = True, max_points: int = 4000) -> str:
    """SVG document with the unit circle, optional grid and one polyline per orbit.

    Orbits are drawn from their disc samples, thinned by a fixed stride to
    at most ``max_points`` vertices (the last sample is always kept).
    """
    n = spec.n if spec is not None else 2
    for traj in trajectories:
        n = traj.disc.shape[1] if traj.disc.ndim == 2 else n
        if n != 2:
            break
    if n != 2:
        raise UnsupportedError("disc rendering is available for n = 2 only")
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="600" height="600" viewBox="-1.05 -1.05 2.1 2.1">',
        "<style>.grid{fill:none;stroke:#b0b0b0;stroke-width:0.002}"
        ".orbit{fill:none;stroke-width:0.004}</style>",
        '<circle cx="0" cy="0" r="1" fill="none" stroke="#000000" stroke-width="0.004"/>',
    ]
    if grid:
        out.append('<g id="grid">')
        out.extend(_grid_paths())
        out.append("</g>")
    for i, traj in enumerate(trajectories):
        u = np.asarray(traj.disc, dtype=float)
        stride = max(1, -(-len(u) // max_points))
        idx = np.arange(0, len(u), stride)
        if idx[-1] != len(u) - 1:
            idx = np.append(idx, len(u) - 1)
        color = COLORS[i % len(COLORS)]
        out.append(f'<polyline class="orbit" id="orbit{i}" stroke="{color}" points="{_points(u[idx])}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
