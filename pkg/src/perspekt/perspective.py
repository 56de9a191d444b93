"""Disc compactification of a leaf and estimation of points of perspective.

A leaf R^n is mapped into the open unit ball by x -> x / sqrt(1 + |x|^2);
boundary points are directions on S^{n-1}.  Points of perspective are the
boundary points an escaping lifted orbit accumulates on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .errors import DomainError
from .intlinalg import Direction

if TYPE_CHECKING:  # pragma: no cover
    from .flows import Trajectory

__all__ = [
    "DiscPoint",
    "PerspectiveEstimate",
    "compactify",
    "compactify_array",
    "decompactify",
    "estimate_perspective",
    "cluster_directions",
    "ESCAPE_THRESHOLD",
]

ESCAPE_THRESHOLD = 50.0


@dataclass(frozen=True)
class DiscPoint:
    """Point of the closed unit ball.

    ``weight`` is sqrt(1 - |u|^2) as computed when the point was produced by
    :func:`compactify`.  Near the boundary it cannot be recovered from ``u``
    in floating point, so it is carried along for an accurate inverse.
    """

    u: tuple[float, ...]
    boundary: bool = False
    weight: Optional[float] = None

    @classmethod
    def on_boundary(cls, v: Sequence[float]) -> "DiscPoint":
        v = np.asarray(v, dtype=float)
        return cls(tuple(v / np.linalg.norm(v)), True, 0.0)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.u))


def compactify_array(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Row-wise images u = x w and weights w = 1 / sqrt(1 + |x|^2)."""
    x = np.asarray(x, dtype=float)
    w = 1.0 / np.sqrt(1.0 + np.sum(x * x, axis=-1))
    return x * w[..., None], w


def compactify(x: Sequence[float]) -> DiscPoint:
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("cannot compactify a non-finite vector")
    u, w = compactify_array(x)
    return DiscPoint(tuple(float(v) for v in u), False, float(w))


def decompactify(u: DiscPoint) -> tuple[float, ...]:
    if u.boundary:
        raise DomainError("boundary points of the disc have no preimage in the leaf")
    w = u.weight
    if w is None:
        r = u.norm
        w = math.sqrt(max(0.0, (1.0 - r) * (1.0 + r)))
    if w <= 0.0:
        raise DomainError("point lies on the boundary sphere")
    return tuple(float(v) / w for v in u.u)


@dataclass(frozen=True)
class PerspectiveEstimate:
    """Candidate points of perspective found at a finite horizon."""

    directions: tuple[Direction, ...]
    confidences: tuple[float, ...]
    escaped: bool
    sizes: tuple[int, ...] = ()
    direction: str = "forward"

    def to_json(self) -> dict:
        return {
            "escaped": self.escaped,
            "direction": self.direction,
            "points": [
                {"direction": list(d.v), "spread": s, "samples": k}
                for d, s, k in zip(self.directions, self.confidences, self.sizes)
            ],
        }


class _UnionFind:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, i: int) -> int:
        while self.parent[i] != i:
            self.parent[i] = self.parent[self.parent[i]]
            i = self.parent[i]
        return i

    def union(self, i: int, j: int):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def cluster_directions(v: np.ndarray, angular_tol: float, workers: int = 1) -> np.ndarray:
    """Single-linkage labels for unit vectors, linking pairs closer than ``angular_tol``.

    Points are bucketed in cubes whose diameter equals the chord cutoff, so
    a cube is always internally linked; only nearby cubes need a distance test.
    """
    v = np.asarray(v, dtype=float)
    m, n = v.shape
    if m == 0:
        return np.zeros(0, dtype=int)
    chord = 2.0 * math.sin(min(angular_tol, math.pi) / 2.0)
    side = chord / math.sqrt(n)
    keys = np.floor(v / side).astype(np.int64)
    cells, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.reshape(-1)
    order = np.argsort(inverse, kind="stable")
    cuts = np.searchsorted(inverse[order], np.arange(len(cells) + 1))
    members = [order[cuts[c]:cuts[c + 1]] for c in range(len(cells))]
    trees = [cKDTree(v[idx]) for idx in members]
    lookup = {tuple(c): i for i, c in enumerate(cells.tolist())}
    reach = math.ceil(math.sqrt(n))
    offsets = np.array(np.meshgrid(*[np.arange(-reach, reach + 1)] * n, indexing="ij")).reshape(n, -1).T
    uf = _UnionFind(len(cells))
    for i, c in enumerate(cells):
        for off in offsets:
            j = lookup.get(tuple((c + off).tolist()))
            if j is None or j <= i or uf.find(i) == uf.find(j):
                continue
            dist, _ = trees[j].query(v[members[i]], k=1, distance_upper_bound=chord, workers=workers)
            if np.any(np.isfinite(dist)):
                uf.union(i, j)
    roots = np.array([uf.find(i) for i in range(len(cells))])
    _, labels = np.unique(roots, return_inverse=True)
    return labels.reshape(-1)[inverse]


def estimate_perspective(
    traj: "Trajectory",
    window_fraction: float = 0.2,
    angular_tol: float = 1e-2,
    direction: str = "forward",
    escape_threshold: float = ESCAPE_THRESHOLD,
    workers: int = 1,
) -> PerspectiveEstimate:
    """Cluster the directions of the far end of a lifted orbit.

    Forward uses the last ``window_fraction`` of the samples, backward the
    first.  Samples whose lift is shorter than ``escape_threshold`` are
    ignored; if none remain the orbit is reported as not escaping.
    """
    lifted = np.asarray(traj.lifted, dtype=float)
    m = len(lifted)
    if m < 100:
        raise DomainError(f"trajectory has {m} samples, at least 100 are needed")
    if not 0 < window_fraction <= 1:
        raise DomainError("window_fraction must lie in (0, 1]")
    if direction not in ("forward", "backward"):
        raise DomainError("direction must be 'forward' or 'backward'")
    width = max(1, math.ceil(window_fraction * m))
    window = lifted[m - width:] if direction == "forward" else lifted[:width]
    norms = np.linalg.norm(window, axis=1)
    far = window[norms >= escape_threshold]
    if len(far) == 0:
        return PerspectiveEstimate((), (), False, (), direction)
    unit = far / np.linalg.norm(far, axis=1)[:, None]
    labels = cluster_directions(unit, angular_tol, workers)
    found = []
    for lab in np.unique(labels):
        pts = unit[labels == lab]
        centre = pts.mean(axis=0)
        centre /= np.linalg.norm(centre)
        half_chord = np.arctan2(np.linalg.norm(pts - centre, axis=1), np.linalg.norm(pts + centre, axis=1))
        spread = float(2 * np.max(half_chord))
        found.append((len(pts), centre, spread))
    found.sort(key=lambda f: (-f[0], tuple(f[1])))
    return PerspectiveEstimate(
        tuple(Direction(tuple(c), projective=False) for _, c, _ in found),
        tuple(s for _, _, s in found),
        True,
        tuple(k for k, _, _ in found),
        direction,
    )
