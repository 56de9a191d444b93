"""Depth-k truncations of the n-solenoid defined by a sequence of integer matrices.

A point is a tuple of torus coordinates x_1, ..., x_k with
M_j x_{j+1} = x_j (mod 1).  Exact mode stores Fractions, float mode stores
floats; the two never mix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import DomainError, ResourceError
from .intlinalg import IntMatrix, det, inverse_rational

__all__ = [
    "SolenoidSpec",
    "SolenoidPoint",
    "covering_point",
    "add_points",
    "identity_point",
    "fiber_enumerate",
    "fiber_size",
    "validate_point",
    "decompose",
    "random_point",
    "random_spec",
    "torus_spec",
    "FIBER_CAP",
]

FIBER_CAP = 10**6


@dataclass(frozen=True)
class SolenoidSpec:
    """Bonding matrices M_1, M_2, ... truncated at ``depth`` stages.

    With ``repeat`` the supplied matrices cycle forever, so the classical
    p-adic solenoid is ``SolenoidSpec(2, (2*I,), True, k)``.
    """

    n: int
    matrices: tuple[IntMatrix, ...]
    repeat: bool = True
    depth: int = 1

    def __post_init__(self):
        if self.n < 2:
            raise DomainError("solenoid dimension must be >= 2")
        if self.depth < 1:
            raise DomainError("depth must be >= 1")
        mats = tuple(m if isinstance(m, IntMatrix) else IntMatrix.of(m) for m in self.matrices)
        object.__setattr__(self, "matrices", mats)
        for m in mats:
            if m.n != self.n:
                raise DomainError(f"matrix of size {m.n} in a dimension-{self.n} solenoid")
            if det(m) == 0:
                raise DomainError(f"bonding matrix {m.to_list()} is singular")
        if self.depth > 1 and not mats:
            raise DomainError("depth > 1 needs at least one bonding matrix")
        if not self.repeat and len(mats) < self.depth - 1:
            raise DomainError(f"depth {self.depth} needs {self.depth - 1} matrices, got {len(mats)}")

    def matrix(self, j: int) -> IntMatrix:
        """Bonding matrix M_j (1-based), mapping stage j+1 onto stage j."""
        if j < 1:
            raise IndexError(j)
        if self.repeat:
            return self.matrices[(j - 1) % len(self.matrices)]
        return self.matrices[j - 1]

    def bonding(self) -> list[IntMatrix]:
        return [self.matrix(j) for j in range(1, self.depth)]

    def with_depth(self, depth: int) -> "SolenoidSpec":
        return SolenoidSpec(self.n, self.matrices, self.repeat, depth)

    @classmethod
    def from_json(cls, data: dict) -> "SolenoidSpec":
        return cls(
            int(data["n"]),
            tuple(IntMatrix.of(m) for m in data.get("matrices", [])),
            bool(data.get("repeat", True)),
            int(data.get("depth", 1)),
        )

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "matrices": [m.to_list() for m in self.matrices],
            "repeat": self.repeat,
            "depth": self.depth,
        }


def torus_spec(n: int = 2) -> SolenoidSpec:
    """The torus T^n itself: identity bonding, one stage."""
    return SolenoidSpec(n, (IntMatrix.identity(n),), True, 1)


@dataclass(frozen=True)
class SolenoidPoint:
    spec: SolenoidSpec
    coords: tuple[tuple, ...]
    exact: bool

    def __post_init__(self):
        if len(self.coords) != self.spec.depth:
            raise DomainError(f"point has {len(self.coords)} stages, spec depth is {self.spec.depth}")

    def stage(self, j: int) -> tuple:
        return self.coords[j - 1]

    def __add__(self, other):
        return add_points(self, other)

    def __neg__(self):
        return SolenoidPoint(self.spec, tuple(tuple(_mod1(-x) for x in c) for c in self.coords), self.exact)

    def __sub__(self, other):
        return add_points(self, -other)

    def as_float(self) -> "SolenoidPoint":
        return SolenoidPoint(self.spec, tuple(tuple(float(x) for x in c) for c in self.coords), False)


def _mod1(x):
    if isinstance(x, Fraction):
        return x - math.floor(x)
    y = float(x) % 1.0
    return 0.0 if y >= 1.0 else y


@lru_cache(maxsize=256)
def _inverse(m: IntMatrix):
    inv = inverse_rational(m)
    return inv, np.array([[float(e) for e in row] for row in inv])


def _is_exact(s) -> bool:
    return all(isinstance(x, (int, Fraction, np.integer)) and not isinstance(x, bool) for x in s)


def covering_point(spec: SolenoidSpec, s: Sequence) -> SolenoidPoint:
    """pi_M(s): stage j holds M_{j-1}^{-1} ... M_1^{-1} s reduced mod 1."""
    if len(s) != spec.n:
        raise DomainError(f"vector of length {len(s)} for a dimension-{spec.n} solenoid")
    exact = _is_exact(s)
    if exact:
        y = tuple(Fraction(x) for x in s)
    else:
        y = np.asarray(s, dtype=float)
        if not np.all(np.isfinite(y)):
            raise DomainError("non-finite coordinate")
    coords = [tuple(_mod1(x) for x in y)]
    for m in spec.bonding():
        inv, finv = _inverse(m)
        if exact:
            y = tuple(sum(a * b for a, b in zip(row, y)) for row in inv)
        else:
            y = finv @ y
        coords.append(tuple(_mod1(x) for x in y))
    return SolenoidPoint(spec, tuple(coords), exact)


def identity_point(spec: SolenoidSpec, exact: bool = True) -> SolenoidPoint:
    z = Fraction(0) if exact else 0.0
    return SolenoidPoint(spec, tuple((z,) * spec.n for _ in range(spec.depth)), exact)


def add_points(a: SolenoidPoint, b: SolenoidPoint) -> SolenoidPoint:
    if a.spec != b.spec:
        raise DomainError("points belong to different solenoid specs")
    if a.exact != b.exact:
        raise DomainError("cannot mix exact and float points")
    coords = tuple(tuple(_mod1(x + y) for x, y in zip(ca, cb)) for ca, cb in zip(a.coords, b.coords))
    return SolenoidPoint(a.spec, coords, a.exact)


def _circle_gap(x):
    """Signed distance from x to the nearest integer."""
    return x - round(x)


def validate_point(p: SolenoidPoint) -> tuple[bool, float]:
    """(consistent, max bonding defect) with the Euclidean torus metric per stage.

    Exact points must have defect exactly zero; float points pass below 1e-9.
    """
    worst, all_zero = 0.0, True
    for j, m in enumerate(p.spec.bonding(), start=1):
        image = m @ p.coords[j]
        gaps = [_circle_gap(u - x) for u, x in zip(image, p.coords[j - 1])]
        all_zero = all_zero and all(g == 0 for g in gaps)
        worst = max(worst, math.sqrt(sum(float(g) ** 2 for g in gaps)))
    if p.exact:
        return all_zero, worst
    return worst < 1e-9, worst


def _kernel(m: IntMatrix) -> list[tuple[Fraction, ...]]:
    """The subgroup {M^{-1} z mod 1 : z in Z^n} of the torus, |det M| elements."""
    inv, _ = _inverse(m)
    n = m.n
    gens = [tuple(_mod1(inv[i][j]) for i in range(n)) for j in range(n)]
    zero = (Fraction(0),) * n
    seen = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = tuple(_mod1(a + b) for a, b in zip(x, g))
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return sorted(seen)


def fiber_size(spec: SolenoidSpec) -> int:
    return math.prod(abs(det(m)) for m in spec.bonding())


def fiber_enumerate(spec: SolenoidSpec, cap: int = FIBER_CAP) -> list[SolenoidPoint]:
    """All depth-k points lying over the identity of the first stage.

    Each stage-j solution is extended by its |det M_j| preimages under the
    bonding map; the result is sorted lexicographically by coordinates.
    """
    size = fiber_size(spec)
    if size > cap:
        raise ResourceError(f"fiber has {size} elements, cap is {cap}")
    zero = (Fraction(0),) * spec.n
    partial = [(zero,)]
    for m in spec.bonding():
        inv, _ = _inverse(m)
        ker = _kernel(m)
        extended = []
        for coords in partial:
            base = tuple(sum(a * b for a, b in zip(row, coords[-1])) for row in inv)
            for k in ker:
                extended.append(coords + (tuple(_mod1(b + x) for b, x in zip(base, k)),))
        partial = extended
    partial.sort()
    return [SolenoidPoint(spec, c, True) for c in partial]


def decompose(p: SolenoidPoint) -> tuple[tuple, SolenoidPoint]:
    """Write p = pi_M(s) + c with s in [0,1)^n and c in the first-stage fiber."""
    s = p.coords[0]
    c = p - covering_point(p.spec, s if p.exact else tuple(float(x) for x in s))
    return s, c


def random_point(spec: SolenoidSpec, rng: np.random.Generator, denominator: int = 97) -> SolenoidPoint:
    """Random exact point: a random rational top stage pushed down the bonding maps."""
    top = tuple(Fraction(int(rng.integers(0, denominator)), denominator) for _ in range(spec.n))
    coords = [top]
    for j in range(spec.depth - 1, 0, -1):
        coords.append(tuple(_mod1(x) for x in spec.matrix(j) @ coords[-1]))
    return SolenoidPoint(spec, tuple(reversed(coords)), True)


def random_spec(rng: np.random.Generator, n: int = 2, depth: int = 8, max_entry: int = 3) -> SolenoidSpec:
    """Spec with independent random bonding matrices, entries in [-max_entry, max_entry]."""
    mats = []
    while len(mats) < depth - 1:
        m = IntMatrix.of(rng.integers(-max_entry, max_entry + 1, size=(n, n)).tolist())
        if det(m) != 0:
            mats.append(m)
    return SolenoidSpec(n, tuple(mats) or (IntMatrix.identity(n),), False if mats else True, depth)

