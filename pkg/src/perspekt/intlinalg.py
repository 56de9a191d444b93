"""Integer matrices, exact rational inverses and the induced sphere action."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DomainError

__all__ = [
    "IntMatrix",
    "Direction",
    "det",
    "inverse_rational",
    "hat_action",
    "unimodular_completion",
    "ANGLE_TOL",
]

ANGLE_TOL = 1e-9
_ZERO_COORD = 1e-12


@dataclass(frozen=True)
class IntMatrix:
    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        rows = tuple(tuple(int(e) for e in row) for row in self.rows)
        n = len(rows)
        if n == 0 or any(len(row) != n for row in rows):
            raise ValueError("IntMatrix must be square and nonempty")
        for row, src in zip(rows, self.rows):
            for e, s in zip(row, src):
                if e != s:
                    raise ValueError(f"non-integer entry {s!r}")
        object.__setattr__(self, "rows", rows)

    @classmethod
    def of(cls, rows: Sequence[Sequence[int]]) -> "IntMatrix":
        return cls(tuple(tuple(r) for r in rows))

    @classmethod
    def identity(cls, n: int) -> "IntMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(n)) for i in range(n)))

    @classmethod
    def scalar(cls, n: int, k: int) -> "IntMatrix":
        return cls(tuple(tuple(k * int(i == j) for j in range(n)) for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __matmul__(self, other):
        if isinstance(other, IntMatrix):
            cols = list(zip(*other.rows))
            return IntMatrix(tuple(tuple(sum(a * b for a, b in zip(r, c)) for c in cols) for r in self.rows))
        return tuple(sum(a * x for a, x in zip(r, other)) for r in self.rows)

    def __neg__(self):
        return IntMatrix(tuple(tuple(-e for e in r) for r in self.rows))

    def det(self) -> int:
        return det(self)

    def inverse(self) -> tuple[tuple[Fraction, ...], ...]:
        return inverse_rational(self)

    def to_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float)

    def to_list(self) -> list[list[int]]:
        return [list(r) for r in self.rows]


def det(m: IntMatrix) -> int:
    """Exact determinant by Bareiss fraction-free elimination."""
    a = [list(r) for r in m.rows]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def inverse_rational(m: IntMatrix) -> tuple[tuple[Fraction, ...], ...]:
    """Exact inverse over Q by Gauss-Jordan elimination."""
    n = m.n
    aug = [[Fraction(e) for e in row] + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(m.rows)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if pivot is None:
            raise DomainError("matrix is singular")
        aug[col], aug[pivot] = aug[pivot], aug[col]
        pv = aug[col][col]
        aug[col] = [e / pv for e in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [e - f * p for e, p in zip(aug[r], aug[col])]
    return tuple(tuple(row[n:]) for row in aug)


@dataclass(frozen=True)
class Direction:
    """Unit vector on S^{n-1}; in projective mode v and -v are the same point."""

    v: tuple[float, ...]
    projective: bool = True

    def __post_init__(self):
        v = np.asarray(self.v, dtype=float)
        norm = float(np.linalg.norm(v))
        if not math.isfinite(norm) or norm == 0.0:
            raise DomainError("direction needs a finite nonzero vector")
        v = v / norm
        if self.projective:
            lead = next((x for x in v if abs(x) > _ZERO_COORD), 0.0)
            if lead < 0:
                v = -v
        object.__setattr__(self, "v", tuple(float(x) for x in v))

    @property
    def n(self) -> int:
        return len(self.v)

    def as_array(self) -> np.ndarray:
        return np.array(self.v)

    def angle_to(self, other: "Direction") -> float:
        a, b = self.as_array(), np.asarray(other.v if isinstance(other, Direction) else other, float)
        b = b / np.linalg.norm(b)
        if self.projective and float(np.dot(a, b)) < 0:
            b = -b
        # half-chord form stays accurate for nearly (anti)parallel vectors
        return 2.0 * math.atan2(float(np.linalg.norm(a - b)), float(np.linalg.norm(a + b)))

    def close_to(self, other: "Direction", tol: float = ANGLE_TOL) -> bool:
        return self.angle_to(other) <= tol


def hat_action(a: IntMatrix, x: Direction) -> Direction:
    """A x / |A x|, canonicalized when ``x`` is projective."""
    y = a.to_array() @ x.as_array()
    return Direction(tuple(y), x.projective)


def unimodular_completion(v: Sequence[int]) -> IntMatrix:
    """A det-1 integer matrix whose first column is the primitive vector ``v``."""
    a, b = (int(x) for x in v)
    g, s, t = _ext_gcd(a, b)
    if abs(g) != 1:
        raise DomainError(f"{tuple(v)} is not primitive")
    # a*s + b*t = g = +-1 ; columns (a, b) and (-t*g, s*g) give det = g*g = 1
    return IntMatrix(((a, -t * g), (b, s * g)))


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    if b == 0:
        return (a, 1, 0) if a >= 0 else (-a, -1, 0)
    g, s, t = _ext_gcd(b, a % b)
    return g, t, s - (a // b) * t
