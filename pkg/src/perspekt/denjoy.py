"""Denjoy circle homeomorphisms obtained by blowing up a rotation orbit.

The orbit point {n*alpha} of the rotation is replaced by a gap of length
c * lam**|n|.  Only gaps with |n| <= N are materialized; the rest of the
gap mass, tau(N) = 2 c lam**(N+1) / (1 - lam), bounds every position error.

Coordinates: ``x`` lives on the original circle, ``y`` on the blown-up one.
The Cantor part is y = F(x) = (1 - L) x + (mass of gaps left of x), where L
is the total gap mass, so the blown-up circle still has unit length.
"""

from __future__ import annotations

import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError
from .numberlab import as_quadratic

__all__ = [
    "DenjoyHomeo",
    "denjoy_build",
    "denjoy_apply",
    "denjoy_sigma",
    "denjoy_lift",
    "rotation_number_estimate",
]


def _check_irrational(alpha) -> float:
    q = as_quadratic(alpha)
    if q is not None:
        if q.is_rational:
            raise DomainError(f"rotation number {alpha} is rational")
        return float(q)
    a = float(alpha)
    if not math.isfinite(a):
        raise DomainError("rotation number must be finite")
    near = Fraction(a).limit_denominator(10**4)
    if abs(float(near) - a) < 1e-12:
        raise DomainError(f"rotation number {a} is numerically rational ({near})")
    return a


@dataclass(frozen=True, eq=False)
class DenjoyHomeo:
    alpha: object
    lam: float = 1 / 3
    c: float = 0.1
    N: int = 40
    tables: dict = field(default_factory=dict, repr=False)

    @property
    def exact(self) -> bool:
        """True when alpha, lam and c are all exact, so the tables are exact too."""
        return "exact" in self.tables

    @property
    def alpha_float(self) -> float:
        return float(self.alpha)

    @property
    def total_mass(self):
        return self.c * (1 + self.lam) / (1 - self.lam)

    @property
    def tail_bound(self):
        """tau(N): gap mass not materialized by the truncation."""
        return 2 * self.c * self.lam ** (self.N + 1) / (1 - self.lam)

    def gap_length(self, n: int) -> float:
        return self.c * self.lam ** abs(n)

    def gap(self, n: int) -> tuple[float, float]:
        """(left endpoint, length) of gap n on the blown-up circle."""
        k = self.tables["slot"][n]
        return float(self.tables["left"][k]), float(self.tables["length"][k])

    def orbit_point(self, n: int) -> float:
        """{n * alpha}, computed exactly when alpha is a quadratic irrational."""
        return float(_frac_multiple(self.alpha, n))

    def F(self, x):
        """Cantor-set point over x (the left limit at orbit points)."""
        t = self.tables
        if self.exact and as_quadratic(x) is not None:
            e = t["exact"]
            return (1 - self.total_mass) * x + e["mass_before"][bisect_left(e["x"], x)]
        x = np.asarray(x, dtype=float)
        idx = np.searchsorted(t["x"], x, side="left")
        out = (1 - float(self.total_mass)) * x + t["mass_before"][idx]
        return float(out) if out.ndim == 0 else out


def _frac_multiple(alpha, n: int):
    q = as_quadratic(alpha)
    if q is not None:
        return (q * n).frac()
    return (n * float(alpha)) % 1.0


def _floor_multiple(alpha, n: int) -> int:
    q = as_quadratic(alpha)
    if q is not None:
        return math.floor(q * n)
    return math.floor(n * float(alpha))


def denjoy_build(alpha, lam: float = 1 / 3, c: float = 0.1, N: int = 40) -> DenjoyHomeo:
    _check_irrational(alpha)
    if not 0 < lam < 1:
        raise DomainError("gap ratio lam must lie in (0, 1)")
    if c <= 0:
        raise DomainError("gap scale c must be positive")
    if N < 0:
        raise DomainError("truncation index N must be >= 0")
    exact = as_quadratic(alpha) is not None and all(_is_rational(v) for v in (lam, c))
    if exact:
        lam, c = Fraction(lam), Fraction(c)
    else:
        lam, c = float(lam), float(c)
    h = DenjoyHomeo(alpha, lam, c, int(N))
    mass = h.total_mass
    if mass >= 1:
        raise DomainError(f"total gap mass {float(mass):.6g} must be < 1")
    ns = list(range(-N, N + 1))
    fracs = {n: _frac_multiple(alpha, n) for n in ns + [N + 1]}
    ns.sort(key=lambda n: fracs[n])
    if not exact:
        fracs = {n: float(v) for n, v in fracs.items()}
    slot = {n: k for k, n in enumerate(ns)}
    xs = [fracs[n] for n in ns]
    lengths = [c * lam ** abs(n) for n in ns]
    mass_before = [lengths[0] * 0]
    for ell in lengths:
        mass_before.append(mass_before[-1] + ell)
    left = [(1 - mass) * x + m for x, m in zip(xs, mass_before)]
    # gap n maps onto gap n+1; {n alpha} + alpha wraps past 1 exactly floor((n+1)a) - floor(na) times
    wrap = [_floor_multiple(alpha, n + 1) - _floor_multiple(alpha, n) for n in ns]
    beyond = (1 - mass) * fracs[N + 1] + mass_before[bisect_left(xs, fracs[N + 1])]
    ratio = [lengths[slot[n + 1]] / lengths[k] if n + 1 in slot else 0 * lam for k, n in enumerate(ns)]
    target = [left[slot[n + 1]] if n + 1 in slot else beyond for n in ns]
    t = h.tables
    t["slot"] = slot
    t["n"] = np.array(ns)
    lists = dict(x=xs, left=left, length=lengths, mass_before=mass_before, wrap=wrap, ratio=ratio, target=target)
    if exact:
        t["exact"] = lists
    for key, values in lists.items():
        t[key] = np.array([float(v) for v in values])
    # python lists for the scalar float path used by long iterations
    t["py"] = {key: t[key].tolist() for key in lists}
    return h


def _is_rational(v) -> bool:
    return isinstance(v, (int, Fraction)) and not isinstance(v, bool)


def _locate(h: DenjoyHomeo, y: np.ndarray):
    """Index of the gap containing each y (or -1) and of the last gap starting at or before y."""
    t = h.tables
    k = np.searchsorted(t["left"], y, side="right") - 1
    kk = np.clip(k, 0, len(t["left"]) - 1)
    inside = (k >= 0) & (y <= t["left"][kk] + t["length"][kk])
    return np.where(inside, kk, -1), k


def _sigma_scalar(h: DenjoyHomeo, y, t):
    y = y - math.floor(y)
    k = bisect_right(t["left"], y) - 1
    if k >= 0 and y <= t["left"][k] + t["length"][k]:
        return t["x"][k]
    return (y - t["mass_before"][k + 1]) / _cantor_scale(h, t)


def _cantor_scale(h: DenjoyHomeo, t):
    return 1 - h.total_mass if t is h.tables.get("exact") else 1 - float(h.total_mass)


def _exact_scalar(h: DenjoyHomeo, y) -> bool:
    return h.exact and as_quadratic(y) is not None


def denjoy_sigma(h: DenjoyHomeo, y):
    """Collapse each gap to its orbit point; inverse of F on the Cantor part.

    Exact scalars (Fraction or QuadraticIrrational) on an exact homeomorphism
    are mapped exactly.
    """
    if _exact_scalar(h, y):
        return _sigma_scalar(h, y, h.tables["exact"])
    t = h.tables
    y = np.mod(np.asarray(y, dtype=float), 1.0)
    gap, k = _locate(h, y)
    cantor = (y - t["mass_before"][k + 1]) / (1 - float(h.total_mass))
    out = np.where(gap >= 0, t["x"][np.maximum(gap, 0)], cantor)
    out = np.clip(out, 0.0, np.nextafter(1.0, 0.0))
    return float(out) if out.ndim == 0 else out


def denjoy_lift(h: DenjoyHomeo, y):
    """Degree-one lift H of the homeomorphism: H(y + 1) = H(y) + 1."""
    if _exact_scalar(h, y):
        return _lift_scalar(h, y, h.tables["exact"])
    t = h.tables
    y = np.asarray(y, dtype=float)
    whole = np.floor(y)
    frac = y - whole
    gap, k = _locate(h, frac)
    # Cantor part: F(sigma(y) + alpha), lifted
    shifted = (frac - t["mass_before"][k + 1]) / (1 - float(h.total_mass)) + h.alpha_float
    cantor = np.floor(shifted) + h.F(np.mod(shifted, 1.0))
    # gap part: affine onto the next gap (degenerate past the truncation)
    g = np.maximum(gap, 0)
    gap_img = t["wrap"][g] + t["target"][g] + (frac - t["left"][g]) * t["ratio"][g]
    out = whole + np.where(gap >= 0, gap_img, cantor)
    return float(out) if out.ndim == 0 else out


def _lift_scalar(h: DenjoyHomeo, y, t=None):
    """H(y) for one point; with the exact tables every step is exact."""
    t = t or h.tables["py"]
    whole = math.floor(y)
    f = y - whole
    k = bisect_right(t["left"], f) - 1
    if k >= 0 and f <= t["left"][k] + t["length"][k]:
        return whole + t["wrap"][k] + t["target"][k] + (f - t["left"][k]) * t["ratio"][k]
    alpha = h.alpha if t is h.tables.get("exact") else h.alpha_float
    scale = _cantor_scale(h, t)
    s = (f - t["mass_before"][k + 1]) / scale + alpha
    w = math.floor(s)
    fs = s - w
    return whole + w + scale * fs + t["mass_before"][bisect_left(t["x"], fs)]


def denjoy_apply(h: DenjoyHomeo, y, return_flags: bool = False):
    """The homeomorphism on the blown-up circle, values in [0, 1).

    With ``return_flags`` also returns a mask of inputs within tau(N) of a
    gap boundary, where gap membership is numerically ambiguous.
    """
    if _exact_scalar(h, y) and not return_flags:
        out = _lift_scalar(h, y, h.tables["exact"])
        return out - math.floor(out)
    y = np.mod(np.asarray(y, dtype=float), 1.0)
    out = np.mod(denjoy_lift(h, y), 1.0)
    out = np.where(out >= 1.0, 0.0, out)
    if not return_flags:
        return float(out) if out.ndim == 0 else out
    t = h.tables
    tau = float(h.tail_bound)
    k = np.clip(np.searchsorted(t["left"], y, side="right") - 1, 0, len(t["left"]) - 1)
    kn = np.clip(k + 1, 0, len(t["left"]) - 1)
    right = t["left"][k] + t["length"][k]
    near = (np.abs(y - t["left"][k]) < tau) | (np.abs(y - right) < tau) | (np.abs(t["left"][kn] - y) < tau)
    if out.ndim == 0:
        return float(out), bool(near)
    return out, near


def rotation_number_estimate(h: DenjoyHomeo, iterations: int, y0: float = 0.0) -> float:
    """(H^k(y0) - y0) / k for the degree-one lift H."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    y = float(y0)
    for _ in range(iterations):
        y = _lift_scalar(h, y)
    return (y - y0) / iterations
