"""Rotation classes: orbits of points of perspective under automorphism matrices.

On T^2 the automorphisms are all of GL(2, Z), which acts on slopes
s = x2/x1 by Mobius maps; a direction matrix ((d, c), (b, a)) sends slope s
to (a s + b)/(c s + d).  Equality of classes of linear toral flows is then
decided exactly by continued fractions.  For other generator sets only a
bounded word search is available, which can confirm but never refute.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import DomainError, ResourceError
from .intlinalg import ANGLE_TOL, Direction, IntMatrix, det, hat_action, inverse_rational, unimodular_completion
from .numberlab import (
    Mobius,
    QuadraticIrrational,
    as_quadratic,
    cf_quadratic_exact,
    common_tail,
    gl2z_brute_witness,
    gl2z_witness,
    mobius_apply,
)

__all__ = [
    "RotationClassDescriptor",
    "EquivalenceVerdict",
    "rotation_class_of_linear_torus",
    "rotation_class_from_estimate",
    "rotclass_equal_torus",
    "rotclass_equal_bounded",
    "orbit_enumerate",
    "matrix_of_mobius",
    "mobius_of_matrix",
    "ORBIT_CAP",
    "INEXACT_BOUND",
]

ORBIT_CAP = 10**5
INEXACT_BOUND = 15


@dataclass(frozen=True)
class RotationClassDescriptor:
    """Base points of perspective plus the automorphism matrices acting on them.

    An empty generator list on a 2-dimensional descriptor means all of
    GL(2, Z).  ``exact_slope`` is x2/x1 of the single base point, or x1/x2
    when ``slope_swapped`` (used for the vertical direction).
    """

    base_points: tuple[Direction, ...]
    generators: tuple[IntMatrix, ...] = ()
    exact_slope: Optional[QuadraticIrrational] = None
    slope_swapped: bool = False

    def __post_init__(self):
        if not self.base_points:
            raise DomainError("a rotation class needs at least one base point")
        for g in self.generators:
            if det(g) == 0:
                raise DomainError(f"generator {g.to_list()} is not invertible")

    @property
    def n(self) -> int:
        return self.base_points[0].n

    def exact_vector(self) -> Optional[tuple]:
        """Exact representative (x1, x2) of the base direction, if known."""
        if self.exact_slope is None:
            return None
        one = QuadraticIrrational(1)
        return (self.exact_slope, one) if self.slope_swapped else (one, self.exact_slope)


@dataclass(frozen=True)
class EquivalenceVerdict:
    status: str
    witness: Optional[IntMatrix] = None
    word: Optional[tuple] = None
    certificate: dict = field(default_factory=dict)
    bound: Optional[int] = None

    def __post_init__(self):
        if self.status not in ("equivalent", "not_equivalent", "unknown"):
            raise ValueError(f"bad verdict status {self.status!r}")

    def __bool__(self):
        return self.status == "equivalent"

    def to_json(self) -> dict:
        out = {"status": self.status}
        if self.witness is not None:
            out["witness"] = self.witness.to_list()
        if self.word is not None:
            out["word"] = [list(w) for w in self.word]
        if self.certificate:
            out["certificate"] = self.certificate
        if self.bound is not None:
            out["bound"] = self.bound
        return out


def matrix_of_mobius(m: Mobius) -> IntMatrix:
    """Direction matrix whose action on slopes is the Mobius map m."""
    a, b, c, d = m.as_tuple()
    return IntMatrix(((d, c), (b, a)))


def mobius_of_matrix(w: IntMatrix) -> Mobius:
    (d, c), (b, a) = w.rows
    return Mobius(a, b, c, d)


def _exact(x):
    return as_quadratic(x)


def rotation_class_of_linear_torus(omega: Sequence, exact_slope=None) -> RotationClassDescriptor:
    """Descriptor of the linear flow with velocity ``omega`` on T^2.

    The slope is taken from ``exact_slope`` when given, otherwise derived
    from ``omega`` if both entries are exact.  Vertical velocities record
    the swapped slope 0.
    """
    if len(omega) != 2:
        raise DomainError("linear torus classes are 2-dimensional")
    if all(float(w) == 0 for w in omega):
        raise DomainError("velocity must be nonzero")
    base = Direction(tuple(float(w) for w in omega))
    swapped = float(omega[0]) == 0
    if exact_slope is not None:
        slope = _exact(exact_slope)
        if slope is None:
            raise DomainError("exact_slope must be rational or a quadratic irrational")
        expected = float(omega[0]) / float(omega[1]) if swapped else float(omega[1]) / float(omega[0])
        if not math.isclose(float(slope), expected, rel_tol=1e-9, abs_tol=1e-12):
            raise DomainError(f"exact slope {slope} does not match velocity {tuple(omega)}")
    else:
        w1, w2 = (_exact(w) for w in omega)
        slope = None
        if w1 is not None and w2 is not None:
            try:
                slope = w1 / w2 if swapped else w2 / w1
            except DomainError:
                slope = None  # entries from different quadratic fields
    return RotationClassDescriptor((base,), (), slope, swapped)


def rotation_class_from_estimate(estimate, generators: Sequence[IntMatrix] = ()) -> RotationClassDescriptor:
    """Descriptor whose base points are the estimated points of perspective."""
    if not estimate.directions:
        raise DomainError("the orbit did not escape; no points of perspective to classify")
    dirs = tuple(Direction(d.v, projective=True) for d in estimate.directions)
    return RotationClassDescriptor(dirs, tuple(generators))


def _primitive(vec) -> tuple[int, int]:
    """Primitive integer vector along an exact rational direction, first nonzero entry positive."""
    fr = [x.as_fraction() for x in vec]
    den = math.lcm(*(f.denominator for f in fr))
    ints = [int(f * den) for f in fr]
    g = math.gcd(*ints)
    ints = [i // g for i in ints]
    lead = next(i for i in ints if i)
    return tuple(i if lead > 0 else -i for i in ints)


def _verify(w: IntMatrix, a: RotationClassDescriptor, b: RotationClassDescriptor) -> bool:
    return hat_action(w, a.base_points[0]).close_to(b.base_points[0], ANGLE_TOL)


def _rational_witness(a: RotationClassDescriptor, b: RotationClassDescriptor) -> IntMatrix:
    """Unimodular W with W v_a = v_b for primitive integer directions (Euclid)."""
    va, vb = _primitive(a.exact_vector()), _primitive(b.exact_vector())
    ua, ub = unimodular_completion(va), unimodular_completion(vb)
    inv = inverse_rational(ua)
    w = IntMatrix(tuple(tuple(int(sum(x * y for x, y in zip(row, col))) for col in zip(*inv)) for row in ub.rows))
    if w @ va != vb:  # pragma: no cover - guarded by construction
        raise AssertionError("rational witness failed to verify")
    return w


def rotclass_equal_torus(a: RotationClassDescriptor, b: RotationClassDescriptor) -> EquivalenceVerdict:
    """Decide whether two linear toral flows have the same rotation class."""
    if a.n != 2 or b.n != 2:
        raise DomainError("torus decision needs 2-dimensional descriptors")
    if len(a.base_points) != 1 or len(b.base_points) != 1:
        raise DomainError("torus decision needs single-point descriptors")
    if a.exact_slope is None or b.exact_slope is None:
        return _inexact_torus(a, b)
    ra, rb = a.exact_slope.is_rational, b.exact_slope.is_rational
    if ra and rb:
        w = _rational_witness(a, b)
        return EquivalenceVerdict("equivalent", w, certificate={"rule": "rational directions"})
    if ra != rb:
        which = "a" if ra else "b"
        return EquivalenceVerdict("not_equivalent", certificate={"rational": which})
    sa, sb = a.exact_slope, b.exact_slope
    match = common_tail(cf_quadratic_exact(sa), cf_quadratic_exact(sb))
    if not match:
        return EquivalenceVerdict(
            "not_equivalent",
            certificate={"period_a": list(match.period_u), "period_b": list(match.period_v)},
        )
    m = gl2z_witness(sa, sb)
    if m is None or mobius_apply(m, sa) != sb:  # pragma: no cover - tails agreed
        raise AssertionError("equivalent slopes without a verified witness")
    # the exact slope identity above is the verification; a float check of
    # the direction action would lose precision for large witnesses
    w = matrix_of_mobius(m)
    return EquivalenceVerdict("equivalent", w, certificate={"period": list(match.period_u)})


def _float_slope(d: Direction) -> Optional[float]:
    x1, x2 = d.v
    return None if abs(x1) < 1e-12 else x2 / x1


def _inexact_torus(a, b, bound: int = INEXACT_BOUND) -> EquivalenceVerdict:
    sa, sb = _float_slope(a.base_points[0]), _float_slope(b.base_points[0])
    if sa is not None and sb is not None:
        m = gl2z_brute_witness(sa, sb, bound)
        if m is not None:
            w = matrix_of_mobius(m)
            if _verify(w, a, b):
                return EquivalenceVerdict("equivalent", w, bound=bound)
    return EquivalenceVerdict("unknown", bound=bound)


# -- bounded orbit search -----------------------------------------------------


def _letters(generators: Sequence[IntMatrix]):
    """(label, float matrix, exact matrix or None) for every generator and inverse."""
    out = []
    for i, g in enumerate(generators):
        out.append(((i, 1), g.to_array(), g))
        inv = inverse_rational(g)
        exact_inv = None
        if all(x.denominator == 1 for row in inv for x in row):
            exact_inv = IntMatrix(tuple(tuple(int(x) for x in row) for row in inv))
        out.append(((i, -1), np.array([[float(x) for x in row] for row in inv]), exact_inv))
    return out


class _DirectionSet:
    """Directions deduplicated at an angular tolerance via a coarse grid."""

    RES = 1e-7

    def __init__(self, n: int, tol: float):
        self.tol = tol
        self.cells: dict = {}
        self.items: list[Direction] = []
        self.offsets = list(itertools.product((-1, 0, 1), repeat=n))

    def _key(self, d: Direction):
        return tuple(int(math.floor(x / self.RES)) for x in d.v)

    def find(self, d: Direction) -> Optional[int]:
        key = self._key(d)
        for off in self.offsets:
            for i in self.cells.get(tuple(k + o for k, o in zip(key, off)), ()):
                if self.items[i].angle_to(d) <= self.tol:
                    return i
        return None

    def add(self, d: Direction) -> bool:
        if self.find(d) is not None:
            return False
        self.cells.setdefault(self._key(d), []).append(len(self.items))
        self.items.append(d)
        return True


def orbit_enumerate(
    base: Sequence[Direction],
    generators: Sequence[IntMatrix],
    max_word_length: int,
    cap: int = ORBIT_CAP,
    tol: float = ANGLE_TOL,
) -> tuple[Direction, ...]:
    """Images of ``base`` under all words of length <= max_word_length, breadth first.

    Words use the generators and their inverses.  Exceeding ``cap``
    directions raises ResourceError carrying the partial tuple.
    """
    if max_word_length < 0:
        raise DomainError("max_word_length must be >= 0")
    base = [d if isinstance(d, Direction) else Direction(tuple(d)) for d in base]
    if not base:
        return ()
    found = _DirectionSet(base[0].n, tol)
    frontier = [d for d in base if found.add(d)]
    letters = _letters(generators)
    for _ in range(max_word_length):
        nxt = []
        for d in frontier:
            for _, mat, _ in letters:
                img = Direction(tuple(mat @ d.as_array()), d.projective)
                if found.add(img):
                    nxt.append(img)
                    if len(found.items) > cap:
                        raise ResourceError(f"orbit exceeds {cap} directions", partial=tuple(found.items))
        if not nxt:
            break
        frontier = nxt
    return tuple(found.items)


def rotclass_equal_bounded(
    a: RotationClassDescriptor,
    b: RotationClassDescriptor,
    max_word_length: int,
    cap: int = ORBIT_CAP,
) -> EquivalenceVerdict:
    """Search words in the shared generators mapping a base point of a onto one of b.

    Returns an equivalent verdict with the word (and its matrix when all
    letters are integral) or unknown; a failed search proves nothing.
    """
    if tuple(a.generators) != tuple(b.generators):
        raise DomainError("descriptors use different generator lists")
    letters = _letters(a.generators)
    targets = list(b.base_points)
    n = a.n
    for start in a.base_points:
        seen = _DirectionSet(n, ANGLE_TOL)
        seen.add(start)
        ident = IntMatrix.identity(n)
        frontier = [(start, (), ident, np.eye(n))]
        for length in range(max_word_length + 1):
            for d, word, exact, mat in frontier:
                for t in targets:
                    if d.close_to(t):
                        # re-check with the composed matrix before reporting
                        img = Direction(tuple(mat @ start.as_array()), start.projective)
                        if img.close_to(t):
                            return EquivalenceVerdict("equivalent", exact, word=word, bound=max_word_length)
            if length == max_word_length:
                break
            nxt = []
            for d, word, exact, mat in frontier:
                for label, lm, le in letters:
                    img = Direction(tuple(lm @ d.as_array()), d.projective)
                    if seen.add(img):
                        ex = le @ exact if (exact is not None and le is not None) else None
                        nxt.append((img, word + (label,), ex, lm @ mat))
                        if len(seen.items) > cap:
                            raise ResourceError(f"word search exceeds {cap} directions")
            frontier = nxt
    return EquivalenceVerdict("unknown", bound=max_word_length)
