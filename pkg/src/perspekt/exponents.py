"""Exponent groups: finitely generated subgroups of (R, +).

Exact groups live in a single quadratic field Q(sqrt d).  Writing each
generator as x + y sqrt(d) embeds the group in Q^2, where a Hermite basis
makes equality of generated groups a syntactic comparison.  Groups are
always held by generators, never as point sets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from .errors import DomainError, UnsupportedError
from .flows import DenjoySuspension, Linear, TimeChanged
from .numberlab import QuadraticIrrational, as_quadratic, gl2z_brute_witness, gl2z_witness

__all__ = [
    "ExponentGroup",
    "Undefined",
    "exponent_group",
    "exponent_group_linear",
    "exponent_group_of_spec",
    "equal_up_to_constant",
    "FLOAT_BOUND",
]

FLOAT_BOUND = 15
_FLOAT_RTOL = 1e-12


def _hnf(vectors: Sequence[tuple[Fraction, Fraction]]) -> tuple[tuple[Fraction, Fraction], ...]:
    """Hermite basis of the subgroup of Q^2 generated by ``vectors``.

    Rows come out as (g, h), (0, e) with g, e > 0 and 0 <= h < e, so two
    generating sets give the same rows iff they generate the same group.
    """
    den = math.lcm(1, *(x.denominator for v in vectors for x in v))
    rows = [[int(x * den) for x in v] for v in vectors]
    rows = [r for r in rows if r != [0, 0]]
    # Euclid on the first column
    while sum(1 for r in rows if r[0]) > 1:
        rows.sort(key=lambda r: (r[0] == 0, abs(r[0])))
        piv = rows[0]
        for r in rows[1:]:
            if r[0]:
                k = r[0] // piv[0]
                r[0] -= k * piv[0]
                r[1] -= k * piv[1]
    top = next((r for r in rows if r[0]), None)
    e = 0
    for r in rows:
        if r is not top:
            e = math.gcd(e, r[1])
    basis = []
    if top is not None:
        if top[0] < 0:
            top = [-top[0], -top[1]]
        if e:
            top[1] %= e
        basis.append((Fraction(top[0], den), Fraction(top[1], den)))
    if e:
        basis.append((Fraction(0), Fraction(e, den)))
    return tuple(basis)


@dataclass(frozen=True)
class Undefined:
    """Placeholder for flows whose exponent group is not determined here."""

    reason: str

    def __bool__(self):
        return False

    def to_json(self) -> dict:
        return {"defined": False, "reason": self.reason}


class ExponentGroup:
    """Subgroup of (R, +) generated by a finite list of reals.

    ``generators`` is a reduced generating list: duplicates and members of
    the group generated by earlier entries are dropped, and a dependent
    list collapses to its Hermite basis.  ``truncation`` records the index
    at which an infinite generator enumeration was cut off, if any.
    """

    def __init__(self, generators: Sequence, truncation: Optional[int] = None):
        gens = list(generators)
        if not gens:
            raise DomainError("an exponent group needs at least one generator")
        exact = [as_quadratic(g) for g in gens]
        self.truncation = truncation
        self.radicand = None
        self.basis = None
        if all(e is not None for e in exact):
            rads = {e.d for e in exact if e.q}
            if len(rads) <= 1:
                self.radicand = rads.pop() if rads else 1
                self._init_exact([e for e in exact if e != 0])
                return
            self.exact = True
            self.generators = tuple(dict.fromkeys(e for e in exact if e != 0))
            if not self.generators:
                raise DomainError("the zero group has no exponent generators")
            return
        self.exact = False
        self._init_float([float(g) for g in gens])

    def _init_exact(self, gens):
        if not gens:
            raise DomainError("the zero group has no exponent generators")
        self.exact = True
        kept, basis = [], ()
        for g in gens:
            nb = _hnf(list(basis) + [g.coords()])
            if nb != basis:
                kept.append(g)
                basis = nb
        if len(kept) > len(basis):
            kept = [self._from_coords(v) for v in basis]
        self.generators = tuple(kept)
        self.basis = basis

    def _from_coords(self, v) -> QuadraticIrrational:
        x, y = v
        r = math.lcm(x.denominator, y.denominator)
        return QuadraticIrrational(int(x * r), int(y * r), self.radicand, r)

    def _init_float(self, gens):
        gens = [g for g in gens if g != 0.0]
        if not gens:
            raise DomainError("the zero group has no exponent generators")
        kept = []
        for g in gens:
            if not any(math.isclose(abs(g), abs(k), rel_tol=_FLOAT_RTOL) for k in kept):
                kept.append(g)
        # collapse to one generator when every ratio is a small rational
        ratios = [Fraction(g / kept[0]).limit_denominator(1000) for g in kept]
        if len(kept) > 1 and all(math.isclose(float(f) * kept[0], g, rel_tol=_FLOAT_RTOL) for f, g in zip(ratios, kept)):
            num = math.gcd(*(f.numerator for f in ratios))
            den = math.lcm(*(f.denominator for f in ratios))
            kept = [abs(kept[0]) * num / den]
        self.generators = tuple(kept)

    @property
    def rank(self) -> int:
        if self.basis is not None:
            return len(self.basis)
        return len(self.generators)

    def contains(self, x) -> bool:
        """Exact membership test; single-field groups only."""
        q = as_quadratic(x)
        if self.basis is None or q is None:
            raise UnsupportedError("membership is decided for exact single-field groups only")
        if q.q and q.d != self.radicand:
            return False
        return _hnf(list(self.basis) + [q.coords()]) == self.basis

    def scaled(self, c) -> "ExponentGroup":
        return ExponentGroup([c * g for g in self.generators], self.truncation)

    def __eq__(self, other):
        if not isinstance(other, ExponentGroup):
            return NotImplemented
        if self.basis is not None and other.basis is not None:
            return self.radicand == other.radicand and self.basis == other.basis
        if self.exact != other.exact or len(self.generators) != len(other.generators):
            return False
        if self.exact:
            return set(self.generators) == set(other.generators)
        a = sorted(abs(g) for g in self.generators)
        b = sorted(abs(g) for g in other.generators)
        return all(math.isclose(x, y, rel_tol=_FLOAT_RTOL) for x, y in zip(a, b))

    def __hash__(self):
        return hash((self.radicand, self.basis)) if self.basis is not None else hash(len(self.generators))

    def __repr__(self):
        return "ExponentGroup<" + ", ".join(str(g) for g in self.generators) + ">"

    def to_json(self) -> dict:
        gens = [g.to_json() if isinstance(g, QuadraticIrrational) else g for g in self.generators]
        out = {"generators": gens, "exact": self.exact, "rank": self.rank}
        if self.truncation is not None:
            out["truncation"] = self.truncation
        return out


def exponent_group(generators: Sequence, truncation: Optional[int] = None) -> ExponentGroup:
    return ExponentGroup(generators, truncation)


def exponent_group_linear(omega: Sequence) -> ExponentGroup:
    """The group generated by the velocity components: <1, a> for omega = (1, a)."""
    if all(float(w) == 0 for w in omega):
        raise DomainError("velocity must be nonzero")
    return ExponentGroup(omega)


def exponent_group_of_spec(flow):
    """Exponent group of a flow spec, or Undefined when it depends on more than the spec."""
    if isinstance(flow, Linear):
        return exponent_group_linear(flow.omega)
    if isinstance(flow, DenjoySuspension):
        T = flow.return_time
        qt = as_quadratic(T)
        alpha = flow.homeo.alpha
        if qt is not None and as_quadratic(alpha) is not None:
            inv = 1 / qt
            try:
                return ExponentGroup([inv, as_quadratic(alpha) * inv])
            except DomainError:
                pass  # alpha and T in different quadratic fields
        return ExponentGroup([1 / float(T), float(alpha) / float(T)])
    if isinstance(flow, TimeChanged):
        return Undefined("exponent groups are not invariant under time changes; the group of a time-changed flow is not determined by the base flow")
    return Undefined(f"unsupported flow type {type(flow).__name__}")


def _check_rank(e: ExponentGroup):
    if e.rank > 2:
        raise UnsupportedError(f"rank {e.rank} groups are outside the rank <= 2 decision")


def equal_up_to_constant(e1: ExponentGroup, e2: ExponentGroup, bound: int = FLOAT_BOUND):
    """A constant c with e1 = c * e2, or None.

    Exact rank-2 groups are normalized to b * <1, s>; the constant exists iff
    the two slopes are GL(2, Z)-equivalent, and is read off a witness map.
    Every returned constant is re-verified.  Float groups get a bounded
    witness search instead, so None there means none within ``bound``.
    """
    _check_rank(e1)
    _check_rank(e2)
    if e1.rank != e2.rank:
        return None
    if e1.basis is not None and e2.basis is not None:
        return _exact_constant(e1, e2)
    if e1.exact and e2.exact and (e1.basis is None or e2.basis is None):
        raise UnsupportedError("groups mixing quadratic fields are outside the exact decision")
    return _float_constant(e1, e2, bound)


def _exact_constant(e1: ExponentGroup, e2: ExponentGroup):
    g1, g2 = e1.generators, e2.generators
    if e1.rank == 1:
        try:
            c = g1[0] / g2[0]
        except DomainError:
            raise UnsupportedError("the constant lies outside both quadratic fields") from None
        c = abs(c)
        return c if e2.scaled(c) == e1 else None
    if e1.radicand != e2.radicand:
        return None
    candidates = [QuadraticIrrational(1), abs(g1[0] / g2[0])]
    for c in candidates:
        if e2.scaled(c) == e1:
            return c
    b1 = [e1._from_coords(v) for v in e1.basis]
    b2 = [e2._from_coords(v) for v in e2.basis]
    s1, s2 = b1[1] / b1[0], b2[1] / b2[0]
    m = gl2z_witness(s1, s2)
    if m is None:
        return None
    a, b, c_, d = m.as_tuple()
    # <1, s2> = <1, s1> / (c s1 + d)
    c = abs(b1[0] * (c_ * s1 + d) / b2[0])
    if e2.scaled(c) != e1:  # pragma: no cover - guarded by the witness
        raise AssertionError("witness constant failed to verify")
    return c


def _float_constant(e1: ExponentGroup, e2: ExponentGroup, bound: int):
    g1 = [float(g) for g in e1.generators]
    g2 = [float(g) for g in e2.generators]
    if len(g1) == 1:
        return abs(g1[0] / g2[0])
    s1, s2 = g1[1] / g1[0], g2[1] / g2[0]
    m = gl2z_brute_witness(s1, s2, bound)
    if m is None:
        return None
    a, b, c, d = m.as_tuple()
    # the brute search already checked |m(s1) - s2| < tol, and <1, s2> = <1, s1> / (c s1 + d)
    return abs(g1[0] * (c * s1 + d) / g2[0])
