"""Exact arithmetic in real quadratic fields and continued fractions.

Values of the form (p + q*sqrt(d)) / r are closed under the field
operations as long as every operand shares the same radicand ``d``.  Their
continued fractions are eventually periodic, which is what makes
GL(2, Z)-equivalence decidable: two irrationals are related by a unimodular
Mobius map exactly when their expansions share a common tail.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterator, Optional, Sequence, Union

import numpy as np

from .errors import DomainError

__all__ = [
    "QuadraticIrrational",
    "ContinuedFraction",
    "Mobius",
    "TailMatch",
    "PHI",
    "SQRT2",
    "as_quadratic",
    "cf_expand",
    "cf_quadratic_exact",
    "convergent",
    "mobius_apply",
    "common_tail",
    "gl2z_equivalent",
    "gl2z_brute_witness",
    "gl2z_witness",
    "tail_witness",
]


def _squarefree_split(d: int) -> tuple[int, int]:
    """Return (f, e) with d == f*f*e and e square-free."""
    f, e = 1, d
    k = 2
    while k * k <= e:
        while e % (k * k) == 0:
            e //= k * k
            f *= k
        k += 1
    return f, e


class QuadraticIrrational:
    """The real number (p + q*sqrt(d)) / r, kept in normalized form.

    ``q == 0`` represents a rational; its radicand is stored as 1.
    """

    __slots__ = ("p", "q", "d", "r")

    def __init__(self, p: int, q: int = 0, d: int = 1, r: int = 1):
        for name, v in (("p", p), ("q", q), ("d", d), ("r", r)):
            if not isinstance(v, (int, np.integer)) or isinstance(v, bool):
                raise TypeError(f"{name} must be an integer, got {v!r}")
        p, q, d, r = int(p), int(q), int(d), int(r)
        if r == 0:
            raise DomainError("denominator r must be nonzero")
        if d <= 0:
            raise DomainError("radicand d must be positive")
        if q != 0:
            f, d = _squarefree_split(d)
            q *= f
            if d == 1:
                p, q = p + q, 0
        if q == 0:
            d = 1
        if r < 0:
            p, q, r = -p, -q, -r
        g = math.gcd(math.gcd(p, q), r)
        self.p, self.q, self.d, self.r = p // g, q // g, d, r // g

    # -- construction helpers -------------------------------------------------

    @classmethod
    def sqrt(cls, d: int) -> "QuadraticIrrational":
        return cls(0, 1, d, 1)

    @classmethod
    def from_rational(cls, x) -> "QuadraticIrrational":
        x = Fraction(x)
        return cls(x.numerator, 0, 1, x.denominator)

    # -- structure ------------------------------------------------------------

    @property
    def is_rational(self) -> bool:
        return self.q == 0

    def as_fraction(self) -> Fraction:
        if self.q:
            raise DomainError(f"{self} is irrational")
        return Fraction(self.p, self.r)

    def conjugate(self) -> "QuadraticIrrational":
        return QuadraticIrrational(self.p, -self.q, self.d, self.r)

    def coords(self) -> tuple[Fraction, Fraction]:
        """Rational coordinates (x, y) with value x + y*sqrt(d)."""
        return Fraction(self.p, self.r), Fraction(self.q, self.r)

    def sign(self) -> int:
        p, q, d = self.p, self.q, self.d
        if q == 0:
            return (p > 0) - (p < 0)
        if p >= 0 and q > 0:
            return 1
        if p <= 0 and q < 0:
            return -1
        # opposite signs: compare p^2 with q^2 d (never equal, d square-free > 1)
        if p > 0:
            return 1 if p * p > q * q * d else -1
        return 1 if q * q * d > p * p else -1

    def __floor__(self) -> int:
        p, q, d, r = self.p, self.q, self.d, self.r
        if q == 0:
            return p // r
        s = math.isqrt(q * q * d)
        # q*sqrt(d) lies strictly inside (s, s+1) or (-s-1, -s)
        return (p + s) // r if q > 0 else (p - s - 1) // r

    def floor(self) -> int:
        return math.floor(self)

    def frac(self) -> "QuadraticIrrational":
        return self - math.floor(self)

    def __float__(self) -> float:
        p, q, d, r = self.p, self.q, self.d, self.r
        if q == 0:
            return p / r
        if (p > 0) != (q > 0) and p != 0:
            # (p + q sqrt d) = (p^2 - q^2 d) / (p - q sqrt d) avoids cancellation
            return float(Fraction(p * p - q * q * d, r)) / (p - q * math.sqrt(d))
        return (p + q * math.sqrt(d)) / r

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other) -> "QuadraticIrrational":
        if isinstance(other, QuadraticIrrational):
            o = other
        elif isinstance(other, (int, np.integer, Rational)) and not isinstance(other, bool):
            o = QuadraticIrrational.from_rational(other)
        else:
            return NotImplemented
        if self.q and o.q and self.d != o.d:
            raise DomainError(f"mixed radicands sqrt({self.d}) and sqrt({o.d}) are not supported")
        return o

    def _radicand(self, o: "QuadraticIrrational") -> int:
        return self.d if self.q else o.d

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return QuadraticIrrational(
            self.p * o.r + o.p * self.r, self.q * o.r + o.q * self.r, self._radicand(o), self.r * o.r
        )

    __radd__ = __add__

    def __neg__(self):
        return QuadraticIrrational(-self.p, -self.q, self.d, self.r)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        d = self._radicand(o)
        return QuadraticIrrational(
            self.p * o.p + self.q * o.q * d, self.p * o.q + self.q * o.p, d, self.r * o.r
        )

    __rmul__ = __mul__

    def inverse(self) -> "QuadraticIrrational":
        p, q, d, r = self.p, self.q, self.d, self.r
        norm = p * p - q * q * d
        if norm == 0:
            raise ZeroDivisionError("inverse of zero")
        return QuadraticIrrational(r * p, -r * q, d, norm)

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self * o.inverse()

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o * self.inverse()

    def __abs__(self):
        return -self if self.sign() < 0 else self

    # -- comparison -----------------------------------------------------------

    def __eq__(self, other):
        if isinstance(other, float):
            return False
        try:
            o = self._coerce(other)
        except DomainError:
            return False
        if o is NotImplemented:
            return o
        return (self.p, self.q, self.d, self.r) == (o.p, o.q, o.d, o.r)

    def __hash__(self):
        if self.q == 0:
            return hash(Fraction(self.p, self.r))
        return hash((self.p, self.q, self.d, self.r))

    def _cmp(self, other) -> int:
        return (self - other).sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __repr__(self):
        return f"QuadraticIrrational(p={self.p}, q={self.q}, d={self.d}, r={self.r})"

    def __str__(self):
        if self.q == 0:
            return str(Fraction(self.p, self.r))
        coef = "" if abs(self.q) == 1 else f"{abs(self.q)}*"
        num = f"{self.p}{'+' if self.q > 0 else '-'}{coef}sqrt({self.d})"
        return num if self.r == 1 else f"({num})/{self.r}"

    def to_json(self) -> dict:
        return {"p": self.p, "q": self.q, "d": self.d, "r": self.r, "value": float(self)}


Exact = Union[QuadraticIrrational, int, Fraction]

PHI = QuadraticIrrational(1, 1, 5, 2)
SQRT2 = QuadraticIrrational.sqrt(2)


def as_quadratic(x) -> Optional[QuadraticIrrational]:
    """Exact view of ``x`` or None for floats and other inexact values."""
    if isinstance(x, QuadraticIrrational):
        return x
    if isinstance(x, (int, np.integer, Rational)) and not isinstance(x, bool):
        return QuadraticIrrational.from_rational(x)
    return None


# -- continued fractions ------------------------------------------------------


@dataclass(frozen=True)
class ContinuedFraction:
    """[a0; a1, a2, ...] as a preperiod followed by an optionally repeating period.

    ``exact`` is True when the terms describe the value completely: a
    terminated rational expansion or the periodic expansion of a surd.
    """

    preperiod: tuple[int, ...]
    period: tuple[int, ...] = ()
    exact: bool = False

    def __post_init__(self):
        object.__setattr__(self, "preperiod", tuple(int(a) for a in self.preperiod))
        object.__setattr__(self, "period", tuple(int(a) for a in self.period))
        if not self.preperiod:
            raise ValueError("a continued fraction needs at least a0")
        if any(a < 1 for a in self.preperiod[1:]) or any(a < 1 for a in self.period):
            raise ValueError("partial quotients after a0 must be positive")

    @property
    def is_periodic(self) -> bool:
        return bool(self.period)

    def __len__(self):
        if self.period:
            raise TypeError("periodic continued fraction has no finite length")
        return len(self.preperiod)

    def term(self, k: int) -> int:
        if k < 0:
            raise IndexError(k)
        if k < len(self.preperiod):
            return self.preperiod[k]
        if not self.period:
            raise IndexError(f"term {k} beyond a {len(self.preperiod)}-term expansion")
        return self.period[(k - len(self.preperiod)) % len(self.period)]

    def terms(self, count: Optional[int] = None) -> Iterator[int]:
        k = 0
        while count is None or k < count:
            try:
                yield self.term(k)
            except IndexError:
                return
            k += 1

    def __str__(self):
        head = f"[{self.preperiod[0]}"
        rest = list(map(str, self.preperiod[1:]))
        if self.period:
            rest.append("(" + ",".join(map(str, self.period)) + ")")
        return head + ("; " + ",".join(rest) if rest else "") + "]"


def cf_expand(x, depth: int) -> ContinuedFraction:
    """Floor-algorithm expansion of ``x`` truncated to ``depth`` terms.

    Floats are expanded from their exact binary value so no rounding
    accumulates across steps.  The result is flagged exact only if the
    expansion terminated within ``depth`` terms.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if isinstance(x, QuadraticIrrational):
        if x.is_rational:
            x = x.as_fraction()
        else:
            exact = cf_quadratic_exact(x)
            return ContinuedFraction(tuple(exact.terms(depth)), (), False)
    if isinstance(x, float) and not math.isfinite(x):
        raise DomainError(f"cannot expand non-finite value {x}")
    v = Fraction(x)
    terms = []
    while len(terms) < depth:
        a = math.floor(v)
        terms.append(a)
        v -= a
        if v == 0:
            return ContinuedFraction(tuple(terms), (), True)
        v = 1 / v
    return ContinuedFraction(tuple(terms), (), False)


def _least_period(word: Sequence[int]) -> tuple[int, ...]:
    n = len(word)
    for p in range(1, n + 1):
        if n % p == 0 and tuple(word[:p]) * (n // p) == tuple(word):
            return tuple(word[:p])
    return tuple(word)


def cf_quadratic_exact(x: QuadraticIrrational) -> ContinuedFraction:
    """Exact periodic expansion of a quadratic irrational.

    Integer-only surd recursion on states (P, Q) with value (P + sqrt(D))/Q
    and Q | D - P^2; the first repeated state (from index 1 on) closes the
    period.  a0 always sits in the preperiod.
    """
    x = as_quadratic(x)
    if x is None:
        raise TypeError("cf_quadratic_exact needs an exact QuadraticIrrational")
    if x.is_rational:
        raise DomainError("rational input has a finite expansion; use cf_expand")
    p, q, d, r = x.p, x.q, x.d, x.r
    if q < 0:
        p, q, r = -p, -q, -r
    # value = (p + sqrt(q^2 d)) / r ; scale so that Q | D - P^2
    P, D, Q = p * abs(r), q * q * d * r * r, r * abs(r)
    s = math.isqrt(D)

    def floor_state(P, Q):
        return (P + s) // Q if Q > 0 else (P + s + 1) // Q

    terms = []
    seen = {}
    k = 0
    while True:
        if k >= 1:
            if (P, Q) in seen:
                start = seen[(P, Q)]
                return ContinuedFraction(tuple(terms[:start]), _least_period(terms[start:]), True)
            seen[(P, Q)] = k
        a = floor_state(P, Q)
        terms.append(a)
        P = a * Q - P
        Q = (D - P * P) // Q
        k += 1


def convergent(cf: ContinuedFraction, k: int) -> tuple[int, int]:
    """k-th convergent (p_k, q_k) via the three-term recurrence."""
    if k < 0:
        raise IndexError(k)
    p_prev, p = 1, cf.term(0)
    q_prev, q = 0, 1
    for i in range(1, k + 1):
        a = cf.term(i)
        p_prev, p = p, a * p + p_prev
        q_prev, q = q, a * q + q_prev
    return p, q


# -- Mobius maps --------------------------------------------------------------


@dataclass(frozen=True)
class Mobius:
    """x -> (a x + b) / (c x + d) with ad - bc = +-1."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for f in ("a", "b", "c", "d"):
            object.__setattr__(self, f, int(getattr(self, f)))
        if self.det not in (1, -1):
            raise DomainError(f"{self} is not unimodular (det {self.det})")

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "Mobius") -> "Mobius":
        """Composition: (self @ other)(x) == self(other(x))."""
        return Mobius(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> "Mobius":
        s = self.det
        return Mobius(s * self.d, -s * self.b, -s * self.c, s * self.a)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def __call__(self, x):
        return mobius_apply(self, x)


IDENTITY = Mobius(1, 0, 0, 1)


def mobius_apply(m: Mobius, x):
    """Apply ``m`` exactly to a QuadraticIrrational (or rational), else in floats."""
    qx = as_quadratic(x)
    if qx is None:
        den = m.c * x + m.d
        if den == 0:
            raise DomainError("pole: c*x + d == 0")
        return (m.a * x + m.b) / den
    den = qx * m.c + m.d
    if den.sign() == 0:
        raise DomainError("pole: c*x + d == 0")
    return (qx * m.a + m.b) / den


# -- common tails and GL(2, Z) equivalence ------------------------------------


@dataclass(frozen=True)
class TailMatch:
    """Outcome of a common-tail comparison; truthy iff the tails agree.

    ``offsets`` (i, j) mean the tail of ``u`` from term i equals the tail of
    ``v`` from term j.  The least periods double as a mismatch certificate.
    """

    equal: bool
    offsets: Optional[tuple[int, int]]
    period_u: tuple[int, ...]
    period_v: tuple[int, ...]

    def __bool__(self):
        return self.equal


def common_tail(u: ContinuedFraction, v: ContinuedFraction) -> TailMatch:
    if not (u.exact and v.exact):
        raise DomainError("common_tail is undefined for truncated expansions")
    if not u.period or not v.period:
        # Terminating expansions (rationals) share the empty tail with each other only.
        both = not u.period and not v.period
        offsets = (len(u.preperiod), len(v.preperiod)) if both else None
        return TailMatch(both, offsets, u.period, v.period)
    pu, pv = _least_period(u.period), _least_period(v.period)
    if len(pu) == len(pv):
        for rot in range(len(pu)):
            if pu[rot:] + pu[:rot] == pv:
                return TailMatch(True, (len(u.preperiod) + rot, len(v.preperiod)), pu, pv)
    return TailMatch(False, None, pu, pv)


def gl2z_equivalent(alpha, beta) -> bool:
    """True iff beta = (a alpha + b)/(c alpha + d) for some unimodular integer matrix."""
    return common_tail(cf_quadratic_exact(alpha), cf_quadratic_exact(beta)).equal


def _simplicity_key(m: tuple[int, int, int, int]):
    return (
        max(abs(e) for e in m),
        sum(1 for e in m if e),
        sum(1 for e in m if e < 0),
        tuple(abs(e) for e in m),
        m,
    )


@lru_cache(maxsize=None)
def _unimodular_candidates(bound: int) -> np.ndarray:
    """All (a, b, c, d) with entries in [-bound, bound] and det = +-1, in scan order."""
    rng = range(-bound, bound + 1)
    found = []
    for a in rng:
        for b in rng:
            for c in rng:
                if a == 0:
                    if b * c in (1, -1):
                        found.extend((a, b, c, d) for d in rng)
                    continue
                for det in (1, -1):
                    num = det + b * c
                    if num % a == 0 and abs(num // a) <= bound:
                        found.append((a, b, c, num // a))
    found = sorted(set(found), key=_simplicity_key)
    return np.array(found, dtype=np.int64).reshape(-1, 4)


def gl2z_brute_witness(alpha, beta, bound: int, tol: float = 1e-9) -> Optional[Mobius]:
    """Exhaustive scan for a unimodular map sending alpha to beta.

    Candidates are scanned in a fixed order: by largest entry, then by
    number of nonzero and negative entries, then lexicographically.  Exact
    inputs are confirmed exactly; otherwise ``|m(alpha) - beta| < tol``.
    """
    if bound < 1:
        raise ValueError("bound must be >= 1")
    qa, qb = as_quadratic(alpha), as_quadratic(beta)
    exact = qa is not None and qb is not None
    if exact and qa.q and qb.q and qa.d != qb.d:
        return None  # values in different quadratic fields are never related
    fa, fb = float(alpha), float(beta)
    cand = _unimodular_candidates(bound)
    a, b, c, d = (cand[:, i].astype(float) for i in range(4))
    den = c * fa + d
    with np.errstate(divide="ignore", invalid="ignore"):
        img = (a * fa + b) / den
    screen = tol if not exact else 1e-7 * max(1.0, abs(fb))
    hits = np.nonzero(np.abs(img - fb) < screen)[0]
    for i in hits:
        m = Mobius(*(int(e) for e in cand[i]))
        if not exact:
            return m
        try:
            if mobius_apply(m, qa) == qb:
                return m
        except DomainError:
            continue
    return None


def _quotient_map(cf: ContinuedFraction, i: int) -> Mobius:
    """Mobius map sending the i-th complete quotient back to the value itself."""
    if i == 0:
        return IDENTITY
    p, q = convergent(cf, i - 1)
    pp, qq = convergent(cf, i - 2) if i >= 2 else (1, 0)
    return Mobius(p, pp, q, qq)


def tail_witness(alpha: QuadraticIrrational, beta: QuadraticIrrational) -> Optional[Mobius]:
    """Unimodular map alpha -> beta built from aligned common tails, or None."""
    cu, cv = cf_quadratic_exact(alpha), cf_quadratic_exact(beta)
    match = common_tail(cu, cv)
    if not match:
        return None
    i, j = match.offsets
    m = _quotient_map(cv, j) @ _quotient_map(cu, i).inverse()
    if mobius_apply(m, alpha) != beta:  # pragma: no cover - guarded by construction
        raise AssertionError("tail witness failed to verify")
    return m


def gl2z_witness(alpha, beta, max_bound: int = 32) -> Optional[Mobius]:
    """Small unimodular witness for an exact equivalent pair, None if inequivalent.

    Escalates the brute-force scan over bounds 1, 2, 4, ... up to
    ``max_bound``; if no small witness exists the continued-fraction
    construction supplies one.
    """
    qa, qb = as_quadratic(alpha), as_quadratic(beta)
    if qa is None or qb is None:
        raise DomainError("gl2z_witness needs exact inputs")
    if not gl2z_equivalent(qa, qb):
        return None
    bound = 1
    while bound <= max_bound:
        m = gl2z_brute_witness(qa, qb, bound)
        if m is not None:
            return m
        bound *= 2
    return tail_witness(qa, qb)
