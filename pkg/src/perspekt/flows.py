"""Flow specifications and orbit sampling on a solenoid leaf.

Every flow here moves along the leaf through its starting point, so a
trajectory is recorded as stage-1 torus samples, their continuous lift to
R^n and the disc images of that lift.  The full depth-k point at any sample
is recovered with :meth:`Trajectory.point_at`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .denjoy import DenjoyHomeo, denjoy_lift
from .errors import DomainError, PreconditionError
from .perspective import compactify_array
from .solenoid import SolenoidPoint, SolenoidSpec, add_points, covering_point

__all__ = [
    "Linear",
    "TimeChanged",
    "DenjoySuspension",
    "RateFunction",
    "Trajectory",
    "FlowSpec",
    "sample_orbit",
    "lift_path",
    "constant_rate",
    "sine_rate",
    "MAX_STEP",
]

MAX_STEP = 0.4


@dataclass(frozen=True)
class Linear:
    omega: tuple

    def __post_init__(self):
        omega = tuple(self.omega)
        if not omega or all(w == 0 for w in omega):
            raise DomainError("linear flow needs a nonzero velocity")
        object.__setattr__(self, "omega", omega)

    @property
    def velocity(self) -> np.ndarray:
        return np.array([float(w) for w in self.omega])


@dataclass(frozen=True)
class RateFunction:
    """Positive speed factor evaluated on stage-1 torus coordinates.

    ``kind`` is ``"constant"`` (params: value) or ``"sine"`` (params:
    amplitude, wave vector k, phase) giving 1 + amplitude*sin(2 pi k.x + phase).
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in ("constant", "sine"):
            raise DomainError(f"unknown rate function {self.kind!r}")
        if self.r_min <= 0:
            raise DomainError(f"rate must stay positive, minimum is {self.r_min}")

    @property
    def r_min(self) -> float:
        if self.kind == "constant":
            return float(self.params[0])
        return 1.0 - abs(float(self.params[0]))

    @property
    def r_max(self) -> float:
        if self.kind == "constant":
            return float(self.params[0])
        return 1.0 + abs(float(self.params[0]))

    def __call__(self, x: Sequence[float]) -> float:
        if self.kind == "constant":
            return float(self.params[0])
        amp, k, phase = self.params
        return 1.0 + amp * math.sin(2 * math.pi * float(np.dot(k, x)) + phase)

    def along(self, start: np.ndarray, omega: np.ndarray) -> Callable[[float], float]:
        """The rate as a scalar function of the base-flow time along one line."""
        if self.kind == "constant":
            value = float(self.params[0])
            return lambda tau: value
        amp, k, phase = self.params
        k = np.asarray(k, dtype=float)
        c0 = 2 * math.pi * float(k @ start) + phase
        c1 = 2 * math.pi * float(k @ omega)
        sin = math.sin
        return lambda tau: 1.0 + amp * sin(c0 + c1 * tau)

    def to_json(self) -> dict:
        if self.kind == "constant":
            return {"kind": "constant", "value": self.params[0]}
        amp, k, phase = self.params
        return {"kind": "sine", "amplitude": amp, "k": list(k), "phase": phase}


def constant_rate(value: float) -> RateFunction:
    return RateFunction("constant", (float(value),))


def sine_rate(amplitude: float, k: Sequence[float], phase: float = 0.0) -> RateFunction:
    return RateFunction("sine", (float(amplitude), tuple(float(v) for v in k), float(phase)))


@dataclass(frozen=True)
class TimeChanged:
    base: "FlowSpec"
    rate: RateFunction


@dataclass(frozen=True)
class DenjoySuspension:
    """Suspension of a Denjoy homeomorphism on T^2.

    Coordinates are (height, circle).  Between returns a point moves along
    the straight isotopy from y to H(y), so the flow is continuous on the
    torus and its first-return map to height 0 is the homeomorphism.
    """

    homeo: DenjoyHomeo
    return_time: object = 1.0

    def __post_init__(self):
        if not float(self.return_time) > 0:
            raise DomainError("return time must be positive")


FlowSpec = Union[Linear, TimeChanged, DenjoySuspension]


@dataclass
class Trajectory:
    times: np.ndarray
    base_points: np.ndarray
    lifted: np.ndarray
    disc: np.ndarray
    flow: FlowSpec
    spec: SolenoidSpec
    x0: SolenoidPoint
    dt: float
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    def point_at(self, i: int) -> SolenoidPoint:
        """Depth-k point reached at sample i: x0 moved along its leaf."""
        shift = self.lifted[i] - self.meta["start"]
        return add_points(self.x0.as_float(), covering_point(self.spec, tuple(shift)))


def lift_path(base: np.ndarray, start: Sequence[float]) -> np.ndarray:
    """Continuous lift of torus samples, each step taking the increment nearest 0."""
    base = np.asarray(base, dtype=float)
    start = np.asarray(start, dtype=float)
    if base.ndim != 2 or base.shape[1] != len(start):
        raise DomainError("base samples and start vector have mismatched shapes")
    off = start - base[0]
    if np.max(np.abs(off - np.round(off))) > 1e-9:
        raise DomainError("start does not project onto the first base sample")
    inc = np.diff(base, axis=0)
    inc -= np.round(inc)
    if inc.size and np.max(np.abs(inc)) >= MAX_STEP:
        i = int(np.argmax(np.max(np.abs(inc), axis=1)))
        raise PreconditionError(f"step {i} moves {np.max(np.abs(inc[i])):.3g} on the torus; unwrapping is ambiguous")
    lifted = np.empty_like(base)
    lifted[0] = start
    np.cumsum(inc, axis=0, out=lifted[1:])
    lifted[1:] += start
    return lifted


def _flatten(flow: FlowSpec) -> tuple[Linear, list[RateFunction]]:
    rates = []
    while isinstance(flow, TimeChanged):
        rates.append(flow.rate)
        flow = flow.base
    if not isinstance(flow, Linear):
        raise DomainError("time changes are supported over linear flows only")
    return flow, rates


def _mod1(a: np.ndarray) -> np.ndarray:
    out = np.mod(a, 1.0)
    out[out >= 1.0] = 0.0
    return out


def _sample_times(t_start: float, t_end: float, dt: float) -> np.ndarray:
    if dt <= 0:
        raise PreconditionError("dt must be positive")
    if t_end <= t_start:
        raise PreconditionError("t_end must exceed t_start")
    steps = int(round((t_end - t_start) / dt))
    return t_start + dt * np.arange(steps + 1)


def _check_step(dt: float, speed: float):
    if dt * speed >= MAX_STEP:
        raise PreconditionError(
            f"dt={dt:g} moves up to {dt * speed:.3g} per step; use dt < {MAX_STEP / speed:.6g}"
        )


def sample_orbit(
    flow: FlowSpec,
    spec: SolenoidSpec,
    x0: Optional[SolenoidPoint] = None,
    t_end: float = 1.0,
    dt: float = 0.01,
    *,
    t_start: float = 0.0,
    start: Optional[Sequence[float]] = None,
) -> Trajectory:
    """Sample the orbit of ``x0`` on [t_start, t_end] with step ``dt``.

    The orbit passes through x0 at time 0, where its lift is ``start``
    (default: the first-stage coordinates of x0).  Negative times sample
    the backward orbit.
    """
    if x0 is None:
        x0 = covering_point(spec, tuple(float(v) for v in (start if start is not None else [0.0] * spec.n)))
    if x0.spec != spec:
        raise DomainError("x0 belongs to a different solenoid spec")
    s0 = np.array([float(v) for v in x0.coords[0]])
    if start is None:
        start = s0
    start = np.asarray(start, dtype=float)
    if len(start) != spec.n:
        raise DomainError(f"start has length {len(start)}, spec dimension is {spec.n}")
    off = start - s0
    if np.max(np.abs(off - np.round(off))) > 1e-9:
        raise DomainError("start does not project onto the first stage of x0")
    times = _sample_times(t_start, t_end, dt)

    meta: dict = {"start": start}
    if isinstance(flow, DenjoySuspension):
        lifted = _sample_suspension(flow, spec, start, times, dt, meta)
    else:
        linear, rates = _flatten(flow)
        omega = linear.velocity
        if len(omega) != spec.n:
            raise DomainError(f"velocity has length {len(omega)}, spec dimension is {spec.n}")
        r_max = math.prod(r.r_max for r in rates)
        _check_step(dt, float(np.max(np.abs(omega))) * r_max)
        if rates:
            tau = _integrate_rates(rates, start, omega, times, dt)
            meta["base_time"] = tau
        else:
            tau = times
        lifted = start + tau[:, None] * omega
    base = _mod1(lifted)
    disc, _ = compactify_array(lifted)
    return Trajectory(times, base, lifted, disc, flow, spec, x0, dt, meta)


def _integrate_rates(rates, start, omega, times, dt) -> np.ndarray:
    """Base-flow time tau(t) solving dtau/dt = rate(start + tau*omega), tau(0) = 0.

    Classic fixed-step RK4 on the grid k*dt, run forward and backward from
    t = 0, so the sample grid must be aligned with multiples of dt.
    """
    funcs = [r.along(start, omega) for r in rates]
    if len(funcs) == 1:
        g = funcs[0]
    else:
        def g(tau):
            return math.prod(f(tau) for f in funcs)
    k0 = round(times[0] / dt)
    if abs(times[0] - k0 * dt) > 1e-9 * dt:
        raise PreconditionError("time-changed sampling needs t_start to be a multiple of dt")
    k1 = k0 + len(times) - 1

    def run(h, steps):
        out = [0.0]
        tau, half = 0.0, h / 2
        for _ in range(steps):
            a = g(tau)
            b = g(tau + half * a)
            c = g(tau + half * b)
            d = g(tau + h * c)
            tau += h * (a + 2 * b + 2 * c + d) / 6
            out.append(tau)
        return out

    fwd = run(float(dt), max(k1, 0))
    bwd = run(-float(dt), max(-k0, 0))
    ks = range(k0, k1 + 1)
    return np.array([fwd[k] if k >= 0 else bwd[-k] for k in ks])


def _lift_inverse(homeo: DenjoyHomeo, y: float) -> float:
    """Solve H(z) = y by bisection; H is increasing with H(z+1) = H(z)+1."""
    a = homeo.alpha_float
    lo, hi = y - a - 2.0, y - a + 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if denjoy_lift(homeo, mid) < y:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * np.spacing(abs(y) + 1.0):
            break
    return hi


def _section_point(homeo: DenjoyHomeo, height: float, y: float) -> float:
    """Cross-section point z with (1-height) z + height H(z) = y."""
    if height == 0.0:
        return y
    lo, hi = y - abs(homeo.alpha_float) - 2.0, y + 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if (1 - height) * mid + height * denjoy_lift(homeo, mid) < y:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 4 * np.spacing(abs(y) + 1.0):
            break
    return hi


def _sample_suspension(flow: DenjoySuspension, spec, start, times, dt, meta) -> np.ndarray:
    if spec.n != 2:
        raise DomainError("Denjoy suspensions live on 2-dimensional leaves")
    homeo = flow.homeo
    T = float(flow.return_time)
    speed = max(1.0, abs(homeo.alpha_float) + 2 * float(homeo.total_mass)) / T
    _check_step(dt, speed)
    height0 = float(start[0])
    m0 = math.floor(height0)
    z0 = _section_point(homeo, height0 - m0, float(start[1]))
    heights = height0 + times / T
    idx = np.floor(heights).astype(np.int64)
    lo, hi = int(idx.min()), int(idx.max()) + 1
    # cross-section lifts Z_m for m in [lo, hi]
    section = {m0: z0}
    for m in range(m0 + 1, hi + 1):
        section[m] = float(denjoy_lift(homeo, section[m - 1]))
    for m in range(m0 - 1, lo - 1, -1):
        section[m] = _lift_inverse(homeo, section[m + 1])
    ms = np.arange(lo, hi + 1)
    z = np.array([section[m] for m in ms])
    z_next = np.array([section.get(m + 1, np.nan) for m in ms])
    k = idx - lo
    frac = heights - idx
    y = (1 - frac) * z[k] + frac * z_next[k]
    meta["returns"] = {"index": ms.tolist(), "section": z.tolist(), "times": ((ms - height0) * T).tolist()}
    return np.column_stack([heights, y])
