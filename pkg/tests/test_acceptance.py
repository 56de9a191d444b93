"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""

import itertools
import json
import math
import re
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np

from perspekt.denjoy import denjoy_apply, denjoy_build, denjoy_sigma, rotation_number_estimate
from perspekt.exponents import equal_up_to_constant, exponent_group, exponent_group_linear, exponent_group_of_spec
from perspekt.flows import DenjoySuspension, Linear, TimeChanged, sample_orbit, sine_rate
from perspekt.intlinalg import Direction, det
from perspekt.numberlab import PHI, SQRT2, QuadraticIrrational as Q, gl2z_brute_witness, mobius_apply
from perspekt.perspective import compactify, decompactify, estimate_perspective
from perspekt.rotclass import mobius_of_matrix, rotation_class_of_linear_torus, rotclass_equal_torus
from perspekt.solenoid import (
    FIBER_CAP,
    SolenoidSpec,
    covering_point,
    fiber_enumerate,
    fiber_size,
    random_spec,
    validate_point,
)
from perspekt.errors import ResourceError

G = float(PHI)
TARGET = Direction((1 / math.hypot(1, G), G / math.hypot(1, G)), projective=False)
SPEC = SolenoidSpec.from_json({"n": 2})


def _single_direction(tr):
    est = estimate_perspective(tr)
    assert len(est.directions) == 1, est.directions
    return est.directions[0]


def test_c01_unique_point_of_perspective(report):
    t0 = time.perf_counter()
    tr = sample_orbit(Linear((1, G)), SPEC, t_end=1e4, dt=1e-2)
    est = estimate_perspective(tr)
    elapsed = time.perf_counter() - t0
    err = est.directions[0].angle_to(TARGET) if est.directions else math.inf
    ok = len(est.directions) == 1 and err < 2e-3 and elapsed < 5
    report(1, "unique point of perspective of a linear flow", ok, f"clusters={len(est.directions)} err={err:.2e} rad time={elapsed:.2f}s")


def test_c02_time_change_invariance(report):
    flow = TimeChanged(Linear((1, G)), sine_rate(0.45, (1, 0)))
    tr = sample_orbit(flow, SPEC, t_end=1e4, dt=1e-2)
    est = estimate_perspective(tr)
    err = est.directions[0].angle_to(TARGET) if est.directions else math.inf
    ok = len(est.directions) == 1 and err < 5e-3
    report(2, "rotation class invariant under time change", ok, f"clusters={len(est.directions)} err={err:.2e} rad")


def test_c03_translation_insensitivity(report):
    rng = np.random.default_rng(3)
    dirs = []
    for _ in range(5):
        start = tuple(rng.uniform(-10, 10, size=2))
        tr = sample_orbit(Linear((1, G)), SPEC, t_end=1e4, dt=1e-2, start=start)
        dirs.append(_single_direction(tr))
    worst = max(a.angle_to(b) for a, b in itertools.combinations(dirs, 2))
    report(3, "estimates agree across start offsets", worst < 5e-3, f"max pairwise {worst:.2e} rad")


def _random_slope(rng, d=None):
    p = int(rng.integers(-9, 10))
    q = int(rng.integers(1, 10))
    d = d if d is not None else int(rng.choice([2, 3, 5, 7]))
    r = int(rng.integers(1, 10))
    return Q(p, q, d, r)


def _pairs():
    """200 seeded pairs: 100 independent, 100 with a partner found equivalent by brute search."""
    rng = np.random.default_rng(20240611)
    pairs = [(_random_slope(rng), _random_slope(rng)) for _ in range(100)]
    while len(pairs) < 200:
        x = _random_slope(rng)
        for _ in range(5000):
            y = _random_slope(rng, x.d)
            if y != x and gl2z_brute_witness(x, y, 15) is not None:
                pairs.append((x, y))
                break
    return pairs


PAIRS = _pairs()


def _verdict(x, y):
    return rotclass_equal_torus(rotation_class_of_linear_torus((1, x)), rotation_class_of_linear_torus((1, y)))


def test_c04_exact_equivalence_vs_oracle(report):
    t0 = time.perf_counter()
    disagreements, bad_witness, resolved, equivalent = 0, 0, 0, 0
    for x, y in PAIRS:
        v = _verdict(x, y)
        brute = gl2z_brute_witness(x, y, 15)
        if brute is not None:
            resolved += 1
            disagreements += v.status != "equivalent"
        if v:
            equivalent += 1
            w = v.witness
            if abs(det(w)) != 1 or mobius_apply(mobius_of_matrix(w), x) != y:
                bad_witness += 1
        elif v.status != "not_equivalent":
            disagreements += 1
    elapsed = time.perf_counter() - t0
    ok = disagreements == 0 and bad_witness == 0 and elapsed < 60
    report(4, "exact equivalence agrees with the brute-force oracle", ok,
           f"{resolved} oracle-resolved, {equivalent} equivalent, {disagreements} disagreements, {bad_witness} bad witnesses, {elapsed:.2f}s")


def test_c05_chain_coherence(report):
    agree = 0
    for x, y in PAIRS:
        c = equal_up_to_constant(exponent_group_linear((1, x)), exponent_group_linear((1, y)))
        agree += (c is not None) == bool(_verdict(x, y))
    report(5, "equal_up_to_constant succeeds iff rotation classes agree", agree == len(PAIRS), f"{agree}/{len(PAIRS)} agree")


def test_c06_denjoy_semiconjugacy(report):
    alpha = SQRT2 - 1
    h = denjoy_build(alpha, Fraction(1, 3), Fraction(1, 10), 40)
    rng = np.random.default_rng(6)
    ys = [Fraction(int(k), 10**12) for k in rng.integers(0, 10**12, size=1000)]
    defect = 0
    for y in ys:
        diff = denjoy_sigma(h, denjoy_apply(h, y)) - denjoy_sigma(h, y) - alpha
        defect = max(defect, abs(diff - round(float(diff))))
    tau = h.tail_bound
    rho = rotation_number_estimate(h, 10**5)
    rho_err = abs(rho - float(alpha))
    ok = defect <= 2 * tau and rho_err < 1e-4
    report(6, "Denjoy map is semiconjugate to the rotation", ok,
           f"exact={h.exact} defect={float(defect):.1e} 2tau={float(2 * tau):.1e} rotation error={rho_err:.1e}")


def test_c07_exponent_groups(report):
    alpha = SQRT2 - 1
    h = denjoy_build(alpha, Fraction(1, 3), Fraction(1, 10), 40)
    checks = [
        exponent_group_of_spec(DenjoySuspension(h, 1)) == exponent_group([1, alpha]),
        equal_up_to_constant(exponent_group([1, PHI]), exponent_group([1, 1 / PHI])) == 1,
        equal_up_to_constant(exponent_group([2, 2 * PHI]), exponent_group([1, PHI])) == 2,
        equal_up_to_constant(exponent_group([1, PHI]), exponent_group([1, SQRT2])) is None,
    ]
    report(7, "exponent groups and constants", all(checks), f"{sum(checks)}/4 checks")


def _prefix(spec, depth):
    return SolenoidSpec(spec.n, tuple(spec.matrix(j) for j in range(1, depth)), False, depth)


def test_c08_covering_consistency(report):
    rng = np.random.default_rng(8)
    specs = [random_spec(rng, depth=8, max_entry=3) for _ in range(5)]
    # random specs whose full fiber is small enough to enumerate
    while len(specs) < 10:
        s = random_spec(rng, depth=8, max_entry=3)
        if fiber_size(s) <= 10**4:
            specs.append(s)
    exact_bad = float_worst = 0
    fiber_ok, full_enumerated = True, 0
    for spec in specs:
        for _ in range(100):
            s = [Fraction(int(rng.integers(-500, 500)), int(rng.integers(1, 60))) for _ in range(2)]
            ok, defect = validate_point(covering_point(spec, s))
            exact_bad += not ok or defect != 0
            ok, defect = validate_point(covering_point(spec, [float(x) for x in s]))
            float_worst = max(float_worst, defect)
        expected = math.prod(abs(det(m)) for m in spec.bonding())
        if expected <= FIBER_CAP:
            fiber_ok &= len(fiber_enumerate(spec)) == expected
            full_enumerated += 1
        else:
            # too many points to list: the deepest enumerable prefix must still count right
            try:
                fiber_enumerate(spec)
                fiber_ok = False
            except ResourceError:
                pass
            depth = max(j for j in range(1, 9) if fiber_size(_prefix(spec, j)) <= FIBER_CAP)
            pre = _prefix(spec, depth)
            fiber_ok &= len(fiber_enumerate(pre)) == math.prod(abs(det(m)) for m in pre.bonding())
    ok = exact_bad == 0 and float_worst < 1e-9 and fiber_ok
    report(8, "covering points satisfy the bonding relations", ok,
           f"exact failures={exact_bad} float defect={float_worst:.1e} fibers ok={fiber_ok} ({full_enumerated}/{len(specs)} full depth)")


def test_c09_compactification_roundtrip(report):
    rng = np.random.default_rng(9)
    dirs = rng.normal(size=(10**4, 2))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]
    radii = 10 ** rng.uniform(-6, 6, size=10**4)
    x = dirs * radii[:, None]
    images = [compactify(v) for v in x]
    back = np.array([decompactify(p) for p in images])
    rel = np.linalg.norm(back - x, axis=1) / np.linalg.norm(x, axis=1)
    interior = all(p.norm < 1 for p in images)
    ok = float(rel.max()) < 1e-12 and interior
    report(9, "compactification round trip", ok, f"max relative error {rel.max():.1e}, interior={interior}")


def test_c10_figure_reproduction(report, tmp_path):
    phi = {"p": 1, "q": 1, "d": 5, "r": 2}
    payload = {
        "grid": True,
        "orbits": [
            {"flow": {"type": "linear", "omega": [1, phi]}, "t_end": 200, "dt": 0.01},
            {"flow": {"type": "linear", "omega": [1, phi]}, "start": [0.5, 0.0], "t_end": 200, "dt": 0.01},
        ],
    }
    src = tmp_path / "figure.json"
    src.write_text(json.dumps(payload))
    outputs = []
    for i in range(2):
        dst = tmp_path / f"figure{i}.svg"
        proc = subprocess.run([sys.executable, "-m", "perspekt.cli", "plot-disc", str(src), "-o", str(dst)], capture_output=True)
        assert proc.returncode == 0, proc.stderr
        outputs.append(dst.read_bytes())
    stable = outputs[0] == outputs[1]
    radii = [math.hypot(*map(float, pair.split(",")))
             for pts in re.findall(r'points="([^"]*)"', outputs[0].decode()) for pair in pts.split()]
    inside = max(radii) <= 1 + 1e-9
    orbits = outputs[0].count(b'class="orbit"')
    report(10, "plot-disc figure is byte-stable and inside the disc", stable and inside and orbits == 2,
           f"{len(outputs[0])} bytes, {orbits} orbits, max radius {max(radii):.6f}")
