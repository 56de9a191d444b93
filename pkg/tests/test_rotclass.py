import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from perspekt.errors import DomainError, ResourceError
from perspekt.flows import Linear, TimeChanged, sample_orbit, sine_rate
from perspekt.intlinalg import Direction, IntMatrix, det, hat_action
from perspekt.numberlab import PHI, SQRT2, QuadraticIrrational as Q, gl2z_brute_witness, mobius_apply
from perspekt.perspective import estimate_perspective
from perspekt.rotclass import (
    RotationClassDescriptor,
    matrix_of_mobius,
    mobius_of_matrix,
    orbit_enumerate,
    rotation_class_from_estimate,
    rotation_class_of_linear_torus,
    rotclass_equal_bounded,
    rotclass_equal_torus,
)
from perspekt.solenoid import torus_spec

ROT = IntMatrix.of([[0, -1], [1, 0]])
SHEAR = IntMatrix.of([[1, 1], [0, 1]])

surds = st.builds(Q, st.integers(-9, 9), st.integers(1, 9), st.sampled_from([2, 3, 5, 7]), st.integers(1, 9))


def as_set(dirs):
    return sorted(tuple(round(x, 9) for x in d.v) for d in dirs)


def test_descriptor_examples():
    a = rotation_class_of_linear_torus((1, PHI))
    assert a.exact_slope == PHI
    assert a.base_points[0].close_to(Direction((1, float(PHI))))
    v = rotation_class_of_linear_torus((0, 1))
    assert v.slope_swapped and v.exact_slope == 0
    neg = rotation_class_of_linear_torus((-1, -PHI))
    assert neg.base_points[0].close_to(a.base_points[0]) and neg.exact_slope == PHI
    with pytest.raises(DomainError):
        rotation_class_of_linear_torus((1, 1.5), exact_slope=SQRT2)
    assert rotation_class_of_linear_torus((1.0, 0.5)).exact_slope is None


def test_torus_examples():
    v = rotclass_equal_torus(rotation_class_of_linear_torus((1, PHI)), rotation_class_of_linear_torus((1, 1 / PHI)))
    assert v.status == "equivalent" and v.witness.to_list() == [[0, 1], [1, 0]]
    v = rotclass_equal_torus(rotation_class_of_linear_torus((1, PHI)), rotation_class_of_linear_torus((1, SQRT2)))
    assert v.status == "not_equivalent"
    assert v.certificate == {"period_a": [1], "period_b": [2]}
    assert gl2z_brute_witness(PHI, SQRT2, 20) is None
    v = rotclass_equal_torus(rotation_class_of_linear_torus((1, 2)), rotation_class_of_linear_torus((1, 3)))
    assert v.status == "equivalent" and v.witness.to_list() == [[1, 0], [1, 1]]


def test_rational_and_mixed():
    v = rotclass_equal_torus(rotation_class_of_linear_torus((0, 1)), rotation_class_of_linear_torus((5, 3)))
    assert v and abs(det(v.witness)) == 1
    assert tuple(v.witness @ (0, 1)) in ((5, 3), (-5, -3))
    v = rotclass_equal_torus(rotation_class_of_linear_torus((1, 2)), rotation_class_of_linear_torus((1, PHI)))
    assert v.status == "not_equivalent"


def test_inexact_is_bounded_semidecision():
    g = float(PHI)
    v = rotclass_equal_torus(rotation_class_of_linear_torus((1.0, g)), rotation_class_of_linear_torus((1.0, 1 / g)))
    assert v.status == "equivalent"
    v = rotclass_equal_torus(rotation_class_of_linear_torus((1.0, g)), rotation_class_of_linear_torus((1.0, math.sqrt(2))))
    assert v.status == "unknown" and v.bound == 15


@given(surds, surds)
def test_torus_agrees_with_brute_oracle(x, y):
    verdict = rotclass_equal_torus(rotation_class_of_linear_torus((1, x)), rotation_class_of_linear_torus((1, y)))
    brute = gl2z_brute_witness(x, y, 15)
    if brute is not None:
        assert verdict.status == "equivalent"
    if verdict:
        w = mobius_of_matrix(verdict.witness)
        assert mobius_apply(w, x) == y
        size = max(abs(e) for row in verdict.witness.to_list() for e in row)
        img = hat_action(verdict.witness, Direction((1, float(x))))
        assert img.angle_to(Direction((1, float(y)))) < 1e-14 * size**2 + 1e-12
    else:
        assert verdict.status == "not_equivalent"


def test_mobius_matrix_roundtrip():
    w = IntMatrix.of([[2, 1], [1, 1]])
    assert matrix_of_mobius(mobius_of_matrix(w)) == w


def test_orbit_examples():
    base = [Direction((1, 0))]
    assert as_set(orbit_enumerate(base, [IntMatrix.identity(2)], 5)) == as_set(base)
    assert as_set(orbit_enumerate(base, [ROT], 4)) == as_set([Direction((1, 0)), Direction((0, 1))])
    # the shear fixes (1, 0); its orbit through (0, 1) fans out one step per letter
    assert as_set(orbit_enumerate(base, [SHEAR], 3)) == as_set(base)
    got = orbit_enumerate([Direction((0, 1))], [SHEAR], 3)
    want = [Direction((k, 1)) for k in range(-3, 4)]
    assert as_set(got) == as_set(want)


def test_orbit_monotone_and_cap():
    base = [Direction((1, float(PHI)))]
    prev = set()
    for n in range(5):
        cur = set(as_set(orbit_enumerate(base, [SHEAR, ROT], n)))
        assert prev <= cur
        prev = cur
    with pytest.raises(ResourceError) as info:
        orbit_enumerate(base, [SHEAR, ROT], 12, cap=50)
    assert len(info.value.partial) > 50


def test_bounded_examples():
    a = RotationClassDescriptor((Direction((1, 0)),), (ROT,))
    b = RotationClassDescriptor((Direction((0, 1)),), (ROT,))
    same = rotclass_equal_bounded(a, a, 3)
    assert same and same.word == ()
    v = rotclass_equal_bounded(a, b, 3)
    assert v and len(v.word) == 1 and hat_action(v.witness, Direction((1, 0))).close_to(Direction((0, 1)))
    a = RotationClassDescriptor((Direction((1, float(PHI))),), (SHEAR, ROT))
    b = RotationClassDescriptor((Direction((1, float(SQRT2))),), (SHEAR, ROT))
    assert rotclass_equal_bounded(a, b, 6).status == "unknown"
    with pytest.raises(DomainError):
        rotclass_equal_bounded(a, RotationClassDescriptor((Direction((1, 0)),), (ROT,)), 2)


def test_bounded_witness_verifies():
    a = RotationClassDescriptor((Direction((1, float(PHI))),), (SHEAR, ROT))
    target = hat_action(SHEAR @ SHEAR @ ROT, a.base_points[0])
    v = rotclass_equal_bounded(a, RotationClassDescriptor((target,), (SHEAR, ROT)), 4)
    assert v and hat_action(v.witness, a.base_points[0]).close_to(target)


def test_descriptor_invariant_under_time_change_and_translation():
    g = float(PHI)
    base = sample_orbit(Linear((1, g)), torus_spec(2), t_end=2e3, dt=1e-2)
    tc = sample_orbit(TimeChanged(Linear((1, g)), sine_rate(0.45, (1, 0))), torus_spec(2), t_end=2e3, dt=1e-2)
    moved = sample_orbit(Linear((1, g)), torus_spec(2), t_end=2e3, dt=1e-2, start=(0.4, 3.1))
    d0 = rotation_class_from_estimate(estimate_perspective(base))
    for tr in (tc, moved):
        d1 = rotation_class_from_estimate(estimate_perspective(tr))
        assert d1.base_points[0].angle_to(d0.base_points[0]) < 5e-3
