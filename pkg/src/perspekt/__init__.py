"""Invariants of flows on tori and solenoids.

Simulation of linear, time-changed and Denjoy-suspension flows, the disc
compactification of leaves, points of perspective, rotation classes and
exponent groups, backed by exact continued-fraction arithmetic.
"""

from .denjoy import DenjoyHomeo, denjoy_apply, denjoy_build, denjoy_lift, denjoy_sigma, rotation_number_estimate
from .errors import DomainError, PerspektError, PreconditionError, ResourceError, UnsupportedError
from .exponents import ExponentGroup, Undefined, equal_up_to_constant, exponent_group, exponent_group_linear, exponent_group_of_spec
from .flows import DenjoySuspension, Linear, RateFunction, TimeChanged, Trajectory, constant_rate, lift_path, sample_orbit, sine_rate
from .intlinalg import Direction, IntMatrix, det, hat_action, inverse_rational
from .numberlab import (
    PHI,
    SQRT2,
    ContinuedFraction,
    Mobius,
    QuadraticIrrational,
    cf_expand,
    cf_quadratic_exact,
    common_tail,
    convergent,
    gl2z_brute_witness,
    gl2z_equivalent,
    gl2z_witness,
    mobius_apply,
)
from .perspective import DiscPoint, PerspectiveEstimate, compactify, decompactify, estimate_perspective
from .rotclass import (
    EquivalenceVerdict,
    RotationClassDescriptor,
    orbit_enumerate,
    rotation_class_from_estimate,
    rotation_class_of_linear_torus,
    rotclass_equal_bounded,
    rotclass_equal_torus,
)
from .solenoid import (
    SolenoidPoint,
    SolenoidSpec,
    add_points,
    covering_point,
    fiber_enumerate,
    fiber_size,
    identity_point,
    torus_spec,
    validate_point,
)
from .svg import render_disc_svg

__version__ = "0.1.0"
