"""Command-line interface: ``perspekt <verb> INPUT.json [options]``.

Exit codes: 0 success, 2 malformed input (schema or JSON), 3 numeric
precondition or domain violation, 4 resource cap exceeded.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

import numpy as np
from jsonschema import Draft202012Validator

from .denjoy import denjoy_apply, denjoy_build, denjoy_sigma, rotation_number_estimate
from .errors import DomainError, PreconditionError, ResourceError, UnsupportedError
from .exponents import ExponentGroup, equal_up_to_constant, exponent_group_of_spec
from .flows import DenjoySuspension, Linear, TimeChanged, constant_rate, sample_orbit, sine_rate
from .intlinalg import Direction, IntMatrix
from .numberlab import QuadraticIrrational
from .perspective import estimate_perspective
from .rotclass import orbit_enumerate, rotation_class_of_linear_torus, rotclass_equal_torus
from .solenoid import (
    SolenoidPoint,
    SolenoidSpec,
    covering_point,
    fiber_enumerate,
    fiber_size,
    torus_spec,
    validate_point,
)
from .svg import render_disc_svg

EXIT_SCHEMA, EXIT_PRECONDITION, EXIT_RESOURCE = 2, 3, 4

# -- schemas ------------------------------------------------------------------

NUMBER = {
    "oneOf": [
        {"type": "number"},
        {"type": "string", "pattern": r"^\s*-?\d+(\s*/\s*\d+)?\s*$"},
        {
            "type": "object",
            "properties": {**{k: {"type": "integer"} for k in "pqdr"}, "value": {"type": "number"}},
            "required": ["p"],
            "additionalProperties": False,
        },
    ]
}
VECTOR = {"type": "array", "items": NUMBER, "minItems": 2}
MATRIX = {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}, "minItems": 2}

SOLENOID = {
    "type": "object",
    "properties": {
        "n": {"type": "integer", "minimum": 2},
        "matrices": {"type": "array", "items": MATRIX},
        "repeat": {"type": "boolean"},
        "depth": {"type": "integer", "minimum": 1},
    },
    "required": ["n"],
    "additionalProperties": False,
}

RATE = {
    "type": "object",
    "properties": {
        "kind": {"enum": ["constant", "sine"]},
        "value": {"type": "number", "exclusiveMinimum": 0},
        "amplitude": {"type": "number"},
        "k": {"type": "array", "items": {"type": "number"}},
        "phase": {"type": "number"},
    },
    "required": ["kind"],
    "additionalProperties": False,
}

FLOW = {
    "type": "object",
    "properties": {
        "type": {"enum": ["linear", "timechange", "denjoy_suspension"]},
        "omega": VECTOR,
        "base": {"$ref": "#/$defs/flow"},
        "rate": RATE,
        "alpha": NUMBER,
        "lam": NUMBER,
        "c": NUMBER,
        "N": {"type": "integer", "minimum": 0},
        "return_time": NUMBER,
    },
    "required": ["type"],
    "allOf": [
        {"if": {"properties": {"type": {"const": "linear"}}}, "then": {"required": ["omega"]}},
        {"if": {"properties": {"type": {"const": "timechange"}}}, "then": {"required": ["base", "rate"]}},
        {"if": {"properties": {"type": {"const": "denjoy_suspension"}}}, "then": {"required": ["alpha"]}},
    ],
    "additionalProperties": False,
}

ORBIT_RUN = {
    "flow": {"$ref": "#/$defs/flow"},
    "solenoid": SOLENOID,
    "start": VECTOR,
    "t_end": {"type": "number", "exclusiveMinimum": 0},
    "dt": {"type": "number", "exclusiveMinimum": 0},
}


def _schema(properties: dict, required: list) -> dict:
    return {
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "$defs": {"flow": FLOW},
        "type": "object",
        "properties": properties,
        "required": required,
        "additionalProperties": False,
    }


CLASS_INPUT = {
    "type": "object",
    "properties": {"slope": NUMBER, "omega": VECTOR},
    "oneOf": [{"required": ["slope"]}, {"required": ["omega"]}],
    "additionalProperties": False,
}

SCHEMAS = {
    "simulate": _schema(ORBIT_RUN, ["flow"]),
    "perspective": _schema(
        {
            **ORBIT_RUN,
            "window_fraction": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            "angular_tol": {"type": "number", "exclusiveMinimum": 0},
            "direction": {"enum": ["forward", "backward"]},
        },
        ["flow"],
    ),
    "equiv-linear": _schema({"a": CLASS_INPUT, "b": CLASS_INPUT}, ["a", "b"]),
    "orbit": _schema(
        {
            "base": {"type": "array", "items": {"type": "array", "items": {"type": "number"}, "minItems": 2}, "minItems": 1},
            "generators": {"type": "array", "items": MATRIX},
            "max_word_length": {"type": "integer", "minimum": 0},
            "projective": {"type": "boolean"},
            "cap": {"type": "integer", "minimum": 1},
        },
        ["base", "generators", "max_word_length"],
    ),
    "denjoy": _schema(
        {
            "alpha": NUMBER,
            "lam": NUMBER,
            "c": NUMBER,
            "N": {"type": "integer", "minimum": 0},
            "samples": {"type": "integer", "minimum": 1},
            "iterations": {"type": "integer", "minimum": 1},
            "seed": {"type": "integer"},
        },
        ["alpha"],
    ),
    "exponents": _schema(
        {
            "flow": {"$ref": "#/$defs/flow"},
            "groups": {"type": "array", "items": {"type": "array", "items": NUMBER, "minItems": 1}, "minItems": 1, "maxItems": 2},
        },
        [],
    ),
    "solenoid-check": _schema(
        {
            "solenoid": SOLENOID,
            "s": VECTOR,
            "coords": {"type": "array", "items": VECTOR},
            "fiber": {"type": "boolean"},
            "list_limit": {"type": "integer", "minimum": 0},
        },
        ["solenoid"],
    ),
    "plot-disc": _schema(
        {
            "solenoid": SOLENOID,
            "orbits": {
                "type": "array",
                "items": {"type": "object", "properties": ORBIT_RUN, "required": ["flow"], "additionalProperties": False},
            },
            "grid": {"type": "boolean"},
            "max_points": {"type": "integer", "minimum": 2},
        },
        ["orbits"],
    ),
}


class InputError(Exception):
    """Malformed input; reported with exit code 2."""


def validate(verb: str, data) -> None:
    errors = sorted(Draft202012Validator(SCHEMAS[verb]).iter_errors(data), key=lambda e: [str(p) for p in e.absolute_path])
    if errors:
        e = errors[0]
        path = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise InputError(f"{path}: {e.message}")


# -- decoding -----------------------------------------------------------------


def parse_number(x):
    """JSON number -> float or int, "a/b" -> Fraction, {p,q,d,r} -> QuadraticIrrational."""
    if isinstance(x, dict):
        return QuadraticIrrational(x["p"], x.get("q", 0), x.get("d", 1), x.get("r", 1))
    if isinstance(x, str):
        f = Fraction(x.replace(" ", ""))
        return f.numerator if f.denominator == 1 else f
    return x


def encode_number(x):
    if isinstance(x, QuadraticIrrational):
        if x.q:
            return x.to_json()
        x = Fraction(x.p, x.r)
    if isinstance(x, Fraction) and x.denominator == 1:
        return x.numerator
    if isinstance(x, Fraction):
        return str(x)
    return x


def parse_flow(data: dict):
    kind = data["type"]
    if kind == "linear":
        return Linear(tuple(parse_number(w) for w in data["omega"]))
    if kind == "timechange":
        r = data["rate"]
        if r["kind"] == "constant":
            rate = constant_rate(r.get("value", 1.0))
        else:
            rate = sine_rate(r.get("amplitude", 0.0), r.get("k", [1.0, 0.0]), r.get("phase", 0.0))
        return TimeChanged(parse_flow(data["base"]), rate)
    h = denjoy_build(
        parse_number(data["alpha"]),
        parse_number(data.get("lam", "1/3")),
        parse_number(data.get("c", "1/10")),
        data.get("N", 40),
    )
    return DenjoySuspension(h, parse_number(data.get("return_time", 1)))


def _flow_dim(flow) -> int:
    while isinstance(flow, TimeChanged):
        flow = flow.base
    return len(flow.omega) if isinstance(flow, Linear) else 2


def _orbit(data: dict, args=None, backward: bool = False):
    flow = parse_flow(data["flow"])
    spec = SolenoidSpec.from_json(data["solenoid"]) if "solenoid" in data else torus_spec(_flow_dim(flow))
    t_end = getattr(args, "t_end", None) or data.get("t_end", 10.0)
    dt = getattr(args, "dt", None) or data.get("dt", 0.01)
    start = data.get("start")
    if start is not None:
        start = [float(parse_number(v)) for v in start]
        x0 = covering_point(spec, start)
    else:
        x0 = None
    if backward:
        return sample_orbit(flow, spec, x0, 0.0, dt, t_start=-t_end, start=start)
    return sample_orbit(flow, spec, x0, t_end, dt, start=start)


def _threads() -> int:
    raw = os.environ.get("PERSPEKT_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise InputError(f"PERSPEKT_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise InputError(f"PERSPEKT_THREADS must be a positive integer, got {raw!r}")
    return n


# -- verbs --------------------------------------------------------------------


def cmd_simulate(data, args):
    traj = _orbit(data, args)
    n = traj.lifted.shape[1]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"base_{i}" for i in range(1, n + 1)] + [f"lift_{i}" for i in range(1, n + 1)] + [f"disc_{i}" for i in range(1, n + 1)])
    rows = np.column_stack([traj.times, traj.base_points, traj.lifted, traj.disc])
    for row in rows:
        w.writerow(["%.15g" % v for v in row])
    return buf.getvalue()


def cmd_perspective(data, args):
    direction = "backward" if args.backward else data.get("direction", "forward")
    traj = _orbit(data, args, backward=direction == "backward")
    est = estimate_perspective(
        traj,
        data.get("window_fraction", 0.2),
        data.get("angular_tol", 1e-2),
        direction,
        workers=_threads(),
    )
    return est.to_json()


def _class(d: dict):
    if "slope" in d:
        s = parse_number(d["slope"])
        return rotation_class_of_linear_torus((1, s))
    return rotation_class_of_linear_torus(tuple(parse_number(w) for w in d["omega"]))


def cmd_equiv_linear(data, args):
    return rotclass_equal_torus(_class(data["a"]), _class(data["b"])).to_json()


def cmd_orbit(data, args):
    proj = data.get("projective", True)
    base = [Direction(tuple(v), proj) for v in data["base"]]
    gens = [IntMatrix.of(m) for m in data["generators"]]
    dirs = orbit_enumerate(base, gens, data["max_word_length"], cap=data.get("cap", 10**5))
    return {"count": len(dirs), "directions": [list(d.v) for d in dirs]}


def cmd_denjoy(data, args):
    alpha = parse_number(data["alpha"])
    h = denjoy_build(alpha, parse_number(data.get("lam", "1/3")), parse_number(data.get("c", "1/10")), data.get("N", 40))
    rng = np.random.default_rng(data.get("seed", 0))
    samples = data.get("samples", 1000)
    if h.exact:
        ys = [Fraction(int(k), 10**12) for k in rng.integers(0, 10**12, size=samples)]
        defect = max(abs(_circle(denjoy_sigma(h, denjoy_apply(h, y)) - denjoy_sigma(h, y) - h.alpha)) for y in ys)
    else:
        ys = rng.random(samples)
        diff = denjoy_sigma(h, denjoy_apply(h, ys)) - denjoy_sigma(h, ys) - h.alpha_float
        defect = float(np.max(np.abs(diff - np.round(diff))))
    iterations = data.get("iterations", 10**5)
    rho = rotation_number_estimate(h, iterations)
    tau = h.tail_bound
    return {
        "exact": h.exact,
        "alpha": encode_number(alpha),
        "total_mass": float(h.total_mass),
        "tail_bound": float(tau),
        "semiconjugacy_defect": float(defect),
        "semiconjugacy_ok": bool(defect <= 2 * tau),
        "rotation_estimate": rho,
        "rotation_error": abs(rho - h.alpha_float),
        "iterations": iterations,
        "samples": samples,
    }


def _circle(x):
    """Signed distance to the nearest integer, exact for exact inputs."""
    return x - round(float(x))


def cmd_exponents(data, args):
    out = {}
    if "flow" in data:
        g = exponent_group_of_spec(parse_flow(data["flow"]))
        out["flow"] = g.to_json()
    groups = [ExponentGroup([parse_number(x) for x in gens]) for gens in data.get("groups", [])]
    if groups:
        out["groups"] = [g.to_json() for g in groups]
    if len(groups) == 2:
        c = equal_up_to_constant(groups[0], groups[1])
        out["constant"] = None if c is None else encode_number(c)
        out["equal_up_to_constant"] = c is not None
    if not out:
        raise InputError("<root>: give a flow, groups, or both")
    return out


def cmd_solenoid_check(data, args):
    spec = SolenoidSpec.from_json(data["solenoid"])
    out = {"spec": spec.to_json(), "fiber_size": fiber_size(spec)}
    if "s" in data:
        p = covering_point(spec, [parse_number(v) for v in data["s"]])
        ok, defect = validate_point(p)
        out["point"] = {"exact": p.exact, "valid": ok, "defect": defect, "coords": [[encode_number(x) for x in c] for c in p.coords]}
    if "coords" in data:
        coords = tuple(tuple(_coord(parse_number(x)) for x in c) for c in data["coords"])
        exact = all(isinstance(x, Fraction) for c in coords for x in c)
        p = SolenoidPoint(spec, coords if exact else tuple(tuple(float(x) for x in c) for c in coords), exact)
        ok, defect = validate_point(p)
        out["given"] = {"exact": exact, "valid": ok, "defect": defect}
    if data.get("fiber", False):
        elems = fiber_enumerate(spec)
        limit = data.get("list_limit", 64)
        out["fiber"] = {
            "count": len(elems),
            "all_valid": all(validate_point(e)[0] for e in elems),
            "elements": [[[str(x) for x in c] for c in e.coords] for e in elems[:limit]],
        }
    return out


def _coord(x):
    if isinstance(x, (int, Fraction)):
        return Fraction(x) % 1
    return x


def cmd_plot_disc(data, args):
    trajs = []
    for orbit in data["orbits"]:
        merged = dict(orbit)
        if "solenoid" in data and "solenoid" not in merged:
            merged["solenoid"] = data["solenoid"]
        trajs.append(_orbit(merged))
    spec = SolenoidSpec.from_json(data["solenoid"]) if "solenoid" in data else None
    return render_disc_svg(trajs, spec, data.get("grid", True), data.get("max_points", 4000))


VERBS = {
    "simulate": (cmd_simulate, "sample an orbit and write CSV"),
    "perspective": (cmd_perspective, "estimate points of perspective (JSON)"),
    "equiv-linear": (cmd_equiv_linear, "decide rotation-class equality of two linear torus flows"),
    "orbit": (cmd_orbit, "enumerate directions under automorphism words"),
    "denjoy": (cmd_denjoy, "build a Denjoy homeomorphism and report checks"),
    "exponents": (cmd_exponents, "exponent groups and equality up to a constant"),
    "solenoid-check": (cmd_solenoid_check, "validate points and enumerate fibers"),
    "plot-disc": (cmd_plot_disc, "render orbits in the compactified disc (SVG)"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="perspekt", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb, (_, help_text) in VERBS.items():
        p = sub.add_parser(verb, help=help_text)
        p.add_argument("input", nargs="?", help="JSON input file ('-' for stdin)")
        p.add_argument("-o", "--output", help="write the result here instead of stdout")
        p.add_argument("--print-schema", action="store_true", help="print the input JSON schema and exit")
        if verb in ("simulate", "perspective"):
            p.add_argument("--t-end", type=float, help="override t_end")
            p.add_argument("--dt", type=float, help="override dt")
        if verb == "perspective":
            p.add_argument("--backward", action="store_true", help="use the start of the orbit (backward time)")
    return parser


def _load(path):
    if path is None:
        raise InputError("<input>: an input file is required")
    try:
        if path == "-":
            return json.load(sys.stdin)
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"<input>: {exc}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"<input>: invalid JSON ({exc})") from None


def _emit(result, path):
    text = result if isinstance(result, str) else json.dumps(result, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.print_schema:
        _emit(SCHEMAS[args.verb], args.output)
        return 0
    func = VERBS[args.verb][0]
    try:
        _threads()
        data = _load(args.input)
        validate(args.verb, data)
        result = func(data, args)
    except InputError as exc:
        print(f"perspekt: invalid input: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (PreconditionError, DomainError, UnsupportedError) as exc:
        print(f"perspekt: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ResourceError as exc:
        print(f"perspekt: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    _emit(result, args.output)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
