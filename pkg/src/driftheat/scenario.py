"""Scenario files: a versioned INI dialect.

Example::

    [scenario]
    schema = 1
    name = constant-n1
    checks = classical, critical

    [model]
    kind = euclidean
    n = 1

    [initial]
    type = row
    row = 1

Every section and key is validated; anything unknown is a configuration
error rather than a silent skip.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .bounds import CLOSED_FORM_TOL, NUMERIC_TOL, Schedule, default_times
from .errors import ConfigurationError
from .models import Kind, SolitonModel, make_model, perturb_potential
from .oracles import FDGrid
from .spectral import (
    GaussianProfile,
    HermiteField,
    constant_field,
    linear_field,
    potential_field,
)

SCHEMA_VERSION = 1


def _float(text):
    try:
        return float(text)
    except ValueError:
        raise ConfigurationError(f"not a number: {text!r}") from None


def _int(text):
    try:
        return int(text)
    except ValueError:
        raise ConfigurationError(f"not an integer: {text!r}") from None


def _floats(text):
    return tuple(_float(p) for p in _split(text))


def _names(text):
    return tuple(p.lower() for p in _split(text))


def _split(text):
    return [p.strip() for p in text.split(",") if p.strip()]


def _str(text):
    return text.strip()


# section -> key -> parser
SCHEMA = {
    "scenario": {"schema": _int, "name": _str, "checks": _names, "seed": _int},
    "model": {"kind": _str, "n": _int, "potential_shift": _float},
    "initial": {
        "type": _str,
        "row": _int,
        "c": _floats,
        "family": _str,
        "coefficients": _str,
        "degree": _int,
    },
    "schedule": {"gamma": _str, "mu": _str, "alpha": _float, "gamma0": _float, "epsilon": _float},
    "times": {"t_max": _float, "points": _int, "values": _floats},
    "quadrature": {"order": _int},
    "fd": {"length": _float, "nodes": _int, "dt": _float},
    "tolerances": {"closed_form": _float, "numeric": _float},
    "sweep": {
        "c_values": _floats,
        "gamma_values": _floats,
        "epsilon_values": _floats,
        "tau_values": _floats,
        "t": _float,
        "batches": _int,
        "count": _int,
    },
}


@dataclass(frozen=True)
class Scenario:
    name: str = "default"
    kind: str = "euclidean"
    n: int = 1
    potential_shift: float = 0.0
    initial: dict = field(default_factory=lambda: {"type": "row", "row": 1})
    schedule: Schedule = field(default_factory=Schedule.critical)
    times: tuple = ()
    order: int = 60
    fd: FDGrid = field(default_factory=FDGrid)
    closed_form_tol: float = CLOSED_FORM_TOL
    numeric_tol: float = NUMERIC_TOL
    seed: int = 0
    checks: tuple = ()
    sweep: dict = field(default_factory=dict)
    source: str = "<defaults>"

    @property
    def model(self) -> SolitonModel:
        base = make_model(self.kind, self.n)
        if self.potential_shift:
            return perturb_potential(base, self.potential_shift)
        return base

    def time_grid(self):
        return list(self.times) if self.times else default_times()

    def with_seed(self, seed):
        return replace(self, seed=int(seed))

    def echo(self) -> dict:
        """Plain-data copy for reports."""
        return {
            "name": self.name,
            "source": self.source,
            "model": {"kind": Kind.parse(self.kind).value, "n": self.n, "potential_shift": self.potential_shift},
            "initial": dict(sorted(self.initial.items())),
            "schedule": self.schedule.describe(),
            "times": [float(t) for t in self.time_grid()],
            "order": self.order,
            "fd": {"length": self.fd.length, "nodes": self.fd.nodes, "dt": self.fd.dt},
            "tolerances": {"closed_form": self.closed_form_tol, "numeric": self.numeric_tol},
            "seed": self.seed,
            "checks": list(self.checks),
            "sweep": {k: list(v) if isinstance(v, tuple) else v for k, v in sorted(self.sweep.items())},
        }


def parse_scenario(text: str, source: str = "<string>") -> Scenario:
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__", inline_comment_prefixes=("#",))
    try:
        cp.read_string(text, source=source)
    except configparser.Error as exc:
        raise ConfigurationError(f"{source}: {exc}") from None

    raw = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigurationError(f"{source}: unknown section [{section}]")
        raw[section] = {}
        for key, value in cp.items(section):
            if key not in SCHEMA[section]:
                raise ConfigurationError(f"{source}: unknown key {key!r} in [{section}]")
            raw[section][key] = SCHEMA[section][key](value)

    head = raw.get("scenario", {})
    if "schema" not in head:
        raise ConfigurationError(f"{source}: [scenario] schema is required")
    if head["schema"] != SCHEMA_VERSION:
        raise ConfigurationError(f"{source}: schema {head['schema']} not supported (expected {SCHEMA_VERSION})")

    model = raw.get("model", {})
    kind = model.get("kind", "euclidean")
    n = model.get("n", 1)
    make_model(kind, n)  # validates

    sched = raw.get("schedule", {})
    try:
        schedule = Schedule(
            sched.get("gamma", "critical"),
            sched.get("mu", "exp_decay"),
            sched.get("alpha", 1.0),
            sched.get("gamma0", 1.0),
            sched.get("epsilon", 0.0),
        )
    except ValueError as exc:
        raise ConfigurationError(f"{source}: {exc}") from None

    tsec = raw.get("times", {})
    if "values" in tsec:
        times = tuple(sorted(tsec["values"]))
        if any(t < 0 for t in times):
            raise ConfigurationError("times must be nonnegative")
    else:
        t_max = tsec.get("t_max", 5.0)
        points = tsec.get("points", 40)
        if t_max <= 0 or points < 1:
            raise ConfigurationError("t_max must be positive and points >= 1")
        times = tuple(float(t) for t in default_times(t_max, points))
    schedule.validate(times)

    fdsec = raw.get("fd", {})
    grid = FDGrid(fdsec.get("length", 12.0), fdsec.get("nodes", 2001), fdsec.get("dt", 1e-3))

    tol = raw.get("tolerances", {})
    closed = tol.get("closed_form", CLOSED_FORM_TOL)
    numeric = tol.get("numeric", NUMERIC_TOL)
    if not (closed > 0 and numeric > 0):
        raise ConfigurationError("tolerances must be positive")

    order = raw.get("quadrature", {}).get("order", 60)
    if order < 1:
        raise ConfigurationError("quadrature order must be >= 1")

    initial = raw.get("initial", {"type": "row", "row": 1})
    sc = Scenario(
        name=head.get("name", "unnamed"),
        kind=kind,
        n=n,
        potential_shift=model.get("potential_shift", 0.0),
        initial=initial,
        schedule=schedule,
        times=times,
        order=order,
        fd=grid,
        closed_form_tol=closed,
        numeric_tol=numeric,
        seed=head.get("seed", 0),
        checks=head.get("checks", ()),
        sweep=raw.get("sweep", {}),
        source=source,
    )
    build_initial(sc)  # surfaces bad initial data as a config error
    from .checks import validate_check_names

    validate_check_names(sc.checks)
    return sc


def load_scenario(path) -> Scenario:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config: {exc}") from None
    return parse_scenario(text, str(path))


# --- initial data -----------------------------------------------------------


def _parse_coefficients(text, model):
    """``"0,0:1.0; 2,0:0.5"`` -> ``{(0, 0): 1.0, (2, 0): 0.5}``."""
    coeffs = {}
    for item in text.split(";"):
        item = item.strip()
        if not item:
            continue
        if ":" not in item:
            raise ConfigurationError(f"coefficient entry {item!r} needs 'index:value'")
        idx, val = item.split(":", 1)
        key = tuple(_int(p) for p in _split(idx))
        coeffs[key] = coeffs.get(key, 0.0) + _float(val)
    if not coeffs:
        raise ConfigurationError("empty coefficient list")
    return HermiteField(model, coeffs)


def _eigen_row(model, degree):
    keys = [k for k in np.ndindex(*(degree + 1,) * model.n) if sum(k) == degree]
    return HermiteField(model, {k: 1.0 for k in keys})


def build_initial(sc: Scenario):
    """Initial data object (HermiteField or GaussianProfile) for a scenario."""
    init = sc.initial
    typ = str(init.get("type", "row")).lower()
    model = make_model(sc.kind, sc.n)
    allowed = {
        "row": {"type", "row", "c", "degree"},
        "hermite": {"type", "coefficients"},
        "gaussian": {"type", "family", "c"},
    }
    if typ not in allowed:
        raise ConfigurationError(f"unknown initial type {typ!r}")
    extra = set(init) - allowed[typ]
    if extra:
        raise ConfigurationError(f"keys {sorted(extra)} do not apply to initial type {typ!r}")

    if typ == "hermite":
        if "coefficients" not in init:
            raise ConfigurationError("hermite initial data needs 'coefficients'")
        return _parse_coefficients(init["coefficients"], model)

    if typ == "gaussian":
        c = init.get("c", (2.0,))
        if len(c) != 1:
            raise ConfigurationError("gaussian profile takes a single c")
        _require(model, "Gaussian profiles")
        try:
            return GaussianProfile(init.get("family", "reverse"), c[0], sc.n)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from None

    row = init.get("row", 1)
    if row == 1:
        return constant_field(model)
    if row == 2:
        _require(model, "row 2")
        c = init.get("c", (1.0,))
        if len(c) not in (1, sc.n):
            raise ConfigurationError(f"row 2 needs 1 or {sc.n} components for c")
        return linear_field(model, c)
    if row in (3, 4):
        if row == 3:
            _require(model, "row 3")
        return potential_field(model)
    if row == 5:
        _require(model, "row 5 pointwise data")
        deg = init.get("degree", 3)
        if deg < 0:
            raise ConfigurationError("degree must be >= 0")
        return _eigen_row(model, deg)
    if row in (6, 7):
        _require(model, f"row {row}")
        c = init.get("c", (2.0,) if row == 6 else (1.5,))
        if len(c) != 1:
            raise ConfigurationError("profile rows take a single c")
        family = "reverse" if row == 6 else "forward"
        try:
            return GaussianProfile(family, c[0], sc.n)
        except ValueError as exc:
            raise ConfigurationError(str(exc)) from None
    raise ConfigurationError(f"row must be 1..7, got {row}")


def _require(model, what):
    if model.kind is not Kind.EUCLIDEAN:
        raise ConfigurationError(f"{what} needs the Euclidean model")


def sample_points(sc: Scenario, count: int = 20, box: float = 3.0):
    rng = np.random.default_rng([sc.seed, 7])
    return rng.uniform(-box, box, size=(count, sc.n))


def finite_or_str(x):
    """JSON-safe float."""
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x
