"""Configuration flow.

Reads a key=value run file, overlays the command-line flags and validates
the merged values into a RunSpec.

References:
 - https://github.com/alecthomas/voluptuous

"""

from __future__ import annotations

from collections.abc import Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import voluptuous as vol

from .checks import CHECKS
from .const import (
    DEFAULT_MAX_TERMS,
    MIN_MAX_TERMS,
    DEFAULT_ORDER,
    DEFAULT_REL_TOL,
    DEFAULT_THETA_CAP,
    DEFAULT_WEIGHT_CAP,
    LOGGER,
    Branch,
    Command,
    OutputFormat,
    ParseError,
)
from .fermion import CharPair, CutoffPolicy
from .qseries import ModularParam, SeriesPolicy, TwistData
from .sewing import SewingConfig, SurfacePoint

_LOGGER = LOGGER.getChild("config")

CONF_COMMAND = "command"
CONF_CHECK = "check"
CONF_TAU1 = "tau1"
CONF_TAU2 = "tau2"
CONF_EPS = "eps"
CONF_ALPHA1 = "alpha1"
CONF_BETA1 = "beta1"
CONF_ALPHA2 = "alpha2"
CONF_BETA2 = "beta2"
CONF_XI = "xi"
CONF_TRUNCATION = "M"
CONF_WEIGHT_CAP = "W"
CONF_REL_TOL = "rel_tol"
CONF_MAX_TERMS = "max_terms"
CONF_THETA_CAP = "theta_cap"
CONF_POINTS = "points"
CONF_EPS_GRID = "eps_grid"
CONF_EPS_MAX_FRACTION = "eps_max_fraction"
CONF_CHECK_ORDER = "order"
CONF_OUTPUT = "output"
CONF_FORMAT = "format"

DEFAULT_POINTS = "1:0.8+0.5i; 2:0.7-0.6i"
DEFAULT_EPS_GRID = 32
DEFAULT_EPS_MAX_FRACTION = 0.9
DEFAULT_CHECK_ORDER = 6


def parse_complex(value: Any) -> complex:
    """Complex literal with either i or j as the imaginary unit; bare i and -i allowed."""
    if isinstance(value, bool):
        raise vol.Invalid(f"expected a complex number, got {value!r}")
    if isinstance(value, (int, float, complex)):
        return complex(value)
    text = str(value).strip().lower().replace(" ", "")
    if text in (Branch.Plus, "i"):
        return 1j
    if text == Branch.Minus:
        return -1j
    try:
        return complex(text.replace("i", "j"))
    except ValueError as exception:
        raise vol.Invalid(f"expected a complex number, got {value!r}") from exception


def upper_half_plane(value: complex) -> complex:
    if value.imag <= 0:
        raise vol.Invalid(f"tau must have positive imaginary part, got {value}")
    return value


def half_integer(value: float) -> float:
    if (2 * value) % 1:
        raise vol.Invalid(f"expected a multiple of 1/2, got {value}")
    return value


def parse_points(value: Any) -> tuple[SurfacePoint, ...]:
    """`torus:z` pairs separated by semicolons, e.g. `1:0.8+0.5i; 2:0.7-0.6i`."""
    if isinstance(value, Sequence) and not isinstance(value, str):
        if all(isinstance(point, SurfacePoint) for point in value):
            return tuple(value)
        raise vol.Invalid(f"expected surface points, got {value!r}")
    points = []
    for item in str(value).split(";"):
        if not item.strip():
            continue
        torus, sep, z = item.partition(":")
        if not sep or torus.strip() not in ("1", "2"):
            raise vol.Invalid(f"expected torus:z with torus 1 or 2, got {item.strip()!r}")
        points.append(SurfacePoint(int(torus), parse_complex(z)))
    return tuple(points)


COMPLEX = vol.All(parse_complex)
CHARACTERISTIC = vol.All(vol.Coerce(float), vol.Range(min=0, max=1, max_included=False))
POSITIVE_INT = vol.All(vol.Coerce(int), vol.Range(min=1))

CONFIG_SCHEMA = vol.Schema(
    {
        vol.Required(CONF_COMMAND): vol.Coerce(Command),
        vol.Optional(CONF_CHECK, default=None): vol.Any(None, vol.In(sorted(CHECKS))),
        vol.Optional(CONF_TAU1, default=1j): vol.All(parse_complex, upper_half_plane),
        vol.Optional(CONF_TAU2, default=1j): vol.All(parse_complex, upper_half_plane),
        vol.Optional(CONF_EPS, default=0j): COMPLEX,
        vol.Optional(CONF_ALPHA1, default=0.0): CHARACTERISTIC,
        vol.Optional(CONF_BETA1, default=0.0): CHARACTERISTIC,
        vol.Optional(CONF_ALPHA2, default=0.0): CHARACTERISTIC,
        vol.Optional(CONF_BETA2, default=0.0): CHARACTERISTIC,
        vol.Optional(CONF_XI, default=1j): vol.All(parse_complex, vol.In([1j, -1j])),
        vol.Optional(CONF_TRUNCATION, default=DEFAULT_ORDER): POSITIVE_INT,
        vol.Optional(CONF_WEIGHT_CAP, default=DEFAULT_WEIGHT_CAP): vol.All(
            vol.Coerce(float), vol.Range(min=0), half_integer
        ),
        vol.Optional(CONF_REL_TOL, default=DEFAULT_REL_TOL): vol.All(
            vol.Coerce(float), vol.Range(min=0, max=1, min_included=False, max_included=False)
        ),
        vol.Optional(CONF_MAX_TERMS, default=DEFAULT_MAX_TERMS): vol.All(
            vol.Coerce(int), vol.Range(min=MIN_MAX_TERMS)
        ),
        vol.Optional(CONF_THETA_CAP, default=DEFAULT_THETA_CAP): POSITIVE_INT,
        vol.Optional(CONF_POINTS, default=DEFAULT_POINTS): parse_points,
        vol.Optional(CONF_EPS_GRID, default=DEFAULT_EPS_GRID): POSITIVE_INT,
        vol.Optional(CONF_EPS_MAX_FRACTION, default=DEFAULT_EPS_MAX_FRACTION): vol.All(
            vol.Coerce(float), vol.Range(min=0, max=2, min_included=False)
        ),
        vol.Optional(CONF_CHECK_ORDER, default=DEFAULT_CHECK_ORDER): POSITIVE_INT,
        vol.Optional(CONF_OUTPUT, default=None): vol.Any(None, str),
        vol.Optional(CONF_FORMAT, default=OutputFormat.Json): vol.Coerce(OutputFormat),
    }
)

KNOWN_KEYS = frozenset(str(key) for key in CONFIG_SCHEMA.schema)


@dataclass(frozen=True)
class RunSpec:
    """A validated run: one command plus every parameter it may consult."""

    command: Command
    check: str | None
    tau1: complex
    tau2: complex
    eps: complex
    alpha1: float
    beta1: float
    alpha2: float
    beta2: float
    xi: complex
    order: int
    weight_cap: float
    rel_tol: float
    max_terms: int
    theta_cap: int
    points: tuple[SurfacePoint, ...]
    eps_grid: int
    eps_max_fraction: float
    check_order: int
    output: str | None
    output_format: OutputFormat

    @classmethod
    def from_validated(cls, data: Mapping[str, Any]) -> RunSpec:
        return cls(
            command=data[CONF_COMMAND],
            check=data[CONF_CHECK],
            tau1=data[CONF_TAU1],
            tau2=data[CONF_TAU2],
            eps=data[CONF_EPS],
            alpha1=data[CONF_ALPHA1],
            beta1=data[CONF_BETA1],
            alpha2=data[CONF_ALPHA2],
            beta2=data[CONF_BETA2],
            xi=data[CONF_XI],
            order=data[CONF_TRUNCATION],
            weight_cap=data[CONF_WEIGHT_CAP],
            rel_tol=data[CONF_REL_TOL],
            max_terms=data[CONF_MAX_TERMS],
            theta_cap=data[CONF_THETA_CAP],
            points=data[CONF_POINTS],
            eps_grid=data[CONF_EPS_GRID],
            eps_max_fraction=data[CONF_EPS_MAX_FRACTION],
            check_order=data[CONF_CHECK_ORDER],
            output=data[CONF_OUTPUT],
            output_format=data[CONF_FORMAT],
        )

    @property
    def policy(self) -> SeriesPolicy:
        return SeriesPolicy(self.rel_tol, self.max_terms, self.theta_cap)

    @property
    def twists(self) -> tuple[TwistData, TwistData]:
        return TwistData(self.alpha1, self.beta1), TwistData(self.alpha2, self.beta2)

    def chars(self) -> CharPair:
        """Raises DegenerateTwistError if either torus carries (theta, phi) = (1, 1)."""
        return CharPair(*self.twists)

    def sewing_config(self) -> SewingConfig:
        return SewingConfig(
            ModularParam(self.tau1),
            ModularParam(self.tau2),
            self.eps,
            xi=self.xi,
            order=self.order,
            pol=self.policy,
        )

    def cutoff(self) -> CutoffPolicy:
        return CutoffPolicy(self.weight_cap, max(4, len(self.points)))

    def echo(self) -> dict[str, Any]:
        """The effective configuration under its file keys, in a fixed order."""
        return {
            CONF_COMMAND: str(self.command),
            CONF_CHECK: self.check,
            CONF_TAU1: self.tau1,
            CONF_TAU2: self.tau2,
            CONF_EPS: self.eps,
            CONF_ALPHA1: self.alpha1,
            CONF_BETA1: self.beta1,
            CONF_ALPHA2: self.alpha2,
            CONF_BETA2: self.beta2,
            CONF_XI: self.xi,
            CONF_TRUNCATION: self.order,
            CONF_WEIGHT_CAP: self.weight_cap,
            CONF_REL_TOL: self.rel_tol,
            CONF_MAX_TERMS: self.max_terms,
            CONF_THETA_CAP: self.theta_cap,
            CONF_POINTS: [{"torus": p.torus, "z": p.z} for p in self.points],
            CONF_EPS_GRID: self.eps_grid,
            CONF_EPS_MAX_FRACTION: self.eps_max_fraction,
            CONF_CHECK_ORDER: self.check_order,
            CONF_OUTPUT: self.output,
            CONF_FORMAT: str(self.output_format),
        }


def read_config_file(path: str | Path) -> dict[str, tuple[str, int]]:
    """key -> (raw value, line number); `#` starts a comment."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exception:
        raise ParseError(f"{path}: {exception.strerror or exception}") from exception
    entries: dict[str, tuple[str, int]] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ParseError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        if key not in KNOWN_KEYS:
            raise ParseError(f"{path}:{lineno}: unknown key {key!r}")
        if key in entries:
            _LOGGER.debug("%s:%d overrides %s from line %d", path, lineno, key, entries[key][1])
        entries[key] = (value.strip(), lineno)
    return entries


def validate(raw: Mapping[str, Any], origins: Mapping[str, str] | None = None) -> RunSpec:
    """Run the merged values through CONFIG_SCHEMA."""
    origins = origins or {}
    try:
        data = CONFIG_SCHEMA(dict(raw))
    except vol.Invalid as exception:
        key = str(exception.path[0]) if exception.path else "?"
        where = origins.get(key, "configuration")
        _LOGGER.debug("schema rejected %s: %s", key, exception)
        raise ParseError(f"{where}: key {key!r}: {exception.msg}") from exception
    return RunSpec.from_validated(data)


def load_config(
    path: str | Path | None = None, overrides: Mapping[str, Any] | None = None
) -> RunSpec:
    """Merge the file at `path` with `overrides`; flags win over file values.

    Overrides whose value is None are treated as absent so that unset
    command-line flags never mask the file.
    """
    raw: dict[str, Any] = {}
    origins: dict[str, str] = {}
    if path is not None:
        for key, (value, lineno) in read_config_file(path).items():
            raw[key] = value
            origins[key] = f"{path}:{lineno}"
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in KNOWN_KEYS:
            raise ParseError(f"command line: unknown key {key!r}")
        raw[key] = value
        origins[key] = "command line"
    return validate(raw, origins)
