"""Command-line front end.

    fermion-sewing z2 --tau1 i --tau2 1.2i --eps 0.01 --alpha1 0.3
    fermion-sewing check jacobi-product --order 6 --eps 0.05
    fermion-sewing scan --eps-grid 32 --format csv --output scan.csv

References:
 - https://docs.python.org/3/library/argparse.html
 - https://github.com/borntyping/python-colorlog

"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from collections.abc import Mapping, Sequence
from dataclasses import asdict
from enum import StrEnum
from pathlib import Path
from typing import Any

import colorlog
import numpy as np
from returns.result import Failure, Success

from .checks import CHECKS
from .config_flow import (
    CONF_CHECK,
    CONF_COMMAND,
    RunSpec,
    load_config,
)
from .const import (
    LOGGER,
    NAME,
    VERSION,
    BranchAmbiguityError,
    Command,
    DegenerateTwistError,
    DomainError,
    FermionSewingError,
    LimitUnstableError,
    NumericalError,
    OutputFormat,
    ParseError,
)
from .hub import Payload, SewingHub

EXIT_OK = 0
EXIT_OTHER = 1
EXIT_DOMAIN = 2
EXIT_NUMERICAL = 3

LOG_FORMAT = "%(log_color)s%(levelname)-8s%(reset)s %(name)s: %(message)s"

# flag -> config key, for the options every subcommand accepts
SHARED_OPTIONS: dict[str, str] = {
    "--tau1": "tau1",
    "--tau2": "tau2",
    "--eps": "eps",
    "--alpha1": "alpha1",
    "--beta1": "beta1",
    "--alpha2": "alpha2",
    "--beta2": "beta2",
    "--xi": "xi",
    "--M": "M",
    "--W": "W",
    "--rel-tol": "rel_tol",
    "--max-terms": "max_terms",
    "--theta-cap": "theta_cap",
    "--points": "points",
    "--eps-grid": "eps_grid",
    "--eps-max-fraction": "eps_max_fraction",
    "--order": "order",
    "--output": "output",
    "--format": "format",
}


def setup_logging(verbose: bool = False) -> None:
    """Colored diagnostics on stderr; DEBUG with --verbose, WARNING otherwise."""
    handler = colorlog.StreamHandler(sys.stderr)
    handler.setFormatter(colorlog.ColoredFormatter(LOG_FORMAT))
    for old in list(LOGGER.handlers):
        LOGGER.removeHandler(old)
    LOGGER.addHandler(handler)
    LOGGER.setLevel(logging.DEBUG if verbose else logging.WARNING)


def build_parser() -> argparse.ArgumentParser:
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--config", type=Path, help="key=value file; flags override its values")
    shared.add_argument("-v", "--verbose", action="store_true", help="log at DEBUG level")
    for flag, key in SHARED_OPTIONS.items():
        shared.add_argument(flag, dest=key, default=None, metavar=key.upper())

    parser = argparse.ArgumentParser(
        prog="fermion-sewing",
        description=f"{NAME}: free fermion partition and correlation functions at genus two.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {VERSION}")
    commands = parser.add_subparsers(dest=CONF_COMMAND, required=True)
    for command in Command:
        sub = commands.add_parser(str(command), parents=[shared])
        if command == Command.Check:
            sub.add_argument(CONF_CHECK, choices=sorted(CHECKS))
    return parser


def _plain(value: Any) -> Any:
    """JSON-ready copy: complex -> [re, im], non-finite floats -> null."""
    match value:
        case np.generic():
            return _plain(value.item())
        case bool() | None:
            return value
        case StrEnum():
            return str(value)
        case complex():
            return [_plain(value.real), _plain(value.imag)]
        case float():
            return value if math.isfinite(value) else None
        case int() | str():
            return value
        case Mapping():
            return {str(key): _plain(item) for key, item in value.items()}
        case Sequence():
            return [_plain(item) for item in value]
    raise TypeError(f"cannot serialize {type(value).__name__}")


def render_json(payload: Payload) -> str:
    document: dict[str, Any] = {
        "command": payload.command,
        "config": payload.config,
        "truncation": payload.truncation,
    }
    if payload.rows:
        document["rows"] = payload.rows
    else:
        document["result"] = payload.result
    return json.dumps(_plain(document), indent=2, allow_nan=False) + "\n"


def _cell(value: Any) -> str:
    if isinstance(value, np.generic):
        value = value.item()
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        # repr is the shortest round-trip text, the same json.dumps writes
        return repr(float(value)) if math.isfinite(value) else ""
    return str(value)


def _flatten(row: Mapping[str, Any], prefix: str = "") -> dict[str, str]:
    flat: dict[str, str] = {}
    for key, value in row.items():
        name = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(_flatten(value, f"{name}."))
        elif isinstance(value, complex):
            flat[f"{name}_re"] = _cell(value.real)
            flat[f"{name}_im"] = _cell(value.imag)
        else:
            flat[name] = _cell(value)
    return flat


def render_csv(payload: Payload) -> str:
    """One header row, then one row per scan point or a single result row."""
    if payload.rows:
        rows = [_flatten({**row, **payload.truncation}) for row in payload.rows]
    else:
        rows = [_flatten({**payload.result, **payload.truncation})]
    buffer = io.StringIO()
    fieldnames = list(dict.fromkeys(key for row in rows for key in row))
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, restval="", lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


def write_artifact(payload: Payload, settings: RunSpec) -> None:
    text = render_csv(payload) if settings.output_format == OutputFormat.Csv else render_json(payload)
    if settings.output is None:
        sys.stdout.write(text)
        return
    Path(settings.output).write_text(text, encoding="utf-8")
    LOGGER.debug("wrote %s", settings.output)


def exit_code(error: FermionSewingError) -> int:
    if isinstance(error, (DomainError, DegenerateTwistError, ParseError)):
        return EXIT_DOMAIN
    if isinstance(error, (NumericalError, BranchAmbiguityError, LimitUnstableError)):
        return EXIT_NUMERICAL
    return EXIT_OTHER


def run(settings: RunSpec, max_workers: int | None = None) -> int:
    """Evaluate the run, write its artifact and return the process exit code."""
    match SewingHub(settings, max_workers).run():
        case Success(payload):
            write_artifact(payload, settings)
            return EXIT_OK
        case Failure(error):
            LOGGER.error("%s: %s", type(error).__name__, error)
            return exit_code(error)
    return EXIT_OTHER


def main(argv: Sequence[str] | None = None) -> int:
    args = vars(build_parser().parse_args(argv))
    setup_logging(args.pop("verbose"))
    path = args.pop("config")
    try:
        settings = load_config(path, args)
    except ParseError as exception:
        LOGGER.error("%s", exception)
        return EXIT_DOMAIN
    LOGGER.debug("effective configuration: %s", asdict(settings))
    return run(settings)
