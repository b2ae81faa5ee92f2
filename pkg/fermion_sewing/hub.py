"""Command hub that evaluates one RunSpec.

Every command runs through SewingHub.run, which turns the outcome into a
returns Result: Success with a Payload, or Failure with the error that
stopped the evaluation.

References:
 - https://returns.readthedocs.io/en/latest/pages/result.html

"""

from __future__ import annotations

import cmath
import math
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any

from returns.result import Failure, Result, Success

from .checks import CheckContext, run_check
from .config_flow import RunSpec
from .const import (
    DEFAULT_CONVERGENCE_STEP,
    LOGGER,
    Command,
    DomainError,
    FermionSewingError,
    ParseError,
)
from .fermion import (
    CharPair,
    gen_form_2n,
    virasoro_onept,
    z1_partition,
    z2_heisenberg,
    z2_partition_rank1,
)
from .sewing import SewingConfig, det_i_minus_q, in_domain, szego_g2

CONVERGENCE_WARNING = 1e-8


@dataclass(frozen=True)
class Payload:
    """What a successful command hands to the writers."""

    command: str
    config: dict[str, Any]
    truncation: dict[str, Any]
    result: dict[str, Any] = field(default_factory=dict)
    rows: list[dict[str, Any]] = field(default_factory=list)


class SewingHub:
    """Evaluates the quantity a RunSpec asks for."""

    def __init__(self, settings: RunSpec, max_workers: int | None = None) -> None:
        """Initialize the hub for one run."""
        self.settings = settings
        self._max_workers = max_workers
        self._handlers: dict[Command, Callable[[], dict[str, Any] | list[dict[str, Any]]]] = {
            Command.Z1: self._z1,
            Command.Z2: self._z2,
            Command.Z2Rank1: self._z2_rank1,
            Command.Z2Heisenberg: self._z2_heisenberg,
            Command.Szego: self._szego,
            Command.GenForm: self._genform,
            Command.Virasoro: self._virasoro,
            Command.Check: self._check,
            Command.Scan: self._scan,
        }

    def run(self) -> Result[Payload, FermionSewingError]:
        """Evaluate the command; never raises a FermionSewingError."""
        settings = self.settings
        LOGGER.debug("HUB: running %s", settings.command)
        try:
            outcome = self._handlers[settings.command]()
        except FermionSewingError as exception:
            LOGGER.debug("HUB: %s failed: %s", settings.command, exception)
            return Failure(exception)
        payload = Payload(str(settings.command), settings.echo(), self._truncation())
        if isinstance(outcome, list):
            return Success(replace(payload, rows=outcome))
        return Success(replace(payload, result=outcome))

    def _truncation(self) -> dict[str, Any]:
        settings = self.settings
        return {
            "M": settings.order,
            "W": settings.weight_cap,
            "rel_tol": settings.rel_tol,
            "max_terms": settings.max_terms,
            "theta_cap": settings.theta_cap,
        }

    def _converged(self, quantity: Callable[[SewingConfig], complex]) -> dict[str, Any]:
        """Value at M with the self-convergence estimate against M + 4."""
        cfg = self.settings.sewing_config()
        value = quantity(cfg)
        bigger = cfg.with_order(cfg.order + DEFAULT_CONVERGENCE_STEP)
        reference = quantity(bigger)
        estimate = abs(value - reference) / (abs(value) or 1.0)
        if estimate > CONVERGENCE_WARNING:
            LOGGER.warning(
                "Self-convergence %.3g between M = %d and M = %d exceeds %g",
                estimate,
                cfg.order,
                bigger.order,
                CONVERGENCE_WARNING,
            )
        return {"value": value, "self_convergence": estimate}

    def _split_points(self) -> tuple[list, list]:
        points = list(self.settings.points)
        if len(points) < 2 or len(points) % 2:
            raise ParseError(f"points: need an even number of points, got {len(points)}")
        half = len(points) // 2
        return points[:half], points[half:]

    def _z1(self) -> dict[str, Any]:
        settings = self.settings
        t1, t2 = settings.twists
        cfg = settings.sewing_config()
        return {
            "value": z1_partition(t1, cfg.tau1, cfg.pol),
            "torus2": z1_partition(t2, cfg.tau2, cfg.pol),
        }

    def _tori(self, cfg: SewingConfig, chars: CharPair) -> complex:
        """Z1(tau_1) Z1(tau_2), the eps-independent factor of Z2."""
        return z1_partition(chars.t1, cfg.tau1, cfg.pol) * z1_partition(chars.t2, cfg.tau2, cfg.pol)

    def _z2(self) -> dict[str, Any]:
        chars = self.settings.chars()
        result = self._converged(lambda cfg: det_i_minus_q(cfg, chars.t1, chars.t2))
        det = result["value"]
        result["det_i_minus_q"] = det
        result["value"] = self._tori(self.settings.sewing_config(), chars) * det
        return result

    def _z2_rank1(self) -> dict[str, Any]:
        chars = self.settings.chars()
        return self._converged(lambda cfg: z2_partition_rank1(cfg, chars))

    def _z2_heisenberg(self) -> dict[str, Any]:
        return self._converged(z2_heisenberg)

    def _szego(self) -> dict[str, Any]:
        chars = self.settings.chars()
        ws, zs = self._split_points()
        w, z = ws[0], zs[0]
        return self._converged(lambda cfg: szego_g2(w, z, cfg, chars.t1, chars.t2))

    def _genform(self) -> dict[str, Any]:
        chars = self.settings.chars()
        ws, zs = self._split_points()
        result = self._converged(lambda cfg: gen_form_2n(ws, zs, cfg, chars))
        result["n"] = len(ws)
        return result

    def _virasoro(self) -> dict[str, Any]:
        chars = self.settings.chars()
        points = self.settings.points
        if not points or points[0].torus != 1:
            raise ParseError("points: the Virasoro form needs a first point on torus 1")
        point = points[0]
        return self._converged(lambda cfg: virasoro_onept(point, cfg, chars))

    def _check(self) -> dict[str, Any]:
        settings = self.settings
        if settings.check is None:
            raise ParseError("check: the check command needs a check name")
        ws, zs = self._split_points()
        ctx = CheckContext(
            settings.sewing_config(),
            settings.chars(),
            settings.cutoff(),
            budget=settings.check_order,
            points=(ws[0], zs[0]),
        )
        report = run_check(settings.check, ctx)
        if not report.passed:
            LOGGER.warning(
                "Check %s failed: residual %.3g against tolerance %.3g",
                report.name,
                report.residual,
                report.tol,
            )
        return asdict(report)

    def _scan_row(
        self, index: int, cfg: SewingConfig, step: complex, chars: CharPair, tori: complex
    ) -> dict[str, Any]:
        eps = step * (index + 1)
        # NaN marks quantities left unevaluated outside the domain
        row: dict[str, Any] = {
            "index": index,
            "eps": eps,
            "abs_z2": math.nan,
            "det_i_minus_q": complex(math.nan, math.nan),
        }
        point = cfg.with_eps(eps)
        row["in_domain"] = in_domain(point)
        if not row["in_domain"]:
            return row
        try:
            det = det_i_minus_q(point, chars.t1, chars.t2)
        except DomainError as exception:
            LOGGER.info("Scan point %d filtered: %s", index, exception)
            row["in_domain"] = False
        else:
            row["det_i_minus_q"] = det
            row["abs_z2"] = abs(tori * det)
        return row

    def _scan(self) -> list[dict[str, Any]]:
        """Evaluate an eps grid along the ray through settings.eps; rows keep grid order."""
        settings = self.settings
        chars = settings.chars()
        cfg = settings.sewing_config()
        tori = self._tori(cfg, chars)
        direction = cmath.exp(1j * cmath.phase(settings.eps)) if settings.eps else 1
        step = direction * settings.eps_max_fraction * cfg.bound / settings.eps_grid
        with ThreadPoolExecutor(max_workers=self._max_workers) as pool:
            rows = list(
                pool.map(
                    lambda index: self._scan_row(index, cfg, step, chars, tori),
                    range(settings.eps_grid),
                )
            )
        filtered = sum(1 for row in rows if not row["in_domain"])
        if filtered:
            LOGGER.info("Scan: %d of %d grid points lie outside the sewing domain", filtered, len(rows))
        return rows
