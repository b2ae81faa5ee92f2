"""Constants for fermion_sewing."""

from enum import StrEnum
from logging import Logger, getLogger


LOGGER: Logger = getLogger(__package__)


class FermionSewingError(Exception):
    """Exception to indicate a general evaluation error."""


class NumericalError(FermionSewingError):
    """Exception to indicate a numerical failure (exit code 3)."""


class NonConvergentError(NumericalError):
    """Exception to indicate a series or lattice sum hit its hard cap."""


class LinearSolveFailure(NumericalError):
    """Exception to indicate a numerically singular linear system."""


class DomainError(FermionSewingError):
    """Exception to indicate an input outside the admissible region (exit code 2)."""


class OutOfStripError(DomainError):
    """Exception to indicate a point outside the convergence strip of P_k."""


class DomainViolationError(DomainError):
    """Exception to indicate a configuration or point outside the sewing domain."""


class SingularPointError(DomainError):
    """Exception to indicate evaluation at (or too close to) a pole."""


class DegenerateTwistError(FermionSewingError):
    """Exception to indicate the characteristic (theta, phi) = (1, 1)."""


class BranchAmbiguityError(FermionSewingError):
    """Exception to indicate a square-root branch could not be tracked."""


class LimitUnstableError(FermionSewingError):
    """Exception to indicate Richardson extrapolants disagree."""


class IndexOutOfRangeError(FermionSewingError):
    """Exception to indicate a graph label beyond the matrix truncation."""


class ParseError(FermionSewingError):
    """Exception to indicate a malformed configuration value."""


NAME = "Fermion Sewing"
DOMAIN = "fermion_sewing"
VERSION = "1.0.0"

DEFAULT_REL_TOL = 1e-13
DEFAULT_MAX_TERMS = 4096
MIN_MAX_TERMS = 8
DEFAULT_THETA_CAP = 64
DEFAULT_ORDER = 16  # Truncation order M of every sewing matrix
DEFAULT_WEIGHT_CAP = 6.0
DEFAULT_RADIUS_FRACTION = 0.49  # r_a = 0.49 * D(q_a), just inside D(q_a) / 2
DEFAULT_BRANCH_SAMPLES = 64
DEFAULT_CONVERGENCE_STEP = 4  # Self-convergence compares M with M + 4
SINGULAR_DISTANCE = 1e-12
LIMIT_REL_TOL = 1e-5


class Command(StrEnum):
    """The quantities the command line can evaluate."""

    Z1 = "z1"
    Z2 = "z2"
    Z2Rank1 = "z2-rank1"
    Z2Heisenberg = "z2-heisenberg"
    Szego = "szego"
    GenForm = "genform"
    Virasoro = "virasoro"
    Check = "check"
    Scan = "scan"


class OutputFormat(StrEnum):
    """The artifact formats."""

    Json = "json"
    Csv = "csv"


class Branch(StrEnum):
    """The two choices of xi = sqrt(-1) on the double cover."""

    Plus = "+i"
    Minus = "-i"
