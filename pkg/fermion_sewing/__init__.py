"""Free fermion partition and correlation functions on a sewn genus two surface.

Two tori with twisted characteristics are glued along annuli z1 z2 = eps.
The package evaluates the genus two partition function, Szego kernel and
generating forms as truncated determinants of elliptic Laurent-coefficient
matrices, checks them against Fock-basis sums, and tests modular behavior.
"""

from __future__ import annotations

from .const import DOMAIN, NAME, VERSION

__version__ = VERSION
