"""p-adic mental-state modelling: exact p-adic arithmetic, finite grids on
Q_p^d, the Vladimirov operator, evolution, measurement and monomial dynamics."""

from .padic import BaseConfig, PadicNumber, encode, parse
from .grid import GridSpec, StateVector, make_grid

__all__ = ["BaseConfig", "PadicNumber", "encode", "parse", "GridSpec", "StateVector",
           "make_grid"]
__version__ = "0.1.0"
