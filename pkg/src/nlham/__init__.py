"""Effective Hamiltonians for second-order nonlinear processes of an atom in an absorbing dielectric."""

from .errors import DomainError
from .units import UnitSystem, natural_units, si_units

__all__ = ["DomainError", "UnitSystem", "natural_units", "si_units"]
__version__ = "0.1.0"
