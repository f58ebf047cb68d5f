"""Unit system carrying the three constants that appear in every prefactor."""

from __future__ import annotations

from dataclasses import dataclass

from scipy import constants


@dataclass(frozen=True)
class UnitSystem:
    """Values of hbar, eps0 and c in whatever unit system the caller works in."""

    hbar: float = 1.0
    eps0: float = 1.0
    c: float = 1.0

    def __post_init__(self):
        for name in ("hbar", "eps0", "c"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"{name} must be strictly positive, got {value!r}")

    def scaled(self, hbar: float = 1.0, eps0: float = 1.0, c: float = 1.0) -> "UnitSystem":
        return UnitSystem(self.hbar * hbar, self.eps0 * eps0, self.c * c)


def natural_units() -> UnitSystem:
    return UnitSystem(1.0, 1.0, 1.0)


def si_units() -> UnitSystem:
    return UnitSystem(constants.hbar, constants.epsilon_0, constants.c)
