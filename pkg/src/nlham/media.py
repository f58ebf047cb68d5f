"""Drude-Lorentz host permittivity and the noise-polarization amplitude."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .units import UnitSystem, natural_units


@dataclass(frozen=True)
class Resonance:
    plasma_freq: float
    resonance_freq: float
    damping: float

    def __post_init__(self):
        if self.plasma_freq < 0:
            raise ValueError(f"plasma_freq must be >= 0, got {self.plasma_freq}")
        if not self.resonance_freq > 0:
            raise ValueError(f"resonance_freq must be > 0, got {self.resonance_freq}")
        if not self.damping > 0:
            raise ValueError(f"damping must be > 0, got {self.damping}")


@dataclass(frozen=True)
class PermittivityModel:
    """eps(w) = 1 + sum_r wp^2 / (wr^2 - w^2 - i gamma w).

    An empty resonance list is vacuum.  ``absorption_scale`` multiplies the
    imaginary part only; it exists for the lossless-limit study and is 1 for
    every physical model.
    """

    resonances: tuple[Resonance, ...] = ()
    absorption_scale: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "resonances", tuple(self.resonances))
        if self.absorption_scale < 0:
            raise ValueError("absorption_scale must be >= 0")

    @classmethod
    def vacuum(cls) -> "PermittivityModel":
        return cls(())

    @classmethod
    def single(cls, plasma_freq: float, resonance_freq: float, damping: float) -> "PermittivityModel":
        return cls((Resonance(plasma_freq, resonance_freq, damping),))

    @property
    def is_vacuum(self) -> bool:
        return all(r.plasma_freq == 0 for r in self.resonances)

    def with_absorption_scale(self, t: float) -> "PermittivityModel":
        return PermittivityModel(self.resonances, self.absorption_scale * t)

    def __call__(self, omega):
        return permittivity(self, omega)


def permittivity(model: PermittivityModel, omega):
    """Complex permittivity on the real axis; accepts scalars or arrays."""
    w = np.asarray(omega, dtype=float)
    eps = np.ones_like(w, dtype=complex)
    for r in model.resonances:
        eps = eps + r.plasma_freq**2 / (r.resonance_freq**2 - w**2 - 1j * r.damping * w)
    if model.absorption_scale != 1.0:
        eps = eps.real + 1j * model.absorption_scale * eps.imag
    if eps.ndim == 0:
        return complex(eps)
    return eps


def susceptibility(model: PermittivityModel, omega):
    return permittivity(model, omega) - 1.0


def noise_amplitude(model: PermittivityModel, omega: float, u: UnitSystem | None = None) -> float:
    """sqrt(hbar eps0 eps''(w) / pi), the prefactor of the noise polarization."""
    u = u or natural_units()
    if not omega > 0:
        raise DomainError(f"noise amplitude needs omega > 0, got {omega}")
    eps_im = permittivity(model, omega).imag
    if eps_im < 0:
        raise DomainError(f"Im eps({omega}) = {eps_im} < 0 violates passivity")
    return float(np.sqrt(u.hbar * u.eps0 * eps_im / np.pi))
