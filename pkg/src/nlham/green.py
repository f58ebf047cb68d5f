"""Dyadic Green tensor of a homogeneous medium and the cavity-corrected variant."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .lfc import ctilde, dtilde, refractive_index
from .media import PermittivityModel, permittivity
from .units import UnitSystem, natural_units


@dataclass(frozen=True, eq=False)
class GreenValue:
    tensor: np.ndarray
    source: np.ndarray
    field: np.ndarray


@dataclass(frozen=True, eq=False)
class CavityGreen:
    """Cavity-corrected Green function for an atom at ``bulk.source``.

    The reflection part is a contact term ``delta_coefficient * delta(r_A - r) I``
    and is carried as a number, never sampled.  Away from the atom only
    ``bulk_scale * bulk.tensor`` survives.
    """

    delta_coefficient: complex
    bulk_scale: complex
    bulk: GreenValue

    def tensor(self) -> np.ndarray:
        return self.bulk_scale * self.bulk.tensor


def _tensor(sep: np.ndarray, k: complex) -> np.ndarray:
    rho = float(np.linalg.norm(sep))
    rhat = sep / rho
    kr = k * rho
    pref = np.exp(1j * kr) / (4 * np.pi * rho)
    a = 1 + (1j * kr - 1) / kr**2
    b = (3 - 3j * kr - kr**2) / kr**2
    return pref * (a * np.eye(3) + b * np.outer(rhat, rhat))


def green_homogeneous(r_f, r_s, omega: float, eps: complex, u: UnitSystem | None = None) -> GreenValue:
    """G(r_f, r_s, w) solving curl curl G - (w^2/c^2) eps G = delta in an infinite medium."""
    u = u or natural_units()
    r_f = np.asarray(r_f, float)
    r_s = np.asarray(r_s, float)
    if not omega > 0:
        raise DomainError("green_homogeneous needs omega > 0")
    sep = r_f - r_s
    if not np.linalg.norm(sep) > 0:
        raise DomainError("Green tensor is singular at coincident points")
    k = refractive_index(eps) * omega / u.c
    return GreenValue(_tensor(sep, k), r_s, r_f)


def helmholtz_residual(omega: float, eps: complex, r_s, r_probe, h: float,
                       u: UnitSystem | None = None) -> float:
    """Relative residual |curl curl G - k^2 G| / |k^2 G| at a probe point.

    Second derivatives are second-order central differences in the field point.
    """
    u = u or natural_units()
    r_s = np.asarray(r_s, float)
    r_probe = np.asarray(r_probe, float)
    if not np.linalg.norm(r_probe - r_s) > 10 * h:
        raise ValueError("probe must be farther than 10 h from the source")
    if not h < 1e-2 * u.c / (abs(refractive_index(eps)) * omega):
        raise ValueError("step h too coarse for the local wavelength")
    k = refractive_index(eps) * omega / u.c

    def G(dx):
        return _tensor(r_probe + dx - r_s, k)

    e = np.eye(3) * h
    g0 = G(np.zeros(3))
    dd = np.empty((3, 3, 3, 3), complex)  # dd[l, m] = d_l d_m G
    for l in range(3):
        dd[l, l] = (G(e[l]) - 2 * g0 + G(-e[l])) / h**2
        for m in range(l + 1, 3):
            v = (G(e[l] + e[m]) - G(e[l] - e[m]) - G(-e[l] + e[m]) + G(-e[l] - e[m])) / (4 * h**2)
            dd[l, m] = dd[m, l] = v
    grad_div = np.einsum("illj->ij", dd)
    lap = np.einsum("llij->ij", dd)
    res = grad_div - lap - k**2 * g0
    return float(np.linalg.norm(res) / np.linalg.norm(k**2 * g0))


def green_cavity_corrected(r_A, r_f, omega: float, host: PermittivityModel,
                           u: UnitSystem | None = None) -> CavityGreen:
    u = u or natural_units()
    if not omega > 0:
        raise DomainError("green_cavity_corrected needs omega > 0")
    eps = permittivity(host, omega)
    bulk = green_homogeneous(r_f, r_A, omega, eps, u)
    return CavityGreen(ctilde(eps) * u.c**2 / omega**2, dtilde(eps), bulk)
