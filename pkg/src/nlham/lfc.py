"""Real-cavity local-field correction.

Mie coefficients of an empty sphere of radius R in a host of permittivity eps,
their small-radius forms, and the factors that dress the polarizability and the
noise polarization of an embedded atom.  ``z0`` is the vacuum size parameter
w R / c and ``z = sqrt(eps) z0`` the one inside the host.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .atom import AtomModel, chi2
from .errors import DomainError
from .media import PermittivityModel, permittivity
from .specfun import bracket_deriv_h1, bracket_deriv_j1, sph_h1, sph_j1
from .units import UnitSystem, natural_units

COARSE_GRAIN_LIMIT = 0.1


@dataclass(frozen=True)
class CavityConfig:
    radius: float
    host: PermittivityModel
    atom_position: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"cavity radius must be > 0, got {self.radius}")
        object.__setattr__(self, "atom_position", tuple(float(x) for x in self.atom_position))

    def size_parameter(self, omega: float, u: UnitSystem | None = None) -> float:
        u = u or natural_units()
        return omega * self.radius / u.c

    def coarse_grained(self, omega: float, u: UnitSystem | None = None) -> bool:
        return abs(self.size_parameter(omega, u)) < COARSE_GRAIN_LIMIT


def refractive_index(eps: complex) -> complex:
    # principal branch: Im n >= 0 whenever Im eps >= 0
    return cmath.sqrt(complex(eps))


def _check_den(den: complex, what: str):
    if not abs(den) > 1e-300:
        raise DomainError(f"vanishing denominator in {what}")


def mie_C_exact(eps: complex, z0: complex) -> complex:
    """Reflection coefficient C of the cavity wall.

    Signed so that its small-radius expansion starts at
    +3 (eps-1)/(2 eps+1) / (i z0^3), which is what produces the positive
    reflection factor (2/3)(eps-1)/(2 eps+1).
    """
    eps, z0 = complex(eps), complex(z0)
    if z0 == 0:
        raise DomainError("z0 must be nonzero")
    z = refractive_index(eps) * z0
    h0, hz = sph_h1(z0), sph_h1(z)
    dh0, dhz = bracket_deriv_h1(z0), bracket_deriv_h1(z)
    den = eps * hz * bracket_deriv_j1(z0) - sph_j1(z0) * dhz
    _check_den(den, "mie_C_exact")
    return (eps * hz * dh0 - h0 * dhz) / den


def mie_C_expansion(eps: complex, z0: complex) -> complex:
    """First three orders (z0^-3, z0^-1, z0^0) of C in powers of z0."""
    eps, z0 = complex(eps), complex(z0)
    n = refractive_index(eps)
    q = 2 * eps + 1
    return (3 * (eps - 1) / q / (1j * z0**3)
            + 9 / 5 * (eps - 1) * (4 * eps + 1) / q**2 / (1j * z0)
            + 9 * eps * n**3 / q**2 - 1)


def mie_C_leading(eps: complex, z0: complex) -> complex:
    eps, z0 = complex(eps), complex(z0)
    return 3 * (eps - 1) / (2 * eps + 1) / (1j * z0**3)


def mie_D_exact(eps: complex, z0: complex) -> complex:
    """Transmission coefficient D through the cavity wall."""
    eps, z0 = complex(eps), complex(z0)
    if z0 == 0:
        raise DomainError("z0 must be nonzero")
    z = refractive_index(eps) * z0
    j0 = sph_j1(z0)
    num = j0 * bracket_deriv_h1(z0) - sph_h1(z0) * bracket_deriv_j1(z0)
    den = j0 * bracket_deriv_h1(z) - eps * sph_h1(z) * bracket_deriv_j1(z0)
    _check_den(den, "mie_D_exact")
    return num / den


def _pole_check(eps: complex, at: complex, what: str):
    if abs(complex(eps) - at) < 1e-14:
        raise DomainError(f"{what} has a pole at eps = {at}")


def dtilde(eps):
    """Small-cavity transmission factor 3 eps / (2 eps + 1)."""
    if np.ndim(eps):
        eps = np.asarray(eps, complex)
        if np.any(np.abs(eps + 0.5) < 1e-14):
            raise DomainError("dtilde has a pole at eps = -1/2")
        return 3 * eps / (2 * eps + 1)
    _pole_check(eps, -0.5, "dtilde")
    eps = complex(eps)
    return 3 * eps / (2 * eps + 1)


def ctilde(eps):
    """Small-cavity reflection factor (2/3)(eps - 1)/(2 eps + 1)."""
    if np.ndim(eps):
        eps = np.asarray(eps, complex)
        if np.any(np.abs(eps + 0.5) < 1e-14):
            raise DomainError("ctilde has a pole at eps = -1/2")
        return 2 / 3 * (eps - 1) / (2 * eps + 1)
    _pole_check(eps, -0.5, "ctilde")
    eps = complex(eps)
    return 2 / 3 * (eps - 1) / (2 * eps + 1)


def noise_lfc_factor(eps, u: UnitSystem | None = None):
    """Local correction of the noise polarization, (2 / (9 eps0)) (eps - 1) / eps."""
    u = u or natural_units()
    if np.ndim(eps):
        eps = np.asarray(eps, complex)
        if np.any(eps == 0):
            raise DomainError("noise correction has a pole at eps = 0")
        return 2 / (9 * u.eps0) * (eps - 1) / eps
    eps = complex(eps)
    if eps == 0:
        raise DomainError("noise correction has a pole at eps = 0")
    return 2 / (9 * u.eps0) * (eps - 1) / eps


def onsager_factors(eps: complex, u: UnitSystem | None = None) -> tuple[complex, complex]:
    """Onsager local-field factors (E_loc / E, P_loc / P) of a point dipole in a cavity."""
    u = u or natural_units()
    _pole_check(eps, -0.5, "onsager_factors")
    eps = complex(eps)
    q = 2 * eps + 1
    return 3 * eps / q, 2 / (3 * u.eps0) * (eps - 1) / q


def lfc_factor(host: PermittivityModel, omega: float, omega_p: float) -> complex:
    """conj(Dt(w)) conj(Dt(w')) Dt(w + w')."""
    e1, e2, e3 = (permittivity(host, w) for w in (omega, omega_p, omega + omega_p))
    return np.conj(dtilde(e1)) * np.conj(dtilde(e2)) * dtilde(e3)


def chi2_lfc(atom: AtomModel, host: PermittivityModel, omega: float, omega_p: float,
             u: UnitSystem | None = None) -> np.ndarray:
    """Polarizability of the atom embedded in the host."""
    return lfc_factor(host, omega, omega_p) * chi2(atom, omega, omega_p, u)
