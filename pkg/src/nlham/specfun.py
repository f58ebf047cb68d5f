"""Order-one spherical Bessel and Hankel functions of complex argument.

Only order one enters the cavity coefficients, so these are closed forms
rather than a general-order library.  ``bracket_deriv_*`` return
d/dz [z f(z)], differentiated by hand.
"""

from __future__ import annotations

import cmath

from .errors import DomainError

# below this |z| the closed forms lose most of their digits to cancellation
SERIES_SWITCH = 1e-2
SERIES_TERMS = 8


def _j1_series(z: complex) -> complex:
    # j1(z) = sum_k (-1)^k z^(2k+1) / (2^k k! (2k+3)!!)
    total = 0j
    term = z / 3.0
    z2 = z * z
    for k in range(SERIES_TERMS):
        total += term
        term *= -z2 / (2.0 * (k + 1) * (2 * k + 5))
    return total


def _zj1_deriv_series(z: complex) -> complex:
    # d/dz [z j1(z)] = sum_k (-1)^k (2k+2) z^(2k+1) / (2^k k! (2k+3)!!)
    total = 0j
    term = z / 3.0
    z2 = z * z
    for k in range(SERIES_TERMS):
        total += (2 * k + 2) * term
        term *= -z2 / (2.0 * (k + 1) * (2 * k + 5))
    return total


def sph_j1(z: complex) -> complex:
    z = complex(z)
    if abs(z) < SERIES_SWITCH:
        return _j1_series(z)
    return cmath.sin(z) / z**2 - cmath.cos(z) / z


def sph_h1(z: complex) -> complex:
    """Spherical Hankel function of the first kind, h1(z) = (1/z + i/z^2) e^{iz}."""
    z = complex(z)
    if z == 0:
        raise DomainError("h1 has a pole at z = 0")
    return (1.0 / z + 1j / z**2) * cmath.exp(1j * z)


def bracket_deriv_j1(z: complex) -> complex:
    z = complex(z)
    if abs(z) < SERIES_SWITCH:
        return _zj1_deriv_series(z)
    # z j1 = sin z / z - cos z
    return cmath.cos(z) / z - cmath.sin(z) / z**2 + cmath.sin(z)


def bracket_deriv_h1(z: complex) -> complex:
    z = complex(z)
    if z == 0:
        raise DomainError("[z h1(z)]' has a pole at z = 0")
    # z h1 = (1 + i/z) e^{iz}
    return cmath.exp(1j * z) * (1j - 1.0 / z - 1j / z**2)
