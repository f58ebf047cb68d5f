"""Principal-value quadrature and Kramers-Kronig checks.

All integrals run over a uniform grid symmetric about zero with the pole on a
node.  Off-node samples are weighted by the trapezoid rule and divided by
``pole - x``; the excluded node contributes ``-h f'(pole)``, which is what the
symmetric pairing of nodes around the pole leaves behind.  Every pole can be
treated at once because the kernel depends only on index differences.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.signal import fftconvolve

from .errors import DomainError


@dataclass(frozen=True, eq=False)
class FrequencyGrid:
    points: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.points, float)
        if x.ndim != 1 or x.size < 5:
            raise ValueError("grid needs at least 5 points")
        h = np.diff(x)
        if np.any(h <= 0):
            raise ValueError("grid must be strictly increasing")
        if np.ptp(h) > 1e-9 * h.mean():
            raise ValueError("grid must be uniform")
        if not np.allclose(x, -x[::-1], rtol=0, atol=1e-9 * h.mean()):
            raise ValueError("grid must be symmetric about 0")
        object.__setattr__(self, "points", x)

    @classmethod
    def symmetric(cls, half_width: float, n_points: int) -> "FrequencyGrid":
        if n_points % 2 == 0:
            raise ValueError("use an odd point count so that 0 is a node")
        return cls(np.linspace(-half_width, half_width, n_points))

    @property
    def spacing(self) -> float:
        return float(self.points[1] - self.points[0])

    @property
    def half_width(self) -> float:
        return float(self.points[-1])

    def __len__(self) -> int:
        return self.points.size

    def index_of(self, omega: float) -> int:
        """Node index of ``omega``; the node must not touch the boundary."""
        h = self.spacing
        p = int(round((omega - self.points[0]) / h))
        if p < 0 or p >= len(self) or abs(self.points[p] - omega) > 1e-6 * h:
            raise ValueError(f"pole {omega} is not a grid node")
        if p < 1 or p > len(self) - 2:
            raise ValueError(f"pole {omega} is within one spacing of the boundary")
        return p


def _trapezoid_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] = w[-1] = h / 2
    return w


def pv_weights(grid: FrequencyGrid, p: int) -> np.ndarray:
    """Weights ``k`` with ``k @ f`` the off-pole part of P int f(x)/(x_p - x) dx."""
    x = grid.points
    w = _trapezoid_weights(len(x), grid.spacing)
    d = x[p] - x
    k = np.zeros_like(x)
    m = np.arange(len(x)) != p
    k[m] = w[m] / d[m]
    return k


def pv_integral(f, grid: FrequencyGrid, pole: float) -> complex:
    """P int f(w') / (pole - w') dw' for samples ``f`` on ``grid``."""
    f = np.asarray(f)
    p = grid.index_of(pole)
    return complex(pv_weights(grid, p) @ f - (f[p + 1] - f[p - 1]) / 2)


def pv_transform(f, grid: FrequencyGrid) -> np.ndarray:
    """pv_integral at every interior node; boundary entries are NaN."""
    f = np.asarray(f, complex)
    n = len(grid)
    h = grid.spacing
    m = np.arange(-(n - 1), n)
    kern = np.zeros(m.size)
    kern[m != 0] = 1.0 / (m[m != 0] * h)
    wf = _trapezoid_weights(n, h) * f
    conv = fftconvolve(wf.real, kern, mode="full") + 1j * fftconvolve(wf.imag, kern, mode="full")
    out = conv[n - 1: 2 * n - 1].astype(complex)
    out[1:-1] -= (f[2:] - f[:-2]) / 2
    out[0] = out[-1] = np.nan
    return out


def _orientation(half_plane: str) -> float:
    # chi = s (i/pi) P int chi(w')/(w' - w) with s = +1 for lower-half-plane analyticity
    if half_plane == "lower":
        return 1.0
    if half_plane == "upper":
        return -1.0
    raise ValueError("half_plane must be 'lower' or 'upper'")


def linear_kk_residual(chi1: Callable, grid: FrequencyGrid, *, half_plane: str = "upper",
                       check_decay: bool = True, window: float = 0.5, stride: int = 1) -> float:
    """Worst defect of the two real/imaginary KK relations, relative to max|chi1|.

    ``half_plane`` names where ``chi1`` is analytic.  A passive medium with
    Im eps > 0 at positive frequency is analytic in the upper half-plane.
    ``half_plane="lower"`` gives Re chi = (P/pi) int Im chi / (w - w') and
    Im chi = -(P/pi) int Re chi / (w - w').  Defects are taken over nodes with
    ``|w| <= window * half_width``.
    """
    x = grid.points
    vals = np.asarray(chi1(x), complex) * np.ones_like(x)
    scale = float(np.abs(vals).max())
    if scale == 0.0:
        return 0.0
    if check_decay and max(abs(vals[0]), abs(vals[-1])) >= 1e-3 * scale:
        raise DomainError("chi1 does not decay at the grid boundary")
    s = _orientation(half_plane)
    re_from_im = s * pv_transform(vals.imag, grid).real / np.pi
    im_from_re = -s * pv_transform(vals.real, grid).real / np.pi
    sel = np.zeros(len(x), bool)
    sel[1:-1] = np.abs(x[1:-1]) <= window * grid.half_width
    idx = np.flatnonzero(sel)[::stride]
    defect = np.maximum(np.abs(re_from_im[idx] - vals.real[idx]), np.abs(im_from_re[idx] - vals.imag[idx]))
    return float(defect.max() / scale)


@dataclass(frozen=True)
class TTermParams:
    amplitude: complex
    w_ab: float
    g_ab: float
    w_ad: float
    g_ad: float

    def __post_init__(self):
        if not (self.g_ab > 0 and self.g_ad > 0):
            raise DomainError("T-term widths must be > 0")

    @property
    def pole_ab(self) -> complex:
        return complex(self.w_ab, self.g_ab)

    @property
    def pole_ad(self) -> complex:
        return complex(self.w_ad, self.g_ad)


def t_term(p: TTermParams, omega, omega_p):
    """A / ((w - w_ab - i G_ab)(w + w' - w_ad - i G_ad)), broadcast over arrays."""
    return p.amplitude / ((omega - p.pole_ab) * (omega + omega_p - p.pole_ad))


def _pv_by_residues(coef: complex, upper_poles: list[complex], real_pole: float) -> complex:
    """P int coef / (prod_k (x - p_k) (x - r)) dx with every p_k in the upper half-plane.

    The rest of the integrand is analytic below the axis, so closing there
    leaves only half the residue at r: -pi i coef / prod_k (r - p_k).  Needs at
    least one p_k for convergence; coincident p_k are fine.
    """
    if not upper_poles:
        raise ValueError("need at least one pole off the axis")
    den = 1.0 + 0j
    for pk in upper_poles:
        den *= real_pole - pk
    return complex(-1j * np.pi * coef / den)


def t_term_integrals(p: TTermParams, omega: float, omega_p: float) -> tuple[complex, complex, complex]:
    """The double integral and the two single integrals of the nonlinear KK relation.

    Returned as (P int int T/((x-w)(y-w')), P int T(x,w')/(x-w), P int T(w,y)/(y-w')).
    """
    a, b, A = p.pole_ab, p.pole_ad, p.amplitude
    # T(x, w') in x: poles at a and b - w'
    i_w = _pv_by_residues(A, [a, b - omega_p], omega)
    # T(w, y) in y: a single pole at b - w, prefactor 1/(w - a)
    i_wp = _pv_by_residues(A / (omega - a), [b - omega], omega_p)
    # inner y integral of T(x, y)/(y - w') for real x has its pole b - x above,
    # so it is -pi i/(x + w' - b) times the rest
    # so the outer x integrand is -pi i A/((x - a)(x - (b - w'))(x - w))
    i_double = _pv_by_residues(-1j * np.pi * A, [a, b - omega_p], omega)
    return i_double, i_w, i_wp


def nonlinear_kk_rhs(i_double: complex, i_w: complex, i_wp: complex) -> complex:
    return -i_double / (3 * np.pi**2) - i_w / (3j * np.pi) - i_wp / (3j * np.pi)


def t_term_residue_identity(p: TTermParams, omega: float, omega_p: float) -> complex:
    """Right-hand side of the nonlinear KK relation for one T-term, by residues."""
    return nonlinear_kk_rhs(*t_term_integrals(p, omega, omega_p))


def nonlinear_kk_residual(chi2: Callable, omega: float, omega_p: float, grid: FrequencyGrid, *,
                          decay_tol: float = 1e-2, chunk: int = 256) -> float:
    """|lhs - rhs| / |lhs| for the nonlinear KK relation, integrals by quadrature.

    ``chi2(w, w')`` must broadcast over arrays.  The double integral is the
    inner transform in w' taken row by row, then the outer transform in w.
    Returns the absolute defect if ``chi2`` vanishes at the test point.
    """
    x = grid.points
    n = len(x)
    p = grid.index_of(omega)
    q = grid.index_of(omega_p)
    kq = pv_weights(grid, q)
    inner = np.empty(n, complex)  # P int chi2(x_i, y) / (w' - y) dy
    peak = 0.0
    edge = 0.0
    for start in range(0, n, chunk):
        rows = slice(start, min(start + chunk, n))
        block = np.asarray(chi2(x[rows, None], x[None, :]), complex)
        peak = max(peak, float(np.abs(block).max()))
        edge = max(edge, float(np.abs(block[:, [0, -1]]).max()))
        if start == 0:
            edge = max(edge, float(np.abs(block[0]).max()))
        if rows.stop == n:
            edge = max(edge, float(np.abs(block[-1]).max()))
        inner[rows] = block @ kq - (block[:, q + 1] - block[:, q - 1]) / 2
    if peak > 0 and edge > decay_tol * peak:
        raise DomainError(f"chi2 boundary/peak ratio {edge / peak:.3g} exceeds {decay_tol}")
    # integrals with 1/(x - w) kernels are minus the 1/(w - x) transforms
    i_double = pv_integral(inner, grid, omega)
    i_w = -pv_integral(np.asarray(chi2(x, omega_p), complex) * np.ones(n), grid, omega)
    i_wp = -pv_integral(np.asarray(chi2(omega, x), complex) * np.ones(n), grid, omega_p)
    rhs = nonlinear_kk_rhs(i_double, i_w, i_wp)
    lhs = complex(chi2(omega, omega_p))
    if lhs == 0:
        return float(abs(rhs))
    return float(abs(lhs - rhs) / abs(lhs))
